//! The Stokes multiplier `C(E)` in `Y_{-1} = C Y_0 + Y_1` and its E-derivatives.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::canonical::{ray_solution, wronskian_yy, wronskian_zy, RayOptions, RaySolution};
use crate::error::Result;
use crate::potential::ProblemSpec;

/// Largest `|Wr(Y_0, Y_1) - 2|` for which a value counts as reliable.
pub const WRONSKIAN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesOptions {
    pub ray: RayOptions,
    pub matching_point: Complex64,
}

impl Default for StokesOptions {
    fn default() -> Self {
        Self { ray: RayOptions::default(), matching_point: Complex64::new(0.0, 0.0) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesValue {
    pub c: Complex64,
    pub c_prime: Complex64,
    /// Computed `Wr(Y_0, Y_1)` at [`wronskian_point`]; exactly 2 in theory.
    pub wr01: Complex64,
    pub wr_check: f64,
    /// `|(Y_{-1}, Y_{-1}')| |(Y_1, Y_1')| / 2`, so that `|C| / c_scale` is the
    /// sine of the angle between the two Cauchy data vectors.
    pub c_scale: f64,
    pub e: Complex64,
    pub spec_hash: u64,
}

impl StokesValue {
    pub fn reliable(&self) -> bool {
        self.wr_check <= WRONSKIAN_TOL
    }

    /// `|C| / c_scale`: zero exactly at an eigenvalue.
    pub fn cancellation(&self) -> f64 {
        if self.c_scale > 0.0 {
            self.c.norm() / self.c_scale
        } else {
            f64::INFINITY
        }
    }
}

/// Where `Wr(Y_0, Y_1)` is evaluated: `|E|^{1/m}` along the positive real
/// axis from `x0`. For large `E` both solutions are huge and nearly parallel
/// near the origin, and the Wronskian there is lost to cancellation; at the
/// classical length scale it is well conditioned.
pub fn wronskian_point(spec: &ProblemSpec, e: Complex64, x0: Complex64) -> Complex64 {
    x0 + e.norm().powf(1.0 / spec.degree() as f64)
}

/// `Y_{-1}, Y_1` at the matching point, and `Y_0, Y_1` at [`wronskian_point`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayTriple {
    pub minus: RaySolution,
    pub plus: RaySolution,
    pub zero: RaySolution,
    pub plus_check: RaySolution,
}

pub fn ray_triple(spec: &ProblemSpec, e: Complex64, opts: &StokesOptions) -> Result<RayTriple> {
    let x0 = opts.matching_point;
    let xw = wronskian_point(spec, e, x0);
    let plus = ray_solution(spec, e, 1, x0, &opts.ray)?;
    Ok(RayTriple {
        minus: ray_solution(spec, e, -1, x0, &opts.ray)?,
        plus,
        zero: ray_solution(spec, e, 0, xw, &opts.ray)?,
        plus_check: if xw == x0 { plus } else { ray_solution(spec, e, 1, xw, &opts.ray)? },
    })
}

impl RayTriple {
    pub fn stokes_value(&self, spec: &ProblemSpec, e: Complex64) -> StokesValue {
        let c = wronskian_yy(&self.minus, &self.plus) / 2.0;
        // d/dE Wr(Y_{-1}, Y_1) = Wr(Z_{-1}, Y_1) + Wr(Y_{-1}, Z_1).
        let c_prime = (wronskian_zy(&self.minus, &self.plus) - wronskian_zy(&self.plus, &self.minus)) / 2.0;
        let wr01 = wronskian_yy(&self.zero, &self.plus_check);
        let (a, b) = (&self.minus, &self.plus);
        let c_scale = (a.y().norm().hypot(a.yp().norm()) * b.y().norm().hypot(b.yp().norm())) / 2.0;
        StokesValue { c, c_prime, wr01, wr_check: (wr01 - 2.0).norm(), c_scale, e, spec_hash: spec.spec_hash() }
    }
}

/// `C(a, E)` and `dC/dE` from Wronskians of the rotated solutions.
pub fn stokes_multiplier(spec: &ProblemSpec, e: Complex64, opts: &StokesOptions) -> Result<StokesValue> {
    Ok(ray_triple(spec, e, opts)?.stokes_value(spec, e))
}

/// Batch evaluation over `energies`, in input order.
pub fn stokes_batch(spec: &ProblemSpec, energies: &[Complex64], opts: &StokesOptions) -> Vec<Result<StokesValue>> {
    energies.par_iter().map(|&e| stokes_multiplier(spec, e, opts)).collect()
}

pub fn default_second_derivative_step(e: Complex64) -> f64 {
    1e-4 * (1.0 + e.norm())
}

/// `C''(E)` by central differences of the variational `C'`, Richardson
/// extrapolated from steps `h` and `h/2`.
pub fn stokes_second_derivative(spec: &ProblemSpec, e: Complex64, h: f64, opts: &StokesOptions) -> Result<Complex64> {
    let (coarse, fine) = second_derivative_pair(spec, e, h, opts)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}

/// Plain central differences of `C'` with steps `h` and `h/2`.
pub fn second_derivative_pair(
    spec: &ProblemSpec,
    e: Complex64,
    h: f64,
    opts: &StokesOptions,
) -> Result<(Complex64, Complex64)> {
    let points = [e + h, e - h, e + h / 2.0, e - h / 2.0];
    let values: Vec<StokesValue> = stokes_batch(spec, &points, opts).into_iter().collect::<Result<_>>()?;
    let coarse = (values[0].c_prime - values[1].c_prime) / (2.0 * h);
    let fine = (values[2].c_prime - values[3].c_prime) / h;
    Ok((coarse, fine))
}

/// `2 sin(pi m / (2(m+2)))`: `-iC(0)` obtained from `Y_{-1}(0) = C Y_0(0) + Y_1(0)`
/// when all coefficients vanish.
pub fn c_at_zero_half_angle(m: usize) -> f64 {
    2.0 * (PI * m as f64 / (2.0 * (m as f64 + 2.0))).sin()
}

/// `2 sin(m pi / (m+2))`, the alternative closed form.
pub fn c_at_zero_full_angle(m: usize) -> f64 {
    2.0 * (m as f64 * PI / (m as f64 + 2.0)).sin()
}
