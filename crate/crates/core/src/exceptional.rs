//! Continuation of eigenvalues along one-parameter families and location of
//! the exceptional point where two real levels coalesce (`C = C' = 0`).
//!
//! For real `E` and a real problem both `C` and `C'` are purely imaginary, so
//! the coalescence is a real root of `(Im C, Im C')` in the `(E, alpha)` plane.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::ProblemSpec;
use crate::spectrum::{newton_complex, spectrum_pipeline, EigenRecord, SpectrumOptions};
use crate::stokes::{default_second_derivative_step, stokes_multiplier, stokes_second_derivative, StokesOptions};

/// `H = p^2 + i(q^3 + alpha q)`, i.e. `V = -[(iq)^3 - alpha (iq)]`.
pub fn cubic_spec(alpha: f64) -> Result<ProblemSpec> {
    ProblemSpec::new(3, vec![0.0, -alpha])
}

/// A family member for each parameter value.
pub type Family<'a> = &'a (dyn Fn(f64) -> Result<ProblemSpec> + Sync);

#[derive(Debug, Clone, PartialEq)]
pub struct FlowPoint {
    pub alpha: f64,
    /// Tracked levels, in the order they were seeded.
    pub records: Vec<EigenRecord>,
    pub min_gap: f64,
}

fn min_gap(records: &[EigenRecord]) -> f64 {
    let mut gap = f64::INFINITY;
    for (i, a) in records.iter().enumerate() {
        for b in &records[i + 1..] {
            gap = gap.min((a.e - b.e).norm());
        }
    }
    gap
}

fn claimed(records: &[EigenRecord], e: Complex64) -> bool {
    records.iter().any(|r| (r.e - e).norm() <= 1e-6 * (1.0 + e.norm()))
}

/// Tracks the levels found in `seed_window` at `alpha_from` over `steps`
/// equal parameter steps to `alpha_to`. Each level is warm-started from its
/// previous value; a level that fails, lands on a root already claimed by a
/// lower level, or jumps further than half the distance to its nearest
/// neighbour (at least 1) is retried from `E +- 0.1i`.
pub fn eigenvalue_flow(
    family: Family,
    alpha_from: f64,
    alpha_to: f64,
    steps: usize,
    seed_window: (f64, f64),
    opts: &SpectrumOptions,
) -> Result<Vec<FlowPoint>> {
    if steps < 2 {
        return Err(Error::InvalidArgument("a flow needs at least two steps".into()));
    }
    let seed = spectrum_pipeline(&family(alpha_from)?, seed_window.0, seed_window.1, opts)?;
    let mut flow = vec![FlowPoint { alpha: alpha_from, min_gap: min_gap(&seed.records), records: seed.records }];
    for s in 1..=steps {
        let alpha = alpha_from + (alpha_to - alpha_from) * s as f64 / steps as f64;
        let spec = family(alpha)?;
        let previous = &flow.last().expect("flow is seeded").records;
        let mut records: Vec<EigenRecord> = Vec::with_capacity(previous.len());
        for (level, prev) in previous.iter().enumerate() {
            let nearest = previous
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != level)
                .fold(f64::INFINITY, |a, (_, r)| a.min((r.e - prev.e).norm()));
            let reach = (0.5 * nearest).max(1.0);
            let offset = Complex64::new(0.0, 0.1);
            let found = [prev.e, prev.e + offset, prev.e - offset]
                .into_iter()
                .filter_map(|g| newton_complex(&spec, g, opts).ok())
                .find(|r| !claimed(&records, r.e) && (r.e - prev.e).norm() <= reach);
            match found {
                Some(r) => records.push(r),
                None => return Err(Error::TrackingLost { level, last_alpha: flow.last().map_or(alpha_from, |p| p.alpha) }),
            }
        }
        flow.push(FlowPoint { alpha, min_gap: min_gap(&records), records });
    }
    Ok(flow)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExceptionalPoint {
    pub e: Complex64,
    pub alpha: f64,
    pub c: Complex64,
    pub c_prime: Complex64,
    /// Nonzero for a double (not triple) zero.
    pub c_second: Complex64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExceptionalOptions {
    pub stokes: StokesOptions,
    /// Converged when `|C| + |C'|` and `|C' / C''| / (1 + |E|)` fall below this.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for ExceptionalOptions {
    fn default() -> Self {
        Self { stokes: StokesOptions::default(), tol: 1e-8, max_iterations: 40 }
    }
}

struct Residual {
    f: [f64; 2],
    c: Complex64,
    c_prime: Complex64,
}

fn residual(family: Family, e: f64, alpha: f64, opts: &ExceptionalOptions) -> Result<Residual> {
    let v = stokes_multiplier(&family(alpha)?, Complex64::new(e, 0.0), &opts.stokes)?;
    Ok(Residual { f: [v.c.im, v.c_prime.im], c: v.c, c_prime: v.c_prime })
}

/// Damped Newton on `F(E, alpha) = (Im C, Im C')` with Jacobian
/// `[[C', dC/dalpha], [C'', dC'/dalpha]]`; the alpha column uses central
/// differences with step `1e-4 (1 + |alpha|)`.
pub fn find_exceptional_point_in(family: Family, seed_e: f64, seed_alpha: f64, opts: &ExceptionalOptions) -> Result<ExceptionalPoint> {
    let (mut e, mut alpha) = (seed_e, seed_alpha);
    let mut r = residual(family, e, alpha, opts)?;
    for it in 0..opts.max_iterations {
        let ee = Complex64::new(e, 0.0);
        let c_second = stokes_second_derivative(&family(alpha)?, ee, default_second_derivative_step(ee), &opts.stokes)?;
        // |C| decays fast along the real axis, so the absolute test alone
        // accepts any large E; the second zero must also be within `tol`.
        let double = r.c_prime.norm() <= opts.tol * (1.0 + e.abs()) * c_second.norm();
        if r.c.norm() + r.c_prime.norm() <= opts.tol && double {
            return Ok(ExceptionalPoint { e: ee, alpha, c: r.c, c_prime: r.c_prime, c_second, iterations: it });
        }
        let c2 = c_second.im;
        let h = 1e-4 * (1.0 + alpha.abs());
        let up = residual(family, e, alpha + h, opts)?;
        let down = residual(family, e, alpha - h, opts)?;
        let (ca, cpa) = ((up.f[0] - down.f[0]) / (2.0 * h), (up.f[1] - down.f[1]) / (2.0 * h));
        let jac = [[r.f[1], ca], [c2, cpa]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let scale = (jac[0][0].abs() + jac[0][1].abs()) * (jac[1][0].abs() + jac[1][1].abs());
        if !(det.abs() > 1e-14 * scale) {
            return Err(Error::SingularJacobian);
        }
        let de = (r.f[0] * jac[1][1] - r.f[1] * jac[0][1]) / det;
        let da = (jac[0][0] * r.f[1] - jac[1][0] * r.f[0]) / det;
        let norm = |f: &[f64; 2]| f[0].hypot(f[1]);
        let mut lambda = 1.0;
        let mut next = None;
        for _ in 0..12 {
            let (te, ta) = (e - lambda * de, alpha - lambda * da);
            if let Ok(t) = residual(family, te, ta, opts) {
                if norm(&t.f) < norm(&r.f) {
                    next = Some((te, ta, t));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match next {
            Some((te, ta, t)) => {
                e = te;
                alpha = ta;
                r = t;
            }
            None => return Err(Error::NoConvergence { iterations: it + 1, at: Complex64::new(e, 0.0) }),
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_iterations, at: Complex64::new(e, 0.0) })
}

/// The coalescence of the two lowest levels of the cubic family.
pub fn find_exceptional_point(seed_e: f64, seed_alpha: f64, opts: &ExceptionalOptions) -> Result<ExceptionalPoint> {
    find_exceptional_point_in(&cubic_spec, seed_e, seed_alpha, opts)
}

pub const DEFAULT_SEED_ALPHA: f64 = -2.5;

/// Midpoint of the two lowest cubic levels at [`DEFAULT_SEED_ALPHA`].
pub fn default_seed_energy(opts: &SpectrumOptions) -> Result<f64> {
    let result = spectrum_pipeline(&cubic_spec(DEFAULT_SEED_ALPHA)?, 0.0, 4.0, opts)?;
    let real: Vec<f64> = result.records.iter().filter(|r| r.is_real()).map(|r| r.e.re).collect();
    if real.len() < 2 {
        return Err(Error::ConvergenceFailure("seed spectrum lacks two real levels".into()));
    }
    Ok(0.5 * (real[0] + real[1]))
}
