//! PT-inner products and pseudo-norms of eigenfunctions.
//!
//! Two independent routes give the pseudo-norm of an eigenfunction `Y`:
//! the accumulated `int_L Y^2 dX = -2 C'(E_n)` along the rays, and direct
//! Gauss–Kronrod quadrature of `-i int_L Y_a(X) conj(Y_b(conj X)) dX` over
//! `L = L_1 - L_{-1}`. Conjugation swaps the two rays, so both eigenfunctions
//! are sampled at the same radial nodes on both rays.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::canonical::{ray_radius, ray_samples, RaySolution};
use crate::error::{Error, Result};
use crate::potential::{omega_pow, ProblemSpec};
use crate::quadrature::{kronrod_nodes, kronrod_weights};
use crate::spectrum::{EigenRecord, SpectrumResult};
use crate::stokes::{ray_triple, StokesOptions};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtNormOptions {
    pub stokes: StokesOptions,
    /// Largest `|C| / c_scale` accepted as an eigenvalue.
    pub eigen_tol: f64,
    /// Relative quadrature error target for direct inner products.
    pub quad_tol: f64,
}

impl Default for PtNormOptions {
    fn default() -> Self {
        Self { stokes: StokesOptions::default(), eigen_tol: 1e-7, quad_tol: 1e-11 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourIntegral {
    pub e: Complex64,
    /// `int_L Y^2 dX` with `Y = Y_1`.
    pub jl: Complex64,
    pub c_prime: Complex64,
    /// `|jl + 2 C'|`.
    pub check: f64,
    /// `Y_1 ~ ratio * Y_{-1}` at the matching point; 1 at an exact eigenvalue.
    pub ratio: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoNormRecord {
    pub e: Complex64,
    pub jl: Complex64,
    pub c_prime: Complex64,
    pub c_prime_check: f64,
    /// Sign of `i C'(E)`; 0 for non-real or non-simple levels.
    pub sign: i32,
    pub kn: f64,
    pub alpha: f64,
    /// Directly integrated `<<phi, phi>>`, normalized by `alpha` when
    /// `sign != 0` and to unit `L^2` norm along `L` otherwise.
    pub direct: Complex64,
}

/// Least-squares `lambda` with `(y_b, y_b') ~ lambda (y_a, y_a')`.
fn matching_ratio(a: &RaySolution, b: &RaySolution) -> Complex64 {
    let (pa, pb) = (&a.at_origin, &b.at_origin);
    let num = pa.y.conj() * pb.y + pa.yp.conj() * pb.yp;
    let den = pa.y.norm_sqr() + pa.yp.norm_sqr();
    num / den * (b.log_scale - a.log_scale).exp()
}

/// `int_L Y^2 dX` from the ray accumulators, with the `L_{-1}` leg rescaled
/// so that both legs carry the same solution.
pub fn contour_square_integral(spec: &ProblemSpec, e: Complex64, opts: &PtNormOptions) -> Result<ContourIntegral> {
    let triple = ray_triple(spec, e, &opts.stokes)?;
    let v = triple.stokes_value(spec, e);
    if !(v.cancellation() <= opts.eigen_tol) {
        return Err(Error::NotAnEigenvalue { e, residual: v.c.norm() });
    }
    let ratio = matching_ratio(&triple.minus, &triple.plus);
    let jl = triple.plus.j() - triple.minus.j() * ratio * ratio;
    Ok(ContourIntegral { e, jl, c_prime: v.c_prime, check: (jl + v.c_prime * 2.0).norm(), ratio })
}

/// Radial Gauss–Kronrod nodes on `[0, radius]` shared by all eigenfunctions
/// in one computation.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub radius: f64,
    pub nodes: Vec<f64>,
    pub kronrod: Vec<f64>,
    /// Embedded Gauss weights (zero at Kronrod-only nodes).
    pub gauss: Vec<f64>,
}

impl RadialGrid {
    pub fn new(radius: f64, panels: usize) -> Self {
        let mut grid = RadialGrid { radius, nodes: Vec::new(), kronrod: Vec::new(), gauss: Vec::new() };
        let gauss_unit = gauss_weights_on_kronrod_nodes();
        for p in 0..panels {
            let a = radius * p as f64 / panels as f64;
            let b = radius * (p + 1) as f64 / panels as f64;
            grid.nodes.extend(kronrod_nodes(a, b));
            grid.kronrod.extend(kronrod_weights(a, b));
            grid.gauss.extend(gauss_unit.iter().map(|w| w * (b - a) / 2.0));
        }
        grid
    }

    pub fn panels(&self) -> usize {
        self.nodes.len() / 15
    }
}

/// The 7-point Gauss rule of `[-1, 1]` laid out on the 15 Kronrod nodes.
fn gauss_weights_on_kronrod_nodes() -> [f64; 15] {
    const WG: [f64; 4] = [
        0.129_484_966_168_869_693_270_611_432_679_082,
        0.279_705_391_489_276_667_901_467_771_423_780,
        0.381_830_050_505_118_944_950_369_775_488_975,
        0.417_959_183_673_469_387_755_102_040_816_327,
    ];
    let mut w = [0.0; 15];
    for (j, &g) in WG.iter().enumerate().take(3) {
        w[2 * j + 1] = g;
        w[13 - 2 * j] = g;
    }
    w[7] = WG[3];
    w
}

/// An eigenfunction sampled on both rays of `L`: `plus[i] = Y(omega^{-1} t_i)`,
/// `minus[i] = Y(omega t_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSamples {
    pub e: Complex64,
    pub plus: Vec<Complex64>,
    pub minus: Vec<Complex64>,
}

pub fn sample_eigenfunction(spec: &ProblemSpec, e: Complex64, grid: &RadialGrid, opts: &PtNormOptions) -> Result<EigenSamples> {
    let triple = ray_triple(spec, e, &opts.stokes)?;
    let v = triple.stokes_value(spec, e);
    if !(v.cancellation() <= opts.eigen_tol) {
        return Err(Error::NotAnEigenvalue { e, residual: v.c.norm() });
    }
    let ratio = matching_ratio(&triple.minus, &triple.plus);
    let plus = ray_samples(spec, e, 1, &grid.nodes, &opts.stokes.ray)?;
    let minus = ray_samples(spec, e, -1, &grid.nodes, &opts.stokes.ray)?.into_iter().map(|y| y * ratio).collect();
    Ok(EigenSamples { e, plus, minus })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerProduct {
    pub value: Complex64,
    /// `|Kronrod - Gauss|` estimate.
    pub error: f64,
    /// `int |Y_a| |Y_b|` over both rays, the scale of the integrand.
    pub magnitude: f64,
}

/// `<<a, b>> = -i int_0^R [omega^{-1} A_1 conj(B_{-1}) - omega A_{-1} conj(B_1)] dt`.
pub fn inner_product_samples(m: usize, grid: &RadialGrid, a: &EigenSamples, b: &EigenSamples) -> InnerProduct {
    let w_plus = omega_pow(m, Complex64::new(-1.0, 0.0));
    let w_minus = omega_pow(m, Complex64::new(1.0, 0.0));
    let (mut k, mut g, mut mag) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0.0);
    for i in 0..grid.nodes.len() {
        let f = w_plus * a.plus[i] * b.minus[i].conj() - w_minus * a.minus[i] * b.plus[i].conj();
        k += f * grid.kronrod[i];
        g += f * grid.gauss[i];
        mag += grid.kronrod[i] * ((a.plus[i] * b.minus[i]).norm() + (a.minus[i] * b.plus[i]).norm());
    }
    InnerProduct { value: -I * k, error: (k - g).norm(), magnitude: mag }
}

/// `int_L |Y|^2 |dX|` on the grid.
pub fn l2_norm_squared(grid: &RadialGrid, a: &EigenSamples) -> f64 {
    (0..grid.nodes.len()).map(|i| grid.kronrod[i] * (a.plus[i].norm_sqr() + a.minus[i].norm_sqr())).sum()
}

/// Samples `energies` on a common grid, doubling the panel count until every
/// diagonal product meets `quad_tol` relative to its magnitude. Returns the
/// grid and the samples in input order.
pub fn sample_common(spec: &ProblemSpec, energies: &[Complex64], opts: &PtNormOptions) -> Result<(RadialGrid, Vec<EigenSamples>)> {
    let mut radius: f64 = 0.0;
    for &e in energies {
        for k in [-1, 1] {
            radius = radius.max(ray_radius(spec, e, k, &opts.stokes.ray)?);
        }
    }
    let e_max = energies.iter().fold(0.0f64, |a, e| a.max(e.norm()));
    let mut panels = ((radius * (1.0 + e_max.sqrt())).ceil() as usize).max(4);
    for _ in 0..6 {
        let grid = RadialGrid::new(radius, panels);
        let samples: Vec<EigenSamples> =
            energies.par_iter().map(|&e| sample_eigenfunction(spec, e, &grid, opts)).collect::<Result<_>>()?;
        let ok = samples.iter().all(|s| {
            let p = inner_product_samples(spec.degree(), &grid, s, s);
            p.error <= opts.quad_tol * p.magnitude
        });
        if ok {
            return Ok((grid, samples));
        }
        panels *= 2;
    }
    Err(Error::ConvergenceFailure(format!("radial quadrature did not settle with {panels} panels")))
}

/// Direct `<<phi_a, phi_b>>` of the canonical eigenfunctions `Y_1(E_a)`, `Y_1(E_b)`.
pub fn pt_inner_product(spec: &ProblemSpec, a: &EigenRecord, b: &EigenRecord, opts: &PtNormOptions) -> Result<InnerProduct> {
    let (grid, s) = sample_common(spec, &[a.e, b.e], opts)?;
    Ok(inner_product_samples(spec.degree(), &grid, &s[0], &s[1]))
}

/// `alpha = 1 / sqrt(2 |C'|)`, which makes `alpha^2 * 2 i C' = +-1`.
pub fn normalization(c_prime: Complex64) -> f64 {
    1.0 / (2.0 * c_prime.norm()).sqrt()
}

pub fn pseudo_norm(spec: &ProblemSpec, record: &EigenRecord, opts: &PtNormOptions) -> Result<PseudoNormRecord> {
    let ci = contour_square_integral(spec, record.e, opts)?;
    let (grid, s) = sample_common(spec, &[record.e], opts)?;
    let raw = inner_product_samples(spec.degree(), &grid, &s[0], &s[0]).value;
    let definite = record.is_real() && record.simple;
    let (sign, alpha, direct) = if definite {
        let alpha = normalization(ci.c_prime);
        ((I * ci.c_prime).re.signum() as i32, alpha, raw * alpha * alpha)
    } else {
        (0, 0.0, raw / l2_norm_squared(&grid, &s[0]))
    };
    Ok(PseudoNormRecord {
        e: record.e,
        jl: ci.jl,
        c_prime: ci.c_prime,
        c_prime_check: ci.check,
        sign,
        kn: 2.0 * alpha * alpha,
        alpha,
        direct,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramTable {
    pub energies: Vec<Complex64>,
    /// `table[i][j] = alpha_i alpha_j <<Y_i, Y_j>>`.
    pub table: Vec<Vec<Complex64>>,
    pub diagonal_signs: Vec<i32>,
    pub max_off_diagonal: f64,
    /// `max |table[i][j] - conj(table[j][i])|`.
    pub hermitian_defect: f64,
    /// `max ||table[i][i]| - 1|`.
    pub diagonal_defect: f64,
}

/// Gram matrix of the `alpha`-normalized eigenfunctions of a complete, real,
/// simple spectrum.
pub fn orthonormal_table(spec: &ProblemSpec, result: &SpectrumResult, opts: &PtNormOptions) -> Result<GramTable> {
    if !result.complete {
        return Err(Error::InvalidArgument("spectrum is not certified complete".into()));
    }
    if result.records.iter().any(|r| !r.is_real() || !r.simple) {
        return Err(Error::DegenerateSpectrum);
    }
    let energies: Vec<Complex64> = result.records.iter().map(|r| r.e).collect();
    let alphas: Vec<f64> = result.records.iter().map(|r| normalization(r.c_prime)).collect();
    let (grid, samples) = sample_common(spec, &energies, opts)?;
    let n = energies.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let values: Vec<Complex64> = pairs
        .par_iter()
        .map(|&(i, j)| inner_product_samples(spec.degree(), &grid, &samples[i], &samples[j]).value * alphas[i] * alphas[j])
        .collect();
    let table: Vec<Vec<Complex64>> = values.chunks(n.max(1)).map(|r| r.to_vec()).collect();
    let mut max_off_diagonal: f64 = 0.0;
    let mut hermitian_defect: f64 = 0.0;
    let mut diagonal_defect: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            hermitian_defect = hermitian_defect.max((table[i][j] - table[j][i].conj()).norm());
            if i == j {
                diagonal_defect = diagonal_defect.max((table[i][i].norm() - 1.0).abs());
            } else {
                max_off_diagonal = max_off_diagonal.max(table[i][j].norm());
            }
        }
    }
    let diagonal_signs = (0..n).map(|i| table[i][i].re.signum() as i32).collect();
    Ok(GramTable { energies, table, diagonal_signs, max_off_diagonal, hermitian_defect, diagonal_defect })
}
