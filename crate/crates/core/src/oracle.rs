//! Low-accuracy eigenvalue oracle: the Hamiltonian `p^2 + V(q)` as a dense
//! matrix in a harmonic-oscillator basis on the real line.
//!
//! Only `m = 2, 3` qualify, since for those degrees the real axis lies inside
//! the two decay sectors. The conjugation `D = diag(i^n)` maps the complex
//! symmetric matrix to a real one, which is then handed to a real Schur
//! eigensolver.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::ProblemSpec;

pub const MAX_BASIS: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: Vec<Complex64>,
    pub basis_size: usize,
    pub scale: f64,
}

/// `D^{-1} (i q) D` for the oscillator with length scale `s`: real and antisymmetric.
fn iq_rotated(n: usize, s: f64) -> DMatrix<f64> {
    // q_{j,j+1} = s sqrt((j+1)/2); i * i^{(j+1)-j} = -1 above, i * i^{-1} = 1 below.
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n - 1 {
        let v = s * ((j + 1) as f64 / 2.0).sqrt();
        out[(j, j + 1)] = -v;
        out[(j + 1, j)] = v;
    }
    out
}

/// `D^{-1} p^2 D` with `p^2 = (2N + 1 - a^2 - a^{dag 2}) / (2 s^2)`; the
/// `+-2` diagonals pick up `i^{+-2} = -1`.
fn p2_rotated(n: usize, s: f64) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, n);
    let f = 1.0 / (2.0 * s * s);
    for j in 0..n {
        out[(j, j)] = f * (2 * j + 1) as f64;
        if j + 2 < n {
            let v = f * (((j + 1) * (j + 2)) as f64).sqrt();
            out[(j, j + 2)] = v;
            out[(j + 2, j)] = v;
        }
    }
    out
}

/// Eigenvalues of `p^2 - [(iq)^m + a_1 (iq)^{m-1} + ... + a_{m-1} (iq)]` in a
/// basis of `basis_size` oscillator states with length scale `scale`.
pub fn diagonalize(spec: &ProblemSpec, basis_size: usize, scale: f64) -> Result<OracleResult> {
    let m = spec.degree();
    if m > 3 {
        return Err(Error::UnsupportedDegree(m));
    }
    if !(2..=MAX_BASIS).contains(&basis_size) {
        return Err(Error::InvalidArgument(format!("basis size {basis_size} outside 2..={MAX_BASIS}")));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidArgument(format!("basis scale {scale} must be positive")));
    }
    // Powers are formed in a padded basis so the kept block is exact.
    let big = basis_size + m;
    let iq = iq_rotated(big, scale);
    let mut power = DMatrix::identity(big, big);
    let mut poly = DMatrix::zeros(big, big);
    // Sum over j of a_{m-j} (iq)^j with a_0 = 1.
    for j in 1..=m {
        power = &power * &iq;
        let coeff = if j == m { 1.0 } else { spec.coeffs()[m - j - 1] };
        poly += &power * coeff;
    }
    let h = p2_rotated(big, scale) - poly;
    let block = h.view((0, 0), (basis_size, basis_size)).into_owned();
    let mut eigenvalues: Vec<Complex64> =
        block.complex_eigenvalues().iter().map(|z| Complex64::new(z.re, z.im)).collect();
    eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(OracleResult { eigenvalues, basis_size, scale })
}

/// Length scale at which 200 and 300 states agree on the low cubic levels.
pub const DEFAULT_SCALE: f64 = 1.0;

/// The `count` eigenvalues of smallest modulus, sorted by real part.
/// Truncation artefacts sit far out in the complex plane.
pub fn low_levels(result: &OracleResult, count: usize) -> Vec<Complex64> {
    let mut low = result.eigenvalues.clone();
    low.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    low.truncate(count);
    low.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    low
}
