//! Polynomial potentials and their large-|X| asymptotics.
//!
//! In the rotated variable `X = i q` the eigenproblem becomes
//! `-Y'' + W(X) Y = 0` with the monic polynomial
//!
//! ```text
//! W(X) = X^m + c_1 X^{m-1} + ... + c_{m-1} X + c_m,
//! ```
//!
//! where `c_1..c_{m-1}` are the real potential coefficients and `c_m` carries
//! the spectral parameter `E`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// A PT-symmetric problem `V(q) = -[(iq)^m + a_1 (iq)^{m-1} + ... + a_{m-1}(iq)]`.
///
/// The constant term is absorbed into the spectral parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    m: usize,
    coeffs: Vec<f64>,
}

impl ProblemSpec {
    pub fn new(m: usize, coeffs: Vec<f64>) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidSpec(format!("degree must be >= 2, got {m}")));
        }
        if coeffs.len() != m - 1 {
            return Err(Error::InvalidSpec(format!(
                "degree {m} needs {} coefficients, got {}",
                m - 1,
                coeffs.len()
            )));
        }
        if let Some(bad) = coeffs.iter().find(|a| !a.is_finite()) {
            return Err(Error::InvalidSpec(format!("non-finite coefficient {bad}")));
        }
        Ok(Self { m, coeffs })
    }

    /// The pure potential `V(q) = -(iq)^m`.
    pub fn pure(m: usize) -> Result<Self> {
        Self::new(m, vec![0.0; m.saturating_sub(1)])
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Frame-0 coefficients `(a_1, ..., a_{m-1}, E)`.
    pub fn full_coefficients(&self, e: Complex64) -> FullCoefficients {
        let mut c: Vec<Complex64> = self.coeffs.iter().map(|&a| Complex64::new(a, 0.0)).collect();
        c.push(e);
        FullCoefficients { c, frame: 0 }
    }

    /// Stable identifier of the problem, usable as a cache or report key.
    pub fn spec_hash(&self) -> u64 {
        // FNV-1a over the degree and the coefficient bit patterns.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |v: u64| {
            for byte in v.to_le_bytes() {
                h ^= u64::from(byte);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        feed(self.m as u64);
        for a in &self.coeffs {
            feed(a.to_bits());
        }
        h
    }
}

/// Coefficients `c_1..c_m` of a monic polynomial `W`, in a given rotation frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FullCoefficients {
    c: Vec<Complex64>,
    frame: i32,
}

impl FullCoefficients {
    /// Arbitrary monic polynomial of degree `c.len()`; used directly for
    /// synthetic test equations, including degrees 0 and 1.
    pub fn new(c: Vec<Complex64>) -> Self {
        Self { c, frame: 0 }
    }

    pub fn degree(&self) -> usize {
        self.c.len()
    }

    pub fn frame(&self) -> i32 {
        self.frame
    }

    /// `c_j` for `j` in `1..=m`; zero outside that range.
    pub fn get(&self, j: usize) -> Complex64 {
        if j == 0 {
            ONE
        } else {
            self.c.get(j - 1).copied().unwrap_or(ZERO)
        }
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.c
    }

    /// Multiply `c_j` by `omega^{k j}`; the frame index adds up.
    pub fn rotate_coefficients(&self, k: i32) -> FullCoefficients {
        let m = self.degree();
        let c = self
            .c
            .iter()
            .enumerate()
            .map(|(idx, &cj)| cj * omega_pow(m, Complex64::new((k as f64) * (idx + 1) as f64, 0.0)))
            .collect();
        FullCoefficients { c, frame: self.frame + k }
    }

    /// Horner evaluation of `W(X)`.
    pub fn eval_w(&self, x: Complex64) -> Complex64 {
        self.c.iter().fold(ONE, |acc, &cj| acc * x + cj)
    }
}

/// `omega^z = exp(-2 pi i z / (m + 2))`, single-valued through the principal `log omega`.
pub fn omega_pow(m: usize, z: Complex64) -> Complex64 {
    let log_omega = Complex64::new(0.0, -2.0 * PI / (m as f64 + 2.0));
    (z * log_omega).exp()
}

/// Series coefficients of `sqrt(W(X)) = X^{m/2} (1 + sum_k b_k X^{-k})`
/// together with the exponent `r_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticData {
    /// `b[0] = 1`, `b[k]` for `k = 1..=order`.
    pub b: Vec<Complex64>,
    pub r: Complex64,
    pub m: usize,
}

impl AsymptoticData {
    pub fn order(&self) -> usize {
        self.b.len() - 1
    }

    pub fn b(&self, k: usize) -> Complex64 {
        self.b.get(k).copied().unwrap_or(ZERO)
    }
}

pub fn default_series_order(m: usize) -> usize {
    2 * m + 4
}

/// Square-root power-series recursion: `2 b_n = c_n - sum_{i=1}^{n-1} b_i b_{n-i}`.
pub fn sqrt_w_series(c: &FullCoefficients, order: usize) -> AsymptoticData {
    let m = c.degree();
    let order = order.max(m + 2);
    let mut b = vec![ZERO; order + 1];
    b[0] = ONE;
    for n in 1..=order {
        let cross: Complex64 = (1..n).map(|i| b[i] * b[n - i]).sum();
        b[n] = (c.get(n) - cross) * 0.5;
    }
    let mut data = AsymptoticData { b, r: ZERO, m };
    data.r = r_exponent(c, &data);
    data
}

/// `r_m = -m/4` for odd `m`, `-m/4 - b_{1+m/2}` for even `m`.
pub fn r_exponent(c: &FullCoefficients, asym: &AsymptoticData) -> Complex64 {
    let m = c.degree();
    let base = Complex64::new(-(m as f64) / 4.0, 0.0);
    if m % 2 == 1 {
        base
    } else {
        base - asym.b(1 + m / 2)
    }
}

/// Principal branch of `X^{p/2}`.
fn half_power(x: Complex64, p: i64) -> Complex64 {
    (x.ln() * (p as f64 * 0.5)).exp()
}

/// Principal part of the primitive of `sqrt(W)`: only strictly positive powers of `X`.
pub fn action_s(x: Complex64, asym: &AsymptoticData) -> Result<Complex64> {
    if x == ZERO {
        return Err(Error::InvalidArgument("action S is singular at X = 0".into()));
    }
    let m = asym.m as i64;
    let mut s = ZERO;
    for k in 0..=asym.order() as i64 {
        let p = m + 2 - 2 * k;
        if p <= 0 {
            break;
        }
        s += asym.b(k as usize) * (2.0 / p as f64) * half_power(x, p);
    }
    Ok(s)
}

/// `dS/dX`: the positive-power part of the `sqrt(W)` series.
pub fn action_s_prime(x: Complex64, asym: &AsymptoticData) -> Complex64 {
    let m = asym.m as i64;
    let mut s = ZERO;
    for k in 0..=asym.order() as i64 {
        if m + 2 - 2 * k <= 0 {
            break;
        }
        s += asym.b(k as usize) * half_power(x, m - 2 * k);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    /// Coefficients of (1 + sum b_k x^k)^2 through the given order.
    fn square_series(b: &[Complex64], order: usize) -> Vec<Complex64> {
        (0..=order)
            .map(|n| (0..=n).map(|i| b.get(i).copied().unwrap_or(ZERO) * b.get(n - i).copied().unwrap_or(ZERO)).sum())
            .collect()
    }

    #[test]
    fn spec_validation() {
        assert!(ProblemSpec::new(1, vec![]).is_err());
        assert!(ProblemSpec::new(3, vec![0.0]).is_err());
        assert!(ProblemSpec::new(3, vec![0.0, f64::NAN]).is_err());
        let s = ProblemSpec::new(3, vec![0.0, 4.0]).unwrap();
        assert_eq!(s.full_coefficients(c64(2.0, 0.0)).as_slice(), &[ZERO, c64(4.0, 0.0), c64(2.0, 0.0)]);
    }

    #[test]
    fn rotation_examples() {
        let c = FullCoefficients::new(vec![c64(0.3, 0.0), c64(-1.0, 0.0), c64(2.0, 0.5)]);
        assert_eq!(c.rotate_coefficients(0).as_slice(), c.as_slice());

        let e = c64(7.0, 0.0);
        let rotated = FullCoefficients::new(vec![ZERO, ZERO, e]).rotate_coefficients(1);
        let expected = e * Complex64::from_polar(1.0, -6.0 * PI / 5.0);
        assert!(close(rotated.get(3), expected, 1e-15));
        assert_eq!(rotated.frame(), 1);

        let back = c.rotate_coefficients(1).rotate_coefficients(-1);
        assert_eq!(back.frame(), 0);
        for (x, y) in back.as_slice().iter().zip(c.as_slice()) {
            assert!(close(*x, *y, 1e-15));
        }
    }

    #[test]
    fn series_examples() {
        let zero = FullCoefficients::new(vec![ZERO; 4]);
        let asym = sqrt_w_series(&zero, 12);
        assert!(asym.b[1..].iter().all(|b| *b == ZERO));
        assert_eq!(asym.r, c64(-1.0, 0.0));

        // (1 + E x^m)^{1/2} = 1 + E/2 x^m - E^2/8 x^{2m} + ...
        for m in 2..6 {
            let e = c64(1.7, -0.4);
            let mut c = vec![ZERO; m];
            c[m - 1] = e;
            let asym = sqrt_w_series(&FullCoefficients::new(c), 2 * m);
            for k in 1..=2 * m {
                let expected = if k == m {
                    e / 2.0
                } else if k == 2 * m {
                    -e * e / 8.0
                } else {
                    ZERO
                };
                assert!(close(asym.b(k), expected, 1e-14), "m={m} k={k}");
            }
        }

        let (a1, a2) = (c64(0.7, 0.0), c64(-1.3, 0.0));
        let asym = sqrt_w_series(&FullCoefficients::new(vec![a1, a2]), 8);
        assert!(close(asym.b(1), a1 / 2.0, 1e-15));
        assert!(close(asym.b(2), a2 / 2.0 - a1 * a1 / 8.0, 1e-15));
    }

    #[test]
    fn r_exponent_examples() {
        let c = FullCoefficients::new(vec![c64(0.4, 0.0), c64(-2.0, 0.0), c64(9.0, 0.0)]);
        assert_eq!(sqrt_w_series(&c, 10).r, c64(-0.75, 0.0));

        let e = c64(3.0, 1.0);
        let c = FullCoefficients::new(vec![ZERO, e]);
        assert!(close(sqrt_w_series(&c, 8).r, c64(-0.5, 0.0) - e / 2.0, 1e-15));

        let c = FullCoefficients::new(vec![ZERO, ZERO, ZERO, e]);
        assert!(close(sqrt_w_series(&c, 12).r, c64(-1.0, 0.0), 1e-15));
    }

    #[test]
    fn r_independent_of_last_coefficient() {
        for m in [3usize, 4, 5, 6] {
            let mut c: Vec<Complex64> = (1..=m).map(|j| c64(0.3 * j as f64 - 1.0, 0.0)).collect();
            let r0 = sqrt_w_series(&FullCoefficients::new(c.clone()), 2 * m + 4).r;
            c[m - 1] += c64(5.0, -2.0);
            let r1 = sqrt_w_series(&FullCoefficients::new(c), 2 * m + 4).r;
            assert!(close(r0, r1, 1e-14), "m={m}");
        }
    }

    #[test]
    fn action_examples() {
        let asym = sqrt_w_series(&FullCoefficients::new(vec![ZERO, ZERO]), 8);
        assert!(close(action_s(c64(2.0, 0.0), &asym).unwrap(), c64(2.0, 0.0), 1e-15));
        assert!(action_s(ZERO, &asym).is_err());

        for m in 2..8usize {
            let asym = sqrt_w_series(&FullCoefficients::new(vec![ZERO; m]), 2 * m + 4);
            let x = 3.7f64;
            let expected = 2.0 / (m as f64 + 2.0) * x.powf((m as f64 + 2.0) / 2.0);
            assert!(close(action_s(c64(x, 0.0), &asym).unwrap(), c64(expected, 0.0), 1e-14));
        }
    }

    #[test]
    fn action_derivative_matches_series() {
        let c = FullCoefficients::new(vec![c64(0.5, 0.0), c64(-1.0, 0.0), c64(0.2, 0.0), c64(3.0, 0.0), c64(-0.7, 0.0)]);
        let asym = sqrt_w_series(&c, 14);
        let x = Complex64::from_polar(20.0, 0.3);
        let h = 1e-5;
        let fd = (action_s(x + h, &asym).unwrap() - action_s(x - h, &asym).unwrap()) / (2.0 * h);
        let analytic = action_s_prime(x, &asym);
        assert!((fd - analytic).norm() / analytic.norm() < 1e-8);
        // dS/dX approaches sqrt(W) as |X| grows.
        let rel = |x: Complex64| (action_s_prime(x, &asym) - c.eval_w(x).sqrt()).norm() / c.eval_w(x).sqrt().norm();
        assert!(rel(c64(80.0, 0.0)) < rel(c64(20.0, 0.0)));
        assert!(rel(c64(20.0, 0.0)) < 1e-3);
    }

    #[test]
    fn eval_w_examples() {
        let c = FullCoefficients::new(vec![ZERO, ZERO, c64(5.0, 0.0)]);
        assert_eq!(c.eval_w(ZERO), c64(5.0, 0.0));
        assert_eq!(c.eval_w(c64(2.0, 0.0)), c64(13.0, 0.0));
        let c = FullCoefficients::new(vec![ONE, ONE]);
        assert!(close(c.eval_w(c64(0.0, 1.0)), c64(0.0, 1.0), 1e-15));
        assert_eq!(FullCoefficients::new(vec![]).eval_w(c64(3.0, 1.0)), ONE);
    }

    #[test]
    fn rotated_series_is_quasi_homogeneous() {
        let m = 5;
        let c = FullCoefficients::new((1..=m).map(|j| c64(0.4 * j as f64 - 1.1, 0.1 * j as f64)).collect());
        let base = sqrt_w_series(&c, 2 * m + 4);
        for k in [-1, 1, 2] {
            let rotated = sqrt_w_series(&c.rotate_coefficients(k), 2 * m + 4);
            for n in 1..=base.order() {
                let expected = base.b(n) * omega_pow(m, c64((k * n as i32) as f64, 0.0));
                assert!(close(rotated.b(n), expected, 1e-12), "k={k} n={n}");
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn squaring_reproduces_coefficients(m in 2usize..8, raw in prop::collection::vec(-3.0f64..3.0, 8)) {
                let c = FullCoefficients::new(raw[..m].iter().map(|&a| c64(a, 0.0)).collect());
                let order = default_series_order(m);
                let asym = sqrt_w_series(&c, order);
                let sq = square_series(&asym.b, order);
                for (n, value) in sq.iter().enumerate() {
                    let expected = if n <= m { c.get(n) } else { ZERO };
                    let scale = 1.0 + asym.b.iter().map(|b| b.norm()).fold(0.0, f64::max).powi(2);
                    prop_assert!((value - expected).norm() <= 1e-12 * scale, "n={} {} vs {}", n, value, expected);
                }
            }
        }
    }
}
