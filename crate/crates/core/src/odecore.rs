//! Adaptive Dormand–Prince 5(4) integration of `Y'' = W(X) Y` along straight
//! segments of the complex plane.
//!
//! The state is augmented with the E-variational pair `Z = dY/dE`,
//! `Z' = dY'/dE` (which obeys `Z'' = W Z + e_scale Y`) and with the running
//! integral `J = int Y^2 dX`, so one pass yields everything the Stokes and
//! pseudo-norm computations need.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::FullCoefficients;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Values above this magnitude are reported as overflow.
const OVERFLOW_LIMIT: f64 = 1e250;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionState {
    pub x: Complex64,
    pub y: Complex64,
    pub yp: Complex64,
    pub z: Complex64,
    pub zp: Complex64,
    /// Accumulated `int Y^2 dX` along the traversed path.
    pub j: Complex64,
    /// Factor multiplying `E` in the frame's constant coefficient.
    pub e_scale: Complex64,
}

impl SolutionState {
    /// A plain (Y, Y') initial value with zero variational part.
    pub fn new(x: Complex64, y: Complex64, yp: Complex64) -> Self {
        Self { x, y, yp, z: ZERO, zp: ZERO, j: ZERO, e_scale: Complex64::new(1.0, 0.0) }
    }

    fn components(&self) -> [Complex64; 5] {
        [self.y, self.yp, self.z, self.zp, self.j]
    }

    fn with_components(&self, x: Complex64, v: [Complex64; 5]) -> Self {
        Self { x, y: v[0], yp: v[1], z: v[2], zp: v[3], j: v[4], e_scale: self.e_scale }
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// `Y1 Y2' - Y1' Y2`.
pub fn wronskian(y1: Complex64, y1p: Complex64, y2: Complex64, y2p: Complex64) -> Complex64 {
    y1 * y2p - y1p * y2
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// First trial step, in units of |X|.
    pub initial_step: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-12, abs_tol: 1e-14, max_steps: 1_000_000, initial_step: 1e-2 }
    }
}

impl IntegratorOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidArgument("max_steps must be >= 1".into()));
        }
        if !(self.initial_step > 0.0) {
            return Err(Error::InvalidArgument("initial step must be positive".into()));
        }
        Ok(())
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// Error coefficients: fifth-order weights minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type Vec5 = [Complex64; 5];

fn axpy(base: &Vec5, terms: &[(f64, &Vec5)], h: f64) -> Vec5 {
    let mut out = *base;
    for (coef, k) in terms {
        let s = coef * h;
        for i in 0..5 {
            out[i] += k[i] * s;
        }
    }
    out
}

/// Right-hand side in the segment parameter `s`, where `X = x0 + s * dir`.
struct SegmentRhs<'a> {
    c: &'a FullCoefficients,
    x0: Complex64,
    dir: Complex64,
    e_scale: Complex64,
}

impl SegmentRhs<'_> {
    fn eval(&self, s: f64, v: &Vec5) -> Vec5 {
        let x = self.x0 + self.dir * s;
        let w = self.c.eval_w(x);
        let d = self.dir;
        [
            d * v[1],
            d * w * v[0],
            d * v[3],
            d * (w * v[2] + self.e_scale * v[0]),
            d * v[0] * v[0],
        ]
    }
}

/// Integrate the augmented system from `state.x` to `target` along the straight segment.
pub fn integrate_segment(
    state: &SolutionState,
    c: &FullCoefficients,
    target: Complex64,
    opts: &IntegratorOptions,
) -> Result<SolutionState> {
    opts.validate()?;
    let dir = target - state.x;
    let len = dir.norm();
    if len == 0.0 {
        return Err(Error::InvalidArgument("segment has zero length".into()));
    }
    let rhs = SegmentRhs { c, x0: state.x, dir, e_scale: state.e_scale };

    let mut s = 0.0f64;
    let mut v = state.components();
    let mut h = (opts.initial_step / len).min(1.0);
    let mut k1 = rhs.eval(s, &v);
    let mut steps = 0usize;

    while s < 1.0 {
        if steps >= opts.max_steps {
            return Err(Error::StepLimitExceeded { max_steps: opts.max_steps, at: state.x + dir * s });
        }
        steps += 1;
        let last = s + h >= 1.0;
        if last {
            h = 1.0 - s;
        }
        if h < 1e-15 * (1.0 + s.abs()) && !last {
            return Err(Error::StepSizeUnderflow { at: state.x + dir * s });
        }

        let k2 = rhs.eval(s + C2 * h, &axpy(&v, &[(A21, &k1)], h));
        let k3 = rhs.eval(s + C3 * h, &axpy(&v, &[(A31, &k1), (A32, &k2)], h));
        let k4 = rhs.eval(s + C4 * h, &axpy(&v, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
        let k5 = rhs.eval(s + C5 * h, &axpy(&v, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h));
        let k6 = rhs.eval(s + h, &axpy(&v, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h));
        let v_new = axpy(&v, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)], h);
        let k7 = rhs.eval(s + h, &v_new);

        let err_vec = axpy(
            &[ZERO; 5],
            &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
            h,
        );

        // Value and derivative share one scale so zeros of Y do not force tiny steps.
        let scale_y = v[0].norm().max(v[1].norm()).max(v_new[0].norm()).max(v_new[1].norm());
        let scale_z = v[2].norm().max(v[3].norm()).max(v_new[2].norm()).max(v_new[3].norm());
        let scale_j = v[4].norm().max(v_new[4].norm());
        let scales = [scale_y, scale_y, scale_z, scale_z, scale_j];
        let mut err = 0.0f64;
        for i in 0..5 {
            let tol = opts.abs_tol + opts.rel_tol * scales[i];
            err = err.max(err_vec[i].norm() / tol);
        }
        if !err.is_finite() {
            return Err(Error::Overflow { at: state.x + dir * s });
        }

        if err <= 1.0 {
            s = if last { 1.0 } else { s + h };
            v = v_new;
            k1 = k7;
            if v.iter().any(|c| c.norm() > OVERFLOW_LIMIT || !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::Overflow { at: state.x + dir * s });
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
    }
    Ok(state.with_components(target, v))
}

/// Divide by `g` with `|g| = max(|Y|, |Y'|)`; returns the rescaled state and `log g`.
pub fn renormalize(state: &SolutionState) -> (SolutionState, Complex64) {
    let g = if state.y.norm() >= state.yp.norm() { state.y } else { state.yp };
    if g == ZERO || !g.re.is_finite() || !g.im.is_finite() {
        return (*state, ZERO);
    }
    let inv = 1.0 / g;
    let scaled = SolutionState {
        x: state.x,
        y: state.y * inv,
        yp: state.yp * inv,
        z: state.z * inv,
        zp: state.zp * inv,
        j: state.j * inv * inv,
        e_scale: state.e_scale,
    };
    (scaled, g.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn constant_w() -> FullCoefficients {
        FullCoefficients::new(vec![])
    }

    #[test]
    fn exponential_decay() {
        let s0 = SolutionState::new(c64(0.0, 0.0), c64(1.0, 0.0), c64(-1.0, 0.0));
        let out = integrate_segment(&s0, &constant_w(), c64(1.0, 0.0), &IntegratorOptions::default()).unwrap();
        assert!((out.y - c64((-1.0f64).exp(), 0.0)).norm() < 1e-10);
        // J = int_0^1 e^{-2x} dx
        assert!((out.j - c64((1.0 - (-2.0f64).exp()) / 2.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn gaussian_along_real_axis() {
        let c = FullCoefficients::new(vec![c64(0.0, 0.0), c64(-1.0, 0.0)]);
        let opts = IntegratorOptions::default();
        let mut state = SolutionState::new(c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0));
        let mut worst = 0.0f64;
        for i in 1..=20 {
            let x = 0.1 * i as f64;
            state = integrate_segment(&state, &c, c64(x, 0.0), &opts).unwrap();
            worst = worst.max((state.y - c64((-x * x / 2.0).exp(), 0.0)).norm());
        }
        assert!(worst <= 1e-9, "max error {worst}");
    }

    /// Power-series solution of Y'' = X Y: (n+2)(n+1) a_{n+2} = a_{n-1}.
    fn airy_series(y0: Complex64, yp0: Complex64, x: Complex64, terms: usize) -> (Complex64, Complex64) {
        let mut a = vec![c64(0.0, 0.0); terms + 3];
        a[0] = y0;
        a[1] = yp0;
        a[2] = c64(0.0, 0.0);
        for n in 1..=terms {
            a[n + 2] = a[n - 1] / ((n + 2) as f64 * (n + 1) as f64);
        }
        let mut y = c64(0.0, 0.0);
        let mut yp = c64(0.0, 0.0);
        let mut xp = c64(1.0, 0.0);
        for (n, an) in a.iter().enumerate() {
            y += an * xp;
            if n + 1 < a.len() {
                yp += a[n + 1] * (n + 1) as f64 * xp;
            }
            xp *= x;
        }
        (y, yp)
    }

    #[test]
    fn airy_equation_against_power_series() {
        let c = FullCoefficients::new(vec![c64(0.0, 0.0)]);
        let (y0, yp0) = (c64(0.355_028_053_887_817_2, 0.0), c64(-0.258_819_403_792_806_8, 0.0));
        for target in [c64(1.0, 0.0), c64(0.6, 0.8)] {
            let out = integrate_segment(&SolutionState::new(c64(0.0, 0.0), y0, yp0), &c, target, &IntegratorOptions::default()).unwrap();
            let (y, yp) = airy_series(y0, yp0, target, 60);
            assert!((out.y - y).norm() < 1e-10, "{} vs {}", out.y, y);
            assert!((out.yp - yp).norm() < 1e-10);
        }
    }

    #[test]
    fn wronskian_is_conserved_and_solutions_are_linear() {
        let c = FullCoefficients::new(vec![c64(0.5, 0.2), c64(-1.0, 0.0), c64(2.0, -1.0)]);
        let opts = IntegratorOptions::default();
        let start = c64(0.3, -0.2);
        let target = c64(-1.1, 1.4);
        let s1 = SolutionState::new(start, c64(1.0, 0.5), c64(-0.3, 0.0));
        let s2 = SolutionState::new(start, c64(0.2, 0.0), c64(1.0, 1.0));
        let w0 = wronskian(s1.y, s1.yp, s2.y, s2.yp);
        let o1 = integrate_segment(&s1, &c, target, &opts).unwrap();
        let o2 = integrate_segment(&s2, &c, target, &opts).unwrap();
        let w1 = wronskian(o1.y, o1.yp, o2.y, o2.yp);
        assert!((w1 - w0).norm() <= 1e-10 * (1.0 + w0.norm()), "{w0} -> {w1}");

        let (a, b) = (c64(0.7, -0.1), c64(-1.2, 0.4));
        let combo = SolutionState::new(start, a * s1.y + b * s2.y, a * s1.yp + b * s2.yp);
        let oc = integrate_segment(&combo, &c, target, &opts).unwrap();
        let expect = a * o1.y + b * o2.y;
        assert!((oc.y - expect).norm() < 1e-9 * (1.0 + expect.norm()));
    }

    #[test]
    fn tolerance_scaling() {
        let s0 = SolutionState::new(c64(0.0, 0.0), c64(1.0, 0.0), c64(-1.0, 0.0));
        let exact = (-4.0f64).exp();
        let err_at = |rel_tol: f64| {
            let opts = IntegratorOptions { rel_tol, abs_tol: rel_tol * 1e-3, ..Default::default() };
            let out = integrate_segment(&s0, &constant_w(), c64(4.0, 0.0), &opts).unwrap();
            (out.y.re - exact).abs()
        };
        let coarse = err_at(1e-6);
        let fine = err_at(0.5e-6 / 16.0);
        assert!(fine * 2.0 <= coarse, "coarse {coarse} fine {fine}");
    }

    #[test]
    fn step_limit_and_overflow_errors() {
        let s0 = SolutionState::new(c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0));
        let opts = IntegratorOptions { max_steps: 3, ..Default::default() };
        assert!(matches!(
            integrate_segment(&s0, &constant_w(), c64(10.0, 0.0), &opts),
            Err(Error::StepLimitExceeded { .. })
        ));
        assert!(matches!(
            integrate_segment(&s0, &constant_w(), c64(800.0, 0.0), &IntegratorOptions::default()),
            Err(Error::Overflow { .. })
        ));
        assert!(integrate_segment(&s0, &constant_w(), c64(0.0, 0.0), &IntegratorOptions::default()).is_err());
    }

    #[test]
    fn renormalize_example() {
        let mut s = SolutionState::new(c64(0.0, 0.0), c64(2.0, 0.0), c64(1.0, 0.0));
        s.j = c64(8.0, 0.0);
        let (scaled, log_g) = renormalize(&s);
        assert_eq!(scaled.y, c64(1.0, 0.0));
        assert_eq!(scaled.yp, c64(0.5, 0.0));
        assert_eq!(scaled.j, c64(2.0, 0.0));
        assert!((log_g - c64(2.0f64.ln(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn renormalized_segments_compose() {
        let c = FullCoefficients::new(vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(1.5, 0.0)]);
        let opts = IntegratorOptions::default();
        let start = SolutionState {
            e_scale: c64(1.0, 0.0),
            ..SolutionState::new(c64(3.0, 0.0), c64(1e-3, 0.0), c64(-5e-3, 0.0))
        };
        let direct = integrate_segment(&start, &c, c64(0.0, 0.0), &opts).unwrap();
        let mid = integrate_segment(&start, &c, c64(1.4, 0.3), &opts).unwrap();
        let (scaled, log_g) = renormalize(&mid);
        let end = integrate_segment(&scaled, &c, c64(0.0, 0.0), &opts).unwrap();
        let g = log_g.exp();
        for (a, b) in [(end.y * g, direct.y), (end.z * g, direct.z), (end.j * g * g, direct.j)] {
            assert!((a - b).norm() <= 1e-9 * (1.0 + b.norm()), "{a} vs {b}");
        }
    }

    #[test]
    fn variational_component_matches_finite_differences() {
        // m = 3, c = (0, 0, E): Z should equal dY/dE for fixed initial data.
        let e = 2.3;
        let h = 1e-5 * (1.0 + e);
        let opts = IntegratorOptions::default();
        let init = SolutionState::new(c64(2.0, 0.0), c64(0.01, 0.0), c64(-0.03, 0.0));
        let run = |e: f64| {
            let c = FullCoefficients::new(vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(e, 0.0)]);
            integrate_segment(&init, &c, c64(-0.5, 0.7), &opts).unwrap()
        };
        let center = run(e);
        let fd = (run(e + h).y - run(e - h).y) / (2.0 * h);
        assert!((center.z - fd).norm() <= 1e-5 * fd.norm(), "{} vs {}", center.z, fd);
    }
}
