//! Canonical solutions `Y_0` (recessive on the positive real axis) and the
//! rotated, renormalized solutions `Y_{-1}`, `Y_1`, with their E-derivatives.
//!
//! `Y_k(X) = P_k Phi_0(omega^k X; omega_k(c))` where `P_{±1} = omega^{±(m/2 + r_m)}`.
//! Each `Phi_0` is computed in its own frame variable `u = omega^k X`: it is
//! initialized from its asymptotic expansion at `u = R > 0` and integrated
//! inward to `u = omega^k X_0`, where it is the growing solution and hence
//! numerically stable.
//!
//! The initial data use the full Riccati expansion of the logarithmic
//! derivative `g = Phi'/Phi`, which satisfies `g' + g^2 = W`:
//!
//! ```text
//! g(u) = sum_j gamma_j u^{(m - j)/2},   gamma_0 = -1,
//! ```
//!
//! integrated term by term. Its positive-power part reproduces `-S`, the
//! `1/u` coefficient is `r_m`, and the remaining tail vanishes at infinity,
//! so the normalization `Phi_0 ~ u^{r_m} e^{-S}` is exact up to the
//! truncation of an asymptotic series.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::odecore::{integrate_segment, renormalize, IntegratorOptions, SolutionState};
use crate::potential::{
    action_s, action_s_prime, default_series_order, omega_pow, sqrt_w_series, AsymptoticData, FullCoefficients,
    ProblemSpec,
};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Maximum number of Riccati coefficients examined.
const RICCATI_TERMS: usize = 400;

/// Relative truncation error the initial data must reach.
const SERIES_TOL: f64 = 1e-15;

/// How the E-derivative `Z` of a ray solution is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeMode {
    /// Integrate the variational equation alongside the solution.
    Variational,
    /// Central differences in `E` with the given step (cross-validation only).
    FiniteDifference { h: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayOptions {
    pub integrator: IntegratorOptions,
    /// Fixed initialization radius; `None` selects it automatically.
    pub radius: Option<f64>,
    /// Minimum leading action `S(R)` for the automatic radius.
    pub min_action: f64,
    /// Re-run at `1.5 R` and require agreement before accepting a ray.
    pub certify_radius: bool,
    pub derivative: DerivativeMode,
}

impl Default for RayOptions {
    fn default() -> Self {
        Self {
            integrator: IntegratorOptions::default(),
            radius: None,
            min_action: 20.0,
            certify_radius: false,
            derivative: DerivativeMode::Variational,
        }
    }
}

/// Coefficients of the Riccati expansion of `Phi_0'/Phi_0` and their
/// derivatives with respect to the frame constant term `c_m`.
#[derive(Debug, Clone)]
pub struct RiccatiSeries {
    m: usize,
    gamma: Vec<Complex64>,
    dgamma: Vec<Complex64>,
}

impl RiccatiSeries {
    pub fn new(c: &FullCoefficients, terms: usize) -> Self {
        let m = c.degree();
        let mut gamma = vec![ZERO; terms + 1];
        let mut dgamma = vec![ZERO; terms + 1];
        gamma[0] = -ONE;
        for n in 1..=terms {
            let w = if n % 2 == 0 && n / 2 <= m { c.get(n / 2) } else { ZERO };
            let dw = if n == 2 * m { ONE } else { ZERO };
            let mut cross = ZERO;
            let mut dcross = ZERO;
            for i in 1..n {
                cross += gamma[i] * gamma[n - i];
                dcross += dgamma[i] * gamma[n - i] * 2.0;
            }
            let (deriv, dderiv) = if n >= m + 2 {
                let coef = (2.0 * m as f64 + 2.0 - n as f64) / 2.0;
                (gamma[n - m - 2] * coef, dgamma[n - m - 2] * coef)
            } else {
                (ZERO, ZERO)
            };
            gamma[n] = (w - cross - deriv) / (2.0 * gamma[0]);
            dgamma[n] = (dw - dcross - dderiv) / (2.0 * gamma[0]);
        }
        Self { m, gamma, dgamma }
    }

    pub fn gamma(&self, j: usize) -> Complex64 {
        self.gamma[j]
    }

    pub fn dgamma(&self, j: usize) -> Complex64 {
        self.dgamma[j]
    }

    /// Sum of the decaying tail (`j > m + 2`) at `x`, truncated before the
    /// terms start to grow. Returns `(L, g, dL, dg, error)` where `L` is the
    /// antiderivative part, `g` the log-derivative part, `d*` their
    /// `c_m`-derivatives and `error` the relative size of the last block kept.
    fn tail(&self, x: Complex64) -> (Complex64, Complex64, Complex64, Complex64, f64) {
        let m = self.m as f64;
        let lnx = x.ln();
        let lead = x.norm().powf(m / 2.0).max(1.0);
        let (mut l, mut g, mut dl, mut dg) = (ZERO, ZERO, ZERO, ZERO);
        // Nonzero coefficients may be sparse with period up to m + 2, so the
        // truncation test compares whole blocks of that width.
        let width = self.m + 2;
        let mut prev_block = f64::INFINITY;
        let mut error = 0.0f64;
        let mut start = self.m + 3;
        while start + width <= self.gamma.len() {
            let block = start..start + width;
            let size = block
                .clone()
                .map(|jj| {
                    let xp = (lnx * ((m - jj as f64) / 2.0)).exp().norm();
                    (self.gamma[jj].norm().max(self.dgamma[jj].norm())) * xp
                })
                .fold(0.0, f64::max);
            if size > prev_block {
                return (l, g, dl, dg, error);
            }
            for jj in block {
                let pw = (m - jj as f64) / 2.0;
                let xp = (lnx * pw).exp();
                let xl = xp * x / (pw + 1.0);
                g += self.gamma[jj] * xp;
                dg += self.dgamma[jj] * xp;
                l += self.gamma[jj] * xl;
                dl += self.dgamma[jj] * xl;
            }
            if size > 0.0 {
                error = size / lead;
                prev_block = size;
                if error < 1e-18 {
                    break;
                }
            }
            start += width;
        }
        (l, g, dl, dg, error)
    }
}

/// Initial data of a frame solution at `u = R`, normalized to `Y = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialValue {
    pub state: SolutionState,
    /// `log Phi_0(R)`.
    pub log_scale: Complex64,
    /// Relative truncation error of the asymptotic initial data.
    pub series_error: f64,
}

/// Asymptotic initial data `Phi_0(R) = R^r e^{-S(R)} (1 + o(1))` including
/// the decaying Riccati tail; `Z` is the E-derivative via `e_scale = dc_m/dE`.
///
/// The returned `J` holds minus the tail integral `int_R^inf Phi^2` so that
/// inward integration leaves `-int_{u}^{inf} Phi^2` in the accumulator.
pub fn initial_state(
    c: &FullCoefficients,
    radius: f64,
    asym: &AsymptoticData,
    e_scale: Complex64,
) -> Result<InitialValue> {
    let x = Complex64::new(radius, 0.0);
    let series = RiccatiSeries::new(c, RICCATI_TERMS);
    let m = c.degree();
    let r = asym.r;
    let dr = series.dgamma(m + 2);
    let s = action_s(x, asym)?;
    let sp = action_s_prime(x, asym);
    let (tl, tg, tdl, tdg, series_error) = series.tail(x);
    if series_error > SERIES_TOL {
        return Err(Error::RadiusTooSmall { radius, estimate: series_error });
    }
    let lnx = x.ln();
    let log_scale = r * lnx - s + tl;
    let g = r / x - sp + tg;
    let dl = dr * lnx + tdl;
    let dg = dr / x + tdg;
    let state = SolutionState {
        x,
        y: ONE,
        yp: g,
        z: e_scale * dl,
        zp: e_scale * (dg + g * dl),
        j: 1.0 / (2.0 * g),
        e_scale,
    };
    Ok(InitialValue { state, log_scale, series_error })
}

/// Fujiwara bound on the roots of the monic polynomial `W`.
fn root_bound(c: &FullCoefficients) -> f64 {
    let m = c.degree();
    (1..=m)
        .map(|j| {
            let mut a = c.get(j).norm();
            if j == m {
                a /= 2.0;
            }
            2.0 * a.powf(1.0 / j as f64)
        })
        .fold(0.0, f64::max)
}

/// First radius of the schedule: large `S(R)` and well outside the turning points.
pub fn default_radius(c: &FullCoefficients, min_action: f64) -> f64 {
    let m = c.degree() as f64;
    let by_action = (min_action * (m + 2.0) / 2.0).powf(2.0 / (m + 2.0));
    by_action.max(1.5 * root_bound(c)).max(2.0)
}

/// A rotated canonical solution evaluated at the matching point, in
/// unrotated coordinates. Stored values are scaled by `exp(-log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySolution {
    pub frame: i32,
    pub at_origin: SolutionState,
    pub log_scale: Complex64,
    /// `int_{X_0}^{inf} Y_k^2 dX` along the ray, scaled by `exp(-2 log_scale)`.
    pub j_ray: Complex64,
    pub r_used: f64,
    pub series_error: f64,
}

impl RaySolution {
    pub fn scale(&self) -> Complex64 {
        self.log_scale.exp()
    }

    pub fn y(&self) -> Complex64 {
        self.at_origin.y * self.scale()
    }

    pub fn yp(&self) -> Complex64 {
        self.at_origin.yp * self.scale()
    }

    pub fn z(&self) -> Complex64 {
        self.at_origin.z * self.scale()
    }

    pub fn zp(&self) -> Complex64 {
        self.at_origin.zp * self.scale()
    }

    pub fn j(&self) -> Complex64 {
        self.j_ray * (self.log_scale * 2.0).exp()
    }
}

/// `Wr(Y_a, Y_b)` of two rays at the common matching point.
pub fn wronskian_yy(a: &RaySolution, b: &RaySolution) -> Complex64 {
    let s = (a.log_scale + b.log_scale).exp();
    (a.at_origin.y * b.at_origin.yp - a.at_origin.yp * b.at_origin.y) * s
}

/// `Wr(Z_a, Y_b)`.
pub fn wronskian_zy(a: &RaySolution, b: &RaySolution) -> Complex64 {
    let s = (a.log_scale + b.log_scale).exp();
    (a.at_origin.z * b.at_origin.yp - a.at_origin.zp * b.at_origin.y) * s
}

/// Frame data shared by every evaluation of one ray.
struct Frame {
    m: usize,
    k: i32,
    coeffs: FullCoefficients,
    asym: AsymptoticData,
    e_scale: Complex64,
    prefactor: Complex64,
    dprefactor: Complex64,
}

impl Frame {
    fn new(spec: &ProblemSpec, e: Complex64, k: i32) -> Self {
        let m = spec.degree();
        let full = spec.full_coefficients(e);
        let r = sqrt_w_series(&full, default_series_order(m)).r;
        let coeffs = full.rotate_coefficients(k);
        let asym = sqrt_w_series(&coeffs, default_series_order(m));
        let e_scale = omega_pow(m, Complex64::new((k * m as i32) as f64, 0.0));
        let prefactor = omega_pow(m, (Complex64::new(m as f64 / 2.0, 0.0) + r) * k as f64);
        // Only for m = 2 does r_m depend on the constant term: dr/dE = -1/2.
        let dr_de = if m == 2 { -0.5 } else { 0.0 };
        let log_omega = Complex64::new(0.0, -2.0 * std::f64::consts::PI / (m as f64 + 2.0));
        let dprefactor = prefactor * log_omega * (k as f64 * dr_de);
        Self { m, k, coeffs, asym, e_scale, prefactor, dprefactor }
    }

    fn rotation(&self) -> Complex64 {
        omega_pow(self.m, Complex64::new(self.k as f64, 0.0))
    }

    fn initial(&self, opts: &RayOptions) -> Result<(f64, InitialValue)> {
        let mut radius = opts.radius.unwrap_or_else(|| default_radius(&self.coeffs, opts.min_action));
        let mut last_err = None;
        for _ in 0..8 {
            match initial_state(&self.coeffs, radius, &self.asym, self.e_scale) {
                Ok(init) => return Ok((radius, init)),
                Err(e @ Error::RadiusTooSmall { .. }) => {
                    if opts.radius.is_some() {
                        return Err(e);
                    }
                    last_err = Some(e);
                    radius *= 1.5;
                }
                Err(e) => return Err(e),
            }
        }
        Err(last_err.unwrap_or(Error::ConvergenceFailure("radius schedule exhausted".into())))
    }

    /// Pieces along `R -> u0` with roughly equal decrease of the leading action.
    fn piece_points(&self, radius: f64, u0: Complex64, s_radius: f64) -> Vec<Complex64> {
        let n = ((self.m as f64 + 2.0) / 2.0 * s_radius / 25.0).ceil().max(1.0) as usize;
        let start = Complex64::new(radius, 0.0);
        let p = 2.0 / (self.m as f64 + 2.0);
        (1..=n)
            .map(|i| {
                let tau = 1.0 - (1.0 - i as f64 / n as f64).powf(p);
                start + (u0 - start) * tau
            })
            .collect()
    }

    /// Integrate the frame solution inward, visiting `stops` (frame coordinates,
    /// ordered along the path) and calling `visit` with the state and log scale.
    fn march(
        &self,
        opts: &RayOptions,
        radius: f64,
        init: &InitialValue,
        stops: &[Complex64],
        mut visit: impl FnMut(usize, &SolutionState, Complex64),
    ) -> Result<(SolutionState, Complex64)> {
        let mut state = init.state;
        let mut log_scale = init.log_scale;
        let s_radius = action_s(Complex64::new(radius, 0.0), &self.asym)?.norm();
        let end = *stops.last().expect("at least one stop");
        let pieces = self.piece_points(radius, end, s_radius);
        // Merge piece boundaries with requested stops by distance from the start.
        let start = Complex64::new(radius, 0.0);
        let mut events: Vec<(f64, Option<usize>, Complex64)> = stops
            .iter()
            .enumerate()
            .map(|(i, &p)| ((p - start).norm(), Some(i), p))
            .chain(pieces.iter().map(|&p| ((p - start).norm(), None, p)))
            .collect();
        events.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.is_some().cmp(&a.1.is_some())));
        for (_, idx, point) in events {
            if (point - state.x).norm() > 1e-14 * (1.0 + point.norm()) {
                state = integrate_segment(&state, &self.coeffs, point, &opts.integrator)?;
                let (scaled, log_g) = renormalize(&state);
                state = scaled;
                log_scale += log_g;
            }
            if let Some(i) = idx {
                visit(i, &state, log_scale);
            }
        }
        Ok((state, log_scale))
    }

    /// Map a frame state at `u = omega^k X` to unrotated `Y_k` data.
    fn unrotate(&self, frame_state: &SolutionState, x: Complex64) -> SolutionState {
        let rot = self.rotation();
        let p = self.prefactor;
        let dp = self.dprefactor;
        SolutionState {
            x,
            y: p * frame_state.y,
            yp: p * rot * frame_state.yp,
            z: p * frame_state.z + dp * frame_state.y,
            zp: rot * (p * frame_state.zp + dp * frame_state.yp),
            j: frame_state.j,
            e_scale: self.e_scale,
        }
    }
}

fn solve_ray(spec: &ProblemSpec, e: Complex64, k: i32, x0: Complex64, opts: &RayOptions) -> Result<RaySolution> {
    let frame = Frame::new(spec, e, k);
    let (radius, init) = frame.initial(opts)?;
    let u0 = frame.rotation() * x0;
    let (end, log_scale) = frame.march(opts, radius, &init, &[u0], |_, _, _| {})?;
    let mut at_origin = frame.unrotate(&end, x0);
    let rot_inv = frame.rotation().inv();
    let j_ray = -end.j * frame.prefactor * frame.prefactor * rot_inv;
    at_origin.j = j_ray;
    if !at_origin.is_finite() || !log_scale.re.is_finite() {
        return Err(Error::Overflow { at: x0 });
    }
    Ok(RaySolution { frame: k, at_origin, log_scale, j_ray, r_used: radius, series_error: init.series_error })
}

/// Solution `Y_k` and its E-derivative at `x0`, plus the ray integral of `Y_k^2`.
pub fn ray_solution(spec: &ProblemSpec, e: Complex64, k: i32, x0: Complex64, opts: &RayOptions) -> Result<RaySolution> {
    if !(-1..=1).contains(&k) {
        return Err(Error::InvalidArgument(format!("sector index {k} outside -1..=1")));
    }
    let mut sol = solve_ray(spec, e, k, x0, opts)?;
    if let DerivativeMode::FiniteDifference { h } = opts.derivative {
        let fixed = RayOptions { radius: Some(sol.r_used), ..*opts };
        let plus = solve_ray(spec, e + h, k, x0, &fixed)?;
        let minus = solve_ray(spec, e - h, k, x0, &fixed)?;
        // Differences taken in the scale of the central solution.
        let rel = |other: &RaySolution| (other.log_scale - sol.log_scale).exp();
        sol.at_origin.z = (plus.at_origin.y * rel(&plus) - minus.at_origin.y * rel(&minus)) / (2.0 * h);
        sol.at_origin.zp = (plus.at_origin.yp * rel(&plus) - minus.at_origin.yp * rel(&minus)) / (2.0 * h);
    }
    if opts.certify_radius {
        let change = radius_change(spec, e, k, x0, opts, sol.r_used, &sol)?;
        if change > certificate_tolerance(&opts.integrator) {
            let mut radius = sol.r_used;
            let mut accepted = false;
            for _ in 0..4 {
                radius *= 1.5;
                let retry = solve_ray(spec, e, k, x0, &RayOptions { radius: Some(radius), ..*opts })?;
                if radius_change(spec, e, k, x0, opts, radius, &retry)? <= certificate_tolerance(&opts.integrator) {
                    sol = RaySolution { at_origin: SolutionState { z: sol.at_origin.z, zp: sol.at_origin.zp, ..retry.at_origin }, ..retry };
                    accepted = true;
                    break;
                }
            }
            if !accepted {
                return Err(Error::ConvergenceFailure(format!("radius certificate failed for sector {k} at E = {e}")));
            }
        }
    }
    Ok(sol)
}

/// Acceptable relative change of `Y_k(X_0)` between radius `R` and `1.5 R`.
pub fn certificate_tolerance(opts: &IntegratorOptions) -> f64 {
    // Global error of the inward march is a few hundred local tolerances.
    1e3 * opts.rel_tol
}

fn radius_change(
    spec: &ProblemSpec,
    e: Complex64,
    k: i32,
    x0: Complex64,
    opts: &RayOptions,
    radius: f64,
    sol: &RaySolution,
) -> Result<f64> {
    let wider = solve_ray(spec, e, k, x0, &RayOptions { radius: Some(1.5 * radius), ..*opts })?;
    let a = sol.y();
    let b = wider.y();
    let ap = sol.yp();
    let bp = wider.yp();
    Ok(((a - b).norm() + (ap - bp).norm()) / (b.norm() + bp.norm()))
}

/// Relative change of `(Y_k, Y_k')` at `x0` when the initialization radius is
/// moved from the automatic choice `R` to `1.5 R`.
pub fn radius_certificate(spec: &ProblemSpec, e: Complex64, k: i32, x0: Complex64, opts: &RayOptions) -> Result<f64> {
    let sol = solve_ray(spec, e, k, x0, opts)?;
    radius_change(spec, e, k, x0, opts, sol.r_used, &sol)
}

/// Values of `Y_k` at `X = omega^{-k} t` for each radial node `t >= 0`
/// (the ray of sector `k`). Nodes beyond the initialization radius use the
/// asymptotic expansion directly.
pub fn ray_samples(spec: &ProblemSpec, e: Complex64, k: i32, nodes: &[f64], opts: &RayOptions) -> Result<Vec<Complex64>> {
    if !(-1..=1).contains(&k) {
        return Err(Error::InvalidArgument(format!("sector index {k} outside -1..=1")));
    }
    if nodes.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidArgument("radial nodes must be non-negative".into()));
    }
    let frame = Frame::new(spec, e, k);
    let (radius, init) = frame.initial(opts)?;
    let mut out = vec![ZERO; nodes.len()];

    let mut inner: Vec<(usize, f64)> = Vec::new();
    for (i, &t) in nodes.iter().enumerate() {
        if t >= radius {
            let far = initial_state(&frame.coeffs, t, &frame.asym, frame.e_scale)?;
            out[i] = frame.prefactor * far.log_scale.exp();
        } else {
            inner.push((i, t));
        }
    }
    if inner.is_empty() {
        return Ok(out);
    }
    inner.sort_by(|a, b| b.1.total_cmp(&a.1));
    let stops: Vec<Complex64> = inner.iter().map(|&(_, t)| Complex64::new(t, 0.0)).collect();
    frame.march(opts, radius, &init, &stops, |idx, state, log_scale| {
        out[inner[idx].0] = frame.prefactor * state.y * log_scale.exp();
    })?;
    Ok(out)
}

/// The automatic initialization radius used for sector `k`.
pub fn ray_radius(spec: &ProblemSpec, e: Complex64, k: i32, opts: &RayOptions) -> Result<f64> {
    Frame::new(spec, e, k).initial(opts).map(|(r, _)| r)
}
