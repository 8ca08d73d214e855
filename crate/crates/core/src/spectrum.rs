//! Eigenvalues as zeros of the Stokes multiplier.
//!
//! On the real axis `C` is purely imaginary for a real problem, so real
//! levels are sign changes of `g(E) = Im C(E)`. A scan brackets them,
//! bisection plus Newton refines them, and the argument principle over a
//! rectangle certifies that nothing was missed; any remaining zeros are
//! sought by complex Newton and paired with their conjugates.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potential::ProblemSpec;
use crate::quadrature::{integrate, QuadOptions};
use crate::stokes::{stokes_batch, stokes_multiplier, stokes_second_derivative, default_second_derivative_step, StokesOptions, StokesValue};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    pub stokes: StokesOptions,
    /// Uniform scan intervals over the real window.
    pub grid_n: usize,
    /// Convergence: Newton step `|C / C'| <= root_tol (1 + |E|)`.
    pub root_tol: f64,
    /// An extremum of `g` between grid points is a near miss when its
    /// interpolated value is below this fraction of the local `|g|` scale.
    pub near_miss_ratio: f64,
    pub refine_factor: usize,
    pub refine_depth: usize,
    /// Half-height of the counting rectangle; `None` picks
    /// `max(2, width / 4)`.
    pub imag_half_height: Option<f64>,
    /// A zero is simple when `|C' / C''| > simplicity_factor (1 + |E|)`, i.e.
    /// no second zero is predicted within that distance.
    pub simplicity_factor: f64,
    pub count_quad: QuadOptions,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            stokes: StokesOptions::default(),
            grid_n: 200,
            root_tol: 1e-9,
            near_miss_ratio: 0.02,
            refine_factor: 10,
            refine_depth: 3,
            imag_half_height: None,
            simplicity_factor: 1e-6,
            count_quad: QuadOptions { abs_tol: 1e-6, rel_tol: 1e-8, max_panels: 4000 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub brackets: Vec<Bracket>,
    /// Interior extrema of `g` without a sign change nearby; seeds for
    /// complex zeros.
    pub extrema: Vec<f64>,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenRecord {
    pub e: Complex64,
    /// Position among the real levels in increasing order; -1 for non-real.
    pub index: i64,
    pub simple: bool,
    pub residual: f64,
    pub c_prime: Complex64,
    pub c_second: Complex64,
    pub wr_check: f64,
    /// `|C| / c_scale` at `e`; see [`StokesValue::cancellation`].
    pub cancellation: f64,
}

impl EigenRecord {
    pub fn is_real(&self) -> bool {
        self.e.im == 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// Sorted by real part, then imaginary part.
    pub records: Vec<EigenRecord>,
    pub window_count: i64,
    pub complete: bool,
    /// `|E_n - formula(n + 1)| / |E_n|` for each real level; empty for `m = 2`.
    pub asymptotic_deviation: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let ok = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite()) && re_min < re_max && im_min < im_max;
        if !ok {
            return Err(Error::InvalidArgument(format!("degenerate rectangle [{re_min},{re_max}]x[{im_min},{im_max}]")));
        }
        Ok(Self { re_min, re_max, im_min, im_max })
    }

    pub fn contains(&self, e: Complex64) -> bool {
        (self.re_min..=self.re_max).contains(&e.re) && (self.im_min..=self.im_max).contains(&e.im)
    }

    fn inflated(&self, frac: f64) -> Self {
        let dx = frac * (self.re_max - self.re_min);
        let dy = frac * (self.im_max - self.im_min);
        Self { re_min: self.re_min - dx, re_max: self.re_max + dx, im_min: self.im_min - dy, im_max: self.im_max + dy }
    }

    /// Counter-clockwise edges as (start, end).
    fn edges(&self) -> [(Complex64, Complex64); 4] {
        let c = |re, im| Complex64::new(re, im);
        let (a, b) = (c(self.re_min, self.im_min), c(self.re_max, self.im_min));
        let (d, e) = (c(self.re_max, self.im_max), c(self.re_min, self.im_max));
        [(a, b), (b, d), (d, e), (e, a)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroCount {
    pub count: i64,
    /// `(1 / 2 pi i) * contour integral of C'/C`.
    pub raw: Complex64,
    pub rect: Rect,
    pub inflations: usize,
}

fn real_point(e: f64) -> Complex64 {
    Complex64::new(e, 0.0)
}

fn evaluate_grid(spec: &ProblemSpec, xs: &[f64], opts: &SpectrumOptions) -> Result<Vec<StokesValue>> {
    let es: Vec<Complex64> = xs.iter().map(|&x| real_point(x)).collect();
    stokes_batch(spec, &es, &opts.stokes).into_iter().collect()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 }).collect()
}

/// Cubic Hermite interpolant of `g` on `[x0, x1]` sampled at 64 points;
/// returns the sampled value of smallest magnitude and its abscissa.
fn hermite_extremum(x0: f64, x1: f64, g0: f64, g1: f64, d0: f64, d1: f64) -> (f64, f64) {
    let h = x1 - x0;
    let mut best = (x0, g0);
    for i in 1..64 {
        let t = i as f64 / 64.0;
        let (t2, t3) = (t * t, t * t * t);
        let p = (2.0 * t3 - 3.0 * t2 + 1.0) * g0
            + (t3 - 2.0 * t2 + t) * h * d0
            + (-2.0 * t3 + 3.0 * t2) * g1
            + (t3 - t2) * h * d1;
        if p.abs() < best.1.abs() || p.signum() != g0.signum() {
            best = (x0 + t * h, p);
            if p.signum() != g0.signum() {
                break;
            }
        }
    }
    best
}

fn scan_level(
    spec: &ProblemSpec,
    xs: &[f64],
    vals: &[StokesValue],
    depth: usize,
    opts: &SpectrumOptions,
    out: &mut ScanResult,
) -> Result<()> {
    let g: Vec<f64> = vals.iter().map(|v| v.c.im).collect();
    let d: Vec<f64> = vals.iter().map(|v| v.c_prime.im).collect();
    for i in 0..xs.len() - 1 {
        if g[i] == 0.0 {
            out.brackets.push(Bracket { lo: xs[i], hi: xs[i] });
            continue;
        }
        if g[i] * g[i + 1] < 0.0 {
            out.brackets.push(Bracket { lo: xs[i], hi: xs[i + 1] });
            continue;
        }
        if d[i] * d[i + 1] >= 0.0 {
            continue;
        }
        let window = &g[i.saturating_sub(3)..(i + 5).min(g.len())];
        let local = window.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let (x_ext, g_ext) = hermite_extremum(xs[i], xs[i + 1], g[i], g[i + 1], d[i], d[i + 1]);
        let near = g_ext.signum() != g[i].signum() || g_ext.abs() < opts.near_miss_ratio * local;
        if near && depth > 0 {
            let sub = linspace(xs[i], xs[i + 1], opts.refine_factor);
            let mut sub_vals = evaluate_grid(spec, &sub[1..sub.len() - 1], opts)?;
            out.evaluations += sub_vals.len();
            sub_vals.insert(0, vals[i]);
            sub_vals.push(vals[i + 1]);
            scan_level(spec, &sub, &sub_vals, depth - 1, opts, out)?;
        } else {
            out.extrema.push(x_ext);
        }
    }
    if g[xs.len() - 1] == 0.0 {
        out.brackets.push(Bracket { lo: xs[xs.len() - 1], hi: xs[xs.len() - 1] });
    }
    Ok(())
}

/// Sign-change brackets of `Im C` on `[emin, emax]`, plus near-miss
/// refinement around extrema of `Im C` between grid points.
pub fn scan_real_detailed(
    spec: &ProblemSpec,
    emin: f64,
    emax: f64,
    grid_n: usize,
    opts: &SpectrumOptions,
) -> Result<ScanResult> {
    if !(emin.is_finite() && emax.is_finite() && emin < emax) {
        return Err(Error::InvalidArgument(format!("empty energy window [{emin}, {emax}]")));
    }
    if grid_n < 2 {
        return Err(Error::InvalidArgument("scan needs at least two intervals".into()));
    }
    let xs = linspace(emin, emax, grid_n);
    let vals = evaluate_grid(spec, &xs, opts)?;
    let mut out = ScanResult { brackets: Vec::new(), extrema: Vec::new(), evaluations: vals.len() };
    scan_level(spec, &xs, &vals, opts.refine_depth, opts, &mut out)?;
    out.brackets.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    out.brackets.dedup_by(|b, a| b.lo == a.lo && b.hi == a.hi);
    Ok(out)
}

pub fn scan_real(spec: &ProblemSpec, emin: f64, emax: f64, grid_n: usize, opts: &SpectrumOptions) -> Result<Vec<Bracket>> {
    scan_real_detailed(spec, emin, emax, grid_n, opts).map(|s| s.brackets)
}

/// `|C|` changes by orders of magnitude along the real axis, so closeness is
/// judged by the Newton step rather than by `|C|` itself.
fn converged(v: &StokesValue, opts: &SpectrumOptions) -> bool {
    v.c.norm() <= opts.root_tol * (1.0 + v.e.norm()) * v.c_prime.norm()
}

/// Attaches `C''` and the simplicity flag to a converged zero.
pub fn classify(spec: &ProblemSpec, v: &StokesValue, opts: &SpectrumOptions) -> Result<EigenRecord> {
    let c_second = stokes_second_derivative(spec, v.e, default_second_derivative_step(v.e), &opts.stokes)?;
    Ok(EigenRecord {
        e: v.e,
        index: -1,
        simple: v.c_prime.norm() > opts.simplicity_factor * (1.0 + v.e.norm()) * c_second.norm(),
        residual: v.c.norm(),
        c_prime: v.c_prime,
        c_second,
        wr_check: v.wr_check,
        cancellation: v.cancellation(),
    })
}

fn bisect(spec: &ProblemSpec, mut lo: f64, mut hi: f64, width: f64, opts: &SpectrumOptions) -> Result<(f64, f64)> {
    let mut g_lo = stokes_multiplier(spec, real_point(lo), &opts.stokes)?.c.im;
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = stokes_multiplier(spec, real_point(mid), &opts.stokes)?.c.im;
        if g == 0.0 {
            return Ok((mid, mid));
        }
        if g.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Bisection to width `1e-3`, then real Newton; falls back to bisection to
/// width `1e-12` when Newton leaves the bracket or stops contracting.
pub fn refine_root(spec: &ProblemSpec, bracket: Bracket, opts: &SpectrumOptions) -> Result<EigenRecord> {
    let (mut lo, mut hi) = if bracket.hi > bracket.lo { bisect(spec, bracket.lo, bracket.hi, 1e-3, opts)? } else { (bracket.lo, bracket.hi) };
    let mut e = 0.5 * (lo + hi);
    let mut v = stokes_multiplier(spec, real_point(e), &opts.stokes)?;
    let g_lo_sign = if hi > lo { stokes_multiplier(spec, real_point(lo), &opts.stokes)?.c.im.signum() } else { 0.0 };
    let mut newton_ok = false;
    for it in 0..40 {
        if converged(&v, opts) {
            newton_ok = true;
            break;
        }
        let step = (v.c / v.c_prime).re;
        let next = e - step;
        if !next.is_finite() || next < lo || next > hi {
            break;
        }
        let w = stokes_multiplier(spec, real_point(next), &opts.stokes)?;
        if it >= 2 && w.c.norm() > 0.5 * v.c.norm() {
            break;
        }
        if hi > lo {
            if w.c.im.signum() == g_lo_sign {
                lo = lo.max(next.min(e));
            } else {
                hi = hi.min(next.max(e));
            }
        }
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + e.abs()) {
            v = w;
            newton_ok = converged(&v, opts);
            break;
        }
        e = next;
        v = w;
    }
    if !newton_ok {
        let (a, b) = bisect(spec, lo, hi, 1e-12, opts)?;
        e = 0.5 * (a + b);
        v = stokes_multiplier(spec, real_point(e), &opts.stokes)?;
    }
    classify(spec, &v, opts)
}

/// Damped complex Newton `E <- E - lambda C/C'`, halving `lambda` until `|C|` decreases.
pub fn newton_complex(spec: &ProblemSpec, guess: Complex64, opts: &SpectrumOptions) -> Result<EigenRecord> {
    newton_deflated(spec, guess, &[], opts)
}

/// Newton on `C(E) / prod (E - E_k)`, which keeps the iteration away from
/// the zeros `known`. Convergence is still judged on `C` itself.
pub fn newton_deflated(spec: &ProblemSpec, guess: Complex64, known: &[Complex64], opts: &SpectrumOptions) -> Result<EigenRecord> {
    let merit = |v: &StokesValue| v.c.norm().ln() - known.iter().map(|k| (v.e - k).norm().ln()).sum::<f64>();
    let mut e = guess;
    let mut v = stokes_multiplier(spec, e, &opts.stokes)?;
    for _ in 0..50 {
        if converged(&v, opts) {
            return classify(spec, &v, opts);
        }
        let log_derivative = v.c_prime / v.c - known.iter().map(|k| (e - k).inv()).sum::<Complex64>();
        if !(log_derivative.norm() > 0.0) || !log_derivative.is_finite() {
            return Err(Error::NewtonStall { at: e });
        }
        let step = log_derivative.inv();
        let current = merit(&v);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..20 {
            let trial = e - step * lambda;
            if let Ok(w) = stokes_multiplier(spec, trial, &opts.stokes) {
                if merit(&w) < current {
                    accepted = Some(w);
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some(w) => {
                e = w.e;
                v = w;
            }
            None => return Err(Error::NewtonStall { at: e }),
        }
    }
    Err(Error::NoConvergence { iterations: 50, at: e })
}

/// `(1 / 2 pi i) * contour integral of C'/C dE` over `rect`, rounded. The
/// rectangle is inflated by 1% (up to three times) when a zero lies within
/// `1e-3` of the smaller side length of its boundary.
pub fn count_zeros(spec: &ProblemSpec, rect: Rect, opts: &SpectrumOptions) -> Result<ZeroCount> {
    let mut current = rect;
    for inflations in 0..=3 {
        match contour_count(spec, &current, opts) {
            Ok(raw) => {
                let count = raw.re.round();
                let residual = (raw - count).norm();
                if residual >= 0.25 {
                    return Err(Error::QuadratureNoise { residual });
                }
                return Ok(ZeroCount { count: count as i64, raw, rect: current, inflations });
            }
            Err(Error::BoundaryZero) => current = current.inflated(0.01),
            Err(e) => return Err(e),
        }
    }
    Err(Error::BoundaryZero)
}

fn contour_count(spec: &ProblemSpec, rect: &Rect, opts: &SpectrumOptions) -> Result<Complex64> {
    let near = 1e-3 * (rect.re_max - rect.re_min).min(rect.im_max - rect.im_min);
    let mut total = Complex64::new(0.0, 0.0);
    for (a, b) in rect.edges() {
        let dir = b - a;
        let f = |t: f64| -> Result<Complex64> {
            let v = stokes_multiplier(spec, a + dir * t, &opts.stokes)?;
            if v.c.norm() <= near * v.c_prime.norm() {
                return Err(Error::BoundaryZero);
            }
            Ok(v.c_prime / v.c * dir)
        };
        let panels = (dir.norm().ceil() as usize).clamp(4, 64);
        total += integrate(&f, 0.0, 1.0, panels, &opts.count_quad)?.value;
    }
    Ok(total / Complex64::new(0.0, 2.0 * PI))
}

/// `K = int_0^inf (sqrt(1 + t^m) - t^{m/2}) dt` for `m >= 3`.
pub fn asymptotic_constant(m: usize) -> Result<f64> {
    if m < 3 {
        return Err(Error::UnsupportedDegree(m));
    }
    let mf = m as f64;
    // The difference is evaluated as 1 / (sqrt(1 + t^m) + t^{m/2}).
    let f = |t: f64| Ok(Complex64::new(1.0 / ((1.0 + t.powf(mf)).sqrt() + t.powf(mf / 2.0)), 0.0));
    let quad = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-14, max_panels: 2000 };
    let t_max: f64 = 1e4;
    let mut k = 0.0;
    let mut lo = 0.0;
    for hi in [1.0, 10.0, 100.0, 1e3, 1e4] {
        k += integrate(&f, lo, hi, 4, &quad)?.value.re;
        lo = hi;
    }
    // Tail from the expansion t^{-m/2}/2 - t^{-3m/2}/8 + ...
    k += t_max.powf(1.0 - mf / 2.0) / (mf - 2.0) - t_max.powf(1.0 - 1.5 * mf) / (8.0 * (1.5 * mf - 1.0));
    Ok(k)
}

/// Large-`n` level formula `((2n - 1) pi / (2 K sin(2 pi / m)))^{2m/(m+2)}`
/// for `n >= 1`; the value for `n` approximates the level with zero-based
/// index `n - 1`.
pub fn asymptotic_levels(m: usize, ns: RangeInclusive<usize>) -> Result<Vec<f64>> {
    if *ns.start() == 0 {
        return Err(Error::InvalidArgument("asymptotic levels are numbered from 1".into()));
    }
    let k = asymptotic_constant(m)?;
    let mf = m as f64;
    let denom = 2.0 * k * (2.0 * PI / mf).sin();
    Ok(ns.map(|n| ((2 * n - 1) as f64 * PI / denom).powf(2.0 * mf / (mf + 2.0))).collect())
}

fn default_half_height(emin: f64, emax: f64) -> f64 {
    (0.25 * (emax - emin)).max(2.0)
}

fn is_duplicate(found: &[EigenRecord], e: Complex64) -> bool {
    found.iter().any(|r| (r.e - e).norm() <= 1e-7 * (1.0 + e.norm()))
}

/// Real levels in `[emin, emax]` plus any non-real zeros inside the counting
/// rectangle `[emin, emax] x [-h, h]`.
pub fn spectrum_pipeline(spec: &ProblemSpec, emin: f64, emax: f64, opts: &SpectrumOptions) -> Result<SpectrumResult> {
    let scan = scan_real_detailed(spec, emin, emax, opts.grid_n, opts)?;
    let refined: Vec<EigenRecord> = scan.brackets.par_iter().map(|b| refine_root(spec, *b, opts)).collect::<Result<_>>()?;
    let mut records: Vec<EigenRecord> = Vec::new();
    for r in refined {
        if !is_duplicate(&records, r.e) && (emin..=emax).contains(&r.e.re) {
            records.push(r);
        }
    }
    let h = opts.imag_half_height.unwrap_or_else(|| default_half_height(emin, emax));
    let rect = Rect::new(emin, emax, -h, h)?;
    let count = count_zeros(spec, rect, opts)?;
    if (records.len() as i64) < count.count {
        search_complex(spec, &count.rect, &scan.extrema, count.count, &mut records, opts)?;
    }
    records.sort_by(|a, b| a.e.re.total_cmp(&b.e.re).then(a.e.im.total_cmp(&b.e.im)));
    let mut n = 0;
    for r in records.iter_mut().filter(|r| r.e.im == 0.0) {
        r.index = n;
        n += 1;
    }
    let asymptotic_deviation = if spec.degree() >= 3 && n > 0 {
        let formula = asymptotic_levels(spec.degree(), 1..=n as usize)?;
        records.iter().filter(|r| r.index >= 0).map(|r| (r.e.re - formula[r.index as usize]).abs() / r.e.norm()).collect()
    } else {
        Vec::new()
    };
    Ok(SpectrumResult { complete: records.len() as i64 == count.count, window_count: count.count, records, asymptotic_deviation })
}

fn search_complex(
    spec: &ProblemSpec,
    rect: &Rect,
    extrema: &[f64],
    target: i64,
    records: &mut Vec<EigenRecord>,
    opts: &SpectrumOptions,
) -> Result<()> {
    let h = rect.im_max.max(-rect.im_min);
    let mut seeds: Vec<Complex64> = extrema.iter().map(|&x| Complex64::new(x, 0.25f64.min(h))).collect();
    for j in [0.1, 0.4, 0.8] {
        for i in 0..6 {
            let re = rect.re_min + (rect.re_max - rect.re_min) * (i as f64 + 0.5) / 6.0;
            seeds.push(Complex64::new(re, h * j));
        }
    }
    for seed in seeds {
        if records.len() as i64 >= target {
            break;
        }
        let known: Vec<Complex64> = records.iter().map(|r| r.e).collect();
        let Ok(r) = newton_deflated(spec, seed, &known, opts) else { continue };
        if !rect.contains(r.e) || is_duplicate(records, r.e) {
            continue;
        }
        if r.e.im.abs() <= 1e-8 * (1.0 + r.e.norm()) {
            let v = stokes_multiplier(spec, Complex64::new(r.e.re, 0.0), &opts.stokes)?;
            records.push(classify(spec, &v, opts)?);
            continue;
        }
        let partner = newton_complex(spec, r.e.conj(), opts);
        records.push(r);
        if let Ok(p) = partner {
            if !is_duplicate(records, p.e) && rect.contains(p.e) {
                records.push(p);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SpectrumOptions {
        SpectrumOptions::default()
    }

    #[test]
    fn harmonic_brackets_and_roots() {
        let spec = ProblemSpec::pure(2).unwrap();
        let b = scan_real(&spec, 0.0, 10.0, 200, &opts()).unwrap();
        assert_eq!(b.len(), 5);
        for (i, br) in b.iter().enumerate() {
            let e = (2 * i + 1) as f64;
            assert!(br.lo <= e && e <= br.hi);
        }
        for (lo, hi, e) in [(0.5, 1.5, 1.0), (2.5, 3.5, 3.0)] {
            let r = refine_root(&spec, Bracket { lo, hi }, &opts()).unwrap();
            assert!((r.e.re - e).abs() < 1e-8 && r.e.im == 0.0);
            assert!(r.simple);
        }
    }

    #[test]
    fn empty_window_below_cubic_ground_state() {
        let spec = ProblemSpec::pure(3).unwrap();
        assert!(scan_real(&spec, -5.0, 0.0, 100, &opts()).unwrap().is_empty());
    }

    #[test]
    fn near_miss_pair_is_split() {
        // Close to coalescence the two lowest levels sit inside one grid cell.
        let spec = ProblemSpec::new(3, vec![0.0, 2.61]).unwrap();
        let scan = scan_real_detailed(&spec, 0.0, 5.0, 10, &opts()).unwrap();
        let low: Vec<&Bracket> = scan.brackets.iter().filter(|b| b.hi < 2.0).collect();
        assert_eq!(low.len(), 2, "{:?}", scan.brackets);
        assert!(low[1].lo - low[0].hi < 0.5);
    }

    #[test]
    fn counting_harmonic() {
        let spec = ProblemSpec::pure(2).unwrap();
        let c = count_zeros(&spec, Rect::new(0.0, 10.0, -1.0, 1.0).unwrap(), &opts()).unwrap();
        assert_eq!(c.count, 5);
        assert!((c.raw - 5.0).norm() < 1e-4);
    }

    #[test]
    fn boundary_zero_triggers_inflation() {
        let spec = ProblemSpec::pure(2).unwrap();
        let c = count_zeros(&spec, Rect::new(1.0, 4.0, -1.0, 1.0).unwrap(), &opts()).unwrap();
        assert!(c.inflations >= 1);
        assert_eq!(c.count, 2);
    }

    #[test]
    fn complex_newton() {
        let spec = ProblemSpec::pure(2).unwrap();
        let r = newton_complex(&spec, Complex64::new(1.2, 0.3), &opts()).unwrap();
        assert!((r.e - 1.0).norm() < 1e-8);
        let spec = ProblemSpec::pure(3).unwrap();
        let r = newton_complex(&spec, Complex64::new(4.0, 0.0), &opts()).unwrap();
        assert!((r.e.re - 4.109229).abs() < 1e-5);
        let a = newton_complex(&spec, Complex64::new(4.0, 0.5), &opts()).unwrap().e;
        let b = newton_complex(&spec, Complex64::new(4.0, -0.5), &opts()).unwrap().e;
        assert!((a - b.conj()).norm() < 1e-8);
    }

    #[test]
    fn asymptotic_constant_values() {
        assert!(matches!(asymptotic_constant(2), Err(Error::UnsupportedDegree(2))));
        for (m, k) in [(3, 1.6826185263898), (4, 1.2360497848676), (5, 1.1069259126767), (6, 1.0516365789941)] {
            assert!((asymptotic_constant(m).unwrap() - k).abs() < 1e-10, "m={m}");
        }
        let l = asymptotic_levels(3, 1..=10).unwrap();
        assert!((l[0] - 1.0942695).abs() < 1e-6 && (l[9] - 37.465248).abs() < 1e-5);
        assert!((asymptotic_levels(4, 1..=1).unwrap()[0] - 1.3765074).abs() < 1e-6);
    }

    #[test]
    fn harmonic_pipeline() {
        let spec = ProblemSpec::pure(2).unwrap();
        let r = spectrum_pipeline(&spec, 0.0, 10.0, &opts()).unwrap();
        assert!(r.complete);
        assert_eq!(r.records.len(), 5);
        for (n, rec) in r.records.iter().enumerate() {
            assert_eq!(rec.index, n as i64);
            assert!((rec.e.re - (2 * n + 1) as f64).abs() < 1e-7);
        }
        assert!(r.asymptotic_deviation.is_empty());
    }
}
