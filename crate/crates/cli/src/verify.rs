//! The invariant suite behind `ptstokes verify`.

use std::io::Write;

use pt_stokes::oracle::{diagonalize, low_levels, DEFAULT_SCALE};
use pt_stokes::potential::ProblemSpec;
use pt_stokes::ptnorm::{pseudo_norm, PtNormOptions};
use pt_stokes::spectrum::{spectrum_pipeline, SpectrumOptions, SpectrumResult};
use pt_stokes::stokes::{c_at_zero_full_angle, c_at_zero_half_angle, stokes_multiplier, StokesOptions};
use pt_stokes::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{emit, Cell, Report, F17};
use crate::{CliError, Level, VerifyArgs, EXIT_OK, EXIT_VERIFY};

const SEED: u64 = 0x5354_4f4b_4553;

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub passed: bool,
    /// Worst observed defect, or the checked value for positivity rows.
    pub value: F17,
    pub tolerance: F17,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct OriginValue {
    pub m: usize,
    /// `-i C(0)` for the pure potential.
    pub value: F17,
    pub half_angle: F17,
    pub full_angle: F17,
    /// Which closed form matches to `1e-8`, if any.
    pub matches: &'static str,
    pub positive: bool,
}

#[derive(Debug, Clone, Serialize)]
struct VerifyDoc {
    command: &'static str,
    level: &'static str,
    passed: bool,
    checks: Vec<CheckRow>,
    c_at_zero: Vec<OriginValue>,
}

fn check(name: impl Into<String>, value: f64, tolerance: f64, detail: impl Into<String>) -> CheckRow {
    CheckRow { name: name.into(), passed: value <= tolerance, value: F17(value), tolerance: F17(tolerance), detail: detail.into() }
}

fn random_spec(rng: &mut ChaCha8Rng) -> ProblemSpec {
    let m = rng.gen_range(2..=5);
    let coeffs = (1..m).map(|_| rng.gen_range(-2.0..=2.0)).collect();
    ProblemSpec::new(m, coeffs).expect("degree and coefficients are in range")
}

/// `|Wr(Y_0, Y_1) - 2|` over random real problems and energies.
fn wronskian(samples: usize, scale: f64, opts: &StokesOptions) -> Result<CheckRow, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let spec = random_spec(&mut rng);
        let e = Complex64::new(rng.gen_range(-5.0..=30.0), 0.0);
        worst = worst.max(stokes_multiplier(&spec, e, opts)?.wr_check);
    }
    Ok(check("wronskian", worst, 1e-6 * scale, format!("{samples} samples, m in 2..=5, E in [-5, 30]")))
}

/// `|conj C(E) + C(conj E)| / (1 + |C(E)|)` over random real problems.
fn antisymmetry(samples: usize, scale: f64, opts: &StokesOptions) -> Result<CheckRow, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 1);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let spec = random_spec(&mut rng);
        let e = Complex64::new(rng.gen_range(-5.0..=30.0), rng.gen_range(-5.0..=5.0));
        let a = stokes_multiplier(&spec, e, opts)?.c;
        let b = stokes_multiplier(&spec, e.conj(), opts)?.c;
        worst = worst.max((a.conj() + b).norm() / (1.0 + a.norm()));
    }
    Ok(check("conjugation_antisymmetry", worst, 1e-8 * scale, format!("{samples} samples, |Im E| <= 5")))
}

struct Case {
    spec: ProblemSpec,
    window: (f64, f64),
    result: SpectrumResult,
}

fn case(m: usize, emax: f64, opts: &SpectrumOptions) -> Result<Case, CliError> {
    let spec = ProblemSpec::pure(m)?;
    let result = spectrum_pipeline(&spec, 0.0, emax, opts)?;
    Ok(Case { spec, window: (0.0, emax), result })
}

fn harmonic(c: &Case, scale: f64) -> CheckRow {
    let levels: Vec<f64> = c.result.records.iter().map(|r| r.e.re).collect();
    let worst = if c.result.complete && levels.len() == 5 {
        levels.iter().enumerate().map(|(n, e)| (e - (2 * n + 1) as f64).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    check("harmonic_anchor", worst, 1e-7 * scale, format!("m=2 on [0, 10]: {} levels", levels.len()))
}

/// Contour-integral identity and sign alternation on every level of `c`.
fn norms(c: &Case, scale: f64, opts: &PtNormOptions) -> Result<[CheckRow; 2], CliError> {
    let m = c.spec.degree();
    let mut worst: f64 = 0.0;
    let mut signs = Vec::new();
    for r in &c.result.records {
        let p = pseudo_norm(&c.spec, r, opts)?;
        worst = worst.max(p.c_prime_check / (1.0 + p.c_prime.norm()));
        signs.push(p.sign);
    }
    if !c.result.complete || signs.is_empty() {
        worst = f64::INFINITY;
    }
    let flips = signs.windows(2).filter(|w| w[0] != -w[1]).count() + signs.iter().filter(|&&s| s == 0).count();
    let bad = if c.result.complete && !signs.is_empty() { flips as f64 } else { f64::INFINITY };
    let window = format!("m={m} on [{}, {}]", c.window.0, c.window.1);
    Ok([
        check(format!("contour_identity_m{m}"), worst, 1e-6 * scale, format!("{window}: {} levels", signs.len())),
        check(format!("sign_alternation_m{m}"), bad, 0.0, format!("{window}: signs {signs:?}")),
    ])
}

fn oracle(c: &Case, scale: f64) -> Result<CheckRow, CliError> {
    let reference = low_levels(&diagonalize(&c.spec, 200, DEFAULT_SCALE)?, 5);
    let found: Vec<Complex64> = c.result.records.iter().map(|r| r.e).collect();
    let worst = if found.len() >= 5 {
        found.iter().zip(&reference).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    Ok(check("oracle_agreement_m3", worst, 1e-4 * scale, "first 5 levels vs 200-state oscillator basis"))
}

pub fn origin_value(m: usize, opts: &StokesOptions) -> Result<OriginValue, CliError> {
    let c = stokes_multiplier(&ProblemSpec::pure(m)?, Complex64::new(0.0, 0.0), opts)?.c;
    let value = (Complex64::new(0.0, -1.0) * c).re;
    let (half, full) = (c_at_zero_half_angle(m), c_at_zero_full_angle(m));
    let close = |x: f64| (value - x).abs() <= 1e-8 * (1.0 + x.abs());
    let matches = match (close(half), close(full)) {
        (true, true) => "both",
        (true, false) => "2 sin(pi m / (2 (m + 2)))",
        (false, true) => "2 sin(m pi / (m + 2))",
        (false, false) => "neither",
    };
    Ok(OriginValue { m, value: F17(value), half_angle: F17(half), full_angle: F17(full), matches, positive: value > 0.0 })
}

/// Runs the suite; quick covers m in {2, 3}, full adds m in {4, 5} and more samples.
pub fn suite(level: Level, scale: f64) -> Result<(Vec<CheckRow>, Vec<OriginValue>), CliError> {
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(CliError::Usage(format!("invalid tolerance scale {scale}")));
    }
    let sopts = SpectrumOptions::default();
    let popts = PtNormOptions::default();
    let samples = match level {
        Level::Quick => (20, 10),
        Level::Full => (100, 50),
    };
    let mut rows = vec![wronskian(samples.0, scale, &sopts.stokes)?, antisymmetry(samples.1, scale, &sopts.stokes)?];
    let mut cases = vec![(2, 10.0), (3, 20.0)];
    if level == Level::Full {
        cases.extend([(4, 30.0), (5, 30.0)]);
    }
    for (m, emax) in cases {
        let c = case(m, emax, &sopts)?;
        if m == 2 {
            rows.push(harmonic(&c, scale));
        }
        if m == 3 {
            rows.push(oracle(&c, scale)?);
        }
        rows.extend(norms(&c, scale, &popts)?);
    }
    let mut origin = Vec::new();
    for m in 3..=6 {
        let o = origin_value(m, &sopts.stokes)?;
        rows.push(CheckRow {
            name: format!("origin_value_positive_m{m}"),
            passed: o.positive,
            value: o.value,
            tolerance: F17(0.0),
            detail: format!("-iC(0) matches {}", o.matches),
        });
        origin.push(o);
    }
    Ok((rows, origin))
}

pub const VERIFY_HEADER: [&str; 5] = ["check", "passed", "value", "tolerance", "detail"];

pub fn run(cfg: &RunConfig, args: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let (checks, origin) = suite(args.level, args.tolerance_scale)?;
    let passed = checks.iter().all(|c| c.passed);
    for c in &checks {
        let _ = writeln!(err, "{:<4} {:<28} {:>12.3e} (tol {:.1e})  {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value.0, c.tolerance.0, c.detail);
    }
    let rows = checks
        .iter()
        .map(|c| vec![Cell::Text(c.name.clone()), Cell::Bool(c.passed), Cell::Float(c.value.0), Cell::Float(c.tolerance.0), Cell::Text(c.detail.clone())])
        .collect();
    let level = match args.level {
        Level::Quick => "quick",
        Level::Full => "full",
    };
    let doc = VerifyDoc { command: "verify", level, passed, checks, c_at_zero: origin };
    emit(&Report::new(&doc, VERIFY_HEADER.to_vec(), rows)?.render(cfg.format.unwrap_or_default()), cfg.out.as_deref(), out)?;
    Ok(if passed { EXIT_OK } else { EXIT_VERIFY })
}
