//! Acceptance suite: one PASS/FAIL line per criterion, each with the measured
//! value, its tolerance and the wall time against the budget.

use std::time::{Duration, Instant};

use pt_stokes::exceptional::{cubic_spec, default_seed_energy, find_exceptional_point, ExceptionalOptions, DEFAULT_SEED_ALPHA};
use pt_stokes::oracle::{diagonalize, low_levels, DEFAULT_SCALE};
use pt_stokes::potential::ProblemSpec;
use pt_stokes::ptnorm::{contour_square_integral, orthonormal_table, pseudo_norm, PtNormOptions};
use pt_stokes::spectrum::{spectrum_pipeline, EigenRecord, SpectrumOptions, SpectrumResult};
use pt_stokes::stokes::{stokes_multiplier, StokesOptions};
use pt_stokes::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    summary: String,
}

fn outcome(passed: bool, summary: impl Into<String>) -> Outcome {
    Outcome { passed, summary: summary.into() }
}

/// Runs one criterion; returns `(id, passed, report line)`.
fn run(id: usize, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> (usize, bool, String) {
    let start = Instant::now();
    let o = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let passed = o.passed && in_time;
    let line = format!(
        "criterion {id:>2} {} {name}: {}; {:.1} s (budget {} s{})",
        if passed { "PASS" } else { "FAIL" },
        o.summary,
        elapsed.as_secs_f64(),
        budget.as_secs(),
        if in_time { "" } else { ", exceeded" }
    );
    (id, passed, line)
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn pure(m: usize) -> ProblemSpec {
    ProblemSpec::pure(m).unwrap()
}

fn pipeline(spec: &ProblemSpec, emax: f64) -> SpectrumResult {
    spectrum_pipeline(spec, 0.0, emax, &SpectrumOptions::default()).unwrap()
}

fn random_spec(rng: &mut ChaCha8Rng) -> ProblemSpec {
    let m = rng.gen_range(2..=5);
    let coeffs = (1..m).map(|_| rng.gen_range(-2.0..=2.0)).collect();
    ProblemSpec::new(m, coeffs).unwrap()
}

fn harmonic_anchor(found: &mut Vec<(ProblemSpec, EigenRecord)>) -> Outcome {
    let spec = pure(2);
    let r = pipeline(&spec, 10.0);
    let levels: Vec<f64> = r.records.iter().map(|x| x.e.re).collect();
    let worst = r.records.iter().enumerate().map(|(n, x)| (x.e - (2 * n + 1) as f64).norm()).fold(0.0, f64::max);
    found.extend(r.records.iter().map(|x| (spec.clone(), *x)));
    outcome(
        r.complete && levels.len() == 5 && worst <= 1e-7,
        format!("{} levels, complete {}, max |E_n - (2n+1)| = {worst:.2e} (tol 1e-7)", levels.len(), r.complete),
    )
}

fn wronskian() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let opts = StokesOptions::default();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let spec = random_spec(&mut rng);
        let e = Complex64::new(rng.gen_range(-5.0..=30.0), 0.0);
        worst = worst.max(stokes_multiplier(&spec, e, &opts).unwrap().wr_check);
    }
    outcome(worst <= 1e-6, format!("100 samples, max |Wr(Y0,Y1) - 2| = {worst:.2e} (tol 1e-6)"))
}

fn antisymmetry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let opts = StokesOptions::default();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let spec = random_spec(&mut rng);
        let e = Complex64::new(rng.gen_range(-5.0..=30.0), rng.gen_range(-5.0..=5.0));
        let a = stokes_multiplier(&spec, e, &opts).unwrap().c;
        let b = stokes_multiplier(&spec, e.conj(), &opts).unwrap().c;
        worst = worst.max((a.conj() + b).norm() / (1.0 + a.norm()));
    }
    outcome(worst <= 1e-8, format!("50 samples, max |conj C(E) + C(conj E)| / (1 + |C|) = {worst:.2e} (tol 1e-8)"))
}

fn contour_identity(found: &[(ProblemSpec, EigenRecord)]) -> Outcome {
    let opts = PtNormOptions::default();
    let mut worst: f64 = 0.0;
    for (spec, r) in found {
        let ci = contour_square_integral(spec, r.e, &opts).unwrap();
        worst = worst.max(ci.check / (1.0 + ci.c_prime.norm()));
    }
    outcome(
        !found.is_empty() && worst <= 1e-6,
        format!("{} eigenvalues, max |J_L + 2C'| / (1 + |C'|) = {worst:.2e} (tol 1e-6)", found.len()),
    )
}

fn sign_alternation(found: &mut Vec<(ProblemSpec, EigenRecord)>) -> Outcome {
    let opts = PtNormOptions::default();
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (m, emax, count) in [(3, 20.0, 6), (4, 30.0, 5)] {
        let spec = pure(m);
        let r = pipeline(&spec, emax);
        ok &= r.complete && r.records.len() >= count;
        let levels: Vec<EigenRecord> = r.records.iter().take(count).copied().collect();
        found.extend(levels.iter().map(|x| (spec.clone(), *x)));
        let norms: Vec<Complex64> = levels.iter().map(|x| pseudo_norm(&spec, x, &opts).unwrap().direct).collect();
        let global = norms.first().map_or(1.0, |z| z.re.signum());
        for (n, z) in norms.iter().enumerate() {
            let expected = global * if n % 2 == 0 { 1.0 } else { -1.0 };
            worst = worst.max((z - expected).norm());
        }
        let signs: Vec<i32> = norms.iter().map(|z| z.re.signum() as i32).collect();
        parts.push(format!("m={m} signs {signs:?}"));
    }
    ok &= worst <= 1e-6;
    outcome(ok, format!("{}, max |<<phi_n,phi_n>> - s(-1)^n| = {worst:.2e} (tol 1e-6)", parts.join(", ")))
}

fn oracle_agreement() -> Outcome {
    let spec = pure(3);
    let r = pipeline(&spec, 20.0);
    let reference = low_levels(&diagonalize(&spec, 300, DEFAULT_SCALE).unwrap(), 5);
    let worst = if r.records.len() >= 5 {
        r.records.iter().zip(&reference).map(|(a, b)| (a.e - b).norm()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    outcome(worst <= 1e-4, format!("first 5 levels vs 300-state oscillator basis, max deviation {worst:.2e} (tol 1e-4)"))
}

fn asymptotics() -> Outcome {
    let r = pipeline(&pure(3), 40.0);
    let dev = &r.asymptotic_deviation;
    if dev.len() < 10 {
        return outcome(false, format!("only {} levels in [0, 40]", dev.len()));
    }
    // Formula index n approximates level n - 1.
    let window = &dev[3..=9];
    let decreasing = window.windows(2).all(|w| w[1] < w[0]);
    let last = window[6];
    let listed: Vec<String> = window.iter().map(|d| format!("{d:.2e}")).collect();
    outcome(
        decreasing && last < 0.03,
        format!("relative deviations n=4..10: [{}], decreasing {decreasing}, n=10: {last:.2e} (budget 3e-2)", listed.join(", ")),
    )
}

fn exceptional_point() -> Outcome {
    let seed = default_seed_energy(&SpectrumOptions::default()).unwrap();
    let ep = find_exceptional_point(seed, DEFAULT_SEED_ALPHA, &ExceptionalOptions::default()).unwrap();
    let residual = ep.c.norm() + ep.c_prime.norm();
    let da = (ep.alpha + 2.6118094).abs();
    outcome(
        da <= 1e-3 && residual <= 1e-8 && ep.e.im.abs() <= 1e-6,
        format!(
            "alpha* = {:.10}, |alpha* + 2.6118094| = {da:.2e} (tol 1e-3), E* = {:.10}, |C| + |C'| = {residual:.2e} (tol 1e-8), |Im E*| = {:.1e} (tol 1e-6)",
            ep.alpha, ep.e.re, ep.e.im.abs()
        ),
    )
}

fn complex_pair() -> Outcome {
    let spec = cubic_spec(-4.0).unwrap();
    let r = spectrum_pipeline(&spec, 0.0, 10.0, &SpectrumOptions::default()).unwrap();
    let pair: Vec<&EigenRecord> = r.records.iter().filter(|x| !x.is_real()).collect();
    let conjugate = pair.len() == 2 && (pair[0].e - pair[1].e.conj()).norm() <= 1e-8 * (1.0 + pair[0].e.norm());
    if !conjugate {
        return outcome(false, format!("{} non-real levels found", pair.len()));
    }
    let opts = PtNormOptions::default();
    let worst = pair.iter().map(|x| pseudo_norm(&spec, x, &opts).unwrap().direct.norm()).fold(0.0, f64::max);
    outcome(
        worst <= 1e-5,
        format!("pair {:.6} +- {:.6}i, max |<<phi,phi>>| / ||phi||^2 = {worst:.2e} (tol 1e-5)", pair[0].e.re, pair[0].e.im.abs()),
    )
}

fn gram_table() -> Outcome {
    let spec = pure(3);
    let r = pipeline(&spec, 20.0);
    let g = orthonormal_table(&spec, &r, &PtNormOptions::default()).unwrap();
    let n = g.energies.len();
    let alternating = g.diagonal_signs.windows(2).all(|w| w[0] == -w[1]);
    let ok = n == 6 && g.hermitian_defect <= 1e-8 && g.max_off_diagonal <= 1e-5 && g.diagonal_defect <= 1e-6 && alternating;
    outcome(
        ok,
        format!(
            "{n}x{n}, Hermitian defect {:.2e} (tol 1e-8), max off-diagonal {:.2e} (tol 1e-5), diagonal {:?} (max ||d| - 1| = {:.2e})",
            g.hermitian_defect, g.max_off_diagonal, g.diagonal_signs, g.diagonal_defect
        ),
    )
}

fn origin_values() -> Outcome {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = pt_stokes_cli::run_with(["ptstokes", "verify", "--level", "quick"], &mut out, &mut err);
    let doc: serde_json::Value = match serde_json::from_slice(&out) {
        Ok(v) => v,
        Err(e) => return outcome(false, format!("unparsable verify output: {e}")),
    };
    let entries = doc["c_at_zero"].as_array().cloned().unwrap_or_default();
    let ms: Vec<u64> = entries.iter().filter_map(|e| e["m"].as_u64()).collect();
    let positive = entries.iter().all(|e| e["positive"].as_bool() == Some(true) && e["value"].as_f64().is_some_and(|v| v > 0.0));
    let listed: Vec<String> = entries
        .iter()
        .map(|e| format!("m={} {:.10} ({})", e["m"], e["value"].as_f64().unwrap_or(f64::NAN), e["matches"].as_str().unwrap_or("?")))
        .collect();
    outcome(
        code == 0 && ms == [3, 4, 5, 6] && positive,
        format!("verify exit {code}; -iC(0): {}", listed.join("; ")),
    )
}

fn main() {
    let mut found = Vec::new();
    // Criterion 4 checks the eigenvalues found by criteria 1 and 5.
    let mut results = [
        run(1, "harmonic anchor", secs(10), || harmonic_anchor(&mut found)),
        run(2, "Wronskian normalization", secs(60), wronskian),
        run(3, "conjugation antisymmetry", secs(30), antisymmetry),
        run(5, "sign alternation", secs(120), || sign_alternation(&mut found)),
        run(4, "contour identity", secs(60), || contour_identity(&found)),
        run(6, "oracle agreement", secs(120), oracle_agreement),
        run(7, "asymptotic formula", secs(180), asymptotics),
        run(8, "exceptional point", secs(180), exceptional_point),
        run(9, "complex pair", secs(120), complex_pair),
        run(10, "Gram table", secs(180), gram_table),
        run(11, "origin value", secs(60), origin_values),
    ];
    results.sort_by_key(|r| r.0);
    for (_, _, line) in &results {
        println!("{line}");
    }
    let failed = results.iter().filter(|r| !r.1).count();
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
