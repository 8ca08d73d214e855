//! The computational subcommands.

use std::io::Write;

use pt_stokes::exceptional::{
    cubic_spec, default_seed_energy, eigenvalue_flow, find_exceptional_point, ExceptionalOptions, DEFAULT_SEED_ALPHA,
};
use pt_stokes::potential::ProblemSpec;
use pt_stokes::ptnorm::{orthonormal_table, pseudo_norm, PtNormOptions};
use pt_stokes::spectrum::{spectrum_pipeline, EigenRecord, SpectrumOptions};
use pt_stokes::stokes::stokes_batch;
use pt_stokes::Complex64;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{emit, Cell, Report, F17};
use crate::{CliError, ExceptionalArgs, EXIT_OK, EXIT_VERIFY};

pub fn problem_spec(cfg: &RunConfig) -> Result<ProblemSpec, CliError> {
    let m = cfg.m.ok_or_else(|| CliError::Usage("--m is required".into()))?;
    if m < 2 {
        return Err(CliError::Usage(format!("--m must be at least 2, got {m}")));
    }
    let coeffs = cfg.coeffs.clone().unwrap_or_else(|| vec![0.0; m - 1]);
    Ok(ProblemSpec::new(m, coeffs)?)
}

pub fn window(cfg: &RunConfig) -> Result<(f64, f64), CliError> {
    let emin = cfg.emin.unwrap_or(0.0);
    let emax = cfg.emax.ok_or_else(|| CliError::Usage("--emax is required".into()))?;
    if !(emin.is_finite() && emax.is_finite() && emin < emax) {
        return Err(CliError::Usage(format!("invalid window [{emin}, {emax}]")));
    }
    Ok((emin, emax))
}

fn positive(name: &str, v: Option<f64>) -> Result<Option<f64>, CliError> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(CliError::Usage(format!("--{name} must be positive, got {x}"))),
        _ => Ok(v),
    }
}

pub fn spectrum_options(cfg: &RunConfig) -> Result<SpectrumOptions, CliError> {
    let mut opts = SpectrumOptions::default();
    if let Some(t) = positive("tol", cfg.tol)? {
        opts.root_tol = t;
    }
    if let Some(t) = positive("rel-tol", cfg.rel_tol)? {
        opts.stokes.ray.integrator.rel_tol = t;
    }
    opts.stokes.ray.radius = positive("radius", cfg.radius)?;
    Ok(opts)
}

fn floats(v: &[f64]) -> Vec<F17> {
    v.iter().map(|&x| F17(x)).collect()
}

fn finish(report: &Report, cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    emit(&report.render(cfg.format.unwrap_or_default()), cfg.out.as_deref(), out)
}

#[derive(Serialize)]
struct SpectrumRow {
    /// Zero-based level index; absent for non-real levels.
    n: Option<i64>,
    re: F17,
    im: F17,
    residual: F17,
    cprime_re: F17,
    cprime_im: F17,
    simple: bool,
}

impl SpectrumRow {
    fn new(r: &EigenRecord) -> Self {
        Self {
            n: (r.index >= 0).then_some(r.index),
            re: F17(r.e.re),
            im: F17(r.e.im),
            residual: F17(r.residual),
            cprime_re: F17(r.c_prime.re),
            cprime_im: F17(r.c_prime.im),
            simple: r.simple,
        }
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            self.n.map_or(Cell::Text(String::new()), Cell::Int),
            Cell::Float(self.re.0),
            Cell::Float(self.im.0),
            Cell::Float(self.residual.0),
            Cell::Float(self.cprime_re.0),
            Cell::Float(self.cprime_im.0),
            Cell::Bool(self.simple),
        ]
    }
}

pub const SPECTRUM_HEADER: [&str; 7] = ["n", "re", "im", "residual", "cprime_re", "cprime_im", "simple"];

#[derive(Serialize)]
struct SpectrumDoc {
    command: &'static str,
    m: usize,
    coeffs: Vec<F17>,
    emin: F17,
    emax: F17,
    complete: bool,
    window_count: i64,
    records: Vec<SpectrumRow>,
}

pub fn spectrum(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let spec = problem_spec(cfg)?;
    let (emin, emax) = window(cfg)?;
    let opts = spectrum_options(cfg)?;
    let result = spectrum_pipeline(&spec, emin, emax, &opts)?;
    let records: Vec<SpectrumRow> = result.records.iter().map(SpectrumRow::new).collect();
    let rows = records.iter().map(SpectrumRow::cells).collect();
    let doc = SpectrumDoc {
        command: "spectrum",
        m: spec.degree(),
        coeffs: floats(spec.coeffs()),
        emin: F17(emin),
        emax: F17(emax),
        complete: result.complete,
        window_count: result.window_count,
        records,
    };
    finish(&Report::new(&doc, SPECTRUM_HEADER.to_vec(), rows)?, cfg, out)?;
    if result.complete {
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(err, "ptstokes: spectrum incomplete: {} zeros counted, {} found", result.window_count, result.records.len());
        Ok(EXIT_VERIFY)
    }
}

#[derive(Serialize)]
struct ScanRow {
    e: F17,
    c_re: F17,
    c_im: F17,
    cprime_re: F17,
    cprime_im: F17,
}

#[derive(Serialize)]
struct ScanDoc {
    command: &'static str,
    m: usize,
    coeffs: Vec<F17>,
    rows: Vec<ScanRow>,
}

pub const SCAN_HEADER: [&str; 5] = ["e", "c_re", "c_im", "cprime_re", "cprime_im"];

pub fn stokes_scan(cfg: &RunConfig, n: usize, out: &mut dyn Write, _err: &mut dyn Write) -> Result<i32, CliError> {
    let spec = problem_spec(cfg)?;
    let (emin, emax) = window(cfg)?;
    if n < 2 {
        return Err(CliError::Usage(format!("--n must be at least 2, got {n}")));
    }
    let opts = spectrum_options(cfg)?;
    let energies: Vec<Complex64> =
        (0..n).map(|i| Complex64::new(emin + (emax - emin) * i as f64 / (n - 1) as f64, 0.0)).collect();
    let mut rows = Vec::with_capacity(n);
    for v in stokes_batch(&spec, &energies, &opts.stokes) {
        let v = v?;
        rows.push(ScanRow { e: F17(v.e.re), c_re: F17(v.c.re), c_im: F17(v.c.im), cprime_re: F17(v.c_prime.re), cprime_im: F17(v.c_prime.im) });
    }
    let cells = rows.iter().map(|r| [r.e, r.c_re, r.c_im, r.cprime_re, r.cprime_im].iter().map(|x| Cell::Float(x.0)).collect()).collect();
    let doc = ScanDoc { command: "stokes-scan", m: spec.degree(), coeffs: floats(spec.coeffs()), rows };
    finish(&Report::new(&doc, SCAN_HEADER.to_vec(), cells)?, cfg, out)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct NormRow {
    n: Option<i64>,
    re: F17,
    im: F17,
    /// `+-1` for real simple levels, 0 otherwise.
    sign: i32,
    kn: F17,
    direct_re: F17,
    direct_im: F17,
    jl_re: F17,
    jl_im: F17,
    cprime_re: F17,
    cprime_im: F17,
    /// `|J_L + 2C'|`.
    check: F17,
}

#[derive(Serialize)]
struct GramDoc {
    diagonal_signs: Vec<i32>,
    max_off_diagonal: F17,
    hermitian_defect: F17,
    diagonal_defect: F17,
    /// Rows of `[re, im]` pairs.
    table: Vec<Vec<[F17; 2]>>,
}

#[derive(Serialize)]
struct NormDoc {
    command: &'static str,
    m: usize,
    coeffs: Vec<F17>,
    complete: bool,
    alternating: bool,
    records: Vec<NormRow>,
    gram: Option<GramDoc>,
}

pub const NORM_HEADER: [&str; 12] =
    ["n", "re", "im", "sign", "kn", "direct_re", "direct_im", "jl_re", "jl_im", "cprime_re", "cprime_im", "check"];

/// True when consecutive signs of real levels differ.
pub fn alternating(signs: &[i32]) -> bool {
    signs.iter().all(|&s| s != 0) && signs.windows(2).all(|w| w[0] == -w[1])
}

pub fn pseudo_norms(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let spec = problem_spec(cfg)?;
    let (emin, emax) = window(cfg)?;
    let sopts = spectrum_options(cfg)?;
    let popts = PtNormOptions { stokes: sopts.stokes, ..Default::default() };
    let result = spectrum_pipeline(&spec, emin, emax, &sopts)?;
    let mut records = Vec::with_capacity(result.records.len());
    for r in &result.records {
        let p = pseudo_norm(&spec, r, &popts)?;
        records.push(NormRow {
            n: (r.index >= 0).then_some(r.index),
            re: F17(p.e.re),
            im: F17(p.e.im),
            sign: p.sign,
            kn: F17(p.kn),
            direct_re: F17(p.direct.re),
            direct_im: F17(p.direct.im),
            jl_re: F17(p.jl.re),
            jl_im: F17(p.jl.im),
            cprime_re: F17(p.c_prime.re),
            cprime_im: F17(p.c_prime.im),
            check: F17(p.c_prime_check),
        });
    }
    let degenerate = records.iter().any(|r| r.sign == 0);
    let signs: Vec<i32> = records.iter().map(|r| r.sign).collect();
    let gram = if result.complete && !degenerate && !records.is_empty() {
        let g = orthonormal_table(&spec, &result, &popts)?;
        Some(GramDoc {
            diagonal_signs: g.diagonal_signs.clone(),
            max_off_diagonal: F17(g.max_off_diagonal),
            hermitian_defect: F17(g.hermitian_defect),
            diagonal_defect: F17(g.diagonal_defect),
            table: g.table.iter().map(|row| row.iter().map(|z| [F17(z.re), F17(z.im)]).collect()).collect(),
        })
    } else {
        None
    };
    let cells = records
        .iter()
        .map(|r| {
            let mut c = vec![r.n.map_or(Cell::Text(String::new()), Cell::Int), Cell::Float(r.re.0), Cell::Float(r.im.0), Cell::Int(r.sign as i64)];
            c.extend([r.kn, r.direct_re, r.direct_im, r.jl_re, r.jl_im, r.cprime_re, r.cprime_im, r.check].iter().map(|x| Cell::Float(x.0)));
            c
        })
        .collect();
    let doc = NormDoc {
        command: "pseudo-norms",
        m: spec.degree(),
        coeffs: floats(spec.coeffs()),
        complete: result.complete,
        alternating: alternating(&signs),
        records,
        gram,
    };
    if let Some(g) = &doc.gram {
        let _ = writeln!(err, "gram: signs {:?}, max off-diagonal {:.3e}", g.diagonal_signs, g.max_off_diagonal.0);
    }
    finish(&Report::new(&doc, NORM_HEADER.to_vec(), cells)?, cfg, out)?;
    if !result.complete {
        let _ = writeln!(err, "ptstokes: spectrum incomplete");
        return Ok(EXIT_VERIFY);
    }
    if degenerate {
        let _ = writeln!(err, "ptstokes: spectrum has non-real or non-simple levels (sign 0)");
        return Ok(EXIT_VERIFY);
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ExceptionalDoc {
    command: &'static str,
    e_re: F17,
    e_im: F17,
    alpha: F17,
    c_abs: F17,
    cprime_abs: F17,
    c_second_abs: F17,
    iterations: usize,
}

#[derive(Serialize)]
struct FlowRow {
    alpha: F17,
    level: usize,
    re: F17,
    im: F17,
}

#[derive(Serialize)]
struct FlowDoc {
    command: &'static str,
    rows: Vec<FlowRow>,
}

pub const EXCEPTIONAL_HEADER: [&str; 7] = ["e_re", "e_im", "alpha", "c_abs", "cprime_abs", "c_second_abs", "iterations"];
pub const FLOW_HEADER: [&str; 4] = ["alpha", "level", "re", "im"];

/// Works on the cubic family `V = i q^3 + i alpha q`; `--m`, if given, must be 3.
pub fn exceptional(cfg: &RunConfig, args: &ExceptionalArgs, out: &mut dyn Write, _err: &mut dyn Write) -> Result<i32, CliError> {
    if cfg.m.is_some_and(|m| m != 3) || cfg.coeffs.is_some() {
        return Err(CliError::Usage("exceptional works on the cubic family; --m/--coeffs do not apply".into()));
    }
    let mut sopts = spectrum_options(&RunConfig { tol: None, ..cfg.clone() })?;
    if args.flow {
        if args.flow_steps < 2 {
            return Err(CliError::Usage("--flow-steps must be at least 2".into()));
        }
        if let Some(t) = positive("tol", cfg.tol)? {
            sopts.root_tol = t;
        }
        let flow = eigenvalue_flow(&cubic_spec, args.flow_from, args.flow_to, args.flow_steps, (0.0, args.flow_emax), &sopts)?;
        let rows: Vec<FlowRow> = flow
            .iter()
            .flat_map(|p| p.records.iter().enumerate().map(|(level, r)| FlowRow { alpha: F17(p.alpha), level, re: F17(r.e.re), im: F17(r.e.im) }))
            .collect();
        let cells = rows.iter().map(|r| vec![Cell::Float(r.alpha.0), Cell::Int(r.level as i64), Cell::Float(r.re.0), Cell::Float(r.im.0)]).collect();
        finish(&Report::new(&FlowDoc { command: "exceptional-flow", rows }, FLOW_HEADER.to_vec(), cells)?, cfg, out)?;
        return Ok(EXIT_OK);
    }
    let mut eopts = ExceptionalOptions { stokes: sopts.stokes, ..Default::default() };
    if let Some(t) = positive("tol", cfg.tol)? {
        eopts.tol = t;
    }
    let seed_alpha = args.seed_alpha.unwrap_or(DEFAULT_SEED_ALPHA);
    let seed_e = match args.seed_e {
        Some(e) => e,
        None => default_seed_energy(&sopts)?,
    };
    let ep = find_exceptional_point(seed_e, seed_alpha, &eopts)?;
    let doc = ExceptionalDoc {
        command: "exceptional",
        e_re: F17(ep.e.re),
        e_im: F17(ep.e.im),
        alpha: F17(ep.alpha),
        c_abs: F17(ep.c.norm()),
        cprime_abs: F17(ep.c_prime.norm()),
        c_second_abs: F17(ep.c_second.norm()),
        iterations: ep.iterations,
    };
    let mut cells: Vec<Cell> = [doc.e_re, doc.e_im, doc.alpha, doc.c_abs, doc.cprime_abs, doc.c_second_abs].iter().map(|x| Cell::Float(x.0)).collect();
    cells.push(Cell::Int(ep.iterations as i64));
    finish(&Report::new(&doc, EXCEPTIONAL_HEADER.to_vec(), vec![cells])?, cfg, out)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_patterns() {
        assert!(alternating(&[1, -1, 1]));
        assert!(alternating(&[-1, 1]));
        assert!(!alternating(&[1, 1, -1]));
        assert!(!alternating(&[1, 0, 1]));
    }

    #[test]
    fn missing_degree_is_usage() {
        let r = problem_spec(&RunConfig::default());
        assert!(matches!(r, Err(CliError::Usage(_))));
        let r = problem_spec(&RunConfig { m: Some(3), coeffs: Some(vec![1.0]), ..Default::default() });
        assert!(matches!(r, Err(CliError::Usage(_))));
    }

    #[test]
    fn option_overrides() {
        let cfg = RunConfig { tol: Some(1e-6), rel_tol: Some(1e-10), radius: Some(9.0), ..Default::default() };
        let o = spectrum_options(&cfg).unwrap();
        assert_eq!(o.root_tol, 1e-6);
        assert_eq!(o.stokes.ray.integrator.rel_tol, 1e-10);
        assert_eq!(o.stokes.ray.radius, Some(9.0));
        assert!(spectrum_options(&RunConfig { tol: Some(-1.0), ..Default::default() }).is_err());
    }
}
