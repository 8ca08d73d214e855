//! Gauss–Kronrod (7, 15) quadrature of complex-valued integrands over real
//! parameter intervals. Panel nodes are evaluated as a parallel map.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the odd-indexed Kronrod abscissae `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// The 15 Kronrod abscissae of `[a, b]`, in increasing order.
pub fn kronrod_nodes(a: f64, b: f64) -> [f64; 15] {
    let (c, h) = ((a + b) / 2.0, (b - a) / 2.0);
    let mut out = [0.0; 15];
    for i in 0..7 {
        out[i] = c - h * XGK[i];
        out[14 - i] = c + h * XGK[i];
    }
    out[7] = c;
    out
}

/// Kronrod weights matching [`kronrod_nodes`] for `[a, b]`.
pub fn kronrod_weights(a: f64, b: f64) -> [f64; 15] {
    let h = (b - a) / 2.0;
    let mut out = [0.0; 15];
    for i in 0..7 {
        out[i] = h * WGK[i];
        out[14 - i] = h * WGK[i];
    }
    out[7] = h * WGK[7];
    out
}

/// Kronrod estimate and `|K - G|` from the 15 values at [`kronrod_nodes`].
pub fn kronrod_rule(a: f64, b: f64, f: &[Complex64; 15]) -> (Complex64, f64) {
    let h = (b - a) / 2.0;
    let mut k = f[7] * WGK[7];
    let mut g = f[7] * WG[3];
    for i in 0..7 {
        let pair = f[i] + f[14 - i];
        k += pair * WGK[i];
        if i % 2 == 1 {
            g += pair * WG[i / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-10, max_panels: 2000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

fn panel<F>(f: &F, a: f64, b: f64) -> Result<(Complex64, f64)>
where
    F: Fn(f64) -> Result<Complex64> + Sync,
{
    let nodes = kronrod_nodes(a, b);
    let vals: Vec<Complex64> = nodes.par_iter().map(|&t| f(t)).collect::<Result<_>>()?;
    let mut arr = [Complex64::new(0.0, 0.0); 15];
    arr.copy_from_slice(&vals);
    Ok(kronrod_rule(a, b, &arr))
}

/// Globally adaptive integration of `f` over `[a, b]` starting from `initial`
/// equal panels; the panel with the largest error estimate is bisected until
/// the total error meets `max(abs_tol, rel_tol |I|)`.
pub fn integrate<F>(f: &F, a: f64, b: f64, initial: usize, opts: &QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> Result<Complex64> + Sync,
{
    if !(a.is_finite() && b.is_finite()) || initial == 0 {
        return Err(Error::InvalidArgument("quadrature needs a finite interval and at least one panel".into()));
    }
    let mut panels: Vec<(f64, f64, Complex64, f64)> = (0..initial)
        .into_par_iter()
        .map(|i| {
            let lo = a + (b - a) * i as f64 / initial as f64;
            let hi = a + (b - a) * (i + 1) as f64 / initial as f64;
            panel(f, lo, hi).map(|(v, e)| (lo, hi, v, e))
        })
        .collect::<Result<_>>()?;
    loop {
        let value: Complex64 = panels.iter().map(|p| p.2).sum();
        let error: f64 = panels.iter().map(|p| p.3).sum();
        if error <= opts.abs_tol.max(opts.rel_tol * value.norm()) {
            return Ok(QuadResult { value, error, panels: panels.len() });
        }
        if panels.len() >= opts.max_panels {
            return Err(Error::ConvergenceFailure(format!(
                "quadrature error {error:e} after {} panels",
                panels.len()
            )));
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, _, _) = panels[worst];
        let mid = (lo + hi) / 2.0;
        let (left, right) = rayon::join(|| panel(f, lo, mid), || panel(f, mid, hi));
        let (l, r) = (left?, right?);
        panels[worst] = (lo, mid, l.0, l.1);
        panels.push((mid, hi, r.0, r.1));
    }
}
