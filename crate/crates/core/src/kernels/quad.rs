//! Globally adaptive 21-point Gauss–Kronrod quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate meets `max(abs_tol, rel_tol * |I|)`. Error estimates follow the
//! QUADPACK `qk21` heuristics.

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_932_363_732,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// 10-point Gauss weights for the odd-indexed Kronrod nodes
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of bisection levels below the initial interval.
    pub max_depth: u32,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-11,
            rel_tol: 1e-11,
            max_depth: 60,
            max_intervals: 2000,
        }
    }
}

impl QuadOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

fn gauss_kronrod_21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut resabs = kronrod.abs();
    let mut gauss = 0.0;
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (value, err)
}

/// Integrates `f` over `[a, b]` to the requested tolerances.
///
/// On failure the error carries the best available estimate.
pub fn adaptive_quad<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    opts: QuadOptions,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let (value, error) = gauss_kronrod_21(&f, a, b);
    let mut evaluations = 21;
    if !value.is_finite() {
        return Err(Error::Quadrature {
            estimate: value,
            error,
        });
    }
    let mut panels = vec![Panel {
        a,
        b,
        value,
        error,
        depth: 0,
    }];
    let mut total = value;
    let mut total_err = error;
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= target {
            return Ok(QuadResult {
                value: total,
                error: total_err,
                evaluations,
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one panel");
        let p = panels[worst];
        if p.depth >= opts.max_depth || panels.len() >= opts.max_intervals {
            return Err(Error::Quadrature {
                estimate: total,
                error: total_err,
            });
        }
        let mid = 0.5 * (p.a + p.b);
        let (v1, e1) = gauss_kronrod_21(&f, p.a, mid);
        let (v2, e2) = gauss_kronrod_21(&f, mid, p.b);
        evaluations += 42;
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(Error::Quadrature {
                estimate: total,
                error: total_err,
            });
        }
        total += v1 + v2 - p.value;
        total_err += e1 + e2 - p.error;
        panels[worst] = Panel {
            a: p.a,
            b: mid,
            value: v1,
            error: e1,
            depth: p.depth + 1,
        };
        panels.push(Panel {
            a: mid,
            b: p.b,
            value: v2,
            error: e2,
            depth: p.depth + 1,
        });
        // re-sum occasionally so the running totals do not drift
        if panels.len() % 64 == 0 {
            total = panels.iter().map(|p| p.value).sum();
            total_err = panels.iter().map(|p| p.error).sum();
        }
    }
}

/// Convenience wrapper: absolute and relative tolerance both set to `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    adaptive_quad(f, a, b, QuadOptions::with_tol(tol)).map(|r| r.value)
}
