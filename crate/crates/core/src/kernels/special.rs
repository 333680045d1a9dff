//! Scalar special functions used by the characteristic maps.

use crate::error::{Error, Result};

/// Error function, accurate to a few ulp over the whole real line.
#[inline]
pub fn erf(u: f64) -> f64 {
    libm::erf(u)
}

/// Complementary error function `1 - erf(u)` without cancellation for large `u`.
#[inline]
pub fn erfc(u: f64) -> f64 {
    libm::erfc(u)
}

/// Standard normal cumulative distribution function.
#[inline]
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Inverse error function on `(-1, 1)`.
///
/// Seeded with Giles' single-precision approximation and polished with
/// Newton steps on [`erf`] until the update stalls.
pub fn erfinv(v: f64) -> Result<f64> {
    if !(v.abs() < 1.0) {
        return Err(Error::NumericDomain { what: "erfinv", arg: v });
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    let mut x = giles_seed(v);
    let two_over_sqrt_pi = std::f64::consts::FRAC_2_SQRT_PI;
    for _ in 0..8 {
        // near |v| -> 1 the residual is better resolved through erfc
        let resid = if v > 0.5 {
            (1.0 - v) - erfc(x)
        } else if v < -0.5 {
            erfc(-x) - (1.0 + v)
        } else {
            erf(x) - v
        };
        let slope = two_over_sqrt_pi * (-x * x).exp();
        if slope == 0.0 {
            break;
        }
        // Halley correction; erf'' = -2x erf'
        let newton = resid / slope;
        let step = newton / (1.0 + x * newton);
        x -= step;
        if step.abs() <= 2.0 * f64::EPSILON * x.abs() {
            break;
        }
    }
    Ok(x)
}

fn giles_seed(v: f64) -> f64 {
    let w = -((1.0 - v) * (1.0 + v)).ln();
    let p = if w < 5.0 {
        let w = w - 2.5;
        let mut p = 2.810_226_36e-08;
        p = 3.432_739_39e-07 + p * w;
        p = -3.523_387_7e-06 + p * w;
        p = -4.391_506_54e-06 + p * w;
        p = 0.000_218_580_87 + p * w;
        p = -0.001_253_725_03 + p * w;
        p = -0.004_177_681_64 + p * w;
        p = 0.246_640_727 + p * w;
        1.501_409_41 + p * w
    } else {
        let w = w.sqrt() - 3.0;
        let mut p = -0.000_200_214_257;
        p = 0.000_100_950_558 + p * w;
        p = 0.001_349_343_22 + p * w;
        p = -0.003_673_428_44 + p * w;
        p = 0.005_739_507_73 + p * w;
        p = -0.007_622_461_3 + p * w;
        p = 0.009_438_870_47 + p * w;
        p = 1.001_674_06 + p * w;
        2.832_976_82 + p * w
    };
    p * v
}

/// `arccosh(u) = ln(u + sqrt(u^2 - 1))`, evaluated as `ln1p` of the offset
/// from one so that arguments just above 1 keep full relative accuracy.
pub fn arccosh(u: f64) -> Result<f64> {
    if !(u >= 1.0) {
        return Err(Error::NumericDomain { what: "arccosh", arg: u });
    }
    Ok(arccosh1p(u - 1.0))
}

/// `arccosh(1 + d)` for `d >= 0`.
#[inline]
pub fn arccosh1p(d: f64) -> f64 {
    (d + (d * (d + 2.0)).sqrt()).ln_1p()
}

/// `arccos` with a clamping band of `1e-12` around `[-1, 1]`.
pub fn arccos_clamped(u: f64) -> Result<f64> {
    const BAND: f64 = 1e-12;
    if !(-1.0 - BAND..=1.0 + BAND).contains(&u) {
        return Err(Error::NumericDomain { what: "arccos", arg: u });
    }
    Ok(u.clamp(-1.0, 1.0).acos())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erf_reference_values() {
        assert_eq!(erf(0.0), 0.0);
        // erf(1), erf(0.5), erf(2) from 30-digit tables
        assert!((erf(1.0) - 0.842_700_792_949_714_9).abs() < 1e-15);
        assert!((erf(0.5) - 0.520_499_877_813_046_5).abs() < 1e-15);
        assert!((erf(2.0) - 0.995_322_265_018_952_7).abs() < 1e-15);
        assert!((erf(-1.0) + 0.842_700_792_949_714_9).abs() < 1e-15);
    }

    #[test]
    fn erfinv_roundtrip() {
        assert_eq!(erfinv(0.0).unwrap(), 0.0);
        for &v in &[-0.999_999, -0.9, -0.3, 1e-10, 0.1, 0.5, 0.75, 0.99, 0.999_999_9] {
            let x = erfinv(v).unwrap();
            assert!((erf(x) - v).abs() <= 4.0 * f64::EPSILON, "v = {v}");
        }
    }

    #[test]
    fn erfinv_rejects_boundary() {
        assert!(erfinv(1.0).is_err());
        assert!(erfinv(-1.0).is_err());
        assert!(erfinv(f64::NAN).is_err());
    }

    #[test]
    fn arccosh_at_one_and_domain() {
        assert_eq!(arccosh(1.0).unwrap(), 0.0);
        assert!((arccosh(2.0).unwrap() - 2.0f64.acosh()).abs() < 1e-15);
        assert!(arccosh(0.999).is_err());
        // small offsets: arccosh(1+d) ~ sqrt(2d)
        let d = 1e-14;
        assert!((arccosh1p(d) / (2.0 * d).sqrt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn arccos_clamp_band() {
        assert_eq!(arccos_clamped(1.0 + 5e-13).unwrap(), 0.0);
        assert!(arccos_clamped(1.0 + 1e-9).is_err());
        assert!(arccos_clamped(-1.0 - 1e-9).is_err());
    }
}
