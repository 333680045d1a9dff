//! Density carried along characteristics.
//!
//! `ρ(R(t, r), t) = ρ₀(r) / (P^k · J)` with `k = 2` for spheres, `1` for
//! cylinders, and `J = ∂R/∂r = P + r(λ′t − y′∂_yF)/∂ₓF`. Classical
//! scenarios use the explicit limit expressions in `√((P−1)/P)` or `√ln P`.

use rayon::prelude::*;
use serde::Serialize;

use crate::characteristics::{jacobian_at, layer_point};
use crate::error::{Error, Result};
use crate::kernels::quad::{adaptive_quad, QuadOptions};
use crate::kernels::{Interaction, MapPoint, Regime, Symmetry};
use crate::model::pchip::Pchip;
use crate::model::{layer_coefficients, InitialProfile, LayerCoefficients, Scenario};

/// Jacobian below which a point is reported as near-caustic.
pub const NEAR_CAUSTIC_JACOBIAN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Regular,
    NearCaustic,
    /// Characteristics have crossed; the density is not defined.
    PastShock,
    /// A collapsing layer has reached the center.
    Collapsed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityPoint {
    pub r0: f64,
    pub r: f64,
    pub rho: f64,
    pub jac: f64,
    pub status: PointStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensitySnapshot {
    pub t: f64,
    pub symmetry: Symmetry,
    pub points: Vec<DensityPoint>,
}

impl DensitySnapshot {
    /// Points with a defined density.
    pub fn valid_points(&self) -> impl Iterator<Item = &DensityPoint> {
        self.points
            .iter()
            .filter(|p| matches!(p.status, PointStatus::Regular | PointStatus::NearCaustic))
    }

    /// Resample onto an Eulerian grid by monotone interpolation in `R`.
    ///
    /// Requires at least two valid points ordered by `R`; grid points outside
    /// the mapped range get `NaN`.
    pub fn resample(&self, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
        let (rs, rhos): (Vec<f64>, Vec<f64>) = self.valid_points().map(|p| (p.r, p.rho)).unzip();
        let interp = Pchip::new(rs.clone(), rhos)?;
        let (lo, hi) = (rs[0], rs[rs.len() - 1]);
        Ok(grid
            .iter()
            .map(|&x| {
                let v = if x < lo || x > hi { f64::NAN } else { interp.eval(x) };
                (x, v)
            })
            .collect())
    }
}

fn classical_jacobian(c: &LayerCoefficients, p: &MapPoint, t: f64) -> f64 {
    let u2 = p.u * p.u;
    let a_rho = c.coupling * c.rho0;
    match (c.kind.interaction, c.kind.symmetry) {
        (Interaction::Em, Symmetry::Sphere) => {
            let root = p.u / (1.0 + u2).sqrt();
            p.x + t * root * (a_rho / c.lam - 1.5 * c.lam)
        }
        (Interaction::Gravity, Symmetry::Sphere) => {
            let root = p.u / (1.0 - u2).max(0.0).sqrt();
            p.x - t * root * (a_rho / c.lam - 1.5 * c.lam)
        }
        (Interaction::Em, Symmetry::Cylinder) => {
            p.x + 2.0 * t * p.u * (a_rho / (4.0 * c.ell * c.lam) - c.lam)
        }
        (Interaction::Gravity, Symmetry::Cylinder) => {
            p.x - 2.0 * t * p.u * (a_rho / (4.0 * c.ell * c.lam) - c.lam)
        }
    }
}

/// Density and Jacobian of one layer at time `t`, given its coefficients.
pub fn layer_density(coeffs: &LayerCoefficients, t: f64) -> Result<DensityPoint> {
    let p = layer_point(coeffs, t)?;
    let r = coeffs.r * p.x;
    if p.x == 0.0 {
        return Ok(DensityPoint {
            r0: coeffs.r,
            r,
            rho: f64::NAN,
            jac: 0.0,
            status: PointStatus::Collapsed,
        });
    }
    let jac = if p.u == 0.0 || coeffs.lam == 0.0 {
        1.0
    } else {
        match coeffs.kind.regime {
            Regime::Classical => classical_jacobian(coeffs, &p, t),
            Regime::Relativistic => jacobian_at(coeffs, &p, t)?,
        }
    };
    if !(jac > 0.0) {
        return Err(Error::PastShock {
            r0: coeffs.r,
            t,
            jacobian: jac,
        });
    }
    let pk = match coeffs.kind.symmetry {
        Symmetry::Sphere => p.x * p.x,
        Symmetry::Cylinder => p.x,
    };
    Ok(DensityPoint {
        r0: coeffs.r,
        r,
        rho: coeffs.rho0 / (pk * jac),
        jac,
        status: if jac < NEAR_CAUSTIC_JACOBIAN {
            PointStatus::NearCaustic
        } else {
            PointStatus::Regular
        },
    })
}

/// `(R, ρ)` of the layer that started at `r`.
pub fn density_at(profile: &InitialProfile, scenario: &Scenario, r: f64, t: f64) -> Result<DensityPoint> {
    layer_density(&layer_coefficients(profile, scenario, r)?, t)
}

/// Density on a Lagrangian grid; failing layers are flagged rather than dropped.
pub fn snapshot(
    profile: &InitialProfile,
    scenario: &Scenario,
    r_grid: &[f64],
    t: f64,
) -> Result<DensitySnapshot> {
    let points = r_grid
        .par_iter()
        .map(|&r0| -> Result<DensityPoint> {
            let coeffs = layer_coefficients(profile, scenario, r0)?;
            match layer_density(&coeffs, t) {
                Ok(p) => Ok(p),
                Err(Error::PastShock { jacobian, .. }) => Ok(DensityPoint {
                    r0,
                    r: r0 * layer_point(&coeffs, t)?.x,
                    rho: f64::NAN,
                    jac: jacobian,
                    status: PointStatus::PastShock,
                }),
                Err(Error::PastCollapse { .. }) => Ok(DensityPoint {
                    r0,
                    r: 0.0,
                    rho: f64::NAN,
                    jac: 0.0,
                    status: PointStatus::Collapsed,
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DensitySnapshot {
        t,
        symmetry: scenario.symmetry,
        points,
    })
}

// Lagrangian label of the layer currently at radius x, by safeguarded Newton
// with the Jacobian as derivative.
fn label_at(
    profile: &InitialProfile,
    scenario: &Scenario,
    x: f64,
    t: f64,
    lo: (f64, f64),
    hi: (f64, f64),
) -> Result<DensityPoint> {
    let (mut a, mut ra) = lo;
    let (mut b, mut rb) = hi;
    let mut r0 = a + (x - ra) / (rb - ra) * (b - a);
    for _ in 0..100 {
        let pt = density_at(profile, scenario, r0, t)?;
        let f = pt.r - x;
        if f.abs() <= 1e-15 * x.abs().max(f64::MIN_POSITIVE) {
            return Ok(pt);
        }
        if f > 0.0 {
            b = r0;
            rb = pt.r;
        } else {
            a = r0;
            ra = pt.r;
        }
        let mut next = r0 - f / pt.jac;
        if !(next > a && next < b) {
            next = a + (x - ra) / (rb - ra) * (b - a);
            if !(next > a && next < b) {
                next = 0.5 * (a + b);
            }
        }
        if (next - r0).abs() <= 4.0 * f64::EPSILON * r0 || b - a <= 4.0 * f64::EPSILON * b {
            return density_at(profile, scenario, next, t);
        }
        r0 = next;
    }
    Err(Error::NoConvergence(format!("no layer found at radius {x}, t = {t}")))
}

/// Relative change of the source between layers `r1 < r2` at time `t`.
///
/// The current shell content is integrated in Eulerian form,
/// `∫ ρ(x,t) · geometry(x) dx` over `[R(t,r1), R(t,r2)]`, with the Lagrangian
/// label of every node recovered by root finding.
pub fn conservation_check(
    profile: &InitialProfile,
    scenario: &Scenario,
    r1: f64,
    r2: f64,
    t: f64,
) -> Result<f64> {
    if !(r1 > 0.0 && r2 > r1) {
        return Err(Error::Domain(format!("need 0 < r1 < r2, got {r1}, {r2}")));
    }
    let q0 = profile.enclosed_source(scenario, r2)? - profile.enclosed_source(scenario, r1)?;
    if !(q0 > 0.0) {
        return Err(Error::Domain("shell carries no source".into()));
    }
    let p1 = density_at(profile, scenario, r1, t)?;
    let p2 = density_at(profile, scenario, r2, t)?;
    let (lo, hi) = if p1.r <= p2.r {
        ((r1, p1.r), (r2, p2.r))
    } else {
        return Err(Error::PastShock {
            r0: r1,
            t,
            jacobian: -1.0,
        });
    };
    let geom = scenario.geometry_factor();
    let power = match scenario.symmetry {
        Symmetry::Sphere => 2,
        Symmetry::Cylinder => 1,
    };
    // the closure cannot return errors; remember the first one
    let failure = std::sync::Mutex::new(None);
    let q = adaptive_quad(
        |x| match label_at(profile, scenario, x, t, lo, hi) {
            Ok(pt) => geom * pt.rho * x.powi(power),
            Err(e) => {
                failure.lock().expect("poisoned").get_or_insert(e);
                f64::NAN
            }
        },
        p1.r,
        p2.r,
        QuadOptions::with_tol(1e-11),
    );
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    Ok((q?.value - q0).abs() / q0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelKind;

    #[test]
    fn initial_density_is_rho0() {
        let p = InitialProfile::log_normal(3.0, 2.0, 0.0, 0.2);
        for kind in KernelKind::all() {
            let mut s = Scenario::for_kind(kind);
            s.g = 0.01;
            let snap = snapshot(&p, &s, &p.default_grid(9), 0.0).unwrap();
            for pt in &snap.points {
                assert_eq!(pt.rho, p.rho0(&s, pt.r0).unwrap());
                assert_eq!(pt.r, pt.r0);
            }
        }
    }

    #[test]
    fn classical_uniform_em_sphere_scales_as_p_cubed() {
        let p = InitialProfile::uniform(0.5, 1.0);
        let s = Scenario::unit(Interaction::Em, Symmetry::Sphere, Regime::Classical);
        for &r in &[0.1, 0.5, 0.99] {
            let d = density_at(&p, &s, r, 3.0).unwrap();
            let x = d.r / r;
            assert!((d.rho - 0.5 / (x * x * x)).abs() < 1e-12 * d.rho);
        }
    }

    #[test]
    fn classical_matches_generic_jacobian() {
        let p = InitialProfile::log_normal(2.0, 2.0, 0.0, 0.2);
        for kind in KernelKind::all().into_iter().filter(|k| !k.is_relativistic()) {
            let mut s = Scenario::for_kind(kind);
            if kind.interaction == Interaction::Gravity {
                s.g = 0.01;
            }
            let c = layer_coefficients(&p, &s, 0.6).unwrap();
            let pt = layer_point(&c, 0.3).unwrap();
            let a = classical_jacobian(&c, &pt, 0.3);
            let b = jacobian_at(&c, &pt, 0.3).unwrap();
            assert!((a - b).abs() < 1e-12 * b.abs(), "{kind}: {a} vs {b}");
        }
    }

    #[test]
    fn conservation_zero_at_start() {
        let p = InitialProfile::uniform(0.5, 1.0);
        let s = Scenario::unit(Interaction::Em, Symmetry::Sphere, Regime::Classical);
        assert!(conservation_check(&p, &s, 0.2, 0.6, 0.0).unwrap() < 1e-13);
        assert!(conservation_check(&p, &s, 0.2, 0.6, 5.0).unwrap() < 1e-10);
    }

    #[test]
    fn past_shock_is_an_error_and_flagged() {
        let p = InitialProfile::log_normal(10.0, 2.0, 0.0, 0.2);
        let s = Scenario::unit(Interaction::Em, Symmetry::Sphere, Regime::Classical);
        let grid = p.default_grid(64);
        let snap = snapshot(&p, &s, &grid, 5.0).unwrap();
        assert!(snap.points.iter().any(|p| p.status == PointStatus::PastShock));
        let bad = snap.points.iter().find(|p| p.status == PointStatus::PastShock).unwrap();
        assert!(matches!(density_at(&p, &s, bad.r0, 5.0), Err(Error::PastShock { .. })));
    }
}
