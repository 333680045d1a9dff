//! Layer trajectories, speeds, caustic detection and collapse times.
//!
//! A layer starting at `R₀` follows `R(t) = R₀·P(λ(R₀)t, y(R₀))`. Everything
//! here is evaluated through [`MapPoint`]s so that quantities singular at
//! `t = 0` (speed, Jacobian) stay accurate at small times.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{
    collapse_endpoint, d_forward_dx_at, d_forward_dy_at, inverse_point, Interaction, KernelKind,
    MapPoint, Regime, Symmetry,
};
use crate::model::{layer_coefficients, InitialProfile, LayerCoefficients, Scenario};

/// Coarse time steps used to bracket the first Jacobian zero of a layer.
pub const JACOBIAN_SCAN_STEPS: usize = 400;
/// Layers whose caustic sits below this fraction of the reference radius
/// count as reaching the center.
pub const CENTRAL_RADIUS_FRACTION: f64 = 1e-6;
/// Relative arrival-time spread below which a collapse is simultaneous.
pub const SIMULTANEITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Asymptote {
    /// Limiting `v/c`.
    Beta(f64),
    /// Limiting speed in physical units.
    Velocity(f64),
    /// Speed grows without bound.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub r: f64,
    /// Signed `v/c`.
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerTrajectory {
    pub r0: f64,
    pub samples: Vec<TrajectorySample>,
    pub asymptote: Option<Asymptote>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerSpeed {
    /// `|v|`.
    pub speed: f64,
    /// Signed velocity: outward positive.
    pub velocity: f64,
    /// `v/c` from the kinematic path.
    pub beta: f64,
    /// `v/c` from the energy relation in `κ`; only for relativistic expansion.
    pub beta_algebraic: Option<f64>,
}

/// Point on the characteristic of `coeffs` at time `t`.
pub fn layer_point(coeffs: &LayerCoefficients, t: f64) -> Result<MapPoint> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be finite and >= 0, got {t}")));
    }
    inverse_point(coeffs.kind, coeffs.lam * t, coeffs.layer_param())
}

/// `R(t, R₀)`.
pub fn layer_radius(coeffs: &LayerCoefficients, t: f64) -> Result<f64> {
    Ok(coeffs.r * layer_point(coeffs, t)?.x)
}

/// Time at which a collapsing layer reaches the center.
pub fn arrival_time(coeffs: &LayerCoefficients) -> Result<f64> {
    let end = collapse_endpoint(coeffs.kind, coeffs.layer_param())?;
    Ok(if coeffs.lam > 0.0 {
        end / coeffs.lam
    } else {
        f64::INFINITY
    })
}

fn speed_at(coeffs: &LayerCoefficients, p: &MapPoint) -> Result<f64> {
    if p.u == 0.0 {
        return Ok(0.0);
    }
    let dfdx = d_forward_dx_at(coeffs.kind, p, coeffs.layer_param())?;
    Ok(coeffs.r * coeffs.lam / dfdx)
}

fn algebraic_beta(coeffs: &LayerCoefficients, p: &MapPoint) -> Option<f64> {
    let kind = coeffs.kind;
    if kind.interaction != Interaction::Em || kind.regime != Regime::Relativistic {
        return None;
    }
    let u2 = p.u * p.u;
    // γ − 1 = y·κ with κ = (P − 1)/P or ln P
    let g = match kind.symmetry {
        Symmetry::Sphere => coeffs.eta_sq * u2 / (1.0 + u2),
        Symmetry::Cylinder => coeffs.beta_bar_sq * u2,
    };
    Some((g * (2.0 + g)).sqrt() / (1.0 + g))
}

/// Layer speed at time `t`; exactly zero at `t = 0`.
pub fn layer_speed(coeffs: &LayerCoefficients, t: f64) -> Result<LayerSpeed> {
    let p = layer_point(coeffs, t)?;
    let velocity = speed_at(coeffs, &p)?;
    Ok(LayerSpeed {
        speed: velocity.abs(),
        velocity,
        beta: velocity / coeffs.c,
        beta_algebraic: algebraic_beta(coeffs, &p),
    })
}

/// Limiting speed of an expanding layer.
pub fn speed_asymptote(coeffs: &LayerCoefficients) -> Result<Asymptote> {
    let kind = coeffs.kind;
    if kind.interaction == Interaction::Gravity {
        return Err(Error::NotApplicable(format!(
            "{kind} layers collapse; there is no limiting speed"
        )));
    }
    Ok(match (kind.symmetry, kind.regime) {
        (Symmetry::Sphere, Regime::Relativistic) => {
            let e2 = coeffs.eta_sq;
            Asymptote::Beta(e2.sqrt() * (2.0 + e2).sqrt() / (1.0 + e2))
        }
        (Symmetry::Sphere, Regime::Classical) => Asymptote::Velocity(coeffs.r * coeffs.lam),
        (Symmetry::Cylinder, Regime::Relativistic) => Asymptote::Beta(1.0),
        (Symmetry::Cylinder, Regime::Classical) => Asymptote::Unbounded,
    })
}

/// `η²` implied by a limiting speed, and the packing ratio `n = η`.
///
/// Returns `(η², n)`; `n` inverts `β∞ = n√(2+n²)/(1+n²)`.
pub fn eta_from_beta_inf(beta_inf: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&beta_inf) {
        return Err(Error::Domain(format!("limiting speed ratio must lie in [0, 1), got {beta_inf}")));
    }
    let b2 = beta_inf * beta_inf;
    // γ − 1 without cancellation for small β
    let eta_sq = b2 / ((1.0 - b2).sqrt() * (1.0 + (1.0 - b2).sqrt()));
    Ok((eta_sq, eta_sq.sqrt()))
}

/// Limiting speed ratio for packing `n`.
pub fn beta_inf_from_packing(n: f64) -> f64 {
    n * (2.0 + n * n).sqrt() / (1.0 + n * n)
}

/// Samples of `R` and `v/c` at the given times.
pub fn trajectory(coeffs: &LayerCoefficients, times: &[f64]) -> Result<LayerTrajectory> {
    let samples = times
        .iter()
        .map(|&t| {
            let p = layer_point(coeffs, t)?;
            Ok(TrajectorySample {
                t,
                r: coeffs.r * p.x,
                beta: speed_at(coeffs, &p)? / coeffs.c,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LayerTrajectory {
        r0: coeffs.r,
        samples,
        asymptote: speed_asymptote(coeffs).ok(),
    })
}

/// `∂R/∂R₀` at a known map point.
pub fn jacobian_at(coeffs: &LayerCoefficients, p: &MapPoint, t: f64) -> Result<f64> {
    if p.u == 0.0 {
        return Ok(1.0);
    }
    if p.x == 0.0 {
        return Ok(0.0);
    }
    let y = coeffs.layer_param();
    let dfdx = d_forward_dx_at(coeffs.kind, p, y)?;
    let dy = coeffs.d_layer_param();
    let dfdy = if dy != 0.0 {
        d_forward_dy_at(coeffs.kind, p, y)?
    } else {
        0.0
    };
    Ok(p.x + coeffs.r * (coeffs.d_lam * t - dy * dfdy) / dfdx)
}

/// `∂R/∂R₀` at time `t`.
pub fn jacobian(coeffs: &LayerCoefficients, t: f64) -> Result<f64> {
    let p = layer_point(coeffs, t)?;
    jacobian_at(coeffs, &p, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanEntry {
    pub r: f64,
    /// First time the Jacobian reaches zero, if within the scanned window.
    pub t_jacobian_zero: Option<f64>,
    /// Center arrival time for collapsing layers.
    pub t_arrival: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ShockKind {
    None,
    Caustic {
        t_c: f64,
        r_c: f64,
        r_star: f64,
    },
    CentralCollapse {
        t_first: f64,
        t_last: f64,
        simultaneous: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShockReport {
    pub kind: ShockKind,
    pub t_max: f64,
    pub scan: Vec<ScanEntry>,
}

impl ShockReport {
    /// Earliest time at which the closed-form solution stops being valid.
    pub fn breakdown_time(&self) -> Option<f64> {
        match self.kind {
            ShockKind::None => None,
            ShockKind::Caustic { t_c, .. } => Some(t_c),
            ShockKind::CentralCollapse { t_first, .. } => Some(t_first),
        }
    }
}

fn first_jacobian_zero(coeffs: &LayerCoefficients, t_end: f64) -> Result<Option<f64>> {
    if coeffs.lam == 0.0 || t_end <= 0.0 {
        return Ok(None);
    }
    let mut prev = 0.0;
    for i in 1..=JACOBIAN_SCAN_STEPS {
        let t = t_end * i as f64 / JACOBIAN_SCAN_STEPS as f64;
        if jacobian(coeffs, t)? <= 0.0 {
            let (mut lo, mut hi) = (prev, t);
            while hi - lo > 1e-12 * hi {
                let mid = 0.5 * (lo + hi);
                if jacobian(coeffs, mid)? <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Some(hi));
        }
        prev = t;
    }
    Ok(None)
}

fn scan_layer(profile: &InitialProfile, scenario: &Scenario, r: f64, t_max: f64) -> Result<ScanEntry> {
    let coeffs = layer_coefficients(profile, scenario, r)?;
    let t_arrival = match scenario.interaction {
        Interaction::Gravity => Some(arrival_time(&coeffs)?),
        Interaction::Em => None,
    };
    let t_end = match t_arrival {
        Some(ta) => t_max.min(ta * (1.0 - 1e-10)),
        None => t_max,
    };
    Ok(ScanEntry {
        r,
        t_jacobian_zero: first_jacobian_zero(&coeffs, t_end)?,
        t_arrival,
    })
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

fn refine_minimum(
    profile: &InitialProfile,
    scenario: &Scenario,
    t_max: f64,
    mut a: f64,
    mut b: f64,
    best: (f64, f64),
) -> Result<(f64, f64)> {
    let eval = |r: f64| -> Result<f64> {
        Ok(scan_layer(profile, scenario, r, t_max)?
            .t_jacobian_zero
            .unwrap_or(f64::INFINITY))
    };
    let mut best = best;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (eval(c)?, eval(d)?);
    for (r, f) in [(c, fc), (d, fd)] {
        if f < best.1 {
            best = (r, f);
        }
    }
    while b - a > 1e-10 * b {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c)?;
            if fc < best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d)?;
            if fd < best.1 {
                best = (d, fd);
            }
        }
    }
    Ok(best)
}

/// Locate the earliest crossing of characteristics over a grid of layers.
pub fn shock_time(
    profile: &InitialProfile,
    scenario: &Scenario,
    r_grid: &[f64],
    t_max: f64,
) -> Result<ShockReport> {
    if r_grid.is_empty() {
        return Err(Error::InvalidConfig("shock search needs at least one layer".into()));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidConfig(format!("t_max must be positive, got {t_max}")));
    }
    let scan = r_grid
        .par_iter()
        .map(|&r| scan_layer(profile, scenario, r, t_max))
        .collect::<Result<Vec<_>>>()?;

    // deterministic minimum: ties go to the smaller radius (grid order)
    let mut first: Option<(usize, f64)> = None;
    for (i, e) in scan.iter().enumerate() {
        if let Some(t) = e.t_jacobian_zero {
            if first.is_none_or(|(_, tb)| t < tb) {
                first = Some((i, t));
            }
        }
    }

    if let Some((i, t)) = first {
        let (r_star, t_c) = if scan.len() >= 2 {
            let a = r_grid[i.saturating_sub(1)];
            let b = r_grid[(i + 1).min(r_grid.len() - 1)];
            refine_minimum(profile, scenario, t_max, a.min(b), a.max(b), (r_grid[i], t))?
        } else {
            (r_grid[i], t)
        };
        let coeffs = layer_coefficients(profile, scenario, r_star)?;
        let r_c = layer_radius(&coeffs, t_c)?;
        if r_c > CENTRAL_RADIUS_FRACTION * profile.reference_radius() {
            return Ok(ShockReport {
                kind: ShockKind::Caustic { t_c, r_c, r_star },
                t_max,
                scan,
            });
        }
    }

    if scenario.interaction == Interaction::Gravity {
        let arrivals: Vec<f64> = scan.iter().filter_map(|e| e.t_arrival).collect();
        if arrivals.iter().all(|&t| t <= t_max) {
            let t_first = arrivals.iter().copied().fold(f64::INFINITY, f64::min);
            let t_last = arrivals.iter().copied().fold(0.0, f64::max);
            let simultaneous = (t_last - t_first) <= SIMULTANEITY_TOL * t_last;
            return Ok(ShockReport {
                kind: ShockKind::CentralCollapse {
                    t_first,
                    t_last,
                    simultaneous,
                },
                t_max,
                scan,
            });
        }
    }
    Ok(ShockReport {
        kind: ShockKind::None,
        t_max,
        scan,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollapseTimes {
    /// Collapse time for the scenario's own symmetry.
    pub t: f64,
    #[serde(rename = "T_s")]
    pub t_sphere: f64,
    #[serde(rename = "T_c")]
    pub t_cylinder: f64,
    pub ratio: f64,
    /// Volumetric density used for both formulas (`ρ₀`, or `ρ₀/ℓ` for cylinders).
    pub volumetric_density: f64,
}

/// Closed-form collapse times of a uniform classical self-gravitating body.
pub fn collapse_times(profile: &InitialProfile, scenario: &Scenario) -> Result<CollapseTimes> {
    let InitialProfile::Uniform { rho0, .. } = profile else {
        return Err(Error::NotApplicable("collapse times need a uniform profile".into()));
    };
    if scenario.interaction != Interaction::Gravity || scenario.regime != Regime::Classical {
        return Err(Error::NotApplicable(
            "collapse times are defined for classical gravity only".into(),
        ));
    }
    if !(*rho0 > 0.0) {
        return Err(Error::NotApplicable("an empty body does not collapse".into()));
    }
    let rho_v = match scenario.symmetry {
        Symmetry::Sphere => *rho0,
        Symmetry::Cylinder => rho0 / scenario.slab_height_ell,
    };
    let g_rho = scenario.g * rho_v;
    let t_sphere = 0.25 * (3.0 * std::f64::consts::PI / (2.0 * g_rho)).sqrt();
    let t_cylinder = 0.5 / g_rho.sqrt();
    Ok(CollapseTimes {
        t: match scenario.symmetry {
            Symmetry::Sphere => t_sphere,
            Symmetry::Cylinder => t_cylinder,
        },
        t_sphere,
        t_cylinder,
        ratio: t_sphere / t_cylinder,
        volumetric_density: rho_v,
    })
}

/// Kinds in a scenario-independent order, handy for sweeps.
pub fn expansion_kinds() -> impl Iterator<Item = KernelKind> {
    KernelKind::all().into_iter().filter(|k| k.is_expansion())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Scenario;

    fn uniform_layer(kind: KernelKind, rho0: f64, r: f64) -> LayerCoefficients {
        let p = InitialProfile::uniform(rho0, 1.0);
        layer_coefficients(&p, &Scenario::for_kind(kind), r).unwrap()
    }

    #[test]
    fn starts_at_rest_at_initial_radius() {
        for kind in KernelKind::all() {
            let l = uniform_layer(kind, 0.1, 0.5);
            assert_eq!(layer_radius(&l, 0.0).unwrap(), 0.5);
            assert_eq!(layer_speed(&l, 0.0).unwrap().speed, 0.0);
        }
    }

    #[test]
    fn limiting_speed_at_unit_eta() {
        let mut l = uniform_layer(KernelKind::all()[0], 0.1, 0.5);
        l.eta_sq = 1.0;
        let Asymptote::Beta(b) = speed_asymptote(&l).unwrap() else { panic!() };
        assert!((b - 3.0f64.sqrt() / 2.0).abs() < 1e-15);
        l.eta_sq = 0.0;
        assert_eq!(speed_asymptote(&l).unwrap(), Asymptote::Beta(0.0));
    }

    #[test]
    fn gravity_has_no_asymptote() {
        let l = uniform_layer(KernelKind::all()[5], 0.1, 0.5);
        assert!(matches!(speed_asymptote(&l), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn eta_from_limit() {
        assert_eq!(eta_from_beta_inf(0.0).unwrap(), (0.0, 0.0));
        let (e2, n) = eta_from_beta_inf(3.0f64.sqrt() / 2.0).unwrap();
        assert!((e2 - 1.0).abs() < 1e-15 && (n - 1.0).abs() < 1e-15);
        assert!((beta_inf_from_packing(1.0) - 0.866_025_403_784_438_6).abs() < 1e-15);
        assert!(eta_from_beta_inf(1.0).is_err());
    }

    #[test]
    fn algebraic_and_kinematic_speed_agree() {
        for kind in [KernelKind::all()[0], KernelKind::all()[2]] {
            let l = uniform_layer(kind, 0.8, 0.7);
            for &t in &[1e-6, 0.01, 0.5, 3.0, 40.0] {
                let s = layer_speed(&l, t).unwrap();
                let b = s.beta_algebraic.unwrap();
                assert!((s.beta - b).abs() <= 1e-10 * b.max(1e-300), "{kind} t={t}: {} vs {b}", s.beta);
                assert!(s.beta < 1.0);
            }
        }
    }

    #[test]
    fn collapse_time_values() {
        let s = Scenario::unit(Interaction::Gravity, Symmetry::Sphere, Regime::Classical);
        let ct = collapse_times(&InitialProfile::uniform(1.0, 1.0), &s).unwrap();
        assert!((ct.t_sphere - 0.542_700_940_918_700_7).abs() < 1e-12);
        assert!((ct.t_cylinder - 0.5).abs() < 1e-15);
        assert!((ct.ratio - (3.0 * std::f64::consts::PI / 8.0).sqrt()).abs() < 1e-15);
        let rel = s.with_regime(Regime::Relativistic);
        assert!(collapse_times(&InitialProfile::uniform(1.0, 1.0), &rel).is_err());
    }

    #[test]
    fn uniform_classical_gravity_arrives_at_t_s() {
        let kind = KernelKind::all()[5];
        let s = Scenario::for_kind(kind);
        let p = InitialProfile::uniform(1.0, 1.0);
        let ts = collapse_times(&p, &s).unwrap().t_sphere;
        for &r in &[0.01, 0.3, 1.0] {
            let l = layer_coefficients(&p, &s, r).unwrap();
            assert!((arrival_time(&l).unwrap() - ts).abs() < 1e-12 * ts);
            // F is flat at the center: an ulp in λt moves x by ~ε^(2/3)
            assert!(layer_radius(&l, ts).unwrap() < 1e-9 * r);
        }
    }

    #[test]
    fn shock_rejects_bad_input() {
        let p = InitialProfile::uniform(1.0, 1.0);
        let s = Scenario::for_kind(KernelKind::all()[0]);
        assert!(shock_time(&p, &s, &[], 1.0).is_err());
        assert!(shock_time(&p, &s, &[0.5], 0.0).is_err());
    }

    #[test]
    fn uniform_classical_gravity_is_simultaneous_central_collapse() {
        let kind = KernelKind::all()[5];
        let s = Scenario::for_kind(kind);
        let p = InitialProfile::uniform(1.0, 1.0);
        let rep = shock_time(&p, &s, &p.default_grid(16), 10.0).unwrap();
        match rep.kind {
            ShockKind::CentralCollapse {
                t_first,
                simultaneous,
                ..
            } => {
                assert!(simultaneous);
                assert!((t_first - collapse_times(&p, &s).unwrap().t).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }
}
