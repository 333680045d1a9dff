//! Post-processing of density fields: quantum potential and the linear
//! velocity field of uniform classical solutions.

use serde::Serialize;

use crate::characteristics::layer_point;
use crate::density::DensitySnapshot;
use crate::error::{Error, Result};
use crate::kernels::{Interaction, Regime, Symmetry};
use crate::model::{layer_coefficients, InitialProfile, LayerCoefficients, Scenario};

/// Reduced Planck constant in SI units.
pub const HBAR_SI: f64 = 1.054_571_817e-34;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialPoint {
    pub r: f64,
    pub value: f64,
    /// Set on the end points, where one-sided stencils are used.
    pub low_confidence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialProfile {
    pub t: f64,
    pub hbar: f64,
    pub mass: f64,
    pub points: Vec<PotentialPoint>,
}

/// Finite-difference weights for derivatives `0..=order` at `z` on nodes `xs`
/// (Fornberg's recursion). Row `d` holds the weights of the `d`-th derivative.
pub fn fornberg_weights(z: f64, xs: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// `Q = (ħ²/2m)·Δ√f / √f` for samples `(R, ρ)` with `f = ρ/m`.
///
/// Interior points use three-point stencils, the two end points four-point
/// one-sided stencils; all are second order in the second derivative.
pub fn quantum_potential_from_samples(
    samples: &[(f64, f64)],
    symmetry: Symmetry,
    mass: f64,
    hbar: f64,
) -> Result<Vec<PotentialPoint>> {
    if samples.len() < 7 {
        return Err(Error::InvalidConfig(format!(
            "quantum potential needs at least 5 interior points, got {}",
            samples.len().saturating_sub(2)
        )));
    }
    if !(mass > 0.0) {
        return Err(Error::InvalidConfig(format!("mass must be positive, got {mass}")));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::Domain("radii must be strictly increasing".into()));
    }
    if let Some(&(r, rho)) = samples.iter().find(|s| !(s.1 > 0.0)) {
        return Err(Error::Domain(format!("density must be positive, got {rho} at R = {r}")));
    }
    let k = match symmetry {
        Symmetry::Sphere => 2.0,
        Symmetry::Cylinder => 1.0,
    };
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let fs: Vec<f64> = samples.iter().map(|s| (s.1 / mass).sqrt()).collect();
    let n = xs.len();
    let pref = hbar * hbar / (2.0 * mass);
    Ok((0..n)
        .map(|i| {
            let idx: Vec<usize> = if i == 0 {
                (0..4).collect()
            } else if i == n - 1 {
                (n - 4..n).collect()
            } else {
                vec![i - 1, i, i + 1]
            };
            let nodes: Vec<f64> = idx.iter().map(|&j| xs[j]).collect();
            let w = fornberg_weights(xs[i], &nodes, 2);
            // the weights sum to zero; differencing keeps constants exact
            let (mut d1, mut d2) = (0.0, 0.0);
            for (m, &j) in idx.iter().enumerate() {
                d1 += w[1][m] * (fs[j] - fs[i]);
                d2 += w[2][m] * (fs[j] - fs[i]);
            }
            let lap = d2 + k / xs[i] * d1;
            PotentialPoint {
                r: xs[i],
                value: pref * lap / fs[i],
                low_confidence: i == 0 || i == n - 1,
            }
        })
        .collect())
}

/// Quantum potential of a pre-shock density snapshot.
pub fn quantum_potential(snapshot: &DensitySnapshot, mass: f64, hbar: f64) -> Result<PotentialProfile> {
    let mut samples: Vec<(f64, f64)> = snapshot.valid_points().map(|p| (p.r, p.rho)).collect();
    if samples.len() != snapshot.points.len() {
        return Err(Error::Domain("snapshot contains layers past the shock".into()));
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(PotentialProfile {
        t: snapshot.t,
        hbar,
        mass,
        points: quantum_potential_from_samples(&samples, snapshot.symmetry, mass, hbar)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VelocityCoefficient {
    pub t: f64,
    /// Common radius ratio `P = R/R₀` of all layers.
    pub p: f64,
    /// `⟨v⟩ = ±r·b`, plus for expansion.
    pub b: f64,
    /// Finite-difference `db/dt`.
    pub b_dot: f64,
    /// `k` in `U = (m r²/2)·k`: `−(ḃ + b²)` for expansion, `ḃ − b²` for collapse.
    pub stiffness: f64,
    /// Closed form of the same quantity, `∓λ²/(2P³)`.
    pub stiffness_exact: f64,
}

// `u² = |P − 1|` for both classical spheres, so `b = λ·u·P^{−3/2}`.
fn b_at(coeffs: &LayerCoefficients, t: f64) -> Result<(f64, f64)> {
    let p = layer_point(coeffs, t)?;
    Ok((coeffs.lam * p.u / (p.x * p.x.sqrt()), p.x))
}

/// `b(t)` of the uniform classical sphere and the stiffness of its potential.
pub fn effective_velocity_coefficient(
    profile: &InitialProfile,
    scenario: &Scenario,
    t: f64,
) -> Result<VelocityCoefficient> {
    let InitialProfile::Uniform { r_max, .. } = profile else {
        return Err(Error::NotApplicable("velocity coefficient needs a uniform profile".into()));
    };
    if scenario.regime != Regime::Classical || scenario.symmetry != Symmetry::Sphere {
        return Err(Error::NotApplicable(
            "velocity coefficient is defined for classical spheres".into(),
        ));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be finite and >= 0, got {t}")));
    }
    let coeffs = layer_coefficients(profile, scenario, 0.5 * r_max)?;
    let lam = coeffs.lam;
    let expand = scenario.interaction == Interaction::Em;
    let (b, p) = b_at(&coeffs, t)?;
    let h = 1e-4 / lam;
    let bf = |s: f64| b_at(&coeffs, s).map(|v| v.0);
    let b_dot = if t >= h {
        (bf(t + h)? - bf(t - h)?) / (2.0 * h)
    } else {
        (-3.0 * b + 4.0 * bf(t + h)? - bf(t + 2.0 * h)?) / (2.0 * h)
    };
    let (stiffness, stiffness_exact) = if expand {
        (-(b_dot + b * b), -lam * lam / (2.0 * p * p * p))
    } else {
        (b_dot - b * b, lam * lam / (2.0 * p * p * p))
    };
    Ok(VelocityCoefficient {
        t,
        p,
        b,
        b_dot,
        stiffness,
        stiffness_exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_three_point() {
        let w = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w[1], vec![-0.5, 0.0, 0.5]);
        assert_eq!(w[2], vec![1.0, -2.0, 1.0]);
        let w = fornberg_weights(0.0, &[0.0, 1.0, 2.0, 3.0], 2);
        assert!((w[2][0] - 2.0).abs() < 1e-14 && (w[2][3] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_density_has_no_potential() {
        let s: Vec<(f64, f64)> = (1..30).map(|i| (0.1 * i as f64, 2.5)).collect();
        for p in quantum_potential_from_samples(&s, Symmetry::Sphere, 1.0, 1.0).unwrap() {
            assert!(p.value.abs() < 1e-10);
        }
    }

    fn gaussian_error(n: usize, k: f64, symmetry: Symmetry) -> f64 {
        let (sigma, m, hbar) = (0.7, 2.0, 0.3);
        let s: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let r = 0.5 + 2.0 * i as f64 / (n - 1) as f64;
                (r, (-r * r / (2.0 * sigma * sigma)).exp())
            })
            .collect();
        let q = quantum_potential_from_samples(&s, symmetry, m, hbar).unwrap();
        q.iter()
            .map(|p| {
                let s2 = sigma * sigma;
                let exact = hbar * hbar / (2.0 * m) * (p.r * p.r / (4.0 * s2 * s2) - (k + 1.0) / (2.0 * s2));
                (p.value - exact).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn gaussian_converges_at_second_order() {
        for (k, sym) in [(2.0, Symmetry::Sphere), (1.0, Symmetry::Cylinder)] {
            let e1 = gaussian_error(81, k, sym);
            let e2 = gaussian_error(161, k, sym);
            let e3 = gaussian_error(321, k, sym);
            for ratio in [e1 / e2, e2 / e3] {
                assert!((3.5..4.6).contains(&ratio), "ratio {ratio}");
            }
        }
    }

    #[test]
    fn too_few_points() {
        let s: Vec<(f64, f64)> = (1..7).map(|i| (i as f64, 1.0)).collect();
        assert!(quantum_potential_from_samples(&s, Symmetry::Sphere, 1.0, 1.0).is_err());
    }

    #[test]
    fn velocity_coefficient_starts_at_zero() {
        let p = InitialProfile::uniform(1.0, 1.0);
        for i in [Interaction::Em, Interaction::Gravity] {
            let s = Scenario::unit(i, Symmetry::Sphere, Regime::Classical);
            let v = effective_velocity_coefficient(&p, &s, 0.0).unwrap();
            assert_eq!(v.b, 0.0);
        }
        let rel = Scenario::unit(Interaction::Em, Symmetry::Sphere, Regime::Relativistic);
        assert!(effective_velocity_coefficient(&p, &rel, 1.0).is_err());
    }

    #[test]
    fn stiffness_matches_closed_form() {
        let p = InitialProfile::uniform(1.0, 1.0);
        for i in [Interaction::Em, Interaction::Gravity] {
            let s = Scenario::unit(i, Symmetry::Sphere, Regime::Classical);
            for &t in &[0.05, 0.2, 0.4] {
                let v = effective_velocity_coefficient(&p, &s, t).unwrap();
                assert!((v.stiffness - v.stiffness_exact).abs() < 1e-6 * v.stiffness_exact.abs());
            }
        }
    }
}
