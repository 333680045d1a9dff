//! Scenarios, initial profiles and per-layer coefficients.
//!
//! Densities are stored nonnegative; the sign of the charge lives in
//! [`Scenario::q`]. For cylinders the density is the slab density `ρ·ℓ`, so
//! the enclosed source of a slab of height `ℓ` is `2π∫ρ₀ x dx`.

pub mod pchip;

use std::f64::consts::PI;
use std::sync::OnceLock;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::quad::{adaptive_quad, QuadOptions};
use crate::kernels::special::normal_cdf;
pub use crate::kernels::{Interaction, KernelKind, Regime, Symmetry};
use pchip::Pchip;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Scenario {
    pub interaction: Interaction,
    pub symmetry: Symmetry,
    pub regime: Regime,
    /// Charge of one particle.
    pub q: f64,
    /// Rest mass of one particle.
    pub m: f64,
    pub c: f64,
    pub eps0: f64,
    #[serde(rename = "G")]
    pub g: f64,
    /// Height of the elementary cylindrical slab.
    pub slab_height_ell: f64,
}

impl Scenario {
    /// All constants set to one.
    pub fn unit(interaction: Interaction, symmetry: Symmetry, regime: Regime) -> Self {
        Self {
            interaction,
            symmetry,
            regime,
            q: 1.0,
            m: 1.0,
            c: 1.0,
            eps0: 1.0,
            g: 1.0,
            slab_height_ell: 1.0,
        }
    }

    pub fn for_kind(kind: KernelKind) -> Self {
        Self::unit(kind.interaction, kind.symmetry, kind.regime)
    }

    pub fn kind(&self) -> KernelKind {
        KernelKind::new(self.interaction, self.symmetry, self.regime)
    }

    pub fn with_regime(self, regime: Regime) -> Self {
        Self { regime, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m", self.m),
            ("c", self.c),
            ("eps0", self.eps0),
            ("G", self.g),
            ("slab_height_ell", self.slab_height_ell),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.q.is_finite() || (self.interaction == Interaction::Em && self.q == 0.0) {
            return Err(Error::InvalidConfig(format!(
                "electromagnetic scenarios need a finite nonzero charge, got q = {}",
                self.q
            )));
        }
        Ok(())
    }

    /// Coupling `a` such that the acceleration source is `a·ρ₀`:
    /// `|q|/(ε₀m)` for charges, `4πG` for masses.
    pub fn coupling(&self) -> f64 {
        match self.interaction {
            Interaction::Em => self.q.abs() / (self.eps0 * self.m),
            Interaction::Gravity => 4.0 * PI * self.g,
        }
    }

    /// Amount of source carried by one particle (`|q|` or `m`).
    pub fn particle_unit(&self) -> f64 {
        match self.interaction {
            Interaction::Em => self.q.abs(),
            Interaction::Gravity => self.m,
        }
    }

    /// `4π` for spheres, `2π` for cylinders.
    pub fn geometry_factor(&self) -> f64 {
        match self.symmetry {
            Symmetry::Sphere => 4.0 * PI,
            Symmetry::Cylinder => 2.0 * PI,
        }
    }

    /// `ϑ²` for an enclosed source `s`.
    pub fn theta_sq(&self, s: f64) -> f64 {
        match self.symmetry {
            Symmetry::Sphere => self.coupling() * s / (4.0 * PI),
            Symmetry::Cylinder => self.coupling() * s / (2.0 * PI * self.slab_height_ell),
        }
    }

    /// `dϑ²/dr` at radius `r` with local density `rho0`.
    pub fn d_theta_sq(&self, r: f64, rho0: f64) -> f64 {
        match self.symmetry {
            Symmetry::Sphere => self.coupling() * rho0 * r * r,
            Symmetry::Cylinder => self.coupling() * rho0 * r / self.slab_height_ell,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct TabulatedCache {
    interp: Pchip,
    // ∫ρ₀ x^p dx from the first node to node i, for p = 1 and p = 2
    moments: [Vec<f64>; 2],
}

/// Density given at nodes `(r, ρ₀)`; zero outside the nodes and beyond `r_max`.
#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
pub struct TabulatedProfile {
    pub nodes: Vec<[f64; 2]>,
    pub r_max: f64,
    #[serde(skip)]
    #[schemars(skip)]
    cache: OnceLock<std::result::Result<TabulatedCache, Error>>,
}

impl PartialEq for TabulatedProfile {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.r_max == other.r_max
    }
}

impl TabulatedProfile {
    pub fn new(nodes: Vec<[f64; 2]>, r_max: f64) -> Result<Self> {
        let p = Self {
            nodes,
            r_max,
            cache: OnceLock::new(),
        };
        p.validate()?;
        Ok(p)
    }

    fn build_cache(&self) -> Result<TabulatedCache> {
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(Error::InvalidConfig("tabulated r_max must be positive".into()));
        }
        if self.nodes.iter().any(|n| n[0] < 0.0 || n[1] < 0.0) {
            return Err(Error::InvalidConfig(
                "tabulated radii and densities must be nonnegative".into(),
            ));
        }
        let xs: Vec<f64> = self.nodes.iter().map(|n| n[0]).collect();
        let ys: Vec<f64> = self.nodes.iter().map(|n| n[1]).collect();
        let interp = Pchip::new(xs, ys)?;
        let mut moments = [vec![0.0], vec![0.0]];
        for w in interp.nodes().windows(2) {
            for (p, m) in moments.iter_mut().enumerate() {
                // cubic times x^p: one Gauss–Kronrod panel is exact
                let seg = adaptive_quad(
                    |x| interp.eval(x) * x.powi(p as i32 + 1),
                    w[0],
                    w[1],
                    QuadOptions::default(),
                )?
                .value;
                let last = *m.last().expect("seeded");
                m.push(last + seg);
            }
        }
        Ok(TabulatedCache { interp, moments })
    }

    fn cache(&self) -> Result<&TabulatedCache> {
        self.cache
            .get_or_init(|| self.build_cache())
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn validate(&self) -> Result<()> {
        self.cache().map(|_| ())
    }

    fn upper(&self) -> Result<f64> {
        Ok(self.cache()?.interp.last().min(self.r_max))
    }

    pub fn rho0(&self, r: f64) -> Result<f64> {
        let c = self.cache()?;
        if r < c.interp.first() || r > self.upper()? {
            return Ok(0.0);
        }
        Ok(c.interp.eval(r).max(0.0))
    }

    /// `∫₀^r ρ₀ x^p dx` for `p` in {1, 2}.
    pub fn moment(&self, r: f64, p: i32) -> Result<f64> {
        let c = self.cache()?;
        let r = r.min(self.upper()?);
        if r <= c.interp.first() {
            return Ok(0.0);
        }
        let i = c.interp.segment(r);
        let table = &c.moments[(p - 1) as usize];
        let partial = adaptive_quad(
            |x| c.interp.eval(x) * x.powi(p),
            c.interp.nodes()[i],
            r,
            QuadOptions::default(),
        )?
        .value;
        Ok(table[i] + partial)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitialProfile {
    /// Constant density out to `r_max`.
    Uniform { rho0: f64, r_max: f64 },
    /// Log-normally distributed radii: `f0` particles, `ln(τr) ~ N(mu_r, sigma_r²)`.
    LogNormalShell {
        f0: f64,
        tau: f64,
        mu_r: f64,
        sigma_r: f64,
    },
    Tabulated(TabulatedProfile),
}

impl InitialProfile {
    pub fn uniform(rho0: f64, r_max: f64) -> Self {
        Self::Uniform { rho0, r_max }
    }

    pub fn log_normal(f0: f64, tau: f64, mu_r: f64, sigma_r: f64) -> Self {
        Self::LogNormalShell {
            f0,
            tau,
            mu_r,
            sigma_r,
        }
    }

    pub fn tabulated(nodes: Vec<[f64; 2]>, r_max: f64) -> Result<Self> {
        TabulatedProfile::new(nodes, r_max).map(Self::Tabulated)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Uniform { rho0, r_max } => {
                if !(*rho0 >= 0.0 && rho0.is_finite()) {
                    return Err(Error::InvalidConfig(format!("rho0 must be >= 0, got {rho0}")));
                }
                if !(*r_max > 0.0 && r_max.is_finite()) {
                    return Err(Error::InvalidConfig(format!("r_max must be > 0, got {r_max}")));
                }
                Ok(())
            }
            Self::LogNormalShell {
                f0,
                tau,
                mu_r,
                sigma_r,
            } => {
                if !(*f0 >= 0.0 && f0.is_finite()) || !mu_r.is_finite() {
                    return Err(Error::InvalidConfig("f0 must be >= 0 and mu_r finite".into()));
                }
                if !(*tau > 0.0 && *sigma_r > 0.0 && tau.is_finite() && sigma_r.is_finite()) {
                    return Err(Error::InvalidConfig("tau and sigma_r must be positive".into()));
                }
                Ok(())
            }
            Self::Tabulated(t) => t.validate(),
        }
    }

    /// Initial density `ρ₀(r)`.
    pub fn rho0(&self, scenario: &Scenario, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!("radius must be >= 0, got {r}")));
        }
        match self {
            Self::Uniform { rho0, r_max } => Ok(if r <= *r_max { *rho0 } else { 0.0 }),
            Self::LogNormalShell {
                f0,
                tau,
                mu_r,
                sigma_r,
            } => {
                if r == 0.0 {
                    return Ok(0.0);
                }
                let xi = tau * r;
                let z = (xi.ln() - mu_r) / sigma_r;
                let pdf = (-0.5 * z * z).exp() / (xi * sigma_r * (2.0 * PI).sqrt());
                let per_radius = scenario.particle_unit() * f0 * tau * pdf;
                Ok(match scenario.symmetry {
                    Symmetry::Sphere => per_radius / (4.0 * PI * r * r),
                    Symmetry::Cylinder => per_radius / (2.0 * PI * r),
                })
            }
            Self::Tabulated(t) => t.rho0(r),
        }
    }

    /// Enclosed source `geometry·∫₀^r ρ₀ x^k dx` (charge or mass).
    pub fn enclosed_source(&self, scenario: &Scenario, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!("radius must be >= 0, got {r}")));
        }
        let p = match scenario.symmetry {
            Symmetry::Sphere => 3,
            Symmetry::Cylinder => 2,
        };
        match self {
            Self::Uniform { rho0, r_max } => {
                let rr = r.min(*r_max);
                Ok(scenario.geometry_factor() * rho0 * rr.powi(p) / p as f64)
            }
            Self::LogNormalShell {
                f0,
                tau,
                mu_r,
                sigma_r,
            } => {
                if r == 0.0 {
                    return Ok(0.0);
                }
                let z = ((tau * r).ln() - mu_r) / sigma_r;
                Ok(scenario.particle_unit() * f0 * normal_cdf(z))
            }
            Self::Tabulated(t) => Ok(scenario.geometry_factor() * t.moment(r, p - 1)?),
        }
    }

    /// Radial range carrying the bulk of the profile.
    ///
    /// Uniform: `(1e-3·r_max, r_max)`; log-normal: `exp(μ ± 5σ)/τ`;
    /// tabulated: first positive node to the cutoff.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Uniform { r_max, .. } => (1e-3 * r_max, *r_max),
            Self::LogNormalShell {
                tau, mu_r, sigma_r, ..
            } => (
                (mu_r - 5.0 * sigma_r).exp() / tau,
                (mu_r + 5.0 * sigma_r).exp() / tau,
            ),
            Self::Tabulated(t) => {
                let first = t
                    .nodes
                    .first()
                    .map(|n| n[0])
                    .unwrap_or(0.0)
                    .max(1e-3 * t.r_max);
                let last = t.nodes.last().map(|n| n[0]).unwrap_or(t.r_max).min(t.r_max);
                (first, last)
            }
        }
    }

    /// Length scale used for relative thresholds.
    pub fn reference_radius(&self) -> f64 {
        match self {
            Self::Uniform { r_max, .. } => *r_max,
            Self::Tabulated(t) => t.r_max,
            Self::LogNormalShell { .. } => self.support().1,
        }
    }

    /// `n` geometrically spaced radii across [`support`](Self::support).
    pub fn default_grid(&self, n: usize) -> Vec<f64> {
        let (a, b) = self.support();
        geometric_grid(a, b, n)
    }
}

pub fn geometric_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![b],
        _ => {
            let ratio = (b / a).ln();
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        b
                    } else {
                        a * (ratio * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Number of particles enclosed within radius `r`.
pub fn cumulative_number(profile: &InitialProfile, scenario: &Scenario, r: f64) -> Result<f64> {
    Ok(profile.enclosed_source(scenario, r)? / scenario.particle_unit())
}

/// Coefficients of the characteristic through one Lagrangian layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LayerCoefficients {
    pub kind: KernelKind,
    /// Initial radius `R₀`.
    pub r: f64,
    /// Enclosed particle number.
    pub n: f64,
    /// `ρ₀(R₀)`.
    pub rho0: f64,
    pub theta_sq: f64,
    pub d_theta_sq: f64,
    pub beta_bar_sq: f64,
    pub d_beta_bar_sq: f64,
    /// Sphere only; zero for cylinders.
    pub eta_sq: f64,
    pub d_eta_sq: f64,
    pub lam: f64,
    pub d_lam: f64,
    pub c: f64,
    /// `a` of [`Scenario::coupling`].
    pub coupling: f64,
    pub ell: f64,
}

impl LayerCoefficients {
    /// Build from the enclosed source and local density at radius `r`.
    pub fn from_source(scenario: &Scenario, r: f64, source: f64, rho0: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!("layer radius must be > 0, got {r}")));
        }
        let kind = scenario.kind();
        let c2 = scenario.c * scenario.c;
        let theta_sq = scenario.theta_sq(source);
        let d_theta_sq = scenario.d_theta_sq(r, rho0);
        let beta_bar_sq = theta_sq / c2;
        let d_beta_bar_sq = d_theta_sq / c2;
        let (eta_sq, d_eta_sq) = match kind.symmetry {
            Symmetry::Sphere => {
                let e = beta_bar_sq / r;
                (e, d_beta_bar_sq / r - e / r)
            }
            Symmetry::Cylinder => (0.0, 0.0),
        };
        if kind.symmetry == Symmetry::Sphere
            && kind.interaction == Interaction::Gravity
            && kind.regime == Regime::Relativistic
            && eta_sq >= 1.0
        {
            return Err(Error::QuasiRelativism { r, eta_sq });
        }
        let (lam, d_lam) = if theta_sq > 0.0 {
            // logarithmic derivative of ϑ²
            let dlog = d_theta_sq / theta_sq;
            match (kind.symmetry, kind.regime) {
                (Symmetry::Sphere, Regime::Relativistic) => {
                    let s = if kind.is_expansion() { 1.0 } else { -1.0 };
                    let y = eta_sq;
                    let lam = scenario.c * y.sqrt() * (2.0 + s * y).sqrt() / (r * (1.0 + s * y));
                    // d ln y/dr = dlog − 1/r
                    let dy = y * (dlog - 1.0 / r);
                    let dlog_g = 0.5 * (dlog - 1.0 / r) + s * dy / (2.0 * (2.0 + s * y))
                        - s * dy / (1.0 + s * y);
                    (lam, lam * (dlog_g - 1.0 / r))
                }
                (Symmetry::Sphere, Regime::Classical) => {
                    let lam = (2.0 * theta_sq / (r * r * r)).sqrt();
                    (lam, lam * (0.5 * dlog - 1.5 / r))
                }
                (Symmetry::Cylinder, _) => {
                    let lam = theta_sq.sqrt() / (r * std::f64::consts::SQRT_2);
                    (lam, lam * (0.5 * dlog - 1.0 / r))
                }
            }
        } else {
            (0.0, 0.0)
        };
        Ok(Self {
            kind,
            r,
            n: source / scenario.particle_unit(),
            rho0,
            theta_sq,
            d_theta_sq,
            beta_bar_sq,
            d_beta_bar_sq,
            eta_sq,
            d_eta_sq,
            lam,
            d_lam,
            c: scenario.c,
            coupling: scenario.coupling(),
            ell: scenario.slab_height_ell,
        })
    }

    /// Argument `y` of the kernel: `η²` (sphere) or `β̄²` (cylinder) in the
    /// relativistic regime, zero classically.
    pub fn layer_param(&self) -> f64 {
        match (self.kind.regime, self.kind.symmetry) {
            (Regime::Classical, _) => 0.0,
            (Regime::Relativistic, Symmetry::Sphere) => self.eta_sq,
            (Regime::Relativistic, Symmetry::Cylinder) => self.beta_bar_sq,
        }
    }

    pub fn d_layer_param(&self) -> f64 {
        match (self.kind.regime, self.kind.symmetry) {
            (Regime::Classical, _) => 0.0,
            (Regime::Relativistic, Symmetry::Sphere) => self.d_eta_sq,
            (Regime::Relativistic, Symmetry::Cylinder) => self.d_beta_bar_sq,
        }
    }
}

/// Coefficients of the layer starting at radius `r`.
pub fn layer_coefficients(
    profile: &InitialProfile,
    scenario: &Scenario,
    r: f64,
) -> Result<LayerCoefficients> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("layer radius must be > 0, got {r}")));
    }
    let source = profile.enclosed_source(scenario, r)?;
    let rho0 = profile.rho0(scenario, r)?;
    LayerCoefficients::from_source(scenario, r, source, rho0)
}
