//! Characteristic maps `F(x, y) = λt` and their inverses.
//!
//! Every map is evaluated in a substituted variable `u` that removes the
//! square-root singularity at `x = 1`:
//!
//! | symmetry | expansion (EM)   | collapse (gravity) |
//! |----------|------------------|--------------------|
//! | sphere   | `x = 1 + u²`     | `x = 1 − u²`       |
//! | cylinder | `x = exp(u²)`    | `x = exp(−u²)`     |
//!
//! In `u` all eight maps are smooth and strictly increasing, so the inverse
//! is a one-dimensional monotone root find and derivatives near `x = 1` keep
//! full relative precision. [`MapPoint`] carries both coordinates so callers
//! never have to recover `u` from a rounded `x`.

pub mod quad;
pub mod special;

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use quad::{adaptive_quad, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Interaction {
    /// Electrostatic repulsion: layers expand.
    #[serde(alias = "EM", alias = "electromagnetic")]
    Em,
    /// Newtonian attraction: layers collapse.
    #[serde(alias = "gravitational")]
    Gravity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    #[serde(alias = "spherical")]
    Sphere,
    #[serde(alias = "cylindrical")]
    Cylinder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    #[serde(alias = "rel")]
    Relativistic,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
pub struct KernelKind {
    pub interaction: Interaction,
    pub symmetry: Symmetry,
    pub regime: Regime,
}

impl KernelKind {
    pub const fn new(interaction: Interaction, symmetry: Symmetry, regime: Regime) -> Self {
        Self {
            interaction,
            symmetry,
            regime,
        }
    }

    /// All eight kinds in a fixed order.
    pub fn all() -> [KernelKind; 8] {
        use Interaction::*;
        use Regime::*;
        use Symmetry::*;
        [
            Self::new(Em, Sphere, Relativistic),
            Self::new(Em, Sphere, Classical),
            Self::new(Em, Cylinder, Relativistic),
            Self::new(Em, Cylinder, Classical),
            Self::new(Gravity, Sphere, Relativistic),
            Self::new(Gravity, Sphere, Classical),
            Self::new(Gravity, Cylinder, Relativistic),
            Self::new(Gravity, Cylinder, Classical),
        ]
    }

    pub fn is_expansion(&self) -> bool {
        self.interaction == Interaction::Em
    }

    pub fn is_relativistic(&self) -> bool {
        self.regime == Regime::Relativistic
    }

    /// Same interaction and symmetry, other regime.
    pub fn with_regime(self, regime: Regime) -> Self {
        Self { regime, ..self }
    }

    /// Power of `R` in the force law: 2 for spheres, 1 for cylinders.
    pub fn geometry_power(&self) -> i32 {
        match self.symmetry {
            Symmetry::Sphere => 2,
            Symmetry::Cylinder => 1,
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = match self.interaction {
            Interaction::Em => "em",
            Interaction::Gravity => "gravity",
        };
        let s = match self.symmetry {
            Symmetry::Sphere => "sphere",
            Symmetry::Cylinder => "cylinder",
        };
        let r = match self.regime {
            Regime::Relativistic => "rel",
            Regime::Classical => "classical",
        };
        write!(f, "{i}-{s}-{r}")
    }
}

/// A point on a characteristic: radius ratio `x` and its substituted coordinate `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapPoint {
    pub x: f64,
    pub u: f64,
}

impl MapPoint {
    pub fn from_ratio(kind: KernelKind, x: f64) -> Result<Self> {
        Ok(Self {
            x,
            u: param_from_ratio(kind, x)?,
        })
    }

    pub fn from_param(kind: KernelKind, u: f64) -> Self {
        Self {
            x: ratio_from_param(kind, u),
            u,
        }
    }

    /// `x − 1`, exact in the substituted coordinate.
    pub fn x_minus_one(&self, kind: KernelKind) -> f64 {
        let u2 = self.u * self.u;
        match (kind.interaction, kind.symmetry) {
            (Interaction::Em, Symmetry::Sphere) => u2,
            (Interaction::Gravity, Symmetry::Sphere) => -u2,
            (Interaction::Em, Symmetry::Cylinder) => u2.exp_m1(),
            (Interaction::Gravity, Symmetry::Cylinder) => (-u2).exp_m1(),
        }
    }
}

// Cylinder maps are integrals; tolerances are tighter than the 1e-11 default
// so that finite-difference checks and inversion see smooth values.
const KERNEL_QUAD: QuadOptions = QuadOptions {
    abs_tol: 1e-300,
    rel_tol: 1e-13,
    max_depth: 60,
    max_intervals: 2000,
};

// exp(-z²) is below 1e-35 beyond this point
const COLLAPSE_CUTOFF: f64 = 9.0;
// exp(u²) overflows past u ≈ 26.6
const EM_CYLINDER_MAX_PARAM: f64 = 26.0;

fn check_y(kind: KernelKind, y: f64) -> Result<()> {
    if !(y >= 0.0 && y.is_finite()) {
        return Err(Error::Domain(format!("layer parameter y = {y} must be finite and >= 0")));
    }
    if kind.is_relativistic()
        && kind.interaction == Interaction::Gravity
        && kind.symmetry == Symmetry::Sphere
        && y >= 1.0
    {
        return Err(Error::Domain(format!(
            "layer parameter y = {y} violates quasi-relativism (y < 1)"
        )));
    }
    Ok(())
}

/// Substituted coordinate `u` for a radius ratio `x`.
pub fn param_from_ratio(kind: KernelKind, x: f64) -> Result<f64> {
    match kind.interaction {
        Interaction::Em => {
            if !(x >= 1.0 && x.is_finite()) {
                return Err(Error::Domain(format!("expansion ratio x = {x} must be >= 1")));
            }
            Ok(match kind.symmetry {
                Symmetry::Sphere => (x - 1.0).sqrt(),
                Symmetry::Cylinder => x.ln().sqrt(),
            })
        }
        Interaction::Gravity => {
            if !((0.0..=1.0).contains(&x)) {
                return Err(Error::Domain(format!("collapse ratio x = {x} must lie in [0, 1]")));
            }
            Ok(match kind.symmetry {
                Symmetry::Sphere => (1.0 - x).sqrt(),
                Symmetry::Cylinder => {
                    if x == 0.0 {
                        f64::INFINITY
                    } else {
                        (-x.ln()).sqrt()
                    }
                }
            })
        }
    }
}

/// Radius ratio `x` for a substituted coordinate `u >= 0`.
pub fn ratio_from_param(kind: KernelKind, u: f64) -> f64 {
    let u2 = u * u;
    match (kind.interaction, kind.symmetry) {
        (Interaction::Em, Symmetry::Sphere) => 1.0 + u2,
        (Interaction::Gravity, Symmetry::Sphere) => ((1.0 - u) * (1.0 + u)).max(0.0),
        (Interaction::Em, Symmetry::Cylinder) => u2.exp(),
        (Interaction::Gravity, Symmetry::Cylinder) => (-u2).exp(),
    }
}

// Prefactor multiplying exp(±z²) in the cylinder integrand.
#[inline]
fn cylinder_prefactor(regime: Regime, z: f64, y: f64) -> f64 {
    match regime {
        Regime::Classical => 1.0,
        Regime::Relativistic => {
            let yz2 = y * z * z;
            SQRT_2 * (1.0 + yz2) / (2.0 + yz2).sqrt()
        }
    }
}

#[inline]
fn cylinder_integrand(kind: KernelKind, z: f64, y: f64) -> f64 {
    let e = match kind.interaction {
        Interaction::Em => (z * z).exp(),
        Interaction::Gravity => (-z * z).exp(),
    };
    cylinder_prefactor(kind.regime, z, y) * e
}

#[inline]
fn cylinder_dy_integrand(kind: KernelKind, z: f64, y: f64) -> f64 {
    let z2 = z * z;
    let e = match kind.interaction {
        Interaction::Em => z2.exp(),
        Interaction::Gravity => (-z2).exp(),
    };
    let d = 2.0 + y * z2;
    (3.0 + y * z2) * z2 / (SQRT_2 * d * d.sqrt()) * e
}

fn cylinder_upper(kind: KernelKind, u: f64) -> f64 {
    if kind.interaction == Interaction::Gravity {
        u.min(COLLAPSE_CUTOFF)
    } else {
        u
    }
}

/// `F` as a function of the substituted coordinate.
pub fn forward_param(kind: KernelKind, u: f64, y: f64) -> Result<f64> {
    if u == 0.0 {
        return Ok(0.0);
    }
    let u2 = u * u;
    Ok(match (kind.interaction, kind.symmetry, kind.regime) {
        (Interaction::Em, Symmetry::Sphere, Regime::Relativistic) => {
            let root = (u2 + 2.0 / (y + 2.0)).sqrt();
            u * root + 2.0 * (u * ((y + 2.0) / 2.0).sqrt()).asinh() / ((1.0 + y) * (2.0 + y))
        }
        (Interaction::Em, Symmetry::Sphere, Regime::Classical) => u * (1.0 + u2).sqrt() + u.asinh(),
        (Interaction::Gravity, Symmetry::Sphere, Regime::Relativistic) => {
            let u = u.min(1.0);
            let one_minus = (1.0 - u) * (1.0 + u);
            let root = (one_minus + y / (2.0 - y)).sqrt();
            let arg = (u * ((2.0 - y) / 2.0).sqrt()).min(1.0);
            u * root + 2.0 * arg.asin() / ((1.0 - y) * (2.0 - y))
        }
        (Interaction::Gravity, Symmetry::Sphere, Regime::Classical) => {
            let u = u.min(1.0);
            u * ((1.0 - u) * (1.0 + u)).sqrt() + u.asin()
        }
        (Interaction::Gravity, Symmetry::Cylinder, Regime::Classical) => {
            0.5 * PI.sqrt() * special::erf(u)
        }
        (_, Symmetry::Cylinder, _) => {
            let upper = cylinder_upper(kind, u);
            adaptive_quad(|z| cylinder_integrand(kind, z, y), 0.0, upper, KERNEL_QUAD)?.value
        }
    })
}

/// `dF/du`.
pub fn d_forward_dparam(kind: KernelKind, u: f64, y: f64) -> f64 {
    let u2 = u * u;
    match (kind.interaction, kind.symmetry, kind.regime) {
        (Interaction::Em, Symmetry::Sphere, Regime::Relativistic) => {
            2.0 * (1.0 + (1.0 + y) * u2) / ((1.0 + y) * (u2 + 2.0 / (y + 2.0)).sqrt())
        }
        (Interaction::Em, Symmetry::Sphere, Regime::Classical) => 2.0 * (1.0 + u2).sqrt(),
        (Interaction::Gravity, Symmetry::Sphere, Regime::Relativistic) => {
            let one_minus = ((1.0 - u) * (1.0 + u)).max(0.0);
            2.0 * (one_minus + y * u2) / ((1.0 - y) * (one_minus + y / (2.0 - y)).sqrt())
        }
        (Interaction::Gravity, Symmetry::Sphere, Regime::Classical) => {
            2.0 * ((1.0 - u) * (1.0 + u)).max(0.0).sqrt()
        }
        (_, Symmetry::Cylinder, _) => {
            if u.is_infinite() {
                0.0
            } else {
                cylinder_integrand(kind, u, y)
            }
        }
    }
}

/// `∂F/∂x` at a map point; singular at `x = 1` (and at the cylinder axis).
pub fn d_forward_dx_at(kind: KernelKind, p: &MapPoint, y: f64) -> Result<f64> {
    let u = p.u;
    if u == 0.0 {
        return Err(Error::Singular { x: 1.0 });
    }
    match kind.symmetry {
        Symmetry::Sphere => {
            let dxdu = if kind.is_expansion() { 2.0 * u } else { -2.0 * u };
            Ok(d_forward_dparam(kind, u, y) / dxdu)
        }
        Symmetry::Cylinder => {
            if u.is_infinite() {
                return Err(Error::Singular { x: 0.0 });
            }
            // integrand / (dx/du): the exponentials cancel exactly
            let pre = cylinder_prefactor(kind.regime, u, y);
            let sign = if kind.is_expansion() { 1.0 } else { -1.0 };
            Ok(sign * pre / (2.0 * u))
        }
    }
}

/// `∂F/∂y` at a map point. Classical kinds do not depend on `y`.
pub fn d_forward_dy_at(kind: KernelKind, p: &MapPoint, y: f64) -> Result<f64> {
    let u = p.u;
    if kind.regime == Regime::Classical || u == 0.0 {
        return Ok(0.0);
    }
    Ok(match (kind.interaction, kind.symmetry) {
        (Interaction::Em, Symmetry::Sphere) => {
            let a = ((y + 2.0) / 2.0).sqrt();
            let first = y * u * ((y + 2.0) / (2.0 + (y + 2.0) * u * u)).sqrt();
            let second = (2.0 * y + 3.0) / (1.0 + y) * 2.0 * (u * a).asinh();
            -(first + second) / ((2.0 + y) * (2.0 + y) * (1.0 + y))
        }
        (Interaction::Gravity, Symmetry::Sphere) => {
            let u = u.min(1.0);
            let a = ((2.0 - y) / 2.0).sqrt();
            let first = if y == 0.0 {
                0.0
            } else {
                y * u * ((2.0 - y) / (2.0 - (2.0 - y) * u * u)).sqrt()
            };
            let second = (3.0 - 2.0 * y) / (1.0 - y) * 2.0 * (u * a).min(1.0).asin();
            (second - first) / ((2.0 - y) * (2.0 - y) * (1.0 - y))
        }
        (_, Symmetry::Cylinder) => {
            let upper = cylinder_upper(kind, u);
            adaptive_quad(|z| cylinder_dy_integrand(kind, z, y), 0.0, upper, KERNEL_QUAD)?.value
        }
    })
}

/// Map value at the center, `F(0, y)`: the value of `λt` at which a collapsing
/// layer reaches `R = 0`.
pub fn collapse_endpoint(kind: KernelKind, y: f64) -> Result<f64> {
    if kind.is_expansion() {
        return Err(Error::NotApplicable(format!("{kind} layers never reach the center")));
    }
    check_y(kind, y)?;
    match kind.symmetry {
        Symmetry::Sphere => forward_param(kind, 1.0, y),
        Symmetry::Cylinder => forward_param(kind, f64::INFINITY, y),
    }
}

/// `F(x, y)`.
pub fn forward_map(kind: KernelKind, x: f64, y: f64) -> Result<f64> {
    check_y(kind, y)?;
    let u = param_from_ratio(kind, x)?;
    forward_param(kind, u, y)
}

/// `∂F/∂x`; errors at `x = 1` instead of returning infinity.
pub fn d_forward_dx(kind: KernelKind, x: f64, y: f64) -> Result<f64> {
    check_y(kind, y)?;
    d_forward_dx_at(kind, &MapPoint::from_ratio(kind, x)?, y)
}

/// `∂F/∂y`.
pub fn d_forward_dy(kind: KernelKind, x: f64, y: f64) -> Result<f64> {
    check_y(kind, y)?;
    d_forward_dy_at(kind, &MapPoint::from_ratio(kind, x)?, y)
}

/// `x = P(f, y)` with `F(x, y) = f`.
pub fn inverse_map(kind: KernelKind, f_target: f64, y: f64) -> Result<f64> {
    Ok(inverse_point(kind, f_target, y)?.x)
}

fn seed(kind: KernelKind, f: f64, y: f64) -> f64 {
    match (kind.interaction, kind.symmetry) {
        (Interaction::Em, Symmetry::Sphere) => {
            let slope = match kind.regime {
                Regime::Relativistic => (2.0 * (y + 2.0)).sqrt() / (1.0 + y),
                Regime::Classical => 2.0,
            };
            f / (slope + f.sqrt())
        }
        (Interaction::Gravity, Symmetry::Sphere) => {
            let slope = match kind.regime {
                Regime::Relativistic => (2.0 * (2.0 - y)).sqrt() / (1.0 - y),
                Regime::Classical => 2.0,
            };
            (f / slope).min(1.0)
        }
        (Interaction::Em, Symmetry::Cylinder) => {
            if f < 1.0 {
                f
            } else {
                // F ~ exp(u²)/(2u) for large u
                let l = (2.0 * f).ln();
                (l + 0.5 * (l + 1.0).ln()).sqrt()
            }
        }
        (Interaction::Gravity, Symmetry::Cylinder) => {
            let v = 2.0 * f / PI.sqrt();
            if v < 1.0 {
                special::erfinv(v).unwrap_or(f)
            } else {
                3.0
            }
        }
    }
}

/// Inverse map returning both coordinates of the point.
///
/// Safeguarded Newton in `u` on a bracket that is grown by doubling for
/// unbounded kinds.
pub fn inverse_point(kind: KernelKind, f_target: f64, y: f64) -> Result<MapPoint> {
    check_y(kind, y)?;
    if !(f_target >= 0.0 && f_target.is_finite()) {
        return Err(Error::Domain(format!("map value {f_target} must be finite and >= 0")));
    }
    if f_target == 0.0 {
        return Ok(MapPoint { x: 1.0, u: 0.0 });
    }
    let f = f_target;
    let (mut lo, mut hi) = (0.0_f64, f64::NAN);
    if kind.interaction == Interaction::Gravity {
        let end = collapse_endpoint(kind, y)?;
        if f >= end {
            if f <= end * (1.0 + 1e-12) {
                let u = match kind.symmetry {
                    Symmetry::Sphere => 1.0,
                    Symmetry::Cylinder => f64::INFINITY,
                };
                return Ok(MapPoint { x: 0.0, u });
            }
            return Err(Error::PastCollapse { value: f, endpoint: end });
        }
        if kind.symmetry == Symmetry::Sphere {
            hi = 1.0;
        }
    }
    let mut u = seed(kind, f, y);
    if hi.is_nan() {
        let cap = match (kind.interaction, kind.symmetry) {
            (Interaction::Em, Symmetry::Cylinder) => EM_CYLINDER_MAX_PARAM,
            (Interaction::Em, Symmetry::Sphere) => 1e150,
            _ => 2.0 * COLLAPSE_CUTOFF,
        };
        let mut h = (1.25 * u).max(1e-300).min(cap);
        loop {
            if forward_param(kind, h, y)? >= f {
                hi = h;
                break;
            }
            lo = h;
            if h >= cap {
                if kind.is_expansion() {
                    return Err(Error::Domain(format!(
                        "map value {f} exceeds the representable range of {kind}"
                    )));
                }
                // collapse cylinder: f is within rounding of the endpoint
                return Ok(MapPoint::from_param(kind, h));
            }
            h = (2.0 * h).min(cap);
        }
    }
    if !(u > lo && u < hi) {
        u = 0.5 * (lo + hi);
    }
    let tol = 1e-12 * f.max(1.0);
    for _ in 0..200 {
        let r = forward_param(kind, u, y)? - f;
        if r == 0.0 {
            return Ok(MapPoint::from_param(kind, u));
        }
        if r > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let d = d_forward_dparam(kind, u, y);
        let mut next = u - r / d;
        if !(d > 0.0 && next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let settled = (next - u).abs() <= 2.0 * f64::EPSILON * u.abs()
            || (hi - lo) <= 2.0 * f64::EPSILON * hi;
        u = next;
        if settled {
            let r = forward_param(kind, u, y)? - f;
            if r.abs() <= tol {
                return Ok(MapPoint::from_param(kind, u));
            }
            return Err(Error::NoConvergence(format!(
                "inverse of {kind} at f = {f}, y = {y}: residual {r}"
            )));
        }
    }
    Err(Error::NoConvergence(format!("inverse of {kind} at f = {f}, y = {y}")))
}
