//! Independent checks of the characteristic solution.
//!
//! Two routes that share nothing with the kernels beyond the layer
//! coefficients:
//!
//! * direct integration of the equation of motion `d(γṘ)/dt = ±ϑ²/R^k` with an
//!   adaptive Dormand–Prince 5(4) pair, written in momentum form
//!   `(R, p = γṘ/c)` so the speed can never exceed `c`;
//! * time of flight `t = ∫ dR/|v(R)|` from the energy integral
//!   `c²(γ − 1) = ±ϑ²·(1/R₀ − 1/R)` (sphere) or `±ϑ²·ln(R/R₀)` (cylinder),
//!   with `R = R₀(1 ± u²)` absorbing the square-root singularity at `R₀`.

use serde::Serialize;

use crate::characteristics::layer_radius;
use crate::error::{Error, Result};
use crate::kernels::quad::{adaptive_quad, QuadOptions};
use crate::kernels::{Interaction, Regime, Symmetry};
use crate::model::LayerCoefficients;

/// Collapsing layers stop integrating at this fraction of their initial radius.
pub const R_FLOOR_FRACTION: f64 = 1e-8;

const TOF_QUAD: QuadOptions = QuadOptions {
    abs_tol: 1e-300,
    rel_tol: 1e-13,
    max_depth: 60,
    max_intervals: 4000,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeSample {
    pub t: f64,
    pub r: f64,
    pub r_dot: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeResult {
    pub samples: Vec<OdeSample>,
    /// `max |R_ode − R_closed| / R₀` over the samples.
    pub max_rel_err_vs_closed_form: f64,
    /// Largest drift of the energy integral, relative to its natural scale.
    pub max_invariant_drift: f64,
    pub steps_taken: usize,
    pub rejections: usize,
    /// Time at which a collapsing layer reached the radius floor.
    pub floor_reached_at: Option<f64>,
}

// Dormand–Prince 5(4) tableau; the system is autonomous so the nodes are unused
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

type State = [f64; 2];

struct Motion {
    relativistic: bool,
    sign: f64,
    power: i32,
    theta_sq: f64,
    c: f64,
}

impl Motion {
    fn new(coeffs: &LayerCoefficients) -> Self {
        Self {
            relativistic: coeffs.kind.regime == Regime::Relativistic,
            sign: match coeffs.kind.interaction {
                Interaction::Em => 1.0,
                Interaction::Gravity => -1.0,
            },
            power: coeffs.kind.geometry_power(),
            theta_sq: coeffs.theta_sq,
            c: coeffs.c,
        }
    }

    // state: (R, p) with p = γṘ/c, or (R, Ṙ) classically
    fn rhs(&self, s: &State) -> State {
        let force = self.sign * self.theta_sq / s[0].powi(self.power);
        if self.relativistic {
            let p = s[1];
            [self.c * p / (1.0 + p * p).sqrt(), force / self.c]
        } else {
            [s[1], force]
        }
    }

    fn r_dot(&self, s: &State) -> f64 {
        if self.relativistic {
            self.c * s[1] / (1.0 + s[1] * s[1]).sqrt()
        } else {
            s[1]
        }
    }
}

fn dp_step(m: &Motion, y: &State, k1: &State, h: f64) -> (State, State, State) {
    let mut k = [[0.0; 2]; 7];
    k[0] = *k1;
    for i in 1..7 {
        let mut yi = *y;
        for (j, kj) in k.iter().enumerate().take(i) {
            yi[0] += h * A[i][j] * kj[0];
            yi[1] += h * A[i][j] * kj[1];
        }
        k[i] = m.rhs(&yi);
    }
    let mut y5 = *y;
    let mut err = [0.0; 2];
    for i in 0..7 {
        for d in 0..2 {
            y5[d] += h * B5[i] * k[i][d];
            err[d] += h * (B5[i] - B4[i]) * k[i][d];
        }
    }
    // FSAL: the last stage is the derivative at y5
    (y5, err, k[6])
}

/// Energy-integral residual, `γ − 1 − g(R)` (or its classical analogue
/// normalized by `ϑ²/R₀` or `ϑ²`).
pub fn first_integral_residual(coeffs: &LayerCoefficients, r: f64, r_dot: f64) -> f64 {
    let pot = potential_gain(coeffs, r / coeffs.r);
    match coeffs.kind.regime {
        Regime::Relativistic => {
            let b = r_dot / coeffs.c;
            let gamma_m1 = b * b / ((1.0 - b * b).sqrt() * (1.0 + (1.0 - b * b).sqrt()));
            gamma_m1 - pot / (coeffs.c * coeffs.c)
        }
        Regime::Classical => {
            let scale = energy_scale(coeffs);
            if scale == 0.0 {
                return 0.5 * r_dot * r_dot;
            }
            (0.5 * r_dot * r_dot - pot) / scale
        }
    }
}

fn energy_scale(coeffs: &LayerCoefficients) -> f64 {
    match coeffs.kind.symmetry {
        Symmetry::Sphere => coeffs.theta_sq / coeffs.r,
        Symmetry::Cylinder => coeffs.theta_sq,
    }
}

// Kinetic energy per unit mass gained on reaching x = R/R₀ (c²(γ−1) or v²/2).
fn potential_gain(coeffs: &LayerCoefficients, x: f64) -> f64 {
    let th = coeffs.theta_sq;
    match (coeffs.kind.interaction, coeffs.kind.symmetry) {
        (Interaction::Em, Symmetry::Sphere) => th / coeffs.r * (1.0 - 1.0 / x),
        (Interaction::Gravity, Symmetry::Sphere) => th / coeffs.r * (1.0 / x - 1.0),
        (Interaction::Em, Symmetry::Cylinder) => th * x.ln(),
        (Interaction::Gravity, Symmetry::Cylinder) => -th * x.ln(),
    }
}

fn integrate(coeffs: &LayerCoefficients, stops: &[f64], tol: f64, every_step: bool) -> Result<OdeResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!("tolerance must be positive, got {tol}")));
    }
    if stops.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::Domain("output times must be finite and >= 0".into()));
    }
    let m = Motion::new(coeffs);
    let r0 = coeffs.r;
    let floor = R_FLOOR_FRACTION * r0;
    let rate = if coeffs.lam > 0.0 {
        coeffs.lam
    } else {
        (2.0 * coeffs.theta_sq.abs() / r0.powi(3)).sqrt().max(1e-300)
    };
    let scale = [r0, if m.relativistic { (r0 * rate / m.c).max(1e-12) } else { r0 * rate }];

    let mut y: State = [r0, 0.0];
    let mut t = 0.0;
    let mut k1 = m.rhs(&y);
    let mut h = 0.05 * tol.powf(0.2) / rate;
    let mut out = Vec::new();
    let mut steps = 0;
    let mut rejections = 0;
    let mut floor_reached_at = None;

    let mut sorted: Vec<f64> = stops.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut next = 0;
    while next < sorted.len() && sorted[next] == 0.0 {
        out.push(OdeSample { t: 0.0, r: r0, r_dot: 0.0 });
        next += 1;
    }
    let t_end = sorted.last().copied().unwrap_or(0.0);

    while t < t_end && floor_reached_at.is_none() {
        let target = sorted[next];
        let clipped = t + h >= target;
        let step = if clipped { target - t } else { h };
        let (y5, err, k7) = dp_step(&m, &y, &k1, step);
        let mut e = 0.0_f64;
        for d in 0..2 {
            let sc = tol * (scale[d] + y[d].abs().max(y5[d].abs()));
            e = e.max((err[d] / sc).abs());
        }
        let valid = y5[0].is_finite() && y5[1].is_finite() && y5[0] > floor;
        if valid && e <= 1.0 {
            t = if clipped { target } else { t + step };
            y = y5;
            k1 = k7;
            steps += 1;
            if m.relativistic && m.r_dot(&y).abs() >= m.c {
                return Err(Error::NoConvergence(format!("speed reached c at t = {t}")));
            }
            if clipped {
                while next < sorted.len() && sorted[next] <= t {
                    out.push(OdeSample { t: sorted[next], r: y[0], r_dot: m.r_dot(&y) });
                    next += 1;
                }
            } else if every_step {
                out.push(OdeSample { t, r: y[0], r_dot: m.r_dot(&y) });
            }
            let factor = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
            // a step shortened to hit an output time says little about the next one
            h = if clipped { h.max(step * factor) } else { step * factor };
        } else {
            rejections += 1;
            let shrink = if valid { (0.9 * e.powf(-0.2)).clamp(0.1, 0.9) } else { 0.25 };
            h = step * shrink;
            if h <= 1e-15 * t.max(1.0 / rate) {
                // only a collapsing layer close to the center may stall here
                if m.sign < 0.0 && y[0] < 1e-3 * r0 {
                    floor_reached_at = Some(t);
                } else {
                    return Err(Error::StepUnderflow { t });
                }
            }
        }
    }

    let mut max_err: f64 = 0.0;
    let mut max_drift: f64 = 0.0;
    for s in &out {
        match layer_radius(coeffs, s.t) {
            Ok(rc) => max_err = max_err.max((s.r - rc).abs() / r0),
            Err(Error::PastCollapse { .. }) => {}
            Err(e) => return Err(e),
        }
        max_drift = max_drift.max(first_integral_residual(coeffs, s.r, s.r_dot).abs());
    }
    Ok(OdeResult {
        samples: out,
        max_rel_err_vs_closed_form: max_err,
        max_invariant_drift: max_drift,
        steps_taken: steps,
        rejections,
        floor_reached_at,
    })
}

/// Integrate the layer's equation of motion to `t_end`, sampling every
/// accepted step.
pub fn integrate_layer_ode(coeffs: &LayerCoefficients, t_end: f64, tol: f64) -> Result<OdeResult> {
    if !(t_end > 0.0) {
        return Err(Error::Domain(format!("t_end must be positive, got {t_end}")));
    }
    integrate(coeffs, &[0.0, t_end], tol, true)
}

/// Integrate and sample at the given times only (steps are clipped to hit
/// them exactly).
pub fn integrate_layer_ode_at(coeffs: &LayerCoefficients, times: &[f64], tol: f64) -> Result<OdeResult> {
    integrate(coeffs, times, tol, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstIntegralSpeed {
    /// Signed velocity, outward positive.
    pub velocity: f64,
    pub beta: f64,
    /// Lorentz factor (1 classically).
    pub gamma: f64,
}

fn check_reachable(coeffs: &LayerCoefficients, r: f64) -> Result<f64> {
    let x = r / coeffs.r;
    let ok = match coeffs.kind.interaction {
        Interaction::Em => x >= 1.0 && x.is_finite(),
        Interaction::Gravity => (0.0..=1.0).contains(&x),
    };
    if !ok || (coeffs.theta_sq == 0.0 && x != 1.0) {
        return Err(Error::Domain(format!("radius {r} is not reachable from {}", coeffs.r)));
    }
    Ok(x)
}

/// Layer speed at radius `R` from the energy integral.
pub fn first_integral_speed(coeffs: &LayerCoefficients, r: f64) -> Result<FirstIntegralSpeed> {
    let x = check_reachable(coeffs, r)?;
    if x == 0.0 {
        return Err(Error::Domain("speed is unbounded at the center".into()));
    }
    let gain = potential_gain(coeffs, x);
    if gain < 0.0 {
        return Err(Error::Domain(format!("negative kinetic energy at R = {r}")));
    }
    let sign = if coeffs.kind.is_expansion() { 1.0 } else { -1.0 };
    Ok(match coeffs.kind.regime {
        Regime::Relativistic => {
            let g = gain / (coeffs.c * coeffs.c);
            let beta = (g * (2.0 + g)).sqrt() / (1.0 + g);
            FirstIntegralSpeed {
                velocity: sign * beta * coeffs.c,
                beta: sign * beta,
                gamma: 1.0 + g,
            }
        }
        Regime::Classical => {
            let v = (2.0 * gain).sqrt();
            FirstIntegralSpeed {
                velocity: sign * v,
                beta: sign * v / coeffs.c,
                gamma: 1.0,
            }
        }
    })
}

// h(u) = g/u² with g the kinetic gain at R = R₀(1 ± u²), in units of c² (or
// of 1 classically).
fn gain_over_u2(coeffs: &LayerCoefficients, u: f64) -> f64 {
    let u2 = u * u;
    let scale = match coeffs.kind.regime {
        Regime::Relativistic => coeffs.c * coeffs.c,
        Regime::Classical => 1.0,
    };
    let th = coeffs.theta_sq / scale;
    let log_ratio = |v: f64| if v == 0.0 { 1.0 } else { v.ln_1p() / v };
    match (coeffs.kind.interaction, coeffs.kind.symmetry) {
        (Interaction::Em, Symmetry::Sphere) => th / coeffs.r / (1.0 + u2),
        (Interaction::Gravity, Symmetry::Sphere) => th / coeffs.r / (1.0 - u2),
        (Interaction::Em, Symmetry::Cylinder) => th * log_ratio(u2),
        (Interaction::Gravity, Symmetry::Cylinder) => th * log_ratio(-u2),
    }
}

// dt/du
fn tof_integrand(coeffs: &LayerCoefficients, u: f64) -> f64 {
    let h = gain_over_u2(coeffs, u);
    match coeffs.kind.regime {
        Regime::Relativistic => {
            let g = h * u * u;
            2.0 * coeffs.r * (1.0 + g) / (coeffs.c * (h * (2.0 + g)).sqrt())
        }
        Regime::Classical => 2.0 * coeffs.r / (2.0 * h).sqrt(),
    }
}

fn tof_param(coeffs: &LayerCoefficients, u: f64) -> Result<f64> {
    if u == 0.0 {
        return Ok(0.0);
    }
    Ok(adaptive_quad(|v| tof_integrand(coeffs, v), 0.0, u, TOF_QUAD)?.value)
}

/// Time for the layer to travel from `R₀` to `r_target`.
pub fn time_of_flight(coeffs: &LayerCoefficients, r_target: f64) -> Result<f64> {
    let x = check_reachable(coeffs, r_target)?;
    tof_param(coeffs, (x - 1.0).abs().sqrt())
}

/// Radius at time `t` obtained by inverting [`time_of_flight`].
pub fn radius_from_time_of_flight(coeffs: &LayerCoefficients, t: f64) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be finite and >= 0, got {t}")));
    }
    if t == 0.0 || coeffs.theta_sq == 0.0 {
        return Ok(coeffs.r);
    }
    let expand = coeffs.kind.is_expansion();
    let to_radius = |u: f64| {
        if expand {
            coeffs.r * (1.0 + u * u)
        } else {
            coeffs.r * ((1.0 - u) * (1.0 + u)).max(0.0)
        }
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    if expand {
        while tof_param(coeffs, hi)? < t {
            lo = hi;
            hi *= 2.0;
            if hi > 1e150 {
                return Err(Error::Domain(format!("time {t} is out of range")));
            }
        }
    } else {
        let arrival = tof_param(coeffs, 1.0)?;
        if t > arrival {
            return Err(Error::PastCollapse { value: t, endpoint: arrival });
        }
    }
    let mut u = 0.5 * (lo + hi);
    for _ in 0..200 {
        let r = tof_param(coeffs, u)? - t;
        if r > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let d = tof_integrand(coeffs, u);
        let mut next = u - r / d;
        if !(next > lo && next < hi && d.is_finite()) {
            next = 0.5 * (lo + hi);
        }
        if (next - u).abs() <= 2.0 * f64::EPSILON * u || hi - lo <= 2.0 * f64::EPSILON * hi {
            return Ok(to_radius(next));
        }
        u = next;
    }
    Err(Error::NoConvergence(format!("time-of-flight inversion at t = {t}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{forward_map, KernelKind};
    use crate::model::{layer_coefficients, InitialProfile, Scenario};

    fn uniform(kind: KernelKind, r: f64) -> LayerCoefficients {
        let mut s = Scenario::for_kind(kind);
        s.g = 0.02;
        layer_coefficients(&InitialProfile::uniform(1.0, 1.0), &s, r).unwrap()
    }

    #[test]
    fn empty_interior_stays_put() {
        let p = InitialProfile::tabulated(vec![[0.5, 1.0], [1.0, 1.0]], 1.0).unwrap();
        let c = layer_coefficients(&p, &Scenario::for_kind(KernelKind::all()[0]), 0.3).unwrap();
        let res = integrate_layer_ode_at(&c, &[0.5, 1.0, 2.0], 1e-10).unwrap();
        assert!(res.samples.iter().all(|s| s.r == 0.3 && s.r_dot == 0.0));
    }

    #[test]
    fn mid_layer_em_sphere_relativistic() {
        let c = uniform(KernelKind::all()[0], 0.5);
        let res = integrate_layer_ode(&c, 3.0 * 0.5 / c.c, 1e-10).unwrap();
        assert!(res.max_rel_err_vs_closed_form < 1e-6, "{}", res.max_rel_err_vs_closed_form);
        assert!(res.max_invariant_drift < 1e-8);
        assert!(res.samples.iter().all(|s| s.r_dot.abs() < c.c));
    }

    #[test]
    fn tof_matches_map_value() {
        for kind in KernelKind::all() {
            let c = uniform(kind, 0.7);
            let r = if kind.is_expansion() { 1.9 * c.r } else { 0.3 * c.r };
            let t = time_of_flight(&c, r).unwrap();
            let f = forward_map(kind, r / c.r, c.layer_param()).unwrap() / c.lam;
            assert!((t - f).abs() < 1e-9 * f, "{kind}: {t} vs {f}");
        }
    }

    #[test]
    fn first_integral_limits() {
        let c = uniform(KernelKind::all()[0], 0.7);
        assert_eq!(first_integral_speed(&c, c.r).unwrap().velocity, 0.0);
        let far = first_integral_speed(&c, 1e12 * c.r).unwrap().beta;
        let e2 = c.eta_sq;
        let lim = e2.sqrt() * (2.0 + e2).sqrt() / (1.0 + e2);
        assert!((far - lim).abs() < 1e-10);
        assert!(first_integral_speed(&c, 0.5 * c.r).is_err());
    }

    #[test]
    fn classical_gravity_reaches_floor_at_t_s() {
        let kind = KernelKind::all()[5];
        let s = Scenario::for_kind(kind);
        let p = InitialProfile::uniform(1.0, 1.0);
        let c = layer_coefficients(&p, &s, 0.6).unwrap();
        let ts = crate::characteristics::collapse_times(&p, &s).unwrap().t_sphere;
        let res = integrate_layer_ode(&c, 2.0 * ts, 1e-10).unwrap();
        let tf = res.floor_reached_at.expect("floor");
        assert!((tf - ts).abs() < 1e-6 * ts, "{tf} vs {ts}");
    }

    #[test]
    fn tof_inverse_roundtrip() {
        for kind in KernelKind::all() {
            let c = uniform(kind, 0.4);
            let t = 0.3 / c.lam;
            let r = radius_from_time_of_flight(&c, t).unwrap();
            let back = time_of_flight(&c, r).unwrap();
            assert!((back - t).abs() < 1e-12 * t, "{kind}");
        }
    }
}
