//! Invariants of the maps, the characteristic solution and the oracle,
//! checked on random inputs.

use proptest::prelude::*;

use radyn::characteristics::{arrival_time, jacobian, layer_radius, layer_speed};
use radyn::density::density_at;
use radyn::kernels::{
    d_forward_dx, d_forward_dy, forward_map, inverse_map, Interaction, KernelKind, Regime, Symmetry,
};
use radyn::model::{cumulative_number, layer_coefficients, InitialProfile, Scenario};
use radyn::oracle::{first_integral_residual, integrate_layer_ode};

fn kind_strategy() -> impl Strategy<Value = KernelKind> {
    (0usize..8).prop_map(|i| KernelKind::all()[i])
}

fn y_max(kind: KernelKind) -> f64 {
    match (kind.interaction, kind.symmetry) {
        (Interaction::Gravity, Symmetry::Sphere) => 0.95,
        _ => 3.0,
    }
}

// (kind, x, y) inside the domain, away from x = 1 and from the flat
// neighbourhood of the collapse endpoint
fn interior_point() -> impl Strategy<Value = (KernelKind, f64, f64)> {
    (kind_strategy(), 0.0..1.0f64, 0.01..1.0f64).prop_map(|(k, a, b)| {
        let x = if k.is_expansion() { 1.05 + 30.0 * a } else { 0.02 + 0.93 * a };
        let y = if k.is_relativistic() { b * y_max(k) } else { 0.0 };
        (k, x, y)
    })
}

fn richardson(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn scenario(kind: KernelKind) -> Scenario {
    let mut s = Scenario::for_kind(kind);
    if kind.interaction == Interaction::Gravity {
        s.g = 0.05;
    }
    s
}

fn log_normal(kind: KernelKind) -> InitialProfile {
    match kind.interaction {
        Interaction::Em => InitialProfile::log_normal(10.0, 2.0, 0.0, 0.2),
        Interaction::Gravity => InitialProfile::log_normal(8.0, 2.0, 0.0, 0.2),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn maps_are_monotone((k, x, y) in interior_point(), step in 1e-3..0.5f64) {
        let x2 = if k.is_expansion() { x * (1.0 + step) } else { x * (1.0 - step) };
        prop_assert!(forward_map(k, x2, y).unwrap() > forward_map(k, x, y).unwrap());
    }

    #[test]
    fn roundtrip_is_identity((k, x, y) in interior_point()) {
        let back = inverse_map(k, forward_map(k, x, y).unwrap(), y).unwrap();
        prop_assert!(rel(back, x) <= 1e-10, "{k}: {x} -> {back}");
    }

    #[test]
    fn derivatives_match_finite_differences((k, x, y) in interior_point()) {
        let fd = richardson(|v| forward_map(k, v, y).unwrap(), x, 1e-3 * x.min(1.0));
        prop_assert!(rel(d_forward_dx(k, x, y).unwrap(), fd) <= 1e-7);
        if k.is_relativistic() {
            let fd = richardson(|v| forward_map(k, x, v).unwrap(), y, 1e-3 * y);
            prop_assert!(rel(d_forward_dy(k, x, y).unwrap(), fd) <= 1e-7);
        } else {
            prop_assert_eq!(d_forward_dy(k, x, y).unwrap(), 0.0);
        }
    }

    #[test]
    fn relativistic_maps_approach_classical((k, x, _) in interior_point(), y in 1e-9..1e-4f64) {
        prop_assume!(k.is_relativistic());
        let cl = k.with_regime(Regime::Classical);
        let diff = (forward_map(k, x, y).unwrap() - forward_map(cl, x, 0.0).unwrap()).abs();
        let bound = 10.0 * y * (1.0 + forward_map(cl, x, 0.0).unwrap());
        prop_assert!(diff <= bound, "{k}: {diff} > {bound}");
    }

    #[test]
    fn enclosed_number_is_nondecreasing(k in kind_strategy(), a in 0.0..2.0f64, b in 0.0..2.0f64) {
        let (lo, hi) = (a.min(b), a.max(b));
        for p in [InitialProfile::uniform(1.0, 1.0), log_normal(k)] {
            let s = scenario(k);
            prop_assert!(cumulative_number(&p, &s, hi).unwrap() >= cumulative_number(&p, &s, lo).unwrap());
            prop_assert_eq!(cumulative_number(&p, &s, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn coefficient_derivatives_match(k in kind_strategy(), f in 0.2..0.8f64) {
        let p = log_normal(k);
        let s = scenario(k);
        let (a, b) = p.support();
        let r = a + f * (b - a);
        let c = layer_coefficients(&p, &s, r).unwrap();
        let at = |v: f64| layer_coefficients(&p, &s, v).unwrap();
        let h = 1e-3 * r;
        let pairs = [
            (c.d_theta_sq, richardson(|v| at(v).theta_sq, r, h)),
            (c.d_beta_bar_sq, richardson(|v| at(v).beta_bar_sq, r, h)),
            (c.d_eta_sq, richardson(|v| at(v).eta_sq, r, h)),
            (c.d_lam, richardson(|v| at(v).lam, r, h)),
        ];
        for (exact, fd) in pairs {
            if exact != 0.0 || fd != 0.0 {
                prop_assert!(rel(exact, fd) <= 1e-7, "{k}: {exact} vs {fd}");
            }
        }
    }

    #[test]
    fn classical_lambda_is_the_large_c_limit(k in kind_strategy(), f in 0.1..0.9f64) {
        prop_assume!(k.is_relativistic());
        let p = log_normal(k);
        let mut s = scenario(k);
        s.c *= 1e6;
        let r = p.support().0 + f * (p.support().1 - p.support().0);
        let rel_lam = layer_coefficients(&p, &s, r).unwrap().lam;
        let cl_lam = layer_coefficients(&p, &s.with_regime(Regime::Classical), r).unwrap().lam;
        prop_assert!(rel(rel_lam, cl_lam) <= 1e-4);
    }

    #[test]
    fn speeds_stay_below_c(k in kind_strategy(), f in 0.0..1.0f64, tf in 0.0..0.999f64) {
        prop_assume!(k.is_relativistic());
        let p = InitialProfile::uniform(1.0, 1.0);
        let c = layer_coefficients(&p, &scenario(k), 0.01 + 0.99 * f).unwrap();
        let t = match k.interaction {
            Interaction::Em => tf * 200.0 / c.lam,
            Interaction::Gravity => tf * arrival_time(&c).unwrap(),
        };
        prop_assert!(layer_speed(&c, t).unwrap().beta.abs() < 1.0);
    }

    #[test]
    fn algebraic_speed_matches_kinematic(k in kind_strategy(), f in 0.0..1.0f64, lt in 0.01..50.0f64) {
        prop_assume!(k.is_relativistic() && k.is_expansion());
        let p = log_normal(k);
        let (a, b) = p.support();
        let c = layer_coefficients(&p, &scenario(k), a + f * (b - a)).unwrap();
        let v = layer_speed(&c, lt / c.lam).unwrap();
        prop_assert!(rel(v.beta_algebraic.unwrap(), v.beta) <= 1e-10);
    }

    #[test]
    fn trajectories_are_monotone(k in kind_strategy(), f in 0.01..1.0f64, t1 in 0.01..0.98f64, dt in 0.001..0.02f64) {
        let p = InitialProfile::uniform(1.0, 1.0);
        let c = layer_coefficients(&p, &scenario(k), f).unwrap();
        let scale = match k.interaction {
            Interaction::Em => 20.0 / c.lam,
            Interaction::Gravity => arrival_time(&c).unwrap(),
        };
        let (ra, rb) = (layer_radius(&c, t1 * scale).unwrap(), layer_radius(&c, (t1 + dt) * scale).unwrap());
        if k.is_expansion() {
            prop_assert!(rb > ra);
        } else {
            prop_assert!(rb < ra);
        }
    }

    #[test]
    fn jacobian_matches_radius_slope(k in kind_strategy(), f in 0.2..0.8f64, tf in 0.05..0.5f64) {
        let p = log_normal(k);
        let s = scenario(k);
        let (a, b) = p.support();
        let r = a + f * (b - a);
        let c = layer_coefficients(&p, &s, r).unwrap();
        let t = tf * match k.interaction {
            Interaction::Em => 1.0 / c.lam,
            Interaction::Gravity => arrival_time(&c).unwrap(),
        };
        let fd = richardson(|v| layer_radius(&layer_coefficients(&p, &s, v).unwrap(), t).unwrap(), r, 1e-4 * r);
        prop_assert!(rel(jacobian(&c, t).unwrap(), fd) <= 1e-6);
    }

    #[test]
    fn large_c_density_matches_classical(k in kind_strategy(), f in 0.2..0.8f64, tf in 0.0..0.5f64) {
        prop_assume!(k.is_relativistic());
        let p = log_normal(k);
        let mut s = scenario(k);
        s.c *= 1e6;
        let cl = s.with_regime(Regime::Classical);
        let r = p.support().0 + f * (p.support().1 - p.support().0);
        let c = layer_coefficients(&p, &cl, r).unwrap();
        let t = tf * match k.interaction {
            Interaction::Em => 1.0 / c.lam,
            Interaction::Gravity => arrival_time(&c).unwrap(),
        };
        let a = density_at(&p, &s, r, t).unwrap().rho;
        let b = density_at(&p, &cl, r, t).unwrap().rho;
        prop_assert!(rel(a, b) <= 1e-4);
    }

    #[test]
    fn uniform_collapse_keeps_density_uniform(f in 0.01..1.0f64, tf in 0.0..0.95f64) {
        let p = InitialProfile::uniform(1.0, 1.0);
        let s = Scenario::unit(Interaction::Gravity, Symmetry::Sphere, Regime::Classical);
        let c = layer_coefficients(&p, &s, f).unwrap();
        let t = tf * arrival_time(&c).unwrap();
        let d = density_at(&p, &s, f, t).unwrap();
        let ps = d.r / f;
        prop_assert!(rel(d.rho, 1.0 / (ps * ps * ps)) <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ode_preserves_first_integral(k in kind_strategy(), f in 0.1..1.0f64) {
        let p = InitialProfile::uniform(1.0, 1.0);
        let c = layer_coefficients(&p, &scenario(k), f).unwrap();
        let t_end = match k.interaction {
            Interaction::Em => 5.0 / c.lam,
            Interaction::Gravity => 0.9 * arrival_time(&c).unwrap(),
        };
        let run = integrate_layer_ode(&c, t_end, 1e-11).unwrap();
        for s in &run.samples {
            prop_assert!(first_integral_residual(&c, s.r, s.r_dot).abs() <= 1e-8);
        }
        prop_assert!(run.max_rel_err_vs_closed_form <= 1e-6);
    }
}

#[test]
fn layers_keep_their_order_before_the_shock() {
    for kind in KernelKind::all() {
        let p = InitialProfile::uniform(1.0, 1.0);
        let s = scenario(kind);
        let grid = p.default_grid(40);
        let layers: Vec<_> = grid.iter().map(|&r| layer_coefficients(&p, &s, r).unwrap()).collect();
        let t_end = match kind.interaction {
            Interaction::Em => 20.0 / layers[0].lam,
            Interaction::Gravity => 0.95 * layers.iter().map(|c| arrival_time(c).unwrap()).fold(f64::INFINITY, f64::min),
        };
        for i in 1..=20 {
            let t = t_end * i as f64 / 20.0;
            let radii: Vec<f64> = layers.iter().map(|c| layer_radius(c, t).unwrap()).collect();
            assert!(radii.windows(2).all(|w| w[1] > w[0]), "{kind} at t = {t}");
        }
    }
}

#[test]
fn outer_layers_are_fastest_in_a_uniform_relativistic_sphere() {
    let p = InitialProfile::uniform(1.0, 1.0);
    let s = Scenario::unit(Interaction::Em, Symmetry::Sphere, Regime::Relativistic);
    let layers: Vec<_> = p.default_grid(40).iter().map(|&r| layer_coefficients(&p, &s, r).unwrap()).collect();
    for t in [0.1, 1.0, 5.0, 20.0] {
        let betas: Vec<f64> = layers.iter().map(|c| layer_speed(c, t).unwrap().beta).collect();
        assert!(betas.windows(2).all(|w| w[1] > w[0]), "t = {t}");
    }
}
