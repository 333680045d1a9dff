//! Closed-form trajectories against direct ODE integration and
//! time-of-flight quadrature, for every kernel kind.

use radyn::characteristics::{arrival_time, layer_radius};
use radyn::kernels::{Interaction, KernelKind};
use radyn::model::{layer_coefficients, InitialProfile, Scenario};
use radyn::oracle::{integrate_layer_ode_at, radius_from_time_of_flight};

fn main() -> radyn::Result<()> {
    let profile = InitialProfile::uniform(1.0, 1.0);
    println!("{:<26} {:>12} {:>12} {:>12}", "kind", "ode err", "tof err", "drift");
    for kind in KernelKind::all() {
        let mut s = Scenario::for_kind(kind);
        s.g = 0.05;
        let c = layer_coefficients(&profile, &s, 0.7)?;
        let t_end = match kind.interaction {
            Interaction::Em => 3.0,
            Interaction::Gravity => 0.95 * arrival_time(&c)?,
        };
        let times: Vec<f64> = (0..=40).map(|i| t_end * i as f64 / 40.0).collect();
        let ode = integrate_layer_ode_at(&c, &times, 1e-11)?;
        let mut tof: f64 = 0.0;
        for &t in &times[1..] {
            tof = tof.max((radius_from_time_of_flight(&c, t)? - layer_radius(&c, t)?).abs() / c.r);
        }
        println!(
            "{:<26} {:>12.3e} {:>12.3e} {:>12.3e}",
            kind.to_string(),
            ode.max_rel_err_vs_closed_form,
            tof,
            ode.max_invariant_drift
        );
    }
    Ok(())
}
