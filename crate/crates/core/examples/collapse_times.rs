//! Free-fall times of uniform classical spheres and cylinders.

use radyn::characteristics::{arrival_time, collapse_times};
use radyn::kernels::{Interaction, Regime, Symmetry};
use radyn::model::{layer_coefficients, InitialProfile, Scenario};

fn main() -> radyn::Result<()> {
    let profile = InitialProfile::uniform(1.0, 1.0);
    for sym in [Symmetry::Sphere, Symmetry::Cylinder] {
        let s = Scenario::unit(Interaction::Gravity, sym, Regime::Classical);
        let ct = collapse_times(&profile, &s)?;
        println!("{sym:?}: T = {:.15} (T_s = {:.15}, T_c = {:.15}, ratio {:.15})", ct.t, ct.t_sphere, ct.t_cylinder, ct.ratio);
        for r0 in [0.01, 0.5, 1.0] {
            println!("  layer r0 = {r0:<5} reaches the center at {:.15}", arrival_time(&layer_coefficients(&profile, &s, r0)?)?);
        }
    }
    let rel = Scenario::unit(Interaction::Gravity, Symmetry::Sphere, Regime::Relativistic);
    let light = InitialProfile::uniform(0.1, 1.0);
    println!("relativistic sphere, rho0 = 0.1: arrivals are staggered");
    for r0 in [0.01, 0.5, 1.0] {
        println!("  r0 = {r0:<5} t = {:.6}", arrival_time(&layer_coefficients(&light, &rel, r0)?)?);
    }
    Ok(())
}
