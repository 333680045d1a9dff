//! Quantum potential of density snapshots and the linear velocity field of
//! a uniform classical sphere.

use radyn::analysis::{effective_velocity_coefficient, quantum_potential};
use radyn::density::snapshot;
use radyn::kernels::{Interaction, Regime, Symmetry};
use radyn::model::{InitialProfile, Scenario};

fn main() -> radyn::Result<()> {
    let shell = InitialProfile::log_normal(10.0, 2.0, 0.0, 0.2);
    let s = Scenario::unit(Interaction::Em, Symmetry::Sphere, Regime::Relativistic);
    let snap = snapshot(&shell, &s, &shell.default_grid(24), 1.0)?;
    let q = quantum_potential(&snap, 1.0, 1.0)?;
    println!("log-normal shell at t = 1:");
    for p in q.points.iter().step_by(4) {
        println!("  R = {:.4}  Q = {:+.6e}{}", p.r, p.value, if p.low_confidence { "  (edge)" } else { "" });
    }

    let uniform = InitialProfile::uniform(1.0, 1.0);
    for interaction in [Interaction::Em, Interaction::Gravity] {
        let s = Scenario::unit(interaction, Symmetry::Sphere, Regime::Classical);
        println!("{interaction:?}: <v> = ±R b(t)");
        for t in [0.1, 0.3, 0.5] {
            let v = effective_velocity_coefficient(&uniform, &s, t)?;
            println!(
                "  t = {t}: P = {:.6}, b = {:.6}, db/dt = {:.6}, stiffness = {:.6} (closed form {:.6})",
                v.p, v.b, v.b_dot, v.stiffness, v.stiffness_exact
            );
        }
    }
    Ok(())
}
