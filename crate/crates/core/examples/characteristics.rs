//! Layer trajectories of a uniformly charged sphere: radius and speed of a
//! few layers over time, relativistic and classical.

use radyn::characteristics::trajectory;
use radyn::kernels::{Interaction, Regime, Symmetry};
use radyn::model::{layer_coefficients, InitialProfile, Scenario};

fn main() -> radyn::Result<()> {
    let profile = InitialProfile::uniform(1.0, 1.0);
    let times: Vec<f64> = (0..=5).map(|i| 2.0 * i as f64).collect();
    for regime in [Regime::Relativistic, Regime::Classical] {
        let s = Scenario::unit(Interaction::Em, Symmetry::Sphere, regime);
        println!("{regime:?}");
        for r0 in [0.25, 0.5, 1.0] {
            let traj = trajectory(&layer_coefficients(&profile, &s, r0)?, &times)?;
            let cells: Vec<String> = traj
                .samples
                .iter()
                .map(|p| format!("R={:.3} b={:.3}", p.r, p.beta))
                .collect();
            println!("  r0={r0:<5} {}", cells.join("  "));
            println!("           limit: {:?}", traj.asymptote);
        }
    }
    Ok(())
}
