//! Density snapshots of a uniformly charged sphere: the relativistic body
//! piles charge into its outer layers while the classical one stays flat.

use radyn::density::{conservation_check, snapshot};
use radyn::kernels::{Interaction, Regime, Symmetry};
use radyn::model::{InitialProfile, Scenario};

fn main() -> radyn::Result<()> {
    let profile = InitialProfile::uniform(1.0, 1.0);
    let grid = profile.default_grid(8);
    for regime in [Regime::Relativistic, Regime::Classical] {
        let s = Scenario::unit(Interaction::Em, Symmetry::Sphere, regime);
        println!("{regime:?}");
        for t in [0.0, 2.0, 10.0] {
            let snap = snapshot(&profile, &s, &grid, t)?;
            let cells: Vec<String> = snap.points.iter().map(|p| format!("{:.3e}", p.rho)).collect();
            println!("  t = {t:<5} rho = [{}]", cells.join(", "));
        }
        let drift = conservation_check(&profile, &s, 0.3, 0.9, 10.0)?;
        println!("  charge drift of shell [0.3, 0.9] at t = 10: {drift:.2e}");

        let snap = snapshot(&profile, &s, &grid, 10.0)?;
        let eulerian = snap.resample(&[5.0, 10.0, 15.0])?;
        println!("  resampled at fixed radii: {eulerian:?}");
    }
    Ok(())
}
