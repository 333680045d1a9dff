//! Crossing of characteristics for a log-normal shell of charge and of mass.

use radyn::characteristics::{shock_time, ShockKind};
use radyn::kernels::{Interaction, Regime, Symmetry};
use radyn::model::{InitialProfile, Scenario};

fn describe(kind: &ShockKind) -> String {
    match kind {
        ShockKind::None => "no crossing".into(),
        ShockKind::Caustic { t_c, r_c, r_star } => {
            format!("caustic at t_c = {t_c:.6}, R_c = {r_c:.6} (layer r0 = {r_star:.6})")
        }
        ShockKind::CentralCollapse { t_first, t_last, simultaneous } => {
            format!("central collapse from t = {t_first:.6} to {t_last:.6}, simultaneous: {simultaneous}")
        }
    }
}

fn main() -> radyn::Result<()> {
    let cases = [
        (Interaction::Em, InitialProfile::log_normal(10.0, 2.0, 0.0, 0.2), 4.0),
        (Interaction::Gravity, InitialProfile::log_normal(0.4, 2.0, 0.0, 0.2), 3.0),
        (Interaction::Gravity, InitialProfile::uniform(0.1, 1.0), 2.5),
    ];
    for (interaction, profile, t_max) in cases {
        for regime in [Regime::Relativistic, Regime::Classical] {
            let s = Scenario::unit(interaction, Symmetry::Sphere, regime);
            let report = shock_time(&profile, &s, &profile.default_grid(64), t_max)?;
            println!("{interaction:?} {regime:?}: {}", describe(&report.kind));
        }
    }
    Ok(())
}
