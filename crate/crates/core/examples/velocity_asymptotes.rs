//! Limiting expansion speeds: how the terminal speed depends on the
//! packing of the charge, and how fast layers approach it.

use radyn::characteristics::{beta_inf_from_packing, eta_from_beta_inf, layer_speed, speed_asymptote, Asymptote};
use radyn::kernels::{Interaction, Regime, Symmetry};
use radyn::model::{layer_coefficients, InitialProfile, Scenario};

fn main() -> radyn::Result<()> {
    println!("packing n -> limiting beta");
    for n in [0.1, 0.5, 1.0, 2.0, 10.0] {
        println!("  n = {n:<5} beta_inf = {:.12}", beta_inf_from_packing(n));
    }
    let (eta_sq, _) = eta_from_beta_inf(3.0_f64.sqrt() / 2.0)?;
    println!("beta_inf = sqrt(3)/2 needs eta^2 = {eta_sq:.15}");

    let profile = InitialProfile::uniform(3.0, 1.0);
    for sym in [Symmetry::Sphere, Symmetry::Cylinder] {
        let s = Scenario::unit(Interaction::Em, sym, Regime::Relativistic);
        let c = layer_coefficients(&profile, &s, 1.0)?;
        let limit = match speed_asymptote(&c)? {
            Asymptote::Beta(b) => b,
            other => panic!("unexpected asymptote {other:?}"),
        };
        println!("{sym:?}, outer layer (limit {limit:.6}):");
        for lt in [1.0, 5.0, 20.0, 50.0, 200.0] {
            let beta = layer_speed(&c, lt / c.lam)?.beta;
            println!("  lambda t = {lt:<6} beta = {beta:.6}  shortfall {:.3}%", 100.0 * (1.0 - beta / limit));
        }
    }
    Ok(())
}
