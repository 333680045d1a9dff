//! Forward and inverse characteristic maps for every kernel kind.

use radyn::kernels::{forward_map, inverse_map, Interaction, KernelKind};

fn main() -> radyn::Result<()> {
    println!("{:<26} {:>8} {:>6} {:>22} {:>22}", "kind", "x", "y", "F(x, y)", "inverse");
    for kind in KernelKind::all() {
        let y = if kind.is_relativistic() { 0.3 } else { 0.0 };
        let xs: &[f64] = match kind.interaction {
            Interaction::Em => &[1.0, 1.5, 4.0, 20.0],
            Interaction::Gravity => &[1.0, 0.7, 0.3, 0.05],
        };
        for &x in xs {
            let f = forward_map(kind, x, y)?;
            println!("{:<26} {x:>8} {y:>6} {f:>22.15e} {:>22.15e}", kind.to_string(), inverse_map(kind, f, y)?);
        }
    }
    Ok(())
}
