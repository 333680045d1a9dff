//! Drive the solver from a scenario file, the way the command line does.

use radyn::cli::{execute, Command, RunArgs};

fn main() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/gravity_sphere_uniform_classical.json");
    let args = RunArgs {
        scenario: path,
        out: None,
        t_max: None,
        layers: Some(4),
        samples: Some(3),
        regime: None,
        seed: None,
    };
    for cmd in [Command::Collapse(args.clone()), Command::Characteristics(args)] {
        match execute(&cmd) {
            Ok(outputs) => {
                for o in outputs {
                    print!("{}", o.contents);
                }
            }
            Err(e) => eprintln!("failed with exit code {}: {e}", e.exit_code()),
        }
    }
}
