//! Runs a TOML configuration through the same command layer as the binary.
//!
//!     cargo run --release --example run_config

use hadamard_fem::commands::{cmd_solve, cmd_sweep};
use hadamard_fem::config::RunConfig;

const CONFIG: &str = r#"
modes = 3
output = "out/example"

[mesh]
level = 3
neumann_arcs = [{ start = 0.0, length = 1.0 }]

[deformation]
family = "conformal"

[deformation.map]
map = "power-series"
coefficients = [[0.0, 0.0], [1.0, 0.0], [0.2, 0.1]]

[grid]
start = 0.0
end = 0.5
points = 6
"#;

fn main() -> hadamard_fem::Result<()> {
    let cfg = RunConfig::from_toml(CONFIG)?;
    let dir = std::env::temp_dir().join("hadamard-fem-config");
    let solved = cmd_solve(&cfg, &dir)?;
    println!("{}", solved.summary);
    let swept = cmd_sweep(&cfg, &dir)?;
    println!("{}", swept.summary);
    for f in solved.files.iter().chain(&swept.files) {
        println!("wrote {}", f.display());
    }
    println!("\nround trip:\n{}", cfg.to_toml()?);
    Ok(())
}
