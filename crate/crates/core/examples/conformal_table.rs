//! Eigenvalues of the disk and of its image under `exp`, computed on the
//! disk mesh through the pulled-back forms.
//!
//!     cargo run --release --example conformal_table [level]

use hadamard_fem::commands::table1_rows;
use hadamard_fem::config::RunConfig;

fn main() -> hadamard_fem::Result<()> {
    let mut cfg = RunConfig::table1();
    if let Some(level) = std::env::args().nth(1) {
        cfg.mesh.level = level.parse().expect("level must be an integer");
    }
    println!("{:<8} {:>2} {:>12} {:>10} {:>9}", "domain", "k", "computed", "reference", "dev");
    for r in table1_rows(&cfg)? {
        println!(
            "{:<8} {:>2} {:>12.6} {:>10} {:>+8.3}%{}",
            r.domain,
            r.index,
            r.lambda,
            r.reference,
            100.0 * r.rel_deviation,
            if r.within_tolerance { "" } else { " *" }
        );
    }
    Ok(())
}
