//! The inequality and identity checks for a conformal map, as a table.
//!
//!     cargo run --release --example verify_checks [cos|exp]

use hadamard_fem::commands::verify_suite;
use hadamard_fem::config::RunConfig;
use hadamard_fem::deform::DeformationFamily;
use hadamard_fem::holomorphic::HolomorphicMap;
use hadamard_fem::verify::format_reports;

fn main() -> hadamard_fem::Result<()> {
    let map = match std::env::args().nth(1).as_deref() {
        Some("cos") => HolomorphicMap::Cos,
        _ => HolomorphicMap::Exp,
    };
    let mut cfg = RunConfig::table1();
    cfg.deformation = DeformationFamily::conformal(map);
    let reports = verify_suite(&cfg)?;
    print!("{}", format_reports(&reports));
    let failures = reports.iter().filter(|r| r.is_blocking_failure()).count();
    println!("{failures} blocking failure(s)");
    Ok(())
}
