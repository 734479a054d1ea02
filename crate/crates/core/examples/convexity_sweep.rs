//! Sweep of lambda_1 and 1/lambda_1 along `g_t = (1 - t) z + t cos z`,
//! with the pointwise convexity certificate and the second differences.
//!
//!     cargo run --release --example convexity_sweep

use hadamard_fem::deform::DeformationFamily;
use hadamard_fem::hadamard::{sweep, uniform_grid, Problem, VariationOptions};
use hadamard_fem::holomorphic::HolomorphicMap;
use hadamard_fem::mesh::generate_disk_mesh;

fn main() -> hadamard_fem::Result<()> {
    let p = Problem::new(generate_disk_mesh(4)?, DeformationFamily::conformal(HolomorphicMap::Cos)).with_modes(2);
    let result = sweep(&p, &uniform_grid(-0.2, 0.2, 11), &VariationOptions { fd_step: None, debug: false })?;
    println!("{:>6} {:>12} {:>12} {:>14} {:>14} {:>5}", "t", "lambda_1", "1/lambda_1", "d2 (diff)", "d2 (exact)", "cert");
    for pt in &result.points {
        let r = pt.report.as_ref();
        println!(
            "{:>6.2} {:>12.6} {:>12.8} {:>14} {:>14.6e} {:>5}",
            pt.t,
            pt.lambdas[0],
            pt.inv_lambda1,
            pt.d2_inv_lambda1.map_or("-".into(), |d| format!("{d:.6e}")),
            r.map_or(f64::NAN, |r| r.inv_lambda_ddot),
            r.is_some_and(|r| r.certificate)
        );
    }
    if let Some((t, why)) = &result.truncated_at {
        println!("truncated at {t}: {why}");
    }
    println!("all certified: {}", result.all_certified());
    Ok(())
}
