//! First and second variations of lambda_1 against central differences,
//! for a general expansion, a flow and a conformal blend.
//!
//!     cargo run --release --example hadamard_variations

use hadamard_fem::deform::DeformationFamily;
use hadamard_fem::hadamard::{variation_report, Problem, VariationOptions};
use hadamard_fem::holomorphic::HolomorphicMap;
use hadamard_fem::mesh::generate_disk_mesh;
use hadamard_fem::poly::{Poly2, VectorField};

fn main() -> hadamard_fem::Result<()> {
    let mesh = generate_disk_mesh(4)?;
    let shear = DeformationFamily::General(hadamard_fem::deform::GeneralDeformation {
        s: VectorField::new(Poly2::y().scale(0.3), Poly2::monomial(0.2, 2, 0)),
        r: VectorField::new(Poly2::monomial(0.1, 1, 1), Poly2::zero()),
    });
    let cases = [
        ("scaling (1+t)x", DeformationFamily::scaling(), 0.0),
        ("polynomial expansion", shear, 0.0),
        ("flow of v = x", DeformationFamily::scaling_flow(), 0.1),
        ("blend with cos", DeformationFamily::conformal(HolomorphicMap::Cos), 0.1),
    ];
    let opts = VariationOptions::default();
    for (name, family, t) in cases {
        let p = Problem::new(mesh.clone(), family);
        let r = variation_report(&p, t, &opts)?;
        let fd = r.fd.expect("fd step set");
        println!("{name} at t = {t}:");
        println!("  lambda_1      {:.10}", r.lambda);
        println!("  lambda_dot    {:+.10e}   fd {:+.10e}", r.lambda_dot, fd.lambda_dot);
        println!("  lambda_ddot   {:+.10e}   fd {:+.10e}", r.lambda_ddot_exact, fd.lambda_ddot);
        println!("  bound         {:+.10e}", r.lambda_ddot_bound);
    }
    // Scaling: lambda(t) = lambda / (1+t)^2, so lambda_dot = -2 lambda and
    // lambda_ddot = 6 lambda at t = 0.
    Ok(())
}
