//! Flows of polynomial fields: the specialised solenoidal and gradient
//! formulas reproduce the general ones, and recentred variations match
//! finite differences away from t = 0.
//!
//!     cargo run --release --example flow_deformations

use hadamard_fem::deform::{expansion_fields, DeformationFamily, FlowDeformation};
use hadamard_fem::eig::solve_lowest;
use hadamard_fem::forms::{
    assemble_general_variations, assemble_gradient_variations, assemble_reference, assemble_solenoidal_variations,
    VariationScalars,
};
use hadamard_fem::hadamard::{variation_report, Problem, VariationOptions};
use hadamard_fem::mesh::generate_disk_mesh;
use hadamard_fem::poly::{Poly2, VectorField};
use hadamard_fem::quadrature::QuadratureRule;

fn show(name: &str, a: &VariationScalars, b: &VariationScalars) {
    let d = [a.adot - b.adot, a.addot - b.addot, a.bdot - b.bdot, a.bddot - b.bddot];
    let worst = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    println!("{name:<12} Adot {:+.8e}  Addot {:+.8e}  Bdot {:+.8e}  Bddot {:+.8e}  |diff| {worst:.1e}", a.adot, a.addot, a.bdot, a.bddot);
}

fn main() -> hadamard_fem::Result<()> {
    let mesh = generate_disk_mesh(3)?;
    let rule = QuadratureRule::with_degree(4);
    let forms = assemble_reference(&mesh, &rule)?;
    let phi = solve_lowest(&forms, 1, 1e-10)?.first().vector.clone();

    // v = (-y^2, x^2) is divergence free.
    let sol = FlowDeformation::solenoidal(VectorField::new(Poly2::monomial(-1.0, 0, 2), Poly2::monomial(1.0, 2, 0)), &[[0.3, 0.1]])?;
    let grad = FlowDeformation::gradient(Poly2::monomial(0.5, 2, 0).add(&Poly2::monomial(0.2, 1, 2)));
    for (name, flow) in [("solenoidal", &sol), ("gradient", &grad)] {
        let (s, r) = expansion_fields(&DeformationFamily::Flow(flow.clone()))?;
        let general = assemble_general_variations(&mesh, &s, &r, &phi, &rule)?.scalars;
        let special = if name == "solenoidal" {
            assemble_solenoidal_variations(&mesh, flow, &phi, &rule)?
        } else {
            assemble_gradient_variations(&mesh, flow, &phi, &rule)?
        }
        .scalars;
        show(name, &special, &general);
    }

    let p = Problem::new(mesh, DeformationFamily::Flow(grad));
    let r = variation_report(&p, 0.2, &VariationOptions::default())?;
    let fd = r.fd.expect("fd");
    println!("gradient flow at t = 0.2: lambda_dot {:.8e} (fd {:.8e}), lambda_ddot {:.8e} (fd {:.8e})", r.lambda_dot, fd.lambda_dot, r.lambda_ddot_exact, fd.lambda_ddot);
    Ok(())
}
