//! The corrector `w` behind the exact second variation, solved on the dense
//! (bordered) and sparse (deflated CG) paths.
//!
//!     cargo run --release --example corrector

use hadamard_fem::deform::DeformationFamily;
use hadamard_fem::eig::{corrector_solve_with, solve_lowest_with, SolverOptions};
use hadamard_fem::forms::assemble_variations;
use hadamard_fem::hadamard::{corrector_energy, first_variation, second_variation_bound, Problem};
use hadamard_fem::holomorphic::HolomorphicMap;
use hadamard_fem::mesh::generate_disk_mesh;

fn main() -> hadamard_fem::Result<()> {
    let p = Problem::new(generate_disk_mesh(4)?, DeformationFamily::conformal(HolomorphicMap::Exp));
    let t = 0.5;
    let forms = p.forms_at(t)?;
    let pair = solve_lowest_with(&forms, 2, &p.solver)?.pairs[0].clone();
    let var = assemble_variations(&p.mesh, &p.family, t, &pair.vector, &p.rule)?;
    let lambda_dot = first_variation(&var.scalars, pair.lambda);
    let bound = second_variation_bound(&var.scalars, pair.lambda, lambda_dot, 1)?;

    for (name, threshold) in [("dense", usize::MAX), ("sparse", 0)] {
        let opts = SolverOptions { dense_threshold: threshold, ..p.solver };
        let w = corrector_solve_with(&forms, &var.matrices, &pair, lambda_dot, &opts)?;
        let e = corrector_energy(&forms, pair.lambda, &w);
        println!("{name:>6}: corrector energy {e:.12e}, lambda_ddot {:.12e} (bound {bound:.12e})", bound - 2.0 * e);
    }
    Ok(())
}
