//! Dirichlet spectrum of the unit disk under refinement, against squared
//! Bessel zeros.
//!
//!     cargo run --release --example disk_spectrum

use hadamard_fem::eig::{solve_lowest, DEFAULT_TOL};
use hadamard_fem::forms::assemble_reference;
use hadamard_fem::mesh::generate_disk_mesh;
use hadamard_fem::quadrature::QuadratureRule;

// j_{0,1}^2, j_{1,1}^2 (twice), j_{2,1}^2 (twice)
const EXACT: [f64; 5] = [5.783185962946784, 14.681970642123893, 14.681970642123893, 26.374616427163378, 26.374616427163378];

fn main() -> hadamard_fem::Result<()> {
    let rule = QuadratureRule::with_degree(4);
    for level in 2..=5 {
        let mesh = generate_disk_mesh(level)?;
        let forms = assemble_reference(&mesh, &rule)?;
        let s = solve_lowest(&forms, 5, DEFAULT_TOL)?;
        let dev: Vec<String> = s
            .lambdas()
            .iter()
            .zip(EXACT)
            .map(|(l, e)| format!("{:+.3}%", 100.0 * (l - e) / e))
            .collect();
        println!("level {level} ({} dofs): lambda_1 = {:.6}  deviations {}", forms.num_free(), s.first().lambda, dev.join(" "));
    }
    Ok(())
}
