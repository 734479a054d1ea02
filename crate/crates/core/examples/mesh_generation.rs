//! Disk meshes: refinement levels, boundary tagging and text/SVG output.
//!
//!     cargo run --release --example mesh_generation

use hadamard_fem::mesh::{generate_disk_mesh, tag_boundary, ArcInterval, BoundaryTag, Mesh2D};
use hadamard_fem::plot::mesh_svg;

fn main() -> hadamard_fem::Result<()> {
    println!("{:>5} {:>9} {:>10} {:>10} {:>12}", "level", "vertices", "triangles", "h", "pi - area");
    for level in 0..=5 {
        let m = generate_disk_mesh(level)?;
        println!(
            "{level:>5} {:>9} {:>10} {:>10.5} {:>12.3e}",
            m.num_vertices(),
            m.num_triangles(),
            m.mesh_size(),
            std::f64::consts::PI - m.area()
        );
    }

    // Neumann on the upper half circle, Dirichlet elsewhere.
    let mesh = tag_boundary(&generate_disk_mesh(3)?, &[ArcInterval::upper_half()])?;
    println!(
        "\nlevel 3 with a Neumann arc: {} Dirichlet and {} Neumann edges",
        mesh.count_tag(BoundaryTag::Dirichlet),
        mesh.count_tag(BoundaryTag::Neumann)
    );

    let text = mesh.to_text();
    let back = Mesh2D::from_text(&text)?;
    assert_eq!(back.num_triangles(), mesh.num_triangles());

    let dir = std::env::temp_dir().join("hadamard-fem-mesh");
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("mesh.txt"), text)?;
    std::fs::write(dir.join("mesh.svg"), mesh_svg(&mesh, 500.0))?;
    println!("wrote {}", dir.display());
    Ok(())
}
