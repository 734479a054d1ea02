//! Triangular meshes of the reference domain with tagged boundary edges.
//!
//! The unit disk is meshed by a concentric construction: a regular hexagon
//! is refined by quadrisection and then mapped radially onto the disk, so
//! vertices sit on circles of radius `j / 2^level` and the mesh keeps the
//! six-fold dihedral symmetry of the hexagon.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;

/// Largest refinement level accepted by [`generate_disk_mesh`].
pub const MAX_LEVEL: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryTag {
    /// `u = 0` (the set gamma_0).
    Dirichlet,
    /// `du/dn = 0` (the set gamma_1).
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainShape {
    /// Unit disk; boundary vertices are kept on `|x| = 1`.
    Disk,
    Polygon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub tag: BoundaryTag,
}

/// Angular interval `[start, start + length)` on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcInterval {
    pub start: f64,
    pub length: f64,
}

impl ArcInterval {
    pub fn new(start: f64, length: f64) -> Self {
        Self { start, length }
    }

    pub fn full_circle() -> Self {
        Self::new(0.0, TAU)
    }

    pub fn upper_half() -> Self {
        Self::new(0.0, PI)
    }

    /// Closed on the left endpoint, open on the right.
    pub fn contains(&self, angle: f64) -> bool {
        if self.length >= TAU {
            return true;
        }
        (angle - self.start).rem_euclid(TAU) < self.length
    }

    fn overlaps(&self, other: &ArcInterval) -> bool {
        if self.length <= 0.0 || other.length <= 0.0 {
            return false;
        }
        (other.start - self.start).rem_euclid(TAU) < self.length
            || (self.start - other.start).rem_euclid(TAU) < other.length
    }
}

/// Immutable triangulation with tagged boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh2D {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    refinement_level: usize,
    shape: DomainShape,
}

impl Mesh2D {
    /// Builds a mesh and checks its invariants.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        refinement_level: usize,
        shape: DomainShape,
    ) -> Result<Self> {
        let mesh = Self {
            vertices,
            triangles,
            boundary_edges,
            refinement_level,
            shape,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn refinement_level(&self) -> usize {
        self.refinement_level
    }

    pub fn shape(&self) -> DomainShape {
        self.shape
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        signed_area(&self.triangle_coords(t))
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.signed_area(t)).sum()
    }

    /// Longest edge length over all triangles.
    pub fn mesh_size(&self) -> f64 {
        let mut h: f64 = 0.0;
        for t in &self.triangles {
            for k in 0..3 {
                let p = self.vertices[t[k]];
                let q = self.vertices[t[(k + 1) % 3]];
                h = h.max(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
            }
        }
        h
    }

    pub fn count_tag(&self, tag: BoundaryTag) -> usize {
        self.boundary_edges.iter().filter(|e| e.tag == tag).count()
    }

    /// True when no edge is Dirichlet; the forms then need the `A + B` shift.
    pub fn dirichlet_is_empty(&self) -> bool {
        self.count_tag(BoundaryTag::Dirichlet) == 0
    }

    /// Per-vertex flag: vertex lies on a Dirichlet edge.
    pub fn dirichlet_vertices(&self) -> Vec<bool> {
        let mut flags = vec![false; self.vertices.len()];
        for e in &self.boundary_edges {
            if e.tag == BoundaryTag::Dirichlet {
                flags[e.vertices[0]] = true;
                flags[e.vertices[1]] = true;
            }
        }
        flags
    }

    /// Indices of the boundary vertices, in ascending order.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut flags = vec![false; self.vertices.len()];
        for e in &self.boundary_edges {
            flags[e.vertices[0]] = true;
            flags[e.vertices[1]] = true;
        }
        (0..flags.len()).filter(|&i| flags[i]).collect()
    }

    /// Quadrature points (physical) and weights (absolute) for every triangle.
    pub fn quadrature_points(&self, rule: &QuadratureRule) -> Vec<([f64; 2], f64)> {
        let mut out = Vec::with_capacity(self.triangles.len() * rule.len());
        for t in 0..self.triangles.len() {
            let tri = self.triangle_coords(t);
            let area = signed_area(&tri);
            for (p, w) in rule.map_points(&tri).into_iter().zip(&rule.weights) {
                out.push((p, w * area));
            }
        }
        out
    }

    /// Integral of a scalar function over the mesh.
    pub fn integrate<F: Fn([f64; 2]) -> f64>(&self, rule: &QuadratureRule, f: F) -> f64 {
        self.quadrature_points(rule)
            .into_iter()
            .map(|(p, w)| w * f(p))
            .sum()
    }

    fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing vertex")));
            }
            let a = self.signed_area(t);
            if !(a > 0.0) {
                return Err(Error::InvalidMesh(format!("triangle {t} has signed area {a:e}")));
            }
        }
        // Topological boundary: edges used by exactly one triangle.
        let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                *counts.entry(edge_key(tri[k], tri[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        let mut topo: Vec<(usize, usize)> = counts
            .into_iter()
            .filter(|&(_, c)| c == 1)
            .map(|(k, _)| k)
            .collect();
        topo.sort_unstable();
        let mut tagged: Vec<(usize, usize)> = self
            .boundary_edges
            .iter()
            .map(|e| edge_key(e.vertices[0], e.vertices[1]))
            .collect();
        tagged.sort_unstable();
        if tagged.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidMesh("boundary edge tagged twice".into()));
        }
        if topo != tagged {
            return Err(Error::InvalidMesh(format!(
                "tagged edges ({}) do not match the topological boundary ({})",
                tagged.len(),
                topo.len()
            )));
        }
        // Closed loops: every boundary vertex has even boundary degree.
        let mut degree = vec![0usize; nv];
        for &(a, b) in &tagged {
            degree[a] += 1;
            degree[b] += 1;
        }
        if degree.iter().any(|d| d % 2 == 1) {
            return Err(Error::InvalidMesh("boundary edges do not form closed loops".into()));
        }
        Ok(())
    }

    /// Plain-text serialization: vertex, triangle and tagged-edge sections.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let shape = match self.shape {
            DomainShape::Disk => "disk",
            DomainShape::Polygon => "polygon",
        };
        let _ = writeln!(s, "# hadamard-fem mesh");
        let _ = writeln!(s, "shape {shape}");
        let _ = writeln!(s, "level {}", self.refinement_level);
        let _ = writeln!(s, "vertices {}", self.vertices.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{:e} {:e}", v[0], v[1]);
        }
        let _ = writeln!(s, "triangles {}", self.triangles.len());
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        let _ = writeln!(s, "edges {}", self.boundary_edges.len());
        for e in &self.boundary_edges {
            let tag = match e.tag {
                BoundaryTag::Dirichlet => 'D',
                BoundaryTag::Neumann => 'N',
            };
            let _ = writeln!(s, "{} {} {}", e.vertices[0], e.vertices[1], tag);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("unexpected end of input, expected {what}"),
            })
        };
        fn header(line: (usize, &str), key: &str) -> Result<String> {
            let (n, l) = line;
            let mut it = l.split_whitespace();
            match (it.next(), it.next()) {
                (Some(k), Some(v)) if k == key => Ok(v.to_string()),
                _ => Err(Error::Parse { line: n, msg: format!("expected '{key} <value>'") }),
            }
        }
        fn num<T: std::str::FromStr>(n: usize, s: &str) -> Result<T> {
            s.parse().map_err(|_| Error::Parse { line: n, msg: format!("bad number '{s}'") })
        }
        let shape = match header(next("shape")?, "shape")?.as_str() {
            "disk" => DomainShape::Disk,
            "polygon" => DomainShape::Polygon,
            other => {
                return Err(Error::Parse { line: 0, msg: format!("unknown shape '{other}'") })
            }
        };
        let level_line = next("level")?;
        let level: usize = num(level_line.0, &header(level_line, "level")?)?;
        let nv_line = next("vertices")?;
        let nv: usize = num(nv_line.0, &header(nv_line, "vertices")?)?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (n, l) = next("vertex")?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 2 {
                return Err(Error::Parse { line: n, msg: "vertex needs two coordinates".into() });
            }
            vertices.push([num(n, f[0])?, num(n, f[1])?]);
        }
        let nt_line = next("triangles")?;
        let nt: usize = num(nt_line.0, &header(nt_line, "triangles")?)?;
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (n, l) = next("triangle")?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::Parse { line: n, msg: "triangle needs three indices".into() });
            }
            triangles.push([num(n, f[0])?, num(n, f[1])?, num(n, f[2])?]);
        }
        let ne_line = next("edges")?;
        let ne: usize = num(ne_line.0, &header(ne_line, "edges")?)?;
        let mut boundary_edges = Vec::with_capacity(ne);
        for _ in 0..ne {
            let (n, l) = next("edge")?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::Parse { line: n, msg: "edge needs two indices and a tag".into() });
            }
            let tag = match f[2] {
                "D" => BoundaryTag::Dirichlet,
                "N" => BoundaryTag::Neumann,
                other => {
                    return Err(Error::Parse { line: n, msg: format!("unknown tag '{other}'") })
                }
            };
            boundary_edges.push(BoundaryEdge { vertices: [num(n, f[0])?, num(n, f[1])?], tag });
        }
        Mesh2D::new(vertices, triangles, boundary_edges, level, shape)
    }
}

pub fn signed_area(tri: &[[f64; 2]; 3]) -> f64 {
    0.5 * ((tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1])
        - (tri[2][0] - tri[0][0]) * (tri[1][1] - tri[0][1]))
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Level-0 hexagon: centre plus six corners on the unit circle.
fn hexagon() -> Mesh2D {
    let mut vertices = vec![[0.0, 0.0]];
    for k in 0..6 {
        let th = k as f64 * PI / 3.0;
        vertices.push([th.cos(), th.sin()]);
    }
    let triangles = (0..6).map(|k| [0, 1 + k, 1 + (k + 1) % 6]).collect();
    let boundary_edges = (0..6)
        .map(|k| BoundaryEdge {
            vertices: [1 + k, 1 + (k + 1) % 6],
            tag: BoundaryTag::Dirichlet,
        })
        .collect();
    Mesh2D {
        vertices,
        triangles,
        boundary_edges,
        refinement_level: 0,
        shape: DomainShape::Disk,
    }
}

/// Quadrisection without any boundary snapping.
fn subdivide(mesh: &Mesh2D) -> Mesh2D {
    let mut vertices = mesh.vertices.clone();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<[f64; 2]>| -> usize {
        *midpoint.entry(edge_key(a, b)).or_insert_with(|| {
            let (p, q) = (vertices[a], vertices[b]);
            vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
            vertices.len() - 1
        })
    };
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for &[a, b, c] in &mesh.triangles {
        let ab = mid(a, b, &mut vertices);
        let bc = mid(b, c, &mut vertices);
        let ca = mid(c, a, &mut vertices);
        triangles.push([a, ab, ca]);
        triangles.push([ab, b, bc]);
        triangles.push([ca, bc, c]);
        triangles.push([ab, bc, ca]);
    }
    let mut boundary_edges = Vec::with_capacity(2 * mesh.boundary_edges.len());
    for e in &mesh.boundary_edges {
        let [a, b] = e.vertices;
        let m = mid(a, b, &mut vertices);
        boundary_edges.push(BoundaryEdge { vertices: [a, m], tag: e.tag });
        boundary_edges.push(BoundaryEdge { vertices: [m, b], tag: e.tag });
    }
    Mesh2D {
        vertices,
        triangles,
        boundary_edges,
        refinement_level: mesh.refinement_level + 1,
        shape: mesh.shape,
    }
}

/// Hexagon gauge: 1 on the hexagon with corners on the unit circle.
fn hex_gauge(p: [f64; 2]) -> f64 {
    let apothem = (PI / 6.0).cos();
    (0..6)
        .map(|k| {
            let th = PI / 6.0 + k as f64 * PI / 3.0;
            (p[0] * th.cos() + p[1] * th.sin()) / apothem
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Symmetric concentric triangulation of the unit disk with all edges Dirichlet.
pub fn generate_disk_mesh(level: usize) -> Result<Mesh2D> {
    if level > MAX_LEVEL {
        return Err(Error::LevelTooLarge { level, max: MAX_LEVEL });
    }
    let mut mesh = hexagon();
    for _ in 0..level {
        mesh = subdivide(&mesh);
    }
    let boundary = {
        let mut flags = vec![false; mesh.vertices.len()];
        for e in &mesh.boundary_edges {
            flags[e.vertices[0]] = true;
            flags[e.vertices[1]] = true;
        }
        flags
    };
    for (i, v) in mesh.vertices.iter_mut().enumerate() {
        let r = (v[0] * v[0] + v[1] * v[1]).sqrt();
        if r == 0.0 {
            continue;
        }
        // Rings of the refined hexagon carry gauge j / 2^level exactly;
        // boundary vertices are snapped to radius one.
        let rho = if boundary[i] { 1.0 } else { hex_gauge(*v) };
        let scale = rho / r;
        v[0] *= scale;
        v[1] *= scale;
    }
    mesh.validate()?;
    Ok(mesh)
}

/// Splits every triangle into four; disk meshes get their new boundary
/// vertices projected back onto the unit circle.
pub fn refine(mesh: &Mesh2D) -> Mesh2D {
    let mut out = subdivide(mesh);
    if out.shape == DomainShape::Disk {
        let first_new = mesh.vertices.len();
        let on_boundary: Vec<usize> = out
            .boundary_edges
            .iter()
            .flat_map(|e| e.vertices)
            .filter(|&v| v >= first_new)
            .collect();
        for v in on_boundary {
            let p = &mut out.vertices[v];
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            p[0] /= r;
            p[1] /= r;
        }
    }
    out
}

/// Retags the boundary: edges whose midpoint angle falls in one of `arcs`
/// become Neumann, all others Dirichlet.
pub fn tag_boundary(mesh: &Mesh2D, arcs: &[ArcInterval]) -> Result<Mesh2D> {
    for (i, a) in arcs.iter().enumerate() {
        if !(a.length >= 0.0) || !a.start.is_finite() {
            return Err(Error::Config(format!("invalid arc interval {a:?}")));
        }
        for b in &arcs[i + 1..] {
            if a.overlaps(b) {
                return Err(Error::OverlappingArcs(a.start, a.start + a.length));
            }
        }
    }
    let mut out = mesh.clone();
    for e in &mut out.boundary_edges {
        let (p, q) = (mesh.vertices[e.vertices[0]], mesh.vertices[e.vertices[1]]);
        let angle = (0.5 * (p[1] + q[1])).atan2(0.5 * (p[0] + q[0])).rem_euclid(TAU);
        e.tag = if arcs.iter().any(|a| a.contains(angle)) {
            BoundaryTag::Neumann
        } else {
            BoundaryTag::Dirichlet
        };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_zero_is_a_hexagon_on_the_circle() {
        let m = generate_disk_mesh(0).unwrap();
        assert_eq!(m.num_triangles(), 6);
        for v in m.boundary_vertices() {
            let p = m.vertices()[v];
            assert!(((p[0].hypot(p[1])) - 1.0).abs() < 1e-15);
        }
        assert_eq!(m.count_tag(BoundaryTag::Dirichlet), 6);
    }

    #[test]
    fn triangle_count_quadruples() {
        let base = generate_disk_mesh(0).unwrap().num_triangles();
        for k in 1..=4 {
            let m = generate_disk_mesh(k).unwrap();
            assert_eq!(m.num_triangles(), base * 4usize.pow(k as u32));
            assert_eq!(refine(&m).num_triangles(), 4 * m.num_triangles());
        }
    }

    #[test]
    fn vertices_lie_on_concentric_rings() {
        let level = 3;
        let m = generate_disk_mesh(level).unwrap();
        let n = 1usize << level;
        let mut per_ring = vec![0usize; n + 1];
        for p in m.vertices() {
            let r = p[0].hypot(p[1]) * n as f64;
            assert!((r - r.round()).abs() < 1e-12);
            per_ring[r.round() as usize] += 1;
        }
        assert_eq!(per_ring[0], 1);
        for (j, &c) in per_ring.iter().enumerate().skip(1) {
            assert_eq!(c, 6 * j);
        }
    }

    #[test]
    fn disk_area_error_decays_quadratically() {
        let errs: Vec<f64> = (2..=5)
            .map(|k| PI - generate_disk_mesh(k).unwrap().area())
            .collect();
        assert!(errs.iter().all(|&e| e > 0.0));
        assert!(errs[1] / PI < 1e-2);
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
        }
    }

    #[test]
    fn refine_snaps_boundary_midpoints() {
        let m = refine(&generate_disk_mesh(2).unwrap());
        for v in m.boundary_vertices() {
            let p = m.vertices()[v];
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-14);
        }
        assert_eq!(m.refinement_level(), 3);
        for t in 0..m.num_triangles() {
            assert!(m.signed_area(t) > 0.0);
        }
    }

    #[test]
    fn refine_inherits_tags() {
        let m = tag_boundary(&generate_disk_mesh(1).unwrap(), &[ArcInterval::upper_half()]).unwrap();
        let r = refine(&m);
        assert_eq!(r.count_tag(BoundaryTag::Neumann), 2 * m.count_tag(BoundaryTag::Neumann));
        assert_eq!(r.count_tag(BoundaryTag::Dirichlet), 2 * m.count_tag(BoundaryTag::Dirichlet));
    }

    #[test]
    fn tagging_cases() {
        let m = generate_disk_mesh(3).unwrap();
        let none = tag_boundary(&m, &[]).unwrap();
        assert_eq!(none.count_tag(BoundaryTag::Neumann), 0);
        assert!(!none.dirichlet_is_empty());

        let full = tag_boundary(&m, &[ArcInterval::full_circle()]).unwrap();
        assert!(full.dirichlet_is_empty());
        assert_eq!(full.count_tag(BoundaryTag::Neumann), m.boundary_edges().len());

        let half = tag_boundary(&m, &[ArcInterval::upper_half()]).unwrap();
        for e in half.boundary_edges() {
            let (p, q) = (half.vertices()[e.vertices[0]], half.vertices()[e.vertices[1]]);
            let my = 0.5 * (p[1] + q[1]);
            let expect = if my > 0.0 { BoundaryTag::Neumann } else { BoundaryTag::Dirichlet };
            assert_eq!(e.tag, expect);
        }
        assert_eq!(
            half.count_tag(BoundaryTag::Neumann) + half.count_tag(BoundaryTag::Dirichlet),
            half.boundary_edges().len()
        );
    }

    #[test]
    fn interval_endpoints_are_half_open() {
        let a = ArcInterval::new(1.0, 0.5);
        assert!(a.contains(1.0));
        assert!(!a.contains(1.5));
        let wrap = ArcInterval::new(6.0, 1.0);
        assert!(wrap.contains(0.2));
        assert!(!wrap.contains(0.8));
    }

    #[test]
    fn overlapping_arcs_are_rejected() {
        let m = generate_disk_mesh(1).unwrap();
        let r = tag_boundary(&m, &[ArcInterval::new(0.0, 1.0), ArcInterval::new(0.5, 1.0)]);
        assert!(matches!(r, Err(Error::OverlappingArcs(..))));
        let ok = tag_boundary(&m, &[ArcInterval::new(0.0, 1.0), ArcInterval::new(1.0, 1.0)]);
        assert!(ok.is_ok());
    }

    #[test]
    fn level_cap_is_enforced() {
        assert!(matches!(generate_disk_mesh(MAX_LEVEL + 1), Err(Error::LevelTooLarge { .. })));
    }

    #[test]
    fn text_round_trip() {
        let m = tag_boundary(&generate_disk_mesh(2).unwrap(), &[ArcInterval::new(0.3, 2.0)]).unwrap();
        let back = Mesh2D::from_text(&m.to_text()).unwrap();
        assert_eq!(back.triangles(), m.triangles());
        assert_eq!(back.boundary_edges(), m.boundary_edges());
        for (a, b) in back.vertices().iter().zip(m.vertices()) {
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn validation_catches_inverted_triangle() {
        let m = generate_disk_mesh(0).unwrap();
        let mut tris = m.triangles().to_vec();
        tris[0].swap(1, 2);
        let r = Mesh2D::new(m.vertices().to_vec(), tris, m.boundary_edges().to_vec(), 0, DomainShape::Disk);
        assert!(matches!(r, Err(Error::InvalidMesh(_))));
    }

    #[test]
    fn validation_catches_missing_boundary_edge() {
        let m = generate_disk_mesh(1).unwrap();
        let mut edges = m.boundary_edges().to_vec();
        edges.pop();
        let r = Mesh2D::new(m.vertices().to_vec(), m.triangles().to_vec(), edges, 1, DomainShape::Disk);
        assert!(r.is_err());
    }
}
