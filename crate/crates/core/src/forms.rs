//! Pulled-back bilinear forms and their `t`-derivatives on the P1 space.
//!
//! For `y = T_t x` the Dirichlet form and the `L^2` product on `T_t(D)`
//! become `A_t(u,v) = int Q_t[grad u, grad v] a_t dx` and
//! `B_t(u,v) = int u v a_t dx` on the reference mesh. Every form here is a
//! weighted stiffness `int G[grad u, grad v]` plus a weighted mass
//! `int c u v`, so one element kernel serves all of them.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::deform::{
    eval_jacobian, expansion_fields, flow_map, ConformalBlend, DeformationFamily, FlowCategory, FlowDeformation,
    GradientFlowData, PotentialDerivatives,
};
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::Mesh2D;
use crate::poly::VectorField;
use crate::quadrature::QuadratureRule;

/// Element stiffness and mass matrices.
type ElementPair = ([[f64; 3]; 3], [[f64; 3]; 3]);

/// Vertex <-> free-dof numbering; Dirichlet vertices are eliminated.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    free_of_vertex: Vec<Option<usize>>,
    vertex_of_free: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &Mesh2D) -> Self {
        let dirichlet = mesh.dirichlet_vertices();
        let mut free_of_vertex = vec![None; mesh.num_vertices()];
        let mut vertex_of_free = Vec::new();
        for (v, &d) in dirichlet.iter().enumerate() {
            if !d {
                free_of_vertex[v] = Some(vertex_of_free.len());
                vertex_of_free.push(v);
            }
        }
        Self { free_of_vertex, vertex_of_free }
    }

    pub fn num_free(&self) -> usize {
        self.vertex_of_free.len()
    }

    pub fn free_index(&self, vertex: usize) -> Option<usize> {
        self.free_of_vertex[vertex]
    }

    pub fn vertex(&self, free: usize) -> usize {
        self.vertex_of_free[free]
    }

    /// Expands a free-dof vector to all vertices (zero on Dirichlet vertices).
    pub fn expand(&self, u: &[f64]) -> Vec<f64> {
        self.free_of_vertex.iter().map(|f| f.map_or(0.0, |i| u[i])).collect()
    }
}

/// Stiffness `K` (= `A_t`) and mass `M` (= `B_t`) on the free dofs.
#[derive(Debug, Clone)]
pub struct AssembledForms {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    pub dofs: DofMap,
    /// `K` holds `A + B` because the Dirichlet set is empty.
    pub shift_applied: bool,
    pub t: f64,
}

impl AssembledForms {
    /// Amount added to eigenvalues by the `A + B` shift.
    pub fn shift(&self) -> f64 {
        if self.shift_applied {
            1.0
        } else {
            0.0
        }
    }

    pub fn num_free(&self) -> usize {
        self.dofs.num_free()
    }

    /// `C = A - lambda B` for a true (unshifted) eigenvalue `lambda`.
    pub fn pencil(&self, lambda: f64) -> CsrMatrix {
        self.stiffness.linear_combination(1.0, &self.mass, -(lambda + self.shift()))
    }
}

/// Matrices of the first and second `t`-derivatives of `A_t` and `B_t`.
#[derive(Debug, Clone)]
pub struct VariationMatrices {
    pub adot: CsrMatrix,
    pub addot: CsrMatrix,
    pub bdot: CsrMatrix,
    pub bddot: CsrMatrix,
}

/// Derivative forms evaluated at the eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct VariationScalars {
    pub adot: f64,
    pub addot: f64,
    pub bdot: f64,
    pub bddot: f64,
}

impl VariationScalars {
    pub fn zero() -> Self {
        Self { adot: 0.0, addot: 0.0, bdot: 0.0, bddot: 0.0 }
    }
}

#[derive(Debug, Clone)]
pub struct Variations {
    pub matrices: VariationMatrices,
    pub scalars: VariationScalars,
}

impl VariationMatrices {
    pub fn at(&self, phi: &[f64]) -> VariationScalars {
        VariationScalars {
            adot: self.adot.quad_form(phi),
            addot: self.addot.quad_form(phi),
            bdot: self.bdot.quad_form(phi),
            bddot: self.bddot.quad_form(phi),
        }
    }

    fn into_variations(self, phi: &[f64]) -> Variations {
        let scalars = self.at(phi);
        Variations { matrices: self, scalars }
    }
}

/// Pointwise coefficients `(G, c)` of a weighted stiffness and mass.
type Coefficient = (Matrix2<f64>, f64);

struct Element {
    coords: [[f64; 2]; 3],
    area: f64,
    grads: [[f64; 2]; 3],
}

fn element(mesh: &Mesh2D, t: usize) -> Element {
    let c = mesh.triangle_coords(t);
    let area = mesh.signed_area(t);
    let inv2a = 0.5 / area;
    let grads = [
        [(c[1][1] - c[2][1]) * inv2a, (c[2][0] - c[1][0]) * inv2a],
        [(c[2][1] - c[0][1]) * inv2a, (c[0][0] - c[2][0]) * inv2a],
        [(c[0][1] - c[1][1]) * inv2a, (c[1][0] - c[0][0]) * inv2a],
    ];
    Element { coords: c, area, grads }
}

/// Assembles `int G[grad phi_i, grad phi_j]` and `int c phi_i phi_j` over
/// the free dofs. Element work runs in parallel; the reduction is serial in
/// element order so the result does not depend on the thread count.
fn assemble_weighted<F>(mesh: &Mesh2D, dofs: &DofMap, rule: &QuadratureRule, coeff: F) -> Result<(CsrMatrix, CsrMatrix)>
where
    F: Fn([f64; 2]) -> Result<Coefficient> + Sync,
{
    let per_element: Vec<Result<ElementPair>> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let e = element(mesh, t);
            let pts = rule.map_points(&e.coords);
            let mut g_int = Matrix2::zeros();
            let mut mass = [[0.0; 3]; 3];
            for ((p, w), l) in pts.iter().zip(&rule.weights).zip(&rule.points) {
                let (g, c) = coeff(*p)?;
                let wa = w * e.area;
                g_int += g * wa;
                for i in 0..3 {
                    for j in 0..=i {
                        mass[i][j] += wa * c * l[i] * l[j];
                    }
                }
            }
            let mut stiff = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..=i {
                    let gi = &e.grads[i];
                    let gj = &e.grads[j];
                    // symmetric part of G only
                    let v = gi[0] * gj[0] * g_int[(0, 0)]
                        + gi[1] * gj[1] * g_int[(1, 1)]
                        + 0.5 * (gi[0] * gj[1] + gi[1] * gj[0]) * (g_int[(0, 1)] + g_int[(1, 0)]);
                    stiff[i][j] = v;
                    stiff[j][i] = v;
                    mass[j][i] = mass[i][j];
                }
            }
            Ok((stiff, mass))
        })
        .collect();
    let n = dofs.num_free();
    let mut ks = Vec::with_capacity(9 * mesh.num_triangles());
    let mut ms = Vec::with_capacity(9 * mesh.num_triangles());
    for (t, res) in per_element.into_iter().enumerate() {
        let (stiff, mass) = res?;
        let verts = mesh.triangles()[t];
        for i in 0..3 {
            let Some(fi) = dofs.free_index(verts[i]) else { continue };
            for j in 0..3 {
                let Some(fj) = dofs.free_index(verts[j]) else { continue };
                ks.push((fi, fj, stiff[i][j]));
                ms.push((fi, fj, mass[i][j]));
            }
        }
    }
    Ok((CsrMatrix::from_triplets(n, n, ks), CsrMatrix::from_triplets(n, n, ms)))
}

/// `A_t`, `B_t` on the free dofs; `K <- K + M` when there is no Dirichlet edge.
pub fn assemble_pulled_back(
    mesh: &Mesh2D,
    family: &DeformationFamily,
    t: f64,
    rule: &QuadratureRule,
) -> Result<AssembledForms> {
    let dofs = DofMap::new(mesh);
    let (mut stiffness, mass) = assemble_weighted(mesh, &dofs, rule, |x| {
        let j = eval_jacobian(family, t, x)?;
        Ok((j.qa, j.a))
    })?;
    for i in 0..mass.nrows() {
        if !(mass.get(i, i) > 0.0) {
            return Err(Error::SingularMass(i));
        }
    }
    let shift_applied = mesh.dirichlet_is_empty();
    if shift_applied {
        stiffness = stiffness.linear_combination(1.0, &mass, 1.0);
    }
    Ok(AssembledForms { stiffness, mass, dofs, shift_applied, t })
}

/// Plain stiffness and mass (identity deformation).
pub fn assemble_reference(mesh: &Mesh2D, rule: &QuadratureRule) -> Result<AssembledForms> {
    assemble_pulled_back(mesh, &DeformationFamily::Identity, 0.0, rule)
}

fn div_and_contraction(ds: &Matrix2<f64>) -> (f64, f64) {
    // (div S, DS^T : DS = tr(DS^2))
    (ds.trace(), (ds * ds).trace())
}

/// Derivative integrands at `t = 0` for `T_t = I + tS + t^2/2 R`:
/// first order `(-(DS^T + DS) + div S E, div S)`, second order
/// `(W^T + W + 2 DS DS^T - 2 div S (DS^T + DS) + b E, b)` with
/// `W = 2 DS^2 - DR` and `b = div R + (div S)^2 - DS^T : DS`.
pub fn general_coefficients(ds: &Matrix2<f64>, dr: &Matrix2<f64>) -> (Coefficient, Coefficient) {
    let e = Matrix2::identity();
    let (div_s, contr) = div_and_contraction(ds);
    let sym = ds + ds.transpose();
    let g1 = -sym + e * div_s;
    let w = ds * ds * 2.0 - dr;
    let b = dr.trace() + div_s * div_s - contr;
    let g2 = w.transpose() + w + ds * ds.transpose() * 2.0 - sym * (2.0 * div_s) + e * b;
    ((g1, div_s), (g2, b))
}

/// Divergence-free specialization: no mass variation.
pub fn solenoidal_coefficients(ds: &Matrix2<f64>, dr: &Matrix2<f64>) -> (Coefficient, Coefficient) {
    let w = ds * ds * 2.0 - dr;
    let g1 = -(ds + ds.transpose());
    let g2 = w.transpose() + w + ds * ds.transpose() * 2.0;
    ((g1, 0.0), (g2, 0.0))
}

/// Gradient-flow specialization in terms of `H`, `K`.
pub fn gradient_coefficients(d: &GradientFlowData) -> (Coefficient, Coefficient) {
    let e = Matrix2::identity();
    let h = d.h;
    let g1 = h * -2.0 + e * d.tr_h;
    let b = d.tr_h * d.tr_h + 0.5 * d.tr_k - d.h_norm2;
    let g2 = h * h * 6.0 - d.k - h * (4.0 * d.tr_h) + e * b;
    ((g1, d.tr_h), (g2, b))
}

fn assemble_pair<F>(mesh: &Mesh2D, rule: &QuadratureRule, phi: &[f64], coeffs: F) -> Result<Variations>
where
    F: Fn([f64; 2]) -> Result<(Coefficient, Coefficient)> + Sync,
{
    let dofs = DofMap::new(mesh);
    if phi.len() != dofs.num_free() {
        return Err(Error::ModeMismatch(format!(
            "coefficient vector has {} entries, mesh has {} free dofs",
            phi.len(),
            dofs.num_free()
        )));
    }
    let (adot, bdot) = assemble_weighted(mesh, &dofs, rule, |x| Ok(coeffs(x)?.0))?;
    let (addot, bddot) = assemble_weighted(mesh, &dofs, rule, |x| Ok(coeffs(x)?.1))?;
    Ok(VariationMatrices { adot, addot, bdot, bddot }.into_variations(phi))
}

/// Variations at `t = 0` for expansion fields `S`, `R`.
pub fn assemble_general_variations(
    mesh: &Mesh2D,
    s: &VectorField,
    r: &VectorField,
    phi: &[f64],
    rule: &QuadratureRule,
) -> Result<Variations> {
    assemble_pair(mesh, rule, phi, |x| Ok(general_coefficients(&s.jacobian(x), &r.jacobian(x))))
}

fn check_solenoidal(mesh: &Mesh2D, flow: &FlowDeformation, rule: &QuadratureRule) -> Result<()> {
    let pts: Vec<[f64; 2]> = mesh.quadrature_points(rule).into_iter().map(|(p, _)| p).collect();
    FlowDeformation::solenoidal(flow.field.clone(), &pts).map(|_| ())
}

/// Divergence-free flow at `t = 0`: `Bdot = Bddot = 0`.
pub fn assemble_solenoidal_variations(
    mesh: &Mesh2D,
    flow: &FlowDeformation,
    phi: &[f64],
    rule: &QuadratureRule,
) -> Result<Variations> {
    check_solenoidal(mesh, flow, rule)?;
    let r = flow.field.convective();
    assemble_pair(mesh, rule, phi, |x| Ok(solenoidal_coefficients(&flow.field.jacobian(x), &r.jacobian(x))))
}

/// Gradient flow `v = grad mu` at `t = 0`.
pub fn assemble_gradient_variations(
    mesh: &Mesh2D,
    flow: &FlowDeformation,
    phi: &[f64],
    rule: &QuadratureRule,
) -> Result<Variations> {
    let mu = flow
        .potential()
        .ok_or_else(|| Error::CategoryMismatch("gradient formulas need a scalar potential".into()))?;
    let pd = PotentialDerivatives::new(mu);
    assemble_pair(mesh, rule, phi, |x| Ok(gradient_coefficients(&pd.eval(x))))
}

/// Conformal blend at `t`: the stiffness is `t`-independent, so only
/// `Bdot = int phi^2 da/dt` and `Bddot = int phi^2 d^2a/dt^2` survive.
pub fn assemble_conformal_variations(
    mesh: &Mesh2D,
    blend: &ConformalBlend,
    t: f64,
    phi: &[f64],
    rule: &QuadratureRule,
) -> Result<Variations> {
    let zero = Matrix2::zeros();
    assemble_pair(mesh, rule, phi, |x| {
        let (a, da, d2a) = blend.jacobian_derivatives(t, Complex64::new(x[0], x[1]));
        if !(a > 0.0) {
            return Err(Error::NonPositiveJacobian { a, t, x: x[0], y: x[1] });
        }
        Ok(((zero, da), (zero, d2a)))
    })
}

/// Flow variations at `t = s`, obtained from the `t = 0` integrands of the
/// flow recentred at `T_s`: with `y = T_s x` and `J = DT_s(x)`,
/// `G(x) = a_s J^{-1} G_0(y) J^{-T}` and `c(x) = a_s c_0(y)`.
pub fn assemble_flow_variations_at(
    mesh: &Mesh2D,
    flow: &FlowDeformation,
    s: f64,
    phi: &[f64],
    rule: &QuadratureRule,
) -> Result<Variations> {
    if flow.category == FlowCategory::Solenoidal {
        check_solenoidal(mesh, flow, rule)?;
    }
    let r = flow.field.convective();
    let potential = flow.potential().map(PotentialDerivatives::new);
    assemble_pair(mesh, rule, phi, |x| {
        let (y, j) = flow_map(flow, s, x)?;
        let a = j.determinant();
        if !(a > 0.0) {
            return Err(Error::NonPositiveJacobian { a, t: s, x: x[0], y: x[1] });
        }
        let (first, second) = match (&flow.category, &potential) {
            (FlowCategory::Gradient { .. }, Some(pd)) => gradient_coefficients(&pd.eval(y)),
            (FlowCategory::Solenoidal, _) => solenoidal_coefficients(&flow.field.jacobian(y), &r.jacobian(y)),
            _ => general_coefficients(&flow.field.jacobian(y), &r.jacobian(y)),
        };
        let jinv = j.try_inverse().ok_or(Error::NonPositiveJacobian { a, t: s, x: x[0], y: x[1] })?;
        let pull = |g: Matrix2<f64>| jinv * g * jinv.transpose() * a;
        Ok(((pull(first.0), a * first.1), (pull(second.0), a * second.1)))
    })
}

/// Dispatches to the variation formulas of `family` at parameter `t`.
pub fn assemble_variations(
    mesh: &Mesh2D,
    family: &DeformationFamily,
    t: f64,
    phi: &[f64],
    rule: &QuadratureRule,
) -> Result<Variations> {
    match family {
        DeformationFamily::Identity => {
            let zero = Matrix2::zeros();
            assemble_pair(mesh, rule, phi, |_| Ok(((zero, 0.0), (zero, 0.0))))
        }
        DeformationFamily::General(_) => {
            if t != 0.0 {
                return Err(Error::Unsupported("general families are differentiated at t = 0 only"));
            }
            let (s, r) = expansion_fields(family)?;
            assemble_general_variations(mesh, &s, &r, phi, rule)
        }
        DeformationFamily::Flow(f) => assemble_flow_variations_at(mesh, f, t, phi, rule),
        DeformationFamily::Conformal(c) => assemble_conformal_variations(mesh, c, t, phi, rule),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holomorphic::HolomorphicMap;
    use crate::mesh::{generate_disk_mesh, tag_boundary, ArcInterval};
    use crate::poly::{Poly2, Term};

    fn rule() -> QuadratureRule {
        QuadratureRule::six_point()
    }

    fn test_vector(n: usize) -> Vec<f64> {
        (0..n).map(|i| ((i as f64) * 0.731).sin() + 0.3).collect()
    }

    #[test]
    fn identity_forms_are_symmetric_and_positive() {
        let mesh = generate_disk_mesh(2).unwrap();
        let f = assemble_reference(&mesh, &rule()).unwrap();
        assert!(f.stiffness.is_symmetric_exact());
        assert!(f.mass.is_symmetric_exact());
        assert!(!f.shift_applied);
        // mass of the constant over all vertices = polygon area
        let all = generate_disk_mesh(2).unwrap();
        let neu = tag_boundary(&all, &[ArcInterval::full_circle()]).unwrap();
        let fn_ = assemble_reference(&neu, &rule()).unwrap();
        let ones = vec![1.0; fn_.num_free()];
        assert!((fn_.mass.quad_form(&ones) - neu.area()).abs() < 1e-13);
        assert!(fn_.shift_applied);
        // K - M is the plain stiffness, which annihilates constants
        let plain = fn_.stiffness.linear_combination(1.0, &fn_.mass, -1.0);
        assert!(plain.quad_form(&ones).abs() < 1e-12);
    }

    #[test]
    fn scaling_leaves_stiffness_and_scales_mass() {
        let mesh = generate_disk_mesh(2).unwrap();
        let f0 = assemble_reference(&mesh, &rule()).unwrap();
        let t = 0.3;
        let ft = assemble_pulled_back(&mesh, &DeformationFamily::scaling(), t, &rule()).unwrap();
        assert_eq!(ft.stiffness, f0.stiffness);
        let scaled = f0.mass.scaled((1.0 + t) * (1.0 + t));
        for i in 0..ft.num_free() {
            for (j, v) in ft.mass.row(i) {
                assert!((v - scaled.get(i, j)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn conformal_stiffness_is_t_independent() {
        let mesh = generate_disk_mesh(2).unwrap();
        let fam = DeformationFamily::conformal(HolomorphicMap::Cos);
        let a = assemble_pulled_back(&mesh, &fam, -0.15, &rule()).unwrap();
        let b = assemble_pulled_back(&mesh, &fam, 0.2, &rule()).unwrap();
        assert_eq!(a.stiffness, b.stiffness);
        assert_ne!(a.mass, b.mass);
    }

    #[test]
    fn assembly_is_deterministic_across_thread_counts() {
        let mesh = generate_disk_mesh(3).unwrap();
        let fam = DeformationFamily::conformal(HolomorphicMap::Exp);
        let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let a = serial.install(|| assemble_pulled_back(&mesh, &fam, 0.7, &rule()).unwrap());
        let b = assemble_pulled_back(&mesh, &fam, 0.7, &rule()).unwrap();
        assert_eq!(a.stiffness, b.stiffness);
        assert_eq!(a.mass, b.mass);
    }

    #[test]
    fn translation_has_no_variation() {
        let mesh = generate_disk_mesh(2).unwrap();
        let phi = test_vector(DofMap::new(&mesh).num_free());
        let v = assemble_general_variations(&mesh, &VectorField::translation(0.4, -1.0), &VectorField::zero(), &phi, &rule())
            .unwrap();
        assert_eq!(v.scalars, VariationScalars::zero());
    }

    #[test]
    fn scaling_variation_scalars() {
        let mesh = generate_disk_mesh(3).unwrap();
        let f0 = assemble_reference(&mesh, &rule()).unwrap();
        let mut phi = test_vector(f0.num_free());
        let norm = f0.mass.quad_form(&phi).sqrt();
        phi.iter_mut().for_each(|x| *x /= norm);
        // T_t = (1+t) x: S = x, R = 0
        let v = assemble_general_variations(&mesh, &VectorField::scaling(), &VectorField::zero(), &phi, &rule()).unwrap();
        assert!(v.scalars.adot.abs() < 1e-13);
        assert!(v.scalars.addot.abs() < 1e-13);
        assert!((v.scalars.bdot - 2.0).abs() < 1e-13);
        assert!((v.scalars.bddot - 2.0).abs() < 1e-13);
        // flow e^t x: S = R = x, a_t = e^{2t}
        let w = assemble_general_variations(&mesh, &VectorField::scaling(), &VectorField::scaling(), &phi, &rule()).unwrap();
        assert!((w.scalars.bdot - 2.0).abs() < 1e-13);
        assert!((w.scalars.bddot - 4.0).abs() < 1e-13);
        assert!(w.scalars.addot.abs() < 1e-13);
    }

    #[test]
    fn rotation_variation_vanishes() {
        let mesh = generate_disk_mesh(3).unwrap();
        let phi = test_vector(DofMap::new(&mesh).num_free());
        let (s, r) = expansion_fields(&DeformationFamily::rotation_flow()).unwrap();
        let v = assemble_general_variations(&mesh, &s, &r, &phi, &rule()).unwrap();
        assert!(v.scalars.adot.abs() < 1e-14);
        assert!(v.scalars.bdot.abs() < 1e-14 && v.scalars.bddot.abs() < 1e-14);
        // W = 2 DS^2 - DR = -2E + E = -E; W^T + W + 2 DS DS^T = 0
        assert!(v.scalars.addot.abs() < 1e-12);
    }

    #[test]
    fn specializations_agree_with_general_formulas() {
        let mesh = generate_disk_mesh(3).unwrap();
        let phi = test_vector(DofMap::new(&mesh).num_free());
        let mus = vec![
            Poly2::new(vec![Term { coeff: 0.5, px: 2, py: 0 }, Term { coeff: 0.5, px: 0, py: 2 }]),
            Poly2::new(vec![
                Term { coeff: 0.2, px: 3, py: 0 },
                Term { coeff: -0.3, px: 1, py: 2 },
                Term { coeff: 0.1, px: 2, py: 1 },
                Term { coeff: 0.05, px: 4, py: 0 },
            ]),
            Poly2::new(vec![Term { coeff: 0.7, px: 2, py: 0 }, Term { coeff: -0.7, px: 0, py: 2 }]),
        ];
        for mu in mus {
            let flow = FlowDeformation::gradient(mu);
            let g = assemble_gradient_variations(&mesh, &flow, &phi, &rule()).unwrap().scalars;
            let gen = assemble_general_variations(&mesh, &flow.field, &flow.field.convective(), &phi, &rule())
                .unwrap()
                .scalars;
            for (a, b) in [(g.adot, gen.adot), (g.addot, gen.addot), (g.bdot, gen.bdot), (g.bddot, gen.bddot)] {
                assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "{a} vs {b}");
            }
        }
        // solenoidal field: rotation plus a shear
        let v = VectorField::new(
            Poly2::new(vec![Term { coeff: -1.0, px: 0, py: 1 }, Term { coeff: 0.3, px: 0, py: 2 }]),
            Poly2::new(vec![Term { coeff: 1.0, px: 1, py: 0 }, Term { coeff: 0.4, px: 2, py: 0 }]),
        );
        let flow = FlowDeformation::generic(v.clone());
        let s = assemble_solenoidal_variations(&mesh, &flow, &phi, &rule()).unwrap().scalars;
        let gen = assemble_general_variations(&mesh, &v, &v.convective(), &phi, &rule()).unwrap().scalars;
        assert_eq!((s.bdot, s.bddot), (0.0, 0.0));
        assert!(gen.bdot.abs() < 1e-12 && gen.bddot.abs() < 1e-12);
        assert!((s.adot - gen.adot).abs() <= 1e-10 * (1.0 + gen.adot.abs()));
        assert!((s.addot - gen.addot).abs() <= 1e-10 * (1.0 + gen.addot.abs()));
    }

    #[test]
    fn harmonic_gradient_matches_solenoidal() {
        let mesh = generate_disk_mesh(3).unwrap();
        let phi = test_vector(DofMap::new(&mesh).num_free());
        let mu = Poly2::new(vec![Term { coeff: 0.4, px: 2, py: 0 }, Term { coeff: -0.4, px: 0, py: 2 }, Term { coeff: 0.2, px: 1, py: 1 }]);
        let flow = FlowDeformation::gradient(mu);
        let g = assemble_gradient_variations(&mesh, &flow, &phi, &rule()).unwrap().scalars;
        let s = assemble_solenoidal_variations(&mesh, &flow, &phi, &rule()).unwrap().scalars;
        assert!(g.bdot.abs() < 1e-12 && g.bddot.abs() < 1e-12);
        assert!((g.adot - s.adot).abs() <= 1e-10 * (1.0 + s.adot.abs()));
        assert!((g.addot - s.addot).abs() <= 1e-10 * (1.0 + s.addot.abs()));
    }

    #[test]
    fn solenoidal_formulas_reject_divergent_fields() {
        let mesh = generate_disk_mesh(1).unwrap();
        let phi = test_vector(DofMap::new(&mesh).num_free());
        let flow = FlowDeformation::generic(VectorField::scaling());
        assert!(matches!(
            assemble_solenoidal_variations(&mesh, &flow, &phi, &rule()),
            Err(Error::CategoryMismatch(_))
        ));
        assert!(matches!(
            assemble_gradient_variations(&mesh, &flow, &phi, &rule()),
            Err(Error::CategoryMismatch(_))
        ));
    }

    #[test]
    fn conformal_scaling_blend_variations() {
        let mesh = generate_disk_mesh(3).unwrap();
        let f0 = assemble_reference(&mesh, &rule()).unwrap();
        let mut phi = test_vector(f0.num_free());
        let norm = f0.mass.quad_form(&phi).sqrt();
        phi.iter_mut().for_each(|x| *x /= norm);
        let blend = ConformalBlend::new(HolomorphicMap::scaling(2.0));
        let v = assemble_conformal_variations(&mesh, &blend, 0.0, &phi, &rule()).unwrap().scalars;
        assert_eq!((v.adot, v.addot), (0.0, 0.0));
        assert!((v.bdot - 2.0).abs() < 1e-13);
        assert!((v.bddot - 2.0).abs() < 1e-13);
        let id = assemble_conformal_variations(&mesh, &ConformalBlend::new(HolomorphicMap::Identity), 0.3, &phi, &rule())
            .unwrap()
            .scalars;
        assert_eq!(id, VariationScalars::zero());
    }

    /// (A_{t+h} - A_{t-h}) / 2h against the assembled first variation.
    fn fd_form_error(mesh: &Mesh2D, fam: &DeformationFamily, h: f64, phi: &[f64]) -> (f64, f64) {
        let ap = assemble_pulled_back(mesh, fam, h, &rule()).unwrap();
        let am = assemble_pulled_back(mesh, fam, -h, &rule()).unwrap();
        let var = assemble_variations(mesh, fam, 0.0, phi, &rule()).unwrap().scalars;
        let fd_a = (ap.stiffness.quad_form(phi) - am.stiffness.quad_form(phi)) / (2.0 * h);
        let fd_b = (ap.mass.quad_form(phi) - am.mass.quad_form(phi)) / (2.0 * h);
        ((fd_a - var.adot).abs(), (fd_b - var.bdot).abs())
    }

    #[test]
    fn first_variation_forms_match_finite_differences_at_second_order() {
        let mesh = generate_disk_mesh(2).unwrap();
        let phi = test_vector(DofMap::new(&mesh).num_free());
        let fam = DeformationFamily::General(crate::deform::GeneralDeformation {
            s: VectorField::new(
                Poly2::new(vec![Term { coeff: 0.5, px: 2, py: 0 }, Term { coeff: 0.2, px: 0, py: 1 }]),
                Poly2::new(vec![Term { coeff: -0.3, px: 1, py: 1 }]),
            ),
            r: VectorField::new(Poly2::monomial(0.4, 0, 2), Poly2::monomial(0.1, 1, 0)),
        });
        let (e1a, e1b) = fd_form_error(&mesh, &fam, 1e-3, &phi);
        let (e2a, e2b) = fd_form_error(&mesh, &fam, 5e-4, &phi);
        let ra = e1a / e2a;
        let rb = e1b / e2b;
        assert!((ra - 4.0).abs() < 0.2, "stiffness ratio {ra}");
        assert!((rb - 4.0).abs() < 0.2, "mass ratio {rb}");
    }

    #[test]
    fn second_variation_forms_match_finite_differences() {
        let mesh = generate_disk_mesh(2).unwrap();
        let phi = test_vector(DofMap::new(&mesh).num_free());
        let flow = DeformationFamily::Flow(FlowDeformation::generic(VectorField::new(
            Poly2::new(vec![Term { coeff: 0.5, px: 2, py: 0 }, Term { coeff: 0.2, px: 0, py: 1 }]),
            Poly2::new(vec![Term { coeff: -0.3, px: 1, py: 1 }, Term { coeff: 0.1, px: 0, py: 0 }]),
        )));
        let h = 1e-3;
        let q = |t: f64| {
            let f = assemble_pulled_back(&mesh, &flow, t, &rule()).unwrap();
            (f.stiffness.quad_form(&phi), f.mass.quad_form(&phi))
        };
        let (ap, bp) = q(h);
        let (a0, b0) = q(0.0);
        let (am, bm) = q(-h);
        let var = assemble_variations(&mesh, &flow, 0.0, &phi, &rule()).unwrap().scalars;
        let fd_a = (ap - 2.0 * a0 + am) / (h * h);
        let fd_b = (bp - 2.0 * b0 + bm) / (h * h);
        assert!((fd_a - var.addot).abs() < 1e-4 * (1.0 + var.addot.abs()), "{fd_a} vs {}", var.addot);
        assert!((fd_b - var.bddot).abs() < 1e-4 * (1.0 + var.bddot.abs()), "{fd_b} vs {}", var.bddot);
    }

    #[test]
    fn recentred_flow_variation_matches_finite_difference() {
        let mesh = generate_disk_mesh(2).unwrap();
        let phi = test_vector(DofMap::new(&mesh).num_free());
        let flow = DeformationFamily::Flow(FlowDeformation::generic(VectorField::new(
            Poly2::new(vec![Term { coeff: 0.5, px: 2, py: 0 }, Term { coeff: 0.2, px: 0, py: 1 }]),
            Poly2::new(vec![Term { coeff: -0.3, px: 1, py: 1 }]),
        )));
        let s = 0.2;
        let h = 1e-3;
        let q = |t: f64| {
            let f = assemble_pulled_back(&mesh, &flow, t, &rule()).unwrap();
            (f.stiffness.quad_form(&phi), f.mass.quad_form(&phi))
        };
        let (ap, bp) = q(s + h);
        let (a0, b0) = q(s);
        let (am, bm) = q(s - h);
        let var = assemble_variations(&mesh, &flow, s, &phi, &rule()).unwrap().scalars;
        assert!(((ap - am) / (2.0 * h) - var.adot).abs() < 1e-5 * (1.0 + var.adot.abs()));
        assert!(((bp - bm) / (2.0 * h) - var.bdot).abs() < 1e-5 * (1.0 + var.bdot.abs()));
        assert!(((ap - 2.0 * a0 + am) / (h * h) - var.addot).abs() < 1e-3 * (1.0 + var.addot.abs()));
        assert!(((bp - 2.0 * b0 + bm) / (h * h) - var.bddot).abs() < 1e-3 * (1.0 + var.bddot.abs()));
    }

    #[test]
    fn variation_scalars_equal_matrix_quadratic_forms() {
        let mesh = generate_disk_mesh(2).unwrap();
        let phi = test_vector(DofMap::new(&mesh).num_free());
        let v = assemble_variations(&mesh, &DeformationFamily::conformal(HolomorphicMap::Cos), 0.1, &phi, &rule()).unwrap();
        let again = v.matrices.at(&phi);
        assert_eq!(again, v.scalars);
        assert!(v.matrices.bdot.is_symmetric_exact());
    }

    #[test]
    fn general_family_only_differentiates_at_zero() {
        let mesh = generate_disk_mesh(1).unwrap();
        let phi = test_vector(DofMap::new(&mesh).num_free());
        assert!(matches!(
            assemble_variations(&mesh, &DeformationFamily::scaling(), 0.1, &phi, &rule()),
            Err(Error::Unsupported(_))
        ));
    }
}
