//! Deformation families `T_t` of the reference domain and their Jacobian
//! data `(DT_t, a_t = det DT_t, Q_t = DT_t^{-1} DT_t^{-T})`.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holomorphic::HolomorphicMap;
use crate::poly::{Poly2, VectorField};

/// Integration steps per unit of `t` for flow maps.
pub const FLOW_STEPS_PER_UNIT: f64 = 64.0;
/// Trajectories leaving this radius are reported as escaped.
pub const FLOW_ESCAPE_RADIUS: f64 = 1.0e3;
/// Pointwise divergence tolerance for solenoidal fields.
pub const SOLENOIDAL_TOL: f64 = 1e-12;

/// `T_t = I + t S + t^2/2 R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralDeformation {
    pub s: VectorField,
    pub r: VectorField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "category", rename_all = "kebab-case")]
pub enum FlowCategory {
    Generic,
    Solenoidal,
    Gradient { potential: Poly2 },
}

/// Flow of the autonomous field `v`: `T_t x = X(t)`, `X' = v(X)`, `X(0) = x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowDeformation {
    pub field: VectorField,
    pub category: FlowCategory,
}

impl FlowDeformation {
    pub fn generic(field: VectorField) -> Self {
        Self { field, category: FlowCategory::Generic }
    }

    /// Declares `field` divergence free; checked at the supplied points.
    pub fn solenoidal(field: VectorField, sample_points: &[[f64; 2]]) -> Result<Self> {
        let div = field.divergence();
        for &p in sample_points {
            let d = div.eval(p);
            if d.abs() > SOLENOIDAL_TOL {
                return Err(Error::CategoryMismatch(format!(
                    "divergence {d:e} at ({:.4}, {:.4}) exceeds {SOLENOIDAL_TOL:e}",
                    p[0], p[1]
                )));
            }
        }
        Ok(Self { field, category: FlowCategory::Solenoidal })
    }

    /// Gradient flow `v = grad mu`.
    pub fn gradient(potential: Poly2) -> Self {
        Self {
            field: VectorField::gradient_of(&potential),
            category: FlowCategory::Gradient { potential },
        }
    }

    pub fn potential(&self) -> Option<&Poly2> {
        match &self.category {
            FlowCategory::Gradient { potential } => Some(potential),
            _ => None,
        }
    }
}

/// Blend `g_t(z) = (1 - t) z + t f(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalBlend {
    pub map: HolomorphicMap,
}

impl ConformalBlend {
    pub fn new(map: HolomorphicMap) -> Self {
        Self { map }
    }

    pub fn eval(&self, t: f64, z: Complex64) -> Complex64 {
        z * (1.0 - t) + self.map.eval(z) * t
    }

    pub fn derivative(&self, t: f64, z: Complex64) -> Complex64 {
        Complex64::new(1.0 - t, 0.0) + self.map.derivative(z) * t
    }

    /// `(a_t, da_t/dt, d^2 a_t/dt^2)` with `a_t = |g_t'|^2`, expanded as
    /// `1 + 2t Re(f'-1) + t^2 |f'-1|^2`.
    pub fn jacobian_derivatives(&self, t: f64, z: Complex64) -> (f64, f64, f64) {
        let d = self.map.derivative(z) - 1.0;
        let n2 = d.norm_sqr();
        let a = 1.0 + 2.0 * t * d.re + t * t * n2;
        (a, 2.0 * d.re + 2.0 * t * n2, 2.0 * n2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
#[allow(clippy::large_enum_variant)]
pub enum DeformationFamily {
    Identity,
    General(GeneralDeformation),
    Flow(FlowDeformation),
    Conformal(ConformalBlend),
}

impl DeformationFamily {
    /// `T_t = (1 + t) I`.
    pub fn scaling() -> Self {
        DeformationFamily::General(GeneralDeformation { s: VectorField::scaling(), r: VectorField::zero() })
    }

    pub fn rotation_flow() -> Self {
        DeformationFamily::Flow(FlowDeformation { field: VectorField::rotation(), category: FlowCategory::Solenoidal })
    }

    pub fn scaling_flow() -> Self {
        DeformationFamily::Flow(FlowDeformation::generic(VectorField::scaling()))
    }

    pub fn conformal(map: HolomorphicMap) -> Self {
        DeformationFamily::Conformal(ConformalBlend::new(map))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            DeformationFamily::Identity => "identity",
            DeformationFamily::General(_) => "general",
            DeformationFamily::Flow(_) => "flow",
            DeformationFamily::Conformal(_) => "conformal",
        }
    }

    /// Image point `T_t x`.
    pub fn map_point(&self, t: f64, x: [f64; 2]) -> Result<[f64; 2]> {
        match self {
            DeformationFamily::Identity => Ok(x),
            DeformationFamily::General(g) => {
                let (s, r) = (g.s.eval(x), g.r.eval(x));
                Ok([x[0] + t * s[0] + 0.5 * t * t * r[0], x[1] + t * s[1] + 0.5 * t * t * r[1]])
            }
            DeformationFamily::Flow(f) => Ok(flow_map(f, t, x)?.0),
            DeformationFamily::Conformal(c) => {
                let w = c.eval(t, Complex64::new(x[0], x[1]));
                Ok([w.re, w.im])
            }
        }
    }
}

/// Pointwise Jacobian data of `T_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianData {
    pub dt: Matrix2<f64>,
    pub a: f64,
    pub q: Matrix2<f64>,
    /// `Q_t a_t`, the stiffness coefficient of the pulled-back form.
    pub qa: Matrix2<f64>,
    pub da_dt: Option<f64>,
    pub d2a_dt2: Option<f64>,
}

impl JacobianData {
    fn from_matrix(dt: Matrix2<f64>, t: f64, x: [f64; 2]) -> Result<Self> {
        let a = dt.determinant();
        if !(a > 0.0) {
            return Err(Error::NonPositiveJacobian { a, t, x: x[0], y: x[1] });
        }
        // adj(DT) adj(DT)^T / det(DT) = DT^{-1} DT^{-T} det(DT)
        let adj = Matrix2::new(dt[(1, 1)], -dt[(0, 1)], -dt[(1, 0)], dt[(0, 0)]);
        let aat = adj * adj.transpose();
        let qa = aat / a;
        let q = aat / (a * a);
        Ok(Self { dt, a, q, qa, da_dt: None, d2a_dt2: None })
    }
}

/// Evaluates `(DT_t, a_t, Q_t)` at `x`.
pub fn eval_jacobian(family: &DeformationFamily, t: f64, x: [f64; 2]) -> Result<JacobianData> {
    match family {
        DeformationFamily::Identity => Ok(JacobianData {
            dt: Matrix2::identity(),
            a: 1.0,
            q: Matrix2::identity(),
            qa: Matrix2::identity(),
            da_dt: None,
            d2a_dt2: None,
        }),
        DeformationFamily::General(g) => {
            let dt = Matrix2::identity() + g.s.jacobian(x) * t + g.r.jacobian(x) * (0.5 * t * t);
            JacobianData::from_matrix(dt, t, x)
        }
        DeformationFamily::Flow(f) => {
            let (_, dt) = flow_map(f, t, x)?;
            JacobianData::from_matrix(dt, t, x)
        }
        DeformationFamily::Conformal(c) => {
            let z = Complex64::new(x[0], x[1]);
            let g = c.derivative(t, z);
            let (a, da, d2a) = c.jacobian_derivatives(t, z);
            if !(a > 0.0) {
                return Err(Error::NonPositiveJacobian { a, t, x: x[0], y: x[1] });
            }
            // Cauchy-Riemann: DT = [[Re g', -Im g'], [Im g', Re g']].
            let dt = Matrix2::new(g.re, -g.im, g.im, g.re);
            Ok(JacobianData {
                dt,
                a,
                q: Matrix2::identity() / a,
                qa: Matrix2::identity(),
                da_dt: Some(da),
                d2a_dt2: Some(d2a),
            })
        }
    }
}

/// Integrates the trajectory and its variational equation `J' = Dv(X) J`
/// with classical RK4, returning `(T_t x, DT_t(x))`.
pub fn flow_map(flow: &FlowDeformation, t: f64, x: [f64; 2]) -> Result<([f64; 2], Matrix2<f64>)> {
    let steps = ((t.abs() * FLOW_STEPS_PER_UNIT).ceil() as usize).max(1);
    let h = t / steps as f64;
    let v = &flow.field;
    let rhs = |p: [f64; 2], j: &Matrix2<f64>| -> ([f64; 2], Matrix2<f64>) { (v.eval(p), v.jacobian(p) * j) };
    let shift = |p: [f64; 2], d: [f64; 2], s: f64| [p[0] + s * d[0], p[1] + s * d[1]];
    let mut p = x;
    let mut j = Matrix2::identity();
    if t == 0.0 {
        return Ok((p, j));
    }
    for step in 0..steps {
        let (k1, l1) = rhs(p, &j);
        let (k2, l2) = rhs(shift(p, k1, 0.5 * h), &(j + l1 * (0.5 * h)));
        let (k3, l3) = rhs(shift(p, k2, 0.5 * h), &(j + l2 * (0.5 * h)));
        let (k4, l4) = rhs(shift(p, k3, h), &(j + l3 * h));
        for i in 0..2 {
            p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        j += (l1 + l2 * 2.0 + l3 * 2.0 + l4) * (h / 6.0);
        if !(p[0].is_finite() && p[1].is_finite()) || p[0].hypot(p[1]) > FLOW_ESCAPE_RADIUS {
            return Err(Error::TrajectoryEscape { t: h * (step + 1) as f64 });
        }
    }
    Ok((p, j))
}

/// Expansion fields `(S, R)` of `T_t = I + t S + t^2/2 R + o(t^2)`; for a
/// flow `S = v` and `R = (v . grad) v`.
pub fn expansion_fields(family: &DeformationFamily) -> Result<(VectorField, VectorField)> {
    match family {
        DeformationFamily::Identity => Ok((VectorField::zero(), VectorField::zero())),
        DeformationFamily::General(g) => Ok((g.s.clone(), g.r.clone())),
        DeformationFamily::Flow(f) => Ok((f.field.clone(), f.field.convective())),
        DeformationFamily::Conformal(_) => Err(Error::Unsupported(
            "conformal families are differentiated through a_t directly",
        )),
    }
}

/// Hessian data of a gradient flow at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientFlowData {
    /// `H = grad^2 mu`.
    pub h: Matrix2<f64>,
    /// `K = grad^2 |grad mu|^2`.
    pub k: Matrix2<f64>,
    pub tr_h: f64,
    pub tr_k: f64,
    /// `H : H`.
    pub h_norm2: f64,
}

/// Polynomial derivative tables of a scalar potential up to third order.
#[derive(Debug, Clone)]
pub struct PotentialDerivatives {
    grad: [Poly2; 2],
    hess: [[Poly2; 2]; 2],
    third: [[[Poly2; 2]; 2]; 2],
}

impl PotentialDerivatives {
    pub fn new(mu: &Poly2) -> Self {
        let grad = [mu.dx(), mu.dy()];
        let hess = [[grad[0].dx(), grad[0].dy()], [grad[1].dx(), grad[1].dy()]];
        let third = [
            [[hess[0][0].dx(), hess[0][0].dy()], [hess[0][1].dx(), hess[0][1].dy()]],
            [[hess[1][0].dx(), hess[1][0].dy()], [hess[1][1].dx(), hess[1][1].dy()]],
        ];
        Self { grad, hess, third }
    }

    /// `H`, and `K_ij = 2 sum_k (mu_ki mu_kj + mu_k mu_kij)`.
    pub fn eval(&self, x: [f64; 2]) -> GradientFlowData {
        let g = [self.grad[0].eval(x), self.grad[1].eval(x)];
        let h = Matrix2::from_fn(|i, j| self.hess[i][j].eval(x));
        let k = Matrix2::from_fn(|i, j| {
            (0..2)
                .map(|m| 2.0 * (h[(m, i)] * h[(m, j)] + g[m] * self.third[m][i][j].eval(x)))
                .sum()
        });
        GradientFlowData {
            h,
            k,
            tr_h: h.trace(),
            tr_k: k.trace(),
            h_norm2: h.component_mul(&h).sum(),
        }
    }
}

/// `H`, `K` and their traces for a gradient flow at `x`.
pub fn gradient_flow_data(flow: &FlowDeformation, x: [f64; 2]) -> Result<GradientFlowData> {
    let mu = flow
        .potential()
        .ok_or_else(|| Error::CategoryMismatch("flow is not a gradient flow".into()))?;
    Ok(PotentialDerivatives::new(mu).eval(x))
}
