//! Bivariate polynomials and polynomial vector fields with exact derivatives.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

/// One monomial `coeff * x^px * y^py`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub px: u32,
    pub py: u32,
}

/// Polynomial in `(x, y)` stored as a canonical list of monomials.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<Term>", into = "Vec<Term>")]
pub struct Poly2 {
    terms: Vec<Term>,
}

impl From<Vec<Term>> for Poly2 {
    fn from(terms: Vec<Term>) -> Self {
        Poly2::new(terms)
    }
}

impl From<Poly2> for Vec<Term> {
    fn from(p: Poly2) -> Self {
        p.terms
    }
}

impl Poly2 {
    pub fn new(terms: Vec<Term>) -> Self {
        let mut p = Poly2 { terms };
        p.canonicalize();
        p
    }

    pub fn zero() -> Self {
        Poly2 { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Poly2::new(vec![Term { coeff: c, px: 0, py: 0 }])
    }

    pub fn x() -> Self {
        Poly2::monomial(1.0, 1, 0)
    }

    pub fn y() -> Self {
        Poly2::monomial(1.0, 0, 1)
    }

    pub fn monomial(coeff: f64, px: u32, py: u32) -> Self {
        Poly2::new(vec![Term { coeff, px, py }])
    }

    fn canonicalize(&mut self) {
        self.terms.sort_by_key(|t| (t.px + t.py, t.px, t.py));
        let mut out: Vec<Term> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            match out.last_mut() {
                Some(last) if last.px == t.px && last.py == t.py => last.coeff += t.coeff,
                _ => out.push(t),
            }
        }
        out.retain(|t| t.coeff != 0.0);
        self.terms = out;
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.px + t.py).max().unwrap_or(0)
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff * p[0].powi(t.px as i32) * p[1].powi(t.py as i32))
            .sum()
    }

    pub fn dx(&self) -> Poly2 {
        Poly2::new(
            self.terms
                .iter()
                .filter(|t| t.px > 0)
                .map(|t| Term { coeff: t.coeff * t.px as f64, px: t.px - 1, py: t.py })
                .collect(),
        )
    }

    pub fn dy(&self) -> Poly2 {
        Poly2::new(
            self.terms
                .iter()
                .filter(|t| t.py > 0)
                .map(|t| Term { coeff: t.coeff * t.py as f64, px: t.px, py: t.py - 1 })
                .collect(),
        )
    }

    /// Partial derivative along axis 0 (x) or 1 (y).
    pub fn d(&self, axis: usize) -> Poly2 {
        if axis == 0 {
            self.dx()
        } else {
            self.dy()
        }
    }

    pub fn add(&self, other: &Poly2) -> Poly2 {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Poly2::new(terms)
    }

    pub fn scale(&self, c: f64) -> Poly2 {
        Poly2::new(self.terms.iter().map(|t| Term { coeff: c * t.coeff, ..*t }).collect())
    }

    pub fn mul(&self, other: &Poly2) -> Poly2 {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(Term { coeff: a.coeff * b.coeff, px: a.px + b.px, py: a.py + b.py });
            }
        }
        Poly2::new(terms)
    }

    /// Laplacian.
    pub fn laplacian(&self) -> Poly2 {
        self.dx().dx().add(&self.dy().dy())
    }
}

/// Polynomial vector field `v = (v_0, v_1)` with cached first and second
/// derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "[Poly2; 2]", into = "[Poly2; 2]")]
pub struct VectorField {
    comps: [Poly2; 2],
    #[serde(skip)]
    jac: [[Poly2; 2]; 2],
    #[serde(skip)]
    hess: [[[Poly2; 2]; 2]; 2],
}

impl From<[Poly2; 2]> for VectorField {
    fn from(c: [Poly2; 2]) -> Self {
        VectorField::new(c[0].clone(), c[1].clone())
    }
}

impl From<VectorField> for [Poly2; 2] {
    fn from(v: VectorField) -> Self {
        v.comps
    }
}

impl VectorField {
    pub fn new(vx: Poly2, vy: Poly2) -> Self {
        let comps = [vx, vy];
        let jac = [
            [comps[0].dx(), comps[0].dy()],
            [comps[1].dx(), comps[1].dy()],
        ];
        let hess = [
            [
                [jac[0][0].dx(), jac[0][0].dy()],
                [jac[0][1].dx(), jac[0][1].dy()],
            ],
            [
                [jac[1][0].dx(), jac[1][0].dy()],
                [jac[1][1].dx(), jac[1][1].dy()],
            ],
        ];
        Self { comps, jac, hess }
    }

    pub fn zero() -> Self {
        Self::new(Poly2::zero(), Poly2::zero())
    }

    /// `v(x) = x`.
    pub fn scaling() -> Self {
        Self::new(Poly2::x(), Poly2::y())
    }

    /// `v(x) = (-y, x)`.
    pub fn rotation() -> Self {
        Self::new(Poly2::y().scale(-1.0), Poly2::x())
    }

    pub fn translation(dx: f64, dy: f64) -> Self {
        Self::new(Poly2::constant(dx), Poly2::constant(dy))
    }

    /// Gradient of a scalar polynomial.
    pub fn gradient_of(mu: &Poly2) -> Self {
        Self::new(mu.dx(), mu.dy())
    }

    pub fn components(&self) -> &[Poly2; 2] {
        &self.comps
    }

    pub fn degree(&self) -> u32 {
        self.comps[0].degree().max(self.comps[1].degree())
    }

    pub fn eval(&self, p: [f64; 2]) -> [f64; 2] {
        [self.comps[0].eval(p), self.comps[1].eval(p)]
    }

    /// `Dv[i][j] = d v_i / d x_j`.
    pub fn jacobian(&self, p: [f64; 2]) -> Matrix2<f64> {
        Matrix2::new(
            self.jac[0][0].eval(p),
            self.jac[0][1].eval(p),
            self.jac[1][0].eval(p),
            self.jac[1][1].eval(p),
        )
    }

    /// `d^2 v_i / dx_j dx_k` for component `i`.
    pub fn second_derivatives(&self, i: usize, p: [f64; 2]) -> Matrix2<f64> {
        let h = &self.hess[i];
        Matrix2::new(h[0][0].eval(p), h[0][1].eval(p), h[1][0].eval(p), h[1][1].eval(p))
    }

    pub fn divergence(&self) -> Poly2 {
        self.jac[0][0].add(&self.jac[1][1])
    }

    /// Convective derivative `(v . grad) v`.
    pub fn convective(&self) -> VectorField {
        let c = |i: usize| self.comps[0].mul(&self.jac[i][0]).add(&self.comps[1].mul(&self.jac[i][1]));
        VectorField::new(c(0), c(1))
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField::new(self.comps[0].add(&other.comps[0]), self.comps[1].add(&other.comps[1]))
    }

    pub fn scale(&self, c: f64) -> VectorField {
        VectorField::new(self.comps[0].scale(c), self.comps[1].scale(c))
    }
}
