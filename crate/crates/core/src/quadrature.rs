//! Symmetric quadrature rules on triangles, plus Gauss-Legendre and a polar
//! product rule on the exact unit disk.
//!
//! Triangle points are barycentric coordinates and weights are relative to
//! the triangle area, so `sum_q w_q f(x_q) * area` approximates the integral.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    /// Smallest built-in rule that is exact up to `degree` (capped at 5).
    pub fn with_degree(degree: usize) -> Self {
        match degree {
            0 | 1 => Self::centroid(),
            2 => Self::three_point(),
            3 | 4 => Self::six_point(),
            _ => Self::seven_point(),
        }
    }

    pub fn centroid() -> Self {
        let c = 1.0 / 3.0;
        Self {
            points: vec![[c, c, c]],
            weights: vec![1.0],
            degree: 1,
        }
    }

    pub fn three_point() -> Self {
        let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
        let w = 1.0 / 3.0;
        Self {
            points: vec![[a, b, b], [b, a, b], [b, b, a]],
            weights: vec![w, w, w],
            degree: 2,
        }
    }

    /// Degree-4, six-point fully symmetric rule (the default for assembly).
    pub fn six_point() -> Self {
        const A1: f64 = 0.445_948_490_915_964_886_318_329_253_883;
        const A2: f64 = 0.091_576_213_509_770_743_459_571_463_402_2;
        const W1: f64 = 0.223_381_589_678_011_465_695_007_008_433;
        const W2: f64 = 1.0 / 3.0 - W1;
        let mut points = Vec::with_capacity(6);
        let mut weights = Vec::with_capacity(6);
        for (a, w) in [(A1, W1), (A2, W2)] {
            let b = 1.0 - 2.0 * a;
            points.extend([[b, a, a], [a, b, a], [a, a, b]]);
            weights.extend([w, w, w]);
        }
        Self {
            points,
            weights,
            degree: 4,
        }
    }

    /// Degree-5, seven-point rule.
    pub fn seven_point() -> Self {
        let s15 = 15f64.sqrt();
        let a1 = (6.0 - s15) / 21.0;
        let a2 = (6.0 + s15) / 21.0;
        let w1 = (155.0 - s15) / 1200.0;
        let w2 = (155.0 + s15) / 1200.0;
        let c = 1.0 / 3.0;
        let mut points = vec![[c, c, c]];
        let mut weights = vec![9.0 / 40.0];
        for (a, w) in [(a1, w1), (a2, w2)] {
            let b = 1.0 - 2.0 * a;
            points.extend([[b, a, a], [a, b, a], [a, a, b]]);
            weights.extend([w, w, w]);
        }
        Self {
            points,
            weights,
            degree: 5,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Physical coordinates of the quadrature points on a triangle.
    pub fn map_points(&self, tri: &[[f64; 2]; 3]) -> Vec<[f64; 2]> {
        self.points
            .iter()
            .map(|l| {
                [
                    l[0] * tri[0][0] + l[1] * tri[1][0] + l[2] * tri[2][0],
                    l[0] * tri[0][1] + l[1] * tri[1][1] + l[2] * tri[2][1],
                ]
            })
            .collect()
    }
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::six_point()
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Product rule on the unit disk: Gauss-Legendre in `r` (with the `r dr`
/// weight folded in) and the trapezoid rule in `theta`. Exact for
/// `r^k cos(m theta)` with `k + 1 <= 2 n_r - 1` and `|m| < n_theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarQuadrature {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl PolarQuadrature {
    pub fn new(n_r: usize, n_theta: usize) -> Self {
        let (x, w) = gauss_legendre(n_r);
        let dtheta = std::f64::consts::TAU / n_theta as f64;
        let mut points = Vec::with_capacity(n_r * n_theta);
        let mut weights = Vec::with_capacity(n_r * n_theta);
        for (xi, wi) in x.iter().zip(&w) {
            let r = 0.5 * (xi + 1.0);
            for j in 0..n_theta {
                let th = j as f64 * dtheta;
                points.push([r * th.cos(), r * th.sin()]);
                weights.push(0.5 * wi * r * dtheta);
            }
        }
        Self { points, weights }
    }

    pub fn integrate<F: Fn([f64; 2]) -> f64>(&self, f: F) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(*p)).sum()
    }
}

impl Default for PolarQuadrature {
    fn default() -> Self {
        Self::new(32, 96)
    }
}
