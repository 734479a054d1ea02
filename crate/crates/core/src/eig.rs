//! Lowest eigenpairs of the pencil `(K, M)` and the deflated corrector
//! system for the second variation.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{AssembledForms, VariationMatrices};
use crate::linalg::{axpy, dot, norm, CsrMatrix, ProfileCholesky};

/// Default relative residual tolerance `|Kv - lambda Mv| <= tol |Kv|`.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Free-dof count above which the sparse solvers are used.
pub const DEFAULT_DENSE_THRESHOLD: usize = 500;
/// Default simplicity threshold, relative to `lambda_1`.
pub const DEFAULT_GAP_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub dense_threshold: usize,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, dense_threshold: DEFAULT_DENSE_THRESHOLD, max_iterations: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    /// Eigenvalue of the unshifted problem.
    pub lambda: f64,
    /// Free-dof coefficients, `v^T M v = 1`.
    pub vector: Vec<f64>,
    /// 1-based mode number.
    pub index: usize,
    /// `|Kv - lambda Mv| / |Kv|` for the assembled (possibly shifted) `K`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub pairs: Vec<EigenPair>,
}

/// One row of the spectrum export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub t: f64,
    pub index: usize,
    pub lambda: f64,
    pub residual: f64,
    pub gap: Option<f64>,
}

impl Spectrum {
    pub fn lambdas(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.lambda).collect()
    }

    /// `lambda_2 - lambda_1`.
    pub fn gap(&self) -> Option<f64> {
        (self.pairs.len() >= 2).then(|| self.pairs[1].lambda - self.pairs[0].lambda)
    }

    pub fn first(&self) -> &EigenPair {
        &self.pairs[0]
    }

    pub fn records(&self, t: f64) -> Vec<SpectrumRecord> {
        let gap = self.gap();
        self.pairs
            .iter()
            .map(|p| SpectrumRecord { t, index: p.index, lambda: p.lambda, residual: p.residual, gap })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub lambda1: f64,
    pub gap: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Simplicity of `lambda_1`: passes when `lambda_2 - lambda_1 > rel * lambda_1`.
pub fn simplicity_gap(s: &Spectrum, rel_threshold: f64) -> Result<GapReport> {
    let gap = s
        .gap()
        .ok_or_else(|| Error::GapUndefined(format!("{} mode(s) computed, need at least 2", s.pairs.len())))?;
    let lambda1 = s.pairs[0].lambda;
    let threshold = rel_threshold * lambda1.abs().max(f64::MIN_POSITIVE);
    Ok(GapReport { lambda1, gap, threshold, pass: gap > threshold })
}

/// `k` smallest eigenpairs with default options.
pub fn solve_lowest(forms: &AssembledForms, k: usize, tol: f64) -> Result<Spectrum> {
    solve_lowest_with(forms, k, &SolverOptions { tol, ..SolverOptions::default() })
}

pub fn solve_lowest_with(forms: &AssembledForms, k: usize, opts: &SolverOptions) -> Result<Spectrum> {
    let n = forms.num_free();
    if k == 0 || k > n {
        return Err(Error::Config(format!("cannot compute {k} modes on {n} free dofs")));
    }
    let (values, vectors) = if n <= opts.dense_threshold {
        dense_lowest(&forms.stiffness, &forms.mass, k)?
    } else {
        subspace_lowest(&forms.stiffness, &forms.mass, k, opts)?
    };
    let mut pairs = Vec::with_capacity(k);
    for (i, (shifted, mut v)) in values.into_iter().zip(vectors).enumerate() {
        let scale = forms.mass.quad_form(&v).sqrt();
        v.iter_mut().for_each(|x| *x /= scale);
        fix_sign(&mut v);
        let residual = relative_residual(&forms.stiffness, &forms.mass, shifted, &v);
        if !(residual <= opts.tol) {
            return Err(Error::NoConvergence { iterations: 0, residual });
        }
        pairs.push(EigenPair { lambda: shifted - forms.shift(), vector: v, index: i + 1, residual });
    }
    Ok(Spectrum { pairs })
}

/// Largest-magnitude entry made positive.
pub fn fix_sign(v: &mut [f64]) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v.iter() {
        if x.abs() > best {
            best = x.abs();
            sign = x.signum();
        }
    }
    if sign < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Flips `v` when that increases its `M`-overlap with `reference`.
pub fn align_sign(v: &mut [f64], reference: &[f64], mass: &CsrMatrix) {
    if mass.bilinear(v, reference) < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn relative_residual(k: &CsrMatrix, m: &CsrMatrix, lambda: f64, v: &[f64]) -> f64 {
    let kv = k.mul_vec(v);
    let mut r = kv.clone();
    axpy(-lambda, &m.mul_vec(v), &mut r);
    norm(&r) / norm(&kv).max(f64::MIN_POSITIVE)
}

/// Cholesky reduction `L^{-1} K L^{-T}` of the generalized problem.
fn dense_generalized(k: &DMatrix<f64>, m: &DMatrix<f64>, count: usize) -> Result<(Vec<f64>, Vec<DVector<f64>>)> {
    let chol = m.clone().cholesky().ok_or(Error::SingularMass(0))?;
    let l = chol.l();
    let linv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(m.nrows(), m.nrows()))
        .ok_or(Error::SingularMass(0))?;
    let mut c = &linv * k * linv.transpose();
    c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lt = linv.transpose();
    let values = order.iter().take(count).map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order.iter().take(count).map(|&i| &lt * eig.eigenvectors.column(i)).collect();
    Ok((values, vectors))
}

fn dense_lowest(k: &CsrMatrix, m: &CsrMatrix, count: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let (values, vectors) = dense_generalized(&k.to_dense(), &m.to_dense(), count)?;
    Ok((values, vectors.into_iter().map(|v| v.as_slice().to_vec()).collect()))
}

/// Inverse subspace iteration with Rayleigh-Ritz on the `K` factor.
fn subspace_lowest(k: &CsrMatrix, m: &CsrMatrix, count: usize, opts: &SolverOptions) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = k.nrows();
    let p = n.min((2 * count).max(count + 8));
    let factor = ProfileCholesky::factor(k)?;
    let mut x: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            (0..n)
                .map(|i| if j == 0 { 1.0 } else { ((i + 1) as f64 * (j as f64 * 0.618_033_988_75 + 0.1)).sin() })
                .collect()
        })
        .collect();
    let mut worst = f64::INFINITY;
    for _ in 0..opts.max_iterations {
        let y: Vec<Vec<f64>> = x.par_iter().map(|c| factor.solve(&m.mul_vec(c))).collect();
        let ky: Vec<Vec<f64>> = y.par_iter().map(|c| k.mul_vec(c)).collect();
        let my: Vec<Vec<f64>> = y.par_iter().map(|c| m.mul_vec(c)).collect();
        let kp = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&y[i], &ky[j]) + dot(&y[j], &ky[i])));
        let mp = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&y[i], &my[j]) + dot(&y[j], &my[i])));
        let (vals, vecs) = dense_generalized(&kp, &mp, p)?;
        x = vecs
            .iter()
            .map(|c| {
                let mut out = vec![0.0; n];
                for (yj, &cj) in y.iter().zip(c.iter()) {
                    axpy(cj, yj, &mut out);
                }
                out
            })
            .collect();
        worst = (0..count)
            .into_par_iter()
            .map(|i| relative_residual(k, m, vals[i], &x[i]))
            .reduce(|| 0.0, f64::max);
        if worst <= 0.1 * opts.tol {
            return Ok((vals[..count].to_vec(), x.into_iter().take(count).collect()));
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_iterations, residual: worst })
}

/// Right-hand side `-(Adot - lambda Bdot - lambda_dot M) phi`.
pub fn corrector_rhs(forms: &AssembledForms, var: &VariationMatrices, lambda: f64, lambda_dot: f64, phi: &[f64]) -> Vec<f64> {
    let op = var.adot.linear_combination(1.0, &var.bdot, -lambda).linear_combination(1.0, &forms.mass, -lambda_dot);
    op.mul_vec(phi).into_iter().map(|x| -x).collect()
}

/// Solves `(K - lambda M) w = rhs` subject to `w^T M phi = 0`.
pub fn corrector_solve(
    forms: &AssembledForms,
    var: &VariationMatrices,
    pair: &EigenPair,
    lambda_dot: f64,
) -> Result<Vec<f64>> {
    corrector_solve_with(forms, var, pair, lambda_dot, &SolverOptions::default())
}

pub fn corrector_solve_with(
    forms: &AssembledForms,
    var: &VariationMatrices,
    pair: &EigenPair,
    lambda_dot: f64,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    let rhs = corrector_rhs(forms, var, pair.lambda, lambda_dot, &pair.vector);
    let c = forms.pencil(pair.lambda);
    let mphi = forms.mass.mul_vec(&pair.vector);
    let n = forms.num_free();
    let mut w = if n <= opts.dense_threshold {
        bordered_dense(&c, &mphi, &rhs)?
    } else if pair.index == 1 {
        deflated_pcg(forms, &c, &pair.vector, &mphi, &rhs, opts)?
    } else {
        return Err(Error::ModeMismatch(format!(
            "sparse corrector handles the first mode only (got mode {})",
            pair.index
        )));
    };
    let proj = dot(&w, &mphi);
    axpy(-proj, &pair.vector, &mut w);
    let cw = c.mul_vec(&w);
    let mut r: Vec<f64> = cw.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    // The rhs is consistent only up to rounding in lambda_dot; drop its phi part.
    let along = dot(&pair.vector, &r);
    axpy(-along, &mphi, &mut r);
    let res = norm(&r);
    if !(res <= 1e-8 * (norm(&rhs) + norm(&cw)) + 1e-14) {
        return Err(Error::SingularSystem(format!("corrector residual {res:e}")));
    }
    Ok(w)
}

fn bordered_dense(c: &CsrMatrix, mphi: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = c.nrows();
    let mut a = DMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        for (j, v) in c.row(i) {
            a[(i, j)] = v;
        }
        a[(i, n)] = mphi[i];
        a[(n, i)] = mphi[i];
    }
    let mut b = DVector::zeros(n + 1);
    b.rows_mut(0, n).copy_from_slice(rhs);
    let lu = a.lu();
    let sol = lu.solve(&b).ok_or_else(|| Error::SingularSystem("bordered corrector matrix".into()))?;
    if sol.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularSystem("bordered corrector matrix".into()));
    }
    Ok(sol.as_slice()[..n].to_vec())
}

/// CG on `C + M phi phi^T M`, which is positive definite when `phi` is the
/// ground state, preconditioned by the Cholesky factor of `K`.
fn deflated_pcg(
    forms: &AssembledForms,
    c: &CsrMatrix,
    phi: &[f64],
    mphi: &[f64],
    rhs: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    let pre = ProfileCholesky::factor(&forms.stiffness)?;
    let mut b = rhs.to_vec();
    let along = dot(phi, &b);
    axpy(-along, mphi, &mut b);
    let apply = |x: &[f64]| {
        let mut y = c.mul_vec(x);
        axpy(dot(mphi, x), mphi, &mut y);
        y
    };
    let bnorm = norm(&b);
    let n = b.len();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.clone();
    let mut z = pre.solve(&r);
    let mut d = z.clone();
    let mut rz = dot(&r, &z);
    let budget = opts.max_iterations.max(n.min(5000));
    for _ in 0..budget {
        let ad = apply(&d);
        let dad = dot(&d, &ad);
        if !(dad > 0.0) {
            return Err(Error::SingularSystem("deflated corrector operator is not definite".into()));
        }
        let alpha = rz / dad;
        axpy(alpha, &d, &mut x);
        axpy(-alpha, &ad, &mut r);
        if norm(&r) <= 1e-12 * bnorm {
            return Ok(x);
        }
        z = pre.solve(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (di, zi) in d.iter_mut().zip(&z) {
            *di = zi + beta * *di;
        }
    }
    Err(Error::NoConvergence { iterations: budget, residual: norm(&r) / bnorm })
}
