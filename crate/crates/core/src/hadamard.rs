//! First and second eigenvalue variations along a deformation family, the
//! harmonic-convexity certificate, finite-difference oracles and sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deform::DeformationFamily;
use crate::eig::{
    align_sign, corrector_solve_with, simplicity_gap, solve_lowest_with, EigenPair, GapReport, SolverOptions, Spectrum,
    DEFAULT_GAP_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::forms::{assemble_pulled_back, assemble_variations, AssembledForms, VariationScalars};
use crate::mesh::Mesh2D;
use crate::quadrature::QuadratureRule;

/// Relative accuracy assumed for a single eigenvalue solve when bounding
/// finite-difference rounding error.
pub const EIGENVALUE_ROUNDING: f64 = 1e-11;
pub const DEFAULT_FD_STEP: f64 = 1e-3;
/// Relative slack of the convexity certificate.
pub const CERTIFICATE_TOL: f64 = 1e-12;

/// A mesh, a deformation family and the numerical settings for both.
#[derive(Debug, Clone)]
pub struct Problem {
    pub mesh: Mesh2D,
    pub family: DeformationFamily,
    pub rule: QuadratureRule,
    pub modes: usize,
    pub solver: SolverOptions,
    pub gap_threshold: f64,
}

impl Problem {
    pub fn new(mesh: Mesh2D, family: DeformationFamily) -> Self {
        Self {
            mesh,
            family,
            rule: QuadratureRule::default(),
            modes: 2,
            solver: SolverOptions::default(),
            gap_threshold: DEFAULT_GAP_THRESHOLD,
        }
    }

    pub fn with_modes(mut self, k: usize) -> Self {
        self.modes = k;
        self
    }

    pub fn forms_at(&self, t: f64) -> Result<AssembledForms> {
        assemble_pulled_back(&self.mesh, &self.family, t, &self.rule)
    }

    pub fn spectrum_at(&self, t: f64) -> Result<(AssembledForms, Spectrum)> {
        let forms = self.forms_at(t)?;
        let spectrum = solve_lowest_with(&forms, self.modes.max(1), &self.solver)?;
        Ok((forms, spectrum))
    }

    fn lambda1_at(&self, t: f64) -> Result<f64> {
        let forms = self.forms_at(t)?;
        Ok(solve_lowest_with(&forms, 1, &self.solver)?.first().lambda)
    }
}

/// `lambda_dot = Adot - lambda Bdot`.
pub fn first_variation(s: &VariationScalars, lambda: f64) -> f64 {
    s.adot - lambda * s.bdot
}

/// Upper bound `Addot - lambda Bddot - 2 lambda_dot Bdot`; valid for the
/// first mode only.
pub fn second_variation_bound(s: &VariationScalars, lambda: f64, lambda_dot: f64, index: usize) -> Result<f64> {
    if index != 1 {
        return Err(Error::ModeMismatch(format!("the second-variation bound holds for mode 1, not {index}")));
    }
    Ok(s.addot - lambda * s.bddot - 2.0 * lambda_dot * s.bdot)
}

/// `w^T (K - lambda M) w`.
pub fn corrector_energy(forms: &AssembledForms, lambda: f64, w: &[f64]) -> f64 {
    forms.pencil(lambda).quad_form(w)
}

/// Exact discrete second variation: the bound minus twice the corrector energy.
pub fn second_variation_exact(s: &VariationScalars, lambda: f64, lambda_dot: f64, w: &[f64], forms: &AssembledForms) -> f64 {
    s.addot - lambda * s.bddot - 2.0 * lambda_dot * s.bdot - 2.0 * corrector_energy(forms, lambda, w)
}

/// `d^2/dt^2 (1/lambda) = (2 lambda_dot^2 - lambda lambda_ddot) / lambda^3`.
pub fn harmonic_second_derivative(lambda: f64, lambda_dot: f64, lambda_ddot: f64) -> f64 {
    (2.0 * lambda_dot * lambda_dot - lambda * lambda_ddot) / (lambda * lambda * lambda)
}

/// `2 Adot^2 + lambda^2 Bddot >= lambda (Addot + 2 Adot Bdot)`; when true,
/// `1/lambda_1` is convex at this `t`.
pub fn convexity_certificate(s: &VariationScalars, lambda: f64) -> bool {
    let lhs = 2.0 * s.adot * s.adot + lambda * lambda * s.bddot;
    let rhs = lambda * (s.addot + 2.0 * s.adot * s.bdot);
    lhs - rhs >= -CERTIFICATE_TOL * lhs.abs().max(rhs.abs())
}

/// Central differences of `lambda_1(t)` with a Richardson error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdEstimate {
    pub h: f64,
    pub lambda_dot: f64,
    pub lambda_ddot: f64,
    pub err_dot: f64,
    pub err_ddot: f64,
}

impl FdEstimate {
    /// `|value - fd| <= max(rel |value|, error estimate)` for `lambda_dot`.
    pub fn agrees_dot(&self, value: f64, rel: f64) -> bool {
        (value - self.lambda_dot).abs() <= (rel * value.abs()).max(self.err_dot)
    }

    pub fn agrees_ddot(&self, value: f64, rel: f64) -> bool {
        (value - self.lambda_ddot).abs() <= (rel * value.abs()).max(self.err_ddot)
    }
}

/// Differences at steps `h` and `h/2` on the same mesh.
pub fn fd_oracle(problem: &Problem, t: f64, h: f64) -> Result<FdEstimate> {
    if !(h > 0.0) {
        return Err(Error::Config(format!("finite-difference step must be positive, got {h}")));
    }
    let ts = [t - h, t - 0.5 * h, t, t + 0.5 * h, t + h];
    let l: Vec<f64> = ts.par_iter().map(|&s| problem.lambda1_at(s)).collect::<Result<_>>()?;
    let d1 = |k: f64, lm: f64, lp: f64| (lp - lm) / (2.0 * k);
    let d2 = |k: f64, lm: f64, l0: f64, lp: f64| (lp - 2.0 * l0 + lm) / (k * k);
    let dot_h = d1(h, l[0], l[4]);
    let dot_h2 = d1(0.5 * h, l[1], l[3]);
    let ddot_h = d2(h, l[0], l[2], l[4]);
    let ddot_h2 = d2(0.5 * h, l[1], l[2], l[3]);
    let delta = EIGENVALUE_ROUNDING * l[2].abs().max(1.0);
    // second-order schemes: the error at h is about 4/3 of the h, h/2 gap
    let err_dot = 4.0 / 3.0 * (dot_h - dot_h2).abs() + 2.0 * delta / h;
    let err_ddot = 4.0 / 3.0 * (ddot_h - ddot_h2).abs() + 16.0 * delta / (h * h);
    Ok(FdEstimate { h, lambda_dot: dot_h, lambda_ddot: ddot_h, err_dot, err_ddot })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationOptions {
    pub fd_step: Option<f64>,
    /// Also report the second variation with `B(phi, phi)` in place of `Bdot`.
    pub debug: bool,
}

impl Default for VariationOptions {
    fn default() -> Self {
        Self { fd_step: Some(DEFAULT_FD_STEP), debug: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationReport {
    pub t: f64,
    pub lambda: f64,
    pub lambda_dot: f64,
    pub lambda_ddot_exact: f64,
    pub lambda_ddot_bound: f64,
    pub inv_lambda_ddot: f64,
    pub corrector_energy: f64,
    pub scalars: VariationScalars,
    pub gap: GapReport,
    pub fd: Option<FdEstimate>,
    pub certificate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_ddot_mass_reading: Option<f64>,
}

impl VariationReport {
    /// `lambda_ddot_exact <= lambda_ddot_bound` up to `slack` relative.
    pub fn ordering_holds(&self, slack: f64) -> bool {
        self.lambda_ddot_exact <= self.lambda_ddot_bound + slack * self.lambda_ddot_bound.abs().max(self.lambda.abs())
    }
}

/// Variation report for the first mode from an already solved spectrum.
fn report_from(problem: &Problem, t: f64, forms: &AssembledForms, spectrum: &Spectrum, opts: &VariationOptions) -> Result<VariationReport> {
    let gap = simplicity_gap(spectrum, problem.gap_threshold)?;
    if !gap.pass {
        return Err(Error::GapTooSmall { gap: gap.gap, threshold: gap.threshold });
    }
    let pair: &EigenPair = spectrum.first();
    let lambda = pair.lambda;
    let var = assemble_variations(&problem.mesh, &problem.family, t, &pair.vector, &problem.rule)?;
    let s = var.scalars;
    let lambda_dot = first_variation(&s, lambda);
    let bound = second_variation_bound(&s, lambda, lambda_dot, pair.index)?;
    let w = corrector_solve_with(forms, &var.matrices, pair, lambda_dot, &problem.solver)?;
    let energy = corrector_energy(forms, lambda, &w);
    let exact = bound - 2.0 * energy;
    let fd = opts.fd_step.map(|h| fd_oracle(problem, t, h)).transpose()?;
    let mass_reading = opts.debug.then_some(s.addot - lambda * s.bddot - 2.0 * lambda_dot - 2.0 * energy);
    Ok(VariationReport {
        t,
        lambda,
        lambda_dot,
        lambda_ddot_exact: exact,
        lambda_ddot_bound: bound,
        inv_lambda_ddot: harmonic_second_derivative(lambda, lambda_dot, exact),
        corrector_energy: energy,
        scalars: s,
        gap,
        fd,
        certificate: convexity_certificate(&s, lambda),
        lambda_ddot_mass_reading: mass_reading,
    })
}

/// First and second variation of `lambda_1` at `t`.
pub fn variation_report(problem: &Problem, t: f64, opts: &VariationOptions) -> Result<VariationReport> {
    let mut p = problem.clone();
    p.modes = p.modes.max(2);
    let (forms, spectrum) = p.spectrum_at(t)?;
    report_from(&p, t, &forms, &spectrum, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub t: f64,
    pub lambdas: Vec<f64>,
    pub inv_lambda1: f64,
    /// Divided second difference of `1/lambda_1`; interior points only.
    pub d2_inv_lambda1: Option<f64>,
    /// Undivided second difference `f(t+) - 2 f(t) + f(t-)` (uniform grids).
    pub raw_d2_inv_lambda1: Option<f64>,
    pub report: Option<VariationReport>,
    #[serde(skip)]
    pub phi1: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// First grid value that failed, with the reason; later points are dropped.
    pub truncated_at: Option<(f64, String)>,
}

impl SweepResult {
    pub fn ts(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn lambda1(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.lambdas[0]).collect()
    }

    pub fn max_inv_lambda1(&self) -> f64 {
        self.points.iter().map(|p| p.inv_lambda1.abs()).fold(0.0, f64::max)
    }

    /// Smallest undivided second difference of `1/lambda_1`.
    pub fn min_raw_d2(&self) -> Option<f64> {
        self.points.iter().filter_map(|p| p.raw_d2_inv_lambda1).reduce(f64::min)
    }

    /// All certificates that were computed are true.
    pub fn all_certified(&self) -> bool {
        self.points.iter().filter_map(|p| p.report.as_ref()).all(|r| r.certificate)
    }
}

fn supports_variation_at(family: &DeformationFamily, t: f64) -> bool {
    !matches!(family, DeformationFamily::General(_)) || t == 0.0
}

/// Solves on every grid value in parallel, then fixes eigenvector signs by
/// overlap with the previous point and fills in second differences.
pub fn sweep(problem: &Problem, grid: &[f64], opts: &VariationOptions) -> Result<SweepResult> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("sweep grid must be strictly increasing".into()));
    }
    let mut p = problem.clone();
    p.modes = p.modes.max(2);
    let results: Vec<Result<SweepPoint>> = grid
        .par_iter()
        .map(|&t| {
            let (forms, spectrum) = p.spectrum_at(t)?;
            let report = if supports_variation_at(&p.family, t) {
                Some(report_from(&p, t, &forms, &spectrum, opts)?)
            } else {
                None
            };
            let lambdas = spectrum.lambdas();
            Ok(SweepPoint {
                t,
                inv_lambda1: 1.0 / lambdas[0],
                lambdas,
                d2_inv_lambda1: None,
                raw_d2_inv_lambda1: None,
                report,
                phi1: spectrum.pairs[0].vector.clone(),
            })
        })
        .collect();
    let mut points = Vec::with_capacity(grid.len());
    let mut truncated_at = None;
    for (t, r) in grid.iter().zip(results) {
        match r {
            Ok(pt) => points.push(pt),
            Err(e @ (Error::NonPositiveJacobian { .. } | Error::TrajectoryEscape { .. })) => {
                truncated_at = Some((*t, e.to_string()));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    // sign continuity; the mass matrix changes with t but the overlap sign is robust
    if let Some(first) = points.first() {
        let mass = p.forms_at(first.t)?.mass;
        for i in 1..points.len() {
            let (prev, cur) = points.split_at_mut(i);
            align_sign(&mut cur[0].phi1, &prev[i - 1].phi1, &mass);
        }
    }
    for i in 1..points.len().saturating_sub(1) {
        let (t0, t1, t2) = (points[i - 1].t, points[i].t, points[i + 1].t);
        let (f0, f1, f2) = (points[i - 1].inv_lambda1, points[i].inv_lambda1, points[i + 1].inv_lambda1);
        let divided = 2.0 * ((f2 - f1) / (t2 - t1) - (f1 - f0) / (t1 - t0)) / (t2 - t0);
        points[i].d2_inv_lambda1 = Some(divided);
        points[i].raw_d2_inv_lambda1 = Some(divided * (t2 - t1) * (t1 - t0));
    }
    Ok(SweepResult { points, truncated_at })
}

/// `n` equally spaced values from `a` to `b` inclusive.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| (a * (n - 1 - i) as f64 + b * i as f64) / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deform::FlowDeformation;
    use crate::holomorphic::HolomorphicMap;
    use crate::mesh::generate_disk_mesh;
    use crate::poly::{Poly2, Term};

    fn problem(family: DeformationFamily) -> Problem {
        Problem::new(generate_disk_mesh(3).unwrap(), family)
    }

    #[test]
    fn scaling_family_closed_form() {
        let r = variation_report(&problem(DeformationFamily::scaling()), 0.0, &VariationOptions::default()).unwrap();
        let l = r.lambda;
        assert!((r.lambda_dot + 2.0 * l).abs() < 1e-8 * l);
        assert!((r.lambda_ddot_exact - 6.0 * l).abs() < 1e-8 * l);
        assert!((r.lambda_ddot_bound - 6.0 * l).abs() < 1e-8 * l);
        assert!((r.inv_lambda_ddot - 2.0 / l).abs() < 1e-8 / l);
        assert!(r.certificate);
        let fd = r.fd.unwrap();
        assert!(fd.agrees_dot(r.lambda_dot, 1e-3) && fd.agrees_ddot(r.lambda_ddot_exact, 1e-2));
    }

    #[test]
    fn scaling_flow_is_exponential() {
        let r = variation_report(&problem(DeformationFamily::scaling_flow()), 0.0, &VariationOptions::default()).unwrap();
        assert!((r.lambda_dot + 2.0 * r.lambda).abs() < 1e-8 * r.lambda);
        assert!((r.lambda_ddot_exact - 4.0 * r.lambda).abs() < 1e-8 * r.lambda);
    }

    #[test]
    fn rotation_has_no_variation() {
        let r = variation_report(&problem(DeformationFamily::rotation_flow()), 0.0, &VariationOptions::default()).unwrap();
        assert!(r.lambda_dot.abs() < 1e-10 * r.lambda);
        assert!(r.lambda_ddot_exact.abs() < 1e-10 * r.lambda);
        let fd = r.fd.unwrap();
        assert!(fd.agrees_dot(r.lambda_dot, 1e-3), "{fd:?}");
        assert!(fd.agrees_ddot(r.lambda_ddot_exact, 1e-2), "{fd:?}");
    }

    #[test]
    fn mass_reading_differs_from_scaling_law() {
        let opts = VariationOptions { fd_step: None, debug: true };
        let r = variation_report(&problem(DeformationFamily::scaling()), 0.0, &opts).unwrap();
        // 0 - 2 lambda + 4 lambda = 2 lambda, not 6 lambda
        let alt = r.lambda_ddot_mass_reading.unwrap();
        assert!((alt - 2.0 * r.lambda).abs() < 1e-8 * r.lambda);
    }

    #[test]
    fn conformal_cos_matches_fd_and_orders() {
        let fam = DeformationFamily::conformal(HolomorphicMap::Cos);
        let r = variation_report(&problem(fam), 0.0, &VariationOptions::default()).unwrap();
        assert_eq!((r.scalars.adot, r.scalars.addot), (0.0, 0.0));
        assert!(r.corrector_energy > 0.0);
        assert!(r.lambda_ddot_exact < r.lambda_ddot_bound);
        let fd = r.fd.unwrap();
        assert!(fd.agrees_dot(r.lambda_dot, 1e-3), "{} vs {fd:?}", r.lambda_dot);
        assert!(fd.agrees_ddot(r.lambda_ddot_exact, 1e-2), "{} vs {fd:?}", r.lambda_ddot_exact);
        assert!(r.certificate && r.inv_lambda_ddot >= 0.0);
    }

    #[test]
    fn recentred_flow_matches_fd_away_from_zero() {
        let mu = Poly2::new(vec![Term { coeff: 0.3, px: 2, py: 0 }, Term { coeff: 0.1, px: 1, py: 2 }]);
        let fam = DeformationFamily::Flow(FlowDeformation::gradient(mu));
        let r = variation_report(&problem(fam), 0.15, &VariationOptions::default()).unwrap();
        let fd = r.fd.unwrap();
        assert!(fd.agrees_dot(r.lambda_dot, 1e-3), "{} vs {fd:?}", r.lambda_dot);
        assert!(fd.agrees_ddot(r.lambda_ddot_exact, 1e-2), "{} vs {fd:?}", r.lambda_ddot_exact);
    }

    #[test]
    fn bound_refuses_higher_modes() {
        let s = VariationScalars::zero();
        assert!(matches!(second_variation_bound(&s, 1.0, 0.0, 2), Err(Error::ModeMismatch(_))));
    }

    #[test]
    fn harmonic_second_derivative_signs() {
        assert!(harmonic_second_derivative(2.0, 0.0, 1.0) < 0.0);
        assert_eq!(harmonic_second_derivative(2.0, 0.0, 0.0), 0.0);
        let l = 5.0;
        assert!((harmonic_second_derivative(l, -2.0 * l, 6.0 * l) - 2.0 / l).abs() < 1e-15);
    }

    #[test]
    fn identity_sweep_is_flat() {
        let s = sweep(&problem(DeformationFamily::Identity), &uniform_grid(-0.2, 0.2, 5), &VariationOptions { fd_step: None, debug: false })
            .unwrap();
        let l = s.lambda1();
        assert!(l.iter().all(|x| *x == l[0]));
        assert_eq!(s.min_raw_d2(), Some(0.0));
    }

    #[test]
    fn scaling_blend_sweep_is_parabolic() {
        let fam = DeformationFamily::conformal(HolomorphicMap::scaling(2.0));
        let grid = uniform_grid(-0.2, 0.2, 5);
        let s = sweep(&problem(fam), &grid, &VariationOptions { fd_step: None, debug: false }).unwrap();
        let l0 = s.points[2].lambdas[0];
        for p in &s.points {
            let expect = (1.0 + p.t).powi(2) / l0;
            assert!((p.inv_lambda1 - expect).abs() < 1e-10 * expect);
        }
        for p in &s.points[1..4] {
            assert!((p.d2_inv_lambda1.unwrap() - 2.0 / l0).abs() < 1e-6);
        }
        assert!(s.all_certified());
    }

    #[test]
    fn sweep_truncates_at_folding_parameter() {
        // T_t = (1+t) x folds at t = -1
        let grid = [-1.5, -1.0, -0.5, 0.0];
        let s = sweep(&problem(DeformationFamily::scaling()), &grid, &VariationOptions { fd_step: None, debug: false }).unwrap();
        // the first point already passes through the fold (a = 0.25 > 0), so only -1 fails
        assert_eq!(s.points.len(), 1);
        assert_eq!(s.truncated_at.as_ref().unwrap().0, -1.0);
    }

    #[test]
    fn sweep_signs_are_continuous() {
        let fam = DeformationFamily::conformal(HolomorphicMap::Cos);
        let s = sweep(&problem(fam), &uniform_grid(-0.2, 0.2, 5), &VariationOptions { fd_step: None, debug: false }).unwrap();
        let mass = problem(DeformationFamily::Identity).forms_at(0.0).unwrap().mass;
        for w in s.points.windows(2) {
            assert!(mass.bilinear(&w[0].phi1, &w[1].phi1) > 0.0);
        }
    }

    #[test]
    fn grid_must_increase() {
        let r = sweep(&problem(DeformationFamily::Identity), &[0.0, 0.0], &VariationOptions::default());
        assert!(matches!(r, Err(Error::Config(_))));
    }
}
