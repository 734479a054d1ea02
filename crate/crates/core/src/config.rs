//! Run configuration read from TOML, with the bundled experiment presets.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::deform::{DeformationFamily, FlowCategory, FlowDeformation};
use crate::eig::{SolverOptions, DEFAULT_DENSE_THRESHOLD, DEFAULT_GAP_THRESHOLD, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::hadamard::{uniform_grid, Problem, DEFAULT_FD_STEP};
use crate::holomorphic::HolomorphicMap;
use crate::mesh::{generate_disk_mesh, tag_boundary, ArcInterval, Mesh2D, MAX_LEVEL};
use crate::quadrature::QuadratureRule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub level: usize,
    /// Boundary arcs carrying the Neumann condition; the rest is Dirichlet.
    #[serde(default)]
    pub neumann_arcs: Vec<ArcInterval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Uniform { start: f64, end: f64, points: usize },
    Values { values: Vec<f64> },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Uniform { start, end, points } => uniform_grid(*start, *end, *points),
            Grid::Values { values } => values.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub eigen_residual: f64,
    /// Relative threshold on `lambda_2 - lambda_1`.
    pub gap: f64,
    pub fd_step: f64,
    pub fd_rel_first: f64,
    pub fd_rel_second: f64,
    pub quadrature_degree: usize,
    pub dense_threshold: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eigen_residual: DEFAULT_TOL,
            gap: DEFAULT_GAP_THRESHOLD,
            fd_step: DEFAULT_FD_STEP,
            fd_rel_first: 1e-3,
            fd_rel_second: 1e-2,
            quadrature_degree: 4,
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: MeshConfig,
    pub deformation: DeformationFamily,
    pub grid: Grid,
    pub modes: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub output: PathBuf,
    /// Seeds the sample points used to validate declared field categories.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub debug_variation: bool,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mesh.level > MAX_LEVEL {
            return Err(Error::LevelTooLarge { level: self.mesh.level, max: MAX_LEVEL });
        }
        let grid = self.grid.values();
        if grid.is_empty() {
            return Err(Error::Config("t grid is empty".into()));
        }
        if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("t grid must be finite and strictly increasing".into()));
        }
        if self.modes == 0 {
            return Err(Error::Config("modes must be at least 1".into()));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("eigen_residual", t.eigen_residual),
            ("gap", t.gap),
            ("fd_step", t.fd_step),
            ("fd_rel_first", t.fd_rel_first),
            ("fd_rel_second", t.fd_rel_second),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        if !(1..=5).contains(&t.quadrature_degree) {
            return Err(Error::Config(format!("quadrature degree {} not in 1..=5", t.quadrature_degree)));
        }
        self.check_declared_category()
    }

    /// A flow declared solenoidal must be divergence free at random disk points.
    fn check_declared_category(&self) -> Result<()> {
        if let DeformationFamily::Flow(f @ FlowDeformation { category: FlowCategory::Solenoidal, .. }) = &self.deformation {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            let pts: Vec<[f64; 2]> = (0..64)
                .map(|_| {
                    let r: f64 = rng.gen::<f64>().sqrt();
                    let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                    [r * th.cos(), r * th.sin()]
                })
                .collect();
            FlowDeformation::solenoidal(f.field.clone(), &pts)?;
        }
        Ok(())
    }

    pub fn rule(&self) -> QuadratureRule {
        QuadratureRule::with_degree(self.tolerances.quadrature_degree)
    }

    pub fn solver(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tolerances.eigen_residual,
            dense_threshold: self.tolerances.dense_threshold,
            ..SolverOptions::default()
        }
    }

    pub fn build_mesh(&self) -> Result<Mesh2D> {
        let mesh = generate_disk_mesh(self.mesh.level)?;
        if self.mesh.neumann_arcs.is_empty() {
            Ok(mesh)
        } else {
            tag_boundary(&mesh, &self.mesh.neumann_arcs)
        }
    }

    pub fn problem(&self) -> Result<Problem> {
        Ok(Problem {
            mesh: self.build_mesh()?,
            family: self.deformation.clone(),
            rule: self.rule(),
            modes: self.modes,
            solver: self.solver(),
            gap_threshold: self.tolerances.gap,
        })
    }

    fn base(deformation: DeformationFamily, grid: Grid, output: &str) -> Self {
        Self {
            mesh: MeshConfig { level: 4, neumann_arcs: Vec::new() },
            deformation,
            grid,
            modes: 5,
            tolerances: Tolerances::default(),
            output: PathBuf::from(output),
            seed: 0,
            debug_variation: false,
        }
    }

    /// Eigenvalues of the disk and of its image under `exp`.
    pub fn table1() -> Self {
        Self::base(
            DeformationFamily::conformal(HolomorphicMap::Exp),
            Grid::Values { values: vec![0.0, 1.0] },
            "out/table1",
        )
    }

    /// Outlines of the cosine blend for `t = -0.2, -0.16, ..., 0.2`.
    pub fn figure1() -> Self {
        Self::base(
            DeformationFamily::conformal(HolomorphicMap::Cos),
            Grid::Uniform { start: -0.2, end: 0.2, points: 11 },
            "out/figure1",
        )
    }

    /// `lambda_1(t)` and `1/lambda_1(t)` along the cosine blend.
    pub fn figure2() -> Self {
        let mut c = Self::base(
            DeformationFamily::conformal(HolomorphicMap::Cos),
            Grid::Uniform { start: -0.2, end: 0.2, points: 11 },
            "out/figure2",
        );
        c.modes = 2;
        c
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "table1" => Ok(Self::table1()),
            "figure1" => Ok(Self::figure1()),
            "figure2" => Ok(Self::figure2()),
            other => Err(Error::Config(format!("unknown reproduction target {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{Poly2, VectorField};

    #[test]
    fn presets_round_trip_through_toml() {
        for name in ["table1", "figure1", "figure2"] {
            let c = RunConfig::preset(name).unwrap();
            let text = c.to_toml().unwrap();
            assert_eq!(RunConfig::from_toml(&text).unwrap(), c, "{text}");
        }
        let mut flow = RunConfig::figure2();
        flow.deformation = DeformationFamily::Flow(FlowDeformation::gradient(Poly2::monomial(0.5, 2, 0)));
        flow.mesh.neumann_arcs = vec![ArcInterval::upper_half()];
        let text = flow.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), flow);
    }

    #[test]
    fn parses_hand_written_config() {
        let text = r#"
            modes = 3
            output = "out/x"
            [mesh]
            level = 2
            neumann_arcs = [{ start = 0.0, length = 1.5 }]
            [deformation]
            family = "conformal"
            [deformation.map]
            map = "power-series"
            coefficients = [[0.0, 0.0], [1.0, 0.0], [0.1, 0.0]]
            [grid]
            start = 0.0
            end = 1.0
            points = 3
        "#;
        let c = RunConfig::from_toml(text).unwrap();
        assert_eq!(c.grid.values(), vec![0.0, 0.5, 1.0]);
        assert_eq!(c.tolerances, Tolerances::default());
        assert!(c.build_mesh().unwrap().count_tag(crate::mesh::BoundaryTag::Neumann) > 0);
    }

    #[test]
    fn rejects_bad_grids_and_tolerances() {
        let mut c = RunConfig::figure2();
        c.grid = Grid::Values { values: vec![0.0, 0.1, 0.1] };
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = RunConfig::figure2();
        c.tolerances.fd_step = 0.0;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = RunConfig::figure2();
        c.mesh.level = MAX_LEVEL + 1;
        assert!(matches!(c.validate(), Err(Error::LevelTooLarge { .. })));
        assert!(RunConfig::from_toml("modes = 1").is_err());
        assert!(RunConfig::preset("table9").is_err());
    }

    #[test]
    fn declared_solenoidal_field_is_checked() {
        let mut c = RunConfig::figure2();
        c.deformation = DeformationFamily::Flow(FlowDeformation {
            field: VectorField::scaling(),
            category: FlowCategory::Solenoidal,
        });
        assert!(matches!(c.validate(), Err(Error::CategoryMismatch(_))));
        c.deformation = DeformationFamily::rotation_flow();
        assert!(c.validate().is_ok());
    }
}
