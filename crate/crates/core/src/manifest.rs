//! Experiment manifests: flat `key = value` tables `[lattice]`, `[grid]`,
//! `[solver]` and `[experiment]`.
//!
//! ```toml
//! [lattice]
//! preset = "hexagonal"
//!
//! [grid]
//! n1 = 128
//! n2 = 128
//!
//! [solver]
//! dt = 0.01
//! t_end = 20.0
//!
//! [experiment]
//! coeffs = "1 0 0.8 0 0.6 0"
//! epsilons = [0.001, 0.01]
//! seeds = [1, 2, 3]
//! output_dir = "out"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::eigenstate::EigenstateCoeffs;
use crate::error::{Error, Result};
use crate::euler::{Dealias, Integrator, SolverConfig};
use crate::lattice::{classify_eigenspace, LatticeBasis, Vec2};
use crate::spectral::Grid;

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// `[xi1, xi2, eta1, eta2]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<[f64; 4]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n1: usize,
    pub n2: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n1: 128, n2: 128 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub dt: f64,
    pub t_end: f64,
    pub integrator: Integrator,
    pub dealias: Dealias,
    pub diag_stride: usize,
    pub snapshot_stride: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            dt: 1e-2,
            t_end: 20.0,
            integrator: Integrator::Rk4,
            dealias: Dealias::TwoThirds,
            diag_stride: 10,
            snapshot_stride: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    /// Reference state as `A1 alpha1 [A2 alpha2 [A3 alpha3]]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<String>,
    pub p_norm: f64,
    pub epsilons: Vec<f64>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            coeffs: None,
            p_norm: 2.0,
            epsilons: vec![1e-2],
            seeds: vec![1],
            output_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    #[serde(default)]
    pub lattice: LatticeSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

impl ExperimentManifest {
    pub fn parse(text: &str) -> Result<Self> {
        let m: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn emit(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        self.solver_config_on(grid)?.validate()?;
        self.reference()?;
        if !(self.experiment.p_norm >= 1.0) {
            return Err(Error::BadExponent(self.experiment.p_norm));
        }
        if let Some(e) = self
            .experiment
            .epsilons
            .iter()
            .find(|e| !(**e >= 0.0 && e.is_finite()))
        {
            return Err(Error::InvalidConfig(format!(
                "epsilon {e} must be nonnegative"
            )));
        }
        Ok(())
    }

    pub fn basis(&self) -> Result<LatticeBasis> {
        match (&self.lattice.preset, &self.lattice.basis) {
            (Some(p), None) => LatticeBasis::preset(p),
            (None, Some(b)) => LatticeBasis::new(Vec2::new(b[0], b[1]), Vec2::new(b[2], b[3])),
            (None, None) => Err(Error::InvalidConfig(
                "[lattice] needs `preset` or `basis`".into(),
            )),
            (Some(_), Some(_)) => Err(Error::InvalidConfig(
                "[lattice] takes `preset` or `basis`, not both".into(),
            )),
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.basis()?, self.grid.n1, self.grid.n2)
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        self.solver_config_on(self.grid()?)
    }

    fn solver_config_on(&self, grid: Grid) -> Result<SolverConfig> {
        let s = &self.solver;
        let mut cfg = SolverConfig::new(grid, s.dt, s.t_end);
        cfg.integrator = s.integrator;
        cfg.dealias = s.dealias;
        cfg.diag_stride = s.diag_stride;
        cfg.snapshot_stride = s.snapshot_stride;
        Ok(cfg)
    }

    pub fn reference(&self) -> Result<Option<EigenstateCoeffs>> {
        match &self.experiment.coeffs {
            None => Ok(None),
            Some(text) => {
                let info = classify_eigenspace(&self.basis()?)?;
                EigenstateCoeffs::parse(info, text).map(Some)
            }
        }
    }

    /// Creates the output directory and confirms it accepts files.
    pub fn prepare_output_dir(&self) -> Result<PathBuf> {
        let dir = self.experiment.output_dir.clone();
        fs::create_dir_all(&dir)?;
        let probe = dir.join(".write-probe");
        fs::write(&probe, b"")?;
        fs::remove_file(&probe)?;
        Ok(dir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[lattice]
preset = "hexagonal"

[grid]
n1 = 64
n2 = 64

[solver]
dt = 0.005
t_end = 3.0
dealias = "two_thirds"
diag_stride = 4

[experiment]
coeffs = "1 0 0.8 0.1 0.6 0.2"
epsilons = [0.001, 0.01]
seeds = [1, 2, 3]
output_dir = "runs/a"
"#;

    #[test]
    fn parses_sample() {
        let m = ExperimentManifest::parse(SAMPLE).unwrap();
        assert_eq!(m.grid.n1, 64);
        assert_eq!(m.solver.diag_stride, 4);
        assert_eq!(m.solver.snapshot_stride, 0);
        assert_eq!(m.experiment.seeds, vec![1, 2, 3]);
        assert_eq!(m.reference().unwrap().unwrap().dim(), 6);
        assert_eq!(m.solver_config().unwrap().steps(), 600);
    }

    #[test]
    fn round_trip() {
        let m = ExperimentManifest::parse(SAMPLE).unwrap();
        let text = m.emit().unwrap();
        assert_eq!(ExperimentManifest::parse(&text).unwrap(), m);

        let mut b = m.clone();
        b.lattice = LatticeSection {
            preset: None,
            basis: Some([1.0, 0.25, -0.5, 2.0]),
        };
        b.experiment.coeffs = None;
        assert_eq!(ExperimentManifest::parse(&b.emit().unwrap()).unwrap(), b);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            ExperimentManifest::parse("[lattice]\npreset = \"square\"\nbogus = 1\n"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            ExperimentManifest::parse("[grid]\nn1 = 32\n"),
            Err(Error::InvalidConfig(_))
        ));
        assert!(
            ExperimentManifest::parse("[lattice]\npreset = \"square\"\n[solver]\ndt = -1.0\n")
                .is_err()
        );
        assert!(
            ExperimentManifest::parse("[lattice]\npreset = \"square\"\n[grid]\nn1 = 15\n").is_err()
        );
        assert!(ExperimentManifest::parse(
            "[lattice]\npreset = \"square\"\n[experiment]\ncoeffs = \"1 0 1\"\n"
        )
        .is_err());
    }

    #[test]
    fn output_dir_is_created() {
        let tmp = tempfile::tempdir().unwrap();
        let mut m = ExperimentManifest::parse("[lattice]\npreset = \"square\"\n").unwrap();
        m.experiment.output_dir = tmp.path().join("nested/out");
        let dir = m.prepare_output_dir().unwrap();
        assert!(dir.is_dir());
    }
}
