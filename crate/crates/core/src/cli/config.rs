//! TOML experiment configuration.

use std::path::{Path, PathBuf};

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{ComplexMode, PhasePoint};
use crate::knight::SamplerSpec;
use crate::measure::WindowEvent;
use crate::models::{build_chain, build_custom_rows, build_discrete_klein_gordon, DynamicalMatrix, Region};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Chain {
        n: usize,
        #[serde(default = "one")]
        coupling: f64,
        #[serde(default = "one")]
        pinning: f64,
        #[serde(default)]
        periodic: bool,
    },
    KleinGordon {
        grid_points: usize,
        mass: f64,
        spacing: f64,
    },
    Custom {
        entries: Vec<Vec<f64>>,
    },
}

fn one() -> f64 {
    1.0
}

impl ModelSpec {
    pub fn build(&self) -> Result<DynamicalMatrix> {
        match self {
            ModelSpec::Chain {
                n,
                coupling,
                pinning,
                periodic,
            } => build_chain(*n, *coupling, *pinning, *periodic),
            ModelSpec::KleinGordon {
                grid_points,
                mass,
                spacing,
            } => build_discrete_klein_gordon(*grid_points, *mass, *spacing),
            ModelSpec::Custom { entries } => build_custom_rows(entries),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            ModelSpec::Chain { n, .. } => *n,
            ModelSpec::KleinGordon { grid_points, .. } => *grid_points,
            ModelSpec::Custom { entries } => entries.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ExperimentKind {
    Locality,
    Knight,
    Coherent,
    Licht,
    Cyclicity,
    Separability,
    Measure,
    #[default]
    All,
}

impl ExperimentKind {
    pub fn includes(self, other: ExperimentKind) -> bool {
        self == ExperimentKind::All || self == other
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockConfig {
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default = "default_max_degree")]
    pub max_degree: usize,
    /// Number of random local polynomials in the separability experiment.
    #[serde(default = "default_polynomials")]
    pub polynomials: usize,
    #[serde(default = "default_polynomial_degree")]
    pub polynomial_degree: usize,
}

fn default_truncation() -> usize {
    12
}

fn default_max_degree() -> usize {
    4
}

fn default_polynomials() -> usize {
    100
}

fn default_polynomial_degree() -> usize {
    3
}

impl Default for FockConfig {
    fn default() -> Self {
        Self {
            truncation: default_truncation(),
            max_degree: default_max_degree(),
            polynomials: default_polynomials(),
            polynomial_degree: default_polynomial_degree(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_count() -> usize {
    200
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            count: default_count(),
            amplitude: 1.0,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn spec(&self) -> Result<SamplerSpec> {
        SamplerSpec::new(self.count, self.amplitude, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhasePointConfig {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhasePointConfig {
    fn displacement(n: usize, site: usize, value: f64) -> Self {
        let mut q = vec![0.0; n];
        q[site] = value;
        Self { q, p: vec![0.0; n] }
    }

    pub fn to_phase_point(&self) -> Result<PhasePoint> {
        PhasePoint::from_slices(&self.q, &self.p)
    }
}

/// One-particle vector given by its real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub im: Vec<f64>,
}

impl ModeConfig {
    pub fn to_mode(&self) -> Result<ComplexMode> {
        let n = self.re.len();
        if !self.im.is_empty() && self.im.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.im.len(),
            });
        }
        let im = |j: usize| self.im.get(j).copied().unwrap_or(0.0);
        Ok(ComplexMode(DVector::from_fn(n, |j, _| {
            Complex64::new(self.re[j], im(j))
        })))
    }
}

/// States probed by the locality experiments.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatesConfig {
    /// Probe of the one-quantum test; defaults to the first localizable
    /// mode when one exists and to the first region site otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub one_quantum: Option<ModeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherent: Option<PhasePointConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub licht_x1: Option<PhasePointConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub licht_x2: Option<PhasePointConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("qlab-out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_out_dir() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub region: Vec<usize>,
    #[serde(default)]
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub fock: FockConfig,
    #[serde(default)]
    pub windows: Vec<WindowEvent>,
    #[serde(default)]
    pub states: StatesConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub experiment: Option<ExperimentKind>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(k) = overrides.experiment {
            self.experiment = k;
        }
        if let Some(seed) = overrides.seed {
            self.sampler.seed = seed;
        }
        if let Some(dir) = &overrides.out_dir {
            self.output.dir = dir.clone();
        }
    }

    pub fn region(&self) -> Result<Region> {
        let b = Region::new(self.model.n(), self.region.iter().copied())?;
        b.check_proper()?;
        Ok(b)
    }

    /// Checks every cross-reference against the model size and fills in the
    /// default windows and probe states. Idempotent.
    pub fn resolve(mut self) -> Result<Self> {
        let n = self.model.n();
        let b = self.region()?;
        self.sampler.spec()?;
        if self.fock.truncation == 0 {
            return Err(Error::InvalidParameter {
                name: "fock.truncation",
                reason: "must be positive".into(),
            });
        }
        if self.fock.polynomials == 0 {
            return Err(Error::InvalidParameter {
                name: "fock.polynomials",
                reason: "must be positive".into(),
            });
        }
        let first = b.members()[0];
        if self.windows.is_empty() {
            self.windows.push(WindowEvent::new(first, -0.1, 0.1)?);
        }
        for w in &self.windows {
            WindowEvent::new(w.site, w.lo, w.hi)?;
            if w.site >= n {
                return Err(Error::IndexOutOfRange { index: w.site, n });
            }
        }
        let states = &mut self.states;
        states
            .coherent
            .get_or_insert_with(|| PhasePointConfig::displacement(n, first, 1.0));
        states
            .licht_x1
            .get_or_insert_with(|| PhasePointConfig::displacement(n, first, 1.0));
        states
            .licht_x2
            .get_or_insert_with(|| PhasePointConfig::displacement(n, first, 2.0));
        for x in [&states.coherent, &states.licht_x1, &states.licht_x2]
            .into_iter()
            .flatten()
        {
            check_len(n, x.to_phase_point()?.n())?;
        }
        if let Some(m) = &states.one_quantum {
            check_len(n, m.to_mode()?.n())?;
        }
        Ok(self)
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
