//! Experiment configuration: flat `key = value` files with `#` comments,
//! overridden key by key from the command line.

use std::fmt;
use std::path::{Path, PathBuf};

use zeno_dd_core::linalg::{self, random_traceless_hermitian, ComplexMatrix};
use zeno_dd_core::model::{parse_matrix, reference_model, BipartiteModel};
use zeno_dd_core::protocol::DecouplingSet;
use zeno_dd_core::Ensemble;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Reference,
    /// Random traceless Hermitian `H` on `d₁d₂` dimensions.
    Random(u64),
    /// Hamiltonian matrix read from a file.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetSpec {
    Pauli,
    PauliAtypical,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SigmaSpec {
    Pure0,
    MaxMixed,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub d1: usize,
    pub d2: usize,
    pub big_t: f64,
    pub set: SetSpec,
    pub n_min: usize,
    pub n_max: usize,
    pub n_points: usize,
    pub samples: usize,
    pub seed: u64,
    pub sigma1: SigmaSpec,
    pub sigma2: SigmaSpec,
    pub threshold: f64,
    pub out: PathBuf,
    pub threads: Option<usize>,
    /// Statistic names; each command falls back to its own list when empty.
    pub statistics: Vec<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelSpec::Reference,
            d1: 2,
            d2: 2,
            big_t: 1.0,
            set: SetSpec::Pauli,
            n_min: 1,
            n_max: 100,
            n_points: 24,
            samples: 100,
            seed: 20_240_101,
            sigma1: SigmaSpec::Pure0,
            sigma2: SigmaSpec::Pure0,
            threshold: 0.99,
            out: PathBuf::from("."),
            threads: None,
            statistics: Vec::new(),
        }
    }
}

/// Every key accepted in a config file; each is also a `--flag`.
pub const KEYS: &[&str] = &[
    "model", "d1", "d2", "big-t", "set", "n-min", "n-max", "n-points", "samples", "seed", "sigma1", "sigma2",
    "threshold", "out", "threads", "statistics",
];

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| usage(format!("invalid value `{value}` for `{key}`")))
}

impl ModelSpec {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "reference" => Ok(Self::Reference),
            _ => {
                if let Some(seed) = s.strip_prefix("random:") {
                    Ok(Self::Random(parse_num("model", seed)?))
                } else if let Some(path) = s.strip_prefix("file:") {
                    Ok(Self::File(path.into()))
                } else {
                    Err(usage(format!("unknown model `{s}` (reference | random:SEED | file:PATH)")))
                }
            }
        }
    }
}

impl SetSpec {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "pauli" => Ok(Self::Pauli),
            "pauli-atypical" => Ok(Self::PauliAtypical),
            _ => s
                .strip_prefix("file:")
                .map(|p| Self::File(p.into()))
                .ok_or_else(|| usage(format!("unknown pulse set `{s}` (pauli | pauli-atypical | file:PATH)"))),
        }
    }
}

impl SigmaSpec {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "pure-0" => Ok(Self::Pure0),
            "max-mixed" => Ok(Self::MaxMixed),
            _ => {
                let path = s.strip_prefix("file:").unwrap_or(s);
                if path.is_empty() {
                    return Err(usage("empty sigma file path"));
                }
                Ok(Self::File(path.into()))
            }
        }
    }

    /// Short token used in output file names.
    pub fn tag(&self) -> String {
        match self {
            Self::Pure0 => "pure0".into(),
            Self::MaxMixed => "mixed".into(),
            Self::File(p) => p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "file".into()),
        }
    }

    fn density(&self, d: usize) -> Result<ComplexMatrix, CliError> {
        match self {
            Self::Pure0 => Ok(linalg::basis_projector(d, 0)),
            Self::MaxMixed => Ok(linalg::maximally_mixed(d)),
            Self::File(p) => Ok(parse_matrix(&read(p)?)?),
        }
    }
}

impl fmt::Display for SigmaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Pure0 => f.write_str("pure-0"),
            Self::MaxMixed => f.write_str("max-mixed"),
            Self::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Pulse-set file: blocks introduced by `pulse LABEL WEIGHT`, each followed by
/// the rows of its unitary.
pub fn parse_set(text: &str) -> Result<DecouplingSet, CliError> {
    let (mut labels, mut weights, mut bodies) = (Vec::new(), Vec::new(), Vec::<String>::new());
    for line in text.lines() {
        let trimmed = line.split('#').next().unwrap_or("").trim();
        if let Some(rest) = trimmed.strip_prefix("pulse ") {
            let mut parts = rest.split_whitespace();
            let (Some(label), Some(weight), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(usage(format!("malformed pulse header `{trimmed}`")));
            };
            labels.push(label.to_string());
            weights.push(parse_num::<f64>("pulse weight", weight)?);
            bodies.push(String::new());
        } else if !trimmed.is_empty() {
            let body = bodies.last_mut().ok_or_else(|| usage("matrix row before the first `pulse` header"))?;
            body.push_str(trimmed);
            body.push('\n');
        }
    }
    let unitaries = bodies.iter().map(|b| parse_matrix(b)).collect::<Result<Vec<_>, _>>()?;
    Ok(DecouplingSet::new(unitaries, weights, labels)?)
}

impl ExperimentConfig {
    /// Applies one `key = value` setting. Underscores in keys are accepted as
    /// hyphens.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match key.as_str() {
            "model" => self.model = ModelSpec::parse(value)?,
            "d1" => self.d1 = parse_num(&key, value)?,
            "d2" => self.d2 = parse_num(&key, value)?,
            "big-t" | "t" => self.big_t = parse_num(&key, value)?,
            "set" => self.set = SetSpec::parse(value)?,
            "n-min" => self.n_min = parse_num(&key, value)?,
            "n-max" => self.n_max = parse_num(&key, value)?,
            "n-points" => self.n_points = parse_num(&key, value)?,
            "samples" => self.samples = parse_num(&key, value)?,
            "seed" => self.seed = parse_num(&key, value)?,
            "sigma1" => self.sigma1 = SigmaSpec::parse(value)?,
            "sigma2" => self.sigma2 = SigmaSpec::parse(value)?,
            "threshold" => self.threshold = parse_num(&key, value)?,
            "out" => self.out = PathBuf::from(value),
            "threads" => self.threads = Some(parse_num(&key, value)?),
            "statistics" => {
                self.statistics =
                    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
            }
            _ => return Err(usage(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("line {}: expected `key = value`", lineno + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        cfg.apply_text(&read(path)?)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.big_t >= 0.0 && self.big_t.is_finite()) {
            return Err(usage(format!("T = {} must be finite and nonnegative", self.big_t)));
        }
        if self.n_min == 0 || self.n_max < self.n_min || self.n_points == 0 {
            return Err(usage(format!(
                "invalid n grid: min {}, max {}, points {}",
                self.n_min, self.n_max, self.n_points
            )));
        }
        if self.d1 == 0 || self.d2 == 0 {
            return Err(usage("dimensions must be positive"));
        }
        if self.threads == Some(0) {
            return Err(usage("threads must be positive"));
        }
        Ok(())
    }

    /// `n_points` geometrically spaced integers in `[n_min, n_max]`, rounded,
    /// deduplicated and ascending.
    pub fn n_grid(&self) -> Vec<usize> {
        geometric_grid(self.n_min, self.n_max, self.n_points)
    }

    pub fn build_model(&self) -> Result<BipartiteModel, CliError> {
        let model = match &self.model {
            ModelSpec::Reference => {
                if (self.d1, self.d2) != (2, 2) {
                    return Err(usage("the reference model is two qubits (d1 = d2 = 2)"));
                }
                reference_model()
            }
            ModelSpec::Random(seed) => {
                BipartiteModel::new(random_traceless_hermitian(self.d1 * self.d2, *seed), self.d1, self.d2)?
            }
            ModelSpec::File(p) => BipartiteModel::new(parse_matrix(&read(p)?)?, self.d1, self.d2)?,
        };
        Ok(model.with_big_t(self.big_t))
    }

    pub fn build_set(&self) -> Result<DecouplingSet, CliError> {
        let set = match &self.set {
            SetSpec::Pauli => DecouplingSet::pauli(),
            SetSpec::PauliAtypical => DecouplingSet::pauli_atypical(),
            SetSpec::File(p) => parse_set(&read(p)?)?,
        };
        if set.dim() != self.d1 {
            return Err(usage(format!("pulse set acts on dimension {}, d1 is {}", set.dim(), self.d1)));
        }
        Ok(set)
    }

    pub fn build_ensemble(&self) -> Result<Ensemble, CliError> {
        let sigma1 = self.sigma1.density(self.d1)?;
        let sigma2 = self.sigma2.density(self.d2)?;
        Ok(Ensemble::new(self.build_model()?, self.build_set()?, sigma1, sigma2)?)
    }

    /// `<sigma1>-<sigma2>` token for file names.
    pub fn sigma_tag(&self) -> String {
        format!("{}-{}", self.sigma1.tag(), self.sigma2.tag())
    }
}

pub fn geometric_grid(min: usize, max: usize, points: usize) -> Vec<usize> {
    if points <= 1 || min == max {
        return vec![max];
    }
    let ratio = (max as f64 / min as f64).ln();
    let mut grid: Vec<usize> = (0..points)
        .map(|k| (min as f64 * (ratio * k as f64 / (points - 1) as f64).exp()).round() as usize)
        .map(|n| n.clamp(min, max))
        .collect();
    grid.dedup();
    grid
}
