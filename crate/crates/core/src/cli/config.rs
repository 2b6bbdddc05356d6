//! JSON experiment configuration.
//!
//! Matrices are row-major arrays of rows, each entry a `[re, im]` pair.

use crate::linalg::{C64, CMatrix};
use crate::model::{build_model_with_tol, canonical_model, make_sigma_theta, make_tau, BoundaryModel, Involution};
use crate::spectrum::EndCondition;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "config: {}", self.message)
        } else {
            write!(f, "config at `{}`: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn cfg_err(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        path: path.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Spectrum,
    Logdet,
    DetRatio,
    BfkCheck,
    Adiabatic,
    Identities,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Spectrum => "spectrum",
            Kind::Logdet => "logdet",
            Kind::DetRatio => "det-ratio",
            Kind::BfkCheck => "bfk-check",
            Kind::Adiabatic => "adiabatic",
            Kind::Identities => "identities",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Text,
    Csv,
}

/// `[[ [re, im], ... ], ...]`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixSpec(pub Vec<Vec<[f64; 2]>>);

impl MatrixSpec {
    pub fn to_matrix(&self, path: &str) -> Result<CMatrix, ConfigError> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, Vec::len);
        if let Some(i) = self.0.iter().position(|r| r.len() != cols) {
            return Err(cfg_err(&format!("{path}[{i}]"), format!("row has {} entries, expected {cols}", self.0[i].len())));
        }
        Ok(CMatrix::from_fn(rows, cols, |i, j| {
            let [re, im] = self.0[i][j];
            C64::new(re, im)
        }))
    }

    pub fn from_matrix(m: &CMatrix) -> Self {
        Self(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Canonical {
        l: usize,
        #[serde(default)]
        positive_eigenvalues: Vec<f64>,
    },
    Explicit {
        b: MatrixSpec,
        g: MatrixSpec,
        #[serde(default)]
        tolerance: Option<f64>,
    },
}

/// Boundary condition at one end, or an involution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundarySpec {
    Dirichlet,
    Tau,
    SigmaTheta { angles: Vec<f64> },
    Matrix { entries: MatrixSpec },
    Random { seed: u64 },
}

/// A single number or a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sweep {
    One(f64),
    Many(Vec<f64>),
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Sweep::One(x) => vec![*x],
            Sweep::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Pure matrix identities.
    pub identity: f64,
    /// Closed-form determinant identities.
    pub closed_form: f64,
    /// Oracle and limit comparisons.
    pub oracle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-12,
            closed_form: 1e-10,
            oracle: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Format,
}

fn default_truncation() -> usize {
    crate::spectrum::DEFAULT_TRUNCATION
}

fn default_left() -> BoundarySpec {
    BoundarySpec::Tau
}

fn default_r() -> Sweep {
    Sweep::One(1.0)
}

fn default_cases() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub kind: Option<Kind>,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    /// Left end of the cylinder; for glued problems, the far end of the
    /// bulk (and `C(0)` when it is an involution).
    #[serde(default = "default_left")]
    pub left: BoundarySpec,
    #[serde(default)]
    pub right: Option<BoundarySpec>,
    #[serde(default)]
    pub sigma1: Option<BoundarySpec>,
    #[serde(default)]
    pub sigma2: Option<BoundarySpec>,
    /// Bulk length `L` for glued problems.
    #[serde(default)]
    pub bulk_length: Option<f64>,
    #[serde(default = "default_r")]
    pub r: Sweep,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default)]
    pub seed: u64,
    /// Random cases for the `identities` suite.
    #[serde(default = "default_cases")]
    pub cases: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            cfg_err(if path == "." { "" } else { &path }, e.into_inner().to_string())
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| cfg_err("", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn kind(&self) -> Result<Kind, ConfigError> {
        self.kind.ok_or_else(|| cfg_err("kind", "missing experiment kind"))
    }

    pub fn format(&self) -> Format {
        self.output.as_ref().map(|o| o.format).unwrap_or_default()
    }

    /// Check everything that can be checked without running the experiment
    /// and build the shared inputs.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let kind = self.kind()?;
        let rs = self.r.values();
        if rs.is_empty() {
            return Err(cfg_err("r", "empty sweep"));
        }
        for (i, r) in rs.iter().enumerate() {
            if !(*r > 0.0) || !r.is_finite() {
                return Err(cfg_err(&format!("r[{i}]"), format!("length must be positive, got {r}")));
            }
        }
        if let Some(l) = self.bulk_length {
            if !(l > 0.0) || !l.is_finite() {
                return Err(cfg_err("bulk_length", format!("length must be positive, got {l}")));
            }
        }
        let t = &self.tolerances;
        for (name, v) in [("identity", t.identity), ("closed_form", t.closed_form), ("oracle", t.oracle)] {
            if !(v > 0.0) {
                return Err(cfg_err(&format!("tolerances.{name}"), "tolerance must be positive"));
            }
        }
        let model = match kind {
            Kind::Identities => self.model.as_ref().map(build).transpose()?,
            _ => Some(build(self.model.as_ref().ok_or_else(|| cfg_err("model", "missing model"))?)?),
        };
        let l = model.as_ref().map(|m| m.half_kernel_dim());
        let end = |spec: &BoundarySpec, path: &str| -> Result<EndCondition, ConfigError> {
            let model = model.as_ref().ok_or_else(|| cfg_err("model", "missing model"))?;
            to_end(spec, model, path)
        };
        let need = |spec: &Option<BoundarySpec>, path: &str| -> Result<EndCondition, ConfigError> {
            end(spec.as_ref().ok_or_else(|| cfg_err(path, "missing"))?, path)
        };
        let aps = |c: EndCondition, path: &str| -> Result<Involution, ConfigError> {
            match c {
                EndCondition::Aps(s) => Ok(s),
                EndCondition::Dirichlet => Err(cfg_err(path, "an involution is required here")),
            }
        };
        let mut out = Resolved {
            kind,
            model: model.clone(),
            left: None,
            right: None,
            sigma1: None,
            sigma2: None,
            bulk_length: self.bulk_length.unwrap_or(1.0),
            rs,
        };
        match kind {
            Kind::Spectrum | Kind::Logdet => {
                out.left = Some(end(&self.left, "left")?);
                out.right = Some(need(&self.right, "right")?);
            }
            Kind::BfkCheck => {
                out.left = Some(end(&self.left, "left")?);
                out.sigma1 = Some(aps(need(&self.right, "right")?, "right")?);
            }
            Kind::DetRatio | Kind::Adiabatic => {
                out.left = Some(EndCondition::Aps(aps(end(&self.left, "left")?, "left")?));
                out.sigma1 = Some(aps(need(&self.sigma1, "sigma1")?, "sigma1")?);
                out.sigma2 = Some(aps(need(&self.sigma2, "sigma2")?, "sigma2")?);
                if l == Some(0) {
                    return Err(cfg_err("model", "ratios need a nonzero kernel"));
                }
            }
            Kind::Identities => {
                if self.cases == 0 {
                    return Err(cfg_err("cases", "need at least one case"));
                }
            }
        }
        Ok(out)
    }
}

/// Inputs built from a validated configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub kind: Kind,
    pub model: Option<Arc<BoundaryModel>>,
    pub left: Option<EndCondition>,
    pub right: Option<EndCondition>,
    pub sigma1: Option<Involution>,
    pub sigma2: Option<Involution>,
    pub bulk_length: f64,
    pub rs: Vec<f64>,
}

fn build(spec: &ModelSpec) -> Result<Arc<BoundaryModel>, ConfigError> {
    let m = match spec {
        ModelSpec::Canonical { l, positive_eigenvalues } => {
            canonical_model(*l, positive_eigenvalues).map_err(|e| cfg_err("model", e.to_string()))?
        }
        ModelSpec::Explicit { b, g, tolerance } => {
            let b = b.to_matrix("model.b")?;
            let g = g.to_matrix("model.g")?;
            build_model_with_tol(b, g, tolerance.unwrap_or(crate::model::DEFAULT_TOL)).map_err(|e| cfg_err("model", e.to_string()))?
        }
    };
    Ok(Arc::new(m))
}

fn to_end(spec: &BoundarySpec, model: &BoundaryModel, path: &str) -> Result<EndCondition, ConfigError> {
    let l = model.half_kernel_dim();
    let wrap = |e: crate::Error| cfg_err(path, e.to_string());
    let inv = match spec {
        BoundarySpec::Dirichlet => return Ok(EndCondition::Dirichlet),
        BoundarySpec::Tau if l == 0 => Involution::empty(),
        BoundarySpec::Tau => make_tau(model).map_err(wrap)?,
        BoundarySpec::SigmaTheta { angles } => {
            if let Some(i) = angles.iter().position(|t| !(*t > 0.0 && *t < std::f64::consts::FRAC_PI_2)) {
                return Err(cfg_err(&format!("{path}.angles[{i}]"), format!("angle {} not in (0, π/2)", angles[i])));
            }
            make_sigma_theta(model, angles).map_err(wrap)?
        }
        BoundarySpec::Matrix { entries } => {
            let m = entries.to_matrix(&format!("{path}.entries"))?;
            if m.nrows() != 2 * l {
                return Err(cfg_err(&format!("{path}.entries"), format!("expected {0}x{0}, dim ker B = {0}", 2 * l)));
            }
            Involution::new(m).map_err(wrap)?
        }
        BoundarySpec::Random { seed } => Involution::random(l, &mut ChaCha8Rng::seed_from_u64(*seed)),
    };
    Ok(EndCondition::Aps(inv))
}
