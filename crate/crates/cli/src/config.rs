//! Experiment configuration files.
//!
//! ```toml
//! kind = "projection-sweep"
//! seed = 7
//! levels = [12]
//! output = "out/projection"
//!
//! [x]
//! generator = { kind = "cantor_product", level = 12, digits_x = [1], digits_y = [0, 2] }
//!
//! [y]
//! file = "inputs/y.dset"
//! ```
//!
//! Errors carry the dotted path of the offending field.

use std::path::{Path, PathBuf};

use radial_lab::generators::GeneratorSpec;
use radial_lab::{Dyadic, Rational};
use serde::{Deserialize, Serialize};

use crate::RunError;

/// Largest level accepted anywhere in a configuration.
pub const LEVEL_CAP: u32 = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    BoundsTable,
    ProjectionSweep,
    IncidenceSweep,
    FrostmanAudit,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::BoundsTable => "bounds-table",
            ExperimentKind::ProjectionSweep => "projection-sweep",
            ExperimentKind::IncidenceSweep => "incidence-sweep",
            ExperimentKind::FrostmanAudit => "frostman-audit",
        }
    }
}

/// A cube set given either by a generator or by a `DSET1` file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecisionWindow {
    pub m_lo: Option<u32>,
    pub m_hi: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsParams {
    /// Grid step; `1/step` must be an integer.
    pub step: f64,
}

impl Default for BoundsParams {
    fn default() -> Self {
        BoundsParams { step: 0.05 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionParams {
    /// Number of base points drawn from `x`.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Exclusion radius; defaults to `max(1/16, 2δ)`.
    #[serde(default)]
    pub rho: Option<Dyadic>,
}

fn default_samples() -> usize {
    64
}

impl Default for ProjectionParams {
    fn default() -> Self {
        ProjectionParams { samples: default_samples(), rho: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidenceParams {
    /// Exponent of the tube families.
    #[serde(with = "ratio")]
    pub s: Rational,
    /// Exponent of the cube set.
    #[serde(with = "ratio")]
    pub t: Rational,
}

mod ratio {
    use radial_lab::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        text.trim().parse().map_err(|_| serde::de::Error::custom(format!("`{text}` is not a rational like 1/2")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Levels to sweep. Generator levels are replaced by each entry; empty
    /// means "use the sources' own level".
    #[serde(default)]
    pub levels: Vec<u32>,
    /// Slack subtracted from predicted exponents; also the extraction
    /// parameter in audits.
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub precision: Option<PrecisionWindow>,
    #[serde(default)]
    pub x: Option<SetSource>,
    #[serde(default)]
    pub y: Option<SetSource>,
    #[serde(default)]
    pub bounds: Option<BoundsParams>,
    #[serde(default)]
    pub projection: Option<ProjectionParams>,
    #[serde(default)]
    pub incidence: Option<IncidenceParams>,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn field(path: impl Into<String>, message: impl Into<String>) -> RunError {
    RunError::Config { path: path.into(), message: message.into() }
}

impl ExperimentConfig {
    /// A configuration with only the kind set.
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            seed: None,
            levels: Vec::new(),
            eps: None,
            output: default_output(),
            precision: None,
            x: None,
            y: None,
            bounds: None,
            projection: None,
            incidence: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, RunError> {
        let de = toml::Deserializer::new(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            field(if path == "." { "<root>".to_string() } else { path }, e.into_inner().message().trim().to_string())
        })
    }

    /// Reads and validates a file; relative set paths are resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| field("<file>", format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for src in [cfg.x.as_mut(), cfg.y.as_mut()].into_iter().flatten() {
            if let Some(f) = src.file.as_mut() {
                if f.is_relative() {
                    *f = base.join(&*f);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        for (k, &n) in self.levels.iter().enumerate() {
            if n > LEVEL_CAP {
                return Err(field(format!("levels[{k}]"), format!("level {n} exceeds the cap {LEVEL_CAP}")));
            }
            if n == 0 {
                return Err(field(format!("levels[{k}]"), "level must be positive"));
            }
        }
        if let Some(eps) = self.eps {
            if !(eps >= 0.0 && eps.is_finite()) {
                return Err(field("eps", "must be a finite number >= 0"));
            }
        }
        if let Some(w) = self.precision {
            if let (Some(lo), Some(hi)) = (w.m_lo, w.m_hi) {
                if hi < lo + 2 {
                    return Err(field("precision", "window needs at least 3 scales"));
                }
            }
        }
        for (name, src) in [("x", &self.x), ("y", &self.y)] {
            if let Some(src) = src {
                validate_source(name, src)?;
            }
        }
        let need = |name: &str, present: bool| {
            if present {
                Ok(())
            } else {
                Err(field(name, format!("required for {}", self.kind.name())))
            }
        };
        match self.kind {
            ExperimentKind::BoundsTable => {
                let step = self.bounds.unwrap_or_default().step;
                let k = (1.0 / step).round();
                if !(step > 0.0 && step <= 1.0 && (k * step - 1.0).abs() < 1e-9) {
                    return Err(field("bounds.step", format!("{step} is not 1/k for a positive integer k")));
                }
            }
            ExperimentKind::ProjectionSweep => {
                need("x", self.x.is_some())?;
                need("y", self.y.is_some())?;
                need("seed", self.seed.is_some())?;
                let p = self.projection.unwrap_or_default();
                if p.samples == 0 {
                    return Err(field("projection.samples", "must be positive"));
                }
            }
            ExperimentKind::IncidenceSweep => {
                need("incidence", self.incidence.is_some())?;
                need("seed", self.seed.is_some())?;
                need("levels", !self.levels.is_empty())?;
                let inc = self.incidence.expect("checked");
                let (zero, one) = (Rational::from_integer(0), Rational::from_integer(1));
                if inc.s <= zero || inc.s > one {
                    return Err(field("incidence.s", "must lie in (0, 1]"));
                }
                if inc.t <= zero || inc.t > Rational::from_integer(2) {
                    return Err(field("incidence.t", "must lie in (0, 2]"));
                }
            }
            ExperimentKind::FrostmanAudit => {
                need("x", self.x.is_some() || self.y.is_some())?;
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(json))
    }
}

fn validate_source(name: &str, src: &SetSource) -> Result<(), RunError> {
    match (&src.generator, &src.file) {
        (Some(_), Some(_)) | (None, None) => {
            Err(field(name, "give exactly one of `generator` and `file`"))
        }
        (Some(g), None) => {
            if g.level() > LEVEL_CAP {
                return Err(field(
                    format!("{name}.generator.level"),
                    format!("level {} exceeds the cap {LEVEL_CAP}", g.level()),
                ));
            }
            Ok(())
        }
        (None, Some(f)) => {
            if !f.is_file() {
                return Err(field(format!("{name}.file"), format!("{} does not exist", f.display())));
            }
            Ok(())
        }
    }
}

/// The same generator at another level.
pub fn with_level(spec: &GeneratorSpec, n: u32) -> GeneratorSpec {
    let mut spec = spec.clone();
    match &mut spec {
        GeneratorSpec::CantorProduct { level, .. }
        | GeneratorSpec::LineSet { level, .. }
        | GeneratorSpec::RandomTree { level, .. }
        | GeneratorSpec::FullGrid { level }
        | GeneratorSpec::GraphSet { level, .. } => *level = n,
    }
    spec
}

/// The same generator with its seed replaced, for random kinds.
pub fn with_seed(spec: &GeneratorSpec, new_seed: u64) -> GeneratorSpec {
    let mut spec = spec.clone();
    if let GeneratorSpec::RandomTree { seed, .. } | GeneratorSpec::GraphSet { seed, .. } = &mut spec {
        *seed = new_seed;
    }
    spec
}
