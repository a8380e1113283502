use std::path::{Path, PathBuf};

use fcp_core::{ContactModel, SurvivalCurve};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, LabResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Simulate,
    Speed,
    Shape,
    Couple,
    Mu,
    Construct,
    Oracle,
}

/// Expected value with an absolute tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expect {
    pub value: f64,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedModel {
    pub name: String,
    pub model: ContactModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expect>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedCurve {
    pub name: String,
    pub mu: SurvivalCurve,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Perturbed inside stationarized lattice.
    Inclusion,
    /// Rescaled perturbed lattice over Richardson.
    Domination,
}

/// Everything a run depends on. Optional fields fall back to per-command
/// defaults; the seed has none.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    #[serde(default)]
    pub models: Vec<NamedModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default)]
    pub n: Vec<u32>,
    /// Horizons; a single value for most commands.
    #[serde(default)]
    pub t: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_radius: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    /// Coupled runs per `n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<usize>,
    /// Grid points (`mu`, `construct`) or angular bins (`shape`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    /// Hitting-time replicas for `mu`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hitting_replicas: Option<usize>,
    #[serde(default)]
    pub couplings: Vec<Coupling>,
    /// Target curves for `construct`.
    #[serde(default)]
    pub targets: Vec<NamedCurve>,
    #[serde(default)]
    pub out: PathBuf,
    #[serde(default)]
    pub strict: bool,
}

impl ExperimentConfig {
    pub fn new(command: Command, seed: u64) -> Self {
        ExperimentConfig {
            command,
            seed,
            models: Vec::new(),
            d: None,
            n: Vec::new(),
            t: Vec::new(),
            box_radius: None,
            replicas: None,
            seeds: None,
            grid: None,
            hitting_replicas: None,
            couplings: Vec::new(),
            targets: Vec::new(),
            out: PathBuf::new(),
            strict: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_json(&text).map_err(|e| LabError::Json { path: path.to_path_buf(), source: e })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON with the output directory blanked, so
    /// the same experiment hashes the same wherever it is written.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        hex(&Sha256::digest(serde_json::to_vec(&c).expect("config serializes")))
    }

    /// Makes the output path absolute.
    pub fn resolve(mut self) -> LabResult<Self> {
        if self.out.as_os_str().is_empty() {
            self.out = PathBuf::from("out");
        }
        if self.out.is_relative() {
            let cwd = std::env::current_dir().map_err(|e| LabError::io(".", e))?;
            self.out = cwd.join(&self.out);
        }
        Ok(self)
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// `FCP_PRESETS` if set, else the presets shipped with the crate.
pub fn presets_dir() -> PathBuf {
    std::env::var_os("FCP_PRESETS")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/presets")))
}

/// A preset by name (`paper-1d`) or by path.
pub fn load_preset(name: &str) -> LabResult<ExperimentConfig> {
    let direct = PathBuf::from(name);
    let path = if direct.is_file() { direct } else { presets_dir().join(format!("{name}.json")) };
    ExperimentConfig::load(&path)
}

/// A model file by path, or by name under `presets/models`.
pub fn load_model(name: &str) -> LabResult<NamedModel> {
    let direct = PathBuf::from(name);
    let path = if direct.is_file() {
        direct
    } else {
        let file = if name.ends_with(".json") { name.to_string() } else { format!("{name}.json") };
        presets_dir().join("models").join(file)
    };
    let text = std::fs::read_to_string(&path).map_err(|e| LabError::io(&path, e))?;
    let model: ContactModel =
        serde_json::from_str(&text).map_err(|e| LabError::Json { path: path.clone(), source: e })?;
    model.validate()?;
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(NamedModel { name: stem, model, expect: None })
}
