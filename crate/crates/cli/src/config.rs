//! JSON experiment configs, one schema per command. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use uniqset_core::exactnum::rational::rational_str;
use uniqset_core::exactnum::Rational;
use uniqset_core::rounding::{ClassSpec, EncodingSpec};
use uniqset_core::spectral::ModulationSpec;
use uniqset_core::uniqueness::{CheckMode, TraceSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodeConfig {
    pub encoding: EncodingSpec,
    /// Signal file to encode.
    pub input: PathBuf,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserveConfig {
    /// Signal file; for a modulated class this is the underlying grid signal.
    pub input: PathBuf,
    pub trace: TraceSpec,
    #[serde(default)]
    pub modulation: Option<ModulationSpec>,
    /// Ball precision in bits when values cannot be exact.
    #[serde(default)]
    pub precision: Option<u32>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum RecoverConfig {
    Sparse {
        observation: PathBuf,
        encoding: EncodingSpec,
        sparsity: usize,
        #[serde(default)]
        output: Option<PathBuf>,
    },
    Bruteforce {
        observation: PathBuf,
        class: ClassSpec,
        #[serde(default)]
        modulation: Option<ModulationSpec>,
        #[serde(default)]
        precision_cap: Option<u32>,
        #[serde(default)]
        limit: Option<u64>,
        #[serde(default)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "lowercase", deny_unknown_fields)]
pub enum VerifyConfig {
    Uniqueness {
        class: ClassSpec,
        #[serde(default)]
        modulation: Option<ModulationSpec>,
        trace: TraceSpec,
        #[serde(default = "auto")]
        mode: CheckMode,
        #[serde(default)]
        precision_cap: Option<u32>,
        #[serde(default)]
        limit: Option<u64>,
        #[serde(default)]
        output: Option<PathBuf>,
    },
    Windows {
        n: usize,
        max_m: usize,
        #[serde(default)]
        limit: Option<u64>,
        #[serde(default)]
        output: Option<PathBuf>,
    },
    Minors {
        n: usize,
        m: usize,
        #[serde(default)]
        allow_composite: bool,
        #[serde(default)]
        limit: Option<u64>,
        #[serde(default)]
        output: Option<PathBuf>,
    },
}

fn auto() -> CheckMode {
    CheckMode::Auto
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuScanConfig {
    /// Signal file holding the exact member `x`.
    pub input: PathBuf,
    pub encoding: EncodingSpec,
    pub sparsity: usize,
    #[serde(with = "rational_str")]
    pub delta: Rational,
    pub mus: Vec<u32>,
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// Raw bytes plus parsed config; relative paths resolve against the config's directory.
pub struct Loaded<T> {
    pub raw: Vec<u8>,
    pub config: T,
    base: PathBuf,
}

impl<T: DeserializeOwned> Loaded<T> {
    pub fn read(path: &Path) -> Result<Self> {
        let raw = std::fs::read(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let config = serde_json::from_slice(&raw).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Loaded { raw, config, base })
    }
}

impl<T> Loaded<T> {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let raw = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_slice(&raw).with_context(|| format!("invalid data in {}", path.display()))
}
