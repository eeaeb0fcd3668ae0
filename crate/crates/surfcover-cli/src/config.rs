//! Declarative run configuration, mirroring the command-line flags.
//!
//! Every field is optional; precedence is flag > config file > built-in
//! default. Unknown keys are rejected so typos fail fast.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    #[serde(default)]
    pub input: InputSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub segment: SegmentSection,
    #[serde(default)]
    pub geodesic: GeodesicSection,
    #[serde(default)]
    pub viewpoint: ViewpointSection,
    #[serde(default)]
    pub metrics: MetricsSection,
    #[serde(default)]
    pub bench: BenchSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct InputSection {
    pub mesh: Option<PathBuf>,
    pub format: Option<String>,
    pub env: Option<Vec<PathBuf>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunSection {
    pub threads: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SegmentSection {
    pub clusters: Option<toml::Value>,
    pub rc: Option<f64>,
    pub norm: Option<String>,
    pub normal_cost: Option<bool>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub alpha3: Option<f64>,
    pub alpha4: Option<f64>,
    pub max_iterations: Option<usize>,
    pub tolerance: Option<f64>,
    pub repair: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct GeodesicSection {
    pub steiner_k: Option<usize>,
    pub straighten_passes: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ViewpointSection {
    pub rs: Option<f64>,
    pub rc: Option<f64>,
    pub phi: Option<f64>,
    pub nc: Option<toml::Value>,
    pub theta_r: Option<f64>,
    pub roll_steps: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct MetricsSection {
    pub threshold: Option<f64>,
    pub theta0: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct BenchSection {
    pub face_cap: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))
    }
}

/// "auto" or a positive integer, used for cluster and candidate counts.
pub fn parse_count(value: &str) -> Result<Option<usize>, String> {
    if value.eq_ignore_ascii_case("auto") {
        return Ok(None);
    }
    value
        .parse::<usize>()
        .map(Some)
        .map_err(|_| format!("expected a positive integer or 'auto', got {value:?}"))
}

/// Count value from a TOML field (integer or the string "auto").
pub fn count_from_toml(value: &toml::Value) -> Result<Option<usize>, CliError> {
    match value {
        toml::Value::Integer(n) if *n > 0 => Ok(Some(*n as usize)),
        toml::Value::String(s) if s.eq_ignore_ascii_case("auto") => Ok(None),
        other => Err(CliError::Input(format!("expected integer or \"auto\", got {other}"))),
    }
}

/// Builds the global rayon pool from flag > config > env > default.
pub fn init_threads(flag: Option<usize>, config: Option<usize>) -> Result<(), CliError> {
    let env = std::env::var("SURFCOVER_THREADS").ok().and_then(|v| v.parse::<usize>().ok());
    if let Some(n) = flag.or(config).or(env) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    }
    Ok(())
}
