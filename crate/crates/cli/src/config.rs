//! Run configuration: what the file form holds, its defaults and ranges.

use fracspace_core::czo::PvQuadrature;
use fracspace_core::geometry::{Side, DEFAULT_C_W};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Whitney,
    Certify,
    Norm,
    Extend,
    T1,
    Harness,
    Sharpness,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Whitney => "whitney",
            Command::Certify => "certify",
            Command::Norm => "norm",
            Command::Extend => "extend",
            Command::T1 => "t1",
            Command::Harness => "harness",
            Command::Sharpness => "sharpness",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum VariantKind {
    Full,
    Shadow,
    Ball,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoverConfig {
    pub side: Side,
    pub c_w: f64,
    pub max_level: u8,
    /// Nodes per cube axis.
    pub m: usize,
    /// Near-diagonal refinement of the seminorm sums.
    pub r: u8,
}

impl Default for CoverConfig {
    fn default() -> Self {
        CoverConfig { side: Side::Interior, c_w: DEFAULT_C_W, max_level: 6, m: 1, r: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeminormConfig {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub variant: VariantKind,
    /// Shadow or ball ratio. A missing shadow ratio is taken from the
    /// uniformity certificate; a missing ball ratio is 0.5.
    pub rho: Option<f64>,
}

impl Default for SeminormConfig {
    fn default() -> Self {
        SeminormConfig { s: 0.5, p: 3.0, q: 2.0, variant: VariantKind::Shadow, rho: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    pub json: Option<String>,
    pub svg: Option<String>,
    pub csv: Option<String>,
    /// Cover file (`whitney` only).
    pub cover: Option<String>,
}

/// Everything a run depends on. Outputs are where results go and are left
/// out of the configuration hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Command,
    /// Path to a domain file, or one of `square`, `lshape`, `disk:<n>`.
    pub domain: String,
    pub cover: CoverConfig,
    pub seminorm: SeminormConfig,
    /// Builtin test function (`const[:c]`, `x1`, `bump[:r]`, `holder:a`).
    pub function: String,
    /// Node-value file; overrides `function` when set.
    pub function_file: Option<String>,
    pub kernel: String,
    pub quadrature: PvQuadrature,
    pub pairs: usize,
    pub seed: u64,
    /// Extra levels for the `norm` convergence table.
    pub sweep_levels: Vec<u8>,
    /// Truncation radii of the `sharpness` experiment.
    pub radii: Vec<f64>,
    pub size_cap_factor: f64,
    /// Exit 1 on any cover violation, including the `{50Q}` overlap.
    pub strict: bool,
    pub outputs: Outputs,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: Command::Whitney,
            domain: "square".into(),
            cover: CoverConfig::default(),
            seminorm: SeminormConfig::default(),
            function: "x1".into(),
            function_file: None,
            kernel: "beurling".into(),
            quadrature: PvQuadrature::default(),
            pairs: 500,
            seed: 42,
            sweep_levels: Vec::new(),
            radii: vec![4.0, 8.0, 16.0, 32.0],
            size_cap_factor: 1.0,
            strict: false,
            outputs: Outputs::default(),
        }
    }
}

/// Largest accepted `max_level`; deeper covers do not fit a desk machine.
pub const MAX_LEVEL_LIMIT: u8 = 12;

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Input(m));
        let c = &self.cover;
        if !(c.c_w > 0.0 && c.c_w.is_finite()) {
            return bad(format!("c_w must be positive, got {}", c.c_w));
        }
        if c.max_level > MAX_LEVEL_LIMIT {
            return bad(format!("max_level must be at most {MAX_LEVEL_LIMIT}, got {}", c.max_level));
        }
        if !(1..=8).contains(&c.m) {
            return bad(format!("m must lie in 1..=8, got {}", c.m));
        }
        if c.r > 4 {
            return bad(format!("r must lie in 0..=4, got {}", c.r));
        }
        if self.sweep_levels.iter().any(|&l| l > MAX_LEVEL_LIMIT) {
            return bad(format!("sweep levels must be at most {MAX_LEVEL_LIMIT}"));
        }
        if self.pairs == 0 {
            return bad("pairs must be at least 1".into());
        }
        if !(self.size_cap_factor > 0.0 && self.size_cap_factor.is_finite()) {
            return bad(format!("size_cap_factor must be positive, got {}", self.size_cap_factor));
        }
        if let Some(rho) = self.seminorm.rho {
            if !(rho > 0.0 && rho.is_finite()) {
                return bad(format!("rho must be positive, got {rho}"));
            }
        }
        Ok(())
    }

    /// SHA-256 of the configuration with the output paths cleared.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.outputs = Outputs::default();
        hex::encode(Sha256::digest(serde_json::to_vec(&c).expect("config serializes")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_json() {
        let mut c = RunConfig { command: Command::T1, ..RunConfig::default() };
        c.seminorm.rho = Some(0.1 + 0.2);
        c.quadrature.delta0 = Some(1.0 / 3.0);
        c.radii = vec![1.1, std::f64::consts::PI];
        c.outputs.json = Some("out.json".into());
        let back = RunConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_json(), c.to_json());
    }

    #[test]
    fn partial_files_take_defaults() {
        let c = RunConfig::from_json(r#"{"command": "norm", "cover": {"max_level": 5}}"#).unwrap();
        assert_eq!(c.command, Command::Norm);
        assert_eq!(c.cover.max_level, 5);
        assert_eq!(c.cover.c_w, DEFAULT_C_W);
        assert!(RunConfig::from_json(r#"{"comand": "norm"}"#).is_err());
    }

    #[test]
    fn hash_ignores_outputs() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.outputs.json = Some("elsewhere.json".into());
        assert_eq!(a.hash(), b.hash());
        b.seed = 7;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn ranges_are_checked() {
        let mut c = RunConfig::default();
        assert!(c.validate().is_ok());
        c.cover.m = 0;
        assert!(c.validate().is_err());
        c.cover.m = 2;
        c.cover.max_level = 30;
        assert!(c.validate().is_err());
    }
}
