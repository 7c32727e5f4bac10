//! `fracspace`: Whitney covers, chain certificates, seminorms, extension and
//! truncated singular integrals on planar polygons, from the command line.
//!
//! Exit codes: 0 success, 1 the run found violations (cover faults or a
//! failed uniformity certificate), 2 bad input or violated hypotheses.

mod commands;
mod config;
mod formats;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fracspace_core::geometry::Side;
use serde_json::json;
use sha2::{Digest, Sha256};

use config::{Command, RunConfig, VariantKind};

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or inconsistent input.
    Input(String),
    Io(String),
    Core(fracspace_core::Error),
}

impl From<fracspace_core::Error> for CliError {
    fn from(e: fracspace_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use fracspace_core::Error::*;
        match self {
            CliError::Core(NoShadowRatio { .. } | Disconnected { .. }) => 1,
            _ => 2,
        }
    }
}

fn parse_side(s: &str) -> Result<Side, String> {
    match s {
        "interior" => Ok(Side::Interior),
        "exterior" => Ok(Side::Exterior),
        _ => Err(format!("expected interior or exterior, got {s:?}")),
    }
}

/// Flags override the config file, which overrides the defaults.
#[derive(Parser, Debug)]
#[command(name = "fracspace", version, about = "Whitney covers, fractional seminorms, extension and T(1) checks on planar polygons")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the effective configuration here and continue.
    #[arg(long)]
    dump_config: Option<PathBuf>,
    /// Domain file, or `square`, `lshape`, `disk:<n>`.
    #[arg(long)]
    domain: Option<String>,
    #[arg(long, value_parser = parse_side)]
    side: Option<Side>,
    #[arg(long = "c-w")]
    c_w: Option<f64>,
    #[arg(long)]
    max_level: Option<u8>,
    /// Nodes per cube axis.
    #[arg(long)]
    m: Option<usize>,
    /// Near-diagonal refinement.
    #[arg(long)]
    r: Option<u8>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, value_enum)]
    variant: Option<VariantKind>,
    #[arg(long)]
    rho: Option<f64>,
    /// Builtin function: `const[:c]`, `x1`, `bump[:r]`, `holder:a`.
    #[arg(long = "f")]
    function: Option<String>,
    /// Node-value CSV (`cube,node,x,y,re[,im]`) instead of a builtin.
    #[arg(long = "f-file")]
    function_file: Option<String>,
    /// `beurling`, `riesz1` or `riesz2`.
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    sweep_levels: Option<Vec<u8>>,
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    #[arg(long)]
    size_cap: Option<f64>,
    /// Treat every cover violation as fatal, including the `{50Q}` overlap.
    #[arg(long)]
    strict: bool,
    /// Report path (default: stdout).
    #[arg(long)]
    json: Option<String>,
    #[arg(long)]
    svg: Option<String>,
    #[arg(long)]
    csv: Option<String>,
    /// Cover file to write (`whitney`).
    #[arg(long)]
    cover: Option<String>,
}

impl Cli {
    fn config(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                RunConfig::from_json(&text)?
            }
            None => RunConfig::default(),
        };
        c.command = self.command;
        macro_rules! set {
            ($field:expr, $flag:expr) => {
                if let Some(v) = $flag.clone() {
                    $field = v;
                }
            };
        }
        set!(c.domain, self.domain);
        set!(c.cover.side, self.side);
        set!(c.cover.c_w, self.c_w);
        set!(c.cover.max_level, self.max_level);
        set!(c.cover.m, self.m);
        set!(c.cover.r, self.r);
        set!(c.seminorm.s, self.s);
        set!(c.seminorm.p, self.p);
        set!(c.seminorm.q, self.q);
        set!(c.seminorm.variant, self.variant);
        set!(c.function, self.function);
        set!(c.kernel, self.kernel);
        set!(c.pairs, self.pairs);
        set!(c.seed, self.seed);
        set!(c.sweep_levels, self.sweep_levels);
        set!(c.radii, self.radii);
        set!(c.size_cap_factor, self.size_cap);
        if self.rho.is_some() {
            c.seminorm.rho = self.rho;
        }
        if self.function_file.is_some() {
            c.function_file = self.function_file.clone();
        }
        c.strict |= self.strict;
        for (slot, flag) in [
            (&mut c.outputs.json, &self.json),
            (&mut c.outputs.svg, &self.svg),
            (&mut c.outputs.csv, &self.csv),
            (&mut c.outputs.cover, &self.cover),
        ] {
            if flag.is_some() {
                *slot = flag.clone();
            }
        }
        c.validate()?;
        Ok(c)
    }
}

/// Everything besides the configuration that a result depends on.
fn provenance(cfg: &RunConfig, domain_hash: &str) -> serde_json::Value {
    use fracspace_core::{chains, extension, geometry};
    json!({
        "tool": "fracspace",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": fracspace_core::VERSION,
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "domain_sha256": domain_hash,
        "defaults": {
            "geometry": {"c_w": geometry::DEFAULT_C_W, "exterior_box_factor": geometry::EXTERIOR_BOX_FACTOR},
            "chains": {
                "rho_grid": chains::RHO_GRID,
                "all_pairs_limit": chains::ALL_PAIRS_LIMIT,
                "certify": chains::CertifyOptions::default(),
            },
            "extension": {"partner_search_factor": extension::PARTNER_SEARCH_FACTOR, "bump_margin": extension::BUMP_MARGIN},
            "czo": {"quadrature": fracspace_core::czo::PvQuadrature::default()},
        },
        "config": cfg,
    })
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let cfg = cli.config()?;
    if let Some(path) = &cli.dump_config {
        std::fs::write(path, cfg.to_json() + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    let domain = formats::load_domain(&cfg.domain)?;
    let domain_json = serde_json::to_vec(&formats::DomainFile::of(&domain)).expect("domain serializes");
    let domain_hash = hex::encode(Sha256::digest(domain_json));
    let outcome = commands::run(&cfg, &domain)?;
    let report = json!({
        "command": cfg.command.name(),
        "status": if outcome.violations { "violations" } else { "ok" },
        "provenance": provenance(&cfg, &domain_hash),
        "result": outcome.result,
    });
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match &cfg.outputs.json {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{path}: {e}")))?,
        None => print!("{text}"),
    }
    Ok(outcome.violations)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(n) = std::env::var("FRACSPACE_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("fracspace: FRACSPACE_THREADS must be a positive integer, got {n:?}");
                return ExitCode::from(2);
            }
        }
    }
    match run(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("fracspace: {} found violations; see the report", cli.command.name());
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("fracspace: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
