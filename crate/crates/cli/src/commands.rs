//! The subcommands. Each returns a JSON result and writes its side artifacts.

use std::collections::BTreeMap;
use std::path::Path;

use fracspace_core::chains::{certify_uniform, estimate_eps, find_chain, ChainMetric, ShadowIndex};
use fracspace_core::czo::{apply_to_one, key_lemma_ratio, t1_check, verify_kernel, KernelSpec};
use fracspace_core::extension::{build_exterior_structure, extend, extension_norm_ratio, partition_check};
use fracspace_core::funcspace::{seminorm_with, sharpness_experiment, Builtin, GridFunction, SeminormOptions, SeminormParams, Variant};
use fracspace_core::geometry::{build_cover, validate_cover, Domain, Point, Side, Violation, WhitneyCover};
use fracspace_core::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{RunConfig, VariantKind};
use crate::formats::{read_nodes, write_nodes, CoverFile};
use crate::svg::{cover_plot, heat_plot, Plot};
use crate::CliError;

/// What a command produced.
pub struct Outcome {
    pub result: Value,
    /// `true` when the run found violations of what it checks (exit 1).
    pub violations: bool,
}

fn ok(result: Value) -> Outcome {
    Outcome { result, violations: false }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn write_text(path: &str, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{path}: {e}")))
}

fn write_svg(cfg: &RunConfig, plot: impl FnOnce() -> Plot) -> Result<(), CliError> {
    match &cfg.outputs.svg {
        Some(path) => write_text(path, &plot().finish()),
        None => Ok(()),
    }
}

fn cover(cfg: &RunConfig, domain: &Domain, side: Side, level: u8) -> Result<WhitneyCover, CliError> {
    Ok(build_cover(domain, side, cfg.cover.c_w, level)?)
}

fn params(cfg: &RunConfig) -> Result<SeminormParams, CliError> {
    Ok(SeminormParams::new(cfg.seminorm.s, cfg.seminorm.p, cfg.seminorm.q)?)
}

fn function<'c>(cfg: &RunConfig, cover: &'c WhitneyCover) -> Result<GridFunction<'c>, CliError> {
    match &cfg.function_file {
        Some(path) => read_nodes(cover, cfg.cover.m, Path::new(path)),
        None => Ok(GridFunction::builtin(cover, Builtin::parse(&cfg.function, cover)?, cfg.cover.m)?),
    }
}

fn kernel(cfg: &RunConfig) -> Result<KernelSpec, CliError> {
    KernelSpec::by_name(&cfg.kernel)
        .ok_or_else(|| CliError::Input(format!("unknown kernel {:?}; expected beurling, riesz1 or riesz2", cfg.kernel)))
}

/// The shadow ratio in force and where it came from.
fn shadow_rho(cfg: &RunConfig, cover: &WhitneyCover) -> Result<(f64, &'static str), CliError> {
    match cfg.seminorm.rho {
        Some(rho) => Ok((rho, "given")),
        None => Ok((certify_uniform(cover, cfg.pairs, cfg.seed)?.rho_eps, "certified")),
    }
}

pub fn run(cfg: &RunConfig, domain: &Domain) -> Result<Outcome, CliError> {
    use crate::config::Command::*;
    match cfg.command {
        Whitney => whitney(cfg, domain),
        Certify => certify(cfg, domain),
        Norm => norm(cfg, domain),
        Extend => extend_cmd(cfg, domain),
        T1 => t1(cfg, domain),
        Harness => harness(cfg, domain),
        Sharpness => sharpness(cfg),
    }
}

fn violation_kind(v: &Violation) -> &'static str {
    match v {
        Violation::WrongSide { .. } => "wrong_side",
        Violation::Bracket { .. } => "bracket",
        Violation::Overlap { .. } => "overlap",
        Violation::Hole { .. } => "hole",
        Violation::NeighborRatio { .. } => "neighbor_ratio",
        Violation::Absorption { .. } => "absorption",
        Violation::Superposition { .. } => "superposition",
        Violation::SuperpositionUnbounded { .. } => "superposition_unbounded",
    }
}

/// Violations listed in the report; the counts cover all of them.
const LISTED_VIOLATIONS: usize = 100;

fn whitney(cfg: &RunConfig, domain: &Domain) -> Result<Outcome, CliError> {
    let c = cover(cfg, domain, cfg.cover.side, cfg.cover.max_level)?;
    let report = validate_cover(&c);
    let mut by_kind: BTreeMap<&str, usize> = BTreeMap::new();
    for v in &report.violations {
        *by_kind.entry(violation_kind(v)).or_default() += 1;
    }
    let mut levels: BTreeMap<String, usize> = BTreeMap::new();
    for q in c.cubes() {
        *levels.entry(q.level.to_string()).or_default() += 1;
    }
    let local = report.local_violations().count();
    if let Some(path) = &cfg.outputs.cover {
        write_text(path, &(serde_json::to_string(&CoverFile::of(&c)).expect("cover serializes") + "\n"))?;
    }
    write_svg(cfg, || cover_plot(&[&c]))?;
    let violations = local > 0 || (cfg.strict && !report.is_valid());
    Ok(Outcome {
        result: json!({
            "side": c.side(),
            "cubes": report.cubes,
            "frontier": report.frontier,
            "levels": levels,
            "root_scale": c.root_scale(),
            "uncovered_measure": report.uncovered_measure,
            "max_overlap_50q": report.max_overlap_50q,
            "overlap_cap": report.overlap_cap,
            "local_violations": local,
            "violation_counts": by_kind,
            "violations": to_value(&report.violations.iter().take(LISTED_VIOLATIONS).collect::<Vec<_>>()),
        }),
        violations,
    })
}

fn chain_plot(c: &WhitneyCover, cubes: &[usize], central: usize) -> Plot {
    let mut plot = cover_plot(&[c]);
    let pts: Vec<_> = cubes.iter().map(|&i| c.cube(i).center()).collect();
    plot.polyline(&pts, "black", 1.2);
    for (k, &i) in cubes.iter().enumerate() {
        if k == 0 || k + 1 == cubes.len() {
            plot.rect(&c.cube(i).rect(), "orange", "black");
        } else if k == central {
            plot.rect(&c.cube(i).rect(), "limegreen", "black");
        }
    }
    plot
}

fn certify(cfg: &RunConfig, domain: &Domain) -> Result<Outcome, CliError> {
    let c = cover(cfg, domain, Side::Interior, cfg.cover.max_level)?;
    match certify_uniform(&c, cfg.pairs, cfg.seed) {
        Ok(cert) => {
            let (q, s) = cert.worst_pair;
            let chain = find_chain(&c, q, s, cert.metric)?;
            write_svg(cfg, || chain_plot(&c, &chain.cubes, chain.central_index))?;
            Ok(ok(json!({
                "cubes": c.len(),
                "max_level": c.max_level(),
                "certificate": to_value(&cert),
                "worst_chain": to_value(&chain),
            })))
        }
        Err(Error::NoShadowRatio { q, s }) => {
            let (estimate, _) = estimate_eps(&c, cfg.pairs, cfg.seed, ChainMetric::default())?;
            let chain = find_chain(&c, q, s, ChainMetric::default())?;
            write_svg(cfg, || chain_plot(&c, &chain.cubes, chain.central_index))?;
            Ok(Outcome {
                result: json!({
                    "cubes": c.len(),
                    "max_level": c.max_level(),
                    "failure": Error::NoShadowRatio { q, s }.to_string(),
                    "estimate": to_value(&estimate),
                    "failing_chain": to_value(&chain),
                }),
                violations: true,
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn cube_means(f: &GridFunction<'_>) -> Vec<f64> {
    (0..f.cover().len())
        .map(|i| {
            let (re, im) = f.cube_mean(i);
            re.hypot(im)
        })
        .collect()
}

fn norm(cfg: &RunConfig, domain: &Domain) -> Result<Outcome, CliError> {
    let sp = params(cfg)?;
    if cfg.function_file.is_some() && !cfg.sweep_levels.is_empty() {
        return Err(CliError::Input("a node-value file fixes the cover; it cannot be swept over levels".into()));
    }
    let mut levels = cfg.sweep_levels.clone();
    levels.push(cfg.cover.max_level);
    levels.sort_unstable();
    levels.dedup();
    let mut reports = Vec::new();
    let mut rhos = Vec::new();
    let mut table = String::from("level,m,r,value,lp,seminorm,tail,collar\n");
    for &level in &levels {
        let c = cover(cfg, domain, Side::Interior, level)?;
        let f = function(cfg, &c)?;
        let index;
        let (variant, rho, source) = match cfg.seminorm.variant {
            VariantKind::Full => (Variant::Full, None, "none"),
            VariantKind::Ball => {
                let rho = cfg.seminorm.rho.unwrap_or(0.5);
                (Variant::Ball(rho), Some(rho), if cfg.seminorm.rho.is_some() { "given" } else { "default" })
            }
            VariantKind::Shadow => {
                sp.check(&Variant::Full)?;
                let (rho, source) = shadow_rho(cfg, &c)?;
                index = ShadowIndex::build(&c, rho)?;
                (Variant::Shadow(&index), Some(rho), source)
            }
        };
        // Refinement samples the function between nodes, so only builtins can be refined.
        let builtin = match &cfg.function_file {
            None => Some(Builtin::parse(&cfg.function, &c)?),
            Some(_) if cfg.cover.r > 0 => {
                return Err(CliError::Input("refinement (r > 0) needs a builtin function, not a node-value file".into()))
            }
            Some(_) => None,
        };
        let eval = |p: Point| builtin.as_ref().map_or(0.0, |b| b.eval(p));
        let sampler: Option<&(dyn Fn(Point) -> f64 + Sync)> = builtin.as_ref().map(|_| &eval as _);
        let rep = seminorm_with(&f, sp, variant, SeminormOptions { refine: cfg.cover.r, source: sampler })?;
        table.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            level, rep.m, rep.r, rep.total, rep.lp_part, rep.seminorm_part, rep.tail_estimate, rep.diagnostics.collar_measure
        ));
        if level == cfg.cover.max_level {
            write_svg(cfg, || heat_plot(&c, &cube_means(&f)))?;
        }
        rhos.push(json!({"level": level, "rho": rho, "source": source}));
        reports.push(to_value(&rep));
    }
    if let Some(path) = &cfg.outputs.csv {
        write_text(path, &table)?;
    }
    Ok(ok(json!({
        "params": to_value(&sp),
        "function": cfg.function_file.clone().unwrap_or_else(|| cfg.function.clone()),
        "rho": rhos,
        "reports": reports,
    })))
}

fn extend_cmd(cfg: &RunConfig, domain: &Domain) -> Result<Outcome, CliError> {
    let sp = params(cfg)?;
    let int = cover(cfg, domain, Side::Interior, cfg.cover.max_level)?;
    let ext = cover(cfg, domain, Side::Exterior, cfg.cover.max_level)?;
    let st = build_exterior_structure(&int, &ext, cfg.size_cap_factor)?;
    let f = function(cfg, &int)?;
    let extended = extend(&f, &st)?;
    let ratio = extension_norm_ratio(&f, sp, &st)?;
    let partners: Vec<[usize; 2]> = (0..ext.len()).filter_map(|q| st.partner(q).map(|s| [q, s])).collect();
    if let Some(path) = &cfg.outputs.csv {
        write_nodes(&extended, Path::new(path))?;
    }
    write_svg(cfg, || {
        let mut plot = cover_plot(&[&int, &ext]);
        for &[q, s] in &partners {
            plot.arrow(ext.cube(q).center(), int.cube(s).center(), "black");
        }
        plot
    })?;
    let (lo, hi) = st.long_distance_distortion(2000, cfg.seed);
    Ok(ok(json!({
        "params": to_value(&sp),
        "function": cfg.function_file.clone().unwrap_or_else(|| cfg.function.clone()),
        "structure": to_value(&st.stats()),
        "partition": to_value(&partition_check(&st, cfg.cover.m)),
        "long_distance_distortion": [lo, hi],
        "ratio": to_value(&ratio),
        "partners": partners,
    })))
}

fn t1(cfg: &RunConfig, domain: &Domain) -> Result<Outcome, CliError> {
    let spec = kernel(cfg)?;
    let sp = params(cfg)?;
    let c = cover(cfg, domain, Side::Interior, cfg.cover.max_level)?;
    sp.check(&Variant::Full)?;
    let (rho, source) = shadow_rho(cfg, &c)?;
    let index = ShadowIndex::build(&c, rho)?;
    let report = t1_check(&spec, &c, sp, &index, cfg.cover.m, &cfg.quadrature)?;
    if cfg.outputs.csv.is_some() || cfg.outputs.svg.is_some() {
        let g = apply_to_one(&spec, &c, cfg.cover.m, &cfg.quadrature)?;
        if let Some(path) = &cfg.outputs.csv {
            write_nodes(&g.values, Path::new(path))?;
        }
        write_svg(cfg, || heat_plot(&c, &cube_means(&g.values)))?;
    }
    Ok(ok(json!({
        "rho": rho,
        "rho_source": source,
        "kernel_audit": to_value(&verify_kernel(&spec, 4000, cfg.seed)),
        "report": to_value(&report),
    })))
}

fn harness(cfg: &RunConfig, domain: &Domain) -> Result<Outcome, CliError> {
    let spec = kernel(cfg)?;
    let sp = params(cfg)?;
    let c = cover(cfg, domain, Side::Interior, cfg.cover.max_level)?;
    sp.check(&Variant::Full)?;
    let (rho, source) = shadow_rho(cfg, &c)?;
    let index = ShadowIndex::build(&c, rho)?;
    let f = function(cfg, &c)?;
    let report = key_lemma_ratio(&spec, &f, sp, &index, &cfg.quadrature)?;
    Ok(ok(json!({
        "kernel": spec.name(),
        "function": cfg.function_file.clone().unwrap_or_else(|| cfg.function.clone()),
        "rho": rho,
        "rho_source": source,
        "report": to_value(&report),
    })))
}

fn sharpness(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let rep = sharpness_experiment(params(cfg)?, &cfg.radii)?;
    if let Some(path) = &cfg.outputs.csv {
        let mut t = String::from("radius,value,local_slope\n");
        for (k, (r, v)) in rep.radii.iter().zip(&rep.values).enumerate() {
            let local = if k == 0 { String::new() } else { rep.local_slopes[k - 1].to_string() };
            t.push_str(&format!("{r},{v},{local}\n"));
        }
        write_text(path, &t)?;
    }
    Ok(ok(to_value(&rep)))
}
