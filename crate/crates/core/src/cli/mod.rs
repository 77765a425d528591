//! Command-line front end. Every subcommand reads one TOML configuration,
//! writes CSV tables (and optional SVG plots) atomically into the output
//! directory, and records a JSON manifest of the run.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde_json::json;

use crate::content::{disjoint_disk_content, greedy_cover_upper, ContentMode, GreedyOptions};
use crate::contour::{annular_decomposition, lemma_cauchy_bound_check, ContourPath, SamplingOptions};
use crate::criterion::lord_ofarrell_series;
use crate::error::Error;
use crate::experiments::{
    functional_sweep, nontangential_limit, tangential_probe, ApproachCurve, LimitExperimentReport, SweepOptions,
};
use crate::geometry::{verify_interior_cone, ClippedDisk, Disk, Region};
use config::{key_for, locate, ConfigError, RunConfig};
use output::{line_plot, num, Outputs, ResultBundle, Series, Table};

pub const OUT_ENV: &str = "POINTDERIV_OUT";
pub const DEFAULT_OUT_DIR: &str = "pointderiv-out";

#[derive(Debug, Parser)]
#[command(name = "pointderiv", version, about = "Bounded point derivation experiments on Swiss-cheese domains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = OUT_ENV)]
    pub out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the configured quadrature tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Recompute even when a cached result exists.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Also emit SVG plots.
    #[arg(long, global = true)]
    pub svg: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Content series, partial sums and verdict.
    Criterion,
    /// Difference quotients along the ray for each gallery function.
    Limit,
    /// Functionals L_x over the gallery, normalised by seminorms.
    Sweep,
    /// Annular splitting of the Cauchy integral.
    Decompose,
    /// Cauchy-integral bound against content times seminorm.
    LemmaCheck,
    /// Content estimates for explicit disks.
    Content,
    /// Cone constant along the ray.
    Cone,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Criterion => "criterion",
            Command::Limit => "limit",
            Command::Sweep => "sweep",
            Command::Decompose => "decompose",
            Command::LemmaCheck => "lemma-check",
            Command::Content => "content",
            Command::Cone => "cone",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Maps library errors: numerical failures keep their own exit code, the
/// rest are consequences of the configuration.
struct Ctx<'a> {
    source: &'a str,
}

impl Ctx<'_> {
    fn err(&self, e: Error) -> CliError {
        if e.is_numerical() {
            return CliError::Numerical(e.to_string());
        }
        let key = key_for(&e);
        CliError::Config(ConfigError { line: locate(self.source, key), message: e.to_string() })
    }

    fn missing(&self, section: &str, command: Command) -> CliError {
        CliError::Config(ConfigError {
            line: None,
            message: format!("`{}` needs a [{section}] section", command.name()),
        })
    }
}

struct RunOutput {
    outputs: Outputs,
    summary: String,
    payload: serde_json::Value,
}

/// Parses arguments, runs the subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(summary) => {
            print!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn load(cli: &Cli) -> Result<(RunConfig, String, String), CliError> {
    let path = cli.config.as_ref().ok_or_else(|| {
        CliError::Config(ConfigError { line: None, message: "--config PATH is required".into() })
    })?;
    let source = fs::read_to_string(path).map_err(|e| {
        CliError::Config(ConfigError { line: None, message: format!("cannot read {}: {e}", path.display()) })
    })?;
    let label = path.display().to_string();
    let mut cfg = RunConfig::parse(&source).map_err(CliError::Config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = cli.tol {
        cfg.tolerances.quad_tol = tol;
    }
    if cli.svg && !cfg.wants_svg() {
        cfg.output.formats.push("svg".into());
    }
    cfg.check_ranges(&source).map_err(CliError::Config)?;
    Ok((cfg, source, label))
}

fn out_dir(cli: &Cli, cfg: &RunConfig) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    let (cfg, source, label) = load(cli)?;
    let ctx = Ctx { source: &source };
    let command = cli.command;
    let hash = cfg.hash(command.name());
    let dir = out_dir(cli, &cfg);
    let cache = dir.join(".cache").join(&hash);
    let manifest_name = format!("{}.json", command.name());

    if !cli.no_cache {
        if let Some((files, summary, payload)) = read_cache(&cache)? {
            for f in &files {
                let bytes = fs::read(cache.join(f))?;
                output::write_atomic(&dir.join(f), &bytes)?;
            }
            write_manifest(&dir.join(&manifest_name), command, &hash, true, files, payload)?;
            return Ok(format!("{summary}(cached {hash})\n"));
        }
    }

    let result = match command {
        Command::Criterion => cmd_criterion(&cfg, &ctx),
        Command::Limit => cmd_limit(&cfg, &ctx),
        Command::Sweep => cmd_sweep(&cfg, &ctx),
        Command::Decompose => cmd_decompose(&cfg, &ctx),
        Command::LemmaCheck => cmd_lemma(&cfg, &ctx),
        Command::Content => cmd_content(&cfg, &ctx),
        Command::Cone => cmd_cone(&cfg, &ctx),
    }?;
    result.outputs.write_all(&dir)?;
    let files: Vec<String> = result.outputs.files.iter().map(|(n, _)| n.clone()).collect();
    write_manifest(&dir.join(&manifest_name), command, &hash, false, files.clone(), result.payload.clone())?;
    fs::create_dir_all(&cache)?;
    result.outputs.write_all(&cache)?;
    let entry = json!({ "files": files, "summary": result.summary, "payload": result.payload, "config": label });
    output::write_atomic(&cache.join("entry.json"), entry.to_string().as_bytes())?;
    Ok(result.summary)
}

type CacheEntry = (Vec<String>, String, serde_json::Value);

fn read_cache(cache: &Path) -> Result<Option<CacheEntry>, CliError> {
    let Ok(text) = fs::read_to_string(cache.join("entry.json")) else {
        return Ok(None);
    };
    let v: serde_json::Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(_) => return Ok(None),
    };
    let files: Option<Vec<String>> = v["files"]
        .as_array()
        .map(|a| a.iter().filter_map(|s| s.as_str().map(String::from)).collect());
    let (Some(files), Some(summary)) = (files, v["summary"].as_str()) else {
        return Ok(None);
    };
    if files.iter().any(|f| !cache.join(f).is_file()) {
        return Ok(None);
    }
    Ok(Some((files, summary.to_string(), v["payload"].clone())))
}

fn write_manifest(
    path: &Path,
    command: Command,
    hash: &str,
    cached: bool,
    files: Vec<String>,
    payload: serde_json::Value,
) -> Result<(), CliError> {
    let bundle = ResultBundle {
        subcommand: command.name().into(),
        config_hash: hash.into(),
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        cached,
        files,
        payload,
    };
    let text = serde_json::to_string_pretty(&bundle).map_err(|e| CliError::Io(e.to_string()))?;
    output::write_atomic(path, text.as_bytes())?;
    Ok(())
}

fn c_json(z: Complex64) -> serde_json::Value {
    json!([z.re, z.im])
}

fn cmd_criterion(cfg: &RunConfig, ctx: &Ctx) -> Result<RunOutput, CliError> {
    let domain = cfg.build_domain().map_err(|e| ctx.err(e))?;
    let rep = lord_ofarrell_series(&domain, cfg.alpha, cfg.criterion.n_max, cfg.criterion.mode).map_err(|e| ctx.err(e))?;
    let mut t = Table::new(&["n", "content_upper", "weighted_term", "partial_sum"]);
    for (term, s) in rep.terms.iter().zip(&rep.partial_sums) {
        t.row([term.n.to_string(), num(term.content_upper), num(term.weighted_term), num(*s)]);
    }
    let mut outputs = Outputs::default();
    outputs.add("criterion.csv", t.into_bytes());
    if cfg.wants_svg() {
        let pts = rep.terms.iter().map(|t| (t.n as f64, t.weighted_term)).collect();
        let svg = line_plot("weighted content terms", "n", "4^n M(A_n \\ U)", &[Series { label: "terms".into(), points: pts }], false, true);
        outputs.add("criterion.svg", svg.into_bytes());
    }
    let mut summary = format!("verdict: {}\n", rep.verdict.as_str());
    if let Some(tail) = rep.tail_bound {
        summary.push_str(&format!("total upper bound: {}\n", num(rep.partial_sums.last().copied().unwrap_or(0.0) + tail)));
    }
    for n in &rep.notes {
        summary.push_str(&format!("note: {n}\n"));
    }
    let payload = json!({
        "verdict": rep.verdict.as_str(),
        "alpha": rep.alpha,
        "tail_bound": rep.tail_bound,
        "family": rep.family,
        "notes": rep.notes,
    });
    Ok(RunOutput { outputs, summary, payload })
}

fn limit_table(rep: &LimitExperimentReport) -> Vec<u8> {
    let mut t = Table::new(&["scale_index", "x_re", "x_im", "quotient_re", "quotient_im", "deviation"]);
    for s in &rep.samples {
        t.row([
            s.scale_index.to_string(),
            num(s.x.re),
            num(s.x.im),
            num(s.quotient.re),
            num(s.quotient.im),
            num(s.deviation),
        ]);
    }
    t.into_bytes()
}

fn limit_json(name: &str, rep: &LimitExperimentReport) -> serde_json::Value {
    json!({
        "function": name,
        "verdict": rep.verdict.as_str(),
        "derivative": c_json(rep.derivative_value),
        "estimated_limit": c_json(rep.estimated_limit),
        "convergence_order": if rep.convergence_order.is_finite() { json!(rep.convergence_order) } else { json!("exact") },
        "final_deviation": rep.final_deviation(),
    })
}

fn cmd_limit(cfg: &RunConfig, ctx: &Ctx) -> Result<RunOutput, CliError> {
    let domain = cfg.build_domain().map_err(|e| ctx.err(e))?;
    let (ray, scales) = cfg.build_ray(&domain).map_err(|e| ctx.err(e))?.ok_or_else(|| ctx.missing("ray", Command::Limit))?;
    let gallery = cfg.build_gallery(&domain).map_err(|e| ctx.err(e))?;
    if gallery.is_empty() {
        return Err(ctx.missing("[gallery]", Command::Limit));
    }
    let mut outputs = Outputs::default();
    let mut summary = String::new();
    let mut payload = Vec::new();
    let mut series = Vec::new();
    for (name, f) in &gallery {
        let rep = nontangential_limit(f, &domain, &ray, scales, cfg.tolerances.limit_tol).map_err(|e| ctx.err(e))?;
        outputs.add(format!("limit_{name}.csv"), limit_table(&rep));
        summary.push_str(&format!(
            "{name}: {} Df = {} final deviation = {}\n",
            rep.verdict.as_str(),
            rep.derivative_value,
            num(rep.final_deviation())
        ));
        payload.push(limit_json(name, &rep));
        series.push(Series {
            label: name.clone(),
            points: rep.samples.iter().map(|s| ((s.x - domain.base_point()).norm(), s.deviation)).collect(),
        });
        if let Some(p) = &cfg.probe {
            let curve = ApproachCurve { base: domain.base_point(), direction: p.direction, curvature: p.curvature, length: p.length };
            let probe = tangential_probe(f, &domain, &curve, scales, cfg.tolerances.limit_tol).map_err(|e| ctx.err(e))?;
            outputs.add(format!("probe_{name}.csv"), limit_table(&probe));
            summary.push_str(&format!("{name} (tangential, descriptive): final deviation = {}\n", num(probe.final_deviation())));
            payload.push(json!({ "probe": limit_json(name, &probe) }));
        }
    }
    if cfg.wants_svg() {
        let svg = line_plot("difference quotient deviation", "|x - x0|", "|quotient - Df|", &series, true, true);
        outputs.add("limit.svg", svg.into_bytes());
    }
    Ok(RunOutput { outputs, summary, payload: json!(payload) })
}

fn cmd_sweep(cfg: &RunConfig, ctx: &Ctx) -> Result<RunOutput, CliError> {
    let domain = cfg.build_domain().map_err(|e| ctx.err(e))?;
    let (ray, scales) = cfg.build_ray(&domain).map_err(|e| ctx.err(e))?.ok_or_else(|| ctx.missing("ray", Command::Sweep))?;
    let named = cfg.build_gallery(&domain).map_err(|e| ctx.err(e))?;
    let (names, gallery): (Vec<String>, Vec<_>) = named.into_iter().unzip();
    let opts = SweepOptions {
        alpha: cfg.alpha,
        pair_count: cfg.sweep.map_or(6000, |s| s.pair_count),
        seed: cfg.seed,
    };
    let rep = functional_sweep(&gallery, &domain, &ray, scales, &opts).map_err(|e| ctx.err(e))?;
    let mut t = Table::new(&["function", "scale_index", "x_re", "x_im", "functional", "seminorm", "ratio"]);
    for e in &rep.entries {
        t.row([
            names[e.function_index].clone(),
            e.scale_index.to_string(),
            num(e.x.re),
            num(e.x.im),
            num(e.functional),
            num(e.seminorm),
            num(e.ratio),
        ]);
    }
    let mut outputs = Outputs::default();
    outputs.add("sweep.csv", t.into_bytes());
    if cfg.wants_svg() {
        let series: Vec<Series> = names
            .iter()
            .enumerate()
            .map(|(i, n)| Series {
                label: n.clone(),
                points: rep.entries.iter().filter(|e| e.function_index == i).map(|e| (e.scale_index as f64, e.ratio)).collect(),
            })
            .collect();
        outputs.add("sweep.svg", line_plot("|L_x f| / seminorm", "scale index", "ratio", &series, false, true).into_bytes());
    }
    let skipped: Vec<&str> = rep.skipped.iter().map(|&i| names[i].as_str()).collect();
    let mut summary = format!("max_ratio: {}\n", num(rep.max_ratio));
    if rep.growth_flag {
        summary.push_str(&format!("warning: ratios grow along the ray (tail growth {})\n", num(rep.tail_growth)));
    }
    if !skipped.is_empty() {
        summary.push_str(&format!("skipped (zero seminorm): {}\n", skipped.join(", ")));
    }
    let payload = json!({
        "max_ratio": rep.max_ratio,
        "tail_growth": rep.tail_growth,
        "growth_flag": rep.growth_flag,
        "skipped": skipped,
    });
    Ok(RunOutput { outputs, summary, payload })
}

fn cmd_decompose(cfg: &RunConfig, ctx: &Ctx) -> Result<RunOutput, CliError> {
    let domain = cfg.build_domain().map_err(|e| ctx.err(e))?;
    let cone = cfg.build_cone(&domain).map_err(|e| ctx.err(e))?.ok_or_else(|| ctx.missing("cone", Command::Decompose))?;
    let sec = cfg.decompose.as_ref().ok_or_else(|| ctx.missing("decompose", Command::Decompose))?;
    let gallery = cfg.build_gallery(&domain).map_err(|e| ctx.err(e))?;
    let mut main = Table::new(&["function", "x_re", "x_im", "lhs_re", "lhs_im", "sum_re", "sum_im", "residual"]);
    let mut terms = Table::new(&["function", "x_re", "x_im", "piece", "term_re", "term_im"]);
    let mut worst: f64 = 0.0;
    for (name, f) in &gallery {
        for p in &sec.points {
            let x = Complex64::new(p[0], p[1]);
            let rep = annular_decomposition(f, x, &domain, &cone, sec.m_outer, sec.n_inner, cfg.tolerances.quad_tol)
                .map_err(|e| ctx.err(e))?;
            let s = rep.sum();
            main.row([name.clone(), num(x.re), num(x.im), num(rep.lhs.re), num(rep.lhs.im), num(s.re), num(s.im), num(rep.residual)]);
            terms.row([name.clone(), num(x.re), num(x.im), "circle".into(), num(rep.circle_term.re), num(rep.circle_term.im)]);
            for (n, t) in &rep.annular_terms {
                terms.row([name.clone(), num(x.re), num(x.im), format!("D{n}"), num(t.re), num(t.im)]);
            }
            worst = worst.max(rep.residual);
        }
    }
    let mut outputs = Outputs::default();
    outputs.add("decompose.csv", main.into_bytes());
    outputs.add("decompose_terms.csv", terms.into_bytes());
    let summary = format!("max residual: {}\n", num(worst));
    Ok(RunOutput { outputs, summary, payload: json!({ "max_residual": worst }) })
}

fn cmd_lemma(cfg: &RunConfig, ctx: &Ctx) -> Result<RunOutput, CliError> {
    let domain = cfg.build_domain().map_err(|e| ctx.err(e))?;
    let sec = cfg.lemma.as_ref().ok_or_else(|| ctx.missing("lemma", Command::LemmaCheck))?;
    let gallery = cfg.build_gallery(&domain).map_err(|e| ctx.err(e))?;
    let center = Complex64::new(sec.center[0], sec.center[1]);
    let opts = SamplingOptions { tol: cfg.tolerances.quad_tol, pair_count: sec.pair_count, seed: cfg.seed };
    let mut t = Table::new(&["function", "radius", "integral_magnitude", "content_upper", "seminorm", "kappa_hat"]);
    let mut summary = String::new();
    let mut payload = Vec::new();
    for (name, f) in &gallery {
        let mut kappas = Vec::new();
        for &r in &sec.radii {
            let path = ContourPath::circle(center, r).map_err(|e| ctx.err(e))?;
            let region = Region::Disk(Disk::new(center, r).map_err(|e| ctx.err(e))?);
            let rep = lemma_cauchy_bound_check(f, &path, &region, cfg.alpha, &opts).map_err(|e| ctx.err(e))?;
            t.row([
                name.clone(),
                num(r),
                num(rep.integral_magnitude),
                num(rep.content_upper),
                num(rep.seminorm_estimate),
                num(rep.kappa_hat),
            ]);
            kappas.push(rep.kappa_hat);
        }
        let lo = kappas.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = kappas.iter().copied().fold(0.0, f64::max);
        summary.push_str(&format!("{name}: kappa_hat in [{}, {}]\n", num(lo), num(hi)));
        payload.push(json!({ "function": name, "kappa_min": lo, "kappa_max": hi }));
    }
    let mut outputs = Outputs::default();
    outputs.add("lemma.csv", t.into_bytes());
    Ok(RunOutput { outputs, summary, payload: json!(payload) })
}

fn cmd_content(cfg: &RunConfig, ctx: &Ctx) -> Result<RunOutput, CliError> {
    let sec = cfg.content.as_ref().ok_or_else(|| ctx.missing("content", Command::Content))?;
    let mut t = Table::new(&[
        "index", "center_re", "center_im", "radius", "upper", "lower_heuristic", "method", "closed_form",
    ]);
    let opts = GreedyOptions { mesh: sec.mesh, ..Default::default() };
    let mut outputs = Outputs::default();
    let mut worst: f64 = 1.0;
    for (i, d) in sec.disks.iter().enumerate() {
        let disk = Disk::new(Complex64::new(d.center[0], d.center[1]), d.radius).map_err(|e| ctx.err(e))?;
        let est = match sec.mode {
            ContentMode::Greedy => greedy_cover_upper(&[disk], cfg.alpha, &opts),
            _ => disjoint_disk_content(&[ClippedDisk::whole_disk(i, disk)], cfg.alpha),
        }
        .map_err(|e| ctx.err(e))?;
        let exact = disk.diameter().powf(1.0 + cfg.alpha);
        worst = worst.max(est.upper / exact);
        t.row([
            i.to_string(),
            num(d.center[0]),
            num(d.center[1]),
            num(d.radius),
            num(est.upper),
            num(est.lower_heuristic),
            est.method.as_str().to_string(),
            num(exact),
        ]);
    }
    outputs.add("content.csv", t.into_bytes());
    let summary = format!("largest upper / closed form: {}\n", num(worst));
    Ok(RunOutput { outputs, summary, payload: json!({ "max_overestimate": worst }) })
}

fn cmd_cone(cfg: &RunConfig, ctx: &Ctx) -> Result<RunOutput, CliError> {
    let domain = cfg.build_domain().map_err(|e| ctx.err(e))?;
    let (ray, scales) = cfg.build_ray(&domain).map_err(|e| ctx.err(e))?.ok_or_else(|| ctx.missing("ray", Command::Cone))?;
    let k = verify_interior_cone(&domain, &ray, scales as usize + 1).map_err(|e| ctx.err(e))?;
    let mut t = Table::new(&["scale_index", "x_re", "x_im", "boundary_distance", "ratio"]);
    for j in 0..=scales {
        let x = ray.dyadic_point(j);
        let d = domain.boundary_distance(x).map_err(|e| ctx.err(e))?;
        t.row([j.to_string(), num(x.re), num(x.im), num(d), num(d / (x - domain.base_point()).norm())]);
    }
    let mut summary = format!("k estimate: {}\n", num(k));
    if let Some(cone) = cfg.build_cone(&domain).map_err(|e| ctx.err(e))? {
        cone.verify_in(&domain).map_err(|e| ctx.err(e))?;
        summary.push_str(&format!("cone of half-angle {} lies in the domain\n", num(cone.half_angle)));
    }
    let mut outputs = Outputs::default();
    outputs.add("cone.csv", t.into_bytes());
    Ok(RunOutput { outputs, summary, payload: json!({ "k_estimate": k }) })
}
