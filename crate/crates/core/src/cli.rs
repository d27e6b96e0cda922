//! Command-line front end: `design`, `analyze`, `simulate` and `export`.
//!
//! [`run`] takes the full argument vector and returns the process exit code,
//! so the binary is a one-line wrapper and tests can drive it in-process.
//! Usage errors exit with 2, runtime failures with 1 after printing a single
//! `error[<kind>]: <message>` line to stderr.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::channels::{db_to_linear, ChannelSpec};
use crate::detection::DEFAULT_MPA_ITERATIONS;
use crate::error::{Error, Result};
use crate::error_analysis::{distance_report, ser_union_bound, SuperimposedCodewordSet};
use crate::factor_graph::{peg_construct, IndicatorMatrix};
use crate::group_optimizer::{optimize_group, OptimizerConfig};
use crate::io::{parse_snr_list, read_codebook, write_codebook, write_text, CodebookFile, Provenance, RunConfig};
use crate::progressive_builder::{build_codebooks, SearchMode};
use crate::simulation::{self, DetectorKind, SimulationPlan};

/// Environment variable consulted for the seed when neither a flag nor the
/// config file sets one.
pub const SEED_ENV: &str = "SCMA_FORGE_SEED";

#[derive(Parser, Debug)]
#[command(name = "scma-forge", version, about = "SCMA codebook design, SER bounds and link simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Construct a pattern, optimize the constellation group and build codebooks.
    Design(DesignArgs),
    /// Distance report and union bounds of a codebook file.
    Analyze(AnalyzeArgs),
    /// Monte Carlo SER sweep of a codebook file.
    Simulate(SimulateArgs),
    /// Emit codewords as CSV or a plain-text summary.
    Export(ExportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ChannelKind {
    Rayleigh,
    Rician,
    Nakagami,
}

#[derive(Args, Debug, Default)]
struct ChannelArgs {
    #[arg(long, value_enum)]
    channel: Option<ChannelKind>,
    /// Per-dimension variance of the scattered component.
    #[arg(long)]
    sigma2: Option<f64>,
    /// Line-of-sight amplitude (Rician).
    #[arg(long)]
    u: Option<f64>,
    /// Shape parameter (Nakagami).
    #[arg(long = "m", visible_alias = "nakagami-m")]
    nakagami_m: Option<f64>,
    /// Mean power (Nakagami).
    #[arg(long)]
    omega: Option<f64>,
}

#[derive(Args, Debug)]
struct DesignArgs {
    #[arg(short = 'K', long = "res")]
    res: Option<usize>,
    #[arg(short = 'L', long = "users")]
    users: Option<usize>,
    #[arg(long)]
    dv: Option<usize>,
    #[arg(short = 'M', long = "order")]
    order: Option<usize>,
    /// Comma-separated indicator rows, e.g. `011010,010101,101001,100110`;
    /// replaces the edge-growth construction.
    #[arg(long)]
    indicator: Option<String>,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long)]
    design_snr_db: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long, value_parser = ["auto", "exhaustive", "binary-switching"])]
    search_mode: Option<String>,
    /// `group` stops after the constellation group and writes it alone.
    #[arg(long, value_enum, default_value_t = Stage::Full)]
    stage: Stage,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Stage {
    Group,
    Full,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    codebook: PathBuf,
    /// `start:step:stop` in dB or a comma-separated list.
    #[arg(long)]
    snr: Option<String>,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report path; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    codebook: PathBuf,
    #[arg(long)]
    snr: Option<String>,
    #[arg(long, value_parser = ["ml", "mpa"])]
    detector: Option<String>,
    #[arg(long)]
    mpa_iterations: Option<usize>,
    #[arg(long)]
    mpa_damping: Option<f64>,
    #[arg(long)]
    min_errors: Option<u64>,
    #[arg(long)]
    max_trials: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    batch_size: Option<u64>,
    /// Simulate every user alone instead of the full system.
    #[arg(long)]
    single_user: bool,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV path; a `<output>.meta.json` sidecar is written next to it.
    /// Stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExportArgs {
    codebook: PathBuf,
    #[arg(long, value_enum, default_value_t = ExportFormat::Csv)]
    format: ExportFormat,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ExportFormat {
    Csv,
    Report,
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Design(a) => design(a),
        Command::Analyze(a) => analyze(a),
        Command::Simulate(a) => simulate(a),
        Command::Export(a) => export(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            let line = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {line}", e.kind());
            1
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    path.map(RunConfig::load).transpose().map(Option::unwrap_or_default)
}

fn resolve_seed(flag: Option<u64>, config: &RunConfig) -> Result<u64> {
    if let Some(seed) = flag.or(config.seed) {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Error::Parameter(format!("{SEED_ENV}={v:?} is not an integer"))),
        Err(_) => Ok(0),
    }
}

/// Channel from flags, then config, then `fallback`.
fn resolve_channel(args: &ChannelArgs, config: &RunConfig, fallback: Option<ChannelSpec>) -> Result<ChannelSpec> {
    let kind = match (args.channel, config.channel.as_deref()) {
        (Some(k), _) => Some(k),
        (None, Some(name)) => Some(
            ChannelKind::from_str(name, true)
                .map_err(|_| Error::Parameter(format!("unknown channel {name:?} in config")))?,
        ),
        (None, None) => None,
    };
    let sigma2 = args.sigma2.or(config.sigma2);
    let u = args.u.or(config.u);
    let m = args.nakagami_m.or(config.nakagami_m);
    let omega = args.omega.or(config.omega);
    let kind = match (kind, fallback) {
        (Some(k), _) => k,
        (None, Some(spec)) if sigma2.is_none() && u.is_none() && m.is_none() && omega.is_none() => return Ok(spec),
        (None, Some(ChannelSpec::Rayleigh { .. })) | (None, None) => ChannelKind::Rayleigh,
        (None, Some(ChannelSpec::Rician { .. })) => ChannelKind::Rician,
        (None, Some(ChannelSpec::Nakagami { .. })) => ChannelKind::Nakagami,
    };
    let from_fallback = |pick: fn(&ChannelSpec) -> Option<f64>| fallback.as_ref().and_then(pick);
    match kind {
        ChannelKind::Rayleigh => {
            let s = sigma2.or(from_fallback(|c| match c {
                ChannelSpec::Rayleigh { sigma2 } | ChannelSpec::Rician { sigma2, .. } => Some(*sigma2),
                _ => None,
            }));
            ChannelSpec::rayleigh(s.unwrap_or(0.5))
        }
        ChannelKind::Rician => {
            let s = sigma2.or(from_fallback(|c| match c {
                ChannelSpec::Rayleigh { sigma2 } | ChannelSpec::Rician { sigma2, .. } => Some(*sigma2),
                _ => None,
            }));
            let u = u.or(from_fallback(|c| match c {
                ChannelSpec::Rician { u, .. } => Some(*u),
                _ => None,
            }));
            let u = u.ok_or_else(|| Error::Parameter("rician channel needs --u".into()))?;
            ChannelSpec::rician(u, s.unwrap_or(0.5))
        }
        ChannelKind::Nakagami => {
            let m = m.or(from_fallback(|c| match c {
                ChannelSpec::Nakagami { m, .. } => Some(*m),
                _ => None,
            }));
            let omega = omega.or(from_fallback(|c| match c {
                ChannelSpec::Nakagami { omega, .. } => Some(*omega),
                _ => None,
            }));
            let m = m.ok_or_else(|| Error::Parameter("nakagami channel needs --m".into()))?;
            ChannelSpec::nakagami(m, omega.unwrap_or(1.0))
        }
    }
}

fn output_path(flag: Option<PathBuf>, config: &RunConfig) -> Option<PathBuf> {
    flag.or_else(|| config.output.as_ref().map(PathBuf::from))
}

fn design(args: DesignArgs) -> Result<()> {
    let config = load_config(args.config.as_deref())?;
    let seed = resolve_seed(args.seed, &config)?;
    let spec = resolve_channel(&args.channel, &config, None)?;
    let design_snr_db = args.design_snr_db.or(config.design_snr_db).unwrap_or(16.0);
    let search_mode = match args.search_mode.as_deref().or(config.search_mode.as_deref()).unwrap_or("auto") {
        "auto" => SearchMode::Auto,
        "exhaustive" => SearchMode::Exhaustive,
        "binary-switching" => SearchMode::BinarySwitching,
        other => return Err(Error::Parameter(format!("unknown search mode {other:?}"))),
    };
    let output = output_path(args.output, &config)
        .ok_or_else(|| Error::Parameter("design needs an output path (-o)".into()))?;

    let f = match &args.indicator {
        Some(rows) => IndicatorMatrix::from_bitstrings(&rows.split(',').map(str::trim).collect::<Vec<_>>())?,
        None => {
            let res = args.res.unwrap_or(4);
            let users = args.users.unwrap_or(6);
            let dv = args.dv.unwrap_or(2);
            peg_construct(res, users, dv)?
        }
    };
    for (flag, actual, name) in [(args.res, f.res(), "K"), (args.users, f.users(), "L"), (args.dv, f.dv(), "d_v")] {
        if flag.is_some_and(|v| v != actual) {
            return Err(Error::Parameter(format!("{name} flag disagrees with --indicator")));
        }
    }
    let m = args.order.unwrap_or(4);
    let cfg = OptimizerConfig {
        restarts: args.restarts.or(config.restarts).unwrap_or(OptimizerConfig::default().restarts),
        design_snr_db,
        seed,
        ..OptimizerConfig::default()
    };
    let optimized = optimize_group(m, f.df(), &spec, &cfg)?;
    if args.stage == Stage::Group {
        let doc = json!({
            "M": m,
            "d_f": f.df(),
            "channel": spec,
            "design_snr_db": design_snr_db,
            "objective": optimized.objective,
            "min_sup_distance": optimized.group.min_superimposed_distance(),
            "converged": optimized.converged,
            "seed": seed,
            "restarts": cfg.restarts,
            "subconstellations": optimized
                .group
                .subconstellations()
                .iter()
                .map(|s| s.iter().map(|x| [x.re, x.im]).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        });
        let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Format(e.to_string()))? + "\n";
        return write_text(&output, &text);
    }
    let design = build_codebooks(&f, &optimized.group, &spec, db_to_linear(design_snr_db), search_mode)?;

    let resolved = json!({
        "command": "design",
        "K": f.res(),
        "L": f.users(),
        "d_v": f.dv(),
        "M": m,
        "indicator": f.to_bitstrings(),
        "channel": spec,
        "design_snr_db": design_snr_db,
        "seed": seed,
        "restarts": cfg.restarts,
        "max_iterations": cfg.max_iterations,
        "gradient_tolerance": cfg.gradient_tolerance,
        "constraint_tolerance": cfg.constraint_tolerance,
        "search_mode": search_mode.to_string(),
        "group_objective": optimized.objective,
        "group_min_superimposed_distance": optimized.group.min_superimposed_distance(),
    });
    let provenance = Provenance {
        seed,
        search_mode: design.search_mode.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        objectives_per_re: design.objectives_per_re.clone(),
        config: resolved,
    };
    let file = CodebookFile::new(&f, &design.codebooks, spec, design_snr_db, Some(&optimized.group), provenance)?;
    write_codebook(&output, &file)
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let config = load_config(args.config.as_deref())?;
    let file = read_codebook(&args.codebook)?;
    let spec = resolve_channel(&args.channel, &config, Some(file.channel))?;
    let snr = parse_snr_list(args.snr.as_deref().or(config.snr.as_deref()).unwrap_or("0:2:22"))?;
    let set = SuperimposedCodewordSet::from_codebooks(&file.to_codebooks())?;
    let distances = distance_report(&set)?;
    let bounds = snr
        .iter()
        .map(|&s| Ok(json!({ "snr_db": s, "bound": ser_union_bound(&set, &spec, db_to_linear(s))? })))
        .collect::<Result<Vec<_>>>()?;
    let report = json!({
        "codebook": args.codebook.display().to_string(),
        "config": { "command": "analyze", "channel": spec, "snr_db": snr },
        "min_euclidean": distances.min_euclidean,
        "min_product": distances.min_product,
        "pair_count": distances.pair_count,
        "ser_bound": bounds,
    });
    let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Format(e.to_string()))? + "\n";
    emit(output_path(args.output, &config).as_deref(), &text)
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let config = load_config(args.config.as_deref())?;
    let file = read_codebook(&args.codebook)?;
    let spec = resolve_channel(&args.channel, &config, Some(file.channel))?;
    let snr = parse_snr_list(args.snr.as_deref().or(config.snr.as_deref()).unwrap_or("0:2:20"))?;
    let detector = match args.detector.as_deref().or(config.detector.as_deref()).unwrap_or("mpa") {
        "ml" => DetectorKind::Ml,
        "mpa" => DetectorKind::Mpa {
            iterations: args.mpa_iterations.or(config.mpa_iterations).unwrap_or(DEFAULT_MPA_ITERATIONS),
            damping: args.mpa_damping.or(config.mpa_damping).unwrap_or(0.0),
        },
        other => return Err(Error::Parameter(format!("unknown detector {other:?}"))),
    };
    let mut plan = SimulationPlan::new(snr, detector);
    plan.master_seed = resolve_seed(args.seed, &config)?;
    plan.min_errors = args.min_errors.or(config.min_errors).unwrap_or(plan.min_errors);
    plan.max_trials = args.max_trials.or(config.max_trials).unwrap_or(plan.max_trials);
    plan.workers = args.workers.or(config.workers).unwrap_or(plan.workers);
    plan.batch_size = args.batch_size.or(config.batch_size).unwrap_or(plan.batch_size);

    let codebooks = file.to_codebooks();
    let mut curve = if args.single_user {
        simulation::single_user_bound_curve(&codebooks, &spec, &plan)?
    } else {
        simulation::run(&plan, &codebooks, &spec)?
    };
    curve.attach_union_bound(&codebooks)?;

    let output = output_path(args.output, &config);
    if let Some(path) = &output {
        // workers do not change results and are left out of the metadata
        let meta = json!({
            "command": "simulate",
            "codebook": args.codebook.display().to_string(),
            "codebook_hash": curve.metadata.codebook_hash,
            "channel": spec,
            "single_user": args.single_user,
            "snr_db": plan.snr_points_db,
            "detector": plan.detector,
            "min_errors": plan.min_errors,
            "max_trials": plan.max_trials,
            "batch_size": plan.batch_size,
            "seed": plan.master_seed,
            "tool_version": env!("CARGO_PKG_VERSION"),
        });
        let mut sidecar = path.clone().into_os_string();
        sidecar.push(".meta.json");
        let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::Format(e.to_string()))? + "\n";
        write_text(Path::new(&sidecar), &text)?;
    }
    emit(output.as_deref(), &curve.to_csv())
}

fn export(args: ExportArgs) -> Result<()> {
    let file = read_codebook(&args.codebook)?;
    let text = match args.format {
        ExportFormat::Csv => {
            let mut out = String::from("user,symbol,re_index,real,imag\n");
            for (user, cws) in file.codebooks.iter().enumerate() {
                for (n, c) in cws.iter().enumerate() {
                    for (k, [re, im]) in c.iter().enumerate() {
                        out.push_str(&format!("{user},{n},{k},{re},{im}\n"));
                    }
                }
            }
            out
        }
        ExportFormat::Report => {
            let set = SuperimposedCodewordSet::from_codebooks(&file.to_codebooks())?;
            let d = distance_report(&set)?;
            let mut out = format!(
                "K = {}, L = {}, M = {}, d_v = {}, d_f = {}\nindicator: {}\nchannel: {}\ndesign Es/N0: {} dB\n",
                file.k,
                file.l,
                file.m,
                file.d_v,
                file.d_f,
                file.indicator.join(" "),
                file.channel,
                file.design_snr_db
            );
            out.push_str(&format!(
                "min squared euclidean distance: {}\nmin product distance: {}\nsearch: {}, seed {}\n",
                d.min_euclidean, d.min_product, file.provenance.search_mode, file.provenance.seed
            ));
            for (k, v) in file.provenance.objectives_per_re.iter().enumerate() {
                out.push_str(&format!("objective after RE {k}: {v}\n"));
            }
            out
        }
    };
    emit(args.output.as_deref(), &text)
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
