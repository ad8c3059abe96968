//! Command-line front end. The binary is a thin wrapper over these
//! functions; everything here is also callable as a library.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

pub mod analyze;
pub mod csv;
pub mod kde_cmd;
pub mod mc;
pub mod simulate;
pub mod svg;

use crate::censoring::{
    CensoringSchedule, DEFAULT_DELTA_MM, DEFAULT_D_MAX_MM, DEFAULT_RELIABLE_LO_MM,
};
use crate::error::{Error, Result};
use crate::lcdm::load_manifest;
use crate::simulator::RemainderPlacement;
use crate::stats::TestKind;
use analyze::{AnalyzeOptions, HemisphereReport};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};

/// Fallback seed source when `--seed` is absent.
pub const SEED_ENV_VAR: &str = "CENSORMORPH_SEED";

#[derive(Parser)]
#[command(
    name = "censormorph",
    version,
    about = "Censored-distance analysis of labeled cortical distance maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    shared: SharedArgs,
}

#[derive(Args, Debug, Clone)]
struct SharedArgs {
    /// Censoring bin size in mm
    #[arg(long, global = true, default_value_t = DEFAULT_DELTA_MM)]
    delta: f64,
    /// Largest censoring distance in mm
    #[arg(long, global = true, default_value_t = DEFAULT_D_MAX_MM)]
    dmax: f64,
    /// Start of the reliable reporting window in mm
    #[arg(long = "reliable-lo", global = true, default_value_t = DEFAULT_RELIABLE_LO_MM)]
    reliable_lo: f64,
    /// Significance level
    #[arg(long, global = true, default_value_t = 0.05)]
    alpha: f64,
    /// Master seed (falls back to $CENSORMORPH_SEED, then 1)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 picks automatically. Results never depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output directory
    #[arg(long = "out-dir", global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Emit SVG plots (the default; --no-svg disables)
    #[arg(long, global = true, overrides_with = "no_svg")]
    svg: bool,
    /// Skip SVG plots
    #[arg(long = "no-svg", global = true)]
    no_svg: bool,
    /// Desk-scale Monte Carlo presets (n = 2000, 200 replications)
    #[arg(long, global = true)]
    quick: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Censored-distance analysis of a study manifest
    Analyze(AnalyzeArgs),
    /// Generate one synthetic distance file
    Simulate(SimulateArgs),
    /// Monte Carlo size or power experiment over the censoring schedule
    Mc(McArgs),
    /// Kernel density curves for distance files
    Kde(KdeArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Study manifest (CSV: subject_id,group,hemisphere,path)
    manifest: PathBuf,
    /// Pooled-only mode: final step plus Kolmogorov-Smirnov and Lilliefors
    #[arg(long)]
    pooled: bool,
    /// Attach Holm-adjusted p-values to pooled pairwise rows
    #[arg(long, requires = "pooled")]
    holm: bool,
    /// Monte Carlo replications behind each Lilliefors p-value
    #[arg(long = "lilliefors-mc", default_value_t = 2000)]
    lilliefors_mc: usize,
}

#[derive(Args)]
struct SimulateArgs {
    /// Stack-count shift (0 reproduces the reference profile)
    #[arg(long)]
    eta: u32,
    /// Uniform offset width, in (0, 2)
    #[arg(long)]
    r: f64,
    /// Number of distances to draw
    #[arg(long)]
    n: usize,
    /// Output distance file
    #[arg(long)]
    out: PathBuf,
    /// Where the leftover stack goes: append or sorted
    #[arg(long = "remainder-placement", default_value = "append")]
    remainder_placement: String,
}

#[derive(ValueEnum, Clone, Copy)]
enum McKindArg {
    Size,
    Power,
}

#[derive(Args)]
struct McArgs {
    /// Experiment kind; picks the default preset (size -> null, power -> alt)
    kind: McKindArg,
    /// Scenario preset: null or alt
    #[arg(long)]
    preset: Option<String>,
    /// Explicit sample spec LABEL:ETA:R:N (repeatable, overrides preset)
    #[arg(long = "sample")]
    samples: Vec<String>,
    /// Number of Monte Carlo replications
    #[arg(long = "n-mc")]
    n_mc: Option<usize>,
    /// Remainder placement override: append or sorted
    #[arg(long = "remainder-placement")]
    remainder_placement: Option<String>,
}

#[derive(Args)]
struct KdeArgs {
    /// Distance files, one curve per file
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Fixed bandwidth in mm (default: Silverman's rule per file)
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long = "grid-points", default_value_t = 512)]
    grid_points: usize,
    /// Scale curves by sample size (counts per mm)
    #[arg(long = "scale-counts")]
    scale_counts: bool,
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV_VAR) {
        Ok(text) => text.trim().parse().map_err(|_| {
            Error::ConfigError(format!("bad {SEED_ENV_VAR} value '{text}'"))
        }),
        Err(_) => Ok(1),
    }
}

fn parse_placement(text: &str) -> Result<RemainderPlacement> {
    text.parse().map_err(Error::ConfigError)
}

/// Parses argv and runs; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let threads = cli.shared.threads;
    let body = || match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    if threads > 0 {
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(body),
            Err(e) => {
                eprintln!("error: cannot build thread pool: {e}");
                1
            }
        }
    } else {
        body()
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let shared = cli.shared;
    let schedule = CensoringSchedule::new(shared.delta, shared.dmax, shared.reliable_lo)?;
    let seed = resolve_seed(shared.seed)?;
    let emit_svg = !shared.no_svg;
    std::fs::create_dir_all(&shared.out_dir)?;

    match cli.command {
        Command::Analyze(args) => {
            let manifest = load_manifest(&args.manifest)?;
            let options = AnalyzeOptions {
                pooled_only: args.pooled,
                holm: args.holm,
                lilliefors_mc: args.lilliefors_mc,
                seed,
            };
            let report = analyze::analyze(&manifest, &schedule, &options)?;
            for warning in &report.warnings {
                eprintln!("warning: {warning}");
            }
            for hemi in &report.reports {
                let csv_path = shared.out_dir.join(format!("analysis_{}.csv", hemi.hemisphere));
                csv::write_string(&csv_path, &csv::analysis_csv_string(hemi, args.holm))?;
                let pct = if hemi.raw_count > 0 {
                    100.0 * hemi.clipped_count as f64 / hemi.raw_count as f64
                } else {
                    0.0
                };
                println!(
                    "{}: {} groups, clipped {} of {} distances ({:.3}%), wrote {}",
                    hemi.hemisphere,
                    hemi.groups.len(),
                    hemi.clipped_count,
                    hemi.raw_count,
                    pct,
                    csv_path.display()
                );
                if emit_svg && !args.pooled {
                    write_analysis_svgs(hemi, &shared.out_dir, shared.alpha)?;
                }
            }
            Ok(())
        }
        Command::Simulate(args) => simulate::run(&simulate::SimulateRequest {
            eta: args.eta,
            r: args.r,
            n: args.n,
            seed,
            placement: parse_placement(&args.remainder_placement)?,
            out: args.out,
        }),
        Command::Mc(args) => {
            let request = mc::McRequest {
                kind: match args.kind {
                    McKindArg::Size => mc::McKind::Size,
                    McKindArg::Power => mc::McKind::Power,
                },
                preset: args.preset,
                samples: args.samples,
                n_mc: args.n_mc,
                quick: shared.quick,
                alpha: shared.alpha,
                seed,
                schedule,
                placement: match args.remainder_placement {
                    Some(text) => Some(parse_placement(&text)?),
                    None => None,
                },
            };
            mc::run(&request, &shared.out_dir, emit_svg)
        }
        Command::Kde(args) => kde_cmd::run(
            &kde_cmd::KdeRequest {
                files: args.files,
                bandwidth: args.bandwidth,
                grid_points: args.grid_points,
                scale_counts: args.scale_counts,
            },
            &shared.out_dir,
            emit_svg,
        ),
    }
}

/// One chart for the multi-group tests and one per pairwise test, with the
/// 0.05 (and 0.95 for one-sided tests) guide lines.
fn write_analysis_svgs(hemi: &HemisphereReport, out_dir: &Path, alpha: f64) -> Result<()> {
    let x_max = hemi.rows.iter().map(|r| r.gamma).fold(0.5f64, f64::max);

    let series_for = |tests: &[TestKind]| -> Vec<svg::Series> {
        let mut keys: Vec<(TestKind, String)> = Vec::new();
        for row in &hemi.rows {
            let key = (row.result.test, row.comparison.clone());
            if tests.contains(&row.result.test) && !keys.contains(&key) {
                keys.push(key);
            }
        }
        keys.into_iter()
            .map(|(test, comparison)| svg::Series {
                label: if comparison == "all" {
                    test.as_str().to_string()
                } else {
                    comparison.clone()
                },
                points: hemi
                    .rows
                    .iter()
                    .filter(|r| r.result.test == test && r.comparison == comparison)
                    .map(|r| (r.gamma, r.result.p_value))
                    .collect(),
                band: None,
            })
            .collect()
    };

    let charts: [(&str, Vec<TestKind>, Vec<f64>); 3] = [
        (
            "multigroup",
            vec![TestKind::KruskalWallis, TestKind::AnovaFHov, TestKind::AnovaFWelch],
            vec![alpha],
        ),
        ("wilcoxon", vec![TestKind::Wilcoxon], vec![alpha, 1.0 - alpha]),
        ("welch_t", vec![TestKind::WelchT], vec![alpha, 1.0 - alpha]),
    ];
    for (name, tests, guides) in charts {
        let series = series_for(&tests);
        if series.is_empty() {
            continue;
        }
        let chart = svg::Chart {
            title: &format!("{} hemisphere censored analysis: {name}", hemi.hemisphere),
            x_label: "censoring distance (mm)",
            y_label: "p-value",
            x_max,
            y_max: 1.0,
            guides: &guides,
            series: &series,
        };
        svg::write_chart(
            &out_dir.join(format!("analysis_{}_{name}.svg", hemi.hemisphere)),
            &chart,
        )?;
    }
    Ok(())
}
