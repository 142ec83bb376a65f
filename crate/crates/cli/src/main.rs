//! `pgt` — spin-chain pretty-good-transmission analysis.
//!
//! Subcommands: `analyze` (spectrum, transfer form, frequency count),
//! `scan` (arrival-time dataset as CSV), `fit` (power-law fit of a scanned
//! CSV), `report` (full pipeline). Exit codes: 0 success, 2 invalid
//! config or malformed input, 3 inconclusive frequency classification,
//! 4 empty or unusable dataset.

mod config;
mod csvio;
mod plot;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pgt_core::{GridStep, PgtVerdict, ScalingDataset};
use rug::Float;

#[derive(Parser)]
#[command(name = "pgt", version, about = "Pretty-good-transmission scaling analysis for spin chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print spectrum, transfer form, and frequency classification.
    Analyze(CommonArgs),
    /// Generate the arrival-time dataset and write it as CSV.
    Scan(CommonArgs),
    /// Fit the power law on a previously scanned CSV dataset.
    Fit(CommonArgs),
    /// Run the full pipeline: analysis, scan, fit, verdict.
    Report(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Flat `key = value` experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Also write an SVG log-log plot of the dataset and fit.
    #[arg(long)]
    plot: bool,
    /// Output path override (CSV for `scan`, text otherwise).
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    /// Invalid config or malformed input data.
    Usage(String),
    /// Frequency classification could not be certified.
    Inconclusive(String),
    /// No dataset: empty frontier or certified absence of transmission.
    Empty(String),
}

impl Failure {
    fn exit(self) -> ExitCode {
        let (code, msg) = match self {
            Failure::Usage(m) => (2, m),
            Failure::Inconclusive(m) => (3, m),
            Failure::Empty(m) => (4, m),
        };
        eprintln!("error: {msg}");
        ExitCode::from(code)
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.exit(),
    }
}

/// `PGT_THREADS` caps the worker pool used for batch evaluation.
fn init_threads() {
    if let Ok(v) = std::env::var("PGT_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn load_config(args: &CommonArgs) -> Result<config::ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Failure::Usage(format!("{}: {e}", args.config.display())))?;
    config::parse_config(&text).map_err(|e| Failure::Usage(e.to_string()))
}

fn run_analysis(cfg: &config::ExperimentConfig) -> Result<report::Analysis, Failure> {
    let ana = report::analyze(cfg).map_err(Failure::Usage)?;
    if ana.analysis.unexplored {
        return Err(Failure::Inconclusive(
            "integer-relation search exhausted its height limit before certifying K_I".into(),
        ));
    }
    Ok(ana)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_analyze(args: &CommonArgs) -> Result<(), Failure> {
    let cfg = load_config(args)?;
    let ana = run_analysis(&cfg)?;
    emit(&ana.report, args.out.as_deref())
}

fn csv_path(cfg: &config::ExperimentConfig, args: &CommonArgs) -> Result<PathBuf, Failure> {
    args.out
        .clone()
        .or_else(|| cfg.csv.clone())
        .ok_or_else(|| Failure::Usage("no CSV path: set `csv = <path>` in the config or pass --out".into()))
}

fn svg_path(cfg: &config::ExperimentConfig, csv: &Path) -> PathBuf {
    cfg.svg.clone().unwrap_or_else(|| csv.with_extension("svg"))
}

fn cmd_scan(args: &CommonArgs) -> Result<(), Failure> {
    let cfg = load_config(args)?;
    let path = csv_path(&cfg, args)?;
    let ana = run_analysis(&cfg)?;
    let ds = report::scan(&cfg, &ana);
    let v = report::verdict(&ana, &ds);
    if v.certified && v.verdict == PgtVerdict::NoPgt {
        return Err(Failure::Empty(format!(
            "no pretty-good transmission for this chain: {}",
            v.detail
        )));
    }
    if ds.points.is_empty() {
        return Err(Failure::Empty("the search produced no dataset points".into()));
    }
    std::fs::write(&path, csvio::render(&ds.points, cfg.precision_bits))
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    print!("{}", report::render_scan_summary(&ds));
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_fit(args: &CommonArgs) -> Result<(), Failure> {
    let cfg = load_config(args)?;
    let path = csv_path(&cfg, args)?;
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let points = csvio::parse(&text, cfg.precision_bits)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    if points.is_empty() {
        return Err(Failure::Empty(format!("{}: no data rows", path.display())));
    }
    let ana = run_analysis(&cfg)?;
    let ds = dataset_from_points(&cfg, &ana, points);
    let fit = report::fit_dataset(&cfg, &ds);
    print!("{}", report::render_fit(&fit));
    if args.plot {
        let svg = svg_path(&cfg, &path);
        write_plot(&ds, &fit, &svg)?;
        println!("wrote {}", svg.display());
    }
    Ok(())
}

fn cmd_report(args: &CommonArgs) -> Result<(), Failure> {
    let cfg = load_config(args)?;
    let ana = run_analysis(&cfg)?;
    let ds = report::scan(&cfg, &ana);
    let fit = report::fit_dataset(&cfg, &ds);
    let v = report::verdict(&ana, &ds);

    let mut text = ana.report.clone();
    text.push_str(&report::render_scan_summary(&ds));
    text.push_str(&report::render_fit(&fit));
    text.push_str(&report::render_verdict(&v));

    if let Some(path) = &cfg.csv {
        std::fs::write(path, csvio::render(&ds.points, cfg.precision_bits))
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    if args.plot {
        let svg = cfg
            .svg
            .clone()
            .unwrap_or_else(|| args.config.with_extension("svg"));
        write_plot(&ds, &fit, &svg)?;
    }
    emit(&text, args.out.as_deref())
}

fn dataset_from_points(
    cfg: &config::ExperimentConfig,
    ana: &report::Analysis,
    points: Vec<pgt_core::ScalingPoint>,
) -> ScalingDataset {
    let prec = cfg.precision_bits;
    let mut sup = Float::new(prec);
    let mut perfect = false;
    for pt in &points {
        if pt.probability > sup {
            sup = pt.probability.clone();
        }
        if pt.epsilon.is_zero() {
            perfect = true;
        }
    }
    ScalingDataset {
        points,
        grid: GridStep::Pi,
        precision_bits: prec,
        perfect_transfer: perfect,
        sup_probability: sup,
        budget_exhausted: false,
        analysis: ana.analysis.clone(),
        provenance: String::new(),
    }
}

fn write_plot(ds: &ScalingDataset, fit: &pgt_core::FitResult, path: &Path) -> Result<(), Failure> {
    let ln10 = std::f64::consts::LN_10;
    let pts: Vec<(f64, f64)> = ds
        .points
        .iter()
        .filter(|p| !p.epsilon.is_zero())
        .map(|p| {
            (
                Float::with_val(64, p.epsilon.clone().ln()).to_f64() / ln10,
                Float::with_val(64, p.t.clone().ln()).to_f64() / ln10,
            )
        })
        .collect();
    if pts.is_empty() {
        return Err(Failure::Empty("nothing to plot: all points are exact hits".into()));
    }
    std::fs::write(path, plot::render(&pts, fit))
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}
