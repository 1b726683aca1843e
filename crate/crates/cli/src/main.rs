use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lcb_core::io::{
    self, CurveSource, InspectionDataset, Report, SchemaOptions, WeldTypeKey, to_json_string,
    write_atomic,
};
use lcb_core::regression::{self, FitConfig};
use lcb_core::synth::{SynthConfig, generate_cohort};
use lcb_core::{ClampPolicy, Error, PlateauParams, RegressionFit};
use serde_json::json;

/// Learning-curve Bayesian assessment of welding operators.
#[derive(Debug, Parser)]
#[command(name = "lcb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the plateau learning curve to one weld-type group.
    Fit(DataArgs),
    /// Full pipeline: fit, priors, posteriors, rankings, boxplots, scatter data.
    Analyze(DataArgs),
    /// Operators ordered by informative posterior mean.
    Rank(DataArgs),
    /// Informative against noninformative posterior means.
    Compare(DataArgs),
    /// Generate a synthetic cohort in the input CSV schema.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct Common {
    /// Seed for optimizer restarts and simulation.
    #[arg(long, env = "LCB_SEED", default_value_t = 0)]
    seed: u64,
    /// Credible-interval level.
    #[arg(long, default_value_t = lcb_core::bayes::DEFAULT_LEVEL)]
    level: f64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Inspection CSV with operator_id, total_welds, repaired_welds columns.
    input: PathBuf,
    /// Weld type as `schedule,size,material,weldtype`; required when the
    /// input holds more than one.
    #[arg(long)]
    group: Option<String>,
    /// Use a fixed curve `A,B,C,SIGMA` instead of fitting one.
    #[arg(long, value_parser = parse_curve, allow_hyphen_values = true)]
    curve: Option<(PlateauParams, f64)>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Number of operators.
    #[arg(long, default_value_t = 200)]
    operators: usize,
    #[arg(long, default_value_t = 20)]
    n_min: u64,
    #[arg(long, default_value_t = 500)]
    n_max: u64,
    /// Ground-truth curve `A,B,C,SIGMA`; defaults to the reference curve.
    #[arg(long, value_parser = parse_curve, allow_hyphen_values = true)]
    curve: Option<(PlateauParams, f64)>,
    /// Weld-type columns to attach, as `schedule,size,material,weldtype`.
    #[arg(long)]
    group: Option<String>,
    #[command(flatten)]
    common: Common,
}

const REFERENCE_SIGMA: f64 = 0.0184;

fn parse_curve(s: &str) -> Result<(PlateauParams, f64), String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    let [a, b, c, sigma] = v[..] else {
        return Err(format!("expected A,B,C,SIGMA, got {} values", v.len()));
    };
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(format!("SIGMA must be positive, got {sigma}"));
    }
    let params = PlateauParams::new(a, b, c).map_err(|e| e.to_string())?;
    Ok((params, sigma))
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_data_error() {
            Failure::Data(e)
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Fit(args) => fit(&args),
        Command::Analyze(args) => {
            let report = report(&args)?;
            let text = match args.common.format {
                Format::Json => to_json_string(&report)?,
                Format::Csv => io::posterior_table_csv(&report.informative, &report.comparison)?,
            };
            emit(&args.common, &text)
        }
        Command::Rank(args) => {
            let report = report(&args)?;
            let text = match args.common.format {
                Format::Json => {
                    let mut rows = report.comparison.clone();
                    rows.sort_by_key(|r| r.rank_informative);
                    to_json_string(&json!({
                        "tool": report.tool,
                        "group": report.group,
                        "seed": report.seed,
                        "ranking": rows,
                        "rank_shift": report.rank_shift,
                    }))?
                }
                Format::Csv => io::ranking_csv(&report.comparison)?,
            };
            emit(&args.common, &text)
        }
        Command::Compare(args) => {
            let report = report(&args)?;
            let text = match args.common.format {
                Format::Json => to_json_string(&json!({
                    "tool": report.tool,
                    "group": report.group,
                    "seed": report.seed,
                    "level": report.level,
                    "comparison": report.comparison,
                    "rank_shift": report.rank_shift,
                    "boxplots": report.boxplots,
                }))?,
                Format::Csv => io::comparison_csv(&report.comparison)?,
            };
            emit(&args.common, &text)
        }
        Command::Simulate(args) => simulate(&args),
    }
}

fn load(args: &DataArgs) -> Result<(InspectionDataset, WeldTypeKey), Failure> {
    check_level(args.common.level)?;
    let requested = args
        .group
        .as_deref()
        .map(str::parse::<WeldTypeKey>)
        .transpose()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let dataset = io::ingest_csv(&args.input, &SchemaOptions::default())?;
    let key = dataset.resolve_group(requested.as_ref())?;
    Ok((dataset, key))
}

fn check_level(level: f64) -> Result<(), Failure> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--level must lie in (0, 1), got {level}")))
    }
}

fn report(args: &DataArgs) -> Result<Report, Failure> {
    let (dataset, key) = load(args)?;
    let report = match args.curve {
        None => io::run_pipeline(&dataset, &key, &FitConfig::with_seed(args.common.seed), args.common.level)?,
        Some((params, sigma)) => {
            let records = dataset.group(&key)?;
            let fit = RegressionFit::from_curve(records, params, sigma, ClampPolicy::default())?;
            let mut r = io::build_report(&key, records, fit, CurveSource::Fixed, args.common.seed, args.common.level)?;
            r.provenance = Some(dataset.provenance.clone());
            r
        }
    };
    Ok(report)
}

fn fit(args: &DataArgs) -> Result<(), Failure> {
    let (dataset, key) = load(args)?;
    let records = dataset.group(&key)?;
    let config = FitConfig::with_seed(args.common.seed);
    let (fit, source) = match args.curve {
        None => {
            let fit = regression::fit(records, &config).map_err(|e| Error::Group {
                group: key.to_string(),
                source: Box::new(e),
            })?;
            (fit, CurveSource::Fitted { config })
        }
        Some((params, sigma)) => (
            RegressionFit::from_curve(records, params, sigma, ClampPolicy::default())?,
            CurveSource::Fixed,
        ),
    };
    let text = match args.common.format {
        Format::Json => to_json_string(&json!({
            "tool": lcb_core::io::ToolInfo::default(),
            "group": key.to_string(),
            "seed": args.common.seed,
            "n_operators": records.len(),
            "curve_source": source,
            "fit": fit,
            "provenance": dataset.provenance,
        }))?,
        Format::Csv => io::fit_csv(&fit)?,
    };
    emit(&args.common, &text)
}

fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let (truth, sigma) = args.curve.unwrap_or((PlateauParams::published(), REFERENCE_SIGMA));
    let config = SynthConfig::new(truth, sigma, args.operators, (args.n_min, args.n_max), args.common.seed)?;
    let records = generate_cohort(&config)?;
    let key = args
        .group
        .as_deref()
        .map(str::parse::<WeldTypeKey>)
        .transpose()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let text = match args.common.format {
        Format::Csv => io::records_csv(&records, key.as_ref())?,
        Format::Json => to_json_string(&json!({
            "tool": lcb_core::io::ToolInfo::default(),
            "seed": args.common.seed,
            "truth": truth,
            "sigma": sigma,
            "group": key.map(|k| k.to_string()),
            "records": records,
        }))?,
    };
    emit(&args.common, &text)
}

fn emit(common: &Common, text: &str) -> Result<(), Failure> {
    match &common.out {
        Some(path) => write_atomic(Path::new(path), text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}
