//! Command implementations behind the `rankscreen` binary.

pub mod data;
pub mod error;
pub mod report;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rankscreen::bench::{self, BenchConfig, BenchSummary, FULL_REPLICATIONS};
use rankscreen::simgen::ScenarioCatalog;
use rankscreen::{impute_distribution, pearson_sis_scores, select_top, srcs_cen_scores, srcs_scores, Method};

use crate::error::CliError;
use crate::report::ScreenReport;

#[derive(Debug, Parser)]
#[command(name = "rankscreen", version, about = "Rank-based marginal feature screening")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score and rank every feature of a CSV dataset.
    Screen(ScreenArgs),
    /// Run the simulation benchmark on built-in or user-supplied scenarios.
    Bench(BenchArgs),
    /// List the scenario catalog.
    Scenarios(CatalogArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Srcs,
    #[value(name = "srcs_cen", alias = "srcs-cen")]
    SrcsCen,
    Pearson,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Srcs => Method::Srcs,
            MethodArg::SrcsCen => Method::SrcsCen,
            MethodArg::Pearson => Method::PearsonSis,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, clap::Args)]
pub struct ScreenArgs {
    /// CSV file with a header row.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Column holding the response (or observed time).
    #[arg(long, short)]
    pub response: String,
    /// Column holding the event indicator (1 = event, 0 = censored).
    #[arg(long, short)]
    pub event: Option<String>,
    /// Defaults to srcs_cen when --event is given and srcs otherwise.
    #[arg(long, short, value_enum)]
    pub method: Option<MethodArg>,
    /// Multiplier in d_n = a * ceil(n / ln n).
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, short, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Show every feature in the table, not just the selected ones.
    #[arg(long)]
    pub all: bool,
}

#[derive(Debug, clap::Args)]
pub struct CatalogArgs {
    /// TOML scenario catalog replacing the built-in one.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct BenchArgs {
    /// Scenario names; all catalog scenarios when none are given.
    pub scenarios: Vec<String>,
    #[arg(long = "scenario", short = 's')]
    pub scenario_flags: Vec<String>,
    /// Methods to compare; all three when omitted.
    #[arg(long = "method", short, value_enum)]
    pub methods: Vec<MethodArg>,
    #[arg(long, default_value_t = bench::DEFAULT_REPLICATIONS)]
    pub reps: usize,
    /// Use the full replication count.
    #[arg(long, conflicts_with = "reps")]
    pub full: bool,
    #[arg(long, default_value_t = BenchConfig::default().master_seed)]
    pub seed: u64,
    #[arg(long, short, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Print scenario names and exit.
    #[arg(long)]
    pub list: bool,
    #[command(flatten)]
    pub catalog: CatalogArgs,
}

pub fn run<W: Write>(cli: Cli, out: &mut W) -> Result<(), CliError> {
    match cli.command {
        Command::Screen(args) => cmd_screen(&args, out),
        Command::Bench(args) => cmd_bench(&args, out),
        Command::Scenarios(args) => cmd_scenarios(&args, out),
    }
}

fn check_threads(threads: Option<usize>) -> Result<(), CliError> {
    if threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    Ok(())
}

fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    check_threads(threads)?;
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

pub fn screen_report(args: &ScreenArgs) -> Result<ScreenReport, CliError> {
    if !(args.a.is_finite() && args.a > 0.0) {
        return Err(CliError::Usage(format!("--a must be positive, got {}", args.a)));
    }
    let data = data::load_csv(&args.input, &args.response, args.event.as_deref())?;
    let method = match args.method {
        Some(m) => Method::from(m),
        None if data.censored => Method::SrcsCen,
        None => Method::Srcs,
    };
    if method == Method::SrcsCen && !data.censored {
        return Err(CliError::Usage("srcs_cen needs --event".into()));
    }
    let times = data.response.times();
    let scores = with_threads(args.threads, || match method {
        Method::Srcs => srcs_scores(&data.x, times),
        Method::SrcsCen => srcs_cen_scores(&data.x, &data.response),
        Method::PearsonSis => pearson_sis_scores(&data.x, times),
    })??;
    let n = data.x.n();
    let scores = select_top(scores, n, args.a);
    let mut report = ScreenReport::from_scores(&scores, data.x.feature_names(), n, data.rows_dropped, args.a);
    if data.censored {
        report.censoring_ratio = Some(data.response.censoring_ratio());
    }
    if method == Method::SrcsCen {
        report.capped_weights = Some(impute_distribution(&data.response).capped_weights);
    }
    Ok(report)
}

fn cmd_screen<W: Write>(args: &ScreenArgs, out: &mut W) -> Result<(), CliError> {
    let report = screen_report(args)?;
    match args.format {
        Format::Table => report.write_table(out, args.all)?,
        Format::Csv => report.write_csv(out).map_err(|e| CliError::Io(e.into()))?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &report).map_err(|e| CliError::Io(e.into()))?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn load_catalog(args: &CatalogArgs) -> Result<ScenarioCatalog, CliError> {
    match &args.catalog {
        None => Ok(ScenarioCatalog::builtin()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            Ok(ScenarioCatalog::from_toml_str(&text)?)
        }
    }
}

fn cmd_scenarios<W: Write>(args: &CatalogArgs, out: &mut W) -> Result<(), CliError> {
    let catalog = load_catalog(args)?;
    let width = catalog.names().iter().map(|n| n.len()).max().unwrap_or(0);
    for s in catalog.scenarios() {
        writeln!(out, "{:<width$}  n={:<4} p={:<5} {}", s.name, s.n, s.p, s.description)?;
    }
    Ok(())
}

pub fn bench_rows(args: &BenchArgs) -> Result<Vec<BenchSummary>, CliError> {
    check_threads(args.threads)?;
    let catalog = load_catalog(&args.catalog)?;
    let mut names: Vec<String> = args.scenarios.iter().chain(&args.scenario_flags).cloned().collect();
    if names.is_empty() {
        names = catalog.names().into_iter().map(str::to_string).collect();
    }
    let scenarios = names.iter().map(|n| catalog.get(n)).collect::<Result<Vec<_>, _>>()?;
    let methods: Vec<Method> = if args.methods.is_empty() {
        vec![Method::Srcs, Method::SrcsCen, Method::PearsonSis]
    } else {
        args.methods.iter().map(|&m| m.into()).collect()
    };
    let config = BenchConfig {
        replications: if args.full { FULL_REPLICATIONS } else { args.reps },
        master_seed: args.seed,
        threads: args.threads,
    };
    if config.replications == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for scenario in scenarios {
        rows.extend(bench::run_bench(scenario, &methods, config)?);
    }
    Ok(rows)
}

fn write_bench_table<W: Write>(out: &mut W, rows: &[BenchSummary]) -> std::io::Result<()> {
    let width = rows.iter().map(|r| r.scenario.len()).max().unwrap_or(8).max(8);
    writeln!(
        out,
        "{:<width$}  {:<8}  {:>5}  {:>9}  {:>9}  {:>8}  {:>9}  {:>8}",
        "scenario", "method", "reps", "median_s", "sd_s", "q40-q60", "censoring", "time_s"
    )?;
    for r in rows {
        let cens = r.realized_censoring.map_or_else(|| "-".to_string(), |c| format!("{c:.3}"));
        writeln!(
            out,
            "{:<width$}  {:<8}  {:>5}  {:>9.1}  {:>9.2}  {:>8.1}  {:>9}  {:>8.2}",
            r.scenario, r.method.name(), r.replications, r.median_s, r.sd_s, r.q40_q60_gap, cens, r.wall_time
        )?;
    }
    Ok(())
}

fn cmd_bench<W: Write>(args: &BenchArgs, out: &mut W) -> Result<(), CliError> {
    if args.list {
        let catalog = load_catalog(&args.catalog)?;
        for name in catalog.names() {
            writeln!(out, "{name}")?;
        }
        return Ok(());
    }
    let rows = bench_rows(args)?;
    match args.format {
        Format::Table => write_bench_table(out, &rows)?,
        Format::Csv => bench::write_csv(&mut *out, &rows)?,
        Format::Json => writeln!(out, "{}", bench::to_json(&rows))?,
    }
    Ok(())
}
