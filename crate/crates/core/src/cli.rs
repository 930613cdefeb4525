//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O or data failure, 2 usage error,
//! 3 golden-table mismatch.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Result;
use crate::experiments::{
    load_run_file, run_closeness_sweep, run_length_sweep, run_proportion_sweep,
    run_rescaling_sweep, run_translation_sweep, write_csv, write_json, AffineSweep, ClosenessSweep,
    Experiment, ExperimentRow, LengthSweep, ProportionSweep, RunFile,
};
use crate::metrics::{Cutoffs, LogBase, Metric, MetricConfig, Normalizer};
use crate::properties::{table_for, PropertyId, SatisfactionTable, SearchBudget};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "rankfair",
    version,
    about = "Group-fairness metrics for rankings"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for every randomized search.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Logarithm base for rKL and AWRF: natural or base2.
    #[arg(long, global = true, default_value = "base2")]
    pub log_base: LogBase,
    /// Prefix-metric cutoffs: `every`, `step:K` or a comma list.
    /// Sweeps over extreme rankings default to `step:10`, everything else to `every`.
    #[arg(long, global = true)]
    pub cutoffs: Option<Cutoffs>,
    /// Prefix-metric normalizer: lattice (exact), brute or extreme.
    #[arg(long, global = true, default_value = "lattice")]
    pub normalizer: Normalizer,
}

impl GlobalArgs {
    fn config(&self, default_cutoffs: Cutoffs) -> MetricConfig {
        MetricConfig::default()
            .with_log_base(self.log_base)
            .with_normalizer(self.normalizer)
            .with_cutoffs(self.cutoffs.clone().unwrap_or(default_cutoffs))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate metrics on a run file.
    #[command(subcommand)]
    Metrics(MetricsCommand),
    /// Check axiomatic properties and render the satisfaction table.
    #[command(subcommand)]
    Properties(PropertiesCommand),
    /// Run parameter sweeps and write plot data.
    #[command(subcommand)]
    Experiments(ExperimentsCommand),
}

#[derive(Debug, Subcommand)]
pub enum MetricsCommand {
    /// Print `metric,value` for one query, ranked by descending relevance.
    Compute {
        /// Run file with columns query_id,candidate_id,group,relevance.
        #[arg(long)]
        run: PathBuf,
        /// Query to rank and score.
        #[arg(long)]
        query: String,
        /// Metric names, comma separated or repeated, or `all`.
        #[arg(long, value_delimiter = ',', required = true)]
        metric: Vec<MetricChoice>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricChoice {
    All,
    One(Metric),
}

impl std::str::FromStr for MetricChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("all") {
            Ok(MetricChoice::All)
        } else {
            s.parse().map(MetricChoice::One)
        }
    }
}

fn expand(choices: &[MetricChoice]) -> Vec<Metric> {
    let mut out: Vec<Metric> = Vec::new();
    for c in choices {
        let add: &[Metric] = match c {
            MetricChoice::All => &Metric::ALL,
            MetricChoice::One(m) => std::slice::from_ref(m),
        };
        for m in add {
            if !out.contains(m) {
                out.push(*m);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BudgetPreset {
    Default,
    Quick,
}

#[derive(Debug, Subcommand)]
pub enum PropertiesCommand {
    /// Check (metric, property) cells; all 143 by default.
    Check {
        /// Metrics to check; all of them by default.
        #[arg(long, value_delimiter = ',')]
        metric: Vec<MetricChoice>,
        /// Properties P1..P13 to check; all of them by default.
        #[arg(long, value_delimiter = ',')]
        property: Vec<PropertyId>,
        /// Search effort; `quick` shrinks the instance families.
        #[arg(long, value_enum, default_value_t = BudgetPreset::Default)]
        budget: BudgetPreset,
        /// Compare against the published table; exit 3 on any mismatch.
        #[arg(long)]
        golden: bool,
        /// Emit the table as JSON instead of a grid.
        #[arg(long)]
        json: bool,
        /// Print each verdict with its counterexample and searched family.
        #[arg(long)]
        details: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum ExperimentsCommand {
    /// Run one sweep and write its CSV.
    Run {
        /// length, proportion, closeness, translation or rescaling.
        sweep: Experiment,
        /// Output CSV path, or `-` for stdout.
        #[arg(short, long)]
        output: PathBuf,
        /// Run file for the translation and rescaling sweeps.
        #[arg(long)]
        run: Option<PathBuf>,
        /// Queries to include; all queries in the run by default.
        #[arg(long, value_delimiter = ',')]
        queries: Vec<String>,
        /// Also write the rows as JSON to this path.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let stdout = io::stdout();
    match execute(&cli, &mut stdout.lock()) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
        Err(CliError::File(path, e)) => {
            eprintln!("error: {}: {e}", path.display());
            EXIT_DATA
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(crate::Error),
    /// A data failure attributable to one input file.
    File(PathBuf, crate::Error),
}

fn read_run(path: &Path) -> std::result::Result<RunFile, CliError> {
    load_run_file(path).map_err(|e| CliError::File(path.to_path_buf(), e))
}

impl<E: Into<crate::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Data(e.into())
    }
}

/// Run a parsed command, writing its standard output to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> std::result::Result<i32, CliError> {
    match &cli.command {
        Command::Metrics(MetricsCommand::Compute { run, query, metric }) => {
            let cfg = cli.global.config(Cutoffs::EveryRank);
            let ranking = read_run(run)?.ranking(query)?;
            for m in expand(metric) {
                match m.try_evaluate(&ranking, &cfg)? {
                    Some(v) => writeln!(out, "{m},{v}")?,
                    None => writeln!(out, "{m},undefined")?,
                }
            }
            Ok(EXIT_OK)
        }
        Command::Properties(PropertiesCommand::Check {
            metric,
            property,
            budget,
            golden,
            json,
            details,
        }) => {
            let metrics = if metric.is_empty() {
                Metric::ALL.to_vec()
            } else {
                expand(metric)
            };
            let properties = if property.is_empty() {
                PropertyId::ALL.to_vec()
            } else {
                property.clone()
            };
            let budget = match budget {
                BudgetPreset::Default => SearchBudget::default(),
                BudgetPreset::Quick => SearchBudget::quick(),
            }
            .with_seed(cli.global.seed);
            let base = cli.global.config(Cutoffs::EveryRank);
            let table = table_for(&metrics, &properties, &budget, &base);
            if *json {
                writeln!(out, "{}", table.to_json()?)?;
            } else {
                write!(out, "{}", table.render())?;
                if *details {
                    write!(out, "\n{}", table.render_details())?;
                }
            }
            if let Some(cell) = table.cells.iter().find(|c| c.error.is_some()) {
                eprintln!(
                    "error: {} {}: {}",
                    cell.metric,
                    cell.property,
                    cell.error.as_deref().unwrap_or_default()
                );
                return Ok(EXIT_DATA);
            }
            if *golden {
                return golden_report(&table, !*json, out, &mut io::stderr());
            }
            Ok(EXIT_OK)
        }
        Command::Experiments(ExperimentsCommand::Run {
            sweep,
            output,
            run,
            queries,
            json,
        }) => {
            let rows = run_sweep(cli, *sweep, run.as_deref(), queries)?;
            if output == Path::new("-") {
                write_csv(&rows, &mut *out)?;
            } else {
                write_csv(&rows, File::create(output)?)?;
            }
            if let Some(path) = json {
                write_json(&rows, File::create(path)?)?;
            }
            Ok(EXIT_OK)
        }
    }
}

/// Compare a table with the published one: mismatches go to `err` and give
/// exit code 3.
fn golden_report(
    table: &SatisfactionTable,
    summary: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> std::result::Result<i32, CliError> {
    let mismatches = table.mismatches();
    for m in &mismatches {
        writeln!(
            err,
            "mismatch: {} {} expected {} got {}",
            m.metric,
            m.property,
            m.expected.glyph(),
            m.got.glyph()
        )?;
    }
    if !mismatches.is_empty() {
        return Ok(EXIT_MISMATCH);
    }
    if summary {
        writeln!(
            out,
            "all {} cells match the published table",
            table.cells.len()
        )?;
    }
    Ok(EXIT_OK)
}

fn run_sweep(
    cli: &Cli,
    sweep: Experiment,
    run: Option<&Path>,
    queries: &[String],
) -> std::result::Result<Vec<ExperimentRow>, CliError> {
    let g = &cli.global;
    if sweep.needs_run() != run.is_some() {
        return Err(CliError::Usage(if sweep.needs_run() {
            format!("the {sweep} sweep needs --run")
        } else {
            format!("the {sweep} sweep does not read a run file")
        }));
    }
    let rows: Result<Vec<ExperimentRow>> = match sweep {
        Experiment::Length => run_length_sweep(&LengthSweep {
            config: g.config(Cutoffs::Step(10)),
            ..LengthSweep::default()
        }),
        Experiment::Proportion => run_proportion_sweep(&ProportionSweep {
            config: g.config(Cutoffs::Step(10)),
            ..ProportionSweep::default()
        }),
        Experiment::Closeness => {
            if g.cutoffs.is_some() {
                return Err(CliError::Usage(
                    "the closeness sweep always uses cutoffs {N}".into(),
                ));
            }
            run_closeness_sweep(&ClosenessSweep {
                config: g.config(Cutoffs::EveryRank),
                ..ClosenessSweep::default()
            })
        }
        Experiment::Translation | Experiment::Rescaling => {
            let run = read_run(run.expect("checked above"))?;
            let base = if sweep == Experiment::Translation {
                AffineSweep::translation()
            } else {
                AffineSweep::rescaling()
            };
            let spec = AffineSweep {
                config: g.config(Cutoffs::EveryRank),
                ..base.with_queries(queries.to_vec())
            };
            if sweep == Experiment::Translation {
                run_translation_sweep(&run, &spec)
            } else {
                run_rescaling_sweep(&run, &spec)
            }
        }
    };
    Ok(rows?)
}
