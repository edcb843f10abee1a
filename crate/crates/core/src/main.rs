//! Command-line front end: `analyze`, `pendulum`, and `random-study`.
//!
//! Exit codes: 0 on success, 2 on ingestion failure (unreadable/malformed
//! input), 3 when the dataset is rank-deficient (not informative for any
//! rho), 1 on any other error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sparse_resilience::harness::{
    aggregate_csv, analyze, run_pendulum, run_random_study, study_csv, AnalyzeConfig,
    HarnessError, StudyConfig,
};
use sparse_resilience::numlin::NumericalConfig;
use sparse_resilience::sysmodel::ScenarioTag;

const EXIT_INGESTION: u8 = 2;
const EXIT_RANK_DEFICIENT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "sparse-resilience",
    about = "Sparse observability resilience metrics for LTI systems, from models or from trajectory data",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the data-driven index from a state CSV and an output CSV.
    Analyze(AnalyzeArgs),
    /// Reproduce the pendulum case study and write its artifacts.
    Pendulum(PendulumArgs),
    /// Monte Carlo sweep over random systems and attack sizes.
    RandomStudy(StudyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    AttackFree,
    Poisoned,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitArg {
    Json,
    Text,
    Both,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// State trajectory CSV: T+1 rows, one state per row.
    #[arg(long = "x")]
    x_path: PathBuf,
    /// Output trajectory CSV: T rows, one output vector per row.
    #[arg(long = "y")]
    y_path: PathBuf,
    /// Whether the outputs are attack-free or possibly poisoned.
    #[arg(long, value_enum)]
    scenario: ScenarioArg,
    /// Assumed attack budget l (poisoned data); reported as admissible or not.
    #[arg(long = "assumed-l")]
    assumed_l: Option<usize>,
    /// Relative singular-value cutoff for rank decisions.
    #[arg(long = "rank-rtol")]
    rank_rtol: Option<f64>,
    /// Absolute threshold below which vector entries count as zero.
    #[arg(long = "zero-atol")]
    zero_atol: Option<f64>,
    /// What to print on stdout.
    #[arg(long, value_enum, default_value = "both")]
    emit: EmitArg,
    /// Also write report.json / summary.txt into this directory.
    #[arg(long = "out")]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct PendulumArgs {
    /// Directory for trajectory CSVs and the JSON bundle.
    #[arg(long = "out")]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct StudyArgs {
    /// State dimension of the random systems.
    #[arg(long, default_value_t = 25)]
    n: usize,
    #[arg(long = "q-min", default_value_t = 10)]
    q_min: usize,
    #[arg(long = "q-max", default_value_t = 20)]
    q_max: usize,
    /// Trials per (q, l) pair.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Trajectory length T.
    #[arg(long, default_value_t = 100)]
    horizon: usize,
    /// Attack sizes, comma separated.
    #[arg(long = "l", value_delimiter = ',', default_value = "1,2,3")]
    l_values: Vec<usize>,
    /// Master seed; the study is byte-reproducible per seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for study.csv and aggregate.csv.
    #[arg(long = "out")]
    out_dir: Option<PathBuf>,
}

fn write_or_report(path: &PathBuf, content: &str) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| HarnessError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, content).map_err(|source| HarnessError::Io {
        path: path.clone(),
        source,
    })
}

fn run_analyze(args: AnalyzeArgs) -> Result<u8, HarnessError> {
    let mut tolerances = NumericalConfig::default();
    if let Some(r) = args.rank_rtol {
        tolerances.rank_rtol = r;
    }
    if let Some(a) = args.zero_atol {
        tolerances.zero_atol = a;
    }
    let outcome = analyze(&AnalyzeConfig {
        x_path: args.x_path,
        y_path: args.y_path,
        scenario: match args.scenario {
            ScenarioArg::AttackFree => ScenarioTag::AttackFree,
            ScenarioArg::Poisoned => ScenarioTag::Poisoned,
        },
        assumed_l: args.assumed_l,
        tolerances,
    })?;
    match args.emit {
        EmitArg::Json => println!("{}", outcome.json),
        EmitArg::Text => print!("{}", outcome.summary),
        EmitArg::Both => {
            print!("{}", outcome.summary);
            println!("{}", outcome.json);
        }
    }
    if let Some(dir) = args.out_dir {
        write_or_report(&dir.join("report.json"), &outcome.json)?;
        write_or_report(&dir.join("summary.txt"), &outcome.summary)?;
    }
    if outcome.report.rank_deficient_xminus {
        return Ok(EXIT_RANK_DEFICIENT);
    }
    Ok(0)
}

fn run_pendulum_cmd(args: PendulumArgs) -> Result<u8, HarnessError> {
    let run = run_pendulum(args.out_dir.as_deref())?;
    println!(
        "delta_max = {}  rho_free = {}  rho_poisoned = {} (assumed l = {}, admissible: {})",
        run.bundle.delta_max,
        run.bundle.rho_free,
        run.bundle.rho_poisoned,
        run.bundle.assumed_l,
        run.bundle.rho_poisoned_l_admissible
    );
    if let Some(dir) = args.out_dir {
        println!("artifacts written to {}", dir.display());
    }
    Ok(0)
}

fn run_study_cmd(args: StudyArgs) -> Result<u8, HarnessError> {
    let cfg = StudyConfig {
        n: args.n,
        q_min: args.q_min,
        q_max: args.q_max,
        horizon: args.horizon,
        trials: args.trials,
        l_values: args.l_values,
        seed: args.seed,
        tolerances: NumericalConfig::default(),
    };
    let out = run_random_study(&cfg)?;
    let rows_csv = study_csv(&out.rows);
    let agg_csv = aggregate_csv(&out.aggregates);
    match &args.out_dir {
        Some(dir) => {
            write_or_report(&dir.join("study.csv"), &rows_csv)?;
            write_or_report(&dir.join("aggregate.csv"), &agg_csv)?;
            println!("{}", agg_csv);
            println!("study written to {}", dir.display());
        }
        None => {
            print!("{}", rows_csv);
            println!();
            print!("{}", agg_csv);
        }
    }
    let flagged: usize = out.rows.iter().filter(|r| r.flagged).count();
    if flagged > 0 {
        eprintln!("note: {flagged} flagged trial(s) excluded from the means");
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(args) => run_analyze(args),
        Command::Pendulum(args) => run_pendulum_cmd(args),
        Command::RandomStudy(args) => run_study_cmd(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_ingestion() {
                ExitCode::from(EXIT_INGESTION)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
