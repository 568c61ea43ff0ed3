//! `aqa-sim`: run protocol scenarios and replay transcripts.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aqa_core::backend::BackendKind;
use aqa_core::harness::transcript::{observer_replay, Transcript};
use aqa_core::harness::{csv_header, RunOptions, Scenario, ScenarioConfig, ScenarioKind, TrialStats};
use aqa_core::Error;
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "aqa-sim", version, about = "Auditable quantum authentication and MPQC simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pairwise auditable authentication.
    Aqa(RunArgs),
    /// Input encoding only.
    Ie(RunArgs),
    /// Input encoding and the computation, without delivery.
    Rqc(RunArgs),
    /// Full protocol runs, including partition-driver scenarios.
    Mpqc(RunArgs),
    /// Honest runs against the ideal functionality.
    IdealVsReal(RunArgs),
    /// Recompute the public verdict of a transcript.
    Replay {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    backend: Option<BackendKind>,
    /// Directory for stats (JSON and CSV) and transcripts.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, requires = "out")]
    emit_transcripts: bool,
    /// Worker threads; 0 lets rayon decide.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

enum Failure {
    Config(String),
    Invariant(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Parse(_) | Error::Json(_) | Error::NonTransversal(_) => {
                Failure::Config(e.to_string())
            }
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn accepts(cmd: &Command, kind: ScenarioKind) -> bool {
    matches!(
        (cmd, kind),
        (Command::Aqa(_), ScenarioKind::Aqa)
            | (Command::Ie(_), ScenarioKind::Ie)
            | (Command::Rqc(_), ScenarioKind::Rqc)
            | (Command::Mpqc(_), ScenarioKind::Mpqc | ScenarioKind::Hierarchy)
            | (Command::IdealVsReal(_), ScenarioKind::IdealVsReal)
    )
}

fn write_outputs(dir: &Path, stats: &TrialStats) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Runtime(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join(format!("{}.json", stats.scenario)), stats.to_json() + "\n").map_err(io)?;
    let csv = format!("{}\n{}\n", csv_header(), stats.csv_row());
    std::fs::write(dir.join(format!("{}.csv", stats.scenario)), csv).map_err(io)?;
    Ok(())
}

fn run(cmd: &Command, args: &RunArgs) -> Result<(), Failure> {
    let mut cfg = ScenarioConfig::load(&args.config)?;
    if !accepts(cmd, cfg.kind) {
        return Err(Failure::Config(format!(
            "config {} has kind {:?}, which this subcommand does not run",
            args.config.display(),
            cfg.kind
        )));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(backend) = args.backend {
        cfg.backend = backend;
    }
    let scenario = Scenario::new(cfg)?;
    let opts = RunOptions {
        jobs: args.jobs,
        transcripts: args
            .emit_transcripts
            .then(|| args.out.as_ref().expect("clap requires --out").join("transcripts")),
    };
    let stats = scenario.run(&opts)?;
    print!("{}", stats.table());
    if let Some(dir) = &args.out {
        write_outputs(dir, &stats)?;
    }
    if !stats.invariants_hold() {
        return Err(Failure::Invariant(format!(
            "identified_wrong = {}, replay_mismatches = {}",
            stats.identified_wrong, stats.replay_mismatches
        )));
    }
    Ok(())
}

fn replay(input: &Path) -> Result<(), Failure> {
    let t = Transcript::load(input).map_err(|e| Failure::Config(format!("{}: {e}", input.display())))?;
    let v = observer_replay(&t).map_err(|e| Failure::Config(format!("{}: {e}", input.display())))?;
    println!("{}", v.to_json());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Replay { input } => replay(input),
        cmd @ (Command::Aqa(a) | Command::Ie(a) | Command::Rqc(a) | Command::Mpqc(a) | Command::IdealVsReal(a)) => {
            run(cmd, a)
        }
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Invariant(m)) => {
            eprintln!("invariant violated: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
