use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fcp_lab::config::{load_model, load_preset};
use fcp_lab::{exit, run, Command, ExperimentConfig, LabError, LabResult, RayonExecutor};

#[derive(Parser)]
#[command(name = "fcp", version, about = "First-contact percolation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// One exploration: passage-field CSV and event-log JSONL.
    Simulate(Flags),
    /// Directional inverse speeds along e1.
    Speed(Flags),
    /// Limiting-shape estimates in d = 2, with SVG.
    Shape(Flags),
    /// Coupled runs: inclusion and Richardson domination.
    Couple(Flags),
    /// Empirical transition-time laws against their closed forms.
    Mu(Flags),
    /// Models rebuilt from target laws.
    Construct(Flags),
    /// Within-day run-length tails.
    Oracle(Flags),
}

#[derive(Args, Clone)]
struct Flags {
    /// Contact-model JSON (path or name under presets/models); repeatable.
    #[arg(long)]
    model: Vec<String>,
    /// Preset name or path.
    #[arg(long)]
    preset: Option<String>,
    /// Full experiment config JSON.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    n: Vec<u32>,
    /// Horizon(s), comma separated.
    #[arg(long, value_delimiter = ',')]
    t: Vec<f64>,
    #[arg(long = "box")]
    box_radius: Option<u32>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Coupled runs per n.
    #[arg(long)]
    seeds: Option<usize>,
    /// Grid points or angular bins.
    #[arg(long)]
    grid: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit nonzero when an exploration hits its box.
    #[arg(long)]
    strict: bool,
    /// Print the resolved config as JSON and exit.
    #[arg(long)]
    print_config: bool,
}

fn build(command: Command, f: &Flags) -> LabResult<ExperimentConfig> {
    let mut c = match (&f.preset, &f.config) {
        (Some(p), _) => load_preset(p)?,
        (_, Some(path)) => ExperimentConfig::load(path)?,
        _ => {
            let seed = f.seed.ok_or_else(|| LabError::Config("--seed is required".into()))?;
            ExperimentConfig::new(command, seed)
        }
    };
    if c.command != command {
        return Err(LabError::Config(format!("config is for {:?}, not {:?}", c.command, command)));
    }
    if !f.model.is_empty() {
        c.models = f.model.iter().map(|m| load_model(m)).collect::<LabResult<_>>()?;
    }
    if let Some(s) = f.seed {
        c.seed = s;
    }
    c.d = f.d.or(c.d);
    if !f.n.is_empty() {
        c.n = f.n.clone();
    }
    if !f.t.is_empty() {
        c.t = f.t.clone();
    }
    c.box_radius = f.box_radius.or(c.box_radius);
    c.replicas = f.replicas.or(c.replicas);
    c.seeds = f.seeds.or(c.seeds);
    c.grid = f.grid.or(c.grid);
    if let Some(o) = &f.out {
        c.out = o.clone();
    }
    c.strict |= f.strict;
    c.resolve()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match &cli.command {
        Sub::Simulate(f) => (Command::Simulate, f),
        Sub::Speed(f) => (Command::Speed, f),
        Sub::Shape(f) => (Command::Shape, f),
        Sub::Couple(f) => (Command::Couple, f),
        Sub::Mu(f) => (Command::Mu, f),
        Sub::Construct(f) => (Command::Construct, f),
        Sub::Oracle(f) => (Command::Oracle, f),
    };
    let config = match build(command, flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("fcp: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if flags.print_config {
        println!("{}", config.to_json());
        return ExitCode::SUCCESS;
    }
    let exec = RayonExecutor::new(flags.jobs);
    let code = match run(&config, &exec) {
        Ok(outcome) => {
            println!("{}", serde_json::to_string_pretty(&outcome.report).expect("report serializes"));
            if outcome.box_overflow {
                eprintln!("fcp: warning: an exploration reached its box boundary; enlarge --box");
            }
            if !outcome.passed {
                eprintln!("fcp: embedded assertions failed");
                exit::ASSERTION_FAILED
            } else if outcome.box_overflow && config.strict {
                exit::BOX_OVERFLOW
            } else {
                exit::OK
            }
        }
        Err(e) => {
            eprintln!("fcp: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
