//! Command-line runner: executes experiment plans, persists counts and
//! writes analysis reports and figures.

mod error;
mod io;
mod plan;
mod report;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ctxkernel::harness::{run_a6, run_a62, NoiseTable, RunMode};

use error::CliError;
use io::LoadedRun;
use plan::{A62Document, A6Document, PlanDocument};

#[derive(Parser)]
#[command(
    name = "ctxkernel",
    version,
    about = "Simulate parity-context and eraser experiments and analyze their records"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the parity-context (A6) experiment and analyze it.
    RunA6(RunArgs),
    /// Run the eraser sweep (A6.2) and analyze it.
    RunA62(RunArgs),
    /// Re-analyze a run directory from its persisted counts.
    Analyze {
        /// Directory holding plan.json and counts/.
        records_dir: PathBuf,
        /// Where to write reports (default: the records directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print an example plan.
    ExamplePlan {
        #[arg(value_enum)]
        experiment: Experiment,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    A6,
    A62,
}

#[derive(Args)]
struct RunArgs {
    /// Plan file (JSON). Defaults to the built-in example plan.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Output directory. Defaults to a plan-derived directory under
    /// $CTXKERNEL_OUT_ROOT (or ./runs).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    shots: Option<u64>,
    /// Permutation shuffles (A6 only).
    #[arg(long)]
    shuffles: Option<usize>,
    /// Bootstrap resamples (A6 only).
    #[arg(long)]
    resamples: Option<usize>,
    /// Compute exact outcome distributions instead of sampling.
    #[arg(long)]
    exact: bool,
    /// Noise table file (JSON), replacing the plan's.
    #[arg(long)]
    noise_table: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Plan(format!("{}: {e}", path.display())))
}

fn load_plan(args: &RunArgs, experiment: Experiment) -> Result<PlanDocument, CliError> {
    let mut doc = match &args.plan {
        Some(path) => PlanDocument::parse(&read(path)?, &path.display().to_string())?,
        None => match experiment {
            Experiment::A6 => PlanDocument::A6(A6Document::example()),
            Experiment::A62 => PlanDocument::A62(A62Document::example()),
        },
    };
    let expected = match experiment {
        Experiment::A6 => "A6",
        Experiment::A62 => "A6.2",
    };
    if doc.experiment() != expected {
        return Err(CliError::Plan(format!(
            "plan is for experiment {}, but this command runs {expected}",
            doc.experiment()
        )));
    }
    if let Some(seed) = args.seed {
        doc.set_seed(seed);
    }
    if let Some(shots) = args.shots {
        doc.set_shots(shots);
    }
    if let Some(path) = &args.noise_table {
        let table: NoiseTable = serde_json::from_str(&read(path)?).map_err(|e| {
            CliError::Plan(format!(
                "{}:{}:{}: {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        })?;
        doc.set_noise_table(table);
    }
    match &mut doc {
        PlanDocument::A6(d) => {
            if let Some(n) = args.shuffles {
                d.analysis.n_shuffles = n;
            }
            if let Some(n) = args.resamples {
                d.analysis.n_resamples = n;
            }
        }
        PlanDocument::A62(_) => {
            if args.shuffles.is_some() || args.resamples.is_some() {
                return Err(CliError::Plan(
                    "--shuffles/--resamples apply to A6 runs only".into(),
                ));
            }
        }
    }
    doc.validate().map_err(|e| CliError::Plan(e.to_string()))?;
    Ok(doc)
}

fn run(args: RunArgs, experiment: Experiment) -> Result<(), CliError> {
    let doc = load_plan(&args, experiment)?;
    let mode = if args.exact {
        RunMode::Exact
    } else {
        RunMode::Sampled
    };
    let sim = |e: ctxkernel::Error| CliError::Simulation(e.to_string());
    let executed = match &doc {
        PlanDocument::A6(d) => LoadedRun::A6(run_a6(&d.plan(), d.seed, mode).map_err(sim)?),
        PlanDocument::A62(d) => {
            LoadedRun::A62(run_a62(&d.plan(), &d.noise(), d.seed, mode).map_err(sim)?)
        }
    };
    let out = args.out.unwrap_or_else(|| {
        let tag = match experiment {
            Experiment::A6 => "a6",
            Experiment::A62 => "a62",
        };
        let hash = io::plan_hash(&doc);
        io::default_out_root().join(format!(
            "{tag}-seed{}-{}-{}",
            doc.seed(),
            mode_name(mode),
            &hash[..12]
        ))
    });
    let manifest = io::write_run(&out, &doc, &executed)?;
    println!(
        "wrote {} circuits to {}",
        manifest.circuits.len(),
        out.display()
    );
    analyze(&out, None)
}

fn mode_name(mode: RunMode) -> &'static str {
    match mode {
        RunMode::Sampled => "sampled",
        RunMode::Exact => "exact",
    }
}

fn analyze(dir: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let (doc, loaded) = io::load_run(dir)?;
    let out = out.unwrap_or(dir);
    let written = report::write_reports(&doc, &loaded, out)?;
    for f in &written.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::RunA6(args) => run(args, Experiment::A6),
        Command::RunA62(args) => run(args, Experiment::A62),
        Command::Analyze { records_dir, out } => analyze(&records_dir, out.as_deref()),
        Command::ExamplePlan { experiment } => {
            let doc = match experiment {
                Experiment::A6 => PlanDocument::A6(A6Document::example()),
                Experiment::A62 => PlanDocument::A62(A62Document::example()),
            };
            println!("{}", doc.canonical_json());
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
