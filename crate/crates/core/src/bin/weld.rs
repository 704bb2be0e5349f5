use clap::{Parser, Subcommand};
use instanton_weld::cli::{self, Command, Overrides, Scenario, OUT_DIR_ENV};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "weld", version, about = "Glue ASD connections along chains of torus blocks")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// Scenario file (strict JSON).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the block solves.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory; overrides the scenario and the environment default.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    max_passes: Option<usize>,
    #[arg(long, global = true)]
    target: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Run the alternating method and write the trace, summary and optional dumps.
    Weld,
    /// Run the alternating method and write the trace only.
    Decay,
    /// Fuzz the two-sequence recurrence.
    Lemma,
    /// Compare welds at two gluing parameters.
    Lipschitz,
    /// Check central twists against a non-central one.
    Equiv,
    /// Per-block energy ledger.
    Energy,
    /// Export the welded perturbations and backgrounds as CSV.
    Dump,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Weld => Command::Weld,
            Cmd::Decay => Command::Decay,
            Cmd::Lemma => Command::Lemma,
            Cmd::Lipschitz => Command::Lipschitz,
            Cmd::Equiv => Command::Equiv,
            Cmd::Energy => Command::Energy,
            Cmd::Dump => Command::Dump,
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(t) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let scenario = match &args.scenario {
        Some(p) => Scenario::load(p),
        None => Scenario::from_json(cli::BUNDLED_SCENARIO),
    };
    let mut scenario = match scenario {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let env_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    let out = cli::resolve_out_dir(args.out, scenario.output.dir.as_ref(), env_dir);
    let overrides = Overrides { seed: args.seed, out, max_passes: args.max_passes, target: args.target };
    overrides.apply(&mut scenario);
    if let Err(e) = scenario.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match cli::run(args.command.into(), &scenario) {
        Ok(out) => {
            for l in &out.lines {
                println!("{l}");
            }
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
