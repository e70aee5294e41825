//! `zonac` command-line driver.
//!
//! Exit codes: 0 success, 1 other failure, 2 circuit parse error,
//! 3 insufficient capacity, 4 routing failure, 5 verification failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use zonac_core::architecture::ArchError;
use zonac_core::bench::{self, run_suite};
use zonac_core::circuit::{parse_source, Circuit, SourceFormat};
use zonac_core::compile::{compile, CompileError, CompileOptions};
use zonac_core::fidelity::{evaluate_fidelity, FidelityInputs, PhysicalParams};
use zonac_core::placement::{PlacementError, SaParams};
use zonac_core::router::{Schedule, ScheduleError};
use zonac_core::sim::{
    equivalent_up_to_global_phase, overlap, simulate_circuit, simulate_schedule, DEFAULT_QUBIT_CAP,
};
use zonac_core::ArchitectureConfig;

#[derive(Parser)]
#[command(
    name = "zonac",
    version,
    about = "Compile circuits for zoned neutral-atom arrays"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Native,
    Qasm,
}

#[derive(clap::Args)]
struct CompileArgs {
    file: PathBuf,
    /// Architecture TOML; default sizes the array to the circuit.
    #[arg(long)]
    arch: Option<PathBuf>,
    /// Annealing parameters TOML.
    #[arg(long)]
    sa: Option<PathBuf>,
    /// Physical parameters TOML for the fidelity estimate.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Force the input format instead of going by extension.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Return every qubit to storage after every stage.
    #[arg(long)]
    no_reuse: bool,
    /// Keep the greedy placement.
    #[arg(long)]
    no_anneal: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a circuit and write the schedule as JSON.
    Compile {
        #[command(flatten)]
        args: CompileArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compile and check the schedule against the circuit on a statevector.
    Verify {
        #[command(flatten)]
        args: CompileArgs,
    },
    /// Run a benchmark suite.
    Bench {
        #[arg(long, default_value = "table1")]
        suite: String,
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        sa: Option<PathBuf>,
        /// Trials per temperature, overriding the SA file.
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Fidelity breakdown of a schedule file.
    Report {
        schedule: PathBuf,
        #[arg(long)]
        params: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let error = e.into();
        let code = classify(&error);
        Failure { code, error }
    }
}

fn classify(error: &anyhow::Error) -> u8 {
    if let Some(e) = error.downcast_ref::<CompileError>() {
        return match e {
            CompileError::Circuit(_) => 2,
            CompileError::Arch(ArchError::Capacity(_))
            | CompileError::Placement(PlacementError::Arch(ArchError::Capacity(_))) => 3,
            CompileError::Schedule(ScheduleError::Route { .. })
            | CompileError::Placement(PlacementError::Route(_)) => 4,
            _ => 1,
        };
    }
    if error
        .downcast_ref::<zonac_core::circuit::CircuitError>()
        .is_some()
    {
        return 2;
    }
    1
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_circuit(args: &CompileArgs) -> Result<Circuit, Failure> {
    let text = read(&args.file)?;
    let format = match args.format {
        Some(Format::Native) => SourceFormat::Native,
        Some(Format::Qasm) => SourceFormat::Qasm,
        None => SourceFormat::from_path(&args.file),
    };
    Ok(parse_source(&text, format)?)
}

fn physical(path: &Option<PathBuf>) -> Result<PhysicalParams> {
    match path {
        Some(p) => Ok(PhysicalParams::from_toml(&read(p)?)?),
        None => Ok(PhysicalParams::default()),
    }
}

fn sa_params(path: &Option<PathBuf>) -> Result<SaParams> {
    match path {
        Some(p) => toml::from_str(&read(p)?).with_context(|| format!("parsing {}", p.display())),
        None => Ok(SaParams::default()),
    }
}

fn options(args: &CompileArgs) -> Result<CompileOptions> {
    let mut opts = CompileOptions {
        architecture: match &args.arch {
            Some(p) => Some(ArchitectureConfig::from_toml(&read(p)?)?),
            None => None,
        },
        sa: sa_params(&args.sa)?,
        skip_anneal: args.no_anneal,
        reuse: !args.no_reuse,
        physical: physical(&args.params)?,
        ..CompileOptions::default()
    };
    if let Some(seed) = args.seed {
        opts.sa.seed = seed;
    }
    Ok(opts)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Compile { args, out } => {
            let circuit = load_circuit(&args)?;
            let compiled = compile(&circuit, &options(&args)?)?;
            let json = compiled.schedule.to_json();
            match out {
                Some(p) => {
                    fs::write(&p, json).with_context(|| format!("writing {}", p.display()))?
                }
                None => println!("{json}"),
            }
            eprint!("{}", compiled.plan);
            eprint!("{}", compiled.fidelity);
        }
        Command::Verify { args } => {
            let circuit = load_circuit(&args)?;
            let compiled = compile(&circuit, &options(&args)?)?;
            let reference = simulate_circuit(&circuit, DEFAULT_QUBIT_CAP)?;
            let replay = match simulate_schedule(&compiled.schedule, DEFAULT_QUBIT_CAP) {
                Ok(sv) => sv,
                Err(e) => {
                    return Err(Failure {
                        code: 5,
                        error: anyhow!("FAIL {}: {e}", args.file.display()),
                    })
                }
            };
            let ov = overlap(&reference, &replay)?;
            if equivalent_up_to_global_phase(&reference, &replay, 1e-9)? {
                println!("PASS {} overlap {ov:.12}", args.file.display());
            } else {
                return Err(Failure {
                    code: 5,
                    error: anyhow!("FAIL {} overlap {ov:.12}", args.file.display()),
                });
            }
        }
        Command::Bench {
            suite,
            seeds,
            out,
            sa,
            iterations,
        } => {
            let specs = bench::suite(&suite)?;
            let mut opts = CompileOptions {
                sa: sa_params(&sa)?,
                ..CompileOptions::default()
            };
            if iterations.is_some() {
                opts.sa.iterations_per_temperature = iterations;
            }
            let seed_list: Vec<u64> = (0..seeds.max(1)).collect();
            let result = run_suite(&specs, &opts, &seed_list);
            print!("{result}");
            if let Some(dir) = out {
                fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                fs::write(
                    dir.join("records.json"),
                    serde_json::to_string_pretty(&result)?,
                )?;
                fs::write(dir.join("plot.csv"), result.plot_csv())?;
                fs::write(dir.join("table.txt"), result.to_string())?;
            }
            if result.records.iter().any(|r| r.error.is_some()) {
                return Err(Failure {
                    code: 1,
                    error: anyhow!("some benchmarks failed"),
                });
            }
        }
        Command::Report { schedule, params } => {
            let s = Schedule::from_json(&read(&schedule)?)?;
            let report =
                evaluate_fidelity(&FidelityInputs::from_schedule(&s), &physical(&params)?)?;
            print!("{report}");
            println!(
                "stages {}  batches {}  moves {}  time_us {:.3}",
                s.counters.n_stages, s.counters.n_batches, s.counters.n_moves, s.total_time_us
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
