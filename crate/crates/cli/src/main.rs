use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dpcstar::format::parse_network;
use dpcstar::generators::GenParams;
use dpcstar_cli::{
    cmd_bench, cmd_check, cmd_gen, cmd_solve, read_file, Algo, BenchSpec, CliError, CliResult, Family, OrderSpec,
    Property, Sweep, EXIT_USAGE,
};

/// Directional path-consistency solver and benchmark harness.
#[derive(Parser)]
#[command(name = "dpcstar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a network file with one algorithm.
    Solve {
        file: String,
        /// dpc, dpcstar, pc or oracle.
        #[arg(long, default_value = "dpcstar")]
        algo: Algo,
        /// reverse-mcs, declaration, or a comma-separated elimination order.
        #[arg(long, default_value = "reverse-mcs")]
        order: OrderSpec,
        /// Print a solution read off the processed network (dpcstar only).
        #[arg(long)]
        extract: bool,
    },
    /// Check a structural property of a network or language file.
    Check {
        file: String,
        /// chordal, peo, helly, majority-closed, tree-preserving,
        /// 2decomposable or strongly-dpc.
        #[arg(long)]
        property: Property,
        #[arg(long)]
        order: Option<OrderSpec>,
    },
    /// Generate a random instance.
    Gen {
        #[command(flatten)]
        shape: Shape,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<String>,
    },
    /// Run a parameter sweep and write CSV.
    Bench {
        #[command(flatten)]
        shape: Shape,
        /// One swept parameter: n=20,40 or n=20:120:20.
        #[arg(long)]
        sweep: Option<Sweep>,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated algorithms.
        #[arg(long, value_delimiter = ',', default_value = "dpcstar,pc")]
        algo: Vec<Algo>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Write `-` instead of timings so reruns are byte-identical.
        #[arg(long)]
        no_timing: bool,
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Args)]
struct Shape {
    /// majority or tree-preserving.
    #[arg(long, default_value = "majority")]
    family: Family,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    d: usize,
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    #[arg(long, default_value_t = 0.3)]
    l: f64,
}

fn emit(text: &str, out: Option<&str>) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Solve {
            file,
            algo,
            order,
            extract,
        } => {
            let doc = parse_network(&read_file(&file)?)?;
            let report = cmd_solve(&doc, algo, &order, extract)?;
            print!("{}", report.text);
            Ok(report.code)
        }
        Command::Check { file, property, order } => {
            let report = cmd_check(&read_file(&file)?, property, order.as_ref())?;
            print!("{}", report.text);
            Ok(report.code)
        }
        Command::Gen { shape, seed, out } => {
            let p = GenParams {
                n: shape.n,
                d: shape.d,
                rho: shape.rho,
                l: shape.l,
                seed,
            };
            emit(&cmd_gen(shape.family, &p)?, out.as_deref())?;
            Ok(0)
        }
        Command::Bench {
            shape,
            sweep,
            reps,
            seed,
            algo,
            jobs,
            no_timing,
            out,
        } => {
            let plan = BenchSpec {
                family: shape.family,
                n: shape.n,
                d: shape.d,
                rho: shape.rho,
                l: shape.l,
                sweep,
                reps,
                seed,
                algos: algo,
                jobs,
                timing: !no_timing,
            };
            emit(&cmd_bench(&plan)?, out.as_deref())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
