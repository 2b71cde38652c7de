use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use telecert::io::{matrix_from_json, matrix_to_json, round_sig};
use telecert::process::{avg_state_fidelity, resource_to_process, ProcessMatrix};
use telecert::quantum::DensityMatrix;
use telecert::report::{
    classify, format_table, parse_experiments, to_csv, werner_sweep, Certifier, Grid, ShotNoise, FLAG_CLIPPED,
};
use telecert::sdp::{SdpSolver, SolverOptions};
use telecert::tomography::{reconstruct_process, simulate_process_tomography};
use telecert::Error;

/// Input matrices must be Hermitian and unit-trace within this tolerance.
const INPUT_TOL: f64 = 1e-6;

const EXIT_FAILURE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_SOLVER: u8 = 4;

#[derive(Parser)]
#[command(name = "telecert", version, about = "Certify genuine quantum teleportation from process matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the classical teleportation bound and its average-state threshold.
    Bound {
        #[arg(long)]
        json: bool,
    },
    /// Certify a process matrix given as matrix JSON.
    Certify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Sweep a noisy resource family and write CSV.
    Sweep {
        #[arg(long, value_enum, default_value_t = Family::Werner)]
        family: Family,
        /// start:stop:step
        #[arg(long, default_value = "0:1:0.01")]
        grid: String,
        /// Shots per tomography setting; exact arithmetic when omitted.
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify reported experiments against the classical bound.
    Classify {
        #[arg(long)]
        input: PathBuf,
    },
    /// Teleport through a two-qubit resource state and write its process matrix.
    Simulate {
        #[arg(long)]
        resource: PathBuf,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Werner,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) => EXIT_PARSE,
            Error::Solver(_) => EXIT_SOLVER,
            _ => EXIT_VALIDATION,
        };
        Failure::new(code, e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> CliResult {
    std::fs::write(path, contents).map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", path.display())))
}

fn solver() -> Result<SdpSolver, Failure> {
    let options = SolverOptions::from_env().map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
    Ok(SdpSolver::new(options))
}

fn certifier() -> Result<Certifier, Failure> {
    Ok(Certifier::new(solver()?)?)
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable report")
}

fn bound(as_json: bool) -> CliResult {
    let c = certifier()?;
    let f_ct = c.f_ct();
    let f_avg = avg_state_fidelity(f_ct)?;
    if as_json {
        #[derive(Serialize)]
        struct Bound {
            f_ct: f64,
            f_avg: f64,
        }
        println!("{}", json(&Bound { f_ct: round_sig(f_ct, 9), f_avg: round_sig(f_avg, 9) }));
    } else {
        println!("F_CT = {}  F_avg = {}", round_sig(f_ct, 6), round_sig(f_avg, 6));
    }
    Ok(())
}

fn certify(input: &Path, as_json: bool) -> CliResult {
    let m = matrix_from_json(&read(input)?)?;
    let chi = ProcessMatrix::with_tolerance(m, INPUT_TOL, INPUT_TOL)?;
    let report = certifier()?.certify(&chi, &[])?;
    if let Err(e) = report.check_invariants() {
        return Err(Failure::new(EXIT_FAILURE, e));
    }
    if as_json {
        println!("{}", json(&report.rounded()));
    } else {
        println!("f_expt      = {}", round_sig(report.f_expt, 9));
        println!("f_avg_state = {}", round_sig(report.f_avg_state, 9));
        println!("alpha       = {}", round_sig(report.alpha, 9));
        println!("beta        = {}", round_sig(report.beta, 9));
        println!("f_ct        = {}", round_sig(report.f_ct, 9));
        println!("gqt         = {}", report.gqt);
        if !report.flags.is_empty() {
            println!("flags       = {}", report.flags.join(", "));
        }
    }
    Ok(())
}

fn sweep(_family: Family, grid: &str, shots: Option<u64>, seed: u64, out: &Path) -> CliResult {
    let grid = Grid::parse(grid).map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
    if shots == Some(0) {
        return Err(Failure::new(EXIT_PARSE, "--shots must be at least 1"));
    }
    let noise = shots.map(|shots| ShotNoise { shots, seed });
    let rows = werner_sweep(&certifier()?, &grid, noise)?;
    write(out, &to_csv(&rows))
}

fn classify_cmd(input: &Path) -> CliResult {
    let entries = parse_experiments(&read(input)?)?;
    let c = certifier()?;
    print!("{}", format_table(&classify(&entries, c.f_ct(), c.guard)?));
    Ok(())
}

fn simulate(resource: &Path, shots: Option<u64>, seed: u64, out: &Path) -> CliResult {
    let m = matrix_from_json(&read(resource)?)?;
    let rho = DensityMatrix::with_tolerance(m, INPUT_TOL, INPUT_TOL, INPUT_TOL)?;
    let exact = resource_to_process(&rho)?;
    let chi = match shots {
        None => exact,
        Some(0) => return Err(Failure::new(EXIT_PARSE, "--shots must be at least 1")),
        Some(n) => {
            let rec = reconstruct_process(&simulate_process_tomography(&exact, n, seed)?)?;
            if rec.clipped {
                eprintln!("note: {FLAG_CLIPPED}");
            }
            rec.process
        }
    };
    write(out, &(matrix_to_json(chi.matrix()) + "\n"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bound { json } => bound(json),
        Command::Certify { input, json } => certify(&input, json),
        Command::Sweep { family, grid, shots, seed, out } => sweep(family, &grid, shots, seed, &out),
        Command::Classify { input } => classify_cmd(&input),
        Command::Simulate { resource, shots, seed, out } => simulate(&resource, shots, seed, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
