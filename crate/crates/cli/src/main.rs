use clap::{Parser, Subcommand};
use cylvar_core::config::Config;
use cylvar_core::dump::{read_scalar, write_atomic, write_vector};
use cylvar_core::grid::Grid3;
use cylvar_core::operators::lift;
use cylvar_core::run::{self, SweepParam};
use cylvar_core::suites::{self, Suite};
use cylvar_core::{par, Error};
use std::path::PathBuf;
use std::process::ExitCode;

const OK: u8 = 0;
const FAILED: u8 = 1;
const USAGE: u8 = 2;
const UNCONVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "cylvar", version, about = "Cylindrically symmetric ground states and their curl-curl lifts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured problem and write manifest.json, field.csv and lift.csv.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to output.dir from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an invariant suite (identities, conformal, symmetry, nonlinearity) and print its CSV report.
    Verify {
        #[arg(long)]
        suite: String,
        /// Cube resolution n (odd).
        #[arg(long)]
        resolution: Option<usize>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve once per value of a parameter (a, p or resolution).
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lift a scalar field dump to the vector field dump on an n³ cube.
    Lift {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 33)]
        n: usize,
        /// Cube half-width; defaults to min(rmax/√2, zmax) of the input grid.
        #[arg(long = "L")]
        half_width: Option<f64>,
    },
}

fn code_for(e: &Error) -> u8 {
    match e {
        Error::Config { .. }
        | Error::InvalidArgument(_)
        | Error::NonPositiveA(_)
        | Error::GridTooSmall(_)
        | Error::Dump(_)
        | Error::Io(_) => USAGE,
        _ => FAILED,
    }
}

fn fail(context: &str, e: Error) -> u8 {
    eprintln!("error: {context}: {e}");
    code_for(&e)
}

fn solve(config: PathBuf, out: Option<PathBuf>) -> u8 {
    let cfg = match Config::from_path(&config) {
        Ok(c) => c,
        Err(e) => return fail(&config.display().to_string(), e),
    };
    let dir = out.unwrap_or_else(|| cfg.out_dir.clone());
    match run::solve(&cfg, &dir) {
        Ok(o) => {
            println!(
                "J = {:.12e}  dual residual = {:.3e}  converged = {}  -> {}",
                o.j,
                o.dual_residual,
                o.converged,
                dir.display()
            );
            if o.converged {
                OK
            } else {
                UNCONVERGED
            }
        }
        Err(e) => fail("solve", e),
    }
}

fn verify(suite: String, resolution: Option<usize>, out: Option<PathBuf>) -> u8 {
    let Some(suite) = Suite::parse(&suite) else {
        eprintln!("error: unknown suite '{suite}' (expected identities, conformal, symmetry or nonlinearity)");
        return USAGE;
    };
    let report = match suites::run(suite, resolution) {
        Ok(r) => r,
        Err(e) => return fail(suite.name(), e),
    };
    let csv = report.to_csv();
    match out {
        Some(path) => {
            if let Err(e) = write_atomic(&path, &csv) {
                return fail("writing report", e);
            }
        }
        None => print!("{csv}"),
    }
    let failed: Vec<&str> = report.rows.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        eprintln!("{}: all {} checks within budget", suite.name(), report.rows.len());
        OK
    } else {
        eprintln!("{}: over budget: {}", suite.name(), failed.join(", "));
        FAILED
    }
}

fn sweep(config: PathBuf, param: String, values: Vec<f64>, out: Option<PathBuf>) -> u8 {
    let Some(param) = SweepParam::parse(&param) else {
        eprintln!("error: unknown sweep parameter '{param}' (expected a, p or resolution)");
        return USAGE;
    };
    if values.is_empty() {
        eprintln!("error: --values must list at least one value");
        return USAGE;
    }
    let cfg = match Config::from_path(&config) {
        Ok(c) => c,
        Err(e) => return fail(&config.display().to_string(), e),
    };
    let dir = out.unwrap_or_else(|| cfg.out_dir.clone());
    match run::sweep(&cfg, param, &values, &dir) {
        Ok(rows) => {
            print!("{}", run::sweep_csv(param, &rows));
            for r in rows.iter().filter(|r| !r.ok()) {
                if let Err(msg) = &r.outcome {
                    eprintln!("{} = {}: {msg}", param.name(), r.value);
                }
            }
            if rows.iter().all(|r| r.ok()) {
                OK
            } else {
                FAILED
            }
        }
        Err(e) => fail("sweep", e),
    }
}

fn lift_cmd(input: PathBuf, out: PathBuf, n: usize, half_width: Option<f64>) -> u8 {
    let u = match read_scalar(&input) {
        Ok(u) => u,
        Err(e) => return fail(&input.display().to_string(), e),
    };
    let l = half_width.unwrap_or_else(|| (u.grid.r_max / 2f64.sqrt()).min(u.grid.z_max));
    let grid = match Grid3::new(n, l) {
        Ok(g) => g,
        Err(e) => return fail("cube grid", e),
    };
    match write_vector(&out, &lift(&u, &grid)) {
        Ok(()) => OK,
        Err(e) => fail(&out.display().to_string(), e),
    }
}

fn main() -> ExitCode {
    par::init_from_env();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { OK });
        }
    };
    ExitCode::from(match cli.command {
        Command::Solve { config, out } => solve(config, out),
        Command::Verify { suite, resolution, out } => verify(suite, resolution, out),
        Command::Sweep { config, param, values, out } => sweep(config, param, values, out),
        Command::Lift { input, out, n, half_width } => lift_cmd(input, out, n, half_width),
    })
}
