use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use micromag::benchmark::{measure_direct_demag, run_benchmark_with, BenchmarkOptions};
use micromag::config::{parse_config, to_config, RunConfig};
use micromag::llg::RunOutcome;
use micromag::problems::{standard_problem_3_benchmark, standard_problem_4};
use micromag::trajectory::{format_record, LineEnding, TrajectoryRecord, TrajectorySink, TrajectoryWriter};
use micromag::validate::run_validation;
use micromag::{Backend, Error, Precision, Real};

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

#[derive(Parser)]
#[command(name = "micromag", version, about = "Finite-difference micromagnetic simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration and write its trajectory.
    Simulate {
        config: PathBuf,
        /// Overrides the `output` key; `-` writes to stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        backend: Option<Backend>,
        #[arg(long)]
        precision: Option<Precision>,
        /// Suppress progress messages on stderr.
        #[arg(short, long)]
        quiet: bool,
    },
    /// Time integration steps of the problem #3 cube.
    Benchmark {
        /// Cells per cube edge.
        #[arg(long, value_delimiter = ',', default_values_t = [8usize, 16, 32, 64])]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [Backend::Serial, Backend::Parallel])]
        backends: Vec<Backend>,
        #[arg(long, value_delimiter = ',', default_values_t = [Precision::F64, Precision::F32])]
        precisions: Vec<Precision>,
        #[arg(long, default_value_t = 5)]
        warmup: u64,
        #[arg(long, default_value_t = 20)]
        steps: u64,
        /// Also write the rows as TSV.
        #[arg(long)]
        tsv: Option<PathBuf>,
        /// Also time the direct-sum demag field at these edge sizes.
        #[arg(long, value_delimiter = ',')]
        direct: Vec<usize>,
    },
    /// Check the FFT demag field against the direct sum and the tensor invariants.
    Validate {
        /// Include the larger shape-factor checks.
        #[arg(long)]
        full: bool,
    },
    /// Print a built-in problem in config syntax.
    PrintConfig {
        /// `sp4` or `sp3`.
        problem: String,
        /// Cube edge for sp3.
        #[arg(short, default_value_t = 16)]
        n: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            config,
            output,
            backend,
            precision,
            quiet,
        } => simulate(config, output, backend, precision, quiet),
        Command::Benchmark {
            sizes,
            backends,
            precisions,
            warmup,
            steps,
            tsv,
            direct,
        } => benchmark(
            BenchmarkOptions {
                sizes,
                backends,
                precisions,
                warmup_steps: warmup,
                measure_steps: steps,
            },
            tsv,
            &direct,
        ),
        Command::Validate { full } => {
            let report = run_validation(full);
            print!("{}", report.render());
            if report.passed() {
                Ok(())
            } else {
                return ExitCode::from(EXIT_VALIDATION);
            }
        }
        Command::PrintConfig { problem, n } => match problem.as_str() {
            "sp4" => {
                print!("{}", to_config(&standard_problem_4()));
                Ok(())
            }
            "sp3" => standard_problem_3_benchmark(n).map(|s| print!("{}", to_config(&s))),
            other => Err(Error::InvalidArgument(format!("unknown problem `{other}` (expected sp3 or sp4)"))),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_CONFIG })
        }
    }
}

fn simulate(
    path: PathBuf,
    output: Option<PathBuf>,
    backend: Option<Backend>,
    precision: Option<Precision>,
    quiet: bool,
) -> micromag::Result<()> {
    let text = std::fs::read_to_string(&path).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    let mut cfg = parse_config(&text)?;
    if let Some(o) = output {
        cfg.output = (o.as_os_str() != "-").then_some(o);
    }
    if let Some(b) = backend {
        cfg.backend = b;
    }
    if let Some(p) = precision {
        cfg.precision = p;
    }
    match cfg.precision {
        Precision::F64 => run_config::<f64>(&cfg, quiet),
        Precision::F32 => run_config::<f32>(&cfg, quiet),
    }
}

struct StdoutSink<W: Write> {
    out: W,
    ending: LineEnding,
}

impl<W: Write> TrajectorySink for StdoutSink<W> {
    fn record(&mut self, rec: TrajectoryRecord) -> micromag::Result<()> {
        self.out
            .write_all(format_record(&rec, self.ending).as_bytes())
            .map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            })
    }
}

struct Progress<'a> {
    inner: &'a mut dyn TrajectorySink,
    total: u64,
    quiet: bool,
}

impl TrajectorySink for Progress<'_> {
    fn record(&mut self, rec: TrajectoryRecord) -> micromag::Result<()> {
        if !self.quiet {
            eprintln!(
                "step {}/{}  <m> = ({:.4}, {:.4}, {:.4})",
                rec.step, self.total, rec.mx, rec.my, rec.mz
            );
        }
        self.inner.record(rec)
    }
}

fn run_config<T: Real>(cfg: &RunConfig, quiet: bool) -> micromag::Result<()> {
    let spec = &cfg.spec;
    if !quiet {
        let (nx, ny, nz) = spec.grid.shape();
        eprintln!(
            "{}: {nx}x{ny}x{nz} cells, {} steps of {} ns, {} {}",
            spec.name, spec.steps, spec.dt, cfg.backend, cfg.precision
        );
    }
    let mut state = spec.build_state::<T>(cfg.backend)?;
    let start = std::time::Instant::now();
    let outcome = match &cfg.output {
        Some(path) => {
            let mut writer = TrajectoryWriter::create(path, cfg.line_ending)?;
            let mut sink = Progress {
                inner: &mut writer,
                total: spec.steps,
                quiet,
            };
            let outcome = state.run_until(spec.steps, spec.cadence, &mut sink, cfg.torque_tol)?;
            writer.finish()?;
            outcome
        }
        None => {
            let stdout = io::stdout();
            let mut out = StdoutSink {
                out: BufWriter::new(stdout.lock()),
                ending: cfg.line_ending,
            };
            let mut sink = Progress {
                inner: &mut out,
                total: spec.steps,
                quiet,
            };
            let outcome = state.run_until(spec.steps, spec.cadence, &mut sink, cfg.torque_tol)?;
            out.out.flush().map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            })?;
            outcome
        }
    };
    if !quiet {
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            RunOutcome::Completed => eprintln!("completed {} steps in {secs:.1} s", state.step),
            RunOutcome::Converged => eprintln!(
                "converged after {} steps in {secs:.1} s (max torque {:.3e})",
                state.step,
                state.last_torque().unwrap_or(0.0)
            ),
        }
    }
    Ok(())
}

fn benchmark(opts: BenchmarkOptions, tsv: Option<PathBuf>, direct: &[usize]) -> micromag::Result<()> {
    let report = run_benchmark_with(&opts, |row| match &row.result {
        Ok(m) => eprintln!(
            "{} {} {}: {:.3} ms/step",
            row.label(),
            row.backend,
            row.precision,
            m.ms_per_step
        ),
        Err(e) => eprintln!("{} {} {}: failed: {e}", row.label(), row.backend, row.precision),
    })?;
    print!("{}", report.render_table());
    for &n in direct {
        let ms = measure_direct_demag(n, 1)?;
        println!("direct sum {n}^3: {ms:.3} ms per field evaluation");
    }
    if let Some(path) = tsv {
        std::fs::write(&path, report.to_tsv()).map_err(|source| Error::Io { path, source })?;
    }
    Ok(())
}
