use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use rta_bench::config::{filter_config, load_matrix_config, paper_matrix};
use rta_bench::report::format_table;
use rta_bench::run::run_many;
use rta_bench::verify::run_invariants;
use rta_bench::{
    write_report, BenchConfig, BenchError, ControllerKind, OutputFormat, PolicySource, Suite,
    TimingReport,
};
use rta_core::policy::{ObservationVariant, PolicyNetwork};
use rta_core::solvers::SolveStatus;

#[derive(Parser)]
#[command(
    name = "rta-bench",
    version,
    about = "Timing benchmarks for run time assurance filters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration (or the full reference matrix with --matrix).
    Run(RunArgs),
    /// Run every configuration of a flat TOML sweep file.
    Matrix {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the file's `out` key.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long, env = "RTA_BENCH_SEED", default_value_t = 0)]
        seed: u64,
        /// Run configurations on separate threads (perturbs timings).
        #[arg(long)]
        parallel_configs: bool,
    },
    /// Run the invariant checks and exit non-zero on any failure.
    Verify {
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, env = "RTA_BENCH_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Write a seeded policy weights file of the reference architecture.
    Weights {
        #[arg(long, value_enum)]
        variant: Variant,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = WeightsFormat::Binary)]
        format: WeightsFormat,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, alias = "policy", value_enum, default_value_t = Controller::Random)]
    controller: Controller,
    #[arg(long, value_enum, default_value_t = Rta::Easif)]
    rta: Rta,
    #[arg(long, default_value_t = 1.0)]
    dt: f64,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Backup horizon of the implicit filter (s).
    #[arg(long, default_value_t = 20.0)]
    horizon: f64,
    /// Per-call wall-clock limit of the discrete filter (s).
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    #[arg(long, value_enum, default_value_t = SuiteArg::Safe)]
    suite: SuiteArg,
    #[arg(long, default_value_t = 1000)]
    cases: usize,
    #[arg(long, env = "RTA_BENCH_SEED", default_value_t = 0)]
    seed: u64,
    /// Policy weights file; a seeded network is used when omitted.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Run the complete reference matrix instead of a single configuration.
    #[arg(long)]
    matrix: bool,
    /// Run matrix configurations on separate threads (perturbs timings).
    #[arg(long)]
    parallel_configs: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Controller {
    Random,
    SafeRandom,
    NoSensors,
    AllSensors,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rta {
    None,
    Easif,
    Iasif,
    Dasif,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Safe,
    Unsafe,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    NoSensors,
    AllSensors,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightsFormat {
    Text,
    Binary,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

fn single_config(args: &RunArgs) -> Result<BenchConfig, BenchError> {
    let controller = match args.controller {
        Controller::Random => ControllerKind::Random,
        Controller::SafeRandom => ControllerKind::SafeRandom,
        Controller::NoSensors => ControllerKind::NoSensors,
        Controller::AllSensors => ControllerKind::AllSensors,
    };
    let rta = match args.rta {
        Rta::None => "none",
        Rta::Easif => "easif",
        Rta::Iasif => "iasif",
        Rta::Dasif => "dasif",
    };
    let suite = match args.suite {
        SuiteArg::Safe => Suite::Safe,
        SuiteArg::Unsafe => Suite::NotSafe,
    };
    if !(args.time_limit > 0.0 && args.time_limit.is_finite()) {
        return Err(BenchError::Config(format!(
            "time limit must be positive, got {}",
            args.time_limit
        )));
    }
    let mut filter = filter_config(rta, args.dt, args.tol)?;
    if let Some(f) = &mut filter {
        f.horizon = args.horizon;
        f.time_limit = Duration::from_secs_f64(args.time_limit);
    }
    let mut config = BenchConfig::new(controller, filter, suite, args.cases, args.seed);
    config.label = config.default_label();
    if let Some(path) = &args.weights {
        config.policy = PolicySource::File(path.clone());
    }
    Ok(config)
}

fn execute(configs: &[BenchConfig], parallel: bool) -> (Vec<TimingReport>, bool) {
    let mut reports = Vec::new();
    let mut ok = true;
    for (config, result) in configs.iter().zip(run_many(configs, parallel)) {
        match result.and_then(|r| {
            let report = r.report()?;
            Ok((report, r))
        }) {
            Ok((report, run)) => {
                let failures = run.count_status(SolveStatus::Infeasible)
                    + run.count_status(SolveStatus::Timeout)
                    + run.count_status(SolveStatus::IterationLimit);
                if failures > 0 || run.fallbacks() > 0 {
                    eprintln!(
                        "{}: {failures} non-optimal solves, {} backup fallbacks",
                        config.label,
                        run.fallbacks()
                    );
                }
                reports.push(report);
            }
            Err(e) => {
                eprintln!("{}: {e}", config.label);
                ok = false;
            }
        }
    }
    (reports, ok)
}

fn finish(
    reports: &[TimingReport],
    out: Option<&PathBuf>,
    format: OutputFormat,
    ok: bool,
) -> ExitCode {
    print!("{}", format_table(reports));
    if let Some(path) = out {
        if let Err(e) = write_report(reports, path, format) {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            let configs = if args.matrix {
                let mut configs = paper_matrix(args.cases, args.seed);
                if let Some(path) = &args.weights {
                    for c in configs
                        .iter_mut()
                        .filter(|c| c.controller.variant().is_some())
                    {
                        c.policy = PolicySource::File(path.clone());
                    }
                }
                configs
            } else {
                match single_config(&args) {
                    Ok(c) => vec![c],
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::FAILURE;
                    }
                }
            };
            let (reports, ok) = execute(&configs, args.parallel_configs);
            finish(&reports, args.out.as_ref(), args.format.into(), ok)
        }
        Command::Matrix {
            config,
            out,
            format,
            seed,
            parallel_configs,
        } => {
            let file = match load_matrix_config(&config, seed) {
                Ok(f) => f,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::FAILURE;
                }
            };
            for s in &file.skipped {
                eprintln!("skipped {s}");
            }
            let (reports, ok) = execute(&file.configs, parallel_configs);
            let format = format
                .map(OutputFormat::from)
                .or(file.format)
                .unwrap_or(OutputFormat::Csv);
            finish(&reports, out.as_ref().or(file.out.as_ref()), format, ok)
        }
        Command::Verify { cases, seed } => {
            let checks = run_invariants(cases, seed);
            let mut ok = true;
            for c in &checks {
                println!(
                    "[{}] {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
                ok &= c.passed;
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::Weights {
            variant,
            seed,
            out,
            format,
        } => {
            let variant = match variant {
                Variant::NoSensors => ObservationVariant::NoSensors,
                Variant::AllSensors => ObservationVariant::AllSensors,
            };
            let net = PolicyNetwork::seeded(variant, seed);
            let written = match format {
                WeightsFormat::Text => net.save_text(&out),
                WeightsFormat::Binary => net.save_binary(&out),
            };
            match written {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
