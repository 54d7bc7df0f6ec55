use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thinsim_cli::commands::{self, Experiment};
use thinsim_cli::config::{Command, ConfigFile, ExperimentSpec, Format, Overrides};
use thinsim_cli::validate::{self, Scale, Suite};
use thinsim_cli::{output, CliError};

#[derive(Parser, Debug)]
#[command(
    name = "thinsim",
    version,
    about = "Conditional-thinning cellular network experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args, Debug, Clone)]
struct CommonArgs {
    /// JSON config file (flat object, snake_case keys).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Ten times fewer trials; validation tolerances widened three-fold.
    #[arg(long)]
    quick: bool,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads (default: all cores). Does not affect results.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// CDF of the distance ratio R, analytic vs simulated.
    RatioCdf(CommonArgs),
    /// Coverage probability over an SIR threshold grid.
    Coverage(CommonArgs),
    /// Coverage of the generative non-uniform user model.
    Generative(CommonArgs),
    /// Run the validation suite and write a pass/fail report.
    Validate(CommonArgs),
}

fn resolve(command: Command, args: &CommonArgs) -> Result<ExperimentSpec, CliError> {
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    ExperimentSpec::resolve(
        command,
        file,
        Overrides {
            output: args.output.clone(),
            seed: args.seed,
            trials: args.trials,
            quick: args.quick,
            format: args.format,
        },
    )
}

fn run_experiment(spec: &ExperimentSpec) -> Result<(), CliError> {
    let Experiment { table, notes } = match spec.command {
        Command::RatioCdf => commands::cmd_ratio_cdf(spec)?,
        Command::Coverage => commands::cmd_coverage(spec)?,
        Command::Generative => commands::cmd_generative(spec)?,
        Command::Validate => unreachable!("validate has its own runner"),
    };
    let bytes = output::render(spec, &table, &notes)?;
    output::emit(spec.output_path.as_deref(), &bytes)
}

fn run_validate(spec: &ExperimentSpec) -> Result<bool, CliError> {
    let base = if spec.quick {
        Scale::QUICK
    } else {
        Scale::FULL
    };
    // --trials rescales the run; tolerances follow the chosen base scale.
    let scale = match spec.scenario.trials {
        t if t != validate_default_trials(spec.quick) => Scale { trials: t, ..base },
        _ => base,
    };
    let suite = Suite::new(scale, spec.scenario.seed);
    let mut reports = Vec::new();
    for &(id, _) in validate::CRITERIA.iter() {
        let report = suite.run(id);
        eprintln!("{report}");
        reports.push(report);
    }
    let passed = reports.iter().all(|r| r.passed);
    let mut text = output::header_lines(spec, &[format!("scale: {scale:?}")]);
    text.push_str(&validate::report_table(&reports));
    output::emit(spec.output_path.as_deref(), text.as_bytes())?;
    Ok(passed)
}

fn validate_default_trials(quick: bool) -> u64 {
    if quick {
        thinsim_cli::config::QUICK_TRIALS
    } else {
        thinsim_cli::config::DEFAULT_TRIALS
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Sub::RatioCdf(a) => (Command::RatioCdf, a),
        Sub::Coverage(a) => (Command::Coverage, a),
        Sub::Generative(a) => (Command::Generative, a),
        Sub::Validate(a) => (Command::Validate, a),
    };
    let result = resolve(command, args).and_then(|spec| {
        let threads = args.threads.unwrap_or(0);
        validate::with_threads(threads, || {
            if command == Command::Validate {
                run_validate(&spec).map(|ok| if ok { 0 } else { 1 })
            } else {
                run_experiment(&spec).map(|()| 0)
            }
        })
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("thinsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
