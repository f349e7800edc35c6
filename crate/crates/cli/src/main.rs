use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use causal_switch_cli::{list_scenarios, parse_suite, run_scenario, run_suite, CliError, ParamValue, ScenarioConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "causal-switch", about = "Run indefinite-causal-order scenarios and emit JSON reports")]
struct Cli {
    /// List scenarios with their parameters and defaults
    #[arg(long)]
    list: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario
    Run {
        #[arg(long)]
        scenario: Option<String>,
        /// key=value, repeatable; overrides the config file
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON file with scenario, parameters, seed and output_path
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run every scenario listed in a suite file
    Suite {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Same as --list
    List,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Writes to stdout, treating a closed pipe as success.
fn emit(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn run_config(
    scenario: Option<String>,
    params: Vec<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    config: Option<PathBuf>,
) -> Result<bool, CliError> {
    let mut cfg = match (&config, &scenario) {
        (Some(path), _) => ScenarioConfig::from_json(&read(path)?)?,
        (None, Some(name)) => ScenarioConfig::new(name.parse()?),
        (None, None) => return Err(CliError::Usage("run needs --scenario or --config".into())),
    };
    if let Some(name) = scenario {
        cfg.scenario = name.parse()?;
    }
    for kv in params {
        let (k, v) =
            kv.split_once('=').ok_or_else(|| CliError::Usage(format!("--param expects key=value, got '{kv}'")))?;
        cfg.parameters.insert(k.trim().to_string(), ParamValue::parse(v));
    }
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(out) = out {
        cfg.output_path = Some(out.display().to_string());
    }
    let report = run_scenario(&cfg)?;
    let text = report.to_json();
    if let Some(path) = &cfg.output_path {
        write(Path::new(path), &text)?;
    }
    emit(&(text + "\n"))?;
    Ok(report.pass)
}

fn suite(config: PathBuf, out: Option<PathBuf>) -> Result<bool, CliError> {
    let configs = parse_suite(&read(&config)?)?;
    let suite = run_suite(&configs)?;
    for (cfg, report) in configs.iter().zip(&suite.reports) {
        if let Some(path) = &cfg.output_path {
            write(Path::new(path), &report.to_json())?;
        }
    }
    let text = suite.to_json();
    if let Some(path) = out {
        write(&path, &text)?;
    }
    emit(&(text + "\n"))?;
    Ok(suite.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Usage(e.kind().to_string() + ": " + e.to_string().lines().next().unwrap_or(""));
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    let outcome = match (cli.list, cli.command) {
        (true, _) | (false, Some(Command::List)) => emit(&list_scenarios()).map(|_| true),
        (false, Some(Command::Run { scenario, params, seed, out, config })) => {
            run_config(scenario, params, seed, out, config)
        }
        (false, Some(Command::Suite { config, out })) => suite(config, out),
        (false, None) => Err(CliError::Usage("expected a command: run, suite or --list".into())),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
