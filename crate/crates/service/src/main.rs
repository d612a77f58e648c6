use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hat_service::commands::{replay_file, simulate_file};
use hat_service::config::ServiceConfig;
use hat_service::server;

#[derive(Parser)]
#[command(name = "hat", version, about = "Head-tilt teleoperation service and tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve live sessions over a websocket at /ws.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Replay a trace; exits 0 only if the task was completed.
    Replay {
        trace: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print the metrics of a trace; exits 0 whenever the trace is readable.
    Metrics {
        trace: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run a head-pose script headlessly; exits 0 only if the task was completed.
    Simulate {
        /// Bundled scenario id or scenario file.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        script: PathBuf,
        /// Write the run as a trace file.
        #[arg(long)]
        emit_trace: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

const EXIT_INCOMPLETE: u8 = 1;
const EXIT_ERROR: u8 = 2;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let config = match &cli.command {
        Command::Serve { config }
        | Command::Replay { config, .. }
        | Command::Metrics { config, .. }
        | Command::Simulate { config, .. } => config.as_deref(),
    };
    let cfg = match ServiceConfig::resolve(config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    };

    let result = match &cli.command {
        Command::Serve { .. } => return serve(cfg),
        Command::Replay { trace, .. } => replay_file(trace, &cfg).map(|m| (m, true)),
        Command::Metrics { trace, .. } => replay_file(trace, &cfg).map(|m| (m, false)),
        Command::Simulate { scenario, script, emit_trace, .. } => {
            simulate_file(scenario, script, emit_trace.as_deref(), &cfg).map(|m| (m, true))
        }
    };
    match result {
        Ok((metrics, gate_on_completion)) => {
            print!("{}", metrics.to_kv());
            if gate_on_completion && !metrics.completed {
                ExitCode::from(EXIT_INCOMPLETE)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn serve(cfg: ServiceConfig) -> ExitCode {
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: cannot start runtime: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    match runtime.block_on(server::serve(cfg, shutdown)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
