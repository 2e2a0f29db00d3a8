use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use clbath::qwalk::DEFAULT_RESOURCE_CAP;
use clbath_cli::config::{read_config, Mode, SweepSection};
use clbath_cli::run::{run, Options};

#[derive(Parser)]
#[command(
    name = "clbath",
    version,
    about = "Oscillator networks with a Caldeira-Leggett bath: classical, exact and walk-based simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the mode named in the config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Structural and dissipation diagnostics.
    Diagnose {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep one scalar config field over a list of values.
    Sweep {
        config: PathBuf,
        /// Dotted field path, e.g. `bath.coupling_scale`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Append bath coordinates to the trajectory CSV.
    #[arg(long)]
    emit_bath: bool,
    /// Bound on D²·2^p for the walk emulation.
    #[arg(long, default_value_t = DEFAULT_RESOURCE_CAP)]
    resource_cap: usize,
}

impl Common {
    fn options(&self) -> Options {
        Options {
            out_dir: self.out_dir.clone(),
            seed: self.seed,
            emit_bath: self.emit_bath,
            resource_cap: self.resource_cap,
            ..Options::default()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, common } => read_config(config).and_then(|cfg| run(&cfg, &common.options())),
        Command::Diagnose { config, common } => read_config(config).and_then(|mut cfg| {
            cfg.run.mode = Mode::Diagnose;
            run(&cfg, &common.options())
        }),
        Command::Sweep { config, param, values, common } => read_config(config).and_then(|mut cfg| {
            let point_mode = match (cfg.run.mode, &cfg.sweep) {
                (Mode::Sweep, Some(s)) => s.point_mode,
                (Mode::Sweep, None) => Mode::Reference,
                (m, _) => m,
            };
            cfg.run.mode = Mode::Sweep;
            cfg.sweep = Some(SweepSection { param: param.clone(), values: values.clone(), point_mode });
            cfg.validate()?;
            run(&cfg, &common.options())
        }),
    };
    match result {
        Ok(artifacts) => {
            for (name, _) in &artifacts.files {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
