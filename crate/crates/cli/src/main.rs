use std::fmt;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;

mod args;
mod figures;
mod manifest;
mod ode;
mod range;
mod simulate;
mod svg;
mod verify;

use args::{Cli, Command};
use manifest::RunManifest;

/// A flag value that parsed but is not acceptable; exits with code 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(flag: &str, message: impl fmt::Display) -> anyhow::Error {
    Usage(format!("invalid value for {flag}: {message}")).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match err.downcast_ref::<listmatch::Error>() {
        Some(listmatch::Error::Consistency(_)) => 3,
        Some(listmatch::Error::Config(_) | listmatch::Error::Domain(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(usage("--threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()?;
    }
    match cli.command {
        Command::Simulate(a) => simulate::run(&a),
        Command::Ode(a) => ode::run(&a),
        Command::Verify(a) => verify::run(&a),
        Command::Figures(a) => figures::run(&a),
        Command::Replay(a) => replay(&a),
    }
}

fn replay(a: &args::ReplayArgs) -> Result<ExitCode> {
    let recorded = RunManifest::read(&a.manifest)?;
    let relocate = |path: &std::path::Path| match &a.out_dir {
        Some(dir) => dir.join(path.file_name().unwrap_or(path.as_os_str())),
        None => path.to_path_buf(),
    };
    let params = recorded.params;
    match recorded.subcommand.as_str() {
        "simulate" => {
            let mut args: args::SimulateArgs = serde_json::from_value(params)?;
            args.out = relocate(&args.out);
            simulate::run(&args)
        }
        "ode" => {
            let mut args: args::OdeArgs = serde_json::from_value(params)?;
            args.out = relocate(&args.out);
            ode::run(&args)
        }
        "verify" => {
            let mut args: args::VerifyArgs = serde_json::from_value(params)?;
            if let Some(dir) = &a.out_dir {
                args.out_dir = dir.clone();
            }
            verify::run(&args)
        }
        "figures" => {
            let mut args: args::FiguresArgs = serde_json::from_value(params)?;
            if let Some(dir) = &a.out_dir {
                args.out_dir = dir.clone();
            }
            figures::run(&args)
        }
        other => Err(usage("manifest", format!("unknown subcommand `{other}`"))),
    }
}
