use std::panic;
use std::process::ExitCode;

use canbench_cli::{parse_cli, run_command, CliError};

fn main() -> ExitCode {
    let cfg = match parse_cli(std::env::args_os().skip(1)) {
        Ok(cfg) => cfg,
        Err(CliError::Help(text)) => {
            print!("{text}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{e}");
            return exit(&e);
        }
    };
    let level = match cfg.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    match panic::catch_unwind(|| run_command(&cfg)) {
        Ok(Ok(written)) => {
            for p in written {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Ok(Err(e)) => {
            log::error!("{e}");
            exit(&e)
        }
        Err(_) => exit(&CliError::Internal("unexpected panic".into())),
    }
}

fn exit(e: &CliError) -> ExitCode {
    ExitCode::from(e.exit_code() as u8)
}
