mod args;
mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, FromArgMatches};

use args::{Cli, Command, Format};
use commands::{Failure, Outcome};

const EXIT_FAILED_CHECK: u8 = 1;
const EXIT_INVALID: u8 = 2;

fn fail(kind: &str, message: &str) -> ExitCode {
    let text = output::to_json(&output::error_object(kind, message));
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    ExitCode::from(EXIT_INVALID)
}

fn clap_failure(e: clap::Error) -> ExitCode {
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
            let _ = e.print();
            ExitCode::SUCCESS
        }
        _ => {
            let _ = e.print();
            fail("usage", e.render().to_string().trim_end())
        }
    }
}

fn parse(argv: Vec<OsString>) -> Result<Cli, ExitCode> {
    let cmd = Cli::command();
    // First pass only locates `--config` and the subcommand; required flags
    // may still be missing because the file supplies them.
    let first = cmd.clone().ignore_errors(true).try_get_matches_from(&argv).map_err(clap_failure)?;
    let argv = match first.get_one::<PathBuf>("config") {
        Some(path) => {
            let merged = config::load(path).and_then(|entries| config::merge(&cmd, &first, argv, &entries));
            match merged {
                Ok(a) => a,
                Err(e) => return Err(fail("config", &e.0)),
            }
        }
        None => argv,
    };
    let matches = cmd.try_get_matches_from(argv).map_err(clap_failure)?;
    Cli::from_arg_matches(&matches).map_err(clap_failure)
}

fn dispatch(command: &Command) -> Result<Outcome, Failure> {
    match command {
        Command::Constants(a) => commands::constants(a),
        Command::Deficit(a) => commands::deficit_cmd(a),
        Command::Extremal(a) => commands::extremal(a),
        Command::Minimize(a) => commands::minimize_cmd(a),
        Command::Shoot(a) => commands::shoot_cmd(a),
        Command::Onofri(a) => commands::onofri_cmd(a),
        Command::Bliss(a) => commands::bliss_cmd(a),
        Command::Moser(a) => commands::moser_cmd(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Verify(a) => commands::verify_cmd(a),
    }
}

fn write_to(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = match parse(std::env::args_os().collect()) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let name = cli.command.name();
    let outcome = match dispatch(&cli.command) {
        Ok(o) => o,
        Err(f) => return fail(f.kind, &f.message),
    };

    let format = cli.format.unwrap_or(match cli.command {
        Command::Sweep(_) => Format::Csv,
        _ => Format::Json,
    });
    let report = match format {
        Format::Json => output::to_json(&output::envelope(
            name,
            outcome.passed,
            outcome.parameters,
            outcome.result,
        )),
        Format::Csv => output::to_csv(&outcome.result),
    };
    // With a profile, the profile is the artifact and the report goes to stderr.
    let written = match &outcome.profile {
        Some(profile) => {
            let w = write_to(cli.output.as_deref(), profile);
            eprint!("{report}");
            w
        }
        None => write_to(cli.output.as_deref(), &report),
    };
    match written {
        // A reader that stops early (`| head`) is not an error of ours.
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
        Err(e) => return fail("io", &format!("cannot write output: {e}")),
        Ok(()) => {}
    }
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED_CHECK)
    }
}
