use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use qpointing_cli::{run, Cli, CliError};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::new("usage", first_line(&e))),
    };
    match run(cli).and_then(|o| emit(&o).map(|()| o.passed)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => fail(&e),
    }
}

fn first_line(e: &clap::Error) -> String {
    let rendered = e.render().to_string();
    rendered
        .lines()
        .find(|l| !l.trim().is_empty())
        .unwrap_or_default()
        .trim_start_matches("error: ")
        .to_string()
}

fn emit(o: &qpointing_cli::Outcome) -> Result<(), CliError> {
    let io_err = |e: io::Error| CliError::new("io", e.to_string());
    match &o.output {
        Some(path) => {
            let f = File::create(path)
                .map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(f);
            o.artifact.write(o.format, &mut w)?;
            w.flush().map_err(io_err)
        }
        None => {
            let mut w = io::stdout().lock();
            o.artifact.write(o.format, &mut w)?;
            w.flush().map_err(io_err)
        }
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{e}");
    ExitCode::from(2)
}
