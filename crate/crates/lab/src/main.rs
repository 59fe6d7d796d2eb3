use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use diolab::cli::Cli;
use diolab::config::Format;
use diolab::error::LabResult;
use diolab::{effective_config, run};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> LabResult<()> {
    let cfg = effective_config(cli)?;
    let table = run(cli, &cfg)?;
    let ext = match cfg.output.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let path = match (&cli.common.out, &cfg.output.directory) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => {
            std::fs::create_dir_all(dir)?;
            Some(dir.join(format!("{}.{ext}", table.schema.trim_start_matches("diolab."))))
        }
        (None, None) => None,
    };
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(&p)?);
            table.write(cfg.output.format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            table.write(cfg.output.format, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}
