use std::fs::File;
use std::io::{self, Write};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::CliResult;

/// Single JSON document written by every subcommand.
#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub version: &'static str,
    pub command: &'a str,
    pub seed: u64,
    pub config: &'a ExperimentConfig,
    pub result: T,
}

fn sink(cfg: &ExperimentConfig) -> CliResult<Box<dyn Write>> {
    Ok(match &cfg.out {
        Some(path) => Box::new(io::BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn write_json<T: Serialize>(cfg: &ExperimentConfig, result: T) -> CliResult<()> {
    let envelope = Envelope {
        version: popsim::VERSION,
        command: &cfg.command,
        seed: cfg.seed,
        config: cfg,
        result,
    };
    let mut w = sink(cfg)?;
    serde_json::to_writer_pretty(&mut w, &envelope)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn write_csv<T: Serialize>(cfg: &ExperimentConfig, rows: &[T]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(sink(cfg)?);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
