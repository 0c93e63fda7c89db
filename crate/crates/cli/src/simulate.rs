use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use disloc_core::feed::write_symbol_meta;
use disloc_core::sim::{self, SimConfig};

use crate::error::CliError;
use crate::files::{ensure_dir, write_file, write_manifest};

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Simulator configuration (TOML: [topology] and [process] tables).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `process.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, short)]
    pub out: PathBuf,
    /// Worker threads (0 = all cores); output does not depend on it.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

pub fn load_config(args: &SimulateArgs) -> Result<SimConfig, CliError> {
    let text = fs::read_to_string(&args.config).map_err(|e| CliError::missing(&args.config, e.to_string()))?;
    let mut cfg = SimConfig::from_toml(&text).map_err(|e| {
        let mut err = CliError::from(e);
        err.file = Some(args.config.clone());
        err
    })?;
    if let Some(seed) = args.seed {
        cfg.process.seed = seed;
    }
    Ok(cfg)
}

/// Writes `<out>/<date>/...` for every day, `symbols.csv`, the resolved
/// `config.toml` and the manifest.
pub fn run(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load_config(args)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .map_err(|e| CliError::internal(format!("thread pool: {e}")))?;
    let days = pool.install(|| sim::simulate(&cfg))?;
    ensure_dir(&args.out)?;
    let mut events = 0;
    let mut truth = 0;
    for day in &days {
        day.write(&args.out)?;
        events += day.event_count();
        truth += day.truth.len();
    }
    let meta = sim::symbol_meta(&cfg);
    let path = args.out.join("symbols.csv");
    write_file(&path, |w| write_symbol_meta(w, &meta).map_err(std::io::Error::other))?;
    write_file(&args.out.join("config.toml"), |w| w.write_all(cfg.to_toml().as_bytes()))?;
    write_manifest(&args.out)?;
    let _ = writeln!(
        stdout,
        "simulate: {} day(s), {} symbol(s), {events} events, {truth} ground-truth segments -> {}",
        days.len(),
        meta.len(),
        args.out.display()
    );
    Ok(())
}
