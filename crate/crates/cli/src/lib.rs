//! Command-line front end for the IRS uplink simulator.
//!
//! Subcommands load a TOML configuration (see [`config`]), run a single
//! optimization, a Monte Carlo sweep or a convergence trace, and import or
//! export channel files. Output files are written to a temporary file in the
//! target directory and renamed into place, so a failed run never leaves a
//! partial file behind.

pub mod config;

use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use irs_core::channel::file::{read_channels, write_channels};
use irs_core::channel::los_channel_matrix;
use irs_core::experiments::{
    apply_scheme, channel_seed, convergence_trace, run_sweep, trial_channels,
};
use irs_core::ChannelSet;

pub use config::{parse_config, parse_config_with, Config, ConfigError};

#[derive(Debug, Parser)]
#[command(
    name = "irs-sim",
    version,
    about = "IRS-aided uplink simulator and phase optimizer"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimize the IRS phases for one channel realization.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        /// Use channels from this file instead of drawing them.
        #[arg(long)]
        channels: Option<PathBuf>,
        /// Channel draw: trial 0 of this master seed (default: `sweep.seed`).
        #[arg(long)]
        seed: Option<u64>,
        /// Override a configuration key, e.g. `--set scenario.c_v=5`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Run the configured sweep and write the result table as CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write per-trial records (seeds, digests, rates, traces) as JSON.
        #[arg(long)]
        trials_out: Option<PathBuf>,
        /// Worker threads (default: all cores). Results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Print the full-CSI rate after every outer iteration, from zero phases.
    Convergence {
        #[arg(long)]
        config: PathBuf,
        /// Channel draw: trial 0 of this master seed.
        #[arg(long)]
        seed: u64,
        /// Write the trace as CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Validate a channel file and print its dimensions and digest.
    ImportChannels {
        #[arg(long = "in")]
        input: PathBuf,
        /// Also check the dimensions against this configuration.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Draw channels for a configuration and write them to a channel file.
    ExportChannels {
        #[arg(long)]
        config: PathBuf,
        /// Channel draw: trial 0 of this master seed (default: `sweep.seed`).
        #[arg(long)]
        seed: Option<u64>,
        /// Write the deterministic LOS channels instead of a Rician draw.
        #[arg(long)]
        los: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Config { path: PathBuf, source: ConfigError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Channels {
        path: PathBuf,
        source: irs_core::Error,
    },
    #[error(transparent)]
    Core(#[from] irs_core::Error),
    #[error("writing standard output: {0}")]
    Stdout(io::Error),
    #[error("{0}")]
    Usage(String),
}

type CliResult<T = ()> = Result<T, CliError>;

fn load_config(path: &Path, overrides: &[String]) -> CliResult<Config> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_with(&text, overrides).map_err(|source| CliError::Config {
        path: path.to_path_buf(),
        source,
    })
}

fn load_channels(path: &Path) -> CliResult<ChannelSet> {
    let file = fs::File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_channels(BufReader::new(file)).map_err(|source| CliError::Channels {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `path` through a temporary file in the same directory and a rename.
pub fn write_atomic<F>(path: &Path, fill: F) -> CliResult
where
    F: FnOnce(&mut dyn Write) -> CliResult,
{
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    {
        let mut w = io::BufWriter::new(tmp.as_file_mut());
        fill(&mut w)?;
        w.flush().map_err(io_err)?;
    }
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn draw(config: &Config, seed: Option<u64>) -> CliResult<(ChannelSet, u64)> {
    let trial_seed = channel_seed(seed.unwrap_or(config.sweep.master_seed), 0);
    let channels = trial_channels(&config.scenario, trial_seed)?;
    Ok((channels, trial_seed))
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Runs one parsed command, writing human-readable output to `out`.
pub fn run(command: &Command, out: &mut dyn Write) -> CliResult {
    match command {
        Command::Optimize {
            config,
            channels,
            seed,
            set,
        } => {
            let cfg = load_config(config, set)?;
            let (ch, trial_seed) = match channels {
                Some(path) => {
                    let ch = load_channels(path)?;
                    ch.check_matches(&cfg.scenario)
                        .map_err(|source| CliError::Channels {
                            path: path.clone(),
                            source,
                        })?;
                    (ch, seed.map_or(0, |s| channel_seed(s, 0)))
                }
                None => draw(&cfg, *seed)?,
            };
            let outcome = apply_scheme(&cfg.scenario, &ch, &cfg.scheme, &cfg.options, trial_seed)?;
            let phases = outcome
                .phases
                .as_ref()
                .map_or_else(|| "none".to_string(), |p| join(p.indices()));
            writeln!(
                out,
                "scheme: {}\nrate_bps_hz: {}\niterations: {}\nrate_trace: {}\nlevels: {}\nphases: {}",
                cfg.scheme,
                outcome.rate,
                outcome.iterations,
                join(&outcome.trace),
                cfg.options.levels,
                phases
            )
            .map_err(CliError::Stdout)
        }
        Command::Sweep {
            config,
            out: path,
            trials_out,
            threads,
            set,
        } => {
            let cfg = load_config(config, set)?;
            let mut spec = cfg.sweep.clone();
            spec.record_trials = trials_out.is_some();
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(n) = threads {
                if *n == 0 {
                    return Err(CliError::Usage("--threads must be at least 1".into()));
                }
                pool = pool.num_threads(*n);
            }
            let pool = pool
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))?;
            let result = pool.install(|| run_sweep(&spec, &cfg.options))?;
            write_atomic(path, |w| Ok(result.write_table(w)?))?;
            if let Some(tpath) = trials_out {
                write_atomic(tpath, |w| {
                    serde_json::to_writer_pretty(&mut *w, &result).map_err(|e| CliError::Io {
                        path: tpath.clone(),
                        source: e.into(),
                    })?;
                    writeln!(w).map_err(|source| CliError::Io {
                        path: tpath.clone(),
                        source,
                    })
                })?;
            }
            writeln!(
                out,
                "wrote {} rows ({} schemes x {} values, {} trials each) to {}",
                result.rows.len(),
                spec.schemes.len(),
                spec.values.len(),
                spec.trials,
                path.display()
            )
            .map_err(CliError::Stdout)
        }
        Command::Convergence {
            config,
            seed,
            out: path,
            set,
        } => {
            let cfg = load_config(config, set)?;
            let trace = convergence_trace(&cfg.scenario, &cfg.options, channel_seed(*seed, 0))?;
            let write_trace = |w: &mut dyn Write| -> io::Result<()> {
                writeln!(w, "iteration,rate_bps_hz")?;
                for (k, r) in trace.iter().enumerate() {
                    writeln!(w, "{k},{r}")?;
                }
                Ok(())
            };
            match path {
                Some(p) => write_atomic(p, |w| {
                    write_trace(w).map_err(|source| CliError::Io {
                        path: p.clone(),
                        source,
                    })
                }),
                None => write_trace(out).map_err(CliError::Stdout),
            }
        }
        Command::ImportChannels { input, config } => {
            let ch = load_channels(input)?;
            if let Some(cpath) = config {
                let cfg = load_config(cpath, &[])?;
                ch.check_matches(&cfg.scenario)
                    .map_err(|source| CliError::Channels {
                        path: input.clone(),
                        source,
                    })?;
            }
            writeln!(
                out,
                "ok: M = {}, N = {}, digest = {:016x}, |h_r|_F^2 = {}, |h_v|^2 = {}, |h_d|^2 = {}",
                ch.m(),
                ch.n(),
                ch.digest(),
                ch.h_r.norm_squared(),
                ch.h_v.norm_squared(),
                ch.h_d.norm_squared()
            )
            .map_err(CliError::Stdout)
        }
        Command::ExportChannels {
            config,
            seed,
            los,
            out: path,
            set,
        } => {
            let cfg = load_config(config, set)?;
            let ch = if *los {
                los_channel_matrix(&cfg.scenario)?
            } else {
                draw(&cfg, *seed)?.0
            };
            write_atomic(path, |w| Ok(write_channels(&ch, w)?))?;
            writeln!(
                out,
                "wrote {}x{} channels to {}",
                ch.m(),
                ch.n(),
                path.display()
            )
            .map_err(CliError::Stdout)
        }
    }
}
