//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 physics precondition
//! violated, 4 numerical failure, 1 I/O failure.

pub mod commands;
pub mod config;

use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::path::PathBuf;

use crate::error::{Error, ErrorKind, Result};
use crate::output::OutputSet;
use commands::*;
use config::{resolve, ConfigFile};

#[derive(Debug, Parser)]
#[command(name = "bec-teleport", version, about = "Three-well condensate teleportation in truncated Fock space")]
pub struct Cli {
    /// TOML file with one section per subcommand; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (0: all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Record wall time in the manifest.
    #[arg(long, global = true)]
    pub timing: bool,
    /// Also write a gnuplot script next to each figure table.
    #[arg(long, global = true)]
    pub gnuplot: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entangled channel from a timed cross-collision.
    Channel(ChannelOpts),
    /// Full protocol over many seeded trials.
    Teleport(TeleportOpts),
    /// Even-count probability of the auxiliary species.
    ParitySweep(ParitySweepOpts),
    /// Total success probability over (r, P_D).
    EfficiencySweep(EfficiencySweepOpts),
    /// Pseudo-spin S_x(t) of the Josephson homodyne.
    Homodyne(HomodyneOpts),
    /// Adiabatic lattice potentials over (theta, z').
    LatticeMap(LatticeMapOpts),
    /// Adiabaticity check of a linear theta ramp.
    ScheduleCheck(ScheduleCheckOpts),
}

pub fn exit_code(e: &Error) -> i32 {
    match e.kind() {
        ErrorKind::Config => 2,
        ErrorKind::Precondition => 3,
        ErrorKind::Numeric => 4,
        ErrorKind::Io => 1,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p).map_err(|e| match e {
            Error::Io(io) => Error::InvalidParameter(format!("config {}: {io}", p.display())),
            other => other,
        })?,
        None => ConfigFile::default(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let ctx = Context {
        out: OutputSet::new(&cli.out)?,
        gnuplot: cli.gnuplot,
        timing: cli.timing.then(std::time::Instant::now),
    };
    pool.install(|| match &cli.command {
        Command::Channel(o) => channel(&resolve(file.channel.as_ref(), o)?, ctx),
        Command::Teleport(o) => teleport(&resolve(file.teleport.as_ref(), o)?, ctx),
        Command::ParitySweep(o) => parity_sweep(&resolve(file.parity_sweep.as_ref(), o)?, ctx),
        Command::EfficiencySweep(o) => efficiency_sweep(&resolve(file.efficiency_sweep.as_ref(), o)?, ctx),
        Command::Homodyne(o) => homodyne(&resolve(file.homodyne.as_ref(), o)?, ctx),
        Command::LatticeMap(o) => lattice_map(&resolve(file.lattice_map.as_ref(), o)?, ctx),
        Command::ScheduleCheck(o) => schedule(&resolve(file.schedule_check.as_ref(), o)?, ctx),
    })
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
