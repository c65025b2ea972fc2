//! Command-line front end. `main.rs` only forwards to [`run`].

mod apply;
mod bench;
mod demo;
mod sync_cmd;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};

pub use apply::{apply_frame, ApplyArgs};
pub use bench::{run_bench, BenchArgs, BenchReport};
pub use demo::{ohlc_demo, DemoArgs, DemoName};
pub use sync_cmd::{sync_frames, SyncArgs};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "STREAMLOOP_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "streamloop",
    version,
    about = "Streaming time-series transforms over CSV files"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an operator pipeline over every selected column of a CSV file.
    Apply(ApplyArgs),
    /// Align secondary CSV streams onto a local stream.
    Sync(SyncArgs),
    /// Write a demo dataset.
    Demo(DemoArgs),
    /// Time EWMA over a generated frame and spot-check the result.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutputArg {
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

impl OutputArg {
    pub(crate) fn open(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.output {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

pub(crate) fn open_input(path: &Path) -> Result<io::BufReader<File>> {
    File::open(path)
        .map(io::BufReader::new)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Runs `f` on a rayon pool sized by [`THREADS_ENV`], or the global pool
/// when the variable is unset.
pub fn with_thread_limit<R: Send>(f: impl FnOnce() -> Result<R> + Send) -> Result<R> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return f();
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::param(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::Resource(e.to_string()))?
        .install(f)
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Apply(args) => apply::run(&args),
        Command::Sync(args) => sync_cmd::run(&args),
        Command::Demo(args) => demo::run(&args),
        Command::Bench(args) => bench::run(&args),
    }
}

/// Parses arguments and runs. Usage errors exit with 2, runtime errors
/// with 1.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // downstream reader closed early, e.g. `| head`
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
