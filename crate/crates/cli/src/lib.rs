//! `disloc`: simulate → detect → roc → analyze → report, with file handoff
//! between stages.

pub mod analyze;
pub mod detect;
pub mod error;
pub mod figure2;
pub mod files;
pub mod report;
pub mod simulate;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use disloc_core::model::NANOS_PER_DAY;
use disloc_core::sim::config::{DEFAULT_OPEN_NS, DEFAULT_SESSION_NS};

pub use error::{CliError, Kind};

const FORMATS: &str = "\
File formats (prices are integers in 1e-4 USD, timestamps integer ns since midnight):

  *.events      optional header `#DISLOC-EVENTS v1 date=YYYY-MM-DD symbols=N`, then one event per line:
                  Q,<ts_ns>,<symbol>,<source>,<bid>,<bid_shares>,<offer>,<offer_shares>
                  T,<ts_ns>,<symbol>,SIP,<price>,<shares>
                source is SIP or an exchange id; a price of 0 means the side is absent.
                Each file must be sorted by timestamp.
  symbols.csv   ticker,market_cap,sector,category   (category: DOW SPEXDOW REXSP ETF OTHER)
  segments*.csv symbol,side,ordering,start_ns,end_ns,duration_ns,min_mag_1e-4usd,max_mag_1e-4usd,truncated
  roc_records.csv  one row per SIP trade with its side, signed ROC and inclusion flags
  purse.csv     per key (symbol or category) and date: trades, traded value, differing trades,
                ROC total / SIP / direct (exact 1e-4 USD), ROC per share
  MANIFEST.sha256  sha256sum-style checksums of every artifact a command wrote

Errors are printed as one line, `error code=<n> kind=<kind> [file=<path>] [line=<n>] message=<text>`.
Exit codes: 0 ok, 2 usage error or missing input, 3 malformed input, 4 internal error or unwritable output.";

#[derive(Debug, Parser)]
#[command(name = "disloc", version, about = "Quote dislocations between SIP and direct feeds", after_long_help = FORMATS)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the market simulator and write per-day event files with ground truth.
    Simulate(simulate::SimulateArgs),
    /// Find dislocation segments in event files.
    Detect(detect::DetectArgs),
    /// Per-trade realized opportunity cost and per-symbol purse statistics.
    Roc(SessionArgs),
    /// Histograms, series statistics, regressions and rankings.
    Analyze(analyze::AnalyzeArgs),
    /// The ten-line ROC summary over purse rows.
    Report(report::ReportArgs),
    /// Replay the two-exchange example and check its single segment.
    Figure2,
}

/// Inputs shared by `detect` and `roc`.
#[derive(Debug, Clone, Args)]
pub struct SessionArgs {
    /// Event files, a day directory, or a `simulate` output root (one session per day).
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Output directory.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Symbol-level worker threads; output does not depend on it.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Close open segments here instead of at the last event.
    #[arg(long)]
    pub session_end_ns: Option<u64>,
    /// Session date for files without a header.
    #[arg(long)]
    pub date: Option<NaiveDate>,
}

/// Intraday session window used by time-of-day statistics.
#[derive(Debug, Clone, Copy, Args)]
pub struct SessionWindow {
    #[arg(long, default_value_t = DEFAULT_OPEN_NS)]
    pub session_open_ns: u64,
    #[arg(long, default_value_t = DEFAULT_SESSION_NS)]
    pub session_length_ns: u64,
}

impl SessionWindow {
    fn validate(&self) -> Result<(), CliError> {
        if self.session_length_ns == 0 || self.session_open_ns + self.session_length_ns > NANOS_PER_DAY {
            return Err(CliError::new(Kind::Usage, "session window must be non-empty and end before midnight"));
        }
        Ok(())
    }
}

pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => simulate::run(&a, stdout),
        Command::Detect(a) => detect::run(&a, stdout),
        Command::Roc(a) => detect::run_roc(&a, stdout),
        Command::Analyze(a) => analyze::run(&a, stdout),
        Command::Report(a) => report::run(&a, stdout),
        Command::Figure2 => figure2::run(stdout),
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", CliError::new(Kind::Usage, first));
            return Kind::Usage.exit_code();
        }
    };
    let mut out = std::io::stdout().lock();
    match execute(cli, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = out.flush();
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
