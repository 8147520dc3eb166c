mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Owicki-Gries style checker and explicit-state oracle for labelled multiprograms.
#[derive(Parser, Debug)]
#[command(name = "ogp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Discharge the annotation and every declared property with the proof rules.
    Check {
        files: Vec<PathBuf>,
        #[command(flatten)]
        opts: Opts,
    },
    /// Decide the annotation and every declared property by state-space exploration.
    Oracle {
        files: Vec<PathBuf>,
        #[command(flatten)]
        opts: Opts,
        /// Also compare against the interpreter without program counters.
        #[arg(long)]
        raw: bool,
    },
    /// Print the program with labels and counter assignments made explicit.
    Instrument { file: PathBuf },
    /// List proof obligations with their formulas.
    Obligations {
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
        /// Re-check the single obligation with this id.
        #[arg(long)]
        id: Option<String>,
    },
    /// Split a coarse-grained conjunctive guard and compare the two programs.
    Transform {
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
        /// Label of the statement to split, e.g. `A.1`.
        #[arg(long)]
        split: String,
        /// Conjunct of the guard to wait for first.
        #[arg(long)]
        hoist: String,
        /// Local label id for the inserted statement.
        #[arg(long)]
        fresh: Option<String>,
        /// Skip the oracle comparison of the two programs.
        #[arg(long)]
        no_compare: bool,
    },
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// Reachable-state cap for the oracle.
    #[arg(long, env = "OGP_MAX_STATES", default_value_t = ogp_core::oracle::DEFAULT_STATE_CAP, value_parser = positive)]
    max_states: usize,
    /// Valuation cap for deciding a single obligation.
    #[arg(long, default_value_t = 1 << 24, value_parser = positive_u64)]
    max_valuations: u64,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Restrict to one declared property.
    #[arg(long)]
    property: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Human,
    Machine,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn positive_u64(s: &str) -> Result<u64, String> {
    positive(s).map(|n| n as u64)
}

/// Process exit status; higher-priority outcomes win when files disagree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok,
    Failed,
    Cap,
    Input,
}

impl Status {
    fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Failed => 1,
            Status::Input => 2,
            Status::Cap => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = match &cli.command {
        Command::Check { opts, .. }
        | Command::Oracle { opts, .. }
        | Command::Obligations { opts, .. }
        | Command::Transform { opts, .. } => opts.format,
        Command::Instrument { .. } => Format::Human,
    };
    let mut out = render::Sink::new(format);
    let status = match cli.command {
        Command::Check { files, opts } => commands::each(&files, &mut out, &opts, commands::check),
        Command::Oracle { files, opts, raw } => {
            commands::each(&files, &mut out, &opts, |f, o, opts| commands::oracle(f, o, opts, raw))
        }
        Command::Instrument { file } => commands::instrument(&file, &mut out),
        Command::Obligations { file, opts, id } => commands::obligations(&file, &mut out, &opts, id.as_deref()),
        Command::Transform { file, opts, split, hoist, fresh, no_compare } => {
            let req = commands::TransformArgs { split, hoist, fresh, compare: !no_compare };
            commands::transform(&file, &mut out, &opts, &req)
        }
    };
    out.flush();
    ExitCode::from(status.code())
}
