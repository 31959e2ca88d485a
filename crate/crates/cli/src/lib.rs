//! File formats and subcommand handlers behind the `dlmscale` binary.

use std::path::PathBuf;

use clap::Args;

pub mod coeffs;
pub mod commands;
pub mod io;
pub mod output;

use output::Format;

/// Output flags shared by table-producing commands.
#[derive(Args, Debug, Clone)]
pub struct OutArgs {
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

/// Raised when a solver stops without meeting its own criteria.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct NotConverged(pub String);

/// 2 for solver failures, 1 for everything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<NotConverged>().is_some() {
        return 2;
    }
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<dlmscale::Error>() {
            use dlmscale::Error::*;
            return match e {
                RaiseUpperBound { .. } | FitDiverged { .. } | NoValley { .. } | Numerical(_) => 2,
                _ => 1,
            };
        }
    }
    1
}
