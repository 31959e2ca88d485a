//! `dlmscale` command-line front end.

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dlmscale_cli::{commands, exit_code};

#[derive(Parser, Debug)]
#[command(name = "dlmscale", version, about = "Scaling-law fitting, compute allocation and discrete-diffusion loss tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a run log and write it back with epochs and FLOPs filled in.
    Ingest(commands::IngestArgs),
    /// Gaussian-smooth loss curves.
    Smooth(commands::SmoothArgs),
    /// Transformer parameter count.
    Params(commands::ParamsArgs),
    /// IsoFLOP parabolas and the compute-optimal frontier.
    Isoflop(commands::IsoflopArgs),
    /// Fit a loss law to a run log.
    Fit(commands::FitArgs),
    /// Compute and data allocation.
    #[command(subcommand)]
    Allocate(AllocateCommand),
    /// Discrete-diffusion utilities.
    #[command(subcommand)]
    Diffuse(DiffuseCommand),
    /// Synthetic run log drawn from a law with log-normal noise.
    Synth(commands::SynthArgs),
    /// Print a built-in coefficient set, or list them.
    Coeffs(commands::CoeffsArgs),
}

#[derive(Subcommand, Debug)]
enum AllocateCommand {
    /// Compute-optimal N and D for a FLOP budget.
    Compute(commands::AllocComputeArgs),
    /// Loss-minimizing epoch count for fixed model size and unique data.
    Epochs(commands::AllocEpochsArgs),
    /// Jointly optimal model size and epochs for fixed unique data.
    Joint(commands::AllocJointArgs),
    /// Budgets and tokens at which given model sizes are compute-optimal.
    Table(commands::AllocTableArgs),
    /// Loss over a log-spaced (N, epochs) grid.
    Contour(commands::AllocContourArgs),
}

#[derive(Subcommand, Debug)]
enum DiffuseCommand {
    /// Corrupt random or given sequences with the forward process.
    Corrupt(commands::CorruptArgs),
    /// Monte Carlo training loss of a simple predictor on a corpus.
    Loss(commands::DiffLossArgs),
    /// Tabulate a noise schedule.
    Schedule(commands::ScheduleArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Smooth(a) => commands::smooth(a),
        Command::Params(a) => commands::params(a),
        Command::Isoflop(a) => commands::isoflop(a),
        Command::Fit(a) => commands::fit(a),
        Command::Allocate(c) => match c {
            AllocateCommand::Compute(a) => commands::alloc_compute(a),
            AllocateCommand::Epochs(a) => commands::alloc_epochs(a),
            AllocateCommand::Joint(a) => commands::alloc_joint(a),
            AllocateCommand::Table(a) => commands::alloc_table(a),
            AllocateCommand::Contour(a) => commands::alloc_contour(a),
        },
        Command::Diffuse(c) => match c {
            DiffuseCommand::Corrupt(a) => commands::diffuse_corrupt(a),
            DiffuseCommand::Loss(a) => commands::diffuse_loss(a),
            DiffuseCommand::Schedule(a) => commands::diffuse_schedule(a),
        },
        Command::Synth(a) => commands::synth(a),
        Command::Coeffs(a) => commands::coeffs(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

}
