//! `stylo` — parse-tree authorship analysis from the command line.
//!
//! Three subcommands cover the pipeline: `extract` turns a corpus manifest
//! into per-document feature-count artifacts plus an author summary,
//! `classify` runs the full vocabulary/projection/leave-one-out sweep and
//! writes CSV+JSON report tables, and `pcfg` scores, disambiguates, or
//! samples parse trees under a probabilistic grammar.

mod classify;
mod extract;
mod manifest;
mod pcfg_cmd;
mod report;

use clap::{Parser, Subcommand};
use stylo_core::reducer::ReducerError;

#[derive(Parser)]
#[command(name = "stylo", version, about = "Authorship analysis over constituency parse trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract feature counts per document and summarize authors.
    Extract(extract::ExtractArgs),
    /// Build the term-by-document matrix and report leave-one-out errors.
    Classify(classify::ClassifyArgs),
    /// Score, compare, or sample parse trees under a PCFG.
    #[command(subcommand)]
    Pcfg(pcfg_cmd::PcfgCommand),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Usage problems are input errors (exit 1); --help/--version
            // output exits 0.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    let result = match cli.command {
        Command::Extract(args) => extract::run(args),
        Command::Classify(args) => classify::run(args),
        Command::Pcfg(cmd) => pcfg_cmd::run(cmd),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        let numerical = err
            .chain()
            .any(|cause| cause.downcast_ref::<ReducerError>().is_some());
        std::process::exit(if numerical { 2 } else { 1 });
    }
}
