//! Command-line front end for `featimp`: scores, axiom audits, separable
//! partitions and demos. Every subcommand is a thin wrapper over the
//! library; this crate only parses arguments, reads files and renders.

pub mod commands;
mod render;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use featimp::ScoreMethod;

/// Exit code for an audit violation under `--fail-on-violation`.
pub const EXIT_VIOLATION: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "featimp", version, about = "Exact feature-importance scores and axiom audits over value tables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Score every feature of a value table, sample space or CSV dataset.
    Scores {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataOpts,
    },
    /// Run every applicable axiom checker.
    Audit {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataOpts,
        /// Exit with status 3 if any check fails.
        #[arg(long)]
        fail_on_violation: bool,
        /// Claimed global table for the value-consistency check (sample-space inputs).
        #[arg(long, value_name = "TABLE")]
        global: Option<PathBuf>,
    },
    /// Compute the maximal separable partition.
    Partition {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: DataOpts,
        /// Cross-check against the exhaustive oracle (n ≤ 12).
        #[arg(long)]
        with_oracle: bool,
        /// Write the partition file here.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Turn a CSV dataset into a value table file.
    EvalDataset {
        csv: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long, value_name = "NAME")]
        weight_col: Option<String>,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        output: Format,
    },
    /// Reproduce one of the worked examples.
    Demo {
        #[arg(value_enum)]
        scenario: Scenario,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        output: Format,
        #[command(flatten)]
        collider: ColliderOpts,
    },
}

#[derive(Args, Debug)]
pub struct Common {
    /// Score method; repeat for several. Defaults to all four.
    #[arg(long = "method", value_name = "METHOD")]
    pub methods: Vec<ScoreMethod>,
    #[arg(long, default_value_t = featimp::subset::Tolerance::DEFAULT)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub output: Format,
}

#[derive(Args, Debug)]
pub struct DataOpts {
    /// Target column; marks the input as CSV.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long, value_name = "NAME")]
    pub weight_col: Option<String>,
}

#[derive(Args, Debug)]
pub struct ColliderOpts {
    #[arg(long)]
    pub p_smoke: Option<f64>,
    #[arg(long)]
    pub p_earache: Option<f64>,
    /// P(gum | no smoking, no earache).
    #[arg(long)]
    pub p_gum_00: Option<f64>,
    #[arg(long)]
    pub p_gum_01: Option<f64>,
    #[arg(long)]
    pub p_gum_10: Option<f64>,
    #[arg(long)]
    pub p_gum_11: Option<f64>,
    /// P(cancer | no smoking).
    #[arg(long)]
    pub p_cancer_0: Option<f64>,
    #[arg(long)]
    pub p_cancer_1: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Markdown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    MciNonlinearity,
    TwinFeatures,
    Collider,
    ToySeparable,
}
