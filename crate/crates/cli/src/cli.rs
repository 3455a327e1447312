//! Argument definitions. The parsed [`Cli`] doubles as the run
//! configuration embedded in every report.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[command(
    name = "pullback-heights",
    version,
    about = "Constants and point counts for pullbacks of heights by morphisms of projective space"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct GlobalOpts {
    /// Seed of every Monte Carlo estimate.
    #[arg(long, global = true, default_value_t = 0x5EED)]
    pub seed: u64,
    /// Monte Carlo sample count.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub mc_samples: u64,
    /// Absolute tolerance of the one-dimensional quadrature.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub quad_tol: f64,
    /// Iterations of the Green's function and canonical heights.
    #[arg(long, global = true, default_value_t = 60)]
    pub green_iters: u32,
    /// Cap on residue classes visited per prime.
    #[arg(long, global = true, default_value_t = 10_000_000)]
    pub class_cap: u64,
    /// Largest iterate in dynamical sequences.
    #[arg(long, global = true, default_value_t = 5)]
    pub max_k: u32,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Re-run the configuration embedded in a report (JSON or CSV).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Pullback,
    Image,
    Canonical,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdArg {
    Normalized,
    Canonical,
}

/// A morphism is builder shorthand (`power:m,d`, `identity:m`,
/// `chebyshev:d`, `rat:P|Q`), inline JSON, or a path to a JSON file.
#[derive(Subcommand, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Decide whether the lift defines a morphism and list its bad primes.
    Check { morphism: String },
    /// Sylvester-Macaulay data and the resultant ideal.
    Resultant { morphism: String },
    /// Local density table at a prime.
    Density {
        #[arg(long)]
        prime: u64,
        morphism: String,
    },
    /// Exact local factor and mu at a prime.
    LocalFactor {
        #[arg(long)]
        prime: u64,
        morphism: String,
    },
    /// Volume of the archimedean fundamental domain.
    ArchVolume { morphism: String },
    /// The constant c_Q(f) with every factor and the error constants.
    Constant { morphism: String },
    /// The sequence c_Q(f^i o g) and its limit.
    Chat {
        morphism: String,
        /// Inner morphism g; defaults to the identity.
        #[arg(long)]
        g: Option<String>,
        #[arg(long, default_value_t = 3)]
        k: u32,
        #[arg(long, value_enum, default_value = "normalized")]
        threshold: ThresholdArg,
        /// Exact iterates used for a canonical threshold.
        #[arg(long, default_value_t = 4)]
        threshold_iters: u32,
    },
    /// Canonical height of a point, such as `3,1`.
    Canonical {
        morphism: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Point counts against the predicted main term, as CSV.
    Count {
        morphism: String,
        #[arg(long, value_enum, default_value = "pullback")]
        mode: Mode,
        /// Height bounds, comma separated.
        #[arg(long = "X", value_delimiter = ',', required = true)]
        x: Vec<f64>,
        /// Number of mapping symmetries, for image-count predictions.
        #[arg(long)]
        gamma: Option<u64>,
    },
    /// Check, constant, and for endomorphisms the dynamical limit.
    Report {
        morphism: String,
        #[arg(long, default_value_t = 2)]
        k: u32,
    },
}

impl Command {
    pub fn default_format(&self) -> Format {
        match self {
            Command::Count { .. } => Format::Csv,
            _ => Format::Json,
        }
    }
}
