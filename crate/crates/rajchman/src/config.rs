//! Run configuration. The CLI parses into the same type that config files
//! deserialize into, so a report can embed exactly what produced it.

use std::path::PathBuf;

use clap::{Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionArg {
    Auto,
    In,
    NotIn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    /// Columns over `xi`.
    Xi,
    /// Columns over `gamma = ln xi`, values `phi = -ln f`.
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Geometric,
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Subcommand)]
#[serde(tag = "subcommand", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    /// Verdict for a decay expression.
    Classify {
        #[arg(long)]
        expr: String,
    },
    /// Gamma_h profile and the zero/non-sigma-finite dichotomy.
    Gauge {
        #[arg(long)]
        h: String,
        #[arg(long, default_value_t = 0.5)]
        r_max: f64,
        #[arg(long, default_value_t = 241)]
        radii: usize,
        /// CSV file for the (r, gamma, argmin_s) profile.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Level-by-level construction for an admissible decay.
    Build {
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 2)]
        levels: u32,
        #[arg(long, default_value_t = 1e4)]
        grid_max: f64,
        #[arg(long, default_value_t = 2000)]
        m_cap: u64,
        /// Skip the classifier gate.
        #[arg(long)]
        assert_admissible: bool,
        /// Directory for manifest.json and spectrum.json.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Recheck a persisted build.
    Verify {
        #[arg(long)]
        manifest: PathBuf,
        /// Defaults to the spectrum named in the manifest, next to it.
        #[arg(long)]
        spectrum: Option<PathBuf>,
    },
    /// Product of two persisted spectra.
    Multiply {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tau_trunc: f64,
        /// Defaults to the sum of the input bands, capped at 2^22.
        #[arg(long)]
        n_max: Option<i64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gap certificate in either direction.
    Certify {
        #[arg(long)]
        target: String,
        #[arg(long, value_enum, default_value_t = DirectionArg::Auto)]
        direction: DirectionArg,
        #[arg(long, default_value_t = 1.0)]
        period: f64,
        /// Levels of the base measure for the in-direction.
        #[arg(long, default_value_t = 2)]
        levels: u32,
        #[arg(long, default_value_t = 1e4)]
        grid_max: f64,
        /// Directory for certificate.json and the residual series.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// CSV series of a decay and comparison functions.
    EmitPlot {
        #[arg(long)]
        expr: String,
        /// Comma-separated expressions; steptower defaults to its two envelopes.
        #[arg(long)]
        with: Option<String>,
        #[arg(long, value_enum)]
        domain: Option<Domain>,
        #[arg(long, value_enum)]
        spacing: Option<Spacing>,
        #[arg(long)]
        min: Option<f64>,
        #[arg(long)]
        max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        /// Manifest whose measure modulus is added as a column.
        #[arg(long)]
        measure: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify { .. } => "classify",
            Command::Gauge { .. } => "gauge",
            Command::Build { .. } => "build",
            Command::Verify { .. } => "verify",
            Command::Multiply { .. } => "multiply",
            Command::Certify { .. } => "certify",
            Command::EmitPlot { .. } => "emit-plot",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
}

impl RunConfig {
    pub fn parse_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::invalid("config", e.to_string()))
    }
}
