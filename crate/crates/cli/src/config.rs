//! Experiment configuration: one strict schema shared by the command line and
//! `run --config file.json`.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    LacunarySine,
    LacunaryPoly,
    Rudin2d,
    Iid,
    Exponential,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct BasisParams {
    #[arg(long, value_enum)]
    pub kind: BasisKind,
    /// Number of elements (ignored for `exponential`, which uses `--seq`).
    #[arg(long)]
    #[serde(default)]
    pub m: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub base: Option<u64>,
    #[arg(long)]
    #[serde(default)]
    pub grid: Option<usize>,
    /// Trigonometric polynomial coefficients, `re` or `re:im`, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub alpha: Vec<String>,
    /// Dilation factor for `lacunary-poly`.
    #[arg(long)]
    #[serde(default)]
    pub a: Option<u64>,
    /// Integer sequence for `rudin-2d` and `exponential`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default)]
    pub seq: Vec<i64>,
    /// Support points `re:im:prob`, comma separated; `prob` may be a fraction `p/q`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default)]
    pub support: Vec<String>,
    /// Skip the moment and non-unimodularity checks of `iid`.
    #[arg(long)]
    #[serde(default)]
    pub unchecked: bool,
    /// View a real family as spanning a complex subspace.
    #[arg(long)]
    #[serde(default)]
    pub complexify: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct CheckParams {
    #[arg(long)]
    pub basis: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
    /// Orthogonality tolerance.
    #[arg(long, default_value_t = spr_lab::hypotheses::DEFAULT_ORTHOGONALITY_TOL)]
    #[serde(default = "default_orth_tol")]
    pub tol: f64,
}

fn default_orth_tol() -> f64 {
    spr_lab::hypotheses::DEFAULT_ORTHOGONALITY_TOL
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SidonMethod {
    Greedy,
    Singer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct SidonParams {
    #[arg(long)]
    pub h: u32,
    #[arg(long, default_value_t = 50)]
    #[serde(default = "default_count")]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = SidonMethod::Greedy)]
    #[serde(default = "default_method")]
    pub method: SidonMethod,
    /// Prime power for the perfect difference set.
    #[arg(long)]
    #[serde(default)]
    pub q: Option<u64>,
    /// Largest candidate examined by the greedy search.
    #[arg(long, default_value_t = 1 << 40)]
    #[serde(default = "default_limit")]
    pub limit: u64,
    /// Number of log-spaced density checkpoints.
    #[arg(long, default_value_t = 32)]
    #[serde(default = "default_checkpoints")]
    pub checkpoints: usize,
    #[arg(long)]
    pub out: PathBuf,
}

fn default_count() -> usize {
    50
}
fn default_method() -> SidonMethod {
    SidonMethod::Greedy
}
fn default_limit() -> u64 {
    1 << 40
}
fn default_checkpoints() -> usize {
    32
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RetrieveParams {
    #[arg(long)]
    pub basis: PathBuf,
    #[arg(long)]
    pub modulus: PathBuf,
    #[arg(long, default_value_t = spr_lab::retrieval::DEFAULT_TOL)]
    #[serde(default = "default_retrieval_tol")]
    pub tol: f64,
    #[arg(long)]
    pub out: PathBuf,
}

fn default_retrieval_tol() -> f64 {
    spr_lab::retrieval::DEFAULT_TOL
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct StabilityParams {
    #[arg(long)]
    pub basis: PathBuf,
    #[arg(long, default_value_t = 4.0)]
    #[serde(default = "default_p")]
    pub p: f64,
    #[arg(long, default_value_t = 1000)]
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Hill-climbing budget `RESTARTSxSTEPS`, e.g. `32x200`.
    #[arg(long)]
    #[serde(default)]
    pub adversarial: Option<String>,
    /// Number of points in the Hölder exponent fit.
    #[arg(long)]
    #[serde(default)]
    pub holder_trials: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

fn default_p() -> f64 {
    4.0
}
fn default_trials() -> usize {
    1000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct IdentityParams {
    #[arg(long)]
    pub basis: PathBuf,
    #[arg(long, default_value_t = 1000)]
    #[serde(default = "default_trials")]
    pub pairs: usize,
    #[arg(long)]
    #[serde(default)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum ExampleTarget {
    #[serde(rename = "example1")]
    #[value(name = "example1")]
    Example1,
    #[serde(rename = "example2")]
    #[value(name = "example2")]
    Example2,
    #[serde(rename = "example3")]
    #[value(name = "example3")]
    Example3,
    #[serde(rename = "example4")]
    #[value(name = "example4")]
    Example4,
    #[serde(rename = "example5")]
    #[value(name = "example5")]
    Example5,
    #[serde(rename = "example6")]
    #[value(name = "example6")]
    Example6,
    #[serde(rename = "prop1")]
    #[value(name = "prop1")]
    Prop1,
    #[serde(rename = "prop1B")]
    #[value(name = "prop1B")]
    Prop1B,
    #[serde(rename = "cor-L6")]
    #[value(name = "cor-L6")]
    CorL6,
    #[serde(rename = "counterexample-rademacher")]
    #[value(name = "counterexample-rademacher")]
    CounterexampleRademacher,
    #[serde(rename = "counterexample-base3")]
    #[value(name = "counterexample-base3")]
    CounterexampleBase3,
    #[serde(rename = "counterexample-complex-conjugate")]
    #[value(name = "counterexample-complex-conjugate")]
    CounterexampleComplexConjugate,
}

impl ExampleTarget {
    pub fn name(self) -> &'static str {
        match self {
            ExampleTarget::Example1 => "example1",
            ExampleTarget::Example2 => "example2",
            ExampleTarget::Example3 => "example3",
            ExampleTarget::Example4 => "example4",
            ExampleTarget::Example5 => "example5",
            ExampleTarget::Example6 => "example6",
            ExampleTarget::Prop1 => "prop1",
            ExampleTarget::Prop1B => "prop1B",
            ExampleTarget::CorL6 => "cor-L6",
            ExampleTarget::CounterexampleRademacher => "counterexample-rademacher",
            ExampleTarget::CounterexampleBase3 => "counterexample-base3",
            ExampleTarget::CounterexampleComplexConjugate => "counterexample-complex-conjugate",
        }
    }

    pub fn is_randomized(self) -> bool {
        !matches!(
            self,
            ExampleTarget::CounterexampleRademacher
                | ExampleTarget::CounterexampleBase3
                | ExampleTarget::CounterexampleComplexConjugate
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ReproduceParams {
    #[arg(value_enum)]
    pub target: ExampleTarget,
    #[arg(long)]
    #[serde(default)]
    pub m: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub grid: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub seed: Option<u64>,
    /// Random pairs per randomized check.
    #[arg(long)]
    #[serde(default)]
    pub trials: Option<usize>,
    /// Report path; standard output when absent.
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Basis(BasisParams),
    Check(CheckParams),
    Sidon(SidonParams),
    Retrieve(RetrieveParams),
    Stability(StabilityParams),
    Identity(IdentityParams),
    ReproduceExample(ReproduceParams),
}

impl ExperimentConfig {
    pub fn command_name(&self) -> &'static str {
        match self {
            ExperimentConfig::Basis(_) => "basis",
            ExperimentConfig::Check(_) => "check",
            ExperimentConfig::Sidon(_) => "sidon",
            ExperimentConfig::Retrieve(_) => "retrieve",
            ExperimentConfig::Stability(_) => "stability",
            ExperimentConfig::Identity(_) => "identity",
            ExperimentConfig::ReproduceExample(_) => "reproduce-example",
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| CliError::config(format!("invalid config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Randomized commands must carry a seed.
    pub fn validate(&self) -> Result<(), CliError> {
        let needs_seed = match self {
            ExperimentConfig::Stability(p) => p.seed.is_none(),
            ExperimentConfig::Identity(p) => p.seed.is_none(),
            ExperimentConfig::ReproduceExample(p) => p.target.is_randomized() && p.seed.is_none(),
            _ => false,
        };
        if needs_seed {
            return Err(CliError::config(format!(
                "command '{}' is randomized and requires a seed",
                self.command_name()
            )));
        }
        Ok(())
    }
}
