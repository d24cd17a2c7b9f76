//! Null probability of a tricluster pattern, the binomial-tail p-value,
//! the variable-span correction and the minimum-observation solver.
//!
//! Everything is computed in natural-log space. Pattern probabilities are
//! kept raw: under dependent or temporal context models they are expected
//! placement counts and may exceed 1, in which case the tricluster is not
//! assessable and its p-values are 1.

mod assess;
mod null;
mod prob;
mod tail;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{Pattern, Tensor3};

pub use assess::{assess, assess_one, AssessConfig, SuccessCount};
pub use null::{EmpiricalNull, NullModel, UniformNull};
pub use prob::{pattern_prob, Factor, PatternProbability, SliceTerm};
pub use tail::{
    binomial_tail, log_binomial, min_observations, span_correction, span_factor, TailBound,
};

/// Relationship assumed among the variables of a slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarDependency {
    /// Mutually independent: slice probability is a product of marginals.
    #[serde(rename = "mi")]
    Independent,
    /// Mutually dependent: slice probability is a joint frequency.
    #[serde(rename = "md")]
    Dependent,
}

/// Relationship assumed among the contexts of a tricluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ContextModel {
    /// Contexts are distinct populations, estimated slice by slice.
    #[serde(rename = "mi")]
    Independent,
    /// Contexts are exchangeable; the pattern could sit on any `|K|`-subset.
    #[serde(rename = "md")]
    Dependent,
    /// Ordered time points with a stationary first-order Markov chain; the
    /// pattern could start at any of the `|Z| - |K| + 1` positions.
    #[serde(rename = "tc")]
    Temporal,
}

impl FromStr for VarDependency {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mi" | "independent" => Ok(Self::Independent),
            "md" | "dependent" => Ok(Self::Dependent),
            _ => Err(Error::InvalidArgument(format!(
                "unknown variable dependency `{s}`"
            ))),
        }
    }
}

impl FromStr for ContextModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mi" | "independent" => Ok(Self::Independent),
            "md" | "dependent" => Ok(Self::Dependent),
            "tc" | "temporal" => Ok(Self::Temporal),
            _ => Err(Error::InvalidArgument(format!(
                "unknown context model `{s}`"
            ))),
        }
    }
}

impl fmt::Display for VarDependency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Independent => "mi",
            Self::Dependent => "md",
        })
    }
}

impl fmt::Display for ContextModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Independent => "mi",
            Self::Dependent => "md",
            Self::Temporal => "tc",
        })
    }
}

/// Null-model assumptions used to score a tricluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionProfile {
    pub var_dep: VarDependency,
    pub ctx_model: ContextModel,
    /// Variables share one distribution, so the pattern could have spanned
    /// any `|J|` of them; enables the span correction.
    pub identically_distributed: bool,
    /// Additive pseudo-count applied to every frequency.
    pub smoothing: f64,
}

impl AssumptionProfile {
    pub fn new(var_dep: VarDependency, ctx_model: ContextModel) -> Self {
        Self {
            var_dep,
            ctx_model,
            identically_distributed: false,
            smoothing: 0.0,
        }
    }

    pub fn with_span_correction(mut self, on: bool) -> Self {
        self.identically_distributed = on;
        self
    }

    pub fn with_smoothing(mut self, smoothing: f64) -> Self {
        self.smoothing = smoothing;
        self
    }

    /// Every variable-dependency and context-model combination.
    pub fn all() -> Vec<Self> {
        [VarDependency::Independent, VarDependency::Dependent]
            .into_iter()
            .flat_map(|v| {
                [
                    ContextModel::Independent,
                    ContextModel::Dependent,
                    ContextModel::Temporal,
                ]
                .into_iter()
                .map(move |c| Self::new(v, c))
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.smoothing.is_finite() && self.smoothing >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "smoothing must be >= 0, got {}",
                self.smoothing
            )));
        }
        Ok(())
    }

    /// Checks the profile against a tensor: the temporal model needs an
    /// ordered context axis and every variable must be ordinal.
    pub fn validate_for(&self, t: &Tensor3) -> Result<()> {
        self.validate()?;
        if self.ctx_model == ContextModel::Temporal && !t.is_temporal() {
            return Err(Error::UnsupportedProfile(
                "the temporal context model needs a tensor with a temporal context axis".into(),
            ));
        }
        if let Some(j) = (0..t.n_vars()).find(|&j| !t.domain(j).is_ordinal()) {
            return Err(Error::NotOrdinal(j));
        }
        Ok(())
    }
}

impl fmt::Display for AssumptionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} vars / {} ctx", self.var_dep, self.ctx_model)
    }
}

/// Non-fatal observations made while assessing a tricluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// Some `(j, k)` blocks were not constant across `I`; the modal value
    /// was used.
    NonConstantCell { cells: Vec<(usize, usize)> },
    /// A factor had empirical probability 0.
    ZeroProbability,
    /// Single-category variables dropped from `J`.
    ExcludedDegenerate { vars: Vec<usize> },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::NonConstantCell { cells } => write!(f, "{} non-constant cell(s)", cells.len()),
            Warning::ZeroProbability => f.write_str("zero-probability factor"),
            Warning::ExcludedDegenerate { vars } => {
                write!(f, "excluded degenerate variable(s) {vars:?}")
            }
        }
    }
}

/// Significance of one tricluster.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignificanceResult {
    /// `|I|`, `|J|` (after dropping degenerate variables) and `|K|`.
    pub n_obs: usize,
    pub n_vars: usize,
    pub n_ctx: usize,
    /// Successes fed to the binomial test.
    pub successes: u64,
    pub pattern: Pattern,
    pub probability: PatternProbability,
    /// `ln p`, unclamped.
    pub log_p_pattern: f64,
    /// `min(p, 1)`.
    pub p_pattern_clamped: f64,
    /// `ln` of the binomial upper tail.
    pub log_pvalue_raw: f64,
    /// `ln` of the span-corrected p-value; equal to the raw one when the
    /// correction is off.
    pub log_pvalue_span: f64,
    pub span_applied: bool,
    /// False when `p >= 1`.
    pub assessable: bool,
    pub warnings: Vec<Warning>,
}

impl SignificanceResult {
    pub fn pvalue_raw(&self) -> f64 {
        self.log_pvalue_raw.exp()
    }

    pub fn pvalue_span(&self) -> f64 {
        self.log_pvalue_span.exp()
    }

    /// The p-value that multiple-testing control should use.
    pub fn log_pvalue(&self) -> f64 {
        self.log_pvalue_span
    }
}
