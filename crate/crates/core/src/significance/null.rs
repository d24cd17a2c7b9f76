use crate::error::{Error, Result};
use crate::estimation::{
    estimate_marginals, estimate_transitions, joint_prob, joint_transition, Frequency,
    MarginalTable, Scope, TransitionEstimate, TransitionTable,
};
use crate::tensor::{Category, Tensor3};

use super::{AssumptionProfile, ContextModel};

/// Source of null probabilities for slice patterns and slice-to-slice steps.
pub trait NullModel: Sync {
    fn n_ctx(&self) -> usize;

    fn is_temporal(&self) -> bool;

    /// Probability that one observation shows every `(j, c)` in context
    /// `ctx`, or in an arbitrary context when `ctx` is `None`.
    fn slice(&self, items: &[(usize, Category)], ctx: Option<usize>) -> Result<Frequency>;

    /// Stationary step of the variables in `vars` from `prev` to `next`.
    fn transition(
        &self,
        vars: &[usize],
        prev: &[Category],
        next: &[Category],
    ) -> Result<TransitionEstimate>;
}

/// Null model estimated from the tensor itself. Single-variable queries are
/// answered from precomputed tables, multi-variable ones by scanning.
#[derive(Debug, Clone)]
pub struct EmpiricalNull<'a> {
    tensor: &'a Tensor3,
    smoothing: f64,
    per_context: Option<MarginalTable>,
    pooled: MarginalTable,
    transitions: Option<TransitionTable>,
}

impl<'a> EmpiricalNull<'a> {
    /// Builds the tables the profile needs.
    pub fn fit(tensor: &'a Tensor3, profile: &AssumptionProfile) -> Result<Self> {
        profile.validate_for(tensor)?;
        let per_context = match profile.ctx_model {
            ContextModel::Independent => Some(estimate_marginals(
                tensor,
                Scope::PerContext,
                profile.smoothing,
            )?),
            _ => None,
        };
        let transitions = match profile.ctx_model {
            ContextModel::Temporal if tensor.n_ctx() >= 2 => {
                Some(estimate_transitions(tensor, profile.smoothing)?)
            }
            _ => None,
        };
        Ok(Self {
            tensor,
            smoothing: profile.smoothing,
            per_context,
            pooled: estimate_marginals(tensor, Scope::Pooled, profile.smoothing)?,
            transitions,
        })
    }

    pub fn tensor(&self) -> &Tensor3 {
        self.tensor
    }

    pub fn per_context(&self) -> Option<&MarginalTable> {
        self.per_context.as_ref()
    }

    pub fn pooled(&self) -> &MarginalTable {
        &self.pooled
    }

    pub fn transitions(&self) -> Option<&TransitionTable> {
        self.transitions.as_ref()
    }
}

impl NullModel for EmpiricalNull<'_> {
    fn n_ctx(&self) -> usize {
        self.tensor.n_ctx()
    }

    fn is_temporal(&self) -> bool {
        self.tensor.is_temporal()
    }

    fn slice(&self, items: &[(usize, Category)], ctx: Option<usize>) -> Result<Frequency> {
        match (items, ctx) {
            (&[(j, c)], None) => self.pooled.frequency(j, None, c),
            (&[(j, c)], Some(k)) => match &self.per_context {
                Some(table) => table.frequency(j, Some(k), c),
                None => joint_prob(self.tensor, items, ctx, self.smoothing),
            },
            _ => joint_prob(self.tensor, items, ctx, self.smoothing),
        }
    }

    fn transition(
        &self,
        vars: &[usize],
        prev: &[Category],
        next: &[Category],
    ) -> Result<TransitionEstimate> {
        match (&self.transitions, vars) {
            (Some(table), &[j]) => table.estimate(j, prev[0], next[0]),
            _ => joint_transition(self.tensor, vars, prev, next, self.smoothing),
        }
    }
}

/// Theoretical null: every variable uniform over its categories,
/// independent of other variables and of context.
#[derive(Debug, Clone)]
pub struct UniformNull {
    cardinalities: Vec<usize>,
    n_ctx: usize,
}

impl UniformNull {
    pub fn new(cardinalities: Vec<usize>, n_ctx: usize) -> Result<Self> {
        if cardinalities.contains(&0) || n_ctx == 0 {
            return Err(Error::InvalidArgument(
                "cardinalities and context count must be positive".into(),
            ));
        }
        Ok(Self {
            cardinalities,
            n_ctx,
        })
    }

    /// `n_vars` identically distributed variables of cardinality `card`.
    pub fn identical(n_vars: usize, card: usize, n_ctx: usize) -> Result<Self> {
        Self::new(vec![card; n_vars], n_ctx)
    }

    fn outcomes(&self, vars: impl Iterator<Item = usize>) -> Result<f64> {
        vars.map(|j| {
            self.cardinalities
                .get(j)
                .map(|&c| c as f64)
                .ok_or_else(|| Error::InvalidArgument(format!("variable {j} out of bounds")))
        })
        .product()
    }
}

impl NullModel for UniformNull {
    fn n_ctx(&self) -> usize {
        self.n_ctx
    }

    fn is_temporal(&self) -> bool {
        true
    }

    fn slice(&self, items: &[(usize, Category)], _ctx: Option<usize>) -> Result<Frequency> {
        Ok(Frequency {
            hits: 1.0,
            support: self.outcomes(items.iter().map(|&(j, _)| j))?,
        })
    }

    fn transition(
        &self,
        vars: &[usize],
        _prev: &[Category],
        _next: &[Category],
    ) -> Result<TransitionEstimate> {
        let outcomes = self.outcomes(vars.iter().copied())?;
        Ok(TransitionEstimate {
            joint: Frequency {
                hits: 1.0,
                support: outcomes * outcomes,
            },
            prev: Frequency {
                hits: outcomes,
                support: outcomes * outcomes,
            },
        })
    }
}
