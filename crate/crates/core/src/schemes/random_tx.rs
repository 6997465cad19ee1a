use serde::{Deserialize, Serialize};

use super::{AccessScheme, SchemeContext};
use crate::error::Result;
use crate::model::PolicyDecision;
use crate::optimizer::{closed_form_p, solve_optimal_p};
use crate::rng::Stream;

/// How Random TX turns a measurement into a transmission probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RandomTxRule {
    /// Fixed-point solver.
    Solver,
    /// Quadratic closed-form approximation.
    ClosedForm,
    /// `p = OP`.
    LinearOp,
}

/// Random access at full power with an interference-dependent probability.
#[derive(Debug, Clone, Copy)]
pub struct RandomTx {
    rule: RandomTxRule,
}

impl RandomTx {
    pub fn new(rule: RandomTxRule) -> Self {
        Self { rule }
    }

    pub fn rule(&self) -> RandomTxRule {
        self.rule
    }

    pub fn probability(&self, interference: f64, ctx: &SchemeContext) -> Result<f64> {
        let i = ctx.opportunity.floored(interference);
        match self.rule {
            RandomTxRule::Solver => Ok(solve_optimal_p(i, &ctx.params, ctx.solver, ctx.tolerance)?.p_star),
            RandomTxRule::ClosedForm => closed_form_p(i, &ctx.params),
            RandomTxRule::LinearOp => Ok(ctx.opportunity.estimate(i, &ctx.params)?.op),
        }
    }
}

impl AccessScheme for RandomTx {
    fn name(&self) -> &str {
        match self.rule {
            RandomTxRule::Solver => "random-tx",
            RandomTxRule::ClosedForm => "random-tx-closed-form",
            RandomTxRule::LinearOp => "random-tx-linear-op",
        }
    }

    fn decide(&self, interference: f64, ctx: &SchemeContext, stream: &mut Stream) -> Result<PolicyDecision> {
        let p = self.probability(interference, ctx)?;
        Ok(if stream.bernoulli(p) {
            PolicyDecision::transmit(1.0, p)
        } else {
            PolicyDecision::silent(p)
        })
    }
}
