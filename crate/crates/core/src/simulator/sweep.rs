use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{replicate, ReplicationSetup, ThroughputReport};
use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::opportunity::OpportunityModel;
use crate::optimizer::{closed_form_p, solve_optimal_p, RhsVariant};
use crate::rng::derive;
use crate::schemes::AccessScheme;

/// Parameter varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Lambda,
    Theta,
    D,
    Beta,
    /// Measured interference; optimizer sweeps only.
    Interference,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::Lambda => "lambda",
            SweepAxis::Theta => "theta",
            SweepAxis::D => "d",
            SweepAxis::Beta => "beta",
            SweepAxis::Interference => "interference",
        }
    }

    /// `params` with this axis set to `value`; the interference axis leaves
    /// them unchanged.
    pub fn apply(self, params: &SystemParams, value: f64) -> SystemParams {
        match self {
            SweepAxis::Lambda => params.with_lambda(value),
            SweepAxis::Theta => params.with_theta(value),
            SweepAxis::D => params.with_d(value),
            SweepAxis::Beta => params.with_beta(value),
            SweepAxis::Interference => *params,
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda" => Ok(SweepAxis::Lambda),
            "theta" => Ok(SweepAxis::Theta),
            "d" => Ok(SweepAxis::D),
            "beta" => Ok(SweepAxis::Beta),
            "interference" => Ok(SweepAxis::Interference),
            other => Err(Error::Config(format!("unknown sweep axis `{other}`"))),
        }
    }
}

/// One grid point of a simulation sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationRecord {
    pub value: f64,
    pub outcome: std::result::Result<Vec<ThroughputReport>, String>,
}

/// Replicated simulations of every scheme at each grid point. A failing
/// point is recorded and the sweep moves on.
pub fn simulation_sweep(
    axis: SweepAxis,
    grid: &[f64],
    setup: &ReplicationSetup,
    schemes: &[Box<dyn AccessScheme>],
    replications: usize,
    seed: u64,
) -> Result<Vec<SimulationRecord>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if axis == SweepAxis::Interference {
        return Err(Error::Config(
            "the interference axis applies to optimizer sweeps only".into(),
        ));
    }
    Ok(grid
        .iter()
        .enumerate()
        .map(|(k, &value)| {
            let mut point = *setup;
            point.ctx.params = axis.apply(&setup.ctx.params, value);
            let outcome = point
                .ctx
                .params
                .validate()
                .and_then(|_| replicate(&point, schemes, replications, derive(seed, k as u64)))
                .map_err(|e| e.to_string());
            SimulationRecord { value, outcome }
        })
        .collect())
}

/// Solver and closed-form probabilities at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerRecord {
    pub value: f64,
    pub interference: f64,
    pub op: Option<f64>,
    pub p_solver_eq5: Option<f64>,
    pub p_solver_eq6: Option<f64>,
    pub p_solver_arccot: Option<f64>,
    pub p_closed_form: Option<f64>,
    /// Distance from the closed form to the nearest solver variant.
    pub abs_err: Option<f64>,
    pub errors: Vec<String>,
}

impl OptimizerRecord {
    pub fn solver(&self, variant: RhsVariant) -> Option<f64> {
        match variant {
            RhsVariant::Quadrature => self.p_solver_eq5,
            RhsVariant::Arctan => self.p_solver_eq6,
            RhsVariant::Arccot => self.p_solver_arccot,
        }
    }
}

/// Optimal probabilities along `axis` at fixed measured `interference`
/// (or at each grid value, for the interference axis).
pub fn optimizer_sweep(
    axis: SweepAxis,
    grid: &[f64],
    params: &SystemParams,
    interference: f64,
    tol: f64,
) -> Result<Vec<OptimizerRecord>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let model = OpportunityModel::default();
    Ok(grid
        .iter()
        .map(|&value| {
            let p = axis.apply(params, value);
            let i = if axis == SweepAxis::Interference { value } else { interference };
            let mut errors = Vec::new();
            let mut keep = |label: &str, r: Result<f64>| match r {
                Ok(v) => Some(v),
                Err(e) => {
                    errors.push(format!("{label}: {e}"));
                    None
                }
            };
            let valid = p.validate();
            let solve = |variant| valid_then(&valid, || solve_optimal_p(i, &p, variant, tol).map(|s| s.p_star));
            let p_solver_eq5 = keep("eq5", solve(RhsVariant::Quadrature));
            let p_solver_eq6 = keep("eq6", solve(RhsVariant::Arctan));
            let p_solver_arccot = keep("arccot", solve(RhsVariant::Arccot));
            let p_closed_form = keep("closed-form", valid_then(&valid, || closed_form_p(i, &p)));
            let op = keep("op", valid_then(&valid, || model.estimate(i, &p).map(|e| e.op)));
            let abs_err = p_closed_form.and_then(|c| {
                [p_solver_eq5, p_solver_eq6, p_solver_arccot]
                    .into_iter()
                    .flatten()
                    .map(|s| (c - s).abs())
                    .reduce(f64::min)
            });
            OptimizerRecord {
                value,
                interference: i,
                op,
                p_solver_eq5,
                p_solver_eq6,
                p_solver_arccot,
                p_closed_form,
                abs_err,
                errors,
            }
        })
        .collect())
}

fn valid_then(valid: &Result<()>, f: impl FnOnce() -> Result<f64>) -> Result<f64> {
    match valid {
        Ok(()) => f(),
        Err(e) => Err(Error::Config(e.to_string())),
    }
}
