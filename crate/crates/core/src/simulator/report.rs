use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{run, SimulationControls};
use crate::error::Result;
use crate::model::{sample_deployment_with_guard, SystemParams, DEFAULT_WINDOW_GUARD};
use crate::rng::derive;
use crate::schemes::{AccessScheme, SchemeContext};

/// Per-link results of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    /// Successes per measured slot on the link from node `i` to its partner.
    pub link_throughput: Vec<f64>,
    /// Whether node `i` may transmit under the duplex mode.
    pub eligible: Vec<bool>,
    /// Mean of `link_throughput` over all nodes.
    pub mean_link_throughput: f64,
    /// Mean of `ln(max(throughput, log_floor))` over eligible links.
    pub pf_utility: f64,
    pub log_floor: f64,
}

impl RunSummary {
    pub fn from_counts(successes: &[u64], eligible: Vec<bool>, measured_slots: u64, airtime: f64) -> Self {
        let slots = measured_slots as f64;
        let log_floor = 1.0 / (10.0 * slots);
        let link_throughput: Vec<f64> = successes.iter().map(|&s| s as f64 * airtime / slots).collect();
        let mean_link_throughput = mean(&link_throughput);
        let logs: Vec<f64> = link_throughput
            .iter()
            .zip(&eligible)
            .filter(|(_, &e)| e)
            .map(|(&t, _)| t.max(log_floor).ln())
            .collect();
        Self {
            link_throughput,
            eligible,
            mean_link_throughput,
            pf_utility: mean(&logs),
            log_floor,
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Half-width of the 95% Student-t confidence interval of the mean.
pub fn ci_halfwidth(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("degrees of freedom are positive")
        .inverse_cdf(0.975);
    t * (var / n as f64).sqrt()
}

/// Aggregate of independent replications of one scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub scheme: String,
    pub params: SystemParams,
    pub measured_slots: u64,
    pub replications: usize,
    pub mean_link_throughput: f64,
    pub pf_utility: f64,
    pub mean_ci_halfwidth: f64,
    pub pf_ci_halfwidth: f64,
    pub log_floor: f64,
    #[serde(skip)]
    pub runs: Vec<RunSummary>,
}

impl ThroughputReport {
    fn aggregate(scheme: &str, params: SystemParams, measured_slots: u64, runs: Vec<RunSummary>) -> Self {
        let means: Vec<f64> = runs.iter().map(|r| r.mean_link_throughput).collect();
        let pfs: Vec<f64> = runs.iter().map(|r| r.pf_utility).collect();
        Self {
            scheme: scheme.to_string(),
            params,
            measured_slots,
            replications: runs.len(),
            mean_link_throughput: mean(&means),
            pf_utility: mean(&pfs),
            mean_ci_halfwidth: ci_halfwidth(&means),
            pf_ci_halfwidth: ci_halfwidth(&pfs),
            log_floor: 1.0 / (10.0 * measured_slots as f64),
            runs,
        }
    }

    pub fn mean_interval(&self) -> (f64, f64) {
        (
            self.mean_link_throughput - self.mean_ci_halfwidth,
            self.mean_link_throughput + self.mean_ci_halfwidth,
        )
    }

    pub fn pf_interval(&self) -> (f64, f64) {
        (self.pf_utility - self.pf_ci_halfwidth, self.pf_utility + self.pf_ci_halfwidth)
    }
}

/// Everything fixed across the replications of one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSetup {
    pub ctx: SchemeContext,
    pub controls: SimulationControls,
    pub window_side: f64,
}

impl ReplicationSetup {
    pub fn new(ctx: SchemeContext, controls: SimulationControls, window_side: f64) -> Self {
        Self {
            ctx,
            controls,
            window_side,
        }
    }
}

/// Runs every scheme on `replications` independent deployments.
///
/// Replication `r` samples its deployment and its run seed from `seed` and
/// `r` alone, so all schemes see the same deployments and the result does
/// not depend on scheduling.
pub fn replicate(
    setup: &ReplicationSetup,
    schemes: &[Box<dyn AccessScheme>],
    replications: usize,
    seed: u64,
) -> Result<Vec<ThroughputReport>> {
    setup.controls.validate()?;
    setup.ctx.params.validate()?;
    if replications == 0 {
        return Err(crate::error::invalid("replications", "must be at least 1"));
    }
    let per_rep: Vec<Vec<RunSummary>> = (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let deployment = sample_deployment_with_guard(
                &setup.ctx.params,
                setup.window_side,
                derive(seed, 2 * r),
                DEFAULT_WINDOW_GUARD,
            )?;
            let run_seed = derive(seed, 2 * r + 1);
            schemes
                .iter()
                .map(|s| run(&deployment, s.as_ref(), &setup.ctx, &setup.controls, run_seed))
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut columns: Vec<Vec<RunSummary>> = vec![Vec::with_capacity(replications); schemes.len()];
    for runs in per_rep {
        for (k, summary) in runs.into_iter().enumerate() {
            columns[k].push(summary);
        }
    }
    Ok(schemes
        .iter()
        .zip(columns)
        .map(|(s, runs)| {
            ThroughputReport::aggregate(s.name(), setup.ctx.params, setup.controls.measured_slots(), runs)
        })
        .collect())
}
