//! Run configuration: a flat JSON document, bundled presets, and the
//! conversion to the linear-scale types used everywhere else.
//!
//! dB and dBm fields (`theta_db`, `beta_db`, `csma_sense_dbm`,
//! `tx_power_dbm`) are accepted only here. [`RunConfig::emit`] always writes
//! linear values, so parsing an emitted config reproduces it exactly.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{db_to_linear, Duplex, SystemParams};
use crate::opportunity::OpportunityModel;
use crate::optimizer::{RhsVariant, DEFAULT_TOLERANCE};
use crate::schemes::{default_solver, scheme_names, CsmaConfig, SchemeConfig, SchemeContext, DEFAULT_SCHEMES};
use crate::simulator::{MeasurementMode, ReplicationSetup, SimulationControls, SweepAxis};

const DEFAULT_INTERFERENCE: f64 = 1e-2;
const DEFAULT_REPLICATIONS: usize = 30;
const DEFAULT_SEED: u64 = 1;
/// Default window holds this many nodes on average.
const DEFAULT_NODE_TARGET: f64 = 1000.0;

/// Configuration as written by users. Every key is optional here; required
/// keys are checked when converting to [`RunConfig`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duplex: Option<Duplex>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub schemes: Option<Vec<String>>,
    /// `auto` or a solver variant name.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interference_floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub op_self_interference: Option<bool>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub csma_sense_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csma_sense_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tx_power_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csma_backoff_window: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csma_contention_overhead: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_p: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_side: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slots: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warmup: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replications: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measurement: Option<MeasurementMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exclude_partner: Option<bool>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_axis: Option<SweepAxis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_values: Option<Vec<f64>>,

    /// Stem of output file names.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),* $(,)?) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )*
    };
}

impl RawConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Values set in `top` replace those in `self`. Setting either form of
    /// a dB/linear pair discards the other form from `self`.
    pub fn overlay(mut self, top: RawConfig) -> RawConfig {
        if top.theta.is_some() || top.theta_db.is_some() {
            self.theta = None;
            self.theta_db = None;
        }
        if top.beta.is_some() || top.beta_db.is_some() {
            self.beta = None;
            self.beta_db = None;
        }
        if top.csma_sense_threshold.is_some() || top.csma_sense_dbm.is_some() || top.tx_power_dbm.is_some() {
            self.csma_sense_threshold = None;
        }
        if top.csma_sense_threshold.is_some() {
            self.csma_sense_dbm = None;
            self.tx_power_dbm = None;
        }
        overlay!(self, top;
            lambda, alpha, theta, theta_db, d, beta, beta_db, duplex,
            schemes, solver, tolerance, interference, interference_floor, op_self_interference,
            csma_sense_threshold, csma_sense_dbm, tx_power_dbm, csma_backoff_window,
            csma_contention_overhead, fixed_p,
            window_side, slots, warmup, replications, seed, measurement, exclude_partner,
            sweep, sweep_axis, sweep_values, name,
        );
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    /// Replicated simulations of every scheme.
    Simulation,
    /// Solver variants and closed form at a fixed interference.
    Optimizer,
}

/// Solver variant used by Random TX inside simulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    /// The exact arccot form at `alpha = 4`, quadrature otherwise.
    Auto,
    Fixed(RhsVariant),
}

impl SolverChoice {
    pub fn resolve(self, params: &SystemParams) -> RhsVariant {
        match self {
            SolverChoice::Auto => default_solver(params),
            SolverChoice::Fixed(v) => v,
        }
    }
}

impl fmt::Display for SolverChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverChoice::Auto => f.write_str("auto"),
            SolverChoice::Fixed(v) => f.write_str(v.as_str()),
        }
    }
}

impl FromStr for SolverChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            Ok(SolverChoice::Auto)
        } else {
            Ok(SolverChoice::Fixed(s.parse()?))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// Validated configuration in linear units.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SystemParams,
    pub schemes: Vec<String>,
    pub solver: SolverChoice,
    pub tolerance: f64,
    pub interference: f64,
    pub opportunity: OpportunityModel,
    pub scheme_config: SchemeConfig,
    pub window_side: f64,
    pub controls: SimulationControls,
    pub replications: usize,
    pub seed: u64,
    pub sweep: Option<SweepSpec>,
    pub name: String,
}

fn exclusive(linear: Option<f64>, db: Option<f64>, key: &str, db_key: &str) -> Result<Option<f64>> {
    match (linear, db) {
        (Some(_), Some(_)) => Err(Error::Config(format!("give only one of `{key}` and `{db_key}`"))),
        (Some(x), None) => Ok(Some(x)),
        (None, Some(x)) => Ok(Some(db_to_linear(x))),
        (None, None) => Ok(None),
    }
}

fn required<T>(value: Option<T>, what: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing required key {what}")))
}

fn finite(value: f64, key: &'static str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(invalid(key, "must be finite"))
    }
}

/// Window holding about a thousand nodes on average, and never narrower than
/// the deployment guard allows.
pub fn default_window_side(params: &SystemParams) -> f64 {
    let guard = 1.5 * crate::model::DEFAULT_WINDOW_GUARD * params.d;
    if params.lambda > 0.0 {
        (DEFAULT_NODE_TARGET / (2.0 * params.lambda)).sqrt().max(guard)
    } else {
        guard
    }
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let theta = exclusive(raw.theta, raw.theta_db, "theta", "theta_db")?;
        let beta = exclusive(raw.beta, raw.beta_db, "beta", "beta_db")?;
        let params = SystemParams {
            lambda: required(raw.lambda, "`lambda`")?,
            alpha: required(raw.alpha, "`alpha`")?,
            theta: required(theta, "`theta` or `theta_db`")?,
            d: required(raw.d, "`d`")?,
            beta: required(beta, "`beta` or `beta_db`")?,
            duplex: raw.duplex.unwrap_or(Duplex::Full),
        };
        params.validate()?;

        let schemes = match &raw.schemes {
            Some(list) => list.clone(),
            None => DEFAULT_SCHEMES.iter().map(|s| s.to_string()).collect(),
        };
        if schemes.is_empty() {
            return Err(invalid("schemes", "must not be empty"));
        }
        for s in &schemes {
            if !scheme_names().any(|n| n == s) {
                return Err(Error::Config(format!(
                    "schemes: unknown scheme `{s}` (known: {})",
                    scheme_names().collect::<Vec<_>>().join(", ")
                )));
            }
        }
        let solver: SolverChoice = match &raw.solver {
            Some(s) => s.parse().map_err(|e| Error::Config(format!("solver: {e}")))?,
            None => SolverChoice::Auto,
        };
        let tolerance = raw.tolerance.unwrap_or(DEFAULT_TOLERANCE);
        if !(tolerance > 0.0) {
            return Err(invalid("tolerance", "must be positive"));
        }
        let interference = finite(raw.interference.unwrap_or(DEFAULT_INTERFERENCE), "interference")?;
        if !(interference > 0.0) {
            return Err(invalid("interference", "must be positive"));
        }
        let opportunity = OpportunityModel {
            interference_floor: raw.interference_floor.unwrap_or(OpportunityModel::default().interference_floor),
            include_self_interference: raw.op_self_interference.unwrap_or(true),
        };
        if !(opportunity.interference_floor > 0.0) {
            return Err(invalid("interference_floor", "must be positive"));
        }

        let defaults = CsmaConfig::default();
        let sense_threshold = match (raw.csma_sense_threshold, raw.csma_sense_dbm, raw.tx_power_dbm) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(Error::Config(
                    "give either `csma_sense_threshold` or `csma_sense_dbm`/`tx_power_dbm`, not both".into(),
                ))
            }
            (Some(t), None, None) => t,
            (None, None, None) => defaults.sense_threshold,
            (None, sense, power) => CsmaConfig::threshold_from_dbm(sense.unwrap_or(-30.0), power.unwrap_or(23.0)),
        };
        let csma = CsmaConfig {
            sense_threshold,
            backoff_window: raw.csma_backoff_window.unwrap_or(defaults.backoff_window),
            contention_overhead: raw.csma_contention_overhead.unwrap_or(defaults.contention_overhead),
        };
        csma.validate()?;
        if let Some(p) = raw.fixed_p {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid("fixed_p", "must lie in [0, 1]"));
            }
        }
        if schemes.iter().any(|s| s == "fixed-p") && raw.fixed_p.is_none() {
            return Err(Error::Config("scheme `fixed-p` requires `fixed_p`".into()));
        }
        if schemes.iter().any(|s| s == "random-tx-closed-form") && params.alpha != 4.0 {
            return Err(Error::Config("schemes: `random-tx-closed-form` requires alpha = 4".into()));
        }

        let window_side = finite(raw.window_side.unwrap_or_else(|| default_window_side(&params)), "window_side")?;
        if window_side <= crate::model::DEFAULT_WINDOW_GUARD * params.d {
            return Err(invalid("window_side", "must exceed 10 x d"));
        }
        let base = SimulationControls::default();
        let controls = SimulationControls {
            slots: raw.slots.unwrap_or(base.slots),
            warmup: raw.warmup.unwrap_or(base.warmup),
            measurement: raw.measurement.unwrap_or(base.measurement),
            exclude_partner: raw.exclude_partner.unwrap_or(base.exclude_partner),
        };
        controls.validate()?;
        let replications = raw.replications.unwrap_or(DEFAULT_REPLICATIONS);
        if replications == 0 {
            return Err(invalid("replications", "must be at least 1"));
        }

        let sweep = match (raw.sweep, raw.sweep_axis, &raw.sweep_values) {
            (_, None, None) if raw.sweep.is_none() => None,
            (kind, Some(axis), Some(values)) => {
                if values.is_empty() {
                    return Err(invalid("sweep_values", "must not be empty"));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("sweep_values", "must be finite"));
                }
                let kind = kind.unwrap_or(if axis == SweepAxis::Interference {
                    SweepKind::Optimizer
                } else {
                    SweepKind::Simulation
                });
                if kind == SweepKind::Simulation && axis == SweepAxis::Interference {
                    return Err(Error::Config(
                        "sweep_axis: `interference` is only valid for optimizer sweeps".into(),
                    ));
                }
                Some(SweepSpec {
                    kind,
                    axis,
                    values: values.clone(),
                })
            }
            (_, None, _) => return Err(Error::Config("missing required key `sweep_axis`".into())),
            (_, _, None) => return Err(Error::Config("missing required key `sweep_values`".into())),
        };

        Ok(RunConfig {
            params,
            schemes,
            solver,
            tolerance,
            interference,
            opportunity,
            scheme_config: SchemeConfig {
                csma,
                fixed_p: raw.fixed_p,
            },
            window_side,
            controls,
            replications,
            seed: raw.seed.unwrap_or(DEFAULT_SEED),
            sweep,
            name: raw.name.clone().unwrap_or_else(|| "run".to_string()),
        })
    }

    /// Fully explicit, linear-unit form of this configuration.
    pub fn emit(&self) -> RawConfig {
        let sweep = self.sweep.as_ref();
        RawConfig {
            lambda: Some(self.params.lambda),
            alpha: Some(self.params.alpha),
            theta: Some(self.params.theta),
            theta_db: None,
            d: Some(self.params.d),
            beta: Some(self.params.beta),
            beta_db: None,
            duplex: Some(self.params.duplex),
            schemes: Some(self.schemes.clone()),
            solver: Some(self.solver.to_string()),
            tolerance: Some(self.tolerance),
            interference: Some(self.interference),
            interference_floor: Some(self.opportunity.interference_floor),
            op_self_interference: Some(self.opportunity.include_self_interference),
            csma_sense_threshold: Some(self.scheme_config.csma.sense_threshold),
            csma_sense_dbm: None,
            tx_power_dbm: None,
            csma_backoff_window: Some(self.scheme_config.csma.backoff_window),
            csma_contention_overhead: Some(self.scheme_config.csma.contention_overhead),
            fixed_p: self.scheme_config.fixed_p,
            window_side: Some(self.window_side),
            slots: Some(self.controls.slots),
            warmup: Some(self.controls.warmup),
            replications: Some(self.replications),
            seed: Some(self.seed),
            measurement: Some(self.controls.measurement),
            exclude_partner: Some(self.controls.exclude_partner),
            sweep: sweep.map(|s| s.kind),
            sweep_axis: sweep.map(|s| s.axis),
            sweep_values: sweep.map(|s| s.values.clone()),
            name: Some(self.name.clone()),
        }
    }

    pub fn scheme_context(&self) -> SchemeContext {
        SchemeContext {
            params: self.params,
            opportunity: self.opportunity,
            solver: self.solver.resolve(&self.params),
            tolerance: self.tolerance,
        }
    }

    pub fn replication_setup(&self) -> ReplicationSetup {
        ReplicationSetup::new(self.scheme_context(), self.controls, self.window_side)
    }
}

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    build: fn() -> RawConfig,
}

impl Preset {
    pub fn config(&self) -> RawConfig {
        (self.build)()
    }
}

fn log_grid(lo_exp: i32, hi_exp: i32, per_decade: usize) -> Vec<f64> {
    let steps = (hi_exp - lo_exp) as usize * per_decade;
    (0..=steps)
        .map(|k| 10f64.powf(lo_exp as f64 + k as f64 / per_decade as f64))
        .collect()
}

const PRESETS: &[Preset] = &[
    Preset {
        name: "fig2",
        description: "optimal probability against OP, parametrized by measured interference (beta = -110 dB)",
        build: || RawConfig {
            lambda: Some(0.001),
            alpha: Some(4.0),
            theta: Some(1.0),
            d: Some(2.0),
            beta_db: Some(-110.0),
            duplex: Some(Duplex::Full),
            sweep: Some(SweepKind::Optimizer),
            sweep_axis: Some(SweepAxis::Interference),
            sweep_values: Some(log_grid(-6, 3, 4)),
            name: Some("fig2".into()),
            ..Default::default()
        },
    },
    Preset {
        name: "fig3",
        description: "throughput of the four access schemes against density (alpha = 4, theta = 3 dB, d = 3 m, beta = -110 dB)",
        build: || RawConfig {
            lambda: Some(0.01),
            alpha: Some(4.0),
            theta_db: Some(3.0),
            d: Some(3.0),
            beta_db: Some(-110.0),
            duplex: Some(Duplex::Full),
            csma_sense_dbm: Some(-30.0),
            tx_power_dbm: Some(23.0),
            window_side: Some(224.0),
            slots: Some(110),
            warmup: Some(10),
            replications: Some(30),
            sweep: Some(SweepKind::Simulation),
            sweep_axis: Some(SweepAxis::Lambda),
            sweep_values: Some(vec![0.002, 0.004, 0.006, 0.008, 0.01]),
            name: Some("fig3".into()),
            ..Default::default()
        },
    },
    Preset {
        name: "fig4a",
        description: "solver against closed form as theta varies (alpha = 4, d = 2 m, lambda = 0.001, I = 1e-3)",
        build: || RawConfig {
            lambda: Some(0.001),
            alpha: Some(4.0),
            theta: Some(1.0),
            d: Some(2.0),
            beta_db: Some(-110.0),
            duplex: Some(Duplex::Full),
            interference: Some(1e-3),
            sweep: Some(SweepKind::Optimizer),
            sweep_axis: Some(SweepAxis::Theta),
            sweep_values: Some(vec![0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0]),
            name: Some("fig4a".into()),
            ..Default::default()
        },
    },
    Preset {
        name: "fig4b",
        description: "solver against closed form as lambda varies (alpha = 4, d = 2 m, theta = 1, I = 1e-2)",
        build: || RawConfig {
            lambda: Some(0.001),
            alpha: Some(4.0),
            theta: Some(1.0),
            d: Some(2.0),
            beta_db: Some(-110.0),
            duplex: Some(Duplex::Full),
            interference: Some(1e-2),
            sweep: Some(SweepKind::Optimizer),
            sweep_axis: Some(SweepAxis::Lambda),
            sweep_values: Some(vec![1e-4, 2e-4, 5e-4, 1e-3, 2e-3, 5e-3, 1e-2]),
            name: Some("fig4b".into()),
            ..Default::default()
        },
    },
];

pub fn presets() -> &'static [Preset] {
    PRESETS
}

pub fn preset(name: &str) -> Result<RawConfig> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .map(Preset::config)
        .ok_or_else(|| {
            Error::Config(format!(
                "unknown preset `{name}` (known: {})",
                PRESETS.iter().map(|p| p.name).collect::<Vec<_>>().join(", ")
            ))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn minimal() -> RawConfig {
        RawConfig::from_json(r#"{"lambda": 0.001, "alpha": 4, "theta_db": 3, "d": 2, "beta_db": -110}"#).unwrap()
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = RunConfig::from_raw(&minimal()).unwrap();
        assert!((cfg.params.theta - 1.9952623149688795).abs() < 1e-15);
        assert!((cfg.params.beta - 1e-11).abs() < 1e-24);
        assert_eq!(cfg.params.duplex, Duplex::Full);
        assert_eq!(cfg.schemes, DEFAULT_SCHEMES.map(String::from).to_vec());
        assert_eq!(cfg.solver, SolverChoice::Auto);
        assert_eq!(cfg.scheme_context().solver, RhsVariant::Arccot);
        assert_eq!(cfg.replications, 30);
        assert_eq!(cfg.tolerance, 1e-9);
        assert!((cfg.window_side - (5e5f64).sqrt()).abs() < 1e-9);
        assert!(cfg.sweep.is_none());
    }

    #[test]
    fn errors_name_the_key() {
        let mut raw = minimal();
        raw.alpha = Some(2.0);
        assert_eq!(RunConfig::from_raw(&raw).unwrap_err().to_string(), "alpha must exceed 2");

        let err = RawConfig::from_json(r#"{"lambda": 0.001, "alpha": 4, "gamma": 1}"#).unwrap_err();
        assert!(err.to_string().contains("gamma"), "{err}");

        let mut raw = minimal();
        raw.d = None;
        assert!(RunConfig::from_raw(&raw).unwrap_err().to_string().contains("`d`"));

        let mut raw = minimal();
        raw.theta = Some(2.0);
        let msg = RunConfig::from_raw(&raw).unwrap_err().to_string();
        assert!(msg.contains("theta") && msg.contains("theta_db"), "{msg}");

        let mut raw = minimal();
        raw.slots = Some(5);
        raw.warmup = Some(5);
        assert!(RunConfig::from_raw(&raw).unwrap_err().to_string().starts_with("slots"));

        let mut raw = minimal();
        raw.schemes = Some(vec!["aloha".into()]);
        assert!(RunConfig::from_raw(&raw).unwrap_err().to_string().contains("aloha"));

        let mut raw = minimal();
        raw.sweep_axis = Some(SweepAxis::Theta);
        assert!(RunConfig::from_raw(&raw).unwrap_err().to_string().contains("sweep_values"));
    }

    #[test]
    fn fig3_preset_values() {
        let cfg = RunConfig::from_raw(&preset("fig3").unwrap()).unwrap();
        assert_eq!(cfg.params.alpha, 4.0);
        assert_eq!(cfg.params.d, 3.0);
        assert!((cfg.params.theta - db_to_linear(3.0)).abs() < 1e-15);
        assert!((cfg.params.beta - 1e-11).abs() < 1e-24);
        assert!((cfg.scheme_config.csma.sense_threshold - 10f64.powf(-5.3)).abs() < 1e-18);
        let sweep = cfg.sweep.unwrap();
        assert_eq!((sweep.kind, sweep.axis), (SweepKind::Simulation, SweepAxis::Lambda));
    }

    #[test]
    fn every_preset_is_valid() {
        for p in presets() {
            let cfg = RunConfig::from_raw(&p.config()).unwrap();
            assert_eq!(cfg.name, p.name);
            assert!(cfg.sweep.is_some());
        }
        assert!(preset("fig9").is_err());
    }

    #[test]
    fn overlay_replaces_unit_counterparts() {
        let base = preset("fig3").unwrap();
        let top = RawConfig {
            theta: Some(4.0),
            csma_sense_threshold: Some(1e-4),
            seed: Some(9),
            ..Default::default()
        };
        let cfg = RunConfig::from_raw(&base.overlay(top)).unwrap();
        assert_eq!(cfg.params.theta, 4.0);
        assert_eq!(cfg.scheme_config.csma.sense_threshold, 1e-4);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.params.d, 3.0);
    }

    #[test]
    fn solver_choice_parses() {
        assert_eq!("auto".parse::<SolverChoice>().unwrap(), SolverChoice::Auto);
        assert_eq!(
            "quadrature".parse::<SolverChoice>().unwrap(),
            SolverChoice::Fixed(RhsVariant::Quadrature)
        );
        assert!("newton".parse::<SolverChoice>().is_err());
    }

    fn arb_config() -> impl Strategy<Value = RawConfig> {
        (
            (0.0f64..0.05, 2.05f64..6.0, -10.0f64..15.0, 0.5f64..10.0, -150.0f64..0.0, any::<bool>()),
            (proptest::sample::subsequence(vec!["max-tx", "pc-tx", "random-tx", "csma-ca", "random-tx-linear-op"], 1..5),
             prop_oneof![Just("auto"), Just("quadrature")], 1e-12f64..1e-6, 1e-8f64..10.0),
            (1e-9f64..1e-3, 1u32..64, 0.0f64..0.5, 11u64..500, 1u64..10, 1usize..50, any::<u64>()),
            proptest::option::of((prop_oneof![Just(SweepAxis::Lambda), Just(SweepAxis::Theta), Just(SweepAxis::Interference)],
                proptest::collection::vec(1e-4f64..1.0, 1..6))),
        )
            .prop_map(|((lambda, alpha, theta_db, d, beta_db, hd), (schemes, solver, tol, i), (thr, w, ovh, slots, warmup, reps, seed), sweep)| RawConfig {
                lambda: Some(lambda),
                alpha: Some(alpha),
                theta_db: Some(theta_db),
                d: Some(d),
                beta_db: Some(beta_db),
                duplex: Some(if hd { Duplex::Half } else { Duplex::Full }),
                schemes: Some(schemes.into_iter().map(String::from).collect()),
                solver: Some(solver.into()),
                tolerance: Some(tol),
                interference: Some(i),
                csma_sense_threshold: Some(thr),
                csma_backoff_window: Some(w),
                csma_contention_overhead: Some(ovh),
                slots: Some(slots),
                warmup: Some(warmup.min(slots - 1)),
                replications: Some(reps),
                seed: Some(seed),
                sweep_axis: sweep.as_ref().map(|s| s.0),
                sweep_values: sweep.map(|s| s.1),
                ..Default::default()
            })
    }

    proptest! {
        #[test]
        fn emit_then_parse_is_identity(raw in arb_config()) {
            let cfg = RunConfig::from_raw(&raw).unwrap();
            let text = cfg.emit().to_json().unwrap();
            let back = RunConfig::from_raw(&RawConfig::from_json(&text).unwrap()).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
