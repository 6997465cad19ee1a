//! Access schemes. Each scheme maps a node's measured interference to a
//! [`PolicyDecision`]; schemes are registered by name and built at runtime
//! from a [`SchemeConfig`].

mod csma;
mod fixed;
mod max_tx;
mod pc_tx;
mod random_tx;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use csma::{csma_schedule, CsmaCa};
pub use fixed::FixedProbability;
pub use max_tx::MaxTx;
pub use pc_tx::PcTx;
pub use random_tx::{RandomTx, RandomTxRule};

use crate::error::{invalid, Error, Result};
use crate::model::{db_to_linear, Channel, Deployment, PathLoss, PolicyDecision, SystemParams};
use crate::opportunity::OpportunityModel;
use crate::optimizer::{RhsVariant, DEFAULT_TOLERANCE};
use crate::rng::Stream;

/// Everything a scheme needs besides the measurement itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeContext {
    pub params: SystemParams,
    pub opportunity: OpportunityModel,
    pub solver: RhsVariant,
    pub tolerance: f64,
}

impl SchemeContext {
    pub fn new(params: SystemParams) -> Self {
        Self {
            params,
            opportunity: OpportunityModel::default(),
            solver: default_solver(&params),
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

/// Solver variant used inside simulations: the exact arccot reduction where
/// it applies, quadrature otherwise.
pub fn default_solver(params: &SystemParams) -> RhsVariant {
    if params.alpha == 4.0 {
        RhsVariant::Arccot
    } else {
        RhsVariant::Quadrature
    }
}

/// State visible to a scheme's per-slot contention step.
pub struct ContentionView<'a> {
    pub deployment: &'a Deployment,
    pub path_loss: &'a PathLoss,
    pub channel: &'a dyn Channel,
    pub params: &'a SystemParams,
    pub exclude_partner: bool,
    pub seed: u64,
    pub slot: u64,
}

pub trait AccessScheme: Send + Sync {
    fn name(&self) -> &str;

    /// Whether `decide` reads the measured interference.
    fn uses_measurement(&self) -> bool {
        true
    }

    fn decide(&self, interference: f64, ctx: &SchemeContext, stream: &mut Stream) -> Result<PolicyDecision>;

    /// Resolves contention among nodes that decided to transmit.
    fn contend(&self, _view: &ContentionView<'_>, _decisions: &mut [PolicyDecision]) {}

    /// Fraction of the slot available for data.
    fn airtime(&self) -> f64 {
        1.0
    }
}

impl fmt::Debug for dyn AccessScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AccessScheme({})", self.name())
    }
}

/// CSMA/CA baseline settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsmaConfig {
    /// Sensing threshold relative to unit transmit power (linear).
    pub sense_threshold: f64,
    /// Number of backoff mini-slots.
    pub backoff_window: u32,
    /// Fraction of each slot consumed by contention.
    pub contention_overhead: f64,
}

impl CsmaConfig {
    /// Threshold for a sensing level and transmit power given in dBm.
    pub fn threshold_from_dbm(sense_dbm: f64, tx_power_dbm: f64) -> f64 {
        db_to_linear(sense_dbm - tx_power_dbm)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sense_threshold > 0.0) {
            return Err(invalid("csma_sense_threshold", "must be positive"));
        }
        if self.backoff_window < 1 {
            return Err(invalid("csma_backoff_window", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.contention_overhead) {
            return Err(invalid("csma_contention_overhead", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

impl Default for CsmaConfig {
    fn default() -> Self {
        Self {
            sense_threshold: Self::threshold_from_dbm(-30.0, 23.0),
            backoff_window: 16,
            contention_overhead: 0.0,
        }
    }
}

/// Options shared by the registered schemes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub csma: CsmaConfig,
    /// Probability for the `fixed-p` scheme.
    pub fixed_p: Option<f64>,
}

type Constructor = fn(&SchemeConfig) -> Result<Box<dyn AccessScheme>>;

pub struct SchemeEntry {
    pub name: &'static str,
    pub description: &'static str,
    build: Constructor,
}

const REGISTRY: &[SchemeEntry] = &[
    SchemeEntry {
        name: MaxTx::NAME,
        description: "always transmit at full power",
        build: |_| Ok(Box::new(MaxTx)),
    },
    SchemeEntry {
        name: PcTx::NAME,
        description: "always transmit, power scaled to the predicted OP",
        build: |_| Ok(Box::new(PcTx)),
    },
    SchemeEntry {
        name: "random-tx",
        description: "transmit with the proportionally fair probability from the fixed-point solver",
        build: |_| Ok(Box::new(RandomTx::new(RandomTxRule::Solver))),
    },
    SchemeEntry {
        name: "random-tx-closed-form",
        description: "transmit with the closed-form approximate probability (alpha = 4)",
        build: |_| Ok(Box::new(RandomTx::new(RandomTxRule::ClosedForm))),
    },
    SchemeEntry {
        name: "random-tx-linear-op",
        description: "transmit with probability equal to the predicted OP",
        build: |_| Ok(Box::new(RandomTx::new(RandomTxRule::LinearOp))),
    },
    SchemeEntry {
        name: CsmaCa::NAME,
        description: "carrier sensing with random backoff marks",
        build: |cfg| {
            cfg.csma.validate()?;
            Ok(Box::new(CsmaCa::new(cfg.csma)))
        },
    },
    SchemeEntry {
        name: FixedProbability::NAME,
        description: "transmit with a fixed global probability (requires fixed_p)",
        build: |cfg| {
            let p = cfg
                .fixed_p
                .ok_or_else(|| Error::Config("scheme `fixed-p` requires `fixed_p`".into()))?;
            Ok(Box::new(FixedProbability::new(p)?))
        },
    },
];

/// Schemes compared by default.
pub const DEFAULT_SCHEMES: [&str; 4] = ["max-tx", "pc-tx", "random-tx", "csma-ca"];

pub fn registry() -> &'static [SchemeEntry] {
    REGISTRY
}

pub fn scheme_names() -> impl Iterator<Item = &'static str> {
    REGISTRY.iter().map(|e| e.name)
}

pub fn build_scheme(name: &str, cfg: &SchemeConfig) -> Result<Box<dyn AccessScheme>> {
    let entry = REGISTRY
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownScheme(name.to_string()))?;
    (entry.build)(cfg)
}
