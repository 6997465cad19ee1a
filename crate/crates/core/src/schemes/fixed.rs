use super::{AccessScheme, SchemeContext};
use crate::error::{invalid, Result};
use crate::model::PolicyDecision;
use crate::rng::Stream;

/// Slotted ALOHA with one global transmission probability.
#[derive(Debug, Clone, Copy)]
pub struct FixedProbability {
    p: f64,
}

impl FixedProbability {
    pub const NAME: &'static str = "fixed-p";

    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid("fixed_p", "must lie in [0, 1]"));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

impl AccessScheme for FixedProbability {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn uses_measurement(&self) -> bool {
        false
    }

    fn decide(&self, _interference: f64, _ctx: &SchemeContext, stream: &mut Stream) -> Result<PolicyDecision> {
        Ok(if stream.bernoulli(self.p) {
            PolicyDecision::transmit(1.0, self.p)
        } else {
            PolicyDecision::silent(self.p)
        })
    }
}
