use super::{AccessScheme, SchemeContext};
use crate::error::Result;
use crate::model::PolicyDecision;
use crate::rng::Stream;

/// Maximal-power transmission in every slot.
#[derive(Debug, Clone, Copy, Default)]
pub struct MaxTx;

impl MaxTx {
    pub const NAME: &'static str = "max-tx";
}

impl AccessScheme for MaxTx {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn uses_measurement(&self) -> bool {
        false
    }

    fn decide(&self, _interference: f64, _ctx: &SchemeContext, _stream: &mut Stream) -> Result<PolicyDecision> {
        Ok(PolicyDecision::transmit(1.0, 1.0))
    }
}
