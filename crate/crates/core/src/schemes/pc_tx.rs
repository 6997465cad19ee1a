use super::{AccessScheme, SchemeContext};
use crate::error::Result;
use crate::model::PolicyDecision;
use crate::rng::Stream;

/// Power-controlled transmission: every slot, with power equal to the
/// predicted OP.
#[derive(Debug, Clone, Copy, Default)]
pub struct PcTx;

impl PcTx {
    pub const NAME: &'static str = "pc-tx";
}

impl AccessScheme for PcTx {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn decide(&self, interference: f64, ctx: &SchemeContext, _stream: &mut Stream) -> Result<PolicyDecision> {
        let op = ctx.opportunity.estimate(interference, &ctx.params)?.op;
        Ok(PolicyDecision::transmit(op.min(1.0), 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Duplex, SystemParams};

    #[test]
    fn power_equals_op() {
        let params = SystemParams::new(0.001, 4.0, 1.0, 2.0, 1e-11, Duplex::Full).unwrap();
        let ctx = SchemeContext::new(params);
        // find the interference whose OP is 0.8 by bisection on log I
        let op = |i: f64| ctx.opportunity.estimate(i, &params).unwrap().op;
        let (mut lo, mut hi) = (-12.0f64, 3.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if op(10f64.powf(mid)) > 0.8 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let i = 10f64.powf(0.5 * (lo + hi));
        let dec = PcTx.decide(i, &ctx, &mut Stream::new(0)).unwrap();
        assert!(dec.delta);
        assert!((dec.power - 0.8).abs() < 1e-9);
    }
}
