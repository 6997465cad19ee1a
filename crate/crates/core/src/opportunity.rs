//! Transmission-opportunity prediction from transmitter-side interference.
//!
//! The measured interference `I` is explained by an empty ball of radius `R`
//! around the node: the dominant interferer sits on its boundary and the
//! rest form a PPP outside it. `R` solves
//!
//! ```text
//! I R^α − 4πλ/(α−2) R² − 1 = 0
//! ```
//!
//! and the opportunistic probability (OP) is the Rayleigh-fading success
//! probability of the link under that interferer geometry.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{invalid, Error, Result};
use crate::integral::{far_field_alpha4, far_field_numeric};
use crate::model::SystemParams;

/// Replacement for a measured interference of exactly zero.
pub const DEFAULT_INTERFERENCE_FLOOR: f64 = 1e-12;

const NEWTON_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpportunityEstimate {
    pub measured_interference: f64,
    pub ball_radius: f64,
    pub op: f64,
}

/// How OP is evaluated for a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpportunityModel {
    /// Substituted for non-positive measurements.
    pub interference_floor: f64,
    /// Multiply OP by `exp(-θ d^α β)` when the pair runs full duplex.
    pub include_self_interference: bool,
}

impl Default for OpportunityModel {
    fn default() -> Self {
        Self {
            interference_floor: DEFAULT_INTERFERENCE_FLOOR,
            include_self_interference: true,
        }
    }
}

impl OpportunityModel {
    pub fn floored(&self, interference: f64) -> f64 {
        if interference > self.interference_floor {
            interference
        } else {
            self.interference_floor
        }
    }

    /// OP for a node of a pair in the configured duplex mode.
    pub fn estimate(&self, interference: f64, params: &SystemParams) -> Result<OpportunityEstimate> {
        let duplex_active = self.include_self_interference && params.duplex == crate::model::Duplex::Full;
        estimate(self.floored(interference), params, duplex_active)
    }
}

fn ball_coefficient(params: &SystemParams) -> f64 {
    4.0 * PI * params.lambda / (params.alpha - 2.0)
}

/// Residual `I R^α − 4πλ/(α−2) R² − 1`, evaluated in double-double
/// arithmetic so that it reflects the error in `radius` rather than rounding
/// in the evaluation.
pub fn radius_residual(interference: f64, radius: f64, params: &SystemParams) -> f64 {
    let r = TwoFloat::from(radius);
    let alpha = params.alpha;
    let r_alpha = if alpha.fract() == 0.0 && alpha.abs() < 64.0 {
        r.powi(alpha as i32)
    } else if (2.0 * alpha).fract() == 0.0 && alpha.abs() < 64.0 {
        r.powi(alpha.floor() as i32) * r.sqrt()
    } else {
        r.powf(TwoFloat::from(alpha))
    };
    let coeff = TwoFloat::from(4.0) * twofloat::consts::PI * TwoFloat::from(params.lambda)
        / TwoFloat::from(alpha - 2.0);
    let res = TwoFloat::from(interference) * r_alpha - coeff * r * r - TwoFloat::from(1.0);
    f64::from(res)
}

/// Closed-form empty-ball radius for `alpha = 4`:
/// `R = I^(-1/2) [πλ + (I + π²λ²)^(1/2)]^(1/2)`.
pub fn radius_alpha4_closed_form(interference: f64, lambda: f64) -> f64 {
    let pl = PI * lambda;
    interference.powf(-0.5) * (pl + (interference + pl * pl).sqrt()).sqrt()
}

fn derivative(interference: f64, radius: f64, params: &SystemParams) -> f64 {
    params.alpha * interference * radius.powf(params.alpha - 1.0) - 2.0 * ball_coefficient(params) * radius
}

/// One double-double Newton correction followed by a search over the
/// neighbouring doubles for the smallest residual.
fn polish(interference: f64, radius: f64, params: &SystemParams) -> f64 {
    let res = radius_residual(interference, radius, params);
    let slope = derivative(interference, radius, params);
    let mut best = radius;
    if slope > 0.0 && res.is_finite() {
        let stepped = radius - res / slope;
        if stepped > 0.0 && stepped.is_finite() {
            best = stepped;
        }
    }
    let mut best_res = radius_residual(interference, best, params).abs();
    for _ in 0..4 {
        let down = next_down(best);
        let up = next_up(best);
        let rd = radius_residual(interference, down, params).abs();
        let ru = radius_residual(interference, up, params).abs();
        if rd < best_res && rd <= ru {
            best = down;
            best_res = rd;
        } else if ru < best_res {
            best = up;
            best_res = ru;
        } else {
            break;
        }
    }
    best
}

fn next_up(x: f64) -> f64 {
    f64::from_bits(x.to_bits() + 1)
}

fn next_down(x: f64) -> f64 {
    f64::from_bits(x.to_bits() - 1)
}

/// Safeguarded Newton (bisection fallback) on `I R^α − k R² − 1`.
pub fn radius_newton(interference: f64, params: &SystemParams) -> Result<f64> {
    let k = ball_coefficient(params);
    let alpha = params.alpha;
    let f = |r: f64| interference * r.powf(alpha) - k * r * r - 1.0;
    let mut lo = 0.0;
    let mut hi = (1.0 / interference).powf(1.0 / alpha).max((k / interference).powf(1.0 / (alpha - 2.0)));
    hi = hi.max(f64::MIN_POSITIVE);
    let mut guard = 0;
    while f(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 2000 || !hi.is_finite() {
            return Err(Error::RootFinding("could not bracket the empty-ball radius".into()));
        }
    }
    let mut r = hi;
    for _ in 0..NEWTON_MAX_ITER {
        let fr = f(r);
        if fr == 0.0 {
            return Ok(r);
        }
        if fr < 0.0 {
            lo = lo.max(r);
        } else {
            hi = hi.min(r);
        }
        let slope = derivative(interference, r, params);
        let mut next = r - fr / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - r).abs() <= 4.0 * f64::EPSILON * r {
            return Ok(next);
        }
        r = next;
    }
    Err(Error::RootFinding(format!(
        "Newton iteration for the empty-ball radius did not converge in {NEWTON_MAX_ITER} steps"
    )))
}

/// Expected empty-ball radius for measured interference `interference > 0`.
pub fn empty_ball_radius(interference: f64, params: &SystemParams) -> Result<f64> {
    if !(interference > 0.0) || !interference.is_finite() {
        return Err(invalid(
            "measured interference",
            format!("must be positive and finite (got {interference})"),
        ));
    }
    params.validate()?;
    let raw = if params.alpha == 4.0 {
        radius_alpha4_closed_form(interference, params.lambda)
    } else {
        radius_newton(interference, params)?
    };
    Ok(polish(interference, raw, params))
}

/// `exp(-4πλd² J(R/d, 1))`, the probability that no interferer outside the
/// ball breaks the link.
fn outside_ball_factor(radius: f64, params: &SystemParams) -> f64 {
    if params.lambda == 0.0 {
        return 1.0;
    }
    let a = radius / params.d;
    let j = if params.alpha == 4.0 {
        far_field_alpha4(a, 1.0, params.theta)
    } else {
        far_field_numeric(a, 1.0, params.alpha, params.theta)
    };
    (-4.0 * PI * params.lambda * params.d * params.d * j).exp()
}

/// Success probability given the empty-ball radius.
pub fn op_from_radius(radius: f64, params: &SystemParams, duplex_active: bool) -> f64 {
    let fd = if duplex_active {
        params.self_interference_success()
    } else {
        1.0
    };
    let nearest = 1.0 / (1.0 + params.theta * (params.d / radius).powf(params.alpha));
    (fd * nearest * outside_ball_factor(radius, params)).clamp(0.0, 1.0)
}

/// Opportunistic probability `Pr[SIR > θ | I]`.
pub fn opportunistic_probability(interference: f64, params: &SystemParams, duplex_active: bool) -> Result<f64> {
    Ok(estimate(interference, params, duplex_active)?.op)
}

pub fn estimate(interference: f64, params: &SystemParams, duplex_active: bool) -> Result<OpportunityEstimate> {
    let radius = empty_ball_radius(interference, params)?;
    Ok(OpportunityEstimate {
        measured_interference: interference,
        ball_radius: radius,
        op: op_from_radius(radius, params, duplex_active),
    })
}
