//! Proportionally fair transmission probability.
//!
//! The optimum solves the fixed-point equation `1/p = RHS(p)` where
//!
//! ```text
//! RHS(p) = −(e−1)/((e−1)p+1) + 1/(1 + R^α/(θd^α) − p) + 4πλd² ∫_{R/d}^∞ s/(1−p+s^α/θ) ds
//! e      = exp(−θ d^α β)
//! ```
//!
//! and is clamped to 1. A quadratic closed-form approximation with fitted
//! coefficients is provided for `alpha = 4`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::integral::{far_field_alpha4, far_field_numeric};
use crate::model::SystemParams;
use crate::opportunity::empty_ball_radius;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const MAX_BISECTION_STEPS: usize = 200;
/// Upper end of the search interval; RHS is singular at `p = 1` for the
/// arctan variants.
pub const P_UPPER: f64 = 1.0 - 1e-9;
const P_LOWER: f64 = 1e-15;

/// How the far-field term of the right-hand side is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhsVariant {
    /// Printed `alpha = 4` reduction with `arctan((R/d)² / √(θ(1−p)))`.
    Arctan,
    /// Exact `alpha = 4` reduction, `π/2 − arctan(...)`.
    Arccot,
    /// Adaptive quadrature of the integral, any `alpha > 2`.
    Quadrature,
}

impl RhsVariant {
    pub const ALL: [RhsVariant; 3] = [RhsVariant::Quadrature, RhsVariant::Arctan, RhsVariant::Arccot];

    pub fn as_str(self) -> &'static str {
        match self {
            RhsVariant::Arctan => "arctan",
            RhsVariant::Arccot => "arccot",
            RhsVariant::Quadrature => "quadrature",
        }
    }

    fn requires_alpha4(self) -> bool {
        !matches!(self, RhsVariant::Quadrature)
    }
}

impl fmt::Display for RhsVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RhsVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "arctan" => Ok(RhsVariant::Arctan),
            "arccot" => Ok(RhsVariant::Arccot),
            "quadrature" => Ok(RhsVariant::Quadrature),
            other => Err(Error::Config(format!(
                "unknown solver variant `{other}` (expected arctan, arccot or quadrature)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub p_star: f64,
    /// `|RHS(p*) − 1/p*|`, evaluated at `1 − 1e-9` when clamped.
    pub residual: f64,
    /// The unclamped root lies at or beyond 1.
    pub clamped: bool,
    pub variant: RhsVariant,
    pub ball_radius: f64,
}

/// Right-hand side of the fixed-point equation at probability `p` and ball
/// radius `radius`.
pub fn fixed_point_rhs(p: f64, radius: f64, params: &SystemParams, variant: RhsVariant) -> Result<f64> {
    if variant.requires_alpha4() && params.alpha != 4.0 {
        return Err(Error::RequiresAlpha4 {
            what: match variant {
                RhsVariant::Arctan => "the arctan right-hand side",
                _ => "the arccot right-hand side",
            },
            alpha: params.alpha,
        });
    }
    if !(radius > 0.0) {
        return Err(invalid("radius", "must be positive"));
    }
    let closed_at_one = p >= 1.0 && variant.requires_alpha4();
    if closed_at_one {
        return Err(Error::SingularAtOne {
            what: "the arctan form of the far-field term",
        });
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid("p", format!("must lie in (0, 1) (got {p})")));
    }
    let theta = params.theta;
    let d = params.d;
    let tda = params.theta_d_alpha();

    // e − 1, kept accurate for tiny β
    let em1 = (-tda * params.effective_beta()).exp_m1();
    let self_term = -em1 / (em1 * p + 1.0);
    let near_term = 1.0 / (1.0 + radius.powf(params.alpha) / tda - p);

    let far_term = if params.lambda == 0.0 {
        0.0
    } else {
        let a = radius / d;
        let scale = 4.0 * PI * params.lambda * d * d;
        match variant {
            RhsVariant::Quadrature => scale * far_field_numeric(a, 1.0 - p, params.alpha, theta),
            RhsVariant::Arccot => scale * far_field_alpha4(a, 1.0 - p, theta),
            RhsVariant::Arctan => {
                let root = (1.0 - p).sqrt();
                2.0 * PI * params.lambda * d * d * theta.sqrt() / root * (a * a / (theta * (1.0 - p)).sqrt()).atan()
            }
        }
    };
    Ok(self_term + near_term + far_term)
}

/// `g(p) = RHS(p) − 1/p`; strictly increasing on (0, 1).
pub fn fixed_point_gap(p: f64, radius: f64, params: &SystemParams, variant: RhsVariant) -> Result<f64> {
    Ok(fixed_point_rhs(p, radius, params, variant)? - 1.0 / p)
}

/// Optimal transmission probability for measured interference `interference`.
pub fn solve_optimal_p(
    interference: f64,
    params: &SystemParams,
    variant: RhsVariant,
    tol: f64,
) -> Result<SolverResult> {
    let radius = empty_ball_radius(interference, params)?;
    solve_for_radius(radius, params, variant, tol)
}

/// Bisection on `g` for a given ball radius.
pub fn solve_for_radius(radius: f64, params: &SystemParams, variant: RhsVariant, tol: f64) -> Result<SolverResult> {
    if !(tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    let g = |p: f64| fixed_point_gap(p, radius, params, variant);
    let g_hi = g(P_UPPER)?;
    if g_hi < 0.0 {
        return Ok(SolverResult {
            p_star: 1.0,
            residual: g_hi.abs(),
            clamped: true,
            variant,
            ball_radius: radius,
        });
    }
    let (mut lo, mut hi) = (P_LOWER, P_UPPER);
    let mut best = (P_UPPER, g_hi.abs());
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid)?;
        if gm.abs() < best.1 {
            best = (mid, gm.abs());
        }
        if gm.abs() <= tol {
            return Ok(SolverResult {
                p_star: mid,
                residual: gm.abs(),
                clamped: false,
                variant,
                ball_radius: radius,
            });
        }
        if gm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if mid == lo && mid == hi {
            break;
        }
    }
    Err(Error::RootFinding(format!(
        "bisection did not reach tolerance {tol:e} in {MAX_BISECTION_STEPS} steps (best p = {}, residual = {:e})",
        best.0, best.1
    )))
}

/// Piecewise approximation of `arctan(x)` for `x >= 0`.
pub fn arctan_approx(x: f64) -> f64 {
    if x <= 10.0 {
        (1.632 * x - 0.1037) / (x + 0.8967)
    } else {
        FRAC_PI_2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `(R/d)² / √(θ/2) ≤ 10`
    SmallX,
    LargeX,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub regime: Regime,
    /// `(R/d)² / √(θ/2)`
    pub x: f64,
}

impl QuadraticCoefficients {
    pub fn evaluate(&self, p: f64) -> f64 {
        (self.c1 * p + self.c2) * p + self.c3
    }

    pub fn discriminant(&self) -> f64 {
        self.c2 * self.c2 - 4.0 * self.c1 * self.c3
    }
}

/// Regime split variable `(R/d)² / √(θ/2)`.
pub fn split_variable(radius: f64, params: &SystemParams) -> f64 {
    (radius / params.d).powi(2) / (params.theta / 2.0).sqrt()
}

pub fn regime_for(x: f64) -> Regime {
    if x <= 10.0 {
        Regime::SmallX
    } else {
        Regime::LargeX
    }
}

/// Fitted quadratic coefficients, selecting the branch from the split variable.
pub fn quadratic_coefficients(interference: f64, params: &SystemParams) -> Result<QuadraticCoefficients> {
    if params.alpha != 4.0 {
        return Err(Error::RequiresAlpha4 {
            what: "the closed-form approximation",
            alpha: params.alpha,
        });
    }
    let radius = empty_ball_radius(interference, params)?;
    let x = split_variable(radius, params);
    Ok(coefficients_for_regime(interference, params, regime_for(x), x))
}

/// Coefficients of the requested branch, regardless of the split variable.
pub fn coefficients_for_regime(interference: f64, params: &SystemParams, regime: Regime, x: f64) -> QuadraticCoefficients {
    let lambda = params.lambda;
    let theta = params.theta;
    let d = params.d;
    let i = interference;
    let e = (-theta * params.effective_beta() * d.powi(4)).exp();
    let (c1, c2, c3) = match regime {
        Regime::SmallX => (
            (10.4 * lambda.powf(0.66) + 1.15)
                * (3.5 * theta.powf(0.5) + 1.1)
                * (0.5 * d.powi(2) - 0.7)
                * (4.5e-4 * i.powf(-1.75) - 0.12)
                * (-28.84 * e + 29.85),
            3.8e-4
                * i.powf(-1.75)
                * (1.11e3 * lambda.powi(2) + 3.0)
                * (0.3 * theta.powf(0.5) + 2.3)
                * (0.14 * d.powf(2.5) + 6.0)
                * (-0.129 * e + 1.129),
            -(lambda.powf(1.63) + 0.014)
                * (0.7 / theta + 0.5)
                * (10.0 * d.powi(-4) + 0.4)
                * (0.9 * i.powf(-1.763) + 49.0)
                * (0.02 * e + 0.98),
        ),
        Regime::LargeX => (
            (273.0 * lambda.powf(1.66) + 2.0)
                * (1.1 / theta - 5.0)
                * (2.5 * d.powi(-4) - 0.7)
                * (1.2e-5 * i.powf(-2.75) - 0.4)
                * (7.96 * e - 6.958),
            1e-4 * i.powf(-2.75)
                * (3.8e3 * lambda.powf(2.66) + 1.4)
                * (2.7 / theta + 3.5)
                * (34.0 * d.powi(-4) + 3.0)
                * (0.5261 * e + 1.526),
            -(0.9 * lambda.powf(1.63) + 0.013)
                * (0.7 / theta + 0.5)
                * (17.0 * d.powi(-4) + 0.7)
                * (0.5 * i.powf(-1.763) + 30.0)
                * (-0.046 * e + 1.051),
        ),
    };
    QuadraticCoefficients { c1, c2, c3, regime, x }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub p: f64,
    /// Root before clamping to 1.
    pub root: f64,
    pub coefficients: QuadraticCoefficients,
}

/// Closed-form approximation of the optimal transmission probability.
pub fn closed_form(interference: f64, params: &SystemParams) -> Result<ClosedForm> {
    let coefficients = quadratic_coefficients(interference, params)?;
    let disc = coefficients.discriminant();
    if !(disc >= 0.0) {
        return Err(Error::NegativeDiscriminant(disc));
    }
    let root = (-coefficients.c2 + disc.sqrt()) / (2.0 * coefficients.c1);
    if !(root > 0.0) || root.is_nan() {
        return Err(Error::NoPositiveRoot(root));
    }
    Ok(ClosedForm {
        p: root.min(1.0),
        root,
        coefficients,
    })
}

pub fn closed_form_p(interference: f64, params: &SystemParams) -> Result<f64> {
    Ok(closed_form(interference, params)?.p)
}
