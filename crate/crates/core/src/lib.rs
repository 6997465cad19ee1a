//! Opportunistic random medium access for Poisson bipolar full-duplex
//! networks.
//!
//! Each node measures the interference it sees before transmitting, turns
//! it into a predicted success probability (the opportunistic probability,
//! OP) and picks a transmission probability that maximizes proportionally
//! fair throughput. The crate provides the prediction, the exact fixed-point
//! solver and its closed-form approximation, the competing access schemes,
//! and a slotted Monte Carlo simulator to compare them.

pub mod config;
pub mod error;
pub mod integral;
pub mod model;
pub mod opportunity;
pub mod optimizer;
pub mod output;
pub mod rng;
pub mod schemes;
pub mod simulator;

pub use error::{Error, Result};
pub use model::{
    db_to_linear, linear_to_db, sample_deployment, sir, toroidal_distance, Channel, ChannelRealization, Deployment,
    Duplex, Node, Point, PolicyDecision, Role, SystemParams,
};
pub use opportunity::{empty_ball_radius, opportunistic_probability, OpportunityEstimate, OpportunityModel};
pub use optimizer::{
    arctan_approx, closed_form_p, fixed_point_rhs, quadratic_coefficients, solve_optimal_p, QuadraticCoefficients,
    Regime, RhsVariant, SolverResult,
};
