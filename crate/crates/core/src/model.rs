//! Physical-layer primitives: system parameters, Poisson bipolar deployments
//! on a torus, Rayleigh fading and the full-duplex SIR.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::{derive, Stream};

/// Minimum ratio between the torus side and the pair distance.
pub const DEFAULT_WINDOW_GUARD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Duplex {
    Half,
    Full,
}

impl Duplex {
    pub fn as_str(self) -> &'static str {
        match self {
            Duplex::Half => "half",
            Duplex::Full => "full",
        }
    }
}

/// Model constants. All powers are linear and normalized to unit transmit power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Density of each half of the bipolar network (pairs per m^2).
    pub lambda: f64,
    /// Path-loss exponent, > 2.
    pub alpha: f64,
    /// SIR threshold (linear).
    pub theta: f64,
    /// Pair distance in meters.
    pub d: f64,
    /// Residual self-interference factor (linear, in [0, 1]).
    pub beta: f64,
    pub duplex: Duplex,
}

impl SystemParams {
    pub fn new(lambda: f64, alpha: f64, theta: f64, d: f64, beta: f64, duplex: Duplex) -> Result<Self> {
        let p = Self {
            lambda,
            alpha,
            theta,
            d,
            beta,
            duplex,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 2.0) || !self.alpha.is_finite() {
            return Err(invalid("alpha", "must exceed 2"));
        }
        if !(self.theta > 0.0) || !self.theta.is_finite() {
            return Err(invalid("theta", "must be positive"));
        }
        if !(self.d > 0.0) || !self.d.is_finite() {
            return Err(invalid("d", "must be positive"));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(invalid("lambda", "must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(invalid("beta", "must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_d(mut self, d: f64) -> Self {
        self.d = d;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_duplex(mut self, duplex: Duplex) -> Self {
        self.duplex = duplex;
        self
    }

    /// `theta * d^alpha`.
    pub fn theta_d_alpha(&self) -> f64 {
        self.theta * self.d.powf(self.alpha)
    }

    /// Self-interference factor that is in effect for the duplex mode: `beta`
    /// for full duplex, zero for half duplex (the receiver never transmits).
    pub fn effective_beta(&self) -> f64 {
        match self.duplex {
            Duplex::Full => self.beta,
            Duplex::Half => 0.0,
        }
    }

    /// `exp(-theta d^alpha beta)`, the probability that residual
    /// self-interference alone does not break the link.
    pub fn self_interference_success(&self) -> f64 {
        (-self.theta_d_alpha() * self.beta).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    /// Point of the first process (transmits in half-duplex networks).
    A,
    /// Displaced partner (receive-only in half-duplex networks).
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub position: Point,
    pub pair: usize,
    pub role: Role,
}

/// Minimum-image distance on a square torus of side `window_side`.
pub fn toroidal_distance(a: Point, b: Point, window_side: f64) -> f64 {
    let wrap = |delta: f64| {
        let delta = delta.abs() % window_side;
        delta.min(window_side - delta)
    };
    wrap(a.x - b.x).hypot(wrap(a.y - b.y))
}

fn wrap_coordinate(v: f64, side: f64) -> f64 {
    let w = v.rem_euclid(side);
    // rem_euclid can round up to `side` for tiny negative inputs
    if w >= side {
        0.0
    } else {
        w
    }
}

/// A realized Poisson bipolar network. Node `2i` is the A-member and node
/// `2i + 1` the B-member of pair `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub window_side: f64,
    pub pair_distance: f64,
    pub nodes: Vec<Node>,
}

impl Deployment {
    pub fn empty(window_side: f64, pair_distance: f64) -> Self {
        Self {
            window_side,
            pair_distance,
            nodes: Vec::new(),
        }
    }

    /// Builds a deployment from explicit A-positions and orientations.
    pub fn from_pairs(window_side: f64, pair_distance: f64, pairs: &[(Point, f64)]) -> Self {
        let mut dep = Self::empty(window_side, pair_distance);
        for &(a, angle) in pairs {
            dep.push_pair(a, angle);
        }
        dep
    }

    fn push_pair(&mut self, a: Point, angle: f64) {
        let side = self.window_side;
        let pair = self.pairs();
        let a = Point::new(wrap_coordinate(a.x, side), wrap_coordinate(a.y, side));
        let b = Point::new(
            wrap_coordinate(a.x + self.pair_distance * angle.cos(), side),
            wrap_coordinate(a.y + self.pair_distance * angle.sin(), side),
        );
        self.nodes.push(Node {
            position: a,
            pair,
            role: Role::A,
        });
        self.nodes.push(Node {
            position: b,
            pair,
            role: Role::B,
        });
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn pairs(&self) -> usize {
        self.nodes.len() / 2
    }

    #[inline]
    pub fn partner(node: usize) -> usize {
        node ^ 1
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        toroidal_distance(self.nodes[a].position, self.nodes[b].position, self.window_side)
    }

    /// Indices of nodes allowed to transmit under the duplex mode.
    pub fn transmitters(&self, duplex: Duplex) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| duplex == Duplex::Full || self.nodes[i].role == Role::A)
            .collect()
    }
}

/// Samples a Poisson bipolar network on a torus of side `window_side`.
pub fn sample_deployment(params: &SystemParams, window_side: f64, seed: u64) -> Result<Deployment> {
    sample_deployment_with_guard(params, window_side, seed, DEFAULT_WINDOW_GUARD)
}

/// As [`sample_deployment`], with an explicit `window_side / d` guard.
pub fn sample_deployment_with_guard(
    params: &SystemParams,
    window_side: f64,
    seed: u64,
    guard: f64,
) -> Result<Deployment> {
    params.validate()?;
    if !(window_side > 0.0) || !window_side.is_finite() {
        return Err(invalid("window_side", "must be positive"));
    }
    if window_side <= guard * params.d {
        return Err(invalid(
            "window_side",
            format!("must exceed {guard} x d = {} m", guard * params.d),
        ));
    }
    let mut dep = Deployment::empty(window_side, params.d);
    let mean = params.lambda * window_side * window_side;
    if mean == 0.0 {
        return Ok(dep);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = Poisson::new(mean)
        .map_err(|e| invalid("lambda", e.to_string()))?
        .sample(&mut rng) as usize;
    dep.nodes.reserve(2 * count);
    for _ in 0..count {
        let a = Point::new(
            rng.random::<f64>() * window_side,
            rng.random::<f64>() * window_side,
        );
        let angle = rng.random::<f64>() * std::f64::consts::TAU;
        dep.push_pair(a, angle);
    }
    Ok(dep)
}

/// Path loss `r^-alpha` between every pair of nodes, tabulated for
/// deployments up to [`PathLoss::TABLE_LIMIT`] nodes.
#[derive(Debug, Clone)]
pub struct PathLoss {
    alpha: f64,
    window_side: f64,
    positions: Vec<Point>,
    table: Option<Vec<f64>>,
}

impl PathLoss {
    pub const TABLE_LIMIT: usize = 2048;

    pub fn new(deployment: &Deployment, alpha: f64) -> Self {
        let positions: Vec<Point> = deployment.nodes.iter().map(|n| n.position).collect();
        let n = positions.len();
        let table = (n <= Self::TABLE_LIMIT).then(|| {
            let mut t = vec![0.0; n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = toroidal_distance(positions[i], positions[j], deployment.window_side).powf(-alpha);
                    t[i * n + j] = v;
                    t[j * n + i] = v;
                }
            }
            t
        });
        Self {
            alpha,
            window_side: deployment.window_side,
            positions,
            table,
        }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        match &self.table {
            Some(t) => t[a * self.positions.len() + b],
            None => toroidal_distance(self.positions[a], self.positions[b], self.window_side).powf(-self.alpha),
        }
    }
}

/// Source of fading power gains `h_mk` from node `m` to node `k`.
pub trait Channel {
    fn gain(&self, from: usize, to: usize) -> f64;
}

/// One slot of i.i.d. unit-mean Rayleigh (exponential power) fading.
///
/// Gains are a pure function of `(seed, from, to)` so they can be drawn
/// lazily for only the links that matter in a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelRealization {
    seed: u64,
}

impl ChannelRealization {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    /// Channel of slot `slot` in a run seeded with `seed`.
    pub fn for_slot(seed: u64, slot: u64) -> Self {
        Self::new(derive(seed ^ 0xC4A7_11E1, slot))
    }
}

impl Channel for ChannelRealization {
    #[inline]
    fn gain(&self, from: usize, to: usize) -> f64 {
        let key = ((from as u64) << 32) ^ (to as u64);
        Stream::new(derive(self.seed, key)).exp1()
    }
}

/// Hand-set gains; absent links fall back to `default`.
#[derive(Debug, Clone, Default)]
pub struct TableChannel {
    pub gains: HashMap<(usize, usize), f64>,
    pub default: f64,
}

impl TableChannel {
    pub fn new(default: f64) -> Self {
        Self {
            gains: HashMap::new(),
            default,
        }
    }

    pub fn set(&mut self, from: usize, to: usize, gain: f64) -> &mut Self {
        self.gains.insert((from, to), gain);
        self
    }
}

impl Channel for TableChannel {
    fn gain(&self, from: usize, to: usize) -> f64 {
        self.gains.get(&(from, to)).copied().unwrap_or(self.default)
    }
}

/// Per-node, per-slot access decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyDecision {
    /// Transmit indicator.
    pub delta: bool,
    /// Linear transmit power in [0, 1].
    pub power: f64,
    /// Transmission probability used to draw `delta`.
    pub p: f64,
}

impl PolicyDecision {
    pub const SILENT: Self = Self {
        delta: false,
        power: 0.0,
        p: 0.0,
    };

    pub fn transmit(power: f64, p: f64) -> Self {
        if power > 0.0 {
            Self { delta: true, power, p }
        } else {
            Self {
                delta: false,
                power: 0.0,
                p,
            }
        }
    }

    pub fn silent(p: f64) -> Self {
        Self {
            delta: false,
            power: 0.0,
            p,
        }
    }

    /// Radiated power: `delta * power`.
    #[inline]
    pub fn radiated(&self) -> f64 {
        if self.delta {
            self.power
        } else {
            0.0
        }
    }
}

/// `signal / (self_interference + interference)`, with `+inf` for an exactly
/// zero denominator.
#[inline]
pub fn sir_ratio(signal: f64, self_interference: f64, interference: f64) -> f64 {
    let den = self_interference + interference;
    if den == 0.0 {
        f64::INFINITY
    } else {
        signal / den
    }
}

/// SIR at receiver `rx` from its partner, given every node's decision.
pub fn sir(
    rx: usize,
    decisions: &[PolicyDecision],
    channel: &dyn Channel,
    deployment: &Deployment,
    params: &SystemParams,
) -> Result<f64> {
    sir_with_background(rx, decisions, channel, deployment, params, 0.0)
}

/// [`sir`] plus a constant `background` interference power.
pub fn sir_with_background(
    rx: usize,
    decisions: &[PolicyDecision],
    channel: &dyn Channel,
    deployment: &Deployment,
    params: &SystemParams,
    background: f64,
) -> Result<f64> {
    let tx = Deployment::partner(rx);
    let own = decisions[tx];
    if !own.delta {
        return Err(Error::PartnerSilent { rx });
    }
    let signal = own.power * channel.gain(tx, rx) * params.d.powf(-params.alpha);
    let self_interference = decisions[rx].radiated() * params.beta;
    let mut interference = background;
    for (m, dec) in decisions.iter().enumerate() {
        if m == tx || m == rx || !dec.delta {
            continue;
        }
        let r = deployment.distance(m, rx);
        interference += dec.power * channel.gain(m, rx) * r.powf(-params.alpha);
    }
    Ok(sir_ratio(signal, self_interference, interference))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(invalid("value", format!("must be positive to convert to dB (got {x})")));
    }
    Ok(10.0 * x.log10())
}
