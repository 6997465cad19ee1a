//! Slotted Monte Carlo engine.
//!
//! Each slot every potential transmitter measures the interference radiated
//! in the previous slot, its scheme decides, contention (if any) is
//! resolved, fading is redrawn, and every attempted link is scored by its
//! SIR against the threshold.

mod demo;
mod report;
mod sweep;

use serde::{Deserialize, Serialize};

pub use demo::{two_pair_demo, DemoGains, DemoMode, DemoRow};
pub use report::{replicate, ReplicationSetup, RunSummary, ThroughputReport};
pub use sweep::{optimizer_sweep, simulation_sweep, OptimizerRecord, SimulationRecord, SweepAxis};

use crate::error::{invalid, Result};
use crate::model::{
    sir_ratio, Channel, ChannelRealization, Deployment, Duplex, PathLoss, PolicyDecision, SystemParams,
};
use crate::rng::{derive, Stream};
use crate::schemes::{AccessScheme, ContentionView, SchemeContext};

const ACCESS_SALT: u64 = 0xACCE_5500;
const SENSE_SALT: u64 = 0x5E45_E000;
const BOOTSTRAP_SLOT: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementMode {
    /// Faded received power, as an energy detector sees it.
    #[default]
    Instant,
    /// Average received power (unit fading gain).
    FadingAveraged,
}

impl MeasurementMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MeasurementMode::Instant => "instant",
            MeasurementMode::FadingAveraged => "fading-averaged",
        }
    }
}

/// Slot-loop controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationControls {
    /// Total slots per run, warmup included.
    pub slots: u64,
    /// Leading slots excluded from the statistics.
    pub warmup: u64,
    pub measurement: MeasurementMode,
    /// Ignore the partner's signal when measuring and sensing.
    pub exclude_partner: bool,
}

impl Default for SimulationControls {
    fn default() -> Self {
        Self {
            slots: 110,
            warmup: 10,
            measurement: MeasurementMode::Instant,
            exclude_partner: true,
        }
    }
}

impl SimulationControls {
    pub fn validate(&self) -> Result<()> {
        if self.warmup < 1 {
            return Err(invalid("warmup", "must be at least 1"));
        }
        if self.slots <= self.warmup {
            return Err(invalid("slots", "must exceed warmup"));
        }
        Ok(())
    }

    pub fn measured_slots(&self) -> u64 {
        self.slots - self.warmup
    }
}

/// What happened on the link from a node to its partner in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SlotOutcome {
    pub attempted: bool,
    pub success: bool,
    pub measured_interference: f64,
    pub p_used: f64,
}

/// Interference measured at `node` from the `(transmitter, power)` pairs of
/// `active`, excluding the node itself and optionally its partner.
pub fn measure_interference<C: Channel + ?Sized>(
    node: usize,
    active: &[(usize, f64)],
    channel: &C,
    path_loss: &PathLoss,
    mode: MeasurementMode,
    exclude_partner: bool,
) -> f64 {
    let partner = Deployment::partner(node);
    active
        .iter()
        .filter(|&&(m, _)| m != node && !(exclude_partner && m == partner))
        .map(|&(m, power)| {
            let g = match mode {
                MeasurementMode::Instant => channel.gain(m, node),
                MeasurementMode::FadingAveraged => 1.0,
            };
            power * g * path_loss.get(node, m)
        })
        .sum()
}

/// Callback receiving the slot index and every node's outcome.
pub type SlotObserver<'a> = &'a mut dyn FnMut(u64, &[SlotOutcome]);

/// Runs `scheme` on `deployment` and returns per-link statistics.
pub fn run(
    deployment: &Deployment,
    scheme: &dyn AccessScheme,
    ctx: &SchemeContext,
    controls: &SimulationControls,
    seed: u64,
) -> Result<RunSummary> {
    run_observed(deployment, scheme, ctx, controls, seed, None)
}

/// [`run`], reporting every slot's per-node outcomes to `observer`.
pub fn run_observed(
    deployment: &Deployment,
    scheme: &dyn AccessScheme,
    ctx: &SchemeContext,
    controls: &SimulationControls,
    seed: u64,
    mut observer: Option<SlotObserver<'_>>,
) -> Result<RunSummary> {
    controls.validate()?;
    let params = &ctx.params;
    params.validate()?;
    let n = deployment.len();
    let path_loss = PathLoss::new(deployment, params.alpha);
    let signal_loss = params.d.powf(-params.alpha);
    let transmitters = deployment.transmitters(params.duplex);
    let access_seed = derive(seed, ACCESS_SALT);
    let measures = scheme.uses_measurement();

    let mut decisions = vec![PolicyDecision::SILENT; n];
    let mut outcomes = vec![SlotOutcome::default(); n];
    let mut successes = vec![0u64; n];
    // slot 0 senses every potential transmitter at full power
    let mut prev_active: Vec<(usize, f64)> = transmitters.iter().map(|&i| (i, 1.0)).collect();
    let mut prev_channel = ChannelRealization::for_slot(seed, BOOTSTRAP_SLOT);
    let mut active = Vec::with_capacity(transmitters.len());
    // A receiver's interference sum in one slot is exactly what it measures
    // at the start of the next, so it is kept when the two coincide.
    let reuse = measures && controls.measurement == MeasurementMode::Instant && controls.exclude_partner;
    let mut heard = vec![f64::NAN; n];
    let mut prev_heard = vec![f64::NAN; n];

    for slot in 0..controls.slots {
        for &i in &transmitters {
            let measured = if !measures {
                0.0
            } else if reuse && !prev_heard[i].is_nan() {
                prev_heard[i]
            } else {
                measure_interference(
                    i,
                    &prev_active,
                    &prev_channel,
                    &path_loss,
                    controls.measurement,
                    controls.exclude_partner,
                )
            };
            let mut stream = Stream::keyed(access_seed, slot, i as u64);
            decisions[i] = scheme.decide(measured, ctx, &mut stream)?;
            outcomes[i].measured_interference = measured;
        }

        let channel = ChannelRealization::for_slot(seed, slot);
        let sense_channel = ChannelRealization::for_slot(seed ^ SENSE_SALT, slot);
        let view = ContentionView {
            deployment,
            path_loss: &path_loss,
            channel: &sense_channel,
            params,
            exclude_partner: controls.exclude_partner,
            seed,
            slot,
        };
        scheme.contend(&view, &mut decisions);

        active.clear();
        active.extend(
            transmitters
                .iter()
                .filter(|&&i| decisions[i].delta)
                .map(|&i| (i, decisions[i].power)),
        );

        let scoring = slot >= controls.warmup;
        heard.fill(f64::NAN);
        if scoring || reuse || observer.is_some() {
            for &i in &transmitters {
                outcomes[i].attempted = decisions[i].delta;
                outcomes[i].success = false;
                outcomes[i].p_used = decisions[i].p;
            }
            for &(tx, power) in &active {
                let rx = Deployment::partner(tx);
                let signal = power * channel.gain(tx, rx) * signal_loss;
                let self_interference = decisions[rx].radiated() * params.beta;
                let interference: f64 = active
                    .iter()
                    .filter(|&&(m, _)| m != tx && m != rx)
                    .map(|&(m, pm)| pm * channel.gain(m, rx) * path_loss.get(rx, m))
                    .sum();
                heard[rx] = interference;
                let ok = sir_ratio(signal, self_interference, interference) >= params.theta;
                outcomes[tx].success = ok;
                if ok && scoring {
                    successes[tx] += 1;
                }
            }
            if let Some(obs) = observer.as_mut() {
                obs(slot, &outcomes);
            }
        }

        std::mem::swap(&mut prev_active, &mut active);
        std::mem::swap(&mut prev_heard, &mut heard);
        prev_channel = channel;
    }

    let mut eligible = vec![false; n];
    for &i in &transmitters {
        eligible[i] = true;
    }
    Ok(RunSummary::from_counts(
        &successes,
        eligible,
        controls.measured_slots(),
        scheme.airtime(),
    ))
}

/// Success count of the link `tagged_tx -> partner` when the tagged
/// transmitter is always on and every other potential transmitter (and, in
/// full duplex, the receiver itself) transmits independently with
/// probability `p`. Fading is redrawn every slot.
pub fn tagged_link_success(
    deployment: &Deployment,
    params: &SystemParams,
    tagged_tx: usize,
    p: f64,
    slots: u64,
    seed: u64,
) -> Result<u64> {
    params.validate()?;
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("p", "must lie in [0, 1]"));
    }
    let rx = Deployment::partner(tagged_tx);
    let others: Vec<(usize, f64)> = deployment
        .transmitters(params.duplex)
        .into_iter()
        .filter(|&m| m != tagged_tx && m != rx)
        .map(|m| (m, deployment.distance(m, rx).powf(-params.alpha)))
        .collect();
    let rx_can_transmit = params.duplex == Duplex::Full;
    let signal_loss = params.d.powf(-params.alpha);
    let access_seed = derive(seed, ACCESS_SALT);
    let mut count = 0;
    for slot in 0..slots {
        let channel = ChannelRealization::for_slot(seed, slot);
        let mut stream = Stream::keyed(access_seed, slot, 0);
        let self_interference = if rx_can_transmit && stream.bernoulli(p) {
            params.beta
        } else {
            0.0
        };
        let mut interference = 0.0;
        for &(m, loss) in &others {
            if stream.bernoulli(p) {
                interference += channel.gain(m, rx) * loss;
            }
        }
        let signal = channel.gain(tagged_tx, rx) * signal_loss;
        if sir_ratio(signal, self_interference, interference) >= params.theta {
            count += 1;
        }
    }
    Ok(count)
}

/// Conditional success probability of the tagged link under the same
/// activity model as [`tagged_link_success`]:
/// `Π_m (1 − p θ d^α r_m^−α / (1 + θ d^α r_m^−α))`, times
/// `1 − p + p exp(−θ d^α β)` in full duplex.
pub fn link_success_product(deployment: &Deployment, params: &SystemParams, tagged_tx: usize, p: f64) -> f64 {
    let rx = Deployment::partner(tagged_tx);
    let k = params.theta_d_alpha();
    let mut log_q = 0.0;
    for m in deployment.transmitters(params.duplex) {
        if m == tagged_tx || m == rx {
            continue;
        }
        let x = k * deployment.distance(m, rx).powf(-params.alpha);
        log_q += (-p * x / (1.0 + x)).ln_1p();
    }
    let self_factor = match params.duplex {
        Duplex::Full => 1.0 - p + p * params.self_interference_success(),
        Duplex::Half => 1.0,
    };
    log_q.exp() * self_factor
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_deployment, Point};
    use crate::schemes::{build_scheme, FixedProbability, MaxTx, SchemeConfig};

    fn params(duplex: Duplex) -> SystemParams {
        SystemParams::new(0.001, 4.0, 1.0, 2.0, 1e-11, duplex).unwrap()
    }

    #[test]
    fn measurement_of_empty_set_is_zero() {
        let dep = Deployment::from_pairs(100.0, 2.0, &[(Point::new(0.0, 0.0), 0.0)]);
        let pl = PathLoss::new(&dep, 4.0);
        let ch = ChannelRealization::new(1);
        assert_eq!(measure_interference(0, &[], &ch, &pl, MeasurementMode::Instant, true), 0.0);
    }

    #[test]
    fn single_interferer_fading_averaged() {
        let dep = Deployment::from_pairs(
            100.0,
            2.0,
            &[(Point::new(0.0, 0.0), 0.0), (Point::new(0.0, 7.0), 0.0)],
        );
        let pl = PathLoss::new(&dep, 3.0);
        let ch = ChannelRealization::new(1);
        let got = measure_interference(0, &[(2, 1.0)], &ch, &pl, MeasurementMode::FadingAveraged, true);
        assert!((got - 7f64.powi(-3)).abs() < 1e-15);
        // the partner only counts when not excluded
        let got = measure_interference(0, &[(1, 1.0)], &ch, &pl, MeasurementMode::FadingAveraged, false);
        assert!((got - 0.125).abs() < 1e-15);
        assert_eq!(measure_interference(0, &[(1, 1.0)], &ch, &pl, MeasurementMode::Instant, true), 0.0);
    }

    #[test]
    fn measurement_matches_brute_force() {
        let p = params(Duplex::Full);
        let dep = sample_deployment(&p, 300.0, 5).unwrap();
        let pl = PathLoss::new(&dep, p.alpha);
        let ch = ChannelRealization::new(77);
        let active: Vec<(usize, f64)> = (0..dep.len()).filter(|i| i % 3 != 0).map(|i| (i, 0.5 + (i % 2) as f64 * 0.5)).collect();
        for node in [0usize, 1, 17, dep.len() - 1] {
            let mut want = 0.0;
            for &(m, pw) in &active {
                if m == node || m == (node ^ 1) {
                    continue;
                }
                let pos_m = dep.nodes[m].position;
                let pos_k = dep.nodes[node].position;
                let mut best = f64::INFINITY;
                for sx in [-1.0, 0.0, 1.0] {
                    for sy in [-1.0, 0.0, 1.0] {
                        let dx = pos_m.x - pos_k.x + sx * 300.0;
                        let dy = pos_m.y - pos_k.y + sy * 300.0;
                        best = best.min((dx * dx + dy * dy).sqrt());
                    }
                }
                want += pw * ch.gain(m, node) * best.powf(-4.0);
            }
            let got = measure_interference(node, &active, &ch, &pl, MeasurementMode::Instant, true);
            assert!((got - want).abs() <= 1e-12 * want.max(1e-300), "{got} vs {want}");
        }
    }

    #[test]
    fn isolated_half_duplex_pair_always_succeeds() {
        let p = params(Duplex::Half);
        let dep = Deployment::from_pairs(100.0, 2.0, &[(Point::new(10.0, 10.0), 0.3)]);
        let summary = run(&dep, &MaxTx, &SchemeContext::new(p), &SimulationControls::default(), 3).unwrap();
        assert_eq!(summary.link_throughput, vec![1.0, 0.0]);
        assert_eq!(summary.eligible, vec![true, false]);
        assert_eq!(summary.pf_utility, 0.0);
        assert_eq!(summary.mean_link_throughput, 0.5);
    }

    #[test]
    fn full_duplex_single_pair_rate() {
        // choose beta so that exp(-θ d^α β) = 0.6
        let beta = -(0.6f64.ln()) / 16.0;
        let p = SystemParams::new(0.001, 4.0, 1.0, 2.0, beta, Duplex::Full).unwrap();
        let dep = Deployment::from_pairs(100.0, 2.0, &[(Point::new(10.0, 10.0), 0.3)]);
        let controls = SimulationControls {
            slots: 20_001,
            warmup: 1,
            ..Default::default()
        };
        let summary = run(&dep, &MaxTx, &SchemeContext::new(p), &controls, 9).unwrap();
        let n: f64 = 20_000.0;
        let se = (0.6 * 0.4 / n).sqrt();
        for &tp in &summary.link_throughput {
            assert!((tp - 0.6).abs() < 3.0 * se, "{tp}");
        }
    }

    #[test]
    fn runs_are_reproducible() {
        let p = params(Duplex::Full).with_lambda(0.01);
        let dep = sample_deployment(&p, 60.0, 1).unwrap();
        let scheme = build_scheme("random-tx", &SchemeConfig::default()).unwrap();
        let ctx = SchemeContext::new(p);
        let controls = SimulationControls {
            slots: 20,
            warmup: 2,
            ..Default::default()
        };
        let a = run(&dep, scheme.as_ref(), &ctx, &controls, 4).unwrap();
        let b = run(&dep, scheme.as_ref(), &ctx, &controls, 4).unwrap();
        assert_eq!(a.link_throughput, b.link_throughput);
        let c = run(&dep, scheme.as_ref(), &ctx, &controls, 5).unwrap();
        assert_ne!(a.link_throughput, c.link_throughput);
    }

    #[test]
    fn observer_sees_consistent_outcomes() {
        let p = params(Duplex::Full).with_lambda(0.01);
        let dep = sample_deployment(&p, 60.0, 2).unwrap();
        let scheme = FixedProbability::new(0.5).unwrap();
        let controls = SimulationControls {
            slots: 30,
            warmup: 5,
            ..Default::default()
        };
        let mut seen = 0;
        let mut successes = vec![0u64; dep.len()];
        let mut obs = |slot: u64, out: &[SlotOutcome]| {
            seen += 1;
            for (i, o) in out.iter().enumerate() {
                assert!(!o.success || o.attempted);
                assert_eq!(o.p_used, 0.5);
                if slot >= 5 && o.success {
                    successes[i] += 1;
                }
            }
        };
        let summary = run_observed(&dep, &scheme, &SchemeContext::new(p), &controls, 8, Some(&mut obs)).unwrap();
        assert_eq!(seen, 30);
        for (i, &s) in successes.iter().enumerate() {
            assert_eq!(summary.link_throughput[i], s as f64 / 25.0);
        }
    }

    #[test]
    fn slot_sir_agrees_with_model_sir() {
        // one slot of max-tx through the engine vs the reference SIR
        let p = params(Duplex::Full).with_lambda(0.005);
        let dep = sample_deployment(&p, 80.0, 3).unwrap();
        let controls = SimulationControls {
            slots: 2,
            warmup: 1,
            ..Default::default()
        };
        let mut last = Vec::new();
        let mut obs = |slot: u64, out: &[SlotOutcome]| {
            if slot == 1 {
                last = out.to_vec();
            }
        };
        run_observed(&dep, &MaxTx, &SchemeContext::new(p), &controls, 12, Some(&mut obs)).unwrap();
        let decisions = vec![PolicyDecision::transmit(1.0, 1.0); dep.len()];
        let ch = ChannelRealization::for_slot(12, 1);
        for rx in 0..dep.len() {
            let s = crate::model::sir(rx, &decisions, &ch, &dep, &p).unwrap();
            assert_eq!(last[rx ^ 1].success, s >= p.theta);
        }
    }

    #[test]
    fn reused_sums_match_fresh_measurements() {
        let p = params(Duplex::Full).with_lambda(0.01);
        let dep = sample_deployment(&p, 60.0, 6).unwrap();
        let pl = PathLoss::new(&dep, p.alpha);
        let scheme = build_scheme("random-tx", &SchemeConfig::default()).unwrap();
        let controls = SimulationControls {
            slots: 12,
            warmup: 2,
            ..Default::default()
        };
        let mut history: Vec<Vec<SlotOutcome>> = Vec::new();
        let mut obs = |_: u64, out: &[SlotOutcome]| history.push(out.to_vec());
        run_observed(&dep, scheme.as_ref(), &SchemeContext::new(p), &controls, 31, Some(&mut obs)).unwrap();
        let mut checked = 0;
        for slot in 1..history.len() {
            let prev: Vec<(usize, f64)> = (0..dep.len()).filter(|&m| history[slot - 1][m].attempted).map(|m| (m, 1.0)).collect();
            let ch = ChannelRealization::for_slot(31, slot as u64 - 1);
            for node in 0..dep.len() {
                let want = measure_interference(node, &prev, &ch, &pl, MeasurementMode::Instant, true);
                assert_eq!(history[slot][node].measured_interference, want);
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn rejects_bad_controls() {
        let p = params(Duplex::Half);
        let dep = Deployment::empty(100.0, 2.0);
        let bad = SimulationControls {
            slots: 5,
            warmup: 5,
            ..Default::default()
        };
        assert!(run(&dep, &MaxTx, &SchemeContext::new(p), &bad, 0).is_err());
        let bad = SimulationControls {
            slots: 5,
            warmup: 0,
            ..Default::default()
        };
        assert!(run(&dep, &MaxTx, &SchemeContext::new(p), &bad, 0).is_err());
    }

    #[test]
    fn tagged_link_matches_product_form() {
        let p = params(Duplex::Half).with_lambda(0.01);
        let dep = sample_deployment(&p, 100.0, 21).unwrap();
        let q = link_success_product(&dep, &p, 0, 0.3);
        let n = 20_000;
        let hits = tagged_link_success(&dep, &p, 0, 0.3, n, 5).unwrap();
        let se = (q * (1.0 - q) / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - q).abs() < 3.0 * se, "{} vs {q}", hits as f64 / n as f64);
    }
}
