use super::{AccessScheme, ContentionView, CsmaConfig, SchemeContext};
use crate::error::Result;
use crate::model::{Channel, Deployment, PathLoss, PolicyDecision};
use crate::rng::{derive, Stream};

const MARK_SALT: u64 = 0x6373_6D61;

/// Carrier sensing with random backoff.
///
/// Every node contends each slot. Contenders draw a backoff mini-slot; in
/// increasing mini-slot order a node transmits iff the power it senses from
/// nodes already admitted is below the threshold. Nodes that share a
/// mini-slot cannot hear each other and are admitted together.
#[derive(Debug, Clone, Copy)]
pub struct CsmaCa {
    config: CsmaConfig,
}

impl CsmaCa {
    pub const NAME: &'static str = "csma-ca";

    pub fn new(config: CsmaConfig) -> Self {
        Self { config }
    }

    pub fn config(&self) -> &CsmaConfig {
        &self.config
    }
}

impl AccessScheme for CsmaCa {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn uses_measurement(&self) -> bool {
        false
    }

    fn decide(&self, _interference: f64, _ctx: &SchemeContext, _stream: &mut Stream) -> Result<PolicyDecision> {
        Ok(PolicyDecision::transmit(1.0, 1.0))
    }

    fn contend(&self, view: &ContentionView<'_>, decisions: &mut [PolicyDecision]) {
        let contenders: Vec<usize> = (0..decisions.len()).filter(|&i| decisions[i].delta).collect();
        let window = self.config.backoff_window;
        let mark_seed = derive(view.seed, MARK_SALT);
        let marks: Vec<u32> = contenders
            .iter()
            .map(|&i| {
                let u = Stream::keyed(mark_seed, view.slot, i as u64).uniform();
                ((u * window as f64) as u32).min(window - 1)
            })
            .collect();
        let admitted = csma_schedule(
            view.deployment,
            view.path_loss,
            view.channel,
            &contenders,
            &marks,
            self.config.sense_threshold,
            view.exclude_partner,
        );
        for (&node, ok) in contenders.iter().zip(admitted) {
            if !ok {
                decisions[node] = PolicyDecision::silent(decisions[node].p);
            }
        }
    }

    fn airtime(&self) -> f64 {
        1.0 - self.config.contention_overhead
    }
}

/// Resolves contention among `contenders` with backoff `marks` (parallel
/// slices). Returns, per contender, whether it transmits.
///
/// The outcome depends only on the marks and the channel, not on the order
/// in which contenders are listed.
pub fn csma_schedule(
    deployment: &Deployment,
    path_loss: &PathLoss,
    channel: &dyn Channel,
    contenders: &[usize],
    marks: &[u32],
    threshold: f64,
    exclude_partner: bool,
) -> Vec<bool> {
    assert_eq!(contenders.len(), marks.len());
    debug_assert!(contenders.iter().all(|&c| c < deployment.len()));
    let mut order: Vec<usize> = (0..contenders.len()).collect();
    order.sort_by_key(|&k| (marks[k], contenders[k]));
    let mut sensed = vec![0.0; contenders.len()];
    let mut admitted = vec![false; contenders.len()];
    let mut start = 0;
    while start < order.len() {
        let mark = marks[order[start]];
        let end = start + order[start..].iter().take_while(|&&k| marks[k] == mark).count();
        let level = &order[start..end];
        for &k in level {
            admitted[k] = sensed[k] < threshold;
        }
        // newly admitted nodes raise the sensed power of later contenders
        for &k in level.iter().filter(|&&k| admitted[k]) {
            let m = contenders[k];
            for &j in &order[end..] {
                let node = contenders[j];
                if exclude_partner && node == Deployment::partner(m) {
                    continue;
                }
                sensed[j] += channel.gain(m, node) * path_loss.get(m, node);
            }
        }
        start = end;
    }
    admitted
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Point, TableChannel};

    fn line(n: usize, spacing: f64) -> Deployment {
        let pairs: Vec<(Point, f64)> = (0..n).map(|i| (Point::new(i as f64 * spacing, 0.0), 1.5)).collect();
        Deployment::from_pairs(1000.0, 1.0, &pairs)
    }

    #[test]
    fn single_contender_transmits() {
        let dep = line(1, 10.0);
        let pl = PathLoss::new(&dep, 4.0);
        let ch = TableChannel::new(1.0);
        assert_eq!(csma_schedule(&dep, &pl, &ch, &[0], &[5], 1e-9, true), vec![true]);
    }

    #[test]
    fn pairwise_exclusion_keeps_lower_mark() {
        let dep = line(2, 5.0);
        let pl = PathLoss::new(&dep, 4.0);
        let ch = TableChannel::new(1.0);
        // nodes 0 and 2 are 5 m apart: received power 5^-4 = 1.6e-3
        let got = csma_schedule(&dep, &pl, &ch, &[0, 2], &[7, 3], 1e-5, true);
        assert_eq!(got, vec![false, true]);
        let got = csma_schedule(&dep, &pl, &ch, &[0, 2], &[1, 3], 1e-5, true);
        assert_eq!(got, vec![true, false]);
        // same mini-slot: neither hears the other
        let got = csma_schedule(&dep, &pl, &ch, &[0, 2], &[2, 2], 1e-5, true);
        assert_eq!(got, vec![true, true]);
    }

    #[test]
    fn partner_is_not_sensed_when_excluded() {
        let dep = line(1, 10.0);
        let pl = PathLoss::new(&dep, 4.0);
        let ch = TableChannel::new(1.0);
        assert_eq!(csma_schedule(&dep, &pl, &ch, &[0, 1], &[0, 1], 1e-3, true), vec![true, true]);
        assert_eq!(csma_schedule(&dep, &pl, &ch, &[0, 1], &[0, 1], 1e-3, false), vec![true, false]);
    }

    #[test]
    fn infinite_threshold_admits_everyone() {
        let dep = line(30, 1.0);
        let pl = PathLoss::new(&dep, 4.0);
        let ch = TableChannel::new(1.0);
        let contenders: Vec<usize> = (0..dep.len()).collect();
        let marks: Vec<u32> = contenders.iter().map(|&i| (i * 7 % 16) as u32).collect();
        let got = csma_schedule(&dep, &pl, &ch, &contenders, &marks, f64::INFINITY, true);
        assert!(got.iter().all(|&b| b));
    }

    #[test]
    fn order_independent() {
        let dep = line(20, 3.0);
        let pl = PathLoss::new(&dep, 3.5);
        let ch = crate::model::ChannelRealization::new(99);
        let contenders: Vec<usize> = (0..dep.len()).collect();
        let marks: Vec<u32> = contenders.iter().map(|&i| ((i * 37 + 11) % 13) as u32).collect();
        let base = csma_schedule(&dep, &pl, &ch, &contenders, &marks, 1e-3, true);
        let mut idx: Vec<usize> = (0..contenders.len()).collect();
        idx.reverse();
        idx.rotate_left(7);
        let c2: Vec<usize> = idx.iter().map(|&k| contenders[k]).collect();
        let m2: Vec<u32> = idx.iter().map(|&k| marks[k]).collect();
        let got = csma_schedule(&dep, &pl, &ch, &c2, &m2, 1e-3, true);
        for (pos, &k) in idx.iter().enumerate() {
            assert_eq!(got[pos], base[k]);
        }
        assert!(base.iter().any(|&b| !b) && base.iter().any(|&b| b));
    }
}
