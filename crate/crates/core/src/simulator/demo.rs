use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Power gains of the two-pair example; direct gains include path loss.
/// `h12` is from transmitter 1 to receiver 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemoGains {
    pub h11: f64,
    pub h22: f64,
    pub h12: f64,
    pub h21: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemoMode {
    MaxTx,
    PcTx,
    RandomTx,
}

impl DemoMode {
    pub const ALL: [DemoMode; 3] = [DemoMode::MaxTx, DemoMode::PcTx, DemoMode::RandomTx];

    pub fn as_str(self) -> &'static str {
        match self {
            DemoMode::MaxTx => "max-tx",
            DemoMode::PcTx => "pc-tx",
            DemoMode::RandomTx => "random-tx",
        }
    }
}

/// Operating point of one access mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemoRow {
    pub mode: DemoMode,
    /// Time-averaged SIR at each receiver (zero while its transmitter is
    /// silent).
    pub sir: [f64; 2],
    /// Mean SIR over the slots in which the transmitter is active.
    pub sir_per_transmission: [f64; 2],
    /// Transmit-time fraction times transmit power.
    pub resource: [f64; 2],
}

impl DemoRow {
    pub fn sir_sum(&self) -> f64 {
        self.sir[0] + self.sir[1]
    }

    pub fn resource_sum(&self) -> f64 {
        self.resource[0] + self.resource[1]
    }
}

/// SIRs and resource use of the two-pair example under each mode.
///
/// Max TX transmits at unit power, PC TX at power `OP_i`, Random TX at unit
/// power with probability `OP_i`; `external` is a constant interference at
/// both receivers.
pub fn two_pair_demo(gains: DemoGains, external: f64, op: [f64; 2]) -> Result<Vec<DemoRow>> {
    let g = [gains.h11, gains.h22, gains.h12, gains.h21];
    if g.iter().any(|&h| !(h >= 0.0)) {
        return Err(invalid("gains", "must be non-negative"));
    }
    if !(external >= 0.0) {
        return Err(invalid("external_interference", "must be non-negative"));
    }
    if op.iter().any(|o| !(0.0..=1.0).contains(o)) {
        return Err(invalid("op", "must lie in [0, 1]"));
    }
    let direct = [gains.h11, gains.h22];
    // cross[i]: gain from the other transmitter into receiver i
    let cross = [gains.h21, gains.h12];
    let ratio = |s: f64, i: f64| if i == 0.0 { f64::INFINITY } else { s / i };

    let rows = DemoMode::ALL
        .iter()
        .map(|&mode| {
            let mut row = DemoRow {
                mode,
                sir: [0.0; 2],
                sir_per_transmission: [0.0; 2],
                resource: [0.0; 2],
            };
            for i in 0..2 {
                let j = 1 - i;
                let (per_tx, avg, resource) = match mode {
                    DemoMode::MaxTx => {
                        let s = ratio(direct[i], cross[i] + external);
                        (s, s, 1.0)
                    }
                    DemoMode::PcTx => {
                        let s = ratio(op[i] * direct[i], op[j] * cross[i] + external);
                        (s, s, op[i])
                    }
                    DemoMode::RandomTx => {
                        let both = ratio(direct[i], cross[i] + external);
                        let alone = ratio(direct[i], external);
                        let per_tx = op[j] * both + (1.0 - op[j]) * alone;
                        (per_tx, op[i] * per_tx, op[i])
                    }
                };
                row.sir[i] = avg;
                row.sir_per_transmission[i] = per_tx;
                row.resource[i] = resource;
            }
            row
        })
        .collect();
    Ok(rows)
}
