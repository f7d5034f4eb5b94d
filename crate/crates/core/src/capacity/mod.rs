//! Sum capacity of MAC-Z-BC channels.
//!
//! Every function here expects the canonical labeling produced by
//! [`crate::classifier::is_mac_z_bc`]: the hub destination is receiver 1 and
//! the hub source is transmitter `S`. Non-canonical instances are rejected
//! with the relabeling that would fix them.
//!
//! On one carrier the sum capacity is
//!
//! ```text
//! log(1 + Σ_j |H_{1,j}|² P_j) + log((1 + H² P_S) / (1 + |H_{1,S}|² P_S)),   H = max_j |H_{j,S}|
//! ```
//!
//! and across carriers it is the maximum of the per-carrier sum over power
//! splits that respect each transmitter's budget.

mod optimize;
mod waterfill;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{self, ClassifierError, MacZBc, Verdict, WitnessEmbedding};
use crate::network::{ChannelInstance, Link, MessageId, Relabeling};

pub use optimize::{optimize_power_allocation, OptimizerConfig};
pub use waterfill::{waterfilling_reference, WaterFilling};

/// Logarithm base for all rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    /// Bits per channel use.
    #[default]
    #[serde(rename = "2")]
    Two,
    /// Nats.
    #[serde(rename = "e")]
    E,
}

impl LogBase {
    /// Converts a natural-log quantity into this base.
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            LogBase::Two => nats / std::f64::consts::LN_2,
            LogBase::E => nats,
        }
    }

    pub fn log(self, x: f64) -> f64 {
        self.from_nats(x.ln())
    }

    /// `log(1 + x)`.
    pub fn log1p(self, x: f64) -> f64 {
        self.from_nats(x.ln_1p())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CapacityError {
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error("network is not MAC-Z-BC; forbidden {} sub-network on links {:?}", .0.kind, .0.edges)]
    NotMacZBc(Box<WitnessEmbedding>),
    #[error("instance is not canonically labeled; relabel sources {:?} and destinations {:?}", .0.sources, .0.destinations)]
    NonCanonical(Relabeling),
    #[error("carrier {carrier} outside 1..={num_carriers}")]
    CarrierOutOfRange { carrier: usize, num_carriers: usize },
    #[error("expected {expected} powers, got {got}")]
    PowerLength { expected: usize, got: usize },
    #[error("power {value} for source {tx} must be finite and nonnegative")]
    BadPower { tx: usize, value: f64 },
    #[error("allocation is {rows}x{cols}, expected {sources}x{carriers}")]
    AllocationShape {
        rows: usize,
        cols: usize,
        sources: usize,
        carriers: usize,
    },
    #[error("allocation for source {tx} uses {used}, budget is {budget}")]
    OverBudget { tx: usize, used: f64, budget: f64 },
    #[error("power allocation did not converge: KKT residual {} after {} iterations", .0.kkt_residual, .0.iterations)]
    NonConvergence(Box<CapacityReport>),
    #[error("water-filling budget {0} must be finite and nonnegative")]
    BadBudget(f64),
}

/// Power split `P_j^{[f]}`: `split[j - 1][f - 1]` is transmitter `j`'s power on carrier `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub split: Vec<Vec<f64>>,
}

/// Slack allowed on each transmitter's budget.
pub fn budget_slack(budget: f64) -> f64 {
    1e-9 * budget.max(1.0)
}

impl PowerAllocation {
    pub fn zeros(sources: usize, carriers: usize) -> Self {
        Self {
            split: vec![vec![0.0; carriers]; sources],
        }
    }

    /// Each transmitter spreads its budget evenly over the carriers.
    pub fn uniform(instance: &ChannelInstance) -> Self {
        let f = instance.num_carriers();
        Self {
            split: instance
                .power_budget()
                .iter()
                .map(|&p| vec![p / f as f64; f])
                .collect(),
        }
    }

    /// Powers of all transmitters on carrier `f` (1-based).
    pub fn carrier(&self, f: usize) -> Vec<f64> {
        self.split.iter().map(|row| row[f - 1]).collect()
    }

    /// Checks shape, nonnegativity and the per-transmitter budgets.
    pub fn check(&self, instance: &ChannelInstance) -> Result<(), CapacityError> {
        let sources = instance.topology().num_sources();
        let carriers = instance.num_carriers();
        let cols = self.split.first().map_or(0, Vec::len);
        if self.split.len() != sources || self.split.iter().any(|r| r.len() != carriers) {
            return Err(CapacityError::AllocationShape {
                rows: self.split.len(),
                cols,
                sources,
                carriers,
            });
        }
        for (k, (row, &budget)) in self.split.iter().zip(instance.power_budget()).enumerate() {
            if let Some(&value) = row.iter().find(|p| !p.is_finite() || **p < 0.0) {
                return Err(CapacityError::BadPower {
                    tx: k + 1,
                    value,
                });
            }
            let used: f64 = row.iter().sum();
            if used > budget + budget_slack(budget) {
                return Err(CapacityError::OverBudget {
                    tx: k + 1,
                    used,
                    budget,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageRate {
    pub rx: usize,
    pub tx: usize,
    pub rate: f64,
}

/// Optimized sum capacity of a parallel MAC-Z-BC channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub total: f64,
    pub per_carrier: Vec<f64>,
    pub allocation: PowerAllocation,
    /// Rates of the separate-coding scheme that attains `total`, summed over carriers.
    pub per_message_rates: Vec<MessageRate>,
    /// Norm of the projected gradient at `allocation`.
    pub kkt_residual: f64,
    pub iterations: usize,
    pub log_base: LogBase,
}

/// Per-carrier power gains of a canonical MAC-Z-BC channel.
#[derive(Debug, Clone)]
pub(crate) struct CarrierGains {
    /// `|H_{1,j}(f)|²` for `j = 1..=S`.
    pub mac: Vec<f64>,
    /// `|H_{1,S}(f)|²`.
    pub hub_direct: f64,
    /// `H(f)² = max_j |H_{j,S}(f)|²`.
    pub hub_peak: f64,
}

impl CarrierGains {
    fn nats(&self, powers: &[f64]) -> f64 {
        let s = powers.len();
        let received: f64 = self.mac.iter().zip(powers).map(|(a, p)| a * p).sum();
        let ps = powers[s - 1];
        let cross = if self.hub_peak == self.hub_direct {
            0.0
        } else {
            (self.hub_peak * ps).ln_1p() - (self.hub_direct * ps).ln_1p()
        };
        received.ln_1p() + cross
    }
}

/// Canonical MAC-Z-BC channel with its per-carrier gains extracted.
#[derive(Debug, Clone)]
pub(crate) struct MacZBcChannel<'a> {
    pub instance: &'a ChannelInstance,
    pub carriers: Vec<CarrierGains>,
}

impl<'a> MacZBcChannel<'a> {
    pub fn new(instance: &'a ChannelInstance) -> Result<Self, CapacityError> {
        require_canonical(instance)?;
        let t = instance.topology();
        let s = t.num_sources();
        let carriers = (1..=instance.num_carriers())
            .map(|f| CarrierGains {
                mac: (1..=s).map(|j| instance.gain(1, j, f).norm_sqr()).collect(),
                hub_direct: instance.gain(1, s, f).norm_sqr(),
                hub_peak: (1..=t.num_destinations())
                    .map(|j| instance.gain(j, s, f).norm_sqr())
                    .fold(0.0, f64::max),
            })
            .collect();
        Ok(Self { instance, carriers })
    }

    pub fn sources(&self) -> usize {
        self.instance.topology().num_sources()
    }

    /// Objective in nats at a full allocation.
    pub fn objective_nats(&self, alloc: &[Vec<f64>]) -> f64 {
        self.carriers
            .iter()
            .enumerate()
            .map(|(f, g)| {
                let col: Vec<f64> = alloc.iter().map(|r| r[f]).collect();
                g.nats(&col)
            })
            .sum()
    }

    /// Gradient in nats with respect to every `P_j^{[f]}`.
    pub fn gradient_nats(&self, alloc: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let s = self.sources();
        let mut grad = vec![vec![0.0; self.carriers.len()]; s];
        for (f, g) in self.carriers.iter().enumerate() {
            let received: f64 = g.mac.iter().zip(alloc).map(|(a, r)| a * r[f]).sum();
            for j in 0..s {
                grad[j][f] = g.mac[j] / (1.0 + received);
            }
            let ps = alloc[s - 1][f];
            if g.hub_peak != g.hub_direct {
                grad[s - 1][f] +=
                    g.hub_peak / (1.0 + g.hub_peak * ps) - g.hub_direct / (1.0 + g.hub_direct * ps);
            }
        }
        grad
    }
}

/// Fails unless `instance` is MAC-Z-BC in canonical labeling.
pub fn require_canonical(instance: &ChannelInstance) -> Result<MacZBc, CapacityError> {
    match classifier::classify(instance.topology())? {
        Verdict::Inseparable { witness } => Err(CapacityError::NotMacZBc(Box::new(witness))),
        Verdict::Separable(m) if !m.is_canonical() => Err(CapacityError::NonCanonical(m.relabeling)),
        Verdict::Separable(m) => Ok(m),
    }
}

fn check_carrier(instance: &ChannelInstance, f: usize) -> Result<(), CapacityError> {
    if (1..=instance.num_carriers()).contains(&f) {
        Ok(())
    } else {
        Err(CapacityError::CarrierOutOfRange {
            carrier: f,
            num_carriers: instance.num_carriers(),
        })
    }
}

fn check_powers(instance: &ChannelInstance, powers: &[f64]) -> Result<(), CapacityError> {
    let s = instance.topology().num_sources();
    if powers.len() != s {
        return Err(CapacityError::PowerLength {
            expected: s,
            got: powers.len(),
        });
    }
    for (k, &p) in powers.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(CapacityError::BadPower {
                tx: k + 1,
                value: p,
            });
        }
    }
    Ok(())
}

/// Largest gain magnitude from source `S` to any destination on carrier `f`.
fn peak_gain(instance: &ChannelInstance, f: usize) -> f64 {
    let s = instance.topology().num_sources();
    (1..=instance.topology().num_destinations())
        .map(|j| instance.gain(j, s, f).norm())
        .fold(0.0, f64::max)
}

/// `H(f) = max_j |H_{j,S}(f)|`.
pub fn peak_cross_gain(instance: &ChannelInstance, f: usize) -> Result<f64, CapacityError> {
    require_canonical(instance)?;
    check_carrier(instance, f)?;
    Ok(peak_gain(instance, f))
}

/// Single-carrier sum capacity at the given transmit powers.
pub fn sum_capacity_single_carrier(
    instance: &ChannelInstance,
    f: usize,
    powers: &[f64],
    base: LogBase,
) -> Result<f64, CapacityError> {
    let ch = MacZBcChannel::new(instance)?;
    check_carrier(instance, f)?;
    check_powers(instance, powers)?;
    Ok(base.from_nats(ch.carriers[f - 1].nats(powers)))
}

/// Rates of the separate-coding scheme on one carrier.
///
/// Transmitter `S` serves only `j* = argmax_j |H_{j,S}|` (smallest `j` on
/// ties). With `j* = 1` receiver 1 decodes everything as a multiple-access
/// channel. Otherwise `W_{j*,S}` gets a point-to-point link and receiver 1
/// decodes the remaining sources treating transmitter `S` as noise. A
/// multiple-access sum rate is split in proportion to received power.
pub fn achievable_rates_single_carrier(
    instance: &ChannelInstance,
    f: usize,
    powers: &[f64],
    base: LogBase,
) -> Result<BTreeMap<MessageId, f64>, CapacityError> {
    require_canonical(instance)?;
    check_carrier(instance, f)?;
    check_powers(instance, powers)?;
    let t = instance.topology();
    let s = t.num_sources();

    let mut best = 1;
    let mut best_gain = instance.gain(1, s, f).norm_sqr();
    for j in 2..=t.num_destinations() {
        let g = instance.gain(j, s, f).norm_sqr();
        if g > best_gain {
            best = j;
            best_gain = g;
        }
    }

    let mut rates: BTreeMap<MessageId, f64> = t.messages().iter().map(|&m| (m, 0.0)).collect();
    let received = |i: usize| instance.gain(1, i, f).norm_sqr() * powers[i - 1];

    let (mac_users, mac_sum) = if best == 1 {
        let users: Vec<usize> = (1..=s).collect();
        let total: f64 = users.iter().map(|&i| received(i)).sum();
        (users, base.log1p(total))
    } else {
        let p2p = base.log1p(best_gain * powers[s - 1]);
        rates.insert(Link::new(best, s), p2p);
        let users: Vec<usize> = (1..s).collect();
        let signal: f64 = users.iter().map(|&i| received(i)).sum();
        let noise = 1.0 + received(s);
        (users, base.log1p(signal / noise))
    };

    let weights: Vec<f64> = mac_users.iter().map(|&i| received(i)).collect();
    let wsum: f64 = weights.iter().sum();
    if wsum > 0.0 {
        for (&i, w) in mac_users.iter().zip(&weights) {
            if let Some(r) = rates.get_mut(&Link::new(1, i)) {
                *r = mac_sum * (w / wsum);
            }
        }
    }
    Ok(rates)
}

/// Upper bound on the parallel sum rate under `allocation`; equal to the sum
/// of per-carrier single-carrier capacities.
pub fn converse_bound_parallel(
    instance: &ChannelInstance,
    allocation: &PowerAllocation,
    base: LogBase,
) -> Result<f64, CapacityError> {
    let ch = MacZBcChannel::new(instance)?;
    allocation.check(instance)?;
    Ok(base.from_nats(ch.objective_nats(&allocation.split)))
}

/// Analytic gradient of [`converse_bound_parallel`], shaped like the allocation.
pub fn converse_bound_gradient(
    instance: &ChannelInstance,
    allocation: &PowerAllocation,
    base: LogBase,
) -> Result<Vec<Vec<f64>>, CapacityError> {
    let ch = MacZBcChannel::new(instance)?;
    allocation.check(instance)?;
    let mut g = ch.gradient_nats(&allocation.split);
    for v in g.iter_mut().flatten() {
        *v = base.from_nats(*v);
    }
    Ok(g)
}
