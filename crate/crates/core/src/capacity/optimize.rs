//! Power allocation across carriers by projected gradient ascent.
//!
//! The objective is a sum of concave terms: `log(1 + Σ a_j P_j)` on each
//! carrier, plus `log(1 + c P) - log(1 + b P)` with `c ≥ b` for the hub
//! source. The feasible set is a product of per-transmitter sets
//! `{p ≥ 0, Σ_f p_f ≤ P_j}`, each projected onto exactly.

use std::collections::{BTreeMap, VecDeque};

use super::{
    achievable_rates_single_carrier, CapacityError, CapacityReport, LogBase, MacZBcChannel,
    MessageRate, PowerAllocation,
};
use crate::network::ChannelInstance;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Target norm of the projected gradient, in the chosen log base.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub log_base: LogBase,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: 100_000,
            log_base: LogBase::Two,
        }
    }
}

/// Iterations without a new smallest KKT residual or a resolvable rise in the
/// objective after which the search gives up. The objective alone is useless
/// as a stopping signal: near the optimum it moves by roughly the residual
/// squared, which is lost to rounding long before the residual is tight.
const STALL_ITERATIONS: usize = 500;
const ARMIJO: f64 = 1e-4;
/// Objective values remembered by the nonmonotone acceptance test.
const MEMORY: usize = 10;
const LAMBDA_MIN: f64 = 1e-12;
const LAMBDA_MAX: f64 = 1e12;

/// Euclidean projection onto `{p ≥ 0, Σ p ≤ budget}`.
pub(crate) fn project_capped_simplex(v: &[f64], budget: f64) -> Vec<f64> {
    let clipped: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
    if clipped.iter().sum::<f64>() <= budget {
        return clipped;
    }
    if budget <= 0.0 {
        return vec![0.0; v.len()];
    }
    // sort-based projection onto {p ≥ 0, Σ p = budget}
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cum += uk;
        let t = (cum - budget) / (k + 1) as f64;
        if uk - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

fn project(x: &[Vec<f64>], budgets: &[f64]) -> Vec<Vec<f64>> {
    x.iter()
        .zip(budgets)
        .map(|(row, &b)| project_capped_simplex(row, b))
        .collect()
}

fn axpy(x: &[Vec<f64>], t: f64, g: &[Vec<f64>]) -> Vec<Vec<f64>> {
    x.iter()
        .zip(g)
        .map(|(r, gr)| r.iter().zip(gr).map(|(a, b)| a + t * b).collect())
        .collect()
}

fn dot(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| x * y)
        .sum()
}

fn diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect())
        .collect()
}

/// `‖Proj(x + ∇f(x)) - x‖`, zero exactly at a KKT point.
pub(crate) fn projected_gradient_norm(x: &[Vec<f64>], grad: &[Vec<f64>], budgets: &[f64]) -> f64 {
    let d = diff(&project(&axpy(x, 1.0, grad), budgets), x);
    dot(&d, &d).sqrt()
}

/// Maximizes the parallel sum capacity over power allocations.
///
/// Spectral projected gradient: the search direction is
/// `Proj(x + λ∇f) - x` with a Barzilai-Borwein `λ`, followed by backtracking
/// with a nonmonotone Armijo test against the worst of the last few
/// objective values. A step is also accepted when the directional derivative
/// at the trial point is still nonnegative, which by concavity certifies an
/// increase that rounding may hide in the objective. Once the predicted
/// gain drops below the objective's rounding level the full step is taken.
/// On success the report's `kkt_residual` is below `config.tolerance`;
/// otherwise [`CapacityError::NonConvergence`] carries the best iterate.
pub fn optimize_power_allocation(
    instance: &ChannelInstance,
    config: &OptimizerConfig,
) -> Result<CapacityReport, CapacityError> {
    let ch = MacZBcChannel::new(instance)?;
    let base = config.log_base;
    let budgets = instance.power_budget();
    // work in the requested base so the residual is in its units
    let obj = |x: &[Vec<f64>]| base.from_nats(ch.objective_nats(x));
    let grad = |x: &[Vec<f64>]| -> Vec<Vec<f64>> {
        let mut g = ch.gradient_nats(x);
        for v in g.iter_mut().flatten() {
            *v = base.from_nats(*v);
        }
        g
    };

    let mut x = project(&PowerAllocation::uniform(instance).split, budgets);
    let mut fx = obj(&x);
    let mut gx = grad(&x);
    let mut lambda = 1.0;
    let mut history = VecDeque::from([fx]);
    let mut residual = projected_gradient_norm(&x, &gx, budgets);
    let mut iterations = 0;
    let mut stalled = 0;
    let mut best = (residual, x.clone());
    let mut best_f = fx;

    while residual >= config.tolerance && iterations < config.max_iterations {
        iterations += 1;
        let d = diff(&project(&axpy(&x, lambda, &gx), budgets), &x);
        let slope = dot(&gx, &d);
        let reference = history.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // predicted gain below what the objective can resolve
        let unresolvable = dot(&d, &d) / lambda <= 1024.0 * f64::EPSILON * fx.abs().max(1.0);
        let mut alpha = 1.0;
        let (xn, fxn, gxn) = loop {
            let trial = axpy(&x, alpha, &d);
            let ft = obj(&trial);
            let gt = grad(&trial);
            let sufficient = ft >= reference + ARMIJO * alpha * slope;
            let certified = dot(&gt, &d) >= 0.0;
            if sufficient || certified || unresolvable || alpha < 1e-30 {
                break (trial, ft, gt);
            }
            alpha *= 0.5;
        };

        let s = diff(&xn, &x);
        let y = diff(&gxn, &gx);
        let ss = dot(&s, &s);
        let sy = -dot(&s, &y);
        lambda = if ss == 0.0 {
            // collapsed line search, restart from a unit step
            1.0
        } else if sy > 0.0 {
            (ss / sy).clamp(LAMBDA_MIN, LAMBDA_MAX)
        } else {
            LAMBDA_MAX
        };

        x = xn;
        fx = fxn;
        gx = gxn;
        if history.len() == MEMORY {
            history.pop_front();
        }
        history.push_back(fx);
        residual = projected_gradient_norm(&x, &gx, budgets);
        let rising = fx > best_f + 64.0 * f64::EPSILON * best_f.abs().max(1.0);
        best_f = best_f.max(fx);
        if residual < best.0 {
            best = (residual, x.clone());
            stalled = 0;
        } else if rising {
            stalled = 0;
        } else {
            stalled += 1;
        }
        if stalled >= STALL_ITERATIONS {
            break;
        }
    }

    let (residual, x) = best;
    let report = build_report(instance, &ch, x, residual, iterations, base)?;
    if residual < config.tolerance {
        Ok(report)
    } else {
        Err(CapacityError::NonConvergence(Box::new(report)))
    }
}

fn build_report(
    instance: &ChannelInstance,
    ch: &MacZBcChannel<'_>,
    split: Vec<Vec<f64>>,
    residual: f64,
    iterations: usize,
    base: LogBase,
) -> Result<CapacityReport, CapacityError> {
    let allocation = PowerAllocation { split };
    let per_carrier: Vec<f64> = ch
        .carriers
        .iter()
        .enumerate()
        .map(|(f, g)| base.from_nats(g.nats(&allocation.carrier(f + 1))))
        .collect();
    let mut rates: BTreeMap<_, f64> = BTreeMap::new();
    for f in 1..=instance.num_carriers() {
        for (m, r) in achievable_rates_single_carrier(instance, f, &allocation.carrier(f), base)? {
            *rates.entry(m).or_default() += r;
        }
    }
    Ok(CapacityReport {
        total: per_carrier.iter().sum(),
        per_carrier,
        allocation,
        per_message_rates: rates
            .into_iter()
            .map(|(m, rate)| MessageRate {
                rx: m.rx,
                tx: m.tx,
                rate,
            })
            .collect(),
        kkt_residual: residual,
        iterations,
        log_base: base,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{sum_capacity_single_carrier, waterfilling_reference};
    use crate::network::{Link, NetworkTopology};
    use num_complex::Complex64;

    fn single_user(power_gains: &[f64], budget: f64) -> ChannelInstance {
        let t = NetworkTopology::fully_messaged(1, 1, [Link::new(1, 1)]);
        ChannelInstance::from_fn(t, power_gains.len(), vec![budget], |_, f| {
            Complex64::new(power_gains[f - 1].sqrt(), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn projection_cases() {
        assert_eq!(project_capped_simplex(&[0.2, -1.0], 1.0), vec![0.2, 0.0]);
        let p = project_capped_simplex(&[2.0, 1.0], 1.0);
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1].abs() < 1e-15);
        let p = project_capped_simplex(&[1.0, 1.0, 1.0], 1.5);
        assert!(p.iter().all(|v| (v - 0.5).abs() < 1e-15));
        assert_eq!(project_capped_simplex(&[3.0, 4.0], 0.0), vec![0.0, 0.0]);
    }

    #[test]
    fn waterfilling_example() {
        let inst = single_user(&[1.0, 4.0], 1.0);
        let r = optimize_power_allocation(&inst, &OptimizerConfig::default()).unwrap();
        assert!(r.kkt_residual < 1e-9);
        assert!((r.allocation.split[0][0] - 0.125).abs() < 1e-8);
        assert!((r.allocation.split[0][1] - 0.875).abs() < 1e-8);
        let w = waterfilling_reference(&[1.0, 4.0], 1.0, LogBase::Two).unwrap();
        assert!((r.total - w.value).abs() < 1e-6);
        assert!((r.total - 2.3399).abs() < 1e-4);
    }

    #[test]
    fn single_carrier_uses_whole_budget() {
        let t = NetworkTopology::fully_messaged(2, 2, [Link::new(1, 1), Link::new(1, 2), Link::new(2, 2)]);
        let inst = ChannelInstance::from_fn(t, 1, vec![3.0, 1.0], |l, _| {
            Complex64::new(if l == Link::new(2, 2) { 2.0 } else { 1.0 }, 0.0)
        })
        .unwrap();
        let r = optimize_power_allocation(&inst, &OptimizerConfig::default()).unwrap();
        assert_eq!(r.allocation.split, vec![vec![3.0], vec![1.0]]);
        let v = sum_capacity_single_carrier(&inst, 1, &[3.0, 1.0], LogBase::Two).unwrap();
        assert!((r.total - v).abs() < 1e-14);
        let rate_sum: f64 = r.per_message_rates.iter().map(|m| m.rate).sum();
        assert!((rate_sum - r.total).abs() < 1e-12);
    }

    #[test]
    fn identical_carriers_split_evenly() {
        let t = NetworkTopology::fully_messaged(2, 2, [Link::new(1, 1), Link::new(1, 2), Link::new(2, 2)]);
        let inst = ChannelInstance::from_fn(t, 3, vec![3.0, 6.0], |l, _| {
            Complex64::new(if l == Link::new(2, 2) { 2.0 } else { 0.7 }, 0.3)
        })
        .unwrap();
        let r = optimize_power_allocation(&inst, &OptimizerConfig::default()).unwrap();
        let one = sum_capacity_single_carrier(&inst, 1, &[1.0, 2.0], LogBase::Two).unwrap();
        assert!((r.total - 3.0 * one).abs() < 1e-9);
    }

    #[test]
    fn zero_budget_is_immediate() {
        let inst = single_user(&[1.0, 2.0], 0.0);
        let r = optimize_power_allocation(&inst, &OptimizerConfig::default()).unwrap();
        assert_eq!(r.total, 0.0);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn iteration_cap_reports_best_iterate() {
        let inst = single_user(&[1.0, 4.0, 0.2], 5.0);
        let cfg = OptimizerConfig {
            max_iterations: 1,
            tolerance: 1e-15,
            ..Default::default()
        };
        match optimize_power_allocation(&inst, &cfg) {
            Err(CapacityError::NonConvergence(r)) => {
                assert_eq!(r.iterations, 1);
                assert!(r.kkt_residual >= 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }
}
