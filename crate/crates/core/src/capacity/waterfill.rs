use serde::{Deserialize, Serialize};

use super::{CapacityError, LogBase};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterFilling {
    pub allocation: Vec<f64>,
    pub water_level: f64,
    pub value: f64,
}

/// Classic water-filling over parallel single-user channels with power gains
/// `gains[f] = |h_f|²`: `P_f = max(0, μ - 1/gains[f])` with `Σ P_f = budget`.
/// The water level `μ` is found by bisection.
pub fn waterfilling_reference(
    gains: &[f64],
    budget: f64,
    base: LogBase,
) -> Result<WaterFilling, CapacityError> {
    if !budget.is_finite() || budget < 0.0 {
        return Err(CapacityError::BadBudget(budget));
    }
    let usable = gains.iter().any(|&g| g > 0.0);
    if budget == 0.0 || !usable {
        return Ok(WaterFilling {
            allocation: vec![0.0; gains.len()],
            water_level: 0.0,
            value: 0.0,
        });
    }
    let fill = |mu: f64| -> Vec<f64> {
        gains
            .iter()
            .map(|&g| if g > 0.0 { (mu - 1.0 / g).max(0.0) } else { 0.0 })
            .collect()
    };
    let floor = gains
        .iter()
        .filter(|&&g| g > 0.0)
        .map(|&g| 1.0 / g)
        .fold(f64::INFINITY, f64::min);
    let (mut lo, mut hi) = (floor, floor + budget);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if fill(mid).iter().sum::<f64>() > budget {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let mu = 0.5 * (lo + hi);
    let allocation = fill(mu);
    let value = gains
        .iter()
        .zip(&allocation)
        .map(|(g, p)| base.log1p(g * p))
        .sum();
    Ok(WaterFilling {
        allocation,
        water_level: mu,
        value,
    })
}
