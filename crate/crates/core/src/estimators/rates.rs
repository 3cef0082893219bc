use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};

/// Strong-invariance rate exponents and the implied batch-size bound.
///
/// With `2 + delta` moments of the absolute tour sums and `p` moments of the
/// regeneration time, partial sums are within `O(n^beta log n)` of a scaled
/// Brownian motion, where
/// `beta_polynomial = max{1/(2+delta), 1/(2p), 1/4}`. For geometrically
/// ergodic chains every moment of the regeneration time exists and
/// `beta_geometric = max{1/(2+delta), 1/4}`. Batch means is then strongly
/// consistent for `b_n = floor(n^nu)` with `nu > nu_lower = 2 beta_geometric`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub delta: f64,
    pub p: f64,
    pub geometric: bool,
    pub beta_polynomial: f64,
    pub beta_geometric: f64,
    /// The exponent that applies to this chain.
    pub beta: f64,
    pub nu_lower: f64,
}

impl RateReport {
    /// Whether `b_n = floor(n^nu)` meets the batch-size lower bound.
    pub fn admits_batch_exponent(&self, nu: f64) -> bool {
        nu > self.nu_lower && nu < 1.0
    }
}

pub fn sip_rate_exponent(delta: f64, p: f64, geometric: bool) -> Result<RateReport> {
    if !(delta > 0.0) || delta.is_nan() {
        return input_err(format!("delta = {delta} must be positive"));
    }
    if !(p > 1.0) {
        return input_err(format!("p = {p} must exceed 1"));
    }
    let moment = 1.0 / (2.0 + delta);
    let beta_polynomial = moment.max(1.0 / (2.0 * p)).max(0.25);
    let beta_geometric = moment.max(0.25);
    let nu_lower = (2.0 / (2.0 + delta)).max(0.5);
    Ok(RateReport {
        delta,
        p,
        geometric,
        beta_polynomial,
        beta_geometric,
        beta: if geometric { beta_geometric } else { beta_polynomial },
        nu_lower,
    })
}
