//! Distinguished-point minorization of the Albert–Chib kernel and the
//! regeneration probability of a two-step random-scan window.
//!
//! For `beta` in the box `D* = prod [c_j, d_j]` and any `z`,
//!
//! ```text
//! pi(beta | z) >= exp(L(z)) pi(beta | z*),
//! L(z) = sum_j (c_j t_j 1{t_j > 0} + d_j t_j 1{t_j < 0}) - z'Hz/2 + z*'Hz*/2,
//! t = X'(z - z*).
//! ```
//!
//! The normalizing constant of the minorizing measure appears once as a
//! factor of the minorization constant and once as its reciprocal in the
//! measure, so it never needs to be computed.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{gibbs_step_deterministic, Block, ProbitModel, ProbitState};
use crate::error::{input_err, Error, Result};
use crate::rng;

/// Distinguished point `z*` and small set `D*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorizationConfig {
    pub z_star: Vec<f64>,
    /// `(c_j, d_j)` for each coefficient.
    pub bounds: Vec<(f64, f64)>,
}

impl MinorizationConfig {
    pub fn new(z_star: Vec<f64>, bounds: Vec<(f64, f64)>) -> Result<Self> {
        if let Some((j, _)) = bounds.iter().enumerate().find(|(_, (c, d))| !(c < d)) {
            return input_err(format!("box side {j} is empty"));
        }
        if z_star.iter().any(|v| !v.is_finite()) {
            return input_err("z* has non-finite entries");
        }
        Ok(Self { z_star, bounds })
    }

    pub fn contains(&self, beta: &DVector<f64>) -> bool {
        beta.iter().zip(&self.bounds).all(|(&b, &(c, d))| c <= b && b <= d)
    }

    fn check_dims(&self, model: &ProbitModel) -> Result<()> {
        if self.z_star.len() != model.n() || self.bounds.len() != model.p() {
            return input_err(format!(
                "config has |z*| = {}, {} box sides; model has n = {}, p = {}",
                self.z_star.len(),
                self.bounds.len(),
                model.n(),
                model.p()
            ));
        }
        Ok(())
    }
}

/// Chooses `z*` as the average latent draw of a deterministic-scan pilot run
/// and `D*` from the `(quantile, 1 - quantile)` empirical quantiles of the
/// pilot `beta` draws.
pub fn pilot_tune(model: &ProbitModel, iters: usize, quantile: f64, seed: u64) -> Result<MinorizationConfig> {
    if iters < 100 {
        return input_err(format!("pilot needs at least 100 iterations, got {iters}"));
    }
    if !(quantile > 0.0 && quantile < 0.5) {
        return input_err(format!("quantile {quantile} outside (0, 0.5)"));
    }
    let mut rng = rng::seeded(seed);
    let mut state = ProbitState::initial(model);
    let mut z_sum = DVector::<f64>::zeros(model.n());
    let mut betas: Vec<Vec<f64>> = vec![Vec::with_capacity(iters); model.p()];
    for _ in 0..iters {
        state = gibbs_step_deterministic(&state, model, &mut rng);
        z_sum += &state.z;
        for (col, b) in betas.iter_mut().zip(state.beta.iter()) {
            col.push(*b);
        }
    }
    let z_star: Vec<f64> = (z_sum / iters as f64).iter().copied().collect();
    let mut bounds = Vec::with_capacity(model.p());
    for (j, col) in betas.iter_mut().enumerate() {
        col.sort_by(f64::total_cmp);
        let (c, d) = (
            empirical_quantile(col, quantile),
            empirical_quantile(col, 1.0 - quantile),
        );
        if !(c < d) {
            return Err(Error::Tuning(format!("pilot draws of beta_{} are degenerate", j + 1)));
        }
        bounds.push((c, d));
    }
    MinorizationConfig::new(z_star, bounds)
}

/// Linear-interpolation quantile of sorted data.
fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `log(s(z) / eps)` for the one-step minorization constant `s`.
pub fn log_s_reduced(z: &DVector<f64>, config: &MinorizationConfig, model: &ProbitModel) -> Result<f64> {
    config.check_dims(model)?;
    if z.len() != model.n() {
        return input_err(format!("z has length {}, expected {}", z.len(), model.n()));
    }
    let z_star = DVector::from_column_slice(&config.z_star);
    let t = model.x().transpose() * (z - &z_star);
    let linear: f64 = t
        .iter()
        .zip(&config.bounds)
        .map(|(&tj, &(c, d))| {
            if tj > 0.0 {
                c * tj
            } else if tj < 0.0 {
                d * tj
            } else {
                0.0
            }
        })
        .sum();
    Ok(linear - 0.5 * model.hat_quadratic(z) + 0.5 * model.hat_quadratic(&z_star))
}

/// Regeneration probability of one window together with its unclamped value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegenProb {
    pub eta: f64,
    pub raw: f64,
}

impl RegenProb {
    const ZERO: RegenProb = RegenProb { eta: 0.0, raw: 0.0 };

    pub fn clamped(&self) -> bool {
        self.eta != self.raw
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `eta_i = s'(z_i) Q(beta_{i+2}, z_{i+2}) / k2(beta_{i+2}, z_{i+2} | beta_i, z_i)`.
///
/// `k2` is the density of the absolutely continuous part of the two-step
/// random-scan kernel, i.e. the two mixed-scan terms
/// `p(1-p) [pi(beta2 | z2) pi(z2 | beta0) + pi(z2 | beta2) pi(beta2 | z0)]`.
/// Windows that refresh the same block twice end on an atom of the kernel
/// and get `eta = 0`, as do windows with `beta2` outside `D*`.
pub fn regen_prob(
    from: &ProbitState,
    to: &ProbitState,
    path: [Block; 2],
    config: &MinorizationConfig,
    model: &ProbitModel,
    step: usize,
) -> Result<RegenProb> {
    config.check_dims(model)?;
    let p = model.p_scan();
    if p * (1.0 - p) == 0.0 || path[0] == path[1] || !config.contains(&to.beta) {
        return Ok(RegenProb::ZERO);
    }
    let z_star = DVector::from_column_slice(&config.z_star);
    let log_z2_given_b2 = model.log_density_z(&to.z, &to.beta);
    let log_num = log_s_reduced(&from.z, config, model)? + model.log_density_beta(&to.beta, &z_star) + log_z2_given_b2;
    let z_then_beta = model.log_density_beta(&to.beta, &to.z) + model.log_density_z(&to.z, &from.beta);
    let beta_then_z = log_z2_given_b2 + model.log_density_beta(&to.beta, &from.z);
    let log_den = log_add_exp(z_then_beta, beta_then_z);
    if !log_den.is_finite() || log_num.is_nan() {
        return Err(Error::Numerical {
            step,
            msg: format!("two-step kernel density is not finite (log = {log_den})"),
        });
    }
    let raw = (log_num - log_den).exp();
    Ok(RegenProb {
        eta: raw.clamp(0.0, 1.0),
        raw,
    })
}
