//! Albert–Chib data augmentation for probit regression with a flat prior,
//! in deterministic and random scan, and regeneration detection for the
//! two-step random-scan kernel.
//!
//! The latent vector `z` has independent components
//! `z_i | beta ~ N(x_i' beta, 1)` truncated to `(0, inf)` when `y_i = 1` and
//! to `(-inf, 0]` otherwise, and `beta | z ~ N_p((X'X)^{-1} X'z, (X'X)^{-1})`.

mod experiment;
mod minorization;
pub mod truncnorm;

pub use experiment::{
    run_regen_experiment, run_regen_experiment_with, sample_minorizing, synthetic_dataset, synthetic_design,
    RegenExperiment, RegenProbRecord,
};
pub use minorization::{log_s_reduced, pilot_tune, regen_prob, MinorizationConfig, RegenProb};
pub use truncnorm::sample_truncated_normal;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Which block a Gibbs step refreshed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    Beta,
    Z,
}

/// Design, responses and the cached matrices of the `beta | z` conditional.
#[derive(Debug, Clone)]
pub struct ProbitModel {
    x: DMatrix<f64>,
    y: Vec<bool>,
    p_scan: f64,
    gram_inv: DMatrix<f64>,
    gram_inv_chol: DMatrix<f64>,
    /// `(X'X)^{-1} X'`, mapping `z` to the conditional mean of `beta`.
    proj: DMatrix<f64>,
    hat: DMatrix<f64>,
    /// `0.5 log det (X'X)^{-1}`.
    half_log_det_cov: f64,
}

impl ProbitModel {
    pub fn new(x: DMatrix<f64>, y: Vec<bool>, p_scan: f64) -> Result<Self> {
        let (n, p) = x.shape();
        if n == 0 || p == 0 {
            return input_err("design matrix is empty");
        }
        if y.len() != n {
            return input_err(format!("{} responses for {} design rows", y.len(), n));
        }
        if !(0.0..=1.0).contains(&p_scan) {
            return input_err(format!("scan probability {p_scan} outside [0, 1]"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return input_err("design matrix has non-finite entries");
        }
        if n < p {
            return Err(Error::RankDeficient(format!("{n} rows for {p} columns")));
        }
        let gram = x.transpose() * &x;
        let chol = gram
            .clone()
            .cholesky()
            .ok_or_else(|| Error::RankDeficient("X'X is not positive definite".into()))?;
        let gram_inv = chol.inverse();
        let inv_chol = gram_inv
            .clone()
            .cholesky()
            .ok_or_else(|| Error::RankDeficient("(X'X)^{-1} is not positive definite".into()))?;
        let gram_inv_chol = inv_chol.l();
        let half_log_det_cov = gram_inv_chol.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let proj = &gram_inv * x.transpose();
        let hat = &x * &proj;
        let model = Self {
            x,
            y,
            p_scan,
            gram_inv,
            gram_inv_chol,
            proj,
            hat,
            half_log_det_cov,
        };
        if model.hat_idempotency_error() > 1e-8 {
            return Err(Error::RankDeficient("design matrix is numerically singular".into()));
        }
        Ok(model)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &[bool] {
        &self.y
    }

    pub fn p_scan(&self) -> f64 {
        self.p_scan
    }

    pub fn with_p_scan(mut self, p_scan: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_scan) {
            return input_err(format!("scan probability {p_scan} outside [0, 1]"));
        }
        self.p_scan = p_scan;
        Ok(self)
    }

    pub fn gram_inv(&self) -> &DMatrix<f64> {
        &self.gram_inv
    }

    /// Hat matrix `X (X'X)^{-1} X'`.
    pub fn hat(&self) -> &DMatrix<f64> {
        &self.hat
    }

    /// `max |H^2 - H|`.
    pub fn hat_idempotency_error(&self) -> f64 {
        (&self.hat * &self.hat - &self.hat).amax()
    }

    /// Mean of `beta | z`.
    pub fn beta_mean(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.proj * z
    }

    /// `z' H z`.
    pub fn hat_quadratic(&self, z: &DVector<f64>) -> f64 {
        let xz = self.x.transpose() * z;
        xz.dot(&(&self.gram_inv * &xz))
    }

    /// `log pi(beta | z)`.
    pub fn log_density_beta(&self, beta: &DVector<f64>, z: &DVector<f64>) -> f64 {
        let r = beta - self.beta_mean(z);
        // r' (X'X) r = || X r ||^2
        let q = (&self.x * r).norm_squared();
        -0.5 * q - self.half_log_det_cov - 0.5 * self.p() as f64 * LN_2PI
    }

    /// `log pi(z | beta)`; `-inf` when a sign disagrees with `y`.
    pub fn log_density_z(&self, z: &DVector<f64>, beta: &DVector<f64>) -> f64 {
        let eta = &self.x * beta;
        self.y
            .iter()
            .zip(z.iter().zip(eta.iter()))
            .map(|(&yi, (&zi, &m))| truncnorm::log_truncated_normal_pdf(zi, m, yi))
            .sum()
    }

    pub fn sample_beta<R: Rng + ?Sized>(&self, z: &DVector<f64>, rng: &mut R) -> DVector<f64> {
        let xi = DVector::from_fn(self.p(), |_, _| rng.sample::<f64, _>(StandardNormal));
        self.beta_mean(z) + &self.gram_inv_chol * xi
    }

    pub fn sample_z<R: Rng + ?Sized>(&self, beta: &DVector<f64>, rng: &mut R) -> DVector<f64> {
        let eta = &self.x * beta;
        DVector::from_iterator(
            self.n(),
            self.y
                .iter()
                .zip(eta.iter())
                .map(|(&yi, &m)| sample_truncated_normal(m, yi, rng)),
        )
    }
}

/// Current `(beta, z)` and the blocks refreshed by the last two steps
/// (`last_updates[1]` is the most recent).
#[derive(Debug, Clone, PartialEq)]
pub struct ProbitState {
    pub beta: DVector<f64>,
    pub z: DVector<f64>,
    pub last_updates: [Option<Block>; 2],
}

impl ProbitState {
    pub fn new(beta: DVector<f64>, z: DVector<f64>) -> Self {
        Self {
            beta,
            z,
            last_updates: [None, None],
        }
    }

    /// `beta = 0` and `z_i = +-1` matching the responses.
    pub fn initial(model: &ProbitModel) -> Self {
        let z = DVector::from_iterator(model.n(), model.y().iter().map(|&y| if y { 1.0 } else { -1.0 }));
        Self::new(DVector::zeros(model.p()), z)
    }

    pub fn signs_consistent(&self, model: &ProbitModel) -> bool {
        self.z
            .iter()
            .zip(model.y())
            .all(|(&z, &y)| if y { z > 0.0 } else { z <= 0.0 })
    }

    fn record(&mut self, block: Block) {
        self.last_updates = [self.last_updates[1], Some(block)];
    }
}

/// One deterministic-scan iteration: `z | beta`, then `beta | z`.
pub fn gibbs_step_deterministic<R: Rng + ?Sized>(state: &ProbitState, model: &ProbitModel, rng: &mut R) -> ProbitState {
    let z = model.sample_z(&state.beta, rng);
    let beta = model.sample_beta(&z, rng);
    ProbitState {
        beta,
        z,
        last_updates: [Some(Block::Z), Some(Block::Beta)],
    }
}

/// One random-scan step: with probability `p_scan` refresh `beta | z`,
/// otherwise `z | beta`.
pub fn gibbs_step_random_scan<R: Rng + ?Sized>(state: &ProbitState, model: &ProbitModel, rng: &mut R) -> ProbitState {
    let mut next = state.clone();
    let u: f64 = rng.random();
    if u < model.p_scan() {
        next.beta = model.sample_beta(&state.z, rng);
        next.record(Block::Beta);
    } else {
        next.z = model.sample_z(&state.beta, rng);
        next.record(Block::Z);
    }
    next
}
