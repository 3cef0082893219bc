use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::minorization::{regen_prob, MinorizationConfig};
use super::truncnorm::std_normal_cdf;
use super::{gibbs_step_random_scan, ProbitModel, ProbitState};
use crate::chain::{extract_identity_tours, SplitChainTrace, TourSequence};
use crate::error::{input_err, Error, Result};
use crate::rng;

const MAX_Q_ATTEMPTS: usize = 1_000_000;
const LAG: usize = 2;

/// Regeneration probability computed for the window starting at `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegenProbRecord {
    pub step: usize,
    pub eta: f64,
    pub bell: bool,
}

#[derive(Debug, Clone)]
pub struct RegenExperiment {
    pub tours: TourSequence,
    pub records: Vec<RegenProbRecord>,
    pub steps: usize,
    pub seed: u64,
    pub regenerations: usize,
    /// Windows whose unclamped `eta` fell outside `[0, 1]`.
    pub clamped: usize,
    /// Windows that refreshed both blocks (the only ones with `eta > 0`).
    pub mixed_windows: usize,
}

impl RegenExperiment {
    /// Regenerations per evaluated window.
    pub fn regen_fraction(&self) -> f64 {
        if self.records.is_empty() {
            0.0
        } else {
            self.regenerations as f64 / self.records.len() as f64
        }
    }

    pub fn max_eta(&self) -> f64 {
        self.records.iter().map(|r| r.eta).fold(0.0, f64::max)
    }
}

/// Draws `(beta, z)` from the minorizing measure: `beta ~ pi(. | z*)`
/// restricted to `D*`, then `z ~ pi(. | beta)`.
pub fn sample_minorizing<R: Rng + ?Sized>(
    model: &ProbitModel,
    config: &MinorizationConfig,
    rng: &mut R,
) -> Result<ProbitState> {
    let z_star = DVector::from_column_slice(&config.z_star);
    for _ in 0..MAX_Q_ATTEMPTS {
        let beta = model.sample_beta(&z_star, rng);
        if config.contains(&beta) {
            let z = model.sample_z(&beta, rng);
            return Ok(ProbitState::new(beta, z));
        }
    }
    Err(Error::Tuning("D* has negligible mass under pi(beta | z*)".into()))
}

/// Runs the random-scan sampler for `steps` states, computes `eta_i` on the
/// non-overlapping two-step windows starting at `i = 1, 3, 5, ...`, marks
/// bells by Bernoulli draws and cuts tours of `beta` with lag 2.
pub fn run_regen_experiment(
    model: &ProbitModel,
    config: &MinorizationConfig,
    steps: usize,
    seed: u64,
) -> Result<RegenExperiment> {
    run_regen_experiment_with(model, config, steps, seed, model.p(), |s, out| {
        out.copy_from_slice(s.beta.as_slice())
    })
}

/// As [`run_regen_experiment`] with tours of a caller-supplied `f(beta, z)`.
pub fn run_regen_experiment_with<F>(
    model: &ProbitModel,
    config: &MinorizationConfig,
    steps: usize,
    seed: u64,
    f_dim: usize,
    mut f: F,
) -> Result<RegenExperiment>
where
    F: FnMut(&ProbitState, &mut [f64]),
{
    if steps < 1000 {
        return input_err(format!("need at least 1000 steps, got {steps}"));
    }
    let mut rng = rng::seeded(seed);
    let mut fvals = vec![0.0; steps * f_dim];
    let mut bells = vec![false; steps];
    let mut records = Vec::with_capacity(steps / LAG);
    let (mut clamped, mut mixed) = (0usize, 0usize);

    let mut current = sample_minorizing(model, config, &mut rng)?;
    f(&current, &mut fvals[..f_dim]);
    let mut t = 0usize;
    while t + 1 < steps {
        let mid = gibbs_step_random_scan(&current, model, &mut rng);
        f(&mid, &mut fvals[(t + 1) * f_dim..(t + 2) * f_dim]);
        if t + LAG >= steps {
            break;
        }
        let end = gibbs_step_random_scan(&mid, model, &mut rng);
        f(&end, &mut fvals[(t + 2) * f_dim..(t + 3) * f_dim]);

        let path = match end.last_updates {
            [Some(a), Some(b)] => [a, b],
            _ => unreachable!("two steps were taken"),
        };
        mixed += usize::from(path[0] != path[1]);
        let prob = regen_prob(&current, &end, path, config, model, t + 1)?;
        clamped += usize::from(prob.clamped());
        let bell = prob.eta > 0.0 && rng.random::<f64>() < prob.eta;
        bells[t] = bell;
        records.push(RegenProbRecord {
            step: t + 1,
            eta: prob.eta,
            bell,
        });
        current = end;
        t += LAG;
    }

    let trace = SplitChainTrace::from_parts(fvals, bells, f_dim, LAG, seed)?;
    let tours = extract_identity_tours(&trace)?;
    let regenerations = tours.len();
    Ok(RegenExperiment {
        tours,
        records,
        steps,
        seed,
        regenerations,
        clamped,
        mixed_windows: mixed,
    })
}

/// Synthetic probit data: an intercept plus `p - 1` standard normal
/// covariates, responses drawn from the probit model with coefficients
/// alternating `0.4, -0.8, 0.4, ...`.
pub fn synthetic_design(n: usize, p: usize, seed: u64) -> (DMatrix<f64>, Vec<bool>) {
    let mut rng = rng::seeded(seed);
    let x = DMatrix::from_fn(n, p, |_, j| {
        if j == 0 {
            1.0
        } else {
            rng.sample::<f64, _>(StandardNormal)
        }
    });
    let beta = DVector::from_fn(p, |j, _| if j % 2 == 0 { 0.4 } else { -0.8 });
    let eta = &x * beta;
    let y = eta.iter().map(|&m| rng.random::<f64>() < std_normal_cdf(m)).collect();
    (x, y)
}

pub fn synthetic_dataset(n: usize, p: usize, p_scan: f64, seed: u64) -> Result<ProbitModel> {
    let (x, y) = synthetic_design(n, p, seed);
    ProbitModel::new(x, y, p_scan)
}
