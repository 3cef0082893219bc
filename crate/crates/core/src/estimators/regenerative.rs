use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{CovEstimate, EstimatorKind, Tuning};
use crate::chain::TourSequence;
use crate::error::{input_err, Error, Result};

/// How tour sums are centred before their lag-0 and lag-1 covariances are
/// formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    /// `Z_i - tau_i * f_R`, where `f_R = sum Z / sum tau`. Estimates the
    /// covariance of `Z - tau E_pi[f]`, so `Sigma_Z / mu` is consistent for
    /// `Sigma_f` when tour lengths vary.
    #[default]
    Ratio,
    /// `Z_i - Z_bar`. Agrees with `Ratio` when all tours have equal length.
    TourMean,
}

fn require_tours(tours: &TourSequence, min: usize) -> Result<()> {
    if tours.is_empty() {
        return Err(Error::NoRegenerations("the tour sequence is empty".into()));
    }
    if tours.len() < min {
        return input_err(format!("need at least {min} tours, got {}", tours.len()));
    }
    Ok(())
}

/// Regenerative mean `sum_j Z_j / sum_j tau_j`.
pub fn regen_mean(tours: &TourSequence) -> Result<Vec<f64>> {
    require_tours(tours, 1)?;
    let total = tours.total_length() as f64;
    let mut sum = vec![0.0; tours.dim];
    for t in &tours.tours {
        for (s, z) in sum.iter_mut().zip(&t.z) {
            *s += z;
        }
    }
    Ok(sum.into_iter().map(|s| s / total).collect())
}

/// Mean tour length.
pub fn regen_mu_hat(tours: &TourSequence) -> Result<f64> {
    require_tours(tours, 1)?;
    Ok(tours.total_length() as f64 / tours.len() as f64)
}

/// Lag-0 plus both lag-1 covariances of the centred tour sums, each divided
/// by `R`, with ratio centring.
pub fn regen_sigma_z_hat(tours: &TourSequence) -> Result<DMatrix<f64>> {
    regen_sigma_z_hat_with(tours, Centering::Ratio)
}

pub fn regen_sigma_z_hat_with(tours: &TourSequence, centering: Centering) -> Result<DMatrix<f64>> {
    require_tours(tours, 2)?;
    let d = tours.dim;
    let r = tours.len();
    let mut e = DMatrix::<f64>::zeros(r, d);
    match centering {
        Centering::Ratio => {
            let f = regen_mean(tours)?;
            for (i, t) in tours.tours.iter().enumerate() {
                for j in 0..d {
                    e[(i, j)] = t.z[j] - t.tau as f64 * f[j];
                }
            }
        }
        Centering::TourMean => {
            for (i, t) in tours.tours.iter().enumerate() {
                for j in 0..d {
                    e[(i, j)] = t.z[j];
                }
            }
            for j in 0..d {
                let m = e.column(j).mean();
                e.column_mut(j).add_scalar_mut(-m);
            }
        }
    }

    let head = e.rows(0, r - 1);
    let tail = e.rows(1, r - 1);
    let mut s = DMatrix::<f64>::zeros(d, d);
    for a in 0..d {
        for b in 0..=a {
            let lag0 = e.column(a).dot(&e.column(b));
            let lag1 = head.column(a).dot(&tail.column(b)) + tail.column(a).dot(&head.column(b));
            let v = (lag0 + lag1) / r as f64;
            s[(a, b)] = v;
            s[(b, a)] = v;
        }
    }
    Ok(s)
}

/// Regenerative estimate `Sigma_Z / mu`.
pub fn regen_sigma_f_hat(tours: &TourSequence) -> Result<CovEstimate> {
    regen_sigma_f_hat_with(tours, Centering::Ratio)
}

pub fn regen_sigma_f_hat_with(tours: &TourSequence, centering: Centering) -> Result<CovEstimate> {
    let sz = regen_sigma_z_hat_with(tours, centering)?;
    let mu = regen_mu_hat(tours)?;
    Ok(CovEstimate {
        matrix: sz / mu,
        kind: EstimatorKind::Regenerative,
        n: tours.total_length(),
        tuning: Tuning::Tours {
            tours: tours.len(),
            mean_tour_length: mu,
            centering,
        },
        psd_projected: false,
    })
}
