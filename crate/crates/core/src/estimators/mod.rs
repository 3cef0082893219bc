//! Estimators of the asymptotic covariance `Sigma_f` of an ergodic average.

mod batch_means;
mod psd;
mod rates;
mod regenerative;

pub use batch_means::{batch_means, check_batch_schedule, BatchSchedule, ScheduleCheck};
pub use psd::psd_project;
pub use rates::{sip_rate_exponent, RateReport};
pub use regenerative::{
    regen_mean, regen_mu_hat, regen_sigma_f_hat, regen_sigma_f_hat_with, regen_sigma_z_hat, regen_sigma_z_hat_with,
    Centering,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Symmetry tolerance applied to estimator outputs and projection inputs.
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    BatchMeans,
    Regenerative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Tuning {
    Batches {
        batch_size: usize,
        batches: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        nu: Option<f64>,
    },
    Tours {
        tours: usize,
        mean_tour_length: f64,
        centering: Centering,
    },
}

/// An estimate of `Sigma_f` with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct CovEstimate {
    pub matrix: DMatrix<f64>,
    pub kind: EstimatorKind,
    /// Samples used by the estimator.
    pub n: usize,
    pub tuning: Tuning,
    pub psd_projected: bool,
}

#[derive(Serialize, Deserialize)]
struct CovEstimateJson {
    kind: EstimatorKind,
    n: usize,
    d: usize,
    tuning: Tuning,
    #[serde(default)]
    psd_projected: bool,
    matrix: Vec<f64>,
}

impl CovEstimate {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Row-major entries.
    pub fn row_major(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| self.matrix[(i, j)])
            .collect()
    }

    /// Replaces the matrix by its nearest PSD matrix (negative eigenvalues clipped).
    pub fn into_psd(mut self) -> Result<Self> {
        self.matrix = psd_project(&self.matrix)?;
        self.psd_projected = true;
        Ok(self)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(CovEstimateJson {
            kind: self.kind,
            n: self.n,
            d: self.dim(),
            tuning: self.tuning.clone(),
            psd_projected: self.psd_projected,
            matrix: self.row_major(),
        })
        .expect("estimate serializes")
    }

    pub fn from_json_value(v: serde_json::Value) -> Result<Self> {
        let j: CovEstimateJson = serde_json::from_value(v)?;
        if j.matrix.len() != j.d * j.d {
            return crate::error::input_err("matrix length does not match d");
        }
        Ok(Self {
            matrix: DMatrix::from_row_slice(j.d, j.d, &j.matrix),
            kind: j.kind,
            n: j.n,
            tuning: j.tuning,
            psd_projected: j.psd_projected,
        })
    }

    /// Matrix as CSV rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim()).map(|j| format!("{}", self.matrix[(i, j)])).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Relative Frobenius distance `||a - b||_F / ||b||_F`.
pub fn relative_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = m.amax().max(1.0);
    (0..m.nrows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= tol * scale))
}
