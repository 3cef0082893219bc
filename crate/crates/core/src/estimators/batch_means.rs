use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{CovEstimate, EstimatorKind, Tuning};
use crate::error::{input_err, Result};

/// Batch size rule `b_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchSchedule {
    /// `b_n = floor(n^nu)`.
    Power { nu: f64 },
    /// `b_n` listed for `n = 1, 2, ...`.
    Explicit(Vec<usize>),
}

impl BatchSchedule {
    pub fn power(nu: f64) -> Self {
        BatchSchedule::Power { nu }
    }

    pub fn batch_size(&self, n: usize) -> Result<usize> {
        match self {
            BatchSchedule::Power { nu } => {
                if !nu.is_finite() {
                    return input_err("batch exponent must be finite");
                }
                // nudge so that exact powers (n = 10^6, nu = 0.5) are not floored down
                let b = ((n as f64).powf(*nu) * (1.0 + 1e-12)).floor();
                Ok((b as usize).max(1))
            }
            BatchSchedule::Explicit(seq) => match seq.get(n.wrapping_sub(1)) {
                Some(&b) if b > 0 => Ok(b),
                Some(_) => input_err(format!("b_{n} is zero")),
                None => input_err(format!("explicit schedule has {} entries, need b_{n}", seq.len())),
            },
        }
    }

    fn nu(&self) -> Option<f64> {
        match self {
            BatchSchedule::Power { nu } => Some(*nu),
            BatchSchedule::Explicit(_) => None,
        }
    }
}

/// Non-overlapping batch-means estimate from an `n x d` sample matrix.
///
/// Uses `a = floor(n / b)` full batches; the trailing partial batch is dropped
/// and the grand mean is taken over the `a b` retained samples.
pub fn batch_means(samples: &DMatrix<f64>, schedule: &BatchSchedule) -> Result<CovEstimate> {
    let (n, d) = samples.shape();
    if d == 0 {
        return input_err("samples have zero columns");
    }
    let b = schedule.batch_size(n)?;
    let a = n / b;
    if a < 2 {
        return input_err(format!(
            "batch size {b} leaves {a} batch(es) from {n} samples; need at least 2"
        ));
    }

    let mut means = DMatrix::<f64>::zeros(a, d);
    for j in 0..d {
        let col = samples.column(j);
        for k in 0..a {
            means[(k, j)] = col.rows(k * b, b).sum() / b as f64;
        }
    }
    let grand: Vec<f64> = (0..d).map(|j| means.column(j).mean()).collect();
    for j in 0..d {
        for k in 0..a {
            means[(k, j)] -= grand[j];
        }
    }

    let scale = b as f64 / (a - 1) as f64;
    let mut m = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        for j in 0..=i {
            let v = scale * means.column(i).dot(&means.column(j));
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }

    Ok(CovEstimate {
        matrix: m,
        kind: EstimatorKind::BatchMeans,
        n: a * b,
        tuning: Tuning::Batches {
            batch_size: b,
            batches: a,
            nu: schedule.nu(),
        },
        psd_projected: false,
    })
}

/// Outcome of checking a batch-size rule for strong consistency.
///
/// Part (a): `b_n` and `n / b_n` increase monotonically to infinity.
/// Part (b): `sum_n (b_n / n)^c < inf` for some `c >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleCheck {
    pub part_a: bool,
    pub part_b: bool,
    /// A `c` witnessing part (b), when one was found.
    pub witness_c: Option<f64>,
    pub reasons: Vec<String>,
}

impl ScheduleCheck {
    pub fn passed(&self) -> bool {
        self.part_a && self.part_b
    }
}

const MAX_WITNESS_C: u32 = 64;

pub fn check_batch_schedule(schedule: &BatchSchedule) -> ScheduleCheck {
    let mut reasons = Vec::new();
    match schedule {
        BatchSchedule::Power { nu } => {
            let nu = *nu;
            let mut part_a = true;
            if !(nu > 0.0) {
                part_a = false;
                reasons.push(format!("nu = {nu}: b_n does not increase to infinity"));
            }
            if !(nu < 1.0) {
                part_a = false;
                reasons.push(format!("nu = {nu}: n / b_n does not increase to infinity"));
            }
            // (b_n / n)^c ~ n^{-(1 - nu) c}, summable iff (1 - nu) c > 1
            let (part_b, witness_c) = if nu < 1.0 {
                let c = (1.0 / (1.0 - nu.max(0.0))).floor() + 1.0;
                (true, Some(c.max(1.0)))
            } else {
                reasons.push(format!("nu = {nu}: (b_n / n)^c is not summable for any c"));
                (false, None)
            };
            ScheduleCheck {
                part_a,
                part_b,
                witness_c,
                reasons,
            }
        }
        BatchSchedule::Explicit(seq) => check_explicit(seq, reasons),
    }
}

fn check_explicit(seq: &[usize], mut reasons: Vec<String>) -> ScheduleCheck {
    if seq.len() < 4 || seq.contains(&0) {
        reasons.push("explicit schedule needs at least 4 positive entries".into());
        return ScheduleCheck {
            part_a: false,
            part_b: false,
            witness_c: None,
            reasons,
        };
    }
    let ratio = |i: usize| (i + 1) as f64 / seq[i] as f64;
    let mut part_a = true;
    if seq.windows(2).any(|w| w[1] < w[0]) {
        part_a = false;
        reasons.push("b_n is not monotone".into());
    }
    // integer batch sizes make n / b_n drop at every jump of b_n, so
    // monotonicity is checked up to one unit of rounding in b_n
    if (1..seq.len()).any(|i| ratio(i) < i as f64 / (seq[i - 1] + 1) as f64) {
        part_a = false;
        reasons.push("n / b_n is not monotone".into());
    }
    let last = seq.len() - 1;
    if seq[last] <= seq[0] {
        part_a = false;
        reasons.push("b_n does not grow over the listed range".into());
    }
    if ratio(last) <= ratio(0) {
        part_a = false;
        reasons.push("n / b_n does not grow over the listed range".into());
    }

    // Decay exponent s of b_n / n over the second half of the listed range;
    // (b_n / n)^c is summable when c s > 1.
    let half = last / 2;
    let term = |i: usize| seq[i] as f64 / (i + 1) as f64;
    let s = -(term(last).ln() - term(half).ln()) / (((last + 1) as f64).ln() - ((half + 1) as f64).ln());
    let witness = (1..=MAX_WITNESS_C).map(f64::from).find(|&c| c * s > 1.0);
    if witness.is_none() {
        reasons.push(format!(
            "b_n / n decays like n^-{s:.3}; no c <= {MAX_WITNESS_C} makes the series summable"
        ));
    }
    ScheduleCheck {
        part_a,
        part_b: witness.is_some(),
        witness_c: witness,
        reasons,
    }
}
