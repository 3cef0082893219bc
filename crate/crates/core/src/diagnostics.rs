//! Empirical checks of the observable consequences of the regenerative limit
//! theory: the ratio identity for the stationary mean, the CLT covariance of
//! ergodic and regenerative averages, the growth of the regeneration count,
//! and 1-dependence of tours.
//!
//! Thresholds are expressed in standard errors wherever a natural scale
//! exists. A check whose preconditions fail (too few tours or regenerations)
//! is reported as inconclusive and does not fail the report.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::chain::{count_regenerations, SplitChainTrace, TourSequence};
use crate::error::{input_err, Result};
use crate::estimators::{regen_mean, regen_sigma_f_hat, relative_frobenius};
use crate::rng::{self, ChainRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Inconclusive,
}

/// One named check. `pass` holds iff `statistic <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub status: CheckStatus,
    pub meta: serde_json::Value,
}

impl Check {
    fn evaluate(name: &str, statistic: f64, threshold: f64, meta: serde_json::Value) -> Self {
        let pass = statistic <= threshold;
        Self {
            name: name.to_string(),
            statistic,
            threshold,
            pass,
            status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
            meta,
        }
    }

    fn inconclusive(name: &str, reason: String) -> Self {
        Self {
            name: name.to_string(),
            statistic: f64::NAN,
            threshold: f64::NAN,
            pass: false,
            status: CheckStatus::Inconclusive,
            meta: json!({ "reason": reason }),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub checks: Vec<Check>,
}

impl DiagnosticsReport {
    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// True when every conclusive check passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn inconclusive(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Inconclusive)
    }

    /// JSON with non-finite statistics written as `null`.
    pub fn to_json(&self) -> serde_json::Value {
        let checks: Vec<_> = self
            .checks
            .iter()
            .map(|c| {
                json!({
                    "name": c.name,
                    "statistic": finite_or_null(c.statistic),
                    "threshold": finite_or_null(c.threshold),
                    "pass": c.pass,
                    "status": c.status,
                    "meta": c.meta,
                })
            })
            .collect();
        json!({ "checks": checks })
    }
}

fn finite_or_null(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        serde_json::Value::Null
    }
}

pub const MEAN_IDENTITY_MIN_TOURS: usize = 100;
pub const MEAN_IDENTITY_SE_MULTIPLE: f64 = 4.0;

/// Compares the regenerative mean `sum Z / sum tau` with a long-run average.
///
/// With `tol = None` the statistic is the largest componentwise difference
/// in units of the combined standard error `sqrt(2 Sigma_f,jj / T_R)` and the
/// threshold is 4; otherwise the statistic is the max-norm difference and the
/// threshold is `tol`.
pub fn check_regen_mean_identity(tours: &TourSequence, long_run_mean: &[f64], tol: Option<f64>) -> Result<Check> {
    const NAME: &str = "regenerative_mean_identity";
    if tours.len() < MEAN_IDENTITY_MIN_TOURS {
        return Ok(Check::inconclusive(
            NAME,
            format!("{} tours, need {}", tours.len(), MEAN_IDENTITY_MIN_TOURS),
        ));
    }
    if long_run_mean.len() != tours.dim {
        return input_err("long-run mean dimension differs from the tours");
    }
    let f_r = regen_mean(tours)?;
    let diff: Vec<f64> = f_r.iter().zip(long_run_mean).map(|(a, b)| a - b).collect();
    let meta_base = json!({ "regen_mean": f_r, "long_run_mean": long_run_mean, "tours": tours.len() });
    if let Some(tol) = tol {
        let stat = diff.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        return Ok(Check::evaluate(NAME, stat, tol, meta_base));
    }
    let sigma = regen_sigma_f_hat(tours)?.matrix;
    let total = tours.total_length() as f64;
    let se: Vec<f64> = (0..tours.dim)
        .map(|j| (2.0 * sigma[(j, j)].max(0.0) / total).sqrt())
        .collect();
    let stat = diff
        .iter()
        .zip(&se)
        .map(|(d, s)| {
            if *d == 0.0 {
                0.0
            } else if *s == 0.0 {
                f64::INFINITY
            } else {
                d.abs() / s
            }
        })
        .fold(0.0f64, f64::max);
    let mut meta = meta_base;
    meta["combined_se"] = json!(se);
    Ok(Check::evaluate(NAME, stat, MEAN_IDENTITY_SE_MULTIPLE, meta))
}

pub const CLT_MIN_REPLICATIONS: usize = 200;
pub const CLT_REL_TOL: f64 = 0.15;

fn scaled_covariance(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let d = rows[0].len();
    let mut c = DMatrix::<f64>::zeros(d, d);
    for r in rows {
        for i in 0..d {
            for j in 0..d {
                c[(i, j)] += r[i] * r[j];
            }
        }
    }
    c / rows.len() as f64
}

/// Covariance across replications of `sqrt(n) (f_n - E_pi f)` against an
/// oracle `Sigma_f`, in relative Frobenius norm (threshold 0.15).
///
/// `average(rng, n)` must return the ergodic average of one independent run
/// of length `n`. Replication `r` uses stream `r` of `seed`.
pub fn check_clt_covariance<F>(
    average: F,
    replications: usize,
    n: usize,
    mean: &[f64],
    oracle: &DMatrix<f64>,
    seed: u64,
) -> Result<Check>
where
    F: Fn(&mut ChainRng, usize) -> Vec<f64> + Sync,
{
    const NAME: &str = "clt_covariance";
    if replications < CLT_MIN_REPLICATIONS {
        return input_err(format!("need at least {CLT_MIN_REPLICATIONS} replications"));
    }
    let root_n = (n as f64).sqrt();
    let rows: Vec<Vec<f64>> = (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::replication(seed, r);
            let avg = average(&mut rng, n);
            avg.iter().zip(mean).map(|(a, m)| root_n * (a - m)).collect()
        })
        .collect();
    let emp = scaled_covariance(&rows);
    let stat = relative_frobenius(&emp, oracle);
    Ok(Check::evaluate(
        NAME,
        stat,
        CLT_REL_TOL,
        json!({ "replications": replications, "n": n, "empirical": emp.as_slice(), "oracle": oracle.as_slice() }),
    ))
}

/// Covariance across replications of `R^{-1/2} sum_j (Z_j - tau_j E_pi f)`
/// against a reference `Sigma_Z` (threshold 0.15 relative Frobenius).
pub fn check_regenerative_clt<F>(
    tours: F,
    replications: usize,
    mean: &[f64],
    sigma_z: &DMatrix<f64>,
    seed: u64,
) -> Result<Check>
where
    F: Fn(&mut ChainRng) -> TourSequence + Sync,
{
    const NAME: &str = "regenerative_clt_covariance";
    if replications < CLT_MIN_REPLICATIONS {
        return input_err(format!("need at least {CLT_MIN_REPLICATIONS} replications"));
    }
    let rows: Vec<Vec<f64>> = (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::replication(seed, r);
            let seq = tours(&mut rng);
            let scale = (seq.len().max(1) as f64).sqrt();
            (0..mean.len())
                .map(|j| seq.tours.iter().map(|t| t.z[j] - t.tau as f64 * mean[j]).sum::<f64>() / scale)
                .collect()
        })
        .collect();
    let emp = scaled_covariance(&rows);
    let stat = relative_frobenius(&emp, sigma_z);
    Ok(Check::evaluate(
        NAME,
        stat,
        CLT_REL_TOL,
        json!({ "replications": replications, "empirical": emp.as_slice(), "reference": sigma_z.as_slice() }),
    ))
}

pub const XI_MIN_REGENERATIONS: usize = 1000;
pub const XI_SLACK: f64 = 1.5;
const XI_GRID_DOUBLINGS: u32 = 10;

/// Deviations `|xi(n) - n / mu| / n` on the dyadic grid `n_k = len / 2^k`,
/// `k = 10, ..., 0`, ending at the full trace length.
pub fn xi_deviation_grid(trace: &SplitChainTrace, mu: f64) -> Result<Vec<(usize, f64)>> {
    let mut grid = Vec::new();
    for k in (0..=XI_GRID_DOUBLINGS).rev() {
        let n = trace.len() >> k;
        if n == 0 || grid.last().is_some_and(|g: &(usize, f64)| g.0 == n) {
            continue;
        }
        let xi = count_regenerations(trace, n)? as f64;
        grid.push((n, (xi - n as f64 / mu).abs() / n as f64));
    }
    Ok(grid)
}

/// Trend test for `|xi(n) - n / mu| / n -> 0`: the largest deviation over the
/// second half of the dyadic grid must sit at least a factor 1.5 below the
/// largest deviation over the first half.
pub fn check_xi_growth(trace: &SplitChainTrace, mu: f64) -> Result<Check> {
    const NAME: &str = "regeneration_count_growth";
    let total = count_regenerations(trace, trace.len())?;
    if total < XI_MIN_REGENERATIONS {
        return Ok(Check::inconclusive(
            NAME,
            format!("{total} regenerations, need {XI_MIN_REGENERATIONS}"),
        ));
    }
    if !(mu >= 1.0 && mu.is_finite()) {
        return input_err(format!("mean tour length {mu} must be at least 1"));
    }
    let grid = xi_deviation_grid(trace, mu)?;
    let half = grid.len() / 2;
    let early = grid[..half].iter().map(|g| g.1).fold(0.0, f64::max);
    let late = grid[half..].iter().map(|g| g.1).fold(0.0, f64::max);
    let stat = if late == 0.0 {
        0.0
    } else if early == 0.0 {
        f64::INFINITY
    } else {
        late / early
    };
    let (n_last, dev_last) = *grid.last().expect("grid is nonempty");
    Ok(Check::evaluate(
        NAME,
        stat,
        1.0 / XI_SLACK,
        json!({
            "grid_n": grid.iter().map(|g| g.0).collect::<Vec<_>>(),
            "deviation": grid.iter().map(|g| g.1).collect::<Vec<_>>(),
            "final_n": n_last,
            "final_deviation": dev_last,
            "regenerations": total,
        }),
    ))
}

pub const ONE_DEP_MIN_TOURS: usize = 1000;
pub const ONE_DEP_MAX_LAG: usize = 10;

/// Sample autocorrelation at `lag`; zero for a constant series.
pub fn autocorrelation(x: &[f64], lag: usize) -> f64 {
    let n = x.len();
    if lag >= n {
        return 0.0;
    }
    let m = x.iter().sum::<f64>() / n as f64;
    let denom: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    if denom == 0.0 {
        return 0.0;
    }
    let num: f64 = x[..n - lag].iter().zip(&x[lag..]).map(|(a, b)| (a - m) * (b - m)).sum();
    num / denom
}

/// Autocorrelations at lags 2..=10 of every tour-sum coordinate and of the
/// tour lengths must lie within `3 / sqrt(R)`. Lag 1 is reported, not tested.
pub fn check_one_dependence(tours: &TourSequence) -> Check {
    const NAME: &str = "tour_one_dependence";
    let r = tours.len();
    if r < ONE_DEP_MIN_TOURS {
        return Check::inconclusive(NAME, format!("{r} tours, need {ONE_DEP_MIN_TOURS}"));
    }
    let mut series: Vec<(String, Vec<f64>)> = (0..tours.dim)
        .map(|j| (format!("z_{}", j + 1), tours.z_component(j)))
        .collect();
    series.push(("tau".to_string(), tours.taus()));
    let mut worst = 0.0f64;
    let mut lag1 = serde_json::Map::new();
    for (name, x) in &series {
        lag1.insert(name.clone(), json!(autocorrelation(x, 1)));
        for lag in 2..=ONE_DEP_MAX_LAG {
            worst = worst.max(autocorrelation(x, lag).abs());
        }
    }
    Check::evaluate(
        NAME,
        worst,
        3.0 / (r as f64).sqrt(),
        json!({ "tours": r, "lag1": lag1, "max_lag": ONE_DEP_MAX_LAG }),
    )
}
