//! Chains with closed-form stationary behaviour, used as oracles.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SplitKernel;
use crate::error::{input_err, Error, Result};
use crate::probit::truncnorm::{log_std_normal_pdf, sample_std_normal_above, std_normal_cdf};
use crate::rng::ChainRng;

/// Description of a fixture chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChainSpec {
    /// States `{0, 1}` with `P(0 -> 1) = a`, `P(1 -> 0) = b`.
    TwoState { a: f64, b: f64 },
    /// `X_{t+1} = rho X_t + noise_sd * eps_t`.
    Ar1 { rho: f64, noise_sd: f64 },
    /// A user-supplied kernel; no oracle is available.
    Generic { dim: usize },
}

impl ChainSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChainSpec::TwoState { a, b } => {
                if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
                    return input_err(format!("transition probabilities ({a}, {b}) outside [0, 1]"));
                }
                if a + b == 0.0 {
                    return input_err("two-state chain with a = b = 0 is reducible");
                }
            }
            ChainSpec::Ar1 { rho, noise_sd } => {
                if !(rho.abs() < 1.0) {
                    return input_err(format!("|rho| = {} must be < 1", rho.abs()));
                }
                if !(noise_sd > 0.0 && noise_sd.is_finite()) {
                    return input_err(format!("noise_sd = {noise_sd} must be positive"));
                }
            }
            ChainSpec::Generic { dim } => {
                if dim == 0 {
                    return input_err("dim must be positive");
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match *self {
            ChainSpec::Generic { dim } => dim,
            _ => 1,
        }
    }

    /// Stationary mean of the identity function.
    pub fn stationary_mean(&self) -> Result<Vec<f64>> {
        self.validate()?;
        match *self {
            ChainSpec::TwoState { a, b } => Ok(vec![a / (a + b)]),
            ChainSpec::Ar1 { .. } => Ok(vec![0.0]),
            ChainSpec::Generic { .. } => Err(Error::UnsupportedOracle("generic chains".into())),
        }
    }
}

/// Asymptotic variance of the ergodic average of the identity function.
///
/// For the two-state chain the state value is the indicator of state 1 and
/// `sigma^2 = pi_0 pi_1 (2 - a - b) / (a + b)`; for AR(1),
/// `sigma^2 = noise_sd^2 / (1 - rho)^2`.
pub fn oracle_sigma_f(spec: &ChainSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let v = match *spec {
        ChainSpec::TwoState { a, b } => {
            let pi0 = b / (a + b);
            let pi1 = a / (a + b);
            pi0 * pi1 * (2.0 - a - b) / (a + b)
        }
        ChainSpec::Ar1 { rho, noise_sd } => noise_sd * noise_sd / ((1.0 - rho) * (1.0 - rho)),
        ChainSpec::Generic { .. } => {
            return Err(Error::UnsupportedOracle("generic chains".into()));
        }
    };
    Ok(DMatrix::from_element(1, 1, v))
}

impl ChainSpec {
    pub fn oracle_sigma_f(&self) -> Result<DMatrix<f64>> {
        oracle_sigma_f(self)
    }
}

/// Two-state chain with the `l`-step split `Q = P^l(0, .)`,
/// `h(x) = min_y P^l(x, y) / Q(y)`.
#[derive(Debug, Clone)]
pub struct TwoStateKernel {
    a: f64,
    b: f64,
    lag: usize,
    pl: [[f64; 2]; 2],
    q: [f64; 2],
    h: [f64; 2],
}

impl TwoStateKernel {
    pub fn new(a: f64, b: f64, lag: usize) -> Result<Self> {
        ChainSpec::TwoState { a, b }.validate()?;
        if lag == 0 {
            return input_err("lag must be at least 1");
        }
        let p = [[1.0 - a, a], [b, 1.0 - b]];
        let mut pl = [[1.0, 0.0], [0.0, 1.0]];
        for _ in 0..lag {
            let mut next = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    next[i][j] = pl[i][0] * p[0][j] + pl[i][1] * p[1][j];
                }
            }
            pl = next;
        }
        let q = pl[0];
        let mut h = [0.0; 2];
        for x in 0..2 {
            h[x] = (0..2)
                .filter(|&y| q[y] > 0.0)
                .map(|y| pl[x][y] / q[y])
                .fold(f64::INFINITY, f64::min)
                .min(1.0);
        }
        Ok(Self { a, b, lag, pl, q, h })
    }

    /// Same chain with `h = 0`: no regenerations are ever marked.
    pub fn without_minorization(a: f64, b: f64) -> Result<Self> {
        let mut k = Self::new(a, b, 1)?;
        k.h = [0.0, 0.0];
        Ok(k)
    }

    pub fn spec(&self) -> ChainSpec {
        ChainSpec::TwoState { a: self.a, b: self.b }
    }

    pub fn stationary(&self) -> [f64; 2] {
        let s = self.a + self.b;
        [self.b / s, self.a / s]
    }

    pub fn h_values(&self) -> [f64; 2] {
        self.h
    }

    pub fn q(&self) -> [f64; 2] {
        self.q
    }

    /// `E_pi[h(X)]`.
    pub fn mean_h(&self) -> f64 {
        let pi = self.stationary();
        pi[0] * self.h[0] + pi[1] * self.h[1]
    }

    /// Mean tour length `mu = l / E_pi[h]`.
    pub fn mean_tour_length(&self) -> f64 {
        self.lag as f64 / self.mean_h()
    }

    fn idx(x: f64) -> usize {
        usize::from(x >= 0.5)
    }
}

impl SplitKernel for TwoStateKernel {
    fn dim(&self) -> usize {
        1
    }

    fn lag(&self) -> usize {
        self.lag
    }

    fn h(&self, x: &[f64]) -> f64 {
        self.h[Self::idx(x[0])]
    }

    fn sample_q(&self, rng: &mut ChainRng, out: &mut [f64]) {
        out[0] = if rng.random::<f64>() < self.q[1] { 1.0 } else { 0.0 };
    }

    fn step(&self, x: &[f64], rng: &mut ChainRng, out: &mut [f64]) {
        let u: f64 = rng.random();
        out[0] = match Self::idx(x[0]) {
            0 => f64::from(u < self.a),
            _ => f64::from(u >= self.b),
        };
    }

    fn bell_probability(&self, x: &[f64], y: &[f64]) -> f64 {
        let (i, j) = (Self::idx(x[0]), Self::idx(y[0]));
        if self.pl[i][j] == 0.0 {
            return 0.0;
        }
        (self.h[i] * self.q[j] / self.pl[i][j]).min(1.0)
    }
}

/// AR(1) chain with a one-step minorization on the small set `[-c, c]`.
///
/// For `|x| <= c` the transition density is bounded below by
/// `g(y) = min_{|x'| <= c} phi(y; rho x', sd)`, so `h(x) = eps 1{|x| <= c}` with
/// `eps = 2 Phi(-|rho| c / sd)` and `Q` has density `g / eps`.
#[derive(Debug, Clone)]
pub struct Ar1Kernel {
    rho: f64,
    sd: f64,
    half_width: f64,
    eps: f64,
    noise: Normal<f64>,
}

impl Ar1Kernel {
    pub fn new(rho: f64, noise_sd: f64, half_width: f64) -> Result<Self> {
        ChainSpec::Ar1 { rho, noise_sd }.validate()?;
        if !(half_width > 0.0 && half_width.is_finite()) {
            return input_err("small-set half width must be positive");
        }
        let m0 = rho.abs() * half_width;
        let eps = 2.0 * std_normal_cdf(-m0 / noise_sd);
        let noise = Normal::new(0.0, noise_sd).map_err(|e| Error::Input(e.to_string()))?;
        Ok(Self {
            rho,
            sd: noise_sd,
            half_width,
            eps,
            noise,
        })
    }

    pub fn spec(&self) -> ChainSpec {
        ChainSpec::Ar1 {
            rho: self.rho,
            noise_sd: self.sd,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// `E_pi[h(X)]` under the stationary law `N(0, sd^2 / (1 - rho^2))`.
    pub fn mean_h(&self) -> f64 {
        let s = self.sd / (1.0 - self.rho * self.rho).sqrt();
        self.eps * (2.0 * std_normal_cdf(self.half_width / s) - 1.0)
    }

    fn m0(&self) -> f64 {
        self.rho.abs() * self.half_width
    }

    fn log_g(&self, y: f64) -> f64 {
        let far = if y >= 0.0 { -self.m0() } else { self.m0() };
        log_std_normal_pdf((y - far) / self.sd) - self.sd.ln()
    }
}

impl SplitKernel for Ar1Kernel {
    fn dim(&self) -> usize {
        1
    }

    fn lag(&self) -> usize {
        1
    }

    fn h(&self, x: &[f64]) -> f64 {
        if x[0].abs() <= self.half_width {
            self.eps
        } else {
            0.0
        }
    }

    fn sample_q(&self, rng: &mut ChainRng, out: &mut [f64]) {
        // |Y| has density proportional to phi((y + m0) / sd) on y >= 0
        let m0 = self.m0();
        let mag = self.sd * sample_std_normal_above(m0 / self.sd, rng) - m0;
        out[0] = if rng.random::<bool>() { mag } else { -mag };
    }

    fn step(&self, x: &[f64], rng: &mut ChainRng, out: &mut [f64]) {
        out[0] = self.rho * x[0] + self.noise.sample(rng);
    }

    fn bell_probability(&self, x: &[f64], y: &[f64]) -> f64 {
        if x[0].abs() > self.half_width {
            return 0.0;
        }
        let log_p = log_std_normal_pdf((y[0] - self.rho * x[0]) / self.sd) - self.sd.ln();
        (self.log_g(y[0]) - log_p).exp().min(1.0)
    }
}
