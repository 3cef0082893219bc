//! Unit-variance normal draws truncated to a half-line, plus the scalar
//! normal functions used by the probit densities.

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use statrs::function::erf;

use crate::rng::open_unit;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standardized truncation point beyond which inverse-CDF sampling is
/// replaced by rejection.
const TAIL_SWITCH: f64 = 5.0;

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erf::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn std_normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * p)
}

pub fn log_std_normal_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// `log Phi(x)`, accurate in the lower tail.
pub fn log_std_normal_cdf(x: f64) -> f64 {
    if x > -20.0 {
        std_normal_cdf(x).ln()
    } else {
        // Mills-ratio expansion
        let x2 = x * x;
        log_std_normal_pdf(x) - (-x).ln() + (1.0 - 1.0 / x2 + 3.0 / (x2 * x2)).ln()
    }
}

/// Draws `X ~ N(0, 1)` conditioned on `X > a`.
pub fn sample_std_normal_above<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    if a < -TAIL_SWITCH {
        loop {
            let x: f64 = StandardNormal.sample(rng);
            if x > a {
                return x;
            }
        }
    } else if a <= TAIL_SWITCH {
        // Invert the upper tail: Pr(X > x) = Phi(-x) / Phi(-a).
        let upper = std_normal_cdf(-a);
        loop {
            let x = -std_normal_quantile(open_unit(rng) * upper);
            if x > a && x.is_finite() {
                return x;
            }
        }
    } else {
        // Exponential proposal with the optimal rate for this truncation.
        let alpha = 0.5 * (a + (a * a + 4.0).sqrt());
        let exp = Exp::new(alpha).expect("positive rate");
        loop {
            let x = a + exp.sample(rng);
            let log_accept = -0.5 * (x - alpha) * (x - alpha);
            if open_unit(rng).ln() <= log_accept {
                return x;
            }
        }
    }
}

/// Draws from `N(mean, 1)` truncated to `(0, inf)` when `positive`, otherwise
/// to `(-inf, 0]`.
pub fn sample_truncated_normal<R: Rng + ?Sized>(mean: f64, positive: bool, rng: &mut R) -> f64 {
    if positive {
        for _ in 0..64 {
            let z = mean + sample_std_normal_above(-mean, rng);
            if z > 0.0 {
                return z;
            }
        }
        f64::MIN_POSITIVE
    } else {
        (mean - sample_std_normal_above(mean, rng)).min(0.0)
    }
}

/// Log density of the truncated normal sampled by [`sample_truncated_normal`];
/// `-inf` off the support.
pub fn log_truncated_normal_pdf(z: f64, mean: f64, positive: bool) -> f64 {
    if positive {
        if z <= 0.0 {
            return f64::NEG_INFINITY;
        }
        log_std_normal_pdf(z - mean) - log_std_normal_cdf(mean)
    } else {
        if z > 0.0 {
            return f64::NEG_INFINITY;
        }
        log_std_normal_pdf(z - mean) - log_std_normal_cdf(-mean)
    }
}
