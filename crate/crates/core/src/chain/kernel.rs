use rand::Rng;

use super::SplitChainTrace;
use crate::error::{input_err, Error, Result};
use crate::rng::{self, ChainRng};

const MAX_REJECTIONS: usize = 1_000_000;

/// A Markov kernel `P` together with an `l`-step minorization
/// `P^l(x, .) >= h(x) Q(.)`.
///
/// The residual kernel `R` is never sampled directly. Instead, forward paths
/// of length `l` are drawn from `P` and accepted or rejected using the
/// endpoint-conditional bell probability
/// `h(x) q(y) / p^l(x, y) = Pr(delta = 1 | X_i = x, X_{i+l} = y)`.
pub trait SplitKernel {
    /// Dimension of the state vector.
    fn dim(&self) -> usize;

    /// Minorization lag `l >= 1`.
    fn lag(&self) -> usize;

    /// Regeneration weight `h(x)`, which must lie in `[0, 1]`.
    fn h(&self, x: &[f64]) -> f64;

    /// Draws from the minorizing measure `Q`.
    fn sample_q(&self, rng: &mut ChainRng, out: &mut [f64]);

    /// One step of `P`.
    fn step(&self, x: &[f64], rng: &mut ChainRng, out: &mut [f64]);

    /// `h(x) q(y) / p^l(x, y)`, in `[0, 1]`.
    fn bell_probability(&self, x: &[f64], y: &[f64]) -> f64;
}

fn check_unit(v: f64, what: &str, t: usize) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(Error::InvalidMinorization(format!(
            "{what} = {v} outside [0, 1] at t = {t}"
        )))
    }
}

/// Simulates `n` steps of the split chain.
///
/// At each eligible time `t` (the first state, then every `l` steps) a bell
/// `delta_t ~ Bernoulli(h(X_t))` is drawn. The next `l` states are generated
/// serially from `P` and accepted by rejection so that, given a bell, `X_{t+l}`
/// has law `Q`, and given no bell, it has law `R(X_t, .)`. For `l = 1` and a
/// bell the new state is drawn from `Q` directly. Near the end of the trace
/// the block is generated in full and truncated, so every eligible time up to
/// `n` carries a bell draw.
pub fn run_split_chain<K>(kernel: &K, n: usize, seed: u64) -> Result<SplitChainTrace>
where
    K: SplitKernel + ?Sized,
{
    let d = kernel.dim();
    let l = kernel.lag();
    if d == 0 || l == 0 {
        return input_err("kernel dimension and lag must be positive");
    }
    if n < l {
        return input_err(format!("n = {n} is shorter than the lag {l}"));
    }
    let mut rng = rng::seeded(seed);
    let mut states = vec![0.0; n * d];
    let mut bells = vec![false; n];
    let mut from_q = vec![false; n];
    let mut path = vec![0.0; l * d];

    kernel.sample_q(&mut rng, &mut states[..d]);
    from_q[0] = true;

    let mut t = 0usize;
    while t < n {
        let (done, rest) = states.split_at_mut((t + 1) * d);
        let x = &done[t * d..];
        let hx = check_unit(kernel.h(x), "h(x)", t + 1)?;
        let bell = hx > 0.0 && rng.random::<f64>() < hx;
        let fits = l.min(n - t - 1);

        if fits == 0 {
            // last state: nothing left to generate
        } else if bell && l == 1 {
            kernel.sample_q(&mut rng, &mut rest[..d]);
        } else {
            let mut attempts = 0usize;
            loop {
                draw_path(kernel, x, &mut rng, &mut path);
                if hx == 0.0 {
                    break;
                }
                let y = &path[(l - 1) * d..];
                let p = check_unit(kernel.bell_probability(x, y), "bell probability", t + 1)?;
                let u: f64 = rng.random();
                if (bell && u < p) || (!bell && u >= p) {
                    break;
                }
                attempts += 1;
                if attempts >= MAX_REJECTIONS {
                    return Err(Error::InvalidMinorization(format!(
                        "rejection sampler exhausted at t = {}; h and the bell probability are inconsistent",
                        t + 1
                    )));
                }
            }
            rest[..fits * d].copy_from_slice(&path[..fits * d]);
        }
        bells[t] = bell;
        if bell && t + l < n {
            from_q[t + l] = true;
        }
        t += l;
    }

    Ok(SplitChainTrace::from_raw(states, bells, from_q, d, l, seed))
}

fn draw_path<K: SplitKernel + ?Sized>(kernel: &K, x: &[f64], rng: &mut ChainRng, path: &mut [f64]) {
    let d = x.len();
    kernel.step(x, rng, &mut path[..d]);
    for s in 1..path.len() / d {
        let (prev, next) = path.split_at_mut(s * d);
        kernel.step(&prev[(s - 1) * d..], rng, &mut next[..d]);
    }
}
