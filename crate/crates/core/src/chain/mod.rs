//! Split-chain simulation, regeneration bookkeeping and tour extraction.
//!
//! Time is 1-based to match the usual regenerative notation: the trace holds
//! `X_1, ..., X_n`, `X_1 ~ Q`, and `T_0 = 0`. A bell at time `t` means the
//! state `X_{t+l}` is a fresh draw from `Q`; tour `k` is the block
//! `X_{T_{k-1}+1}, ..., X_{T_k}`.

mod fixtures;
mod kernel;

pub use fixtures::{Ar1Kernel, ChainSpec, TwoStateKernel};
pub use kernel::{run_split_chain, SplitKernel};

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};

/// Realized split chain `(X_t, delta_t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitChainTrace {
    dim: usize,
    lag: usize,
    seed: u64,
    states: Vec<f64>,
    bells: Vec<bool>,
    from_q: Vec<bool>,
}

impl SplitChainTrace {
    /// Builds a trace from row-major states (`bells.len()` rows of `dim`).
    ///
    /// Provenance is reconstructed from the bells: `X_1` and every `X_{t+l}`
    /// following a bell at `t` are marked as `Q` draws.
    pub fn from_parts(states: Vec<f64>, bells: Vec<bool>, dim: usize, lag: usize, seed: u64) -> Result<Self> {
        if dim == 0 || lag == 0 {
            return input_err("dim and lag must be positive");
        }
        if states.len() != bells.len() * dim {
            return input_err(format!(
                "{} state values do not form {} rows of dimension {}",
                states.len(),
                bells.len(),
                dim
            ));
        }
        let n = bells.len();
        let mut from_q = vec![false; n];
        if n > 0 {
            from_q[0] = true;
        }
        for (t, _) in bells.iter().enumerate().filter(|(_, &b)| b) {
            if t + lag < n {
                from_q[t + lag] = true;
            }
        }
        Ok(Self {
            dim,
            lag,
            seed,
            states,
            bells,
            from_q,
        })
    }

    pub(crate) fn from_raw(
        states: Vec<f64>,
        bells: Vec<bool>,
        from_q: Vec<bool>,
        dim: usize,
        lag: usize,
        seed: u64,
    ) -> Self {
        debug_assert_eq!(states.len(), bells.len() * dim);
        debug_assert_eq!(bells.len(), from_q.len());
        Self {
            dim,
            lag,
            seed,
            states,
            bells,
            from_q,
        }
    }

    pub fn len(&self) -> usize {
        self.bells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bells.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lag(&self) -> usize {
        self.lag
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// State `X_t` for 1-based `t`.
    pub fn state(&self, t: usize) -> &[f64] {
        let i = t - 1;
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    /// Iterates over `X_1, ..., X_n`.
    pub fn states(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.states.chunks_exact(self.dim)
    }

    pub fn bells(&self) -> &[bool] {
        &self.bells
    }

    /// Whether `X_t` (1-based) was drawn from the minorizing measure.
    pub fn drawn_from_q(&self, t: usize) -> bool {
        self.from_q[t - 1]
    }

    /// Regeneration times `T_1 < T_2 < ...` (1-based).
    pub fn regeneration_times(&self) -> Vec<usize> {
        self.bells
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i + 1)
            .collect()
    }

    /// Checks that every bell is followed `l` steps later by a `Q` draw.
    pub fn provenance_consistent(&self) -> bool {
        let n = self.len();
        self.bells
            .iter()
            .enumerate()
            .all(|(t, &b)| !b || t + self.lag >= n || self.from_q[t + self.lag])
    }

    /// Column-major copy of the states as an `n x d` matrix.
    pub fn sample_matrix(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.len(), self.dim, &self.states)
    }
}

/// One regenerative block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    pub z: Vec<f64>,
    pub tau: usize,
}

/// Complete tours of a trace plus the length of the discarded tail.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TourSequence {
    pub dim: usize,
    pub tours: Vec<Tour>,
    pub residual_len: usize,
}

impl TourSequence {
    pub fn new(dim: usize, tours: Vec<Tour>, residual_len: usize) -> Result<Self> {
        if dim == 0 {
            return input_err("tour dimension must be positive");
        }
        for (k, t) in tours.iter().enumerate() {
            if t.tau == 0 {
                return input_err(format!("tour {} has zero length", k + 1));
            }
            if t.z.len() != dim {
                return input_err(format!("tour {} has dimension {}, expected {}", k + 1, t.z.len(), dim));
            }
            if t.z.iter().any(|v| !v.is_finite()) {
                return input_err(format!("tour {} has a non-finite sum", k + 1));
            }
        }
        Ok(Self {
            dim,
            tours,
            residual_len,
        })
    }

    /// Scalar tours `(z_k, tau_k)` with no residual.
    pub fn from_scalar(z: &[f64], tau: &[usize]) -> Result<Self> {
        if z.len() != tau.len() {
            return input_err("z and tau lengths differ");
        }
        let tours = z.iter().zip(tau).map(|(&z, &tau)| Tour { z: vec![z], tau }).collect();
        Self::new(1, tours, 0)
    }

    /// Number of tours `R`.
    pub fn len(&self) -> usize {
        self.tours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tours.is_empty()
    }

    /// `T_R`, the number of samples covered by complete tours.
    pub fn total_length(&self) -> usize {
        self.tours.iter().map(|t| t.tau).sum()
    }

    pub fn taus(&self) -> Vec<f64> {
        self.tours.iter().map(|t| t.tau as f64).collect()
    }

    /// Component `j` of every tour sum.
    pub fn z_component(&self, j: usize) -> Vec<f64> {
        self.tours.iter().map(|t| t.z[j]).collect()
    }
}

/// Cuts a trace into tours of `f`, where `f` writes an `f_dim`-vector.
///
/// Samples after the last regeneration are counted in `residual_len`. A
/// trace without bells yields no tours.
pub fn extract_tours<F>(trace: &SplitChainTrace, f_dim: usize, mut f: F) -> Result<TourSequence>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if trace.is_empty() {
        return input_err("empty trace");
    }
    if f_dim == 0 {
        return input_err("f must have positive dimension");
    }
    let mut tours = Vec::new();
    let mut acc = vec![0.0; f_dim];
    let mut val = vec![0.0; f_dim];
    let mut tau = 0usize;
    for (x, &bell) in trace.states().zip(trace.bells()) {
        f(x, &mut val);
        for (a, v) in acc.iter_mut().zip(&val) {
            *a += v;
        }
        tau += 1;
        if bell {
            tours.push(Tour {
                z: std::mem::replace(&mut acc, vec![0.0; f_dim]),
                tau,
            });
            tau = 0;
        }
    }
    TourSequence::new(f_dim, tours, tau)
}

/// Tours of the identity function on the state.
pub fn extract_identity_tours(trace: &SplitChainTrace) -> Result<TourSequence> {
    extract_tours(trace, trace.dim(), |x, out| out.copy_from_slice(x))
}

/// `xi(n)`: number of regeneration times `T_k <= n`.
pub fn count_regenerations(trace: &SplitChainTrace, n: usize) -> Result<usize> {
    if n > trace.len() {
        return input_err(format!("n = {} exceeds trace length {}", n, trace.len()));
    }
    Ok(trace.bells()[..n].iter().filter(|&&b| b).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ladder_trace() -> SplitChainTrace {
        let states: Vec<f64> = (1..=12).map(f64::from).collect();
        let mut bells = vec![false; 12];
        for t in [3, 7, 12] {
            bells[t - 1] = true;
        }
        SplitChainTrace::from_parts(states, bells, 1, 1, 0).unwrap()
    }

    #[test]
    fn tours_from_hand_example() {
        let tours = extract_identity_tours(&ladder_trace()).unwrap();
        let taus: Vec<usize> = tours.tours.iter().map(|t| t.tau).collect();
        assert_eq!(taus, vec![3, 4, 5]);
        assert_eq!(tours.z_component(0), vec![6.0, 22.0, 50.0]);
        assert_eq!(tours.residual_len, 0);
    }

    #[test]
    fn constant_function_unit_tours() {
        let trace = SplitChainTrace::from_parts(vec![0.3; 5], vec![true; 5], 1, 1, 0).unwrap();
        let tours = extract_tours(&trace, 1, |_, out| out[0] = 2.5).unwrap();
        assert_eq!(tours.len(), 5);
        assert!(tours.tours.iter().all(|t| t.tau == 1 && t.z == vec![2.5]));
    }

    #[test]
    fn duplicated_components_agree() {
        let tours = extract_tours(&ladder_trace(), 2, |x, out| {
            out[0] = x[0].sin();
            out[1] = x[0].sin();
        })
        .unwrap();
        assert!(tours.tours.iter().all(|t| t.z[0] == t.z[1]));
    }

    #[test]
    fn no_bells_gives_residual_only() {
        let trace = SplitChainTrace::from_parts(vec![1.0; 8], vec![false; 8], 1, 1, 0).unwrap();
        let tours = extract_identity_tours(&trace).unwrap();
        assert!(tours.is_empty());
        assert_eq!(tours.residual_len, 8);
    }

    #[test]
    fn residual_after_last_bell() {
        let mut bells = vec![false; 10];
        bells[3] = true;
        let trace = SplitChainTrace::from_parts(vec![1.0; 10], bells, 1, 1, 0).unwrap();
        let tours = extract_identity_tours(&trace).unwrap();
        assert_eq!(tours.len(), 1);
        assert_eq!(tours.residual_len, 6);
    }

    #[test]
    fn regeneration_counts() {
        let trace = ladder_trace();
        assert_eq!(count_regenerations(&trace, 10).unwrap(), 2);
        assert_eq!(count_regenerations(&trace, 2).unwrap(), 0);
        assert_eq!(count_regenerations(&trace, 12).unwrap(), 3);
        assert!(count_regenerations(&trace, 13).is_err());
        assert_eq!(trace.regeneration_times(), vec![3, 7, 12]);
    }

    #[test]
    fn from_parts_rejects_ragged_states() {
        assert!(SplitChainTrace::from_parts(vec![1.0; 5], vec![false; 3], 2, 1, 0).is_err());
    }

    #[test]
    fn provenance_reconstructed_from_bells() {
        let mut bells = vec![false; 6];
        bells[1] = true;
        let trace = SplitChainTrace::from_parts(vec![0.0; 6], bells, 1, 2, 0).unwrap();
        assert!(trace.drawn_from_q(1));
        assert!(trace.drawn_from_q(4));
        assert!(!trace.drawn_from_q(3));
        assert!(trace.provenance_consistent());
    }

    #[test]
    fn empty_trace_rejected() {
        let trace = SplitChainTrace::from_parts(vec![], vec![], 1, 1, 0).unwrap();
        assert!(extract_identity_tours(&trace).is_err());
    }
}
