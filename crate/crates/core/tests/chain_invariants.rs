use proptest::prelude::*;

use wsregen_core::chain::{
    count_regenerations, extract_identity_tours, run_split_chain, Ar1Kernel, SplitChainTrace, TwoStateKernel,
};
use wsregen_core::diagnostics::{autocorrelation, check_one_dependence, CheckStatus};

fn bell_rate(trace: &SplitChainTrace) -> f64 {
    let l = trace.lag();
    let eligible = (0..trace.len()).filter(|t| t % l == 0).count();
    trace.bells().iter().filter(|&&b| b).count() as f64 / eligible as f64
}

#[test]
fn two_state_bell_frequency_is_mean_h() {
    let k = TwoStateKernel::new(0.2, 0.3, 1).unwrap();
    let trace = run_split_chain(&k, 1_000_000, 1).unwrap();
    assert!((bell_rate(&trace) - 0.75).abs() < 0.005, "{}", bell_rate(&trace));
}

#[test]
fn ar1_bell_frequency_is_mean_h() {
    let k = Ar1Kernel::new(0.5, 1.0, 1.0).unwrap();
    let trace = run_split_chain(&k, 1_000_000, 2).unwrap();
    assert!((bell_rate(&trace) - k.mean_h()).abs() < 0.005);
    assert!((k.mean_h() - 0.3786).abs() < 1e-3);
}

#[test]
fn two_step_split_bell_frequency() {
    let k = TwoStateKernel::new(0.2, 0.3, 2).unwrap();
    let trace = run_split_chain(&k, 1_000_000, 3).unwrap();
    assert!((bell_rate(&trace) - k.mean_h()).abs() < 0.005);
    let tours = extract_identity_tours(&trace).unwrap();
    let mu = tours.total_length() as f64 / tours.len() as f64;
    assert!((mu - k.mean_tour_length()).abs() / k.mean_tour_length() < 0.01);
}

#[test]
fn regenerated_states_follow_q() {
    let k = TwoStateKernel::new(0.2, 0.3, 2).unwrap();
    let trace = run_split_chain(&k, 400_000, 4).unwrap();
    let starts: Vec<f64> = (2..=trace.len())
        .filter(|&t| trace.drawn_from_q(t))
        .map(|t| trace.state(t)[0])
        .collect();
    let freq = starts.iter().sum::<f64>() / starts.len() as f64;
    let q1 = k.q()[1];
    let se = (q1 * (1.0 - q1) / starts.len() as f64).sqrt();
    assert!((freq - q1).abs() < 4.0 * se, "{freq} vs {q1}");
}

#[test]
fn one_dependence_of_two_step_tours() {
    let k = TwoStateKernel::new(0.2, 0.3, 2).unwrap();
    let mut n = 40_000;
    let tours = loop {
        let trace = run_split_chain(&k, n, 5).unwrap();
        let tours = extract_identity_tours(&trace).unwrap();
        if tours.len() >= 10_000 {
            break tours;
        }
        n *= 2;
    };
    let check = check_one_dependence(&tours);
    assert_eq!(check.status, CheckStatus::Pass, "{:?}", check.meta);
    let band = 3.0 / (tours.len() as f64).sqrt();
    for lag in 2..=10 {
        assert!(autocorrelation(&tours.taus(), lag).abs() < band);
    }
}

#[test]
fn regeneration_count_matches_tours() {
    let k = TwoStateKernel::new(0.2, 0.3, 3).unwrap();
    let trace = run_split_chain(&k, 50_000, 6).unwrap();
    let tours = extract_identity_tours(&trace).unwrap();
    assert_eq!(count_regenerations(&trace, trace.len()).unwrap(), tours.len());
    assert!(count_regenerations(&trace, trace.len() + 1).is_err());
}

#[test]
fn unsplit_chain_never_regenerates() {
    let k = TwoStateKernel::without_minorization(0.2, 0.3).unwrap();
    let trace = run_split_chain(&k, 10_000, 7).unwrap();
    let tours = extract_identity_tours(&trace).unwrap();
    assert!(tours.is_empty());
    assert_eq!(tours.residual_len, 10_000);
}

#[test]
fn same_seed_same_trace() {
    let k = Ar1Kernel::new(0.5, 1.0, 1.0).unwrap();
    let a = run_split_chain(&k, 5_000, 8).unwrap();
    let b = run_split_chain(&k, 5_000, 8).unwrap();
    assert_eq!(a, b);
    let c = run_split_chain(&k, 5_000, 9).unwrap();
    assert_ne!(a, c);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tour_bookkeeping(a in 0.05f64..0.95, b in 0.05f64..0.95, lag in 1usize..5, n in 20usize..3000, seed: u64) {
        let k = TwoStateKernel::new(a, b, lag).unwrap();
        let trace = run_split_chain(&k, n, seed).unwrap();
        prop_assert_eq!(trace.len(), n);
        prop_assert!(trace.provenance_consistent());

        // bells only at eligible times, and the block after a bell starts from Q
        for (i, &bell) in trace.bells().iter().enumerate() {
            if bell {
                prop_assert_eq!(i % lag, 0);
                if i + lag < n {
                    prop_assert!(trace.drawn_from_q(i + lag + 1));
                }
            }
        }

        let tours = extract_identity_tours(&trace).unwrap();
        prop_assert_eq!(tours.total_length() + tours.residual_len, n);
        prop_assert_eq!(tours.len(), count_regenerations(&trace, n).unwrap());
        let covered: f64 = (1..=tours.total_length()).map(|t| trace.state(t)[0]).sum();
        let z_sum: f64 = tours.tours.iter().map(|t| t.z[0]).sum();
        prop_assert!((covered - z_sum).abs() < 1e-9);
        // T_0 = 0 and bells fall on t = 1, 1 + l, ...
        if let Some((first, rest)) = tours.tours.split_first() {
            prop_assert_eq!(first.tau % lag, 1 % lag);
            prop_assert!(rest.iter().all(|t| t.tau >= lag && t.tau % lag == 0));
        }
    }
}
