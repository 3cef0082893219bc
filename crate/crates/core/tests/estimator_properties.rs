use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

use wsregen_core::chain::{Tour, TourSequence};
use wsregen_core::estimators::{
    batch_means, is_symmetric, psd_project, regen_sigma_f_hat, regen_sigma_z_hat, regen_sigma_z_hat_with,
    BatchSchedule, Centering, SYMMETRY_TOL,
};
use wsregen_core::rng;

fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
    let scale = a.abs().max().max(b.abs().max()).max(1.0);
    (a - b).abs().max() <= tol * scale
}

fn random_samples(n: usize, d: usize, seed: u64) -> DMatrix<f64> {
    let mut r = rng::seeded(seed);
    // AR(1) columns with some cross-correlation
    let mut m = DMatrix::zeros(n, d);
    let mut x = vec![0.0; d];
    for i in 0..n {
        let common: f64 = r.sample(StandardNormal);
        for j in 0..d {
            let e: f64 = r.sample(StandardNormal);
            x[j] = 0.6 * x[j] + e + 0.5 * common;
            m[(i, j)] = x[j];
        }
    }
    m
}

fn random_tours(r_len: usize, d: usize, seed: u64) -> TourSequence {
    let mut r = rng::seeded(seed);
    let tours = (0..r_len)
        .map(|_| {
            let tau = r.random_range(1..6usize);
            let z = (0..d)
                .map(|_| tau as f64 * 0.3 + r.sample::<f64, _>(StandardNormal))
                .collect();
            Tour { z, tau }
        })
        .collect();
    TourSequence::new(d, tours, 0).unwrap()
}

fn shift_tours(t: &TourSequence, c: &[f64]) -> TourSequence {
    let tours = t
        .tours
        .iter()
        .map(|tour| Tour {
            z: tour.z.iter().zip(c).map(|(z, c)| z + tour.tau as f64 * c).collect(),
            tau: tour.tau,
        })
        .collect();
    TourSequence::new(t.dim, tours, t.residual_len).unwrap()
}

fn scale_tours(t: &TourSequence, s: f64) -> TourSequence {
    let tours = t
        .tours
        .iter()
        .map(|tour| Tour {
            z: tour.z.iter().map(|z| s * z).collect(),
            tau: tour.tau,
        })
        .collect();
    TourSequence::new(t.dim, tours, t.residual_len).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn batch_means_affine(seed: u64, c0 in -50.0f64..50.0, c1 in -50.0f64..50.0, s in -5.0f64..5.0) {
        let x = random_samples(500, 2, seed);
        let sched = BatchSchedule::power(0.5);
        let base = batch_means(&x, &sched).unwrap().matrix;
        let mut shifted = x.clone();
        for mut row in shifted.row_iter_mut() {
            row[0] += c0;
            row[1] += c1;
        }
        prop_assert!(close(&batch_means(&shifted, &sched).unwrap().matrix, &base, 1e-10));
        prop_assert!(close(&batch_means(&(&x * s), &sched).unwrap().matrix, &(&base * (s * s)), 1e-10));
        prop_assert!(is_symmetric(&base, SYMMETRY_TOL));
    }

    #[test]
    fn regenerative_affine(seed: u64, c0 in -50.0f64..50.0, c1 in -50.0f64..50.0, s in -5.0f64..5.0) {
        let t = random_tours(300, 2, seed);
        let base = regen_sigma_f_hat(&t).unwrap().matrix;
        let shifted = regen_sigma_f_hat(&shift_tours(&t, &[c0, c1])).unwrap().matrix;
        prop_assert!(close(&shifted, &base, 1e-10));
        let scaled = regen_sigma_f_hat(&scale_tours(&t, s)).unwrap().matrix;
        prop_assert!(close(&scaled, &(&base * (s * s)), 1e-10));
        prop_assert!(is_symmetric(&base, SYMMETRY_TOL));
    }

    #[test]
    fn projected_estimates_are_psd(seed: u64) {
        let t = random_tours(20, 3, seed);
        let m = regen_sigma_z_hat(&t).unwrap();
        let p = psd_project(&m).unwrap();
        prop_assert!(p.symmetric_eigenvalues().min() >= -1e-12);
        prop_assert!(close(&psd_project(&p).unwrap(), &p, 1e-12));
    }
}

/// Tours with `Z_k - tau_k m = e_k + e_{k-1}`: the centred sums are MA(1)
/// with `gamma_0 = 2`, `gamma_1 = 1`, so `Sigma_Z = 4`.
fn ma1_tours(r_len: usize, m: f64, seed: u64) -> TourSequence {
    let mut r = rng::seeded(seed);
    let mut prev: f64 = r.sample(StandardNormal);
    let tours = (0..r_len)
        .map(|_| {
            let e: f64 = r.sample(StandardNormal);
            let tau = r.random_range(1..4usize);
            let z = tau as f64 * m + e + prev;
            prev = e;
            Tour { z: vec![z], tau }
        })
        .collect();
    TourSequence::new(1, tours, 0).unwrap()
}

#[test]
fn ma1_tours_sigma_z() {
    let t = ma1_tours(100_000, 0.0, 1);
    let v = regen_sigma_z_hat(&t).unwrap()[(0, 0)];
    assert!((v - 4.0).abs() / 4.0 < 0.1, "{v}");
}

#[test]
fn ma1_tours_with_drift_need_ratio_centring() {
    let t = ma1_tours(100_000, 1.5, 2);
    let ratio = regen_sigma_z_hat_with(&t, Centering::Ratio).unwrap()[(0, 0)];
    assert!((ratio - 4.0).abs() / 4.0 < 0.1, "{ratio}");
    // centring at the mean tour sum also counts the spread of tau * m
    let tour_mean = regen_sigma_z_hat_with(&t, Centering::TourMean).unwrap()[(0, 0)];
    assert!(tour_mean > 4.0 * 1.2, "{tour_mean}");
}

#[test]
fn iid_gaussian_batch_means_near_identity() {
    let mut r = rng::seeded(3);
    let x = DMatrix::from_fn(200_000, 2, |_, _| r.sample::<f64, _>(StandardNormal));
    let est = batch_means(&x, &BatchSchedule::power(0.5)).unwrap();
    assert!(close(&est.matrix, &DMatrix::identity(2, 2), 0.15));
}
