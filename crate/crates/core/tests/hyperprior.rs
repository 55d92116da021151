//! θ update, penalty limits and scale maps against direct evaluation.

mod common;

use proptest::prelude::*;
use sparse_ias::hyperprior::{
    compatible_scale, compatible_scale_for, convexity_threshold, penalty, penalty_component, sensitivity_weights,
    stationarity_residual, theta_update, theta_update_batch, HyperParams, Shape,
};
use sparse_ias::linops::LinearMap;

use common::{closed_theta, golden_theta, randn, rel, stationarity_gap, SHAPES};

const ALPHAS: [f64; 6] = [0.0, 1e-3, 0.5, 1.0, 10.0, 1e3];
const SCALES: [f64; 3] = [1e-6, 1.0, 1e3];

#[test]
fn update_examples() {
    let p = HyperParams::from_eta(1.0, 1e-4, vec![1.0]).unwrap();
    assert!(rel(theta_update(0.0, 1.0, &p).unwrap(), 1e-4) < 1e-15);
    let p = HyperParams::new(-1.0, 1.0, vec![1.0]).unwrap();
    assert!(rel(theta_update(1.0, 1.0, &p).unwrap(), 1.5 / 2.5) < 1e-15);
    let p = HyperParams::from_eta(0.5, 1e-3, vec![1.0]).unwrap();
    let t = theta_update(0.5, 1.0, &p).unwrap();
    assert!(rel(t, golden_theta(0.5, 1.0, 0.5, 1e-3)) < 1e-6);
}

#[test]
fn update_satisfies_stationarity_on_grid() {
    for &(r, beta) in &SHAPES {
        for &s in &SCALES {
            let p = HyperParams::new(r, beta, vec![s]).unwrap();
            for &a in &ALPHAS {
                let t = theta_update(a, s, &p).unwrap();
                assert!(t > 0.0);
                let gap = stationarity_gap(a, t, s, r, p.eta());
                assert!(gap <= 1e-10, "r = {r}, α = {a}, ϑ = {s}: gap {gap:e}");
                assert!(stationarity_residual(a, t, s, p.shape()) <= 1e-10);
                assert!(rel(t, golden_theta(a, s, r, p.eta())) <= 1e-6);
                if r.abs() == 1.0 {
                    assert!(rel(t, closed_theta(a, s, r, p.eta())) <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn batch_matches_per_component_oracle() {
    let n = 100;
    let alpha: Vec<f64> = randn(n, 1).iter().map(|v| 3.0 * v).collect();
    let scales: Vec<f64> = randn(n, 2).iter().map(|v| 10f64.powf(2.0 * v)).collect();
    let p = HyperParams::from_eta(0.5, 1e-3, scales.clone()).unwrap();
    let batch = theta_update_batch(&alpha, &scales, &p).unwrap();
    for j in 0..n {
        assert!(rel(batch[j], golden_theta(alpha[j], scales[j], 0.5, 1e-3)) <= 1e-6);
        assert!(rel(batch[j], theta_update(alpha[j], scales[j], &p).unwrap()) <= 1e-12);
    }
    let zeros = theta_update_batch(&vec![0.0; n], &scales, &p).unwrap();
    for j in 0..n {
        assert!(rel(zeros[j], scales[j] * 4e-6) < 1e-12);
    }
}

#[test]
fn l1_limit_improves_as_eta_vanishes() {
    let target = 2f64.sqrt();
    let mut last = f64::INFINITY;
    for eta in [1e-2, 1e-4, 1e-6, 1e-8] {
        let p = HyperParams::from_eta(1.0, eta, vec![1.0]).unwrap();
        let t = theta_update(1.0, 1.0, &p).unwrap();
        let err = (penalty(&[1.0], &[t], &p).unwrap().total - target).abs();
        assert!(err < last, "η = {eta}: error {err:e} did not shrink");
        last = err;
    }
    assert!(last / target < 1e-3);
}

#[test]
fn lp_identity_at_the_boundary() {
    let p = HyperParams::from_eta(0.5, 0.0, vec![1.0]).unwrap();
    let t = theta_update(1.0, 1.0, &p).unwrap();
    assert!(rel(penalty(&[1.0], &[t], &p).unwrap().total, 1.5) < 1e-9);

    for r in [0.25, 0.5, 0.75] {
        let n = 50;
        let alpha = randn(n, (r * 100.0) as u64);
        let scales: Vec<f64> = randn(n, 7).iter().map(|v| 10f64.powf(v.clamp(-3.0, 3.0))).collect();
        let p = HyperParams::new(r, 1.5 / r, scales.clone()).unwrap();
        assert_eq!(p.eta(), 0.0);
        let theta = theta_update_batch(&alpha, &scales, &p).unwrap();
        let pw = 2.0 * r / (r + 1.0);
        let c_r = (r + 1.0) / (2.0 * r).powf(r / (r + 1.0));
        let expected: f64 = alpha.iter().zip(&scales).map(|(a, s)| c_r * a.abs().powf(pw) / s.powf(pw / 2.0)).sum();
        assert!(rel(penalty(&alpha, &theta, &p).unwrap().total, expected) < 1e-8);
    }
}

#[test]
fn unit_ratio_penalty_is_one() {
    for &(r, beta) in &SHAPES {
        let eta = r * beta - 1.5;
        for &s in &SCALES {
            assert!((penalty_component(0.0, s, r, eta, s) - 1.0).abs() < 1e-15);
        }
    }
}

#[test]
fn compatibility_round_trip_and_post_check() {
    let scale = vec![0.5, 1.0, 7.0];
    let p1 = HyperParams::from_eta(1.0, 1e-4, scale.clone()).unwrap();
    let shape2 = Shape::from_eta(0.5, 1e-3).unwrap();
    let s2 = compatible_scale_for(&p1, shape2).unwrap();
    for (a, b) in s2.iter().zip(&scale) {
        assert!(rel(*a, 25.0 * b) < 1e-12);
    }
    let p2 = HyperParams::with_shape(shape2, s2.clone()).unwrap();
    let back = compatible_scale_for(&p2, p1.shape()).unwrap();
    for (a, b) in back.iter().zip(&scale) {
        assert!(rel(*a, *b) <= 1e-12);
    }
    for j in 0..3 {
        let t1 = theta_update(0.0, scale[j], &p1).unwrap();
        let t2 = theta_update(0.0, s2[j], &p2).unwrap();
        assert!(rel(t1, t2) <= 1e-12);
    }
    assert_eq!(compatible_scale_for(&p1, p1.shape()).unwrap(), scale);
    let q = HyperParams::new(2.0, 1.0, scale.clone()).unwrap();
    assert_eq!(compatible_scale(&q, 2.0, 1.0).unwrap(), scale);
}

#[test]
fn threshold_examples() {
    let p = HyperParams::from_eta(1.0, 1e-4, vec![1.0]).unwrap();
    assert_eq!(convexity_threshold(&p, 0).unwrap(), f64::INFINITY);
    let p = HyperParams::from_eta(0.5, 1e-3, vec![1.0]).unwrap();
    assert!(rel(convexity_threshold(&p, 0).unwrap(), 1.6e-5) < 1e-12);
    let p = HyperParams::new(-1.0, 1.0, vec![2.0]).unwrap();
    assert!(rel(convexity_threshold(&p, 0).unwrap(), 1.6) < 1e-12);
}

#[test]
fn sensitivity_of_cumsum_and_orthonormal_maps() {
    let w = sensitivity_weights(&LinearMap::cumsum(3), 1.0).unwrap();
    assert_eq!(w, vec![1.0 / 3.0, 0.5, 1.0]);
    let w2 = sensitivity_weights(&LinearMap::cumsum(3), 2.0).unwrap();
    assert!(w.iter().zip(&w2).all(|(a, b)| *b == 2.0 * a));
    for v in sensitivity_weights(&LinearMap::dct_synthesis(9), 1.0).unwrap() {
        assert!((v - 1.0).abs() < 1e-12);
    }
}

fn shape_index() -> impl Strategy<Value = usize> {
    0..SHAPES.len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn update_is_even_and_increasing(k in shape_index(), a in 1e-4f64..1e3, step in 1e-3f64..10.0, s in 1e-4f64..1e3) {
        let (r, beta) = SHAPES[k];
        let p = HyperParams::new(r, beta, vec![s]).unwrap();
        let t = theta_update(a, s, &p).unwrap();
        prop_assert!(t > 0.0);
        prop_assert_eq!(t, theta_update(-a, s, &p).unwrap());
        prop_assert!(theta_update(a * (1.0 + step), s, &p).unwrap() > t);
        prop_assert!(theta_update(0.0, s, &p).unwrap() < t);
    }

    #[test]
    fn update_scales_with_the_variance_scale(k in shape_index(), a in -1e2f64..1e2, s in 1e-3f64..1e2, c in 1e-2f64..1e2) {
        let (r, beta) = SHAPES[k];
        let p = HyperParams::new(r, beta, vec![s]).unwrap();
        let t = theta_update(a, s, &p).unwrap();
        let tc = theta_update(c * a, c * c * s, &p).unwrap();
        prop_assert!(rel(tc, c * c * t) < 1e-10);
    }

    #[test]
    fn batch_is_permutation_equivariant(k in shape_index(), seed in any::<u64>(), n in 1usize..40, shift in 0usize..40) {
        let (r, beta) = SHAPES[k];
        let alpha = randn(n, seed);
        let scales: Vec<f64> = randn(n, seed ^ 1).iter().map(|v| v.exp()).collect();
        let p = HyperParams::new(r, beta, scales.clone()).unwrap();
        let theta = theta_update_batch(&alpha, &scales, &p).unwrap();
        let perm: Vec<usize> = (0..n).map(|j| (j * 7 + shift) % n).collect();
        let is_perm = { let mut s = perm.clone(); s.sort(); s.dedup(); s.len() == n };
        prop_assume!(is_perm);
        let pa: Vec<f64> = perm.iter().map(|&j| alpha[j]).collect();
        let ps: Vec<f64> = perm.iter().map(|&j| scales[j]).collect();
        let pp = HyperParams::new(r, beta, ps.clone()).unwrap();
        let pt = theta_update_batch(&pa, &ps, &pp).unwrap();
        for (i, &j) in perm.iter().enumerate() {
            prop_assert!(rel(pt[i], theta[j]) < 1e-12);
        }
    }
}
