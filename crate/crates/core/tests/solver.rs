//! CGLS, the α update and the IAS drivers against dense oracles and
//! structural identities.

mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use sparse_ias::experiments::{ExperimentName, ExperimentSpec};
use sparse_ias::hyperprior::{sensitivity_weights, theta_update, HyperParams};
use sparse_ias::linops::LinearMap;
use sparse_ias::solver::{
    alpha_update, cgls, cgls_with, hybrid_global_with, hybrid_local_with, ias_run, AlphaMode, CglsOptions,
    IasOptions, Phase, PhaseSwitch, Problem, SolveReport, StoppingRule,
};

use common::{randn, rel};

fn dense(rows: usize, cols: usize, seed: u64) -> (LinearMap, DMatrix<f64>) {
    let data = randn(rows * cols, seed);
    (LinearMap::dense(rows, cols, data.clone()).unwrap(), DMatrix::from_row_slice(rows, cols, &data))
}

fn exact() -> IasOptions {
    IasOptions { alpha_mode: AlphaMode::Exact, ..IasOptions::default() }
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

fn same_trajectory(a: &SolveReport, b: &SolveReport, len: usize) -> bool {
    a.objective_trace[..len] == b.objective_trace[..len] && a.cgls_counts[..len] == b.cgls_counts[..len]
}

#[test]
fn cgls_matches_normal_equations() {
    let (map, a) = dense(30, 20, 1);
    let b = randn(30, 2);
    let x = (a.transpose() * &a).lu().solve(&(a.transpose() * DVector::from_column_slice(&b))).unwrap();
    let out = cgls(&map, &b, 0.0, 200).unwrap();
    assert!(max_rel(&out.solution, x.as_slice()) < 1e-8);
    for w in out.residual_trace.windows(2) {
        assert!(w[1] <= w[0]);
    }
}

#[test]
fn damped_cgls_matches_tikhonov() {
    let (map, a) = dense(12, 18, 3);
    let b = randn(12, 4);
    let delta = 0.7;
    let normal = a.transpose() * &a + DMatrix::identity(18, 18) * (delta * delta);
    let x = normal.lu().solve(&(a.transpose() * DVector::from_column_slice(&b))).unwrap();
    let out = cgls_with(&map, &b, &CglsOptions { stop_level: 0.0, max_inner: 500, damp: delta }).unwrap();
    assert!(max_rel(&out.solution, x.as_slice()) < 1e-8);
}

#[test]
fn exact_alpha_update_is_the_tikhonov_solution() {
    let (map, a) = dense(10, 15, 5);
    let b = randn(10, 6);
    let theta: Vec<f64> = randn(15, 7).iter().map(|v| v.exp()).collect();
    let d_inv = DMatrix::from_diagonal(&DVector::from_iterator(15, theta.iter().map(|t| 1.0 / t)));
    let x = (a.transpose() * &a + d_inv).lu().solve(&(a.transpose() * DVector::from_column_slice(&b))).unwrap();
    let (alpha, _) = alpha_update(&theta, &b, &map, AlphaMode::Exact, None).unwrap();
    assert!(max_rel(&alpha, x.as_slice()) < 1e-8);
}

#[test]
fn alpha_update_degenerate_inputs() {
    let (map, _) = dense(10, 15, 8);
    let (alpha, out) = alpha_update(&[1.0; 15], &[0.0; 10], &map, AlphaMode::QuasiMap, None).unwrap();
    assert!(alpha.iter().all(|a| *a == 0.0));
    assert_eq!(out.iterations, 0);
    let b: Vec<f64> = randn(10, 9).iter().map(|v| 100.0 * v).collect();
    // uniform θ cancels in undamped CGLS, so only the exact update shrinks
    let (alpha, _) = alpha_update(&[1e-40; 15], &b, &map, AlphaMode::Exact, None).unwrap();
    assert!(alpha.iter().all(|a| a.abs() < 1e-10));
}

#[test]
fn zero_data_stays_at_the_prior_mode() {
    let (map, _) = dense(8, 12, 10);
    let problem = Problem::new(map, vec![0.0; 8]).unwrap();
    let scale: Vec<f64> = (1..=12).map(|j| j as f64).collect();
    let p = HyperParams::from_eta(0.5, 1e-2, scale.clone()).unwrap();
    let stop = StoppingRule { max_outer: 5, theta_rtol: 1e-300, ..StoppingRule::default() };
    let report = ias_run(&problem, &p, &stop, &IasOptions::default()).unwrap();
    assert!(report.final_state.alpha.iter().all(|a| *a == 0.0));
    for (t, s) in report.final_state.theta.iter().zip(&scale) {
        assert!(rel(*t, s * 4e-4) < 1e-12);
    }
    assert!(report.objective_trace.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn one_atom_fixed_point() {
    let problem = Problem::new(LinearMap::identity(1), vec![5.0]).unwrap();
    let p = HyperParams::from_eta(1.0, 1e-4, vec![1.0]).unwrap();
    let stop = StoppingRule { max_outer: 10_000, theta_rtol: 1e-15, ..StoppingRule::default() };
    let state = ias_run(&problem, &p, &stop, &exact()).unwrap().final_state;
    let (a, t) = (state.alpha[0], state.theta[0]);
    // normal equation (1 + 1/θ) α = b and the θ update at α
    assert!(rel((1.0 + 1.0 / t) * a, 5.0) < 1e-8);
    assert!(rel(t, theta_update(a, 1.0, &p).unwrap()) < 1e-8);
}

#[test]
fn exact_mode_descends() {
    let (map, _) = dense(20, 40, 11);
    let problem = Problem::new(map, randn(20, 12)).unwrap();
    for (r, eta) in [(1.0, 1e-3), (0.5, 1e-3), (-1.0, -2.5)] {
        let p = HyperParams::from_eta(r, eta, vec![0.1; 40]).unwrap();
        let stop = StoppingRule { max_outer: 40, theta_rtol: 1e-12, ..StoppingRule::default() };
        let report = ias_run(&problem, &p, &stop, &exact()).unwrap();
        for w in report.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-10, "r = {r}: {} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn theta_stays_above_the_prior_mode() {
    let (map, _) = dense(15, 30, 13);
    let problem = Problem::new(map, randn(15, 14)).unwrap();
    for (r, eta) in [(1.0, 1e-2), (0.5, 1e-3), (-1.0, -2.0)] {
        let p = HyperParams::from_eta(r, eta, vec![0.3; 30]).unwrap();
        let floor = p.theta_at_zero();
        let report = ias_run(&problem, &p, &StoppingRule::default(), &IasOptions::default()).unwrap();
        for (t, f) in report.final_state.theta.iter().zip(&floor) {
            assert!(*t > 0.0 && *t >= f * (1.0 - 1e-12));
        }
    }
}

#[test]
fn rescaled_columns_leave_the_reconstruction_unchanged() {
    let (map, a) = dense(12, 20, 15);
    let b = randn(12, 16);
    let c: Vec<f64> = (0..20).map(|j| 0.25 + 0.2 * j as f64).collect();
    let scaled = LinearMap::scale_columns(&map, &c).unwrap();
    let run = |m: &LinearMap| {
        let problem = Problem::new(m.clone(), b.clone()).unwrap();
        let p = HyperParams::from_eta(1.0, 1e-2, sensitivity_weights(m, 1.0).unwrap()).unwrap();
        let stop = StoppingRule { max_outer: 15, theta_rtol: 1e-300, ..StoppingRule::default() };
        ias_run(&problem, &p, &stop, &exact()).unwrap().final_state.alpha
    };
    let (alpha, alpha_c) = (run(&map), run(&scaled));
    let fit = &a * DVector::from_column_slice(&alpha);
    let fit_c = scaled.apply(&alpha_c).unwrap();
    assert!(max_rel(&fit_c, fit.as_slice()) < 1e-8);
    let back: Vec<f64> = alpha_c.iter().zip(&c).map(|(x, s)| x * s).collect();
    assert!(max_rel(&back, &alpha) < 1e-8);
}

#[test]
fn global_hybrid_boundary_cases() {
    let (map, _) = dense(15, 30, 17);
    let problem = Problem::new(map, randn(15, 18)).unwrap();
    let p1 = HyperParams::from_eta(1.0, 1e-2, vec![0.2; 30]).unwrap();
    let p2 = HyperParams::from_eta(0.5, 1e-3, vec![5.0; 30]).unwrap();
    let stop = StoppingRule { max_outer: 30, theta_rtol: 1e-6, phase_switch: PhaseSwitch::AfterFixed(4) };
    let opts = IasOptions::default();

    let plain = ias_run(&problem, &p1, &stop, &opts).unwrap();
    let same = hybrid_global_with(&problem, &p1, &p1, &stop, &opts).unwrap();
    let len = plain.iterations().min(same.iterations());
    assert!(same_trajectory(&plain, &same, len));

    let at_zero = StoppingRule { phase_switch: PhaseSwitch::AfterFixed(0), ..stop };
    let hybrid = hybrid_global_with(&problem, &p1, &p2, &at_zero, &opts).unwrap();
    let second = ias_run(&problem, &p2, &at_zero, &opts).unwrap();
    assert_eq!(hybrid.iterations(), second.iterations());
    assert!(same_trajectory(&hybrid, &second, second.iterations()));
    assert_eq!(hybrid.final_state.alpha, second.final_state.alpha);
    assert_eq!(hybrid.switch_iteration, Some(0));

    let switched = hybrid_global_with(&problem, &p1, &p2, &stop, &opts).unwrap();
    assert_eq!(switched.switch_iteration, Some(4));
    assert!(switched.final_state.phase.iter().all(|p| *p == Phase::Second));
}

#[test]
fn local_hybrid_boundary_cases() {
    let (map, _) = dense(15, 30, 19);
    let problem = Problem::new(map, randn(15, 20)).unwrap();
    let p1 = HyperParams::from_eta(1.0, 1e-2, vec![0.2; 30]).unwrap();
    let stop = StoppingRule { max_outer: 20, theta_rtol: 1e-6, ..StoppingRule::default() };
    let opts = IasOptions::default();

    // r ≥ 1 is convex everywhere, so every component switches at once
    let convex = HyperParams::from_eta(2.0, 1e-2, vec![0.2; 30]).unwrap();
    let all = hybrid_local_with(&problem, &p1, &convex, &stop, &opts).unwrap();
    assert!(all.final_state.switched_at.iter().all(|s| *s == Some(1)));

    // a vanishing threshold keeps everything in the first model
    let never = HyperParams::from_eta(0.5, 1e-3, vec![1e-30; 30]).unwrap();
    let none = hybrid_local_with(&problem, &p1, &never, &stop, &opts).unwrap();
    assert!(none.final_state.switched_at.iter().all(|s| s.is_none()));
    let plain = ias_run(&problem, &p1, &stop, &opts).unwrap();
    assert_eq!(none.iterations(), plain.iterations());
    assert!(same_trajectory(&none, &plain, plain.iterations()));
}

#[test]
fn local_switches_take_the_smallest_coefficients() {
    let spec = ExperimentSpec::defaults(ExperimentName::Deconv1d);
    let problem = spec.build().unwrap().whitened_problem().unwrap();
    let (p1, p2) = spec.hyper.params_for(&problem).unwrap();
    for k in [2, 5, 12] {
        let stop = StoppingRule { max_outer: k, theta_rtol: 1e-300, ..StoppingRule::default() };
        let state = hybrid_local_with(&problem, &p1, &p2, &stop, &IasOptions::default()).unwrap().final_state;
        let z: Vec<f64> =
            state.alpha.iter().zip(p1.theta_scale()).map(|(a, s)| a.abs() / s.sqrt()).collect();
        let just: Vec<usize> = (0..z.len()).filter(|&j| state.switched_at[j] == Some(k)).collect();
        let stay: Vec<usize> = (0..z.len()).filter(|&j| state.switched_at[j].is_none()).collect();
        let max_just = just.iter().map(|&j| z[j]).fold(0.0, f64::max);
        let min_stay = stay.iter().map(|&j| z[j]).fold(f64::INFINITY, f64::min);
        assert!(max_just < min_stay, "iteration {k}: {max_just} !< {min_stay}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cgls_residuals_never_increase(seed in any::<u64>(), m in 2usize..30, n in 2usize..30) {
        let (map, _) = dense(m, n, seed);
        let out = cgls(&map, &randn(m, seed ^ 3), 0.0, 3 * n).unwrap();
        for w in out.residual_trace.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn exact_descent_on_random_problems(seed in any::<u64>(), k in 0usize..3) {
        let (map, _) = dense(10, 20, seed);
        let problem = Problem::new(map, randn(10, seed ^ 5)).unwrap();
        let (r, eta) = [(1.0, 1e-2), (0.5, 1e-2), (-1.0, -2.0)][k];
        let p = HyperParams::from_eta(r, eta, vec![0.5; 20]).unwrap();
        let stop = StoppingRule { max_outer: 15, theta_rtol: 1e-12, ..StoppingRule::default() };
        let trace = ias_run(&problem, &p, &stop, &exact()).unwrap().objective_trace;
        for w in trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-10);
        }
    }

    #[test]
    fn column_permutation_permutes_alpha(seed in any::<u64>(), shift in 1usize..16) {
        let (m, n) = (8, 16);
        let data = randn(m * n, seed);
        let b = randn(m, seed ^ 7);
        let scale: Vec<f64> = randn(n, seed ^ 9).iter().map(|v| (0.5 * v).exp()).collect();
        let perm: Vec<usize> = (0..n).map(|j| (j + shift) % n).collect();
        let permuted: Vec<f64> = (0..m).flat_map(|i| perm.iter().map(move |&j| (i, j))).map(|(i, j)| data[i * n + j]).collect();
        let stop = StoppingRule { max_outer: 10, theta_rtol: 1e-300, ..StoppingRule::default() };
        let run = |d: Vec<f64>, s: Vec<f64>| {
            let problem = Problem::new(LinearMap::dense(m, n, d).unwrap(), b.clone()).unwrap();
            let p = HyperParams::from_eta(0.5, 1e-2, s).unwrap();
            ias_run(&problem, &p, &stop, &exact()).unwrap().final_state.alpha
        };
        let alpha = run(data.clone(), scale.clone());
        let alpha_p = run(permuted, perm.iter().map(|&j| scale[j]).collect());
        let expected: Vec<f64> = perm.iter().map(|&j| alpha[j]).collect();
        prop_assert!(max_rel(&alpha_p, &expected) < 1e-8);
    }
}
