//! Conjugate gradient for least squares with discrepancy-based early stopping.

use crate::error::{check_len, Error, Result};
use crate::linops::LinearMap;
use crate::vector::{axpy, dot, norm2};

/// Relative normal-equation residual at which the iteration is considered converged.
pub const NORMAL_RESIDUAL_RTOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CglsOptions {
    /// Stop at the first iterate with `‖b − Mγ‖ ≤ stop_level`.
    pub stop_level: f64,
    pub max_inner: usize,
    /// Tikhonov damping `δ` in `min ‖Mγ − b‖² + δ²‖γ‖²`. Zero for plain least squares.
    pub damp: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CglsStop {
    Discrepancy,
    NormalResidual,
    MaxIterations,
}

#[derive(Clone, Debug)]
pub struct CglsOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// `‖b − Mγ_k‖` for `k = 0..=iterations`.
    pub residual_trace: Vec<f64>,
    pub stop: CglsStop,
}

/// Plain CGLS from a zero initial iterate.
pub fn cgls(map: &LinearMap, b: &[f64], stop_level: f64, max_inner: usize) -> Result<CglsOutcome> {
    cgls_with(map, b, &CglsOptions { stop_level, max_inner, damp: 0.0 })
}

pub fn cgls_with(map: &LinearMap, b: &[f64], opts: &CglsOptions) -> Result<CglsOutcome> {
    check_len(b.len(), map.rows())?;
    if !(opts.stop_level >= 0.0) {
        return Err(Error::domain("CGLS stop level must be nonnegative"));
    }
    if !(opts.damp >= 0.0) || !opts.damp.is_finite() {
        return Err(Error::domain("CGLS damping must be nonnegative"));
    }
    let damp2 = opts.damp * opts.damp;
    let (m, n) = (map.rows(), map.cols());

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut s = vec![0.0; n];
    map.apply_adjoint_into(&r, &mut s);
    let mut p = s.clone();
    let mut q = vec![0.0; m];
    let mut gamma = dot(&s, &s);
    let normal0 = gamma.sqrt();

    let mut residual_trace = vec![norm2(&r)];
    let mut iterations = 0;
    let stop = loop {
        if *residual_trace.last().unwrap() <= opts.stop_level {
            break CglsStop::Discrepancy;
        }
        if gamma.sqrt() <= NORMAL_RESIDUAL_RTOL * normal0 || gamma == 0.0 {
            break CglsStop::NormalResidual;
        }
        if iterations >= opts.max_inner {
            break CglsStop::MaxIterations;
        }
        map.apply_into(&p, &mut q);
        let curvature = dot(&q, &q) + damp2 * dot(&p, &p);
        if !(curvature > 0.0) {
            break CglsStop::NormalResidual;
        }
        let step = gamma / curvature;
        axpy(step, &p, &mut x);
        axpy(-step, &q, &mut r);
        map.apply_adjoint_into(&r, &mut s);
        if damp2 > 0.0 {
            axpy(-damp2, &x, &mut s);
        }
        let gamma_next = dot(&s, &s);
        let beta = gamma_next / gamma;
        gamma = gamma_next;
        for (pi, si) in p.iter_mut().zip(&s) {
            *pi = si + beta * *pi;
        }
        iterations += 1;
        residual_trace.push(norm2(&r));
    };

    Ok(CglsOutcome { solution: x, iterations, residual_trace, stop })
}
