//! Iterative alternating sequential (IAS) minimization of
//! `F(α, θ) = ½‖b − AWα‖² + P(α, θ)` and its hybrid variants.

use super::cgls::{cgls_with, CglsOptions, CglsOutcome};
use crate::error::{check_len, Error, Result};
use crate::hyperprior::{
    compatible_params, penalty_component, update::batch_into, HyperParams, Shape,
};
use crate::linops::LinearMap;
use crate::vector::norm2;

/// Lower bound applied to `θ` before forming `D_θ^{1/2}`.
pub const THETA_FLOOR: f64 = 1e-30;

/// A whitened sparse recovery problem `b = AWα + ε`, `ε ~ N(0, I)`.
#[derive(Clone, Debug)]
pub struct Problem {
    forward_dict: LinearMap,
    data: Vec<f64>,
    frame_lengths: Vec<usize>,
}

impl Problem {
    pub fn new(forward_dict: LinearMap, data: Vec<f64>) -> Result<Self> {
        let n = forward_dict.cols();
        Self::with_frames(forward_dict, data, vec![n])
    }

    /// `frame_lengths` splits the coefficient vector into sub-frames for reporting.
    pub fn with_frames(forward_dict: LinearMap, data: Vec<f64>, frame_lengths: Vec<usize>) -> Result<Self> {
        check_len(data.len(), forward_dict.rows())?;
        check_len(frame_lengths.iter().sum(), forward_dict.cols())?;
        if !crate::vector::all_finite(&data) {
            return Err(Error::domain("data vector has non-finite entries"));
        }
        Ok(Problem { forward_dict, data, frame_lengths })
    }

    pub fn forward_dict(&self) -> &LinearMap {
        &self.forward_dict
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn frame_lengths(&self) -> &[usize] {
        &self.frame_lengths
    }

    pub fn atom_count(&self) -> usize {
        self.forward_dict.cols()
    }
}

/// When the global hybrid hands off to the second hyperprior.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhaseSwitch {
    AfterFixed(usize),
    OnThetaRtol(f64),
    WhicheverFirst(usize, f64),
}

impl PhaseSwitch {
    fn fires(&self, iterations: usize, theta_change: f64) -> bool {
        match *self {
            PhaseSwitch::AfterFixed(k) => iterations >= k,
            PhaseSwitch::OnThetaRtol(tol) => theta_change < tol,
            PhaseSwitch::WhicheverFirst(k, tol) => iterations >= k || theta_change < tol,
        }
    }

    fn fires_immediately(&self) -> bool {
        matches!(self, PhaseSwitch::AfterFixed(0) | PhaseSwitch::WhicheverFirst(0, _))
    }
}

/// Outer-loop stopping. `max_outer` and `theta_rtol` govern the final
/// phase; the first phase of a global hybrid ends by `phase_switch` (capped
/// at `max_outer` iterations).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StoppingRule {
    pub max_outer: usize,
    /// Relative ℓ2 change of `θ` between outer iterations.
    pub theta_rtol: f64,
    pub phase_switch: PhaseSwitch,
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule { max_outer: 100, theta_rtol: 1e-3, phase_switch: PhaseSwitch::AfterFixed(10) }
    }
}

impl StoppingRule {
    fn validate(&self) -> Result<()> {
        if self.max_outer == 0 {
            return Err(Error::parameter("max_outer must be at least 1"));
        }
        let tols = match self.phase_switch {
            PhaseSwitch::OnThetaRtol(t) | PhaseSwitch::WhicheverFirst(_, t) => vec![self.theta_rtol, t],
            PhaseSwitch::AfterFixed(_) => vec![self.theta_rtol],
        };
        if tols.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::parameter("stopping tolerances must be positive"));
        }
        Ok(())
    }
}

/// How the `α` least-squares subproblem is solved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlphaMode {
    /// CGLS on `AW D_θ^{1/2}` stopped at the discrepancy `sqrt(m)`.
    QuasiMap,
    /// Damped CGLS run to convergence: the exact Tikhonov minimizer in `α`.
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IasOptions {
    /// Clamp `α` to the nonnegative orthant after each `α` update.
    pub nonneg_projection: bool,
    pub alpha_mode: AlphaMode,
    /// CGLS iteration cap; defaults to `10 N` (exact) or `max(2 min(m, N), 100)`.
    pub max_inner: Option<usize>,
    /// Coefficients with `|α_j| > support_threshold · max|α|` count as support.
    pub support_threshold: f64,
}

impl Default for IasOptions {
    fn default() -> Self {
        IasOptions {
            nonneg_projection: false,
            alpha_mode: AlphaMode::QuasiMap,
            max_inner: None,
            support_threshold: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    First,
    Second,
}

#[derive(Clone, Debug)]
pub struct IasState {
    pub alpha: Vec<f64>,
    pub theta: Vec<f64>,
    pub outer_iter: usize,
    pub phase: Vec<Phase>,
    /// Outer iteration after which each component moved to the second model.
    pub switched_at: Vec<Option<usize>>,
    pub first: HyperParams,
    pub second: Option<HyperParams>,
}

impl IasState {
    pub fn active_params(&self, j: usize) -> &HyperParams {
        match self.phase[j] {
            Phase::First => &self.first,
            Phase::Second => self.second.as_ref().unwrap_or(&self.first),
        }
    }

    /// `θ_j / ϑ_j` under the scales of the last model in use.
    pub fn scaled_theta(&self) -> Vec<f64> {
        let scale = self.second.as_ref().unwrap_or(&self.first).theta_scale();
        self.theta.iter().zip(scale).map(|(t, s)| t / s).collect()
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub objective_trace: Vec<f64>,
    pub cgls_counts: Vec<usize>,
    /// `‖b − AWα‖` after each outer iteration.
    pub data_residual: Vec<f64>,
    /// Relative ℓ2 change of `θ` in each outer iteration.
    pub theta_change: Vec<f64>,
    pub support_per_frame: Vec<Vec<usize>>,
    /// Outer iteration after which the global hybrid switched models.
    pub switch_iteration: Option<usize>,
    pub final_state: IasState,
}

impl SolveReport {
    pub fn iterations(&self) -> usize {
        self.objective_trace.len()
    }
}

/// One `α` update: `α = D_θ^{1/2} γ` with `γ` from CGLS on `AW D_θ^{1/2}`.
pub fn alpha_update(
    theta: &[f64],
    b: &[f64],
    forward_dict: &LinearMap,
    mode: AlphaMode,
    max_inner: Option<usize>,
) -> Result<(Vec<f64>, CglsOutcome)> {
    check_len(theta.len(), forward_dict.cols())?;
    check_len(b.len(), forward_dict.rows())?;
    let sqrt_theta: Vec<f64> = theta.iter().map(|t| t.max(THETA_FLOOR).sqrt()).collect();
    let scaled = LinearMap::scale_columns(forward_dict, &sqrt_theta)?;
    let (m, n) = (forward_dict.rows(), forward_dict.cols());
    let opts = match mode {
        AlphaMode::QuasiMap => CglsOptions {
            stop_level: (m as f64).sqrt(),
            max_inner: max_inner.unwrap_or((2 * m.min(n)).max(100)),
            damp: 0.0,
        },
        AlphaMode::Exact => {
            CglsOptions { stop_level: 0.0, max_inner: max_inner.unwrap_or(10 * n), damp: 1.0 }
        }
    };
    let outcome = cgls_with(&scaled, b, &opts)?;
    let alpha = outcome.solution.iter().zip(&sqrt_theta).map(|(g, s)| g * s).collect();
    Ok((alpha, outcome))
}

/// Plain IAS under a single hyperparameter set.
pub fn ias_run(
    problem: &Problem,
    params: &HyperParams,
    stop: &StoppingRule,
    options: &IasOptions,
) -> Result<SolveReport> {
    drive(problem, params.clone(), None, Schedule::Single, stop, options)
}

/// Global hybrid: IAS under `params1` until `stop.phase_switch` fires, then
/// under `(r2, β2)` with compatible scales, restarting from the current point.
pub fn hybrid_global(
    problem: &Problem,
    params1: &HyperParams,
    r2: f64,
    beta2: f64,
    stop: &StoppingRule,
    options: &IasOptions,
) -> Result<SolveReport> {
    let params2 = compatible_params(params1, Shape::new(r2, beta2)?)?;
    hybrid_global_with(problem, params1, &params2, stop, options)
}

/// [`hybrid_global`] with an explicit second parameter set.
pub fn hybrid_global_with(
    problem: &Problem,
    params1: &HyperParams,
    params2: &HyperParams,
    stop: &StoppingRule,
    options: &IasOptions,
) -> Result<SolveReport> {
    let schedule = Schedule::Global(stop.phase_switch);
    drive(problem, params1.clone(), Some(params2.clone()), schedule, stop, options)
}

/// Local hybrid: after each outer iteration, every component whose `θ_j`
/// lies below the convexity threshold of the second model permanently
/// switches to it.
pub fn hybrid_local(
    problem: &Problem,
    params1: &HyperParams,
    r2: f64,
    beta2: f64,
    stop: &StoppingRule,
    options: &IasOptions,
) -> Result<SolveReport> {
    let params2 = compatible_params(params1, Shape::new(r2, beta2)?)?;
    hybrid_local_with(problem, params1, &params2, stop, options)
}

pub fn hybrid_local_with(
    problem: &Problem,
    params1: &HyperParams,
    params2: &HyperParams,
    stop: &StoppingRule,
    options: &IasOptions,
) -> Result<SolveReport> {
    drive(problem, params1.clone(), Some(params2.clone()), Schedule::Local, stop, options)
}

#[derive(Clone, Copy, Debug)]
enum Schedule {
    Single,
    Global(PhaseSwitch),
    Local,
}

fn check_params(problem: &Problem, params: &HyperParams) -> Result<()> {
    check_len(params.len(), problem.atom_count())?;
    if !params.shape().is_strictly_admissible() {
        return Err(Error::parameter(format!(
            "IAS needs eta/r > 0 (r = {}, eta = {})",
            params.r(),
            params.eta()
        )));
    }
    Ok(())
}

fn drive(
    problem: &Problem,
    first: HyperParams,
    second: Option<HyperParams>,
    schedule: Schedule,
    stop: &StoppingRule,
    options: &IasOptions,
) -> Result<SolveReport> {
    stop.validate()?;
    check_params(problem, &first)?;
    if let Some(p) = &second {
        check_params(problem, p)?;
    }
    let n = problem.atom_count();
    let forward = problem.forward_dict();
    let b = problem.data();

    let mut state = IasState {
        alpha: vec![0.0; n],
        theta: first.theta_at_zero(),
        outer_iter: 0,
        phase: vec![Phase::First; n],
        switched_at: vec![None; n],
        first,
        second,
    };
    let mut switch_iteration = None;
    if let (Schedule::Global(sw), Some(p2)) = (schedule, &state.second) {
        if sw.fires_immediately() {
            state.phase.fill(Phase::Second);
            state.switched_at.fill(Some(0));
            state.theta = p2.theta_at_zero();
            switch_iteration = Some(0);
        }
    }
    let local_thresholds = match (schedule, &state.second) {
        (Schedule::Local, Some(p2)) => {
            let t = p2.shape().scaled_convexity_threshold()?;
            Some(p2.theta_scale().iter().map(|s| s * t).collect::<Vec<f64>>())
        }
        _ => None,
    };

    let mut report = SolveReport {
        objective_trace: Vec::new(),
        cgls_counts: Vec::new(),
        data_residual: Vec::new(),
        theta_change: Vec::new(),
        support_per_frame: Vec::new(),
        switch_iteration,
        final_state: state.clone(),
    };
    let mut iters_in_phase = 0;
    let mut fit = vec![0.0; b.len()];

    loop {
        state.outer_iter += 1;
        iters_in_phase += 1;

        let (mut alpha, outcome) =
            alpha_update(&state.theta, b, forward, options.alpha_mode, options.max_inner)?;
        if options.nonneg_projection {
            alpha.iter_mut().for_each(|a| *a = a.max(0.0));
        }
        let theta_new = update_theta(&state, &alpha);
        let change = norm2(&crate::vector::sub(&theta_new, &state.theta)) / norm2(&state.theta);
        state.alpha = alpha;
        state.theta = theta_new;

        forward.apply_into(&state.alpha, &mut fit);
        let misfit = norm2(&crate::vector::sub(b, &fit));
        report.objective_trace.push(0.5 * misfit * misfit + total_penalty(&state));
        report.data_residual.push(misfit);
        report.cgls_counts.push(outcome.iterations);
        report.theta_change.push(change);
        report.support_per_frame.push(support_per_frame(
            &state.alpha,
            problem.frame_lengths(),
            options.support_threshold,
        ));

        let done = match schedule {
            Schedule::Single => change < stop.theta_rtol || iters_in_phase >= stop.max_outer,
            Schedule::Global(sw) => {
                if state.phase[0] == Phase::First {
                    if sw.fires(iters_in_phase, change) || iters_in_phase >= stop.max_outer {
                        state.phase.fill(Phase::Second);
                        state.switched_at.fill(Some(state.outer_iter));
                        report.switch_iteration = Some(state.outer_iter);
                        iters_in_phase = 0;
                    }
                    false
                } else {
                    change < stop.theta_rtol || iters_in_phase >= stop.max_outer
                }
            }
            Schedule::Local => {
                let thresholds = local_thresholds.as_ref().expect("local schedule has thresholds");
                for j in 0..n {
                    if state.phase[j] == Phase::First && state.theta[j] < thresholds[j] {
                        state.phase[j] = Phase::Second;
                        state.switched_at[j] = Some(state.outer_iter);
                    }
                }
                change < stop.theta_rtol || iters_in_phase >= stop.max_outer
            }
        };
        if done {
            break;
        }
    }
    report.final_state = state;
    Ok(report)
}

fn update_theta(state: &IasState, alpha: &[f64]) -> Vec<f64> {
    let mut theta = vec![0.0; alpha.len()];
    let second_count = state.phase.iter().filter(|p| **p == Phase::Second).count();
    let uniform = match (second_count, &state.second) {
        (0, _) => Some(&state.first),
        (c, Some(p2)) if c == alpha.len() => Some(p2),
        _ => None,
    };
    if let Some(p) = uniform {
        batch_into(p.shape(), alpha, p.theta_scale(), &mut theta);
        return theta;
    }
    for phase in [Phase::First, Phase::Second] {
        let idx: Vec<usize> = (0..alpha.len()).filter(|&j| state.phase[j] == phase).collect();
        if idx.is_empty() {
            continue;
        }
        let p = state.active_params(idx[0]);
        let a: Vec<f64> = idx.iter().map(|&j| alpha[j]).collect();
        let s: Vec<f64> = idx.iter().map(|&j| p.theta_scale()[j]).collect();
        let mut t = vec![0.0; idx.len()];
        batch_into(p.shape(), &a, &s, &mut t);
        for (k, &j) in idx.iter().enumerate() {
            theta[j] = t[k];
        }
    }
    theta
}

fn total_penalty(state: &IasState) -> f64 {
    (0..state.alpha.len())
        .map(|j| {
            let p = state.active_params(j);
            penalty_component(state.alpha[j], state.theta[j], p.r(), p.eta(), p.theta_scale()[j])
        })
        .sum()
}

pub(crate) fn support_per_frame(alpha: &[f64], frame_lengths: &[usize], rel_threshold: f64) -> Vec<usize> {
    let cutoff = rel_threshold * crate::vector::max_abs(alpha);
    let mut start = 0;
    frame_lengths
        .iter()
        .map(|&len| {
            let count = alpha[start..start + len].iter().filter(|a| a.abs() > cutoff).count();
            start += len;
            count
        })
        .collect()
}
