//! Generalized gamma hyperprior on the prior variances.
//!
//! With `η = rβ − 3/2`, the penalty of one coefficient is
//!
//! ```text
//! P_j(α_j, θ_j) = α_j² / (2θ_j) − η log(θ_j / ϑ_j) + (θ_j / ϑ_j)^r
//! ```
//!
//! and its minimizer in `θ_j` is `θ_j = ϑ_j φ(|α_j| / sqrt(ϑ_j))`, where `φ`
//! solves `φ' = 2zφ / (2r²φ^{r+1} + z²)` with `φ(0) = (η/r)^{1/r}`.

mod penalty;
pub(crate) mod update;

pub use penalty::{objective, penalty, penalty_component, PenaltyValue};
pub use update::{stationarity_residual, theta_update, theta_update_batch};

use crate::error::{check_len, Error, Result};
use crate::linops::LinearMap;

/// Shape parameters `(r, β)` of the generalized gamma hyperprior, without
/// the per-component scales.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Shape {
    r: f64,
    beta: f64,
    eta: f64,
}

impl Shape {
    /// Validates `r ≠ 0`, `β > 0` and admissibility `η/r > 0`. The boundary
    /// `η = 0` with `r > 0` (the weighted ℓp limit) is accepted; there
    /// `φ(0) = 0`.
    pub fn new(r: f64, beta: f64) -> Result<Self> {
        Self::validated(r, beta, r * beta - 1.5)
    }

    /// Builds the shape from `(r, η)`, keeping `η` exactly as given.
    pub fn from_eta(r: f64, eta: f64) -> Result<Self> {
        if r == 0.0 || !r.is_finite() {
            return Err(Error::parameter(format!("r must be finite and nonzero, got {r}")));
        }
        Self::validated(r, (eta + 1.5) / r, eta)
    }

    fn validated(r: f64, beta: f64, eta: f64) -> Result<Self> {
        if r == 0.0 || !r.is_finite() {
            return Err(Error::parameter(format!("r must be finite and nonzero, got {r}")));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::parameter(format!("beta must be positive, got {beta}")));
        }
        let boundary = eta == 0.0 && r > 0.0;
        if !(eta / r > 0.0) && !boundary {
            return Err(Error::parameter(format!(
                "inadmissible hyperparameters r = {r}, beta = {beta}: eta/r = {} must be positive",
                eta / r
            )));
        }
        Ok(Shape { r, beta, eta })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// True when `η/r > 0` strictly, so that `φ(0) > 0`.
    pub fn is_strictly_admissible(&self) -> bool {
        self.eta / self.r > 0.0
    }

    /// `φ(0) = (η/r)^{1/r}`.
    pub fn phi_zero(&self) -> f64 {
        if self.eta == 0.0 {
            return 0.0;
        }
        (self.eta / self.r).powf(1.0 / self.r)
    }

    /// Scaled convexity bound `(η / (r|r−1|))^{1/r}`; `+∞` in the globally
    /// convex regime `r ≥ 1`.
    pub fn scaled_convexity_threshold(&self) -> Result<f64> {
        if self.r >= 1.0 {
            if self.eta > 0.0 {
                return Ok(f64::INFINITY);
            }
            return Err(Error::parameter("r >= 1 requires eta > 0 for convexity"));
        }
        Ok((self.eta / (self.r * (self.r - 1.0).abs())).powf(1.0 / self.r))
    }
}

/// One full hyperparameter set `(r, β, ϑ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperParams {
    shape: Shape,
    theta_scale: Vec<f64>,
}

impl HyperParams {
    pub fn new(r: f64, beta: f64, theta_scale: Vec<f64>) -> Result<Self> {
        Self::with_shape(Shape::new(r, beta)?, theta_scale)
    }

    pub fn from_eta(r: f64, eta: f64, theta_scale: Vec<f64>) -> Result<Self> {
        Self::with_shape(Shape::from_eta(r, eta)?, theta_scale)
    }

    pub fn with_shape(shape: Shape, theta_scale: Vec<f64>) -> Result<Self> {
        if let Some(j) = theta_scale.iter().position(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::parameter(format!(
                "scale parameter {j} must be positive and finite, got {}",
                theta_scale[j]
            )));
        }
        Ok(HyperParams { shape, theta_scale })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn r(&self) -> f64 {
        self.shape.r
    }

    pub fn beta(&self) -> f64 {
        self.shape.beta
    }

    pub fn eta(&self) -> f64 {
        self.shape.eta
    }

    pub fn theta_scale(&self) -> &[f64] {
        &self.theta_scale
    }

    pub fn len(&self) -> usize {
        self.theta_scale.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta_scale.is_empty()
    }

    /// `θ_j` at `α_j = 0`, i.e. `ϑ_j φ(0)`.
    pub fn theta_at_zero(&self) -> Vec<f64> {
        let phi0 = self.shape.phi_zero();
        self.theta_scale.iter().map(|s| s * phi0).collect()
    }
}

pub fn phi_zero(params: &HyperParams) -> Result<f64> {
    if !params.shape.is_strictly_admissible() {
        return Err(Error::parameter("phi(0) requires eta/r > 0"));
    }
    Ok(params.shape.phi_zero())
}

/// Largest `θ_j` for which the objective stays convex in component `j`.
pub fn convexity_threshold(params: &HyperParams, j: usize) -> Result<f64> {
    let scale = *params
        .theta_scale
        .get(j)
        .ok_or(Error::Size { expected: params.len(), actual: j })?;
    Ok(scale * params.shape.scaled_convexity_threshold()?)
}

/// Scales `ϑ⁽²⁾` making the second model agree with the first at `α = 0`:
/// `ϑ⁽¹⁾_j φ₁(0) = ϑ⁽²⁾_j φ₂(0)`.
pub fn compatible_scale(params1: &HyperParams, r2: f64, beta2: f64) -> Result<Vec<f64>> {
    compatible_scale_for(params1, Shape::new(r2, beta2)?)
}

pub fn compatible_scale_for(params1: &HyperParams, shape2: Shape) -> Result<Vec<f64>> {
    if !params1.shape.is_strictly_admissible() || !shape2.is_strictly_admissible() {
        return Err(Error::parameter("compatibility requires eta/r > 0 for both models"));
    }
    let ratio = params1.shape.phi_zero() / shape2.phi_zero();
    Ok(params1.theta_scale.iter().map(|s| s * ratio).collect())
}

/// Second hyperparameter set for a hybrid scheme, with compatible scales.
pub fn compatible_params(params1: &HyperParams, shape2: Shape) -> Result<HyperParams> {
    HyperParams::with_shape(shape2, compatible_scale_for(params1, shape2)?)
}

/// Sensitivity-based scales `ϑ_j = C / ‖(AW) e_j‖²`.
pub fn sensitivity_weights(forward_dict: &LinearMap, c: f64) -> Result<Vec<f64>> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::parameter(format!("sensitivity constant must be positive, got {c}")));
    }
    let norms = forward_dict.column_norms_squared();
    check_len(norms.len(), forward_dict.cols())?;
    norms
        .iter()
        .enumerate()
        .map(|(j, &n)| if n > 0.0 { Ok(c / n) } else { Err(Error::DegenerateColumn { index: j }) })
        .collect()
}
