use super::HyperParams;
use crate::error::{check_len, Error, Result};
use crate::linops::LinearMap;

/// Penalty value split by component.
#[derive(Clone, Debug, PartialEq)]
pub struct PenaltyValue {
    pub total: f64,
    pub per_component: Vec<f64>,
}

/// `α²/(2θ) − η log(θ/ϑ) + (θ/ϑ)^r`.
#[inline]
pub fn penalty_component(alpha: f64, theta: f64, r: f64, eta: f64, scale: f64) -> f64 {
    let ratio = theta / scale;
    let log_term = if eta == 0.0 { 0.0 } else { eta * ratio.ln() };
    0.5 * alpha * alpha / theta - log_term + ratio.powf(r)
}

pub fn penalty(alpha: &[f64], theta: &[f64], params: &HyperParams) -> Result<PenaltyValue> {
    check_len(alpha.len(), params.len())?;
    check_len(theta.len(), params.len())?;
    if let Some(j) = theta.iter().position(|&t| !(t > 0.0)) {
        return Err(Error::domain(format!("variance {j} must be positive, got {}", theta[j])));
    }
    let (r, eta) = (params.r(), params.eta());
    let per_component: Vec<f64> = alpha
        .iter()
        .zip(theta)
        .zip(params.theta_scale())
        .map(|((&a, &t), &s)| penalty_component(a, t, r, eta, s))
        .collect();
    Ok(PenaltyValue { total: per_component.iter().sum(), per_component })
}

/// `½‖b − AWα‖² + P(α, θ)`.
pub fn objective(
    alpha: &[f64],
    theta: &[f64],
    b: &[f64],
    forward_dict: &LinearMap,
    params: &HyperParams,
) -> Result<f64> {
    check_len(b.len(), forward_dict.rows())?;
    let fit = forward_dict.apply(alpha)?;
    let misfit: f64 = fit.iter().zip(b).map(|(f, y)| (y - f) * (y - f)).sum();
    Ok(0.5 * misfit + penalty(alpha, theta, params)?.total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_ratio_gives_unit_penalty() {
        for &(r, beta) in &[(1.0, 2.0), (0.5, 4.0), (-1.0, 1.0)] {
            let p = HyperParams::new(r, beta, vec![0.3, 2.0]).unwrap();
            let v = penalty(&[0.0, 0.0], &[0.3, 2.0], &p).unwrap();
            assert!((v.per_component[0] - 1.0).abs() < 1e-15);
            assert!((v.total - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_nonpositive_theta() {
        let p = HyperParams::new(1.0, 2.0, vec![1.0]).unwrap();
        assert!(matches!(penalty(&[1.0], &[0.0], &p), Err(Error::Domain(_))));
        assert!(penalty(&[1.0, 2.0], &[1.0], &p).is_err());
    }
}
