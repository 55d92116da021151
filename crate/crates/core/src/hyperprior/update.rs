//! The `θ` update: componentwise minimizer of the penalty in `θ_j`.
//!
//! In scaled variables `ξ = θ/ϑ`, `z = |α|/sqrt(ϑ)` the stationarity
//! condition reads `G(ξ) = r ξ^{r+1} − η ξ − z²/2 = 0`. General `r` is
//! handled by integrating the initial value problem for `φ` with classical
//! RK4 and polishing the result with safeguarded Newton on `G`. `r = ±1`
//! use closed forms.

use super::{HyperParams, Shape};
use crate::error::{check_len, Error, Result};

const POLISH_RTOL: f64 = 1e-14;
const MAX_POLISH_ITERS: usize = 200;

/// Positive stationary point `θ_j` of `P_j(α_j, ·)`.
pub fn theta_update(alpha_j: f64, scale_j: f64, params: &HyperParams) -> Result<f64> {
    check_scale(scale_j)?;
    if !alpha_j.is_finite() {
        return Err(Error::domain("coefficient must be finite"));
    }
    Ok(theta_for(params.shape(), alpha_j, scale_j))
}

/// Elementwise [`theta_update`] with one sorted sweep of the ODE integrator
/// over the scaled magnitudes `|α_j| / sqrt(ϑ_j)`.
pub fn theta_update_batch(alpha: &[f64], scales: &[f64], params: &HyperParams) -> Result<Vec<f64>> {
    check_len(scales.len(), alpha.len())?;
    for &s in scales {
        check_scale(s)?;
    }
    if !crate::vector::all_finite(alpha) {
        return Err(Error::domain("coefficients must be finite"));
    }
    let mut theta = vec![0.0; alpha.len()];
    batch_into(params.shape(), alpha, scales, &mut theta);
    Ok(theta)
}

fn check_scale(s: f64) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::parameter(format!("scale must be positive, got {s}")));
    }
    Ok(())
}

pub(crate) fn theta_for(shape: Shape, alpha: f64, scale: f64) -> f64 {
    if let Some(theta) = closed_form(shape, alpha, scale) {
        return theta;
    }
    let z = alpha.abs() / scale.sqrt();
    let phi0 = shape.phi_zero();
    let guess = integrate(shape, 0.0, phi0, z);
    scale * polish(shape, z, guess)
}

/// Writes `θ_j` for every component; inputs are assumed validated.
pub(crate) fn batch_into(shape: Shape, alpha: &[f64], scales: &[f64], theta: &mut [f64]) {
    if shape.r() == 1.0 || shape.r() == -1.0 || shape.eta() == 0.0 {
        for ((t, &a), &s) in theta.iter_mut().zip(alpha).zip(scales) {
            *t = closed_form(shape, a, s).expect("closed form available");
        }
        return;
    }
    let phi0 = shape.phi_zero();
    let mut order: Vec<(f64, usize)> = alpha
        .iter()
        .zip(scales)
        .enumerate()
        .map(|(j, (a, s))| (a.abs() / s.sqrt(), j))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let (mut z_prev, mut xi_prev) = (0.0, phi0);
    for (z, j) in order {
        if z == 0.0 {
            theta[j] = scales[j] * phi0;
            continue;
        }
        if z > z_prev {
            let guess = integrate(shape, z_prev, xi_prev, z);
            xi_prev = polish(shape, z, guess);
            z_prev = z;
        }
        theta[j] = scales[j] * xi_prev;
    }
}

fn closed_form(shape: Shape, alpha: f64, scale: f64) -> Option<f64> {
    let (r, eta) = (shape.r(), shape.eta());
    if alpha == 0.0 {
        return Some(scale * shape.phi_zero());
    }
    if r == 1.0 {
        return Some(0.5 * scale * (eta + (eta * eta + 2.0 * alpha * alpha / scale).sqrt()));
    }
    if r == -1.0 {
        return Some((0.5 * alpha * alpha + scale) / (-eta));
    }
    if eta == 0.0 {
        // G(ξ) = r ξ^{r+1} − z²/2
        let z2 = alpha * alpha / scale;
        return Some(scale * (z2 / (2.0 * r)).powf(1.0 / (r + 1.0)));
    }
    None
}

#[inline]
fn phi_rhs(r: f64, z: f64, phi: f64) -> f64 {
    let phi = phi.max(f64::MIN_POSITIVE);
    2.0 * z * phi / (2.0 * r * r * phi.powf(r + 1.0) + z * z)
}

/// RK4 from `(z0, φ0)` to `z1` with `h = min(gap/8, 0.05 (1 + z))`.
fn integrate(shape: Shape, z0: f64, phi0: f64, z1: f64) -> f64 {
    let r = shape.r();
    let gap = z1 - z0;
    if gap <= 0.0 {
        return phi0;
    }
    let (mut z, mut phi) = (z0, phi0);
    while z < z1 {
        let mut h = (gap / 8.0).min(0.05 * (1.0 + z));
        let mut next = z + h;
        // finish with one exact step when near the end or below resolution of z
        if next >= z1 * (1.0 - 4.0 * f64::EPSILON) || next <= z {
            h = z1 - z;
            next = z1;
        }
        let k1 = phi_rhs(r, z, phi);
        let k2 = phi_rhs(r, z + 0.5 * h, phi + 0.5 * h * k1);
        let k3 = phi_rhs(r, z + 0.5 * h, phi + 0.5 * h * k2);
        let k4 = phi_rhs(r, z + h, phi + h * k3);
        phi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        z = next;
        if !phi.is_finite() || phi <= 0.0 {
            return phi0;
        }
    }
    phi
}

/// `(G(ξ), G'(ξ), scale)` where `scale` bounds the magnitude of the terms.
#[inline]
fn residual(shape: Shape, half_z2: f64, xi: f64) -> (f64, f64, f64) {
    let (r, eta) = (shape.r(), shape.eta());
    let xr = xi.powf(r);
    let lead = r * xr * xi;
    let g = lead - eta * xi - half_z2;
    let dg = r * (r + 1.0) * xr - eta;
    (g, dg, lead.abs().max((eta * xi).abs()).max(half_z2))
}

/// Relative residual of `∂P_j/∂θ_j = 0` at `θ`, normalized by the largest term.
pub fn stationarity_residual(alpha: f64, theta: f64, scale: f64, shape: Shape) -> f64 {
    relative_residual(shape, alpha.abs() / scale.sqrt(), theta / scale)
}

fn relative_residual(shape: Shape, z: f64, xi: f64) -> f64 {
    let (g, _, scale) = residual(shape, 0.5 * z * z, xi);
    g.abs() / scale
}

/// Safeguarded Newton on `G` over the branch `ξ ≥ φ(0)`.
fn polish(shape: Shape, z: f64, guess: f64) -> f64 {
    let half_z2 = 0.5 * z * z;
    let phi0 = shape.phi_zero();
    // G(φ(0)) = −z²/2 ≤ 0 and G is increasing on the branch
    let mut lo = phi0;
    let mut hi = guess.max(phi0) * 2.0 + f64::MIN_POSITIVE;
    while residual(shape, half_z2, hi).0 <= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let mut xi = if guess > lo && guess < hi { guess } else { 0.5 * (lo + hi) };
    for _ in 0..MAX_POLISH_ITERS {
        let (g, dg, scale) = residual(shape, half_z2, xi);
        if g.abs() <= POLISH_RTOL * scale {
            return xi;
        }
        if g < 0.0 {
            lo = xi;
        } else {
            hi = xi;
        }
        if hi - lo <= 2.0 * f64::EPSILON * hi {
            return xi;
        }
        let newton = xi - g / dg;
        xi = if dg > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    xi
}
