//! Oracles shared by the integration tests.
#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn randn(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Minimizer in `θ` of `α²/(2θ) − η ln(θ/ϑ) + (θ/ϑ)^r`, found by
/// golden-section search over `u = ln(θ/ϑ) ∈ [−80, 80]`.
pub fn golden_theta(alpha: f64, scale: f64, r: f64, eta: f64) -> f64 {
    let z2 = alpha * alpha / scale;
    let f = |u: f64| 0.5 * z2 * (-u).exp() - eta * u + (r * u).exp();
    let (mut a, mut b) = (-80.0f64, 80.0f64);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..300 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    scale * (0.5 * (a + b)).exp()
}

/// Positive root of `r ξ^{r+1} − η ξ − z²/2` for `r = ±1`, times `ϑ`.
pub fn closed_theta(alpha: f64, scale: f64, r: f64, eta: f64) -> f64 {
    let z2 = alpha * alpha / scale;
    let xi = if r == 1.0 { 0.5 * (eta + (eta * eta + 2.0 * z2).sqrt()) } else { (1.0 + 0.5 * z2) / -eta };
    scale * xi
}

/// `|r ξ^{r+1} − η ξ − z²/2|` over its largest term.
pub fn stationarity_gap(alpha: f64, theta: f64, scale: f64, r: f64, eta: f64) -> f64 {
    let (xi, half_z2) = (theta / scale, 0.5 * alpha * alpha / scale);
    let lead = r * xi.powf(r + 1.0);
    (lead - eta * xi - half_z2).abs() / lead.abs().max((eta * xi).abs()).max(half_z2)
}

/// Admissible `(r, β)` pairs: `η > 0` when `r > 0`, `η < 0` when `r < 0`.
pub const SHAPES: [(f64, f64); 6] = [(-1.0, 1.0), (-0.5, 1.0), (0.5, 4.0), (0.75, 3.0), (1.0, 2.0), (2.0, 1.0)];
