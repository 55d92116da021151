use super::{add_noise, noise_level, rng, Experiment, ExperimentName};
use crate::error::{Error, Result};
use crate::linops::{midpoint_grid, CompositeDictionary, LinearMap};

/// `(location, increment)` of each jump of the generative signal, a
/// staircase 0 → 0.25 → 0.5 → 0.75 → 1. A monotone signal keeps the
/// increment representation cheaper than any cosine one: an increment atom
/// steps up to the right end, so sign changes would force cancelling pairs.
pub const DECONV_JUMPS: [(f64, f64); 4] = [(0.2, 0.25), (0.4, 0.25), (0.6, 0.25), (0.8, 0.25)];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Deconv1dSpec {
    /// Inversion grid size.
    pub n: usize,
    /// Grid used to generate the data.
    pub n_dense: usize,
    pub m: usize,
    pub width: f64,
    /// Noise standard deviation as a fraction of the signal maximum.
    pub noise_frac: f64,
    pub seed: u64,
}

impl Default for Deconv1dSpec {
    fn default() -> Self {
        Deconv1dSpec { n: 500, n_dense: 1253, m: 46, width: 0.02, noise_frac: 0.02, seed: 0 }
    }
}

/// Piecewise-constant generative signal with `f(0) = 0`.
pub fn deconv_signal(t: f64) -> f64 {
    DECONV_JUMPS.iter().filter(|(at, _)| t >= *at).map(|(_, dz)| dz).sum()
}

/// Blurred, subsampled, noisy observation of [`deconv_signal`]. The data
/// are generated on the dense grid; the returned forward map lives on the
/// coarse inversion grid.
pub fn make_deconv1d(spec: &Deconv1dSpec) -> Result<Experiment> {
    let Deconv1dSpec { n, n_dense, m, width, noise_frac, seed } = *spec;
    if m == 0 || !(n_dense > n && n > m) {
        return Err(Error::domain(format!(
            "need n_dense > n > m > 0, got n_dense = {n_dense}, n = {n}, m = {m}"
        )));
    }
    let obs = midpoint_grid(m);
    let dense_grid = midpoint_grid(n_dense);
    let dense_signal: Vec<f64> = dense_grid.iter().map(|&t| deconv_signal(t)).collect();
    let dense_blur = LinearMap::gaussian_blur(width, &dense_grid, &obs)?;
    let mut data = dense_blur.apply(&dense_signal)?;

    let signal_max = crate::vector::max_abs(&dense_signal);
    let noise_std = noise_level(noise_frac, signal_max)?;
    if noise_frac > 0.0 {
        add_noise(&mut data, noise_std, &mut rng(seed));
    }

    let grid = midpoint_grid(n);
    let clean = grid.iter().map(|&t| deconv_signal(t)).collect();
    let forward = LinearMap::gaussian_blur(width, &grid, &obs)?;
    let dictionary = CompositeDictionary::new(vec![
        ("increments".to_string(), LinearMap::cumsum(n)),
        ("cosine".to_string(), LinearMap::dct_synthesis(n)),
    ])?;
    Ok(Experiment {
        name: ExperimentName::Deconv1d,
        dictionary,
        forward,
        clean,
        data,
        noise_std,
        image_shape: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_shapes() {
        let e = make_deconv1d(&Deconv1dSpec::default()).unwrap();
        assert_eq!(e.data.len(), 46);
        assert_eq!(e.forward.cols(), 500);
        assert_eq!(e.dictionary.atom_count(), 1000);
        assert!((e.noise_std - 0.02).abs() < 1e-15);
    }

    #[test]
    fn signal_is_a_four_step_staircase() {
        assert_eq!(deconv_signal(0.0), 0.0);
        assert_eq!(deconv_signal(0.3), 0.25);
        assert_eq!(deconv_signal(0.5), 0.5);
        assert_eq!(deconv_signal(0.99), 1.0);
    }

    #[test]
    fn rejects_bad_sizes() {
        let bad = Deconv1dSpec { n: 40, ..Deconv1dSpec::default() };
        assert!(make_deconv1d(&bad).is_err());
        let bad = Deconv1dSpec { n_dense: 500, ..Deconv1dSpec::default() };
        assert!(make_deconv1d(&bad).is_err());
    }
}
