//! Bundled test images. All are `n × n`, take values in `[0, 1]` and are
//! stacked columnwise.

use super::{add_noise, increment_frames, noise_level, rng, Experiment, ExperimentName};
use crate::error::{Error, Result};
use crate::linops::{midpoint_grid, CompositeDictionary, KronSide, LinearMap};

fn check_side(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::domain(format!("image side must be at least {min}, got {n}")));
    }
    Ok(())
}

fn span(lo: f64, hi: f64, n: usize) -> std::ops::Range<usize> {
    (lo * n as f64).round() as usize..(hi * n as f64).round() as usize
}

/// Zero background with one bright rectangle, taller than it is wide, so
/// that vertical increments are sparser than horizontal ones.
pub fn blocky_image(n: usize) -> Vec<f64> {
    let mut x = vec![0.0; n * n];
    for c in span(0.55, 0.75, n) {
        for i in span(0.15, 0.8, n) {
            x[i + c * n] = 1.0;
        }
    }
    x
}

/// Denoising of an arbitrary `n × n` image in the increment frames, tagged
/// as `name`.
pub fn make_denoise_image(name: ExperimentName, clean: Vec<f64>, n: usize, noise_frac: f64, seed: u64) -> Result<Experiment> {
    crate::error::check_len(clean.len(), n * n)?;
    let noise_std = noise_level(noise_frac, crate::vector::max_abs(&clean))?;
    let mut data = clean.clone();
    if noise_frac > 0.0 {
        add_noise(&mut data, noise_std, &mut rng(seed));
    }
    Ok(Experiment {
        name,
        dictionary: CompositeDictionary::new(increment_frames(n)?)?,
        forward: LinearMap::identity(n * n),
        clean,
        data,
        noise_std,
        image_shape: Some((n, n)),
    })
}

/// Denoising of [`blocky_image`] in the vertical/horizontal increment frames.
pub fn make_denoise2d(n: usize, noise_frac: f64, seed: u64) -> Result<Experiment> {
    check_side(n, 4)?;
    make_denoise_image(ExperimentName::Denoise2d, blocky_image(n), n, noise_frac, seed)
}

/// 8-bit quantized mix of a blocky region, a smooth ramp and a textured
/// grating, standing in for a natural photograph.
pub fn mixed_texture_image(n: usize) -> Vec<f64> {
    let grid = midpoint_grid(n);
    let mut x = vec![0.0; n * n];
    for (c, &u) in grid.iter().enumerate() {
        for (i, &v) in grid.iter().enumerate() {
            // v runs down the columns, u along the rows
            let value = if u < 0.5 && v < 0.5 {
                // blocks
                let a = if u > 0.1 && u < 0.35 && v > 0.15 && v < 0.4 { 0.85 } else { 0.2 };
                if u > 0.25 && u < 0.45 && v > 0.3 && v < 0.45 { 0.5 } else { a }
            } else if u >= 0.5 && v < 0.5 {
                // smooth ramp
                0.15 + 0.7 * (u - 0.5) * 2.0 * (1.0 - v)
            } else if u < 0.5 {
                // oblique grating
                0.5 + 0.35 * (2.0 * std::f64::consts::PI * 6.0 * (u + 0.6 * v)).sin()
            } else {
                // disk on a flat background
                let d = ((u - 0.75).powi(2) + (v - 0.75).powi(2)).sqrt();
                if d < 0.15 { 0.95 } else { 0.35 }
            };
            x[i + c * n] = (value.clamp(0.0, 1.0) * 255.0).round() / 255.0;
        }
    }
    x
}

/// Denoising of [`mixed_texture_image`] in the increment frames.
pub fn make_natural2d(n: usize, noise_frac: f64, seed: u64) -> Result<Experiment> {
    check_side(n, 8)?;
    make_denoise_image(ExperimentName::Natural2d, mixed_texture_image(n), n, noise_frac, seed)
}

/// The three components of the restoration test scene.
#[derive(Clone, Debug)]
pub struct Scene {
    /// Isolated point sources.
    pub stars: Vec<f64>,
    /// Piecewise-constant region.
    pub moon: Vec<f64>,
    /// Smooth blob, exactly a combination of a few low-frequency cosines.
    pub cloud: Vec<f64>,
}

impl Scene {
    pub fn total(&self) -> Vec<f64> {
        self.stars
            .iter()
            .zip(&self.moon)
            .zip(&self.cloud)
            .map(|((s, m), c)| s + m + c)
            .collect()
    }
}

const STARS: [(f64, f64); 6] = [(0.12, 0.62), (0.28, 0.88), (0.08, 0.9), (0.82, 0.14), (0.66, 0.3), (0.9, 0.42)];

/// Stars in the top-right and bottom-left, a blocky moon in the bottom-right
/// and a cloud in the top-left corner.
pub fn restore_scene(n: usize) -> Scene {
    let mut stars = vec![0.0; n * n];
    for (v, u) in STARS {
        let i = ((v * n as f64) as usize).min(n - 1);
        let c = ((u * n as f64) as usize).min(n - 1);
        stars[i + c * n] = 0.9;
    }
    let mut moon = vec![0.0; n * n];
    for (rows, cols) in [(span(0.55, 0.85, n), span(0.62, 0.8, n)), (span(0.62, 0.78, n), span(0.8, 0.88, n))] {
        for c in cols {
            for i in rows.clone() {
                moon[i + c * n] = 0.7;
            }
        }
    }
    // ((1 + cos πt)/2)^4 is a combination of the cosine atoms k = 0..=4
    let bump: Vec<f64> = midpoint_grid(n)
        .iter()
        .map(|t| ((1.0 + (std::f64::consts::PI * t).cos()) / 2.0).powi(4))
        .collect();
    let mut cloud = vec![0.0; n * n];
    for c in 0..n {
        for i in 0..n {
            cloud[i + c * n] = 0.6 * bump[i] * bump[c];
        }
    }
    Scene { stars, moon, cloud }
}

/// Deblurring of `clean` (an `n × n` image) under a separable Gaussian blur
/// with the dictionary `[I, I⊗L, L⊗I, Cᵀ⊗Cᵀ]`.
pub fn make_restore2d(n: usize, width: f64, noise_frac: f64, seed: u64, clean: Option<Vec<f64>>) -> Result<Experiment> {
    check_side(n, 4)?;
    let clean = match clean {
        Some(x) => {
            crate::error::check_len(x.len(), n * n)?;
            x
        }
        None => restore_scene(n).total(),
    };
    let grid = midpoint_grid(n);
    let blur = LinearMap::gaussian_blur(width, &grid, &grid)?;
    let forward = LinearMap::separable(&blur, &blur);
    let mut data = forward.apply(&clean)?;
    let noise_std = noise_level(noise_frac, crate::vector::max_abs(&clean))?;
    if noise_frac > 0.0 {
        add_noise(&mut data, noise_std, &mut rng(seed));
    }
    let l = LinearMap::cumsum(n);
    let dct = LinearMap::dct_synthesis(n);
    let dictionary = CompositeDictionary::new(vec![
        ("identity".to_string(), LinearMap::identity(n * n)),
        ("vertical".to_string(), LinearMap::kron2d(&l, KronSide::Left)?),
        ("horizontal".to_string(), LinearMap::kron2d(&l, KronSide::Right)?),
        ("cosine".to_string(), LinearMap::separable(&dct, &dct)),
    ])?;
    Ok(Experiment {
        name: ExperimentName::Restore2d,
        dictionary,
        forward,
        clean,
        data,
        noise_std,
        image_shape: Some((n, n)),
    })
}
