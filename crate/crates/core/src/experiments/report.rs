use crate::error::{check_len, Error, Result};
use crate::linops::CompositeDictionary;
use crate::vector::{max_abs, norm2};

/// Which coefficients count as "support".
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SupportRule {
    /// `|α_j| > f · max|α|`.
    Relative(f64),
    /// `|α_j| > floor`.
    Absolute(f64),
}

impl Default for SupportRule {
    fn default() -> Self {
        SupportRule::Relative(1e-6)
    }
}

impl SupportRule {
    pub fn cutoff(&self, alpha: &[f64]) -> f64 {
        match *self {
            SupportRule::Relative(f) => f * max_abs(alpha),
            SupportRule::Absolute(floor) => floor,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FrameSummary {
    pub name: String,
    pub support: usize,
    /// Smallest and largest `|α_j|` over the frame's support; zero when empty.
    pub min_abs: f64,
    pub max_abs: f64,
    /// `W_k α_k`.
    pub contribution: Vec<f64>,
    pub contribution_norm: f64,
}

/// Per-frame support, magnitude range and synthesized contribution.
pub fn frame_report(alpha: &[f64], dict: &CompositeDictionary, rule: SupportRule) -> Result<Vec<FrameSummary>> {
    let contributions = dict.contributions(alpha)?;
    let cutoff = rule.cutoff(alpha);
    Ok(contributions
        .into_iter()
        .enumerate()
        .map(|(k, contribution)| {
            let on: Vec<f64> =
                alpha[dict.range(k)].iter().map(|a| a.abs()).filter(|a| *a > cutoff).collect();
            let (min_abs, max_abs) = if on.is_empty() {
                (0.0, 0.0)
            } else {
                (on.iter().cloned().fold(f64::INFINITY, f64::min), on.iter().cloned().fold(0.0, f64::max))
            };
            FrameSummary {
                name: dict.names()[k].clone(),
                support: on.len(),
                min_abs,
                max_abs,
                contribution_norm: norm2(&contribution),
                contribution,
            }
        })
        .collect())
}

/// Peak signal-to-noise ratio in dB with peak `max|reference|`.
pub fn psnr(reference: &[f64], estimate: &[f64]) -> Result<f64> {
    check_len(estimate.len(), reference.len())?;
    if reference.is_empty() {
        return Err(Error::domain("empty image"));
    }
    let mse = reference.iter().zip(estimate).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
        / reference.len() as f64;
    let peak = max_abs(reference);
    Ok(10.0 * (peak * peak / mse).log10())
}

/// Vertical (down each column) and horizontal (along each row) increments
/// of a columnwise-stacked `n × n` image with zero top and left boundary:
/// the exact coefficients of the image in the two increment frames.
pub fn increments_2d(image: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    check_len(image.len(), n * n)?;
    let mut vertical = vec![0.0; n * n];
    let mut horizontal = vec![0.0; n * n];
    for c in 0..n {
        for i in 0..n {
            let k = i + c * n;
            vertical[k] = image[k] - if i > 0 { image[k - 1] } else { 0.0 };
            horizontal[k] = image[k] - if c > 0 { image[k - n] } else { 0.0 };
        }
    }
    Ok((vertical, horizontal))
}

/// Compression of a restored representation against the clean one.
#[derive(Clone, Debug, PartialEq)]
pub struct CompressionSummary {
    /// Smallest nonzero clean coefficient magnitude.
    pub coeff_floor: f64,
    /// Per frame, fraction of nonzero clean coefficients.
    pub clean_fraction: Vec<f64>,
    /// Per frame, fraction of restored coefficients above `coeff_floor`.
    pub restored_fraction: Vec<f64>,
}

impl CompressionSummary {
    /// Overall clean-to-restored ratio of nonvanishing coefficient counts.
    pub fn factor(&self) -> f64 {
        let clean: f64 = self.clean_fraction.iter().sum();
        let restored: f64 = self.restored_fraction.iter().sum();
        clean / restored
    }
}

/// `clean` and `restored` are coefficient vectors split by `frame_lengths`.
pub fn compression_summary(clean: &[f64], restored: &[f64], frame_lengths: &[usize]) -> Result<CompressionSummary> {
    check_len(restored.len(), clean.len())?;
    check_len(frame_lengths.iter().sum(), clean.len())?;
    let coeff_floor = clean
        .iter()
        .map(|a| a.abs())
        .filter(|a| *a > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !coeff_floor.is_finite() {
        return Err(Error::domain("clean representation is identically zero"));
    }
    let (mut clean_fraction, mut restored_fraction) = (Vec::new(), Vec::new());
    let mut start = 0;
    for &len in frame_lengths {
        let range = start..start + len;
        let frac = |v: &[f64], cut: f64| v[range.clone()].iter().filter(|a| a.abs() > cut).count() as f64 / len as f64;
        clean_fraction.push(frac(clean, 0.0));
        restored_fraction.push(frac(restored, coeff_floor));
        start += len;
    }
    Ok(CompressionSummary { coeff_floor, clean_fraction, restored_fraction })
}
