//! Sparse-coding classification of digit images against an annotated atom
//! dictionary, plus a synthetic generator of digit-like images.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{rng, ExperimentName, ExperimentSpec, HybridConfig};
use crate::error::{check_len, Error, Result};
use crate::hyperprior::HyperParams;
use crate::linops::LinearMap;
use crate::solver::{hybrid_global_with, whiten, IasOptions, Problem, SolveReport, StoppingRule};

/// Side length of a digit image; atoms have `DIGIT_SIDE²` pixels.
pub const DIGIT_SIDE: usize = 16;

const CLASSES: usize = 10;

/// Annotated images, each stacked columnwise.
#[derive(Clone, Debug, PartialEq)]
pub struct DigitSet {
    pub images: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

impl DigitSet {
    pub fn new(images: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self> {
        check_len(labels.len(), images.len())?;
        if let Some(first) = images.first() {
            if let Some(bad) = images.iter().find(|x| x.len() != first.len()) {
                return Err(Error::Size { expected: first.len(), actual: bad.len() });
            }
        }
        if let Some(l) = labels.iter().find(|l| **l as usize >= CLASSES) {
            return Err(Error::domain(format!("label {l} outside 0..=9")));
        }
        Ok(DigitSet { images, labels })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn pixel_count(&self) -> usize {
        self.images.first().map_or(0, Vec::len)
    }

    /// Row-major `n × N` matrix with the images as columns.
    pub fn to_matrix(&self) -> Result<LinearMap> {
        let (n, big_n) = (self.pixel_count(), self.len());
        let mut data = vec![0.0; n * big_n];
        for (j, img) in self.images.iter().enumerate() {
            for (i, v) in img.iter().enumerate() {
                data[i * big_n + j] = *v;
            }
        }
        LinearMap::dense(n, big_n, data)
    }
}

// seven-segment layout: vertices (row, column) in unit image coordinates
const VERTICES: [(f64, f64); 6] = [(0.15, 0.3), (0.15, 0.7), (0.5, 0.3), (0.5, 0.7), (0.85, 0.3), (0.85, 0.7)];
// segments a..g as vertex pairs
const SEGMENTS: [(usize, usize); 7] = [(0, 1), (1, 3), (3, 5), (4, 5), (2, 4), (0, 2), (2, 3)];
// lit segments per digit, bit k for segment k
const DIGIT_SEGMENTS: [u8; CLASSES] =
    [0b0111111, 0b0000110, 0b1011011, 0b1001111, 0b1100110, 0b1101101, 0b1111101, 0b0000111, 0b1111111, 0b1101111];

// within-class variation: slant and stroke width (pixels) dominate, so a
// class spans a low-dimensional family that twenty atoms cover well
const JITTER: f64 = 0.005;
const SLANT: f64 = 0.1;
const THICKNESS: std::ops::Range<f64> = 0.8..1.2;
const AMPLITUDE: std::ops::Range<f64> = 0.85..1.0;

fn segment_distance2(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let d = (b.0 - a.0, b.1 - a.1);
    let t = (((p.0 - a.0) * d.0 + (p.1 - a.1) * d.1) / (d.0 * d.0 + d.1 * d.1)).clamp(0.0, 1.0);
    (p.0 - a.0 - t * d.0).powi(2) + (p.1 - a.1 - t * d.1).powi(2)
}

/// Gaussian tube of width `thickness` pixels around the lit segments.
fn render(vertices: &[(f64, f64); 6], lit: u8, thickness: f64, side: usize) -> Vec<f64> {
    let segments: Vec<((f64, f64), (f64, f64))> = SEGMENTS
        .iter()
        .enumerate()
        .filter(|(k, _)| lit >> k & 1 == 1)
        .map(|(_, &(a, b))| (vertices[a], vertices[b]))
        .collect();
    let h = 1.0 / side as f64;
    let s2 = 2.0 * (thickness * h).powi(2);
    let mut img = vec![0.0; side * side];
    for c in 0..side {
        for i in 0..side {
            let p = ((i as f64 + 0.5) * h, (c as f64 + 0.5) * h);
            let d2 = segments.iter().map(|&(a, b)| segment_distance2(p, a, b)).fold(f64::INFINITY, f64::min);
            img[i + c * side] = (-d2 / s2).exp();
        }
    }
    img
}

fn sample(label: u8, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let slant = rng.random_range(-SLANT..SLANT);
    let mut v = VERTICES;
    for q in v.iter_mut() {
        q.0 += rng.random_range(-JITTER..JITTER);
        q.1 += rng.random_range(-JITTER..JITTER) + slant * (0.5 - q.0);
    }
    let thickness = rng.random_range(THICKNESS);
    let amplitude = rng.random_range(AMPLITUDE);
    render(&v, DIGIT_SEGMENTS[label as usize], thickness, DIGIT_SIDE).into_iter().map(|x| amplitude * x).collect()
}

/// Seven-segment digits with random jitter, slant, stroke width and gain:
/// `atoms` dictionary images and `tests` independent test images, labels
/// cycling through `0..=9`.
pub fn synthetic_digits(atoms: usize, tests: usize, seed: u64) -> (DigitSet, DigitSet) {
    let mut r = rng(seed);
    let mut draw = |count: usize| {
        let labels: Vec<u8> = (0..count).map(|k| (k % CLASSES) as u8).collect();
        let images = labels.iter().map(|&l| sample(l, &mut r)).collect();
        DigitSet { images, labels }
    };
    let dict = draw(atoms);
    let test = draw(tests);
    (dict, test)
}

/// One classification instance: `b = Wα + ε` with whitening by `σ`.
#[derive(Clone, Debug)]
pub struct DictLearnProblem {
    pub problem: Problem,
    pub params1: HyperParams,
    pub params2: HyperParams,
    pub stop: StoppingRule,
    pub options: IasOptions,
    pub labels: Vec<u8>,
    pub sigma: f64,
}

/// Uniform `ϑ⁽¹⁾` of the dictionary-learning run.
pub const DICTLEARN_SCALE: f64 = 1e-5;

/// Builds the hybrid problem `(1, 3/2 + 10⁻⁴, 10⁻⁵) → (−1, 1)` with
/// nonnegative projection and a switch after `θ` settles or 80 iterations.
pub fn make_dictlearn(atoms: &DigitSet, test_digit: &[f64], sigma: f64) -> Result<DictLearnProblem> {
    let spec = ExperimentSpec::defaults(ExperimentName::DictLearn);
    make_dictlearn_with(atoms, test_digit, sigma, &spec.hyper, &spec.stop)
}

/// [`make_dictlearn`] with explicit hyperparameters and stopping rule.
pub fn make_dictlearn_with(
    atoms: &DigitSet,
    test_digit: &[f64],
    sigma: f64,
    hyper: &HybridConfig,
    stop: &StoppingRule,
) -> Result<DictLearnProblem> {
    if atoms.is_empty() {
        return Err(Error::domain("empty atom dictionary"));
    }
    check_len(test_digit.len(), atoms.pixel_count())?;
    if !(sigma > 0.0) {
        return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
    }
    let (w, b) = whiten(&atoms.to_matrix()?, test_digit, sigma)?;
    let problem = Problem::new(w, b)?;
    let (params1, params2) = hyper.params_for(&problem)?;
    let options = IasOptions { nonneg_projection: true, ..IasOptions::default() };
    Ok(DictLearnProblem { problem, params1, params2, stop: *stop, options, labels: atoms.labels.clone(), sigma })
}

impl DictLearnProblem {
    pub fn solve(&self) -> Result<SolveReport> {
        hybrid_global_with(&self.problem, &self.params1, &self.params2, &self.stop, &self.options)
    }

    pub fn classify(&self, alpha: &[f64], tau: f64) -> Result<ClassificationResult> {
        let mut result = classify_majority(alpha, &self.labels, tau)?;
        result.sigma_used = Some(self.sigma);
        Ok(result)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationResult {
    pub predicted_label: u8,
    pub vote_histogram: [usize; CLASSES],
    /// Indices with `|α_j| > τ`.
    pub active_atoms: Vec<usize>,
    /// More than one label shared the top vote count.
    pub tie: bool,
    pub sigma_used: Option<f64>,
}

/// Majority vote over the labels of atoms with `|α_j| > τ`; ties go to the
/// smallest label.
pub fn classify_majority(alpha: &[f64], labels: &[u8], tau: f64) -> Result<ClassificationResult> {
    check_len(labels.len(), alpha.len())?;
    if !(tau > 0.0) {
        return Err(Error::domain(format!("tau must be positive, got {tau}")));
    }
    let mut vote_histogram = [0usize; CLASSES];
    let mut active_atoms = Vec::new();
    for (j, (a, &l)) in alpha.iter().zip(labels).enumerate() {
        if a.abs() > tau {
            let bin = vote_histogram
                .get_mut(l as usize)
                .ok_or_else(|| Error::domain(format!("label {l} outside 0..=9")))?;
            *bin += 1;
            active_atoms.push(j);
        }
    }
    if active_atoms.is_empty() {
        return Err(Error::Classification(format!("no coefficient exceeds tau = {tau}")));
    }
    let top = *vote_histogram.iter().max().unwrap();
    let predicted_label = vote_histogram.iter().position(|&v| v == top).unwrap() as u8;
    let tie = vote_histogram.iter().filter(|&&v| v == top).count() > 1;
    Ok(ClassificationResult { predicted_label, vote_histogram, active_atoms, tie, sigma_used: None })
}
