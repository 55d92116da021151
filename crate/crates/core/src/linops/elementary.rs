use std::f64::consts::PI;

use super::{Kind, LinearOperator};
use crate::error::{Error, Result};

/// Midpoints `(i + 1/2)/n` of a uniform partition of `[0, 1]`.
pub fn midpoint_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
}

#[derive(Clone, Debug)]
pub struct Identity {
    n: usize,
}

impl Identity {
    pub fn new(n: usize) -> Self {
        Identity { n }
    }
}

impl LinearOperator for Identity {
    fn rows(&self) -> usize {
        self.n
    }
    fn cols(&self) -> usize {
        self.n
    }
    fn kind(&self) -> Kind {
        Kind::Identity
    }
    fn forward(&self, v: &[f64], out: &mut [f64]) {
        out.copy_from_slice(v);
    }
    fn adjoint(&self, u: &[f64], out: &mut [f64]) {
        out.copy_from_slice(u);
    }
    fn column_norms_squared(&self) -> Vec<f64> {
        vec![1.0; self.n]
    }
}

/// `L = B⁻¹` where `B` is the first-difference matrix with `x_0 = 0`:
/// `(Lz)_i = z_0 + ... + z_i`.
#[derive(Clone, Debug)]
pub struct CumSum {
    n: usize,
}

impl CumSum {
    pub fn new(n: usize) -> Self {
        CumSum { n }
    }
}

impl LinearOperator for CumSum {
    fn rows(&self) -> usize {
        self.n
    }
    fn cols(&self) -> usize {
        self.n
    }
    fn kind(&self) -> Kind {
        Kind::CumSum
    }
    fn forward(&self, v: &[f64], out: &mut [f64]) {
        let mut acc = 0.0;
        for (o, x) in out.iter_mut().zip(v) {
            acc += x;
            *o = acc;
        }
    }
    fn adjoint(&self, u: &[f64], out: &mut [f64]) {
        let mut acc = 0.0;
        for (o, x) in out.iter_mut().zip(u).rev() {
            acc += x;
            *o = acc;
        }
    }
    fn column_norms_squared(&self) -> Vec<f64> {
        (0..self.n).map(|j| (self.n - j) as f64).collect()
    }
}

/// Orthonormal DCT-II synthesis `Cᵀ`; the adjoint is the forward transform `C`.
///
/// `C[k, i] = s_k cos(π (2i + 1) k / 2n)` with `s_0 = sqrt(1/n)` and
/// `s_k = sqrt(2/n)` otherwise. Applied directly from a cached table.
#[derive(Clone, Debug)]
pub struct Dct {
    n: usize,
    // row-major C
    table: Vec<f64>,
}

impl Dct {
    pub fn new(n: usize) -> Self {
        let nf = n as f64;
        let mut table = vec![0.0; n * n];
        for k in 0..n {
            let s = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
            for i in 0..n {
                table[k * n + i] = s * (PI * (2 * i + 1) as f64 * k as f64 / (2.0 * nf)).cos();
            }
        }
        Dct { n, table }
    }
}

impl LinearOperator for Dct {
    fn rows(&self) -> usize {
        self.n
    }
    fn cols(&self) -> usize {
        self.n
    }
    fn kind(&self) -> Kind {
        Kind::Dct
    }
    fn forward(&self, v: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (k, &vk) in v.iter().enumerate() {
            if vk == 0.0 {
                continue;
            }
            let row = &self.table[k * self.n..(k + 1) * self.n];
            for (o, c) in out.iter_mut().zip(row) {
                *o += vk * c;
            }
        }
    }
    fn adjoint(&self, u: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            let row = &self.table[k * self.n..(k + 1) * self.n];
            *o = row.iter().zip(u).map(|(c, x)| c * x).sum();
        }
    }
    fn column_norms_squared(&self) -> Vec<f64> {
        vec![1.0; self.n]
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug)]
pub struct Dense {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    kind: Kind,
}

impl Dense {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::domain("dense matrix needs positive dimensions"));
        }
        crate::error::check_len(data.len(), rows * cols)?;
        if !crate::vector::all_finite(&data) {
            return Err(Error::domain("dense matrix has non-finite entries"));
        }
        Ok(Dense { rows, cols, data, kind: Kind::Dense })
    }

    pub fn gaussian_blur(width: f64, source_grid: &[f64], obs_points: &[f64]) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::domain(format!("blur width must be positive, got {width}")));
        }
        for grid in [source_grid, obs_points] {
            if grid.is_empty() {
                return Err(Error::domain("blur grids must be non-empty"));
            }
            if grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
                return Err(Error::domain("blur grid points must lie in [0, 1]"));
            }
            if grid.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::domain("blur grids must be sorted"));
            }
        }
        let n = source_grid.len();
        let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * width * n as f64);
        let two_w2 = 2.0 * width * width;
        let data = obs_points
            .iter()
            .flat_map(|&s| source_grid.iter().map(move |&t| norm * (-(s - t) * (s - t) / two_w2).exp()))
            .collect();
        let mut dense = Dense::new(obs_points.len(), n, data)?;
        dense.kind = Kind::GaussianBlur;
        Ok(dense)
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

impl LinearOperator for Dense {
    fn rows(&self) -> usize {
        self.rows
    }
    fn cols(&self) -> usize {
        self.cols
    }
    fn kind(&self) -> Kind {
        self.kind
    }
    fn forward(&self, v: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o = row.iter().zip(v).map(|(a, x)| a * x).sum();
        }
    }
    fn adjoint(&self, u: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (&ui, row) in u.iter().zip(self.data.chunks_exact(self.cols)) {
            if ui == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(row) {
                *o += ui * a;
            }
        }
    }
    fn column_norms_squared(&self) -> Vec<f64> {
        let mut norms = vec![0.0; self.cols];
        for row in self.data.chunks_exact(self.cols) {
            for (n, a) in norms.iter_mut().zip(row) {
                *n += a * a;
            }
        }
        norms
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::LinearMap;

    #[test]
    fn cumsum_forward_and_adjoint() {
        let l = LinearMap::cumsum(4);
        assert_eq!(l.apply(&[1.0, 0.0, 0.0, 1.0]).unwrap(), vec![1.0, 1.0, 1.0, 2.0]);
        let l3 = LinearMap::cumsum(3);
        assert_eq!(l3.apply_adjoint(&[1.0, 1.0, 1.0]).unwrap(), vec![3.0, 2.0, 1.0]);
        assert_eq!(l3.column_norms_squared(), vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn dct_first_column_is_constant() {
        let c = LinearMap::dct_synthesis(2);
        let x = c.apply(&[1.0, 0.0]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((x[0] - h).abs() < 1e-15 && (x[1] - h).abs() < 1e-15);
    }

    #[test]
    fn blur_rejects_bad_width() {
        let g = midpoint_grid(5);
        assert!(matches!(LinearMap::gaussian_blur(0.0, &g, &g), Err(Error::Domain(_))));
        assert!(matches!(LinearMap::gaussian_blur(-1.0, &g, &g), Err(Error::Domain(_))));
    }

    #[test]
    fn blur_diagonal_entry() {
        let (n, w) = (40, 0.05);
        let g = midpoint_grid(n);
        let blur = Dense::gaussian_blur(w, &g, &g).unwrap();
        let expected = 1.0 / (n as f64 * (2.0 * std::f64::consts::PI * w * w).sqrt());
        assert!((blur.entry(7, 7) - expected).abs() < 1e-15 * expected.max(1.0));
    }

    #[test]
    fn dense_requires_matching_data() {
        assert!(Dense::new(2, 2, vec![1.0; 3]).is_err());
        assert!(Dense::new(0, 2, vec![]).is_err());
    }
}
