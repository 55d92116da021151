//! Matrix-free linear operators.
//!
//! Every forward model and dictionary is a [`LinearMap`], a cheaply clonable
//! handle over an immutable [`LinearOperator`]. Maps are assembled from a few
//! primitives (dense, identity, cumulative sum, orthonormal DCT synthesis,
//! Gaussian blur) and combinators (composition, horizontal concatenation,
//! row and column scaling, separable 2-D products).
//!
//! Images are vectorized by stacking columns: pixel `(i, c)` of a `p × q`
//! image lives at index `i + c * p`.

mod combinators;
mod dictionary;
mod elementary;
mod kron;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{check_len, Error, Result};

pub use combinators::{ColumnScaled, Composed, HorizontalConcat, RowScaled};
pub use dictionary::CompositeDictionary;
pub use elementary::{midpoint_grid, CumSum, Dct, Dense, Identity};
pub use kron::{KronSide, Separable2d};

/// Structural tag of an operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Dense,
    Identity,
    CumSum,
    Dct,
    GaussianBlur,
    Kronecker,
    ColumnScaled,
    HorizontalConcat,
    Composed,
    RowScaled,
}

/// An immutable linear operator `R^cols -> R^rows`.
///
/// `forward` and `adjoint` receive correctly sized slices and overwrite `out`.
pub trait LinearOperator: Send + Sync + fmt::Debug {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn kind(&self) -> Kind;

    fn forward(&self, v: &[f64], out: &mut [f64]);
    fn adjoint(&self, u: &[f64], out: &mut [f64]);

    /// `‖A e_j‖²` for every column. The default applies the operator to each
    /// unit vector; structured operators override it with exact shortcuts.
    fn column_norms_squared(&self) -> Vec<f64> {
        brute_force_column_norms(self)
    }

    fn as_separable(&self) -> Option<&Separable2d> {
        None
    }
}

pub(crate) fn brute_force_column_norms<T: LinearOperator + ?Sized>(op: &T) -> Vec<f64> {
    let (rows, cols) = (op.rows(), op.cols());
    (0..cols)
        .into_par_iter()
        .map_init(
            || (vec![0.0; cols], vec![0.0; rows]),
            |(unit, out), j| {
                unit[j] = 1.0;
                op.forward(unit, out);
                unit[j] = 0.0;
                out.iter().map(|x| x * x).sum()
            },
        )
        .collect()
}

/// Shared handle to a linear operator.
#[derive(Clone)]
pub struct LinearMap(Arc<dyn LinearOperator>);

impl fmt::Debug for LinearMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl LinearMap {
    pub fn new<T: LinearOperator + 'static>(op: T) -> Self {
        LinearMap(Arc::new(op))
    }

    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn cols(&self) -> usize {
        self.0.cols()
    }

    pub fn kind(&self) -> Kind {
        self.0.kind()
    }

    pub fn operator(&self) -> &dyn LinearOperator {
        &*self.0
    }

    /// Checked matrix-vector product.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(v.len(), self.cols())?;
        if !crate::vector::all_finite(v) {
            return Err(Error::domain("input vector has non-finite entries"));
        }
        let mut out = vec![0.0; self.rows()];
        self.0.forward(v, &mut out);
        Ok(out)
    }

    /// Checked transpose product.
    pub fn apply_adjoint(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len(u.len(), self.rows())?;
        let mut out = vec![0.0; self.cols()];
        self.0.adjoint(u, &mut out);
        Ok(out)
    }

    /// Unchecked product into a caller buffer; lengths are debug-asserted.
    #[inline]
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.cols());
        debug_assert_eq!(out.len(), self.rows());
        self.0.forward(v, out);
    }

    #[inline]
    pub fn apply_adjoint_into(&self, u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u.len(), self.rows());
        debug_assert_eq!(out.len(), self.cols());
        self.0.adjoint(u, out);
    }

    /// `‖A e_j‖²` for each column `j`.
    pub fn column_norms_squared(&self) -> Vec<f64> {
        self.0.column_norms_squared()
    }

    /// Dense row-major copy, for tests and tiny problems.
    pub fn to_dense(&self) -> Vec<f64> {
        let (rows, cols) = (self.rows(), self.cols());
        let mut dense = vec![0.0; rows * cols];
        let mut unit = vec![0.0; cols];
        let mut col = vec![0.0; rows];
        for j in 0..cols {
            unit[j] = 1.0;
            self.0.forward(&unit, &mut col);
            unit[j] = 0.0;
            for (i, v) in col.iter().enumerate() {
                dense[i * cols + j] = *v;
            }
        }
        dense
    }

    pub fn identity(n: usize) -> Self {
        Self::new(Identity::new(n))
    }

    /// Lower-triangular matrix of ones, the inverse of the first-difference
    /// matrix with a zero left boundary.
    pub fn cumsum(n: usize) -> Self {
        Self::new(CumSum::new(n))
    }

    /// Orthonormal inverse DCT-II (`Cᵀ`), mapping cosine coefficients to samples.
    pub fn dct_synthesis(n: usize) -> Self {
        Self::new(Dct::new(n))
    }

    pub fn dense(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Ok(Self::new(Dense::new(rows, cols, data)?))
    }

    /// Midpoint-rule discretization of the Gaussian convolution kernel
    /// `exp(-(s-t)²/2w²)/sqrt(2πw²)` with quadrature weight `1/n`.
    pub fn gaussian_blur(width: f64, source_grid: &[f64], obs_points: &[f64]) -> Result<Self> {
        Ok(Self::new(Dense::gaussian_blur(width, source_grid, obs_points)?))
    }

    /// `I ⊗ M` (`Left`, `M` acts on each image column) or `M ⊗ I` (`Right`,
    /// `M` acts along each image row).
    pub fn kron2d(map: &LinearMap, side: KronSide) -> Result<Self> {
        Ok(Self::new(Separable2d::kron(map, side)?))
    }

    /// Separable 2-D operator `X -> M_col X M_rowᵀ`, i.e. `M_row ⊗ M_col`.
    pub fn separable(col_map: &LinearMap, row_map: &LinearMap) -> Self {
        Self::new(Separable2d::new(col_map.clone(), row_map.clone()))
    }

    pub fn concat(maps: &[LinearMap]) -> Result<Self> {
        Ok(Self::new(HorizontalConcat::new(maps.to_vec())?))
    }

    /// `A · diag(d)`.
    pub fn scale_columns(map: &LinearMap, d: &[f64]) -> Result<Self> {
        Ok(Self::new(ColumnScaled::new(map.clone(), d.to_vec())?))
    }

    /// `diag(d) · A`.
    pub fn scale_rows(map: &LinearMap, d: &[f64]) -> Result<Self> {
        Ok(Self::new(RowScaled::new(map.clone(), d.to_vec())?))
    }

    /// `a ∘ b`: applies `b`, then `a`. Identity factors are dropped and two
    /// separable 2-D factors fuse into a single separable operator.
    pub fn compose(a: &LinearMap, b: &LinearMap) -> Result<Self> {
        check_len(b.rows(), a.cols())?;
        if a.kind() == Kind::Identity {
            return Ok(b.clone());
        }
        if b.kind() == Kind::Identity {
            return Ok(a.clone());
        }
        if let (Some(sa), Some(sb)) = (a.0.as_separable(), b.0.as_separable()) {
            if sa.col_map().cols() == sb.col_map().rows()
                && sa.row_map().cols() == sb.row_map().rows()
            {
                let col = LinearMap::compose(sa.col_map(), sb.col_map())?;
                let row = LinearMap::compose(sa.row_map(), sb.row_map())?;
                return Ok(Self::separable(&col, &row));
            }
        }
        Ok(Self::new(Composed::new(a.clone(), b.clone())))
    }
}

/// Column norms of `map`; exact, `O(cols)` applications at worst.
pub fn column_norms_squared(map: &LinearMap) -> Vec<f64> {
    map.column_norms_squared()
}
