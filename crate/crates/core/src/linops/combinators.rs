use super::{brute_force_column_norms, Kind, LinearMap, LinearOperator};
use crate::error::{check_len, Error, Result};

/// `[M_1, ..., M_K]` acting on stacked coefficient slices.
#[derive(Clone, Debug)]
pub struct HorizontalConcat {
    maps: Vec<LinearMap>,
    offsets: Vec<usize>,
    rows: usize,
}

impl HorizontalConcat {
    pub fn new(maps: Vec<LinearMap>) -> Result<Self> {
        let first = maps
            .first()
            .ok_or_else(|| Error::domain("concatenation needs at least one map"))?;
        let rows = first.rows();
        let mut offsets = vec![0];
        for m in &maps {
            if m.rows() != rows {
                return Err(Error::domain(format!(
                    "concatenated maps must share the row count ({rows} vs {})",
                    m.rows()
                )));
            }
            offsets.push(offsets.last().unwrap() + m.cols());
        }
        Ok(HorizontalConcat { maps, offsets, rows })
    }
}

impl LinearOperator for HorizontalConcat {
    fn rows(&self) -> usize {
        self.rows
    }
    fn cols(&self) -> usize {
        *self.offsets.last().unwrap()
    }
    fn kind(&self) -> Kind {
        Kind::HorizontalConcat
    }
    fn forward(&self, v: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let mut part = vec![0.0; self.rows];
        for (k, m) in self.maps.iter().enumerate() {
            let slice = &v[self.offsets[k]..self.offsets[k + 1]];
            if slice.iter().all(|&x| x == 0.0) {
                continue;
            }
            m.apply_into(slice, &mut part);
            for (o, p) in out.iter_mut().zip(&part) {
                *o += p;
            }
        }
    }
    fn adjoint(&self, u: &[f64], out: &mut [f64]) {
        for (k, m) in self.maps.iter().enumerate() {
            m.apply_adjoint_into(u, &mut out[self.offsets[k]..self.offsets[k + 1]]);
        }
    }
    fn column_norms_squared(&self) -> Vec<f64> {
        self.maps.iter().flat_map(|m| m.column_norms_squared()).collect()
    }
}

/// `M · diag(d)`.
#[derive(Clone, Debug)]
pub struct ColumnScaled {
    map: LinearMap,
    scale: Vec<f64>,
}

impl ColumnScaled {
    pub fn new(map: LinearMap, scale: Vec<f64>) -> Result<Self> {
        check_len(scale.len(), map.cols())?;
        if scale.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
            return Err(Error::domain("column scales must be positive and finite"));
        }
        Ok(ColumnScaled { map, scale })
    }
}

impl LinearOperator for ColumnScaled {
    fn rows(&self) -> usize {
        self.map.rows()
    }
    fn cols(&self) -> usize {
        self.map.cols()
    }
    fn kind(&self) -> Kind {
        Kind::ColumnScaled
    }
    fn forward(&self, v: &[f64], out: &mut [f64]) {
        let scaled: Vec<f64> = v.iter().zip(&self.scale).map(|(x, d)| x * d).collect();
        self.map.apply_into(&scaled, out);
    }
    fn adjoint(&self, u: &[f64], out: &mut [f64]) {
        self.map.apply_adjoint_into(u, out);
        for (o, d) in out.iter_mut().zip(&self.scale) {
            *o *= d;
        }
    }
    fn column_norms_squared(&self) -> Vec<f64> {
        self.map
            .column_norms_squared()
            .into_iter()
            .zip(&self.scale)
            .map(|(n, d)| n * d * d)
            .collect()
    }
}

/// `diag(d) · M`. Zero or negative weights are rejected.
#[derive(Clone, Debug)]
pub struct RowScaled {
    map: LinearMap,
    scale: Vec<f64>,
}

impl RowScaled {
    pub fn new(map: LinearMap, scale: Vec<f64>) -> Result<Self> {
        check_len(scale.len(), map.rows())?;
        if scale.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
            return Err(Error::domain("row scales must be positive and finite"));
        }
        Ok(RowScaled { map, scale })
    }
}

impl LinearOperator for RowScaled {
    fn rows(&self) -> usize {
        self.map.rows()
    }
    fn cols(&self) -> usize {
        self.map.cols()
    }
    fn kind(&self) -> Kind {
        Kind::RowScaled
    }
    fn forward(&self, v: &[f64], out: &mut [f64]) {
        self.map.apply_into(v, out);
        for (o, d) in out.iter_mut().zip(&self.scale) {
            *o *= d;
        }
    }
    fn adjoint(&self, u: &[f64], out: &mut [f64]) {
        let scaled: Vec<f64> = u.iter().zip(&self.scale).map(|(x, d)| x * d).collect();
        self.map.apply_adjoint_into(&scaled, out);
    }
    fn column_norms_squared(&self) -> Vec<f64> {
        let first = self.scale[0];
        if self.scale.iter().all(|&d| d == first) {
            let f2 = first * first;
            self.map.column_norms_squared().into_iter().map(|n| n * f2).collect()
        } else {
            brute_force_column_norms(self)
        }
    }
}

/// `outer ∘ inner`.
#[derive(Clone, Debug)]
pub struct Composed {
    outer: LinearMap,
    inner: LinearMap,
}

impl Composed {
    pub fn new(outer: LinearMap, inner: LinearMap) -> Self {
        assert_eq!(outer.cols(), inner.rows(), "composition dimension mismatch");
        Composed { outer, inner }
    }
}

impl LinearOperator for Composed {
    fn rows(&self) -> usize {
        self.outer.rows()
    }
    fn cols(&self) -> usize {
        self.inner.cols()
    }
    fn kind(&self) -> Kind {
        Kind::Composed
    }
    fn forward(&self, v: &[f64], out: &mut [f64]) {
        let mut mid = vec![0.0; self.inner.rows()];
        self.inner.apply_into(v, &mut mid);
        self.outer.apply_into(&mid, out);
    }
    fn adjoint(&self, u: &[f64], out: &mut [f64]) {
        let mut mid = vec![0.0; self.outer.cols()];
        self.outer.apply_adjoint_into(u, &mut mid);
        self.inner.apply_adjoint_into(&mid, out);
    }
}
