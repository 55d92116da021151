use super::{Kind, LinearMap, LinearOperator};
use crate::error::{Error, Result};

/// Which Kronecker factor carries the 1-D operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KronSide {
    /// `I ⊗ M`: `M` acts down every column of the image.
    Left,
    /// `M ⊗ I`: `M` acts along every row of the image.
    Right,
}

/// Separable 2-D operator `X ↦ M_col X M_rowᵀ` on column-stacked images,
/// equal to the Kronecker product `M_row ⊗ M_col`.
#[derive(Clone, Debug)]
pub struct Separable2d {
    col_map: LinearMap,
    row_map: LinearMap,
}

impl Separable2d {
    pub fn new(col_map: LinearMap, row_map: LinearMap) -> Self {
        Separable2d { col_map, row_map }
    }

    pub fn kron(map: &LinearMap, side: KronSide) -> Result<Self> {
        if map.rows() != map.cols() {
            return Err(Error::domain("Kronecker factor must be square"));
        }
        let id = LinearMap::identity(map.rows());
        Ok(match side {
            KronSide::Left => Separable2d::new(map.clone(), id),
            KronSide::Right => Separable2d::new(id, map.clone()),
        })
    }

    pub fn col_map(&self) -> &LinearMap {
        &self.col_map
    }

    pub fn row_map(&self) -> &LinearMap {
        &self.row_map
    }

    fn apply_separable(
        &self,
        v: &[f64],
        out: &mut [f64],
        first: (&LinearMap, bool),
        second: (&LinearMap, bool),
    ) {
        // first acts on columns, second on rows; the bool selects the adjoint
        let (p_in, p_out) = dims(first.0, first.1);
        let (q_in, q_out) = dims(second.0, second.1);
        debug_assert_eq!(v.len(), p_in * q_in);

        let mut stage = vec![0.0; p_out * q_in];
        if first.0.kind() == Kind::Identity {
            stage.copy_from_slice(v);
        } else {
            for c in 0..q_in {
                let src = &v[c * p_in..(c + 1) * p_in];
                let dst = &mut stage[c * p_out..(c + 1) * p_out];
                if src.iter().all(|&x| x == 0.0) {
                    dst.fill(0.0);
                    continue;
                }
                apply(first.0, first.1, src, dst);
            }
        }

        if second.0.kind() == Kind::Identity {
            out.copy_from_slice(&stage);
            return;
        }
        let mut row_in = vec![0.0; q_in];
        let mut row_out = vec![0.0; q_out];
        for i in 0..p_out {
            for (c, r) in row_in.iter_mut().enumerate() {
                *r = stage[i + c * p_out];
            }
            if row_in.iter().all(|&x| x == 0.0) {
                for c in 0..q_out {
                    out[i + c * p_out] = 0.0;
                }
                continue;
            }
            apply(second.0, second.1, &row_in, &mut row_out);
            for (c, r) in row_out.iter().enumerate() {
                out[i + c * p_out] = *r;
            }
        }
    }
}

fn dims(map: &LinearMap, adjoint: bool) -> (usize, usize) {
    if adjoint {
        (map.rows(), map.cols())
    } else {
        (map.cols(), map.rows())
    }
}

fn apply(map: &LinearMap, adjoint: bool, src: &[f64], dst: &mut [f64]) {
    if adjoint {
        map.apply_adjoint_into(src, dst);
    } else {
        map.apply_into(src, dst);
    }
}

impl LinearOperator for Separable2d {
    fn rows(&self) -> usize {
        self.col_map.rows() * self.row_map.rows()
    }
    fn cols(&self) -> usize {
        self.col_map.cols() * self.row_map.cols()
    }
    fn kind(&self) -> Kind {
        Kind::Kronecker
    }
    fn forward(&self, v: &[f64], out: &mut [f64]) {
        self.apply_separable(v, out, (&self.col_map, false), (&self.row_map, false));
    }
    fn adjoint(&self, u: &[f64], out: &mut [f64]) {
        self.apply_separable(u, out, (&self.col_map, true), (&self.row_map, true));
    }
    fn column_norms_squared(&self) -> Vec<f64> {
        // ‖(R ⊗ C)(e_c ⊗ e_a)‖² = ‖R e_c‖² ‖C e_a‖²
        let col = self.col_map.column_norms_squared();
        let row = self.row_map.column_norms_squared();
        row.iter().flat_map(|r| col.iter().map(move |c| r * c)).collect()
    }
    fn as_separable(&self) -> Option<&Separable2d> {
        Some(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn left_cumsum_on_identity_image() {
        let k = LinearMap::kron2d(&LinearMap::cumsum(2), KronSide::Left).unwrap();
        assert_eq!(k.apply(&[1.0, 0.0, 0.0, 1.0]).unwrap(), vec![1.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn right_cumsum_on_identity_image() {
        // rows of [[1,0],[0,1]] cumulatively summed: [[1,1],[0,1]]
        let k = LinearMap::kron2d(&LinearMap::cumsum(2), KronSide::Right).unwrap();
        assert_eq!(k.apply(&[1.0, 0.0, 0.0, 1.0]).unwrap(), vec![1.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn rejects_non_square_factor() {
        let m = LinearMap::dense(2, 3, vec![1.0; 6]).unwrap();
        assert!(LinearMap::kron2d(&m, KronSide::Left).is_err());
    }

    #[test]
    fn rejects_wrong_input_length() {
        let k = LinearMap::kron2d(&LinearMap::identity(3), KronSide::Left).unwrap();
        assert!(k.apply(&[0.0; 8]).is_err());
    }
}
