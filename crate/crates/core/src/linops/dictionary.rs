use std::ops::Range;

use super::LinearMap;
use crate::error::{check_len, Error, Result};

/// Ordered, named sub-frames `W = [W_1, ..., W_K]` sharing the signal
/// dimension `n`. Coefficient slice `k` feeds sub-frame `k`.
#[derive(Clone, Debug)]
pub struct CompositeDictionary {
    names: Vec<String>,
    frames: Vec<LinearMap>,
    offsets: Vec<usize>,
}

impl CompositeDictionary {
    pub fn new(subframes: Vec<(String, LinearMap)>) -> Result<Self> {
        if subframes.is_empty() {
            return Err(Error::domain("dictionary needs at least one sub-frame"));
        }
        let n = subframes[0].1.rows();
        let mut offsets = vec![0];
        for (name, map) in &subframes {
            if map.rows() != n {
                return Err(Error::domain(format!(
                    "sub-frame {name:?} has {} rows, expected {n}",
                    map.rows()
                )));
            }
            offsets.push(offsets.last().unwrap() + map.cols());
        }
        if *offsets.last().unwrap() < n {
            return Err(Error::domain("dictionary must have at least as many atoms as rows"));
        }
        let (names, frames) = subframes.into_iter().unzip();
        Ok(CompositeDictionary { names, frames, offsets })
    }

    /// Signal dimension `n`.
    pub fn signal_len(&self) -> usize {
        self.frames[0].rows()
    }

    /// Total atom count `N`.
    pub fn atom_count(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn frame(&self, k: usize) -> &LinearMap {
        &self.frames[k]
    }

    pub fn frames(&self) -> &[LinearMap] {
        &self.frames
    }

    pub fn range(&self, k: usize) -> Range<usize> {
        self.offsets[k]..self.offsets[k + 1]
    }

    pub fn frame_lengths(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `[W_1, ..., W_K]` as a single map.
    pub fn as_map(&self) -> LinearMap {
        LinearMap::concat(&self.frames).expect("validated at construction")
    }

    /// `A [W_1, ..., W_K] = [A W_1, ..., A W_K]`, built per frame so that
    /// column norms stay cheap for structured frames.
    pub fn forward_dictionary(&self, forward: &LinearMap) -> Result<LinearMap> {
        let parts = self
            .frames
            .iter()
            .map(|w| LinearMap::compose(forward, w))
            .collect::<Result<Vec<_>>>()?;
        LinearMap::concat(&parts)
    }

    /// `W_k α_k` for every frame.
    pub fn contributions(&self, alpha: &[f64]) -> Result<Vec<Vec<f64>>> {
        check_len(alpha.len(), self.atom_count())?;
        let n = self.signal_len();
        Ok(self
            .frames
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let mut out = vec![0.0; n];
                w.apply_into(&alpha[self.range(k)], &mut out);
                out
            })
            .collect())
    }

    pub fn synthesize(&self, alpha: &[f64]) -> Result<Vec<f64>> {
        let parts = self.contributions(alpha)?;
        let mut x = vec![0.0; self.signal_len()];
        for p in parts {
            crate::vector::axpy(1.0, &p, &mut x);
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_frames() -> CompositeDictionary {
        CompositeDictionary::new(vec![
            ("increments".into(), LinearMap::cumsum(3)),
            ("cosine".into(), LinearMap::dct_synthesis(3)),
        ])
        .unwrap()
    }

    #[test]
    fn offsets_partition_atoms() {
        let d = two_frames();
        assert_eq!(d.atom_count(), 6);
        assert_eq!(d.range(0), 0..3);
        assert_eq!(d.range(1), 3..6);
    }

    #[test]
    fn rejects_undercomplete_and_mismatch() {
        let m = LinearMap::dense(3, 2, vec![1.0; 6]).unwrap();
        assert!(CompositeDictionary::new(vec![("a".into(), m)]).is_err());
        assert!(CompositeDictionary::new(vec![
            ("a".into(), LinearMap::identity(2)),
            ("b".into(), LinearMap::identity(3)),
        ])
        .is_err());
    }

    #[test]
    fn synthesis_matches_concat() {
        let d = two_frames();
        let alpha = [0.5, -1.0, 2.0, 0.1, 0.0, 3.0];
        let direct = d.as_map().apply(&alpha).unwrap();
        let summed = d.synthesize(&alpha).unwrap();
        for (a, b) in direct.iter().zip(&summed) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
