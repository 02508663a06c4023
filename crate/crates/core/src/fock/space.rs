use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered tensor-product space of truncated bosonic modes (or qubit levels).
///
/// Index layout is row-major Kronecker order: the first factor is the most
/// significant digit, the last factor varies fastest.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpace {
    factors: Vec<Factor>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub label: String,
    pub cutoff: usize,
}

impl HilbertSpace {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut out: Vec<Factor> = Vec::new();
        for (label, cutoff) in factors {
            let label = label.into();
            if cutoff == 0 {
                return Err(Error::InvalidDimension(format!("factor `{label}` has cutoff 0")));
            }
            if out.iter().any(|f| f.label == label) {
                return Err(Error::DuplicateFactor(label));
            }
            out.push(Factor { label, cutoff });
        }
        if out.is_empty() {
            return Err(Error::InvalidDimension("space needs at least one factor".into()));
        }
        Ok(HilbertSpace { factors: out })
    }

    /// Single-factor space.
    pub fn single(label: &str, cutoff: usize) -> Result<Self> {
        Self::new([(label, cutoff)])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.cutoff).product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f.label == label)
            .ok_or_else(|| Error::UnknownFactor(label.to_string()))
    }

    pub fn cutoff(&self, label: &str) -> Result<usize> {
        Ok(self.factors[self.position(label)?].cutoff)
    }

    /// Product of the cutoffs before and after factor `pos`.
    pub(crate) fn outer_inner(&self, pos: usize) -> (usize, usize) {
        let outer = self.factors[..pos].iter().map(|f| f.cutoff).product();
        let inner = self.factors[pos + 1..].iter().map(|f| f.cutoff).product();
        (outer, inner)
    }

    /// Flat index of a multi-index given in factor order.
    pub fn index_of(&self, levels: &[usize]) -> Result<usize> {
        if levels.len() != self.factors.len() {
            return Err(Error::InvalidDimension(format!(
                "expected {} levels, got {}",
                self.factors.len(),
                levels.len()
            )));
        }
        let mut idx = 0;
        for (f, &n) in self.factors.iter().zip(levels) {
            if n >= f.cutoff {
                return Err(Error::InvalidDimension(format!(
                    "level {n} out of range for `{}` (cutoff {})",
                    f.label, f.cutoff
                )));
            }
            idx = idx * f.cutoff + n;
        }
        Ok(idx)
    }

    /// Inverse of [`HilbertSpace::index_of`].
    pub fn levels_of(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, f) in out.iter_mut().zip(&self.factors).rev() {
            *slot = idx % f.cutoff;
            idx /= f.cutoff;
        }
        out
    }
}

impl fmt::Display for HilbertSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|x| format!("{}:{}", x.label, x.cutoff)).collect();
        write!(f, "[{}]", parts.join(" ⊗ "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_dim_is_product() {
        let s = HilbertSpace::new([("k1", 3), ("k2", 4), ("cav", 5)]).unwrap();
        assert_eq!(s.total_dim(), 60);
        assert_eq!(s.outer_inner(1), (3, 5));
    }

    #[test]
    fn rejects_duplicate_labels() {
        let err = HilbertSpace::new([("k", 3), ("k", 2)]).unwrap_err();
        assert_eq!(err, Error::DuplicateFactor("k".into()));
    }

    #[test]
    fn rejects_zero_cutoff() {
        assert!(HilbertSpace::new([("k", 0)]).is_err());
    }

    #[test]
    fn index_roundtrip_is_row_major() {
        let s = HilbertSpace::new([("a", 3), ("b", 2)]).unwrap();
        assert_eq!(s.index_of(&[1, 0]).unwrap(), 2);
        assert_eq!(s.index_of(&[2, 1]).unwrap(), 5);
        for i in 0..6 {
            assert_eq!(s.index_of(&s.levels_of(i)).unwrap(), i);
        }
    }
}
