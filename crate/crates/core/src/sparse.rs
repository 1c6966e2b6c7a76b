use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::numerics::{inf_norm, Tolerance};

/// Support-plus-values representation of a sparse real vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    length: usize,
    support: Vec<usize>,
    values: Vec<f64>,
}

impl SparseVector {
    /// `support` must be strictly increasing and in range; values finite and
    /// nonzero.
    pub fn new(length: usize, support: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if support.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} support indices but {} values",
                support.len(),
                values.len()
            )));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSpec("support must be strictly increasing".into()));
        }
        if let Some(&i) = support.iter().find(|&&i| i >= length) {
            return Err(Error::DimensionMismatch(format!(
                "index {i} out of range for length {length}"
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v == 0.0) {
            return Err(Error::InvalidSpec(format!("sparse entry {v} must be finite and nonzero")));
        }
        Ok(Self {
            length,
            support,
            values,
        })
    }

    pub fn zeros(length: usize) -> Self {
        Self {
            length,
            support: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Keeps the entries that are nonzero under `tol`.
    pub fn from_dense(v: &[f64], tol: &Tolerance) -> Self {
        let scale = inf_norm(v);
        let (support, values) = v
            .iter()
            .enumerate()
            .filter(|(_, x)| !tol.is_zero(**x, scale))
            .map(|(i, &x)| (i, x))
            .unzip();
        Self {
            length: v.len(),
            support,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.support.iter().copied().zip(self.values.iter().copied())
    }

    pub fn to_dense(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.length);
        for (i, x) in self.iter() {
            v[i] = x;
        }
        v
    }

    pub fn inf_norm(&self) -> f64 {
        inf_norm(&self.values)
    }

    /// Same support, and values within `rel * ||self||_inf` of each other.
    pub fn approx_eq(&self, other: &SparseVector, rel: f64) -> bool {
        self.length == other.length
            && self.support == other.support
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| (a - b).abs() <= rel * self.inf_norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(SparseVector::new(4, vec![1, 3], vec![1.0, -2.0]).is_ok());
        assert!(SparseVector::new(4, vec![3, 1], vec![1.0, -2.0]).is_err());
        assert!(SparseVector::new(4, vec![1, 1], vec![1.0, -2.0]).is_err());
        assert!(SparseVector::new(4, vec![4], vec![1.0]).is_err());
        assert!(SparseVector::new(4, vec![0], vec![0.0]).is_err());
        assert!(SparseVector::new(4, vec![0], vec![]).is_err());
    }

    #[test]
    fn dense_round_trip() {
        let x = SparseVector::new(5, vec![0, 4], vec![2.5, -0.1]).unwrap();
        let d = x.to_dense();
        assert_eq!(d.as_slice(), &[2.5, 0.0, 0.0, 0.0, -0.1]);
        assert_eq!(SparseVector::from_dense(d.as_slice(), &Tolerance::default()), x);
        assert_eq!(SparseVector::zeros(3).to_dense(), DVector::zeros(3));
    }
}
