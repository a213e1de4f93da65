//! Dense embedding vector with finiteness and dimension invariants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense real-valued embedding of fixed dimension.
///
/// Every element is finite and the dimension is at least 1; both are
/// checked at construction so downstream code never sees NaN or Inf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector {
    values: Vec<f64>,
}

impl Vector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Parameter("vector must have dimension >= 1".into()));
        }
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::Parameter(format!(
                "vector element {i} is not finite ({})",
                values[i]
            )));
        }
        Ok(Self { values })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            values: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.values
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Scaled copy; the result keeps the finiteness invariant only for
    /// finite `c`, which callers guarantee.
    pub fn scaled(&self, c: f64) -> Vector {
        Vector {
            values: self.values.iter().map(|x| x * c).collect(),
        }
    }

    /// Unit-norm copy, or an unchanged copy for the zero vector.
    pub fn normalized(&self) -> Vector {
        let n = self.norm();
        if n > 0.0 {
            self.scaled(1.0 / n)
        } else {
            self.clone()
        }
    }

    pub(crate) fn check_same_dim(&self, other: &Vector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::Shape(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }

    /// Concatenation `[self, other]`, the regression/MLP input layout.
    pub fn concat(&self, other: &Vector) -> Vector {
        let mut values = Vec::with_capacity(self.dim() + other.dim());
        values.extend_from_slice(&self.values);
        values.extend_from_slice(&other.values);
        Vector { values }
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;
    fn try_from(values: Vec<f64>) -> Result<Self> {
        Vector::new(values)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Vec<f64> {
        v.values
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(Vector::new(vec![]).is_err());
        assert!(Vector::new(vec![1.0, f64::NAN]).is_err());
        assert!(Vector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn dot_and_norm() {
        let v = Vector::new(vec![3.0, 4.0]).unwrap();
        assert_eq!(v.dot(&v), 25.0);
        assert_eq!(v.norm(), 5.0);
    }

    #[test]
    fn concat_layout() {
        let u = Vector::new(vec![1.0, 2.0]).unwrap();
        let v = Vector::new(vec![3.0, 4.0]).unwrap();
        assert_eq!(u.concat(&v).as_slice(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn serde_is_a_plain_array() {
        let v = Vector::new(vec![1.0, 2.5]).unwrap();
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, "[1.0,2.5]");
        let back: Vector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
        // invariants enforced on the way back in
        assert!(serde_json::from_str::<Vector>("[]").is_err());
    }
}
