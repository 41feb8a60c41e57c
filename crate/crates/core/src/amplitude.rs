//! Nonnegative real amplitude vectors shared by the optimization and
//! simulation layers.

use serde::{Deserialize, Serialize};

use crate::error::{QrsError, Result};
use crate::state::INPUT_TOL;

/// Nonnegative real vector of amplitudes. Used for initial amplitudes,
/// target amplitudes and water-filling vectors; when it plays the role of
/// an initial or target distribution it must additionally be a unit vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AmplitudeVector {
    entries: Vec<f64>,
}

impl AmplitudeVector {
    /// Builds a vector, rejecting negative or non-finite entries.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(QrsError::Validation("amplitude vector is empty".into()));
        }
        for (k, &v) in entries.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(QrsError::Validation(format!(
                    "amplitude entry {k} is {v}, expected a nonnegative finite value"
                )));
            }
        }
        Ok(AmplitudeVector { entries })
    }

    /// Builds a vector and insists on unit Euclidean norm within `1e-9`.
    pub fn unit(entries: Vec<f64>) -> Result<Self> {
        let v = Self::new(entries)?;
        v.check_unit()?;
        Ok(v)
    }

    /// Normalizes arbitrary nonnegative entries to a unit vector.
    pub fn normalized(entries: Vec<f64>) -> Result<Self> {
        let v = Self::new(entries)?;
        let norm = v.l2_norm();
        if norm <= 0.0 {
            return Err(QrsError::Validation(
                "cannot normalize the zero vector".into(),
            ));
        }
        AmplitudeVector::new(v.entries.iter().map(|x| x / norm).collect())
    }

    pub fn check_unit(&self) -> Result<()> {
        let norm = self.l2_norm();
        if (norm - 1.0).abs() > INPUT_TOL {
            return Err(QrsError::Validation(format!(
                "expected a unit vector, found norm {norm}"
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn l2_norm(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.entries.iter().sum()
    }

    pub fn dot(&self, other: &AmplitudeVector) -> Result<f64> {
        if self.len() != other.len() {
            return Err(QrsError::DimensionMismatch(format!(
                "dot product between lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Componentwise scaling by a nonnegative factor.
    pub fn scaled(&self, factor: f64) -> Result<AmplitudeVector> {
        AmplitudeVector::new(self.entries.iter().map(|x| x * factor).collect())
    }
}

impl std::ops::Index<usize> for AmplitudeVector {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.entries[k]
    }
}
