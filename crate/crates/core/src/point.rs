use std::ops::Deref;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg;

/// A vector of the ambient space `V`.
///
/// For circle actions the coordinates are interleaved `(re, im)` pairs of the
/// `d` complex coordinates; for finite actions they are the `d` reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrbitPoint(Vec<f64>);

impl OrbitPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        OrbitPoint(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        OrbitPoint(vec![0.0; dim])
    }

    pub fn from_complex(values: &[Complex64]) -> Self {
        OrbitPoint(values.iter().flat_map(|c| [c.re, c.im]).collect())
    }

    /// Reads the coordinates as complex numbers; the dimension must be even.
    pub fn to_complex(&self) -> Vec<Complex64> {
        to_complex(&self.0)
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.0)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for OrbitPoint {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for OrbitPoint {
    fn from(v: Vec<f64>) -> Self {
        OrbitPoint(v)
    }
}

pub fn to_complex(coords: &[f64]) -> Vec<Complex64> {
    coords.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect()
}

pub fn from_complex(values: &[Complex64]) -> Vec<f64> {
    values.iter().flat_map(|c| [c.re, c.im]).collect()
}

impl AsRef<[f64]> for OrbitPoint {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}
