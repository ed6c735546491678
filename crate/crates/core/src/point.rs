//! Dense points of the ambient space.

use ndarray::Array1;

use crate::error::OperatorError;

/// An element of `R^n`, stored densely. All coordinates are finite by
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Array1<f64>,
}

impl Point {
    /// Builds a point, rejecting NaN/infinite coordinates and zero dimension.
    pub fn new(coords: Vec<f64>) -> Result<Self, OperatorError> {
        Self::from_array(Array1::from(coords))
    }

    pub fn from_array(coords: Array1<f64>) -> Result<Self, OperatorError> {
        if coords.is_empty() {
            return Err(OperatorError::InvalidParameter(
                "point must have positive dimension".into(),
            ));
        }
        if !coords.iter().all(|c| c.is_finite()) {
            return Err(OperatorError::NonFiniteOutput);
        }
        Ok(Self { coords })
    }

    /// Origin of `R^dim`.
    pub fn zeros(dim: usize) -> Self {
        Self {
            coords: Array1::zeros(dim),
        }
    }

    /// Internal constructor for values already known to be finite.
    pub(crate) fn raw(coords: Array1<f64>) -> Self {
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &Array1<f64> {
        &self.coords
    }

    pub fn into_array(self) -> Array1<f64> {
        self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.dot(&self.coords).sqrt()
    }

    /// Euclidean distance to another point of the same dimension.
    pub fn dist(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(other.coords.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}
