use serde::{Deserialize, Serialize};

use crate::error::{EwpoError, Result};
use crate::summation;

/// Paired observations `(x_i, y_i)` of the univariate model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSample")]
pub struct Sample {
    x: Vec<f64>,
    y: Vec<f64>,
}

#[derive(Deserialize)]
struct RawSample {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl TryFrom<RawSample> for Sample {
    type Error = EwpoError;

    fn try_from(raw: RawSample) -> Result<Self> {
        Sample::new(raw.x, raw.y)
    }
}

impl Sample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(EwpoError::LengthMismatch {
                x: x.len(),
                y: y.len(),
            });
        }
        if x.len() < 2 {
            return Err(EwpoError::InsufficientObservations {
                need: 2,
                got: x.len(),
            });
        }
        if let Some(index) = x.iter().position(|v| !v.is_finite()) {
            return Err(EwpoError::NonFinite { field: "x", index });
        }
        if let Some(index) = y.iter().position(|v| !v.is_finite()) {
            return Err(EwpoError::NonFinite { field: "y", index });
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    /// Always false; a sample holds at least two observations.
    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn mean_x(&self) -> f64 {
        summation::sum(self.x.iter().copied()) / self.len() as f64
    }

    pub fn mean_y(&self) -> f64 {
        summation::sum(self.y.iter().copied()) / self.len() as f64
    }

    /// Sub-sample made of the given observation indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Sample> {
        let x = indices.iter().map(|&i| self.x[i]).collect();
        let y = indices.iter().map(|&i| self.y[i]).collect();
        Sample::new(x, y)
    }

    /// Multiplies both coordinates observation-wise by `g` (`z_i = g_i y_i`, `w_i = g_i x_i`).
    pub fn scaled_by(&self, g: &[f64]) -> Result<Sample> {
        if g.len() != self.len() {
            return Err(EwpoError::LengthMismatch {
                x: self.len(),
                y: g.len(),
            });
        }
        let x = self.x.iter().zip(g).map(|(x, g)| x * g).collect();
        let y = self.y.iter().zip(g).map(|(y, g)| y * g).collect();
        Sample::new(x, y)
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.x, self.y)
    }
}
