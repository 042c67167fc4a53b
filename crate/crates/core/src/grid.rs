//! Evaluation grids in the logarithmic coordinate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniform grid of `count` points over `[log_lo + margin, log_hi - margin]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub log_lo: f64,
    pub log_hi: f64,
    pub count: usize,
    #[serde(default)]
    pub margin: f64,
}

impl GridSpec {
    pub fn new(log_lo: f64, log_hi: f64, count: usize) -> Result<Self> {
        let grid = Self {
            log_lo,
            log_hi,
            count,
            margin: 0.0,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// The fundamental interval `u ∈ [1, e]` of recurrent moment functions.
    pub fn fundamental(count: usize) -> Self {
        Self {
            log_lo: 0.0,
            log_hi: 1.0,
            count,
            margin: 0.0,
        }
    }

    pub fn with_margin(self, margin: f64) -> Self {
        Self { margin, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.log_lo.is_finite() && self.log_hi.is_finite() && self.margin.is_finite()) {
            return Err(Error::InvalidGrid("non-finite bounds".into()));
        }
        if self.log_lo >= self.log_hi {
            return Err(Error::InvalidGrid(format!(
                "log_lo ({}) must be below log_hi ({})",
                self.log_lo, self.log_hi
            )));
        }
        if self.count < 2 {
            return Err(Error::InvalidGrid(format!("count must be >= 2, got {}", self.count)));
        }
        if self.margin < 0.0 {
            return Err(Error::InvalidGrid(format!("negative margin {}", self.margin)));
        }
        Ok(())
    }

    /// The shrunk evaluation window.
    pub fn window(&self) -> Result<(f64, f64)> {
        self.validate()?;
        let lo = self.log_lo + self.margin;
        let hi = self.log_hi - self.margin;
        if lo >= hi {
            return Err(Error::InvalidGrid(format!(
                "margin {} leaves an empty window in [{}, {}]",
                self.margin, self.log_lo, self.log_hi
            )));
        }
        Ok((lo, hi))
    }

    /// Grid points in log-coordinates, endpoints included.
    pub fn points(&self) -> Result<Vec<f64>> {
        let (lo, hi) = self.window()?;
        let step = (hi - lo) / (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|i| if i + 1 == self.count { hi } else { lo + step * i as f64 })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_span_the_shrunk_window() {
        let g = GridSpec::new(-2.0, 2.0, 5).unwrap().with_margin(0.5);
        assert_eq!(g.points().unwrap(), vec![-1.5, -0.75, 0.0, 0.75, 1.5]);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(GridSpec::new(1.0, 1.0, 10).is_err());
        assert!(GridSpec::new(0.0, 1.0, 1).is_err());
        let g = GridSpec::new(0.0, 1.0, 10).unwrap().with_margin(0.6);
        assert!(matches!(g.points(), Err(Error::InvalidGrid(_))));
    }
}
