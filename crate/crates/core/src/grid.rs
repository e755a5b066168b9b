//! Uniform output grids and complex time series defined on them.

use crate::error::{Error, Result};
use crate::prelude::*;

/// Uniform grid `t_k = k * dt`, `k = 0..len`, starting at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    dt: f64,
    len: usize,
}

impl TimeGrid {
    /// Grid covering `[0, t_max]`. When `t_max` is not a multiple of `dt`
    /// the last point is the largest multiple not exceeding it.
    pub fn new(t_max: f64, dt: f64) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidGrid("t_max must be positive and finite"));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidGrid("output_dt must be positive and finite"));
        }
        if dt > t_max {
            return Err(Error::InvalidGrid("output_dt must not exceed t_max"));
        }
        let steps = (t_max / dt + 1e-9).floor();
        if steps > 1e9 {
            return Err(Error::InvalidGrid("grid has too many points"));
        }
        Ok(Self {
            dt,
            len: steps as usize + 1,
        })
    }

    /// Grid with exactly `intervals + 1` points.
    pub fn with_intervals(dt: f64, intervals: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) || intervals == 0 {
            return Err(Error::InvalidGrid(
                "need positive dt and at least one interval",
            ));
        }
        Ok(Self {
            dt,
            len: intervals + 1,
        })
    }

    #[inline]
    pub fn dt(&self) -> f64 {
        self.dt
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn end(&self) -> f64 {
        self.time(self.len - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |k| self.time(k))
    }

    /// Index of the last grid point `<= t` (clamped to the grid).
    pub fn floor_index(&self, t: f64) -> usize {
        if t <= 0.0 {
            return 0;
        }
        let k = (t / self.dt + 1e-9).floor() as usize;
        k.min(self.len - 1)
    }

    /// Same grid, compared with a relative tolerance on the spacing.
    pub fn matches(&self, other: &TimeGrid) -> bool {
        self.len == other.len && (self.dt - other.dt).abs() <= 1e-12 * self.dt.abs()
    }
}

/// Complex samples on a [`TimeGrid`], e.g. the atomic amplitude `a0(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSeries {
    grid: TimeGrid,
    values: Vec<Complex64>,
}

impl ComplexSeries {
    pub fn new(grid: TimeGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Restriction to the first `len` points.
    pub fn truncated(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.values.len() {
            return Err(Error::InvalidArgument("truncation length out of range"));
        }
        Ok(Self {
            grid: TimeGrid::with_intervals(self.grid.dt(), len - 1).unwrap_or(self.grid),
            values: self.values[..len].to_vec(),
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(k, v)| (self.grid.time(k), *v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_covers_closed_interval() {
        let g = TimeGrid::new(30.0, 0.01).unwrap();
        assert_eq!(g.len(), 3001);
        assert!((g.end() - 30.0).abs() < 1e-12);
        let g = TimeGrid::new(1.0, 0.3).unwrap();
        assert_eq!(g.len(), 4);
        assert!((g.end() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(TimeGrid::new(0.0, 0.1).is_err());
        assert!(TimeGrid::new(1.0, -0.1).is_err());
        assert!(TimeGrid::new(1.0, 2.0).is_err());
        assert!(TimeGrid::new(f64::NAN, 0.1).is_err());
    }

    #[test]
    fn floor_index_is_clamped() {
        let g = TimeGrid::new(2.0, 0.5).unwrap();
        assert_eq!(g.floor_index(-1.0), 0);
        assert_eq!(g.floor_index(0.74), 1);
        assert_eq!(g.floor_index(1.0), 2);
        assert_eq!(g.floor_index(9.0), 4);
    }
}
