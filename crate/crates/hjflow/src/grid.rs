//! Uniform spatial grid on [0, 1] and scalar fields sampled on it.

use crate::error::{Error, Result};

/// Uniform grid of `n >= 3` nodes on [0, 1], spacing 1/(n−1).
///
/// Node i sits at x_i = i/(n−1); the first node is exactly 0 and the last
/// exactly 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::GridTooSmall { min: 3, got: n });
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.n as f64 - 1.0)
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 / (self.n as f64 - 1.0)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }
}

/// A scalar function sampled on a [`Grid`].
///
/// Carries every profile the designs operate on: plant states, transformed
/// states, observer states, kernel gain rows and traffic densities.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    /// Wrap raw samples; the length must match the grid.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.n()],
        }
    }

    /// Sample an analytic profile on the grid.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().map(f).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Value at x = 0.
    pub fn first(&self) -> f64 {
        self.values[0]
    }

    /// Value at x = 1.
    pub fn last(&self) -> f64 {
        *self.values.last().expect("grid has >= 3 nodes")
    }

    /// Index of the first non-finite sample, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_finite())
    }

    /// Pointwise map over (node, value).
    pub fn map_with_x(&self, f: impl Fn(f64, f64) -> f64) -> Field {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(self.grid.node(i), v))
            .collect();
        Field {
            grid: self.grid,
            values,
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&u, &v)| f(u, v))
            .collect();
        Ok(Field {
            grid: self.grid,
            values,
        })
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(self.grid.n(), other.grid.n()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_small_n() {
        assert!(Grid::new(2).is_err());
        assert!(Grid::new(3).is_ok());
    }

    #[test]
    fn grid_nodes_span_unit_interval_exactly() {
        let g = Grid::new(201).unwrap();
        assert_eq!(g.node(0), 0.0);
        assert_eq!(g.node(200), 1.0);
        let nodes: Vec<f64> = g.nodes().collect();
        assert!(nodes.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn field_length_checked() {
        let g = Grid::new(5).unwrap();
        assert!(Field::new(g, vec![0.0; 4]).is_err());
        assert!(Field::new(g, vec![0.0; 5]).is_ok());
    }

    #[test]
    fn field_endpoints() {
        let g = Grid::new(11).unwrap();
        let f = Field::from_fn(g, |x| 2.0 * x);
        assert_eq!(f.first(), 0.0);
        assert_eq!(f.last(), 2.0);
    }
}
