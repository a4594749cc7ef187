//! Uniform mesh on `[-L, L]`, finite differences and trapezoid quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid with an odd number of nodes, symmetric about the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_width: f64,
    n_points: usize,
}

impl Grid {
    pub fn new(half_width: f64, n_points: usize) -> Result<Self> {
        if n_points < 3 || n_points.is_multiple_of(2) {
            return Err(Error::EvenOrTinyGrid(n_points));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::BadHalfWidth(half_width));
        }
        Ok(Self {
            half_width,
            n_points,
        })
    }

    /// Grid with half-width `half_width` and spacing as close to `spacing` as
    /// an odd node count allows.
    pub fn with_spacing(half_width: f64, spacing: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::BadHalfWidth(spacing));
        }
        let cells = (2.0 * half_width / spacing).round().max(2.0) as usize;
        let cells = cells + cells % 2;
        Self::new(half_width, cells + 1)
    }

    /// Default grid: `L = 40`, `h = 0.01`.
    pub fn default_grid() -> Self {
        Self::new(40.0, 8001).expect("default grid is valid")
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n_points - 1) as f64
    }

    pub fn center(&self) -> usize {
        (self.n_points - 1) / 2
    }

    /// Node coordinate, computed from the center so that `x(center + k) == -x(center - k)`.
    pub fn x(&self, i: usize) -> f64 {
        let k = i as f64 - self.center() as f64;
        k * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Trapezoid weights.
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.spacing();
        if i == 0 || i + 1 == self.n_points {
            0.5 * h
        } else {
            h
        }
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> SampledField {
        SampledField {
            values: self.nodes().into_iter().map(f).collect(),
            grid: *self,
        }
    }

    pub fn zeros(&self) -> SampledField {
        SampledField {
            values: vec![0.0; self.n_points],
            grid: *self,
        }
    }

    pub fn constant(&self, c: f64) -> SampledField {
        SampledField {
            values: vec![c; self.n_points],
            grid: *self,
        }
    }

    /// Trapezoid rule applied to raw node values.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n_points);
        let n = values.len();
        let inner = pairwise_sum(&values[1..n - 1]);
        self.spacing() * (inner + 0.5 * (values[0] + values[n - 1]))
    }

    /// `sum over cells of h * ((f[i+1] - f[i]) / h)^2`, the Dirichlet energy
    /// of the piecewise-linear interpolant. Its gradient is exactly `-2 f''`
    /// with the compact three-point stencil.
    pub fn cell_dirichlet(&self, values: &[f64]) -> f64 {
        let h = self.spacing();
        let sq: Vec<f64> = values
            .windows(2)
            .map(|w| {
                let d = w[1] - w[0];
                d * d
            })
            .collect();
        pairwise_sum(&sq) / h
    }
}

/// Real samples at every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    values: Vec<f64>,
    grid: Grid,
}

impl SampledField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid.n_points(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { values, grid })
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_points());
        Self { values, grid }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// Central differences inside, one-sided second order at the two ends.
    pub fn derivative(&self) -> Self {
        let v = &self.values;
        let n = v.len();
        let h = self.grid.spacing();
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
        }
        d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
        d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
        Self::from_raw(self.grid, d)
    }

    /// Three-point second difference; zero at the two boundary nodes.
    pub fn second_derivative(&self) -> Self {
        let v = &self.values;
        let n = v.len();
        let h2 = self.grid.spacing().powi(2);
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            d[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
        }
        Self::from_raw(self.grid, d)
    }

    pub fn integrate(&self) -> f64 {
        self.grid.integrate_values(&self.values)
    }

    /// Cumulative trapezoid integral starting from `anchor` at `-L`.
    pub fn cumulative_integral(&self, anchor: f64) -> Self {
        let h = self.grid.spacing();
        let mut out = Vec::with_capacity(self.values.len());
        let mut acc = anchor;
        let mut comp = 0.0;
        out.push(acc);
        for w in self.values.windows(2) {
            // Kahan-compensated running sum.
            let y = 0.5 * h * (w[0] + w[1]) - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
            out.push(acc);
        }
        Self::from_raw(self.grid, out)
    }

    /// `integrate(f')^2` evaluated cell-wise, see [`Grid::cell_dirichlet`].
    pub fn dirichlet(&self) -> f64 {
        self.grid.cell_dirichlet(&self.values)
    }

    pub fn l2_norm(&self) -> f64 {
        self.map(|v| v * v).integrate().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_interior(&self) -> f64 {
        let n = self.values.len();
        self.values[1..n - 1]
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Index<usize> for SampledField {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Pairwise summation; error grows like `log n` instead of `n`.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 64 {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}
