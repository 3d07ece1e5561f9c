//! Square Cartesian grids on `[-L, L]^2` carrying the unit disc, and scalar fields on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, GridChart, MIN_NODES};
use crate::par;

/// Sub-samples per axis used to estimate the disc area inside a cell crossed by the circle.
const CELL_SUBSAMPLES: usize = 16;

/// `n x n` nodes `x_i = -L + i h`, `h = 2L / (n - 1)`, symmetric about the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneGrid {
    pub n: usize,
    pub half_width: f64,
}

impl PlaneGrid {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::DegenerateChart(format!(
                "plane grid with {n} < {MIN_NODES} nodes per axis"
            )));
        }
        if !(half_width >= 1.0) {
            return Err(Error::DegenerateChart(format!(
                "box half-width {half_width} must be >= 1"
            )));
        }
        Ok(Self { n, half_width })
    }

    /// Grid on `[-1, 1]^2`, the tightest box around the disc.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n, 1.0)
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.h()
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn index(&self, i1: usize, i2: usize) -> usize {
        i1 * self.n + i2
    }

    pub fn point(&self, idx: usize) -> (f64, f64) {
        (self.x(idx / self.n), self.x(idx % self.n))
    }

    /// Disc mask: the node lies strictly inside the unit circle.
    pub fn inside(&self, i1: usize, i2: usize) -> bool {
        let (x, y) = (self.x(i1), self.x(i2));
        x * x + y * y < 1.0
    }

    pub fn chart(&self) -> GridChart {
        let r = (-self.half_width, self.half_width);
        GridChart {
            x1_range: r,
            x2_range: r,
            n1: self.n,
            n2: self.n,
            periodic1: false,
            periodic2: false,
        }
    }

    /// Area of the node's cell `[x - h/2, x + h/2]^2` (clipped to the box) inside the disc.
    pub fn disc_weight(&self, i1: usize, i2: usize) -> f64 {
        self.clipped_weight(i1, i2, true)
    }

    /// Area of the node's cell (clipped to the box) outside the disc.
    pub fn exterior_weight(&self, i1: usize, i2: usize) -> f64 {
        self.clipped_weight(i1, i2, false)
    }

    /// Area of the node's cell clipped to the box (trapezoid weights).
    pub fn box_weight(&self, i1: usize, i2: usize) -> f64 {
        let edge = |i: usize| if i == 0 || i + 1 == self.n { 0.5 } else { 1.0 };
        self.h() * self.h() * edge(i1) * edge(i2)
    }

    fn clipped_weight(&self, i1: usize, i2: usize, want_inside: bool) -> f64 {
        let h = self.h();
        let (x, y) = (self.x(i1), self.x(i2));
        let lo = |v: f64| (v - 0.5 * h).max(-self.half_width);
        let hi = |v: f64| (v + 0.5 * h).min(self.half_width);
        let (x0, x1, y0, y1) = (lo(x), hi(x), lo(y), hi(y));
        let area = (x1 - x0) * (y1 - y0);
        // Nearest and farthest distances of the cell from the origin decide whether it is cut.
        let near = |a: f64, b: f64| {
            if a > 0.0 {
                a
            } else if b < 0.0 {
                -b
            } else {
                0.0
            }
        };
        let far = |a: f64, b: f64| a.abs().max(b.abs());
        let rmin = near(x0, x1).hypot(near(y0, y1));
        let rmax = far(x0, x1).hypot(far(y0, y1));
        let frac_inside = if rmax <= 1.0 {
            1.0
        } else if rmin >= 1.0 {
            0.0
        } else {
            let k = CELL_SUBSAMPLES;
            let mut hits = 0usize;
            for a in 0..k {
                for b in 0..k {
                    let px = x0 + (a as f64 + 0.5) / k as f64 * (x1 - x0);
                    let py = y0 + (b as f64 + 0.5) / k as f64 * (y1 - y0);
                    if px * px + py * py < 1.0 {
                        hits += 1;
                    }
                }
            }
            hits as f64 / (k * k) as f64
        };
        area * if want_inside { frac_inside } else { 1.0 - frac_inside }
    }
}

/// Scalar values at every node of a [`PlaneGrid`]. Disc fields use only the masked nodes; plane
/// fields use the whole box.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscField {
    pub grid: PlaneGrid,
    pub values: Vec<f64>,
}

impl DiscField {
    pub fn zeros(grid: PlaneGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn<F>(grid: PlaneGrid, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Sync + Send,
    {
        let n = grid.n;
        let rows = par::map_collect(n, |i1| (0..n).map(|i2| f(grid.x(i1), grid.x(i2))).collect::<Vec<_>>());
        Self {
            grid,
            values: rows.concat(),
        }
    }

    pub fn from_values(grid: PlaneGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ChartMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn at(&self, i1: usize, i2: usize) -> f64 {
        self.values[self.grid.index(i1, i2)]
    }

    pub fn check_same_grid(&self, other: &DiscField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::ChartMismatch(format!(
                "grids differ: n = {} on [-{}, {}] vs n = {} on [-{}, {}]",
                self.grid.n,
                self.grid.half_width,
                self.grid.half_width,
                other.grid.n,
                other.grid.half_width,
                other.grid.half_width
            )));
        }
        Ok(())
    }

    pub fn to_field(&self) -> Field {
        Field {
            chart: self.grid.chart(),
            comps: 1,
            data: self.values.clone(),
        }
    }

    fn from_field(grid: PlaneGrid, f: Field) -> Self {
        Self { grid, values: f.data }
    }

    /// Second-order finite-difference partial derivatives (one-sided at the box edges).
    pub fn gradient(&self) -> (DiscField, DiscField) {
        let f = self.to_field();
        (Self::from_field(self.grid, f.d1()), Self::from_field(self.grid, f.d2()))
    }

    pub fn d12(&self) -> DiscField {
        Self::from_field(self.grid, self.to_field().d12())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DiscField {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &DiscField, f: impl Fn(f64, f64) -> f64) -> DiscField {
        Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    /// `int_D f` with cell-fraction weights.
    pub fn disc_integral(&self) -> f64 {
        self.weighted_sum(|i1, i2| self.grid.disc_weight(i1, i2))
    }

    /// `int over the box` with trapezoid weights.
    pub fn box_integral(&self) -> f64 {
        self.weighted_sum(|i1, i2| self.grid.box_weight(i1, i2))
    }

    fn weighted_sum(&self, w: impl Fn(usize, usize) -> f64 + Sync + Send) -> f64 {
        let n = self.grid.n;
        par::sum(n, |i1| (0..n).map(|i2| w(i1, i2) * self.at(i1, i2)).sum())
    }

    /// Largest `|f|` over the disc mask.
    pub fn disc_max_abs(&self) -> f64 {
        let n = self.grid.n;
        par::max(n, |i1| {
            (0..n)
                .filter(|&i2| self.grid.inside(i1, i2))
                .map(|i2| self.at(i1, i2).abs())
                .fold(0.0, f64::max)
        })
    }

    /// `||grad f||_{L2(D)}` from finite differences of the sampled values.
    pub fn disc_dirichlet_norm(&self) -> f64 {
        let (a, b) = self.gradient();
        a.zip_with(&b, |x, y| x * x + y * y).disc_integral().sqrt()
    }

    /// Largest `|f|` within `band` nodes of the box edge.
    pub fn edge_max_abs(&self, band: usize) -> f64 {
        let n = self.grid.n;
        let mut m: f64 = 0.0;
        for i1 in 0..n {
            for i2 in 0..n {
                if i1 < band || i2 < band || i1 + band >= n || i2 + band >= n {
                    m = m.max(self.at(i1, i2).abs());
                }
            }
        }
        m
    }
}

/// `d1 alpha d2 beta - d2 alpha d1 beta` with central differences.
pub fn jacobian(alpha: &DiscField, beta: &DiscField) -> Result<DiscField> {
    alpha.check_same_grid(beta)?;
    let (a1, a2) = alpha.gradient();
    let (b1, b2) = beta.gradient();
    let values = (0..alpha.grid.len())
        .map(|i| a1.values[i] * b2.values[i] - a2.values[i] * b1.values[i])
        .collect();
    Ok(DiscField {
        grid: alpha.grid,
        values,
    })
}
