//! Uniform tensor grids over conformal coordinates and multi-component nodal fields with
//! second-order finite differences.
//!
//! Nodes are stored row-major: node `(i1, i2)` lives at `i1 * n2 + i2`, so a "row" is a line
//! of constant `x1`. Periodic axes identify node `n` with node `0`; their spacing is
//! `span / n`. Non-periodic axes include both endpoints and have spacing `span / (n - 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Minimal node count per axis.
pub const MIN_NODES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridChart {
    pub x1_range: (f64, f64),
    pub x2_range: (f64, f64),
    pub n1: usize,
    pub n2: usize,
    pub periodic1: bool,
    pub periodic2: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}

impl GridChart {
    pub fn new(
        x1_range: (f64, f64),
        x2_range: (f64, f64),
        n1: usize,
        n2: usize,
        periodic1: bool,
        periodic2: bool,
    ) -> Result<Self> {
        let chart = Self {
            x1_range,
            x2_range,
            n1,
            n2,
            periodic1,
            periodic2,
        };
        chart.validate()?;
        Ok(chart)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 < MIN_NODES || self.n2 < MIN_NODES {
            return Err(Error::DegenerateChart(format!(
                "grid counts ({}, {}) below {MIN_NODES}",
                self.n1, self.n2
            )));
        }
        for (name, h) in [("h1", self.h1()), ("h2", self.h2())] {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::DegenerateChart(format!("{name} = {h}")));
            }
        }
        Ok(())
    }

    pub fn h1(&self) -> f64 {
        spacing(self.x1_range, self.n1, self.periodic1)
    }

    pub fn h2(&self) -> f64 {
        spacing(self.x2_range, self.n2, self.periodic2)
    }

    pub fn h(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X1 => self.h1(),
            Axis::X2 => self.h2(),
        }
    }

    pub fn h_max(&self) -> f64 {
        self.h1().max(self.h2())
    }

    pub fn x1(&self, i1: usize) -> f64 {
        self.x1_range.0 + i1 as f64 * self.h1()
    }

    pub fn x2(&self, i2: usize) -> f64 {
        self.x2_range.0 + i2 as f64 * self.h2()
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i1: usize, i2: usize) -> usize {
        i1 * self.n2 + i2
    }

    #[inline]
    pub fn node(&self, idx: usize) -> (usize, usize) {
        (idx / self.n2, idx % self.n2)
    }

    fn n(&self, axis: Axis) -> usize {
        match axis {
            Axis::X1 => self.n1,
            Axis::X2 => self.n2,
        }
    }

    fn periodic(&self, axis: Axis) -> bool {
        match axis {
            Axis::X1 => self.periodic1,
            Axis::X2 => self.periodic2,
        }
    }

    /// Trapezoid (or periodic rectangle) weight along one axis.
    pub fn weight(&self, axis: Axis, i: usize) -> f64 {
        let h = self.h(axis);
        if !self.periodic(axis) && (i == 0 || i + 1 == self.n(axis)) {
            0.5 * h
        } else {
            h
        }
    }

    /// Quadrature weight of node `(i1, i2)`.
    pub fn node_weight(&self, i1: usize, i2: usize) -> f64 {
        self.weight(Axis::X1, i1) * self.weight(Axis::X2, i2)
    }

    /// Index range along an axis kept by interior norms: everything on periodic axes,
    /// `margin..n - margin` otherwise.
    pub fn interior(&self, axis: Axis, margin: usize) -> std::ops::Range<usize> {
        let n = self.n(axis);
        if self.periodic(axis) {
            0..n
        } else {
            margin.min(n)..n.saturating_sub(margin)
        }
    }

    /// Same spacing and origin, both axes non-periodic; node `n - 1` is the last sample.
    pub fn unrolled(&self) -> GridChart {
        let end = |r: (f64, f64), n: usize, p: bool| {
            if p {
                (r.0, r.0 + (n - 1) as f64 * spacing(r, n, p))
            } else {
                r
            }
        };
        GridChart {
            x1_range: end(self.x1_range, self.n1, self.periodic1),
            x2_range: end(self.x2_range, self.n2, self.periodic2),
            periodic1: false,
            periodic2: false,
            ..*self
        }
    }

    pub fn same_nodes(&self, other: &GridChart) -> bool {
        self.n1 == other.n1
            && self.n2 == other.n2
            && (self.h1() - other.h1()).abs() <= 1e-12 * self.h1()
            && (self.h2() - other.h2()).abs() <= 1e-12 * self.h2()
    }

    /// Finite-difference stencil (node, coefficient) for the derivative of given order at `i`.
    fn stencil(&self, axis: Axis, order: u8, i: usize) -> Stencil {
        let n = self.n(axis);
        let h = self.h(axis);
        let periodic = self.periodic(axis);
        let wrap = |k: isize| k.rem_euclid(n as isize) as usize;
        let ii = i as isize;
        let mut s = Stencil::default();
        match order {
            1 => {
                let c = 0.5 / h;
                if periodic || (i > 0 && i + 1 < n) {
                    s.push(wrap(ii - 1), -c);
                    s.push(wrap(ii + 1), c);
                } else if i == 0 {
                    s.push(0, -3.0 * c);
                    s.push(1, 4.0 * c);
                    s.push(2, -c);
                } else {
                    s.push(n - 1, 3.0 * c);
                    s.push(n - 2, -4.0 * c);
                    s.push(n - 3, c);
                }
            }
            _ => {
                let c = 1.0 / (h * h);
                if periodic || (i > 0 && i + 1 < n) {
                    s.push(wrap(ii - 1), c);
                    s.push(i, -2.0 * c);
                    s.push(wrap(ii + 1), c);
                } else if i == 0 {
                    s.push(0, 2.0 * c);
                    s.push(1, -5.0 * c);
                    s.push(2, 4.0 * c);
                    s.push(3, -c);
                } else {
                    s.push(n - 1, 2.0 * c);
                    s.push(n - 2, -5.0 * c);
                    s.push(n - 3, 4.0 * c);
                    s.push(n - 4, -c);
                }
            }
        }
        s
    }
}

fn spacing(range: (f64, f64), n: usize, periodic: bool) -> f64 {
    let span = range.1 - range.0;
    if periodic {
        span / n as f64
    } else {
        span / (n as f64 - 1.0)
    }
}

#[derive(Default, Clone, Copy)]
struct Stencil {
    len: usize,
    idx: [usize; 4],
    coef: [f64; 4],
}

impl Stencil {
    fn push(&mut self, i: usize, c: f64) {
        self.idx[self.len] = i;
        self.coef[self.len] = c;
        self.len += 1;
    }
}

/// Nodal field with `comps` real components per node.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub chart: GridChart,
    pub comps: usize,
    pub data: Vec<f64>,
}

impl Field {
    pub fn zeros(chart: GridChart, comps: usize) -> Self {
        Self {
            chart,
            comps,
            data: vec![0.0; chart.len() * comps],
        }
    }

    pub fn from_data(chart: GridChart, comps: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != chart.len() * comps {
            return Err(Error::ChartMismatch(format!(
                "field data has {} values, chart needs {}",
                data.len(),
                chart.len() * comps
            )));
        }
        Ok(Self { chart, comps, data })
    }

    /// Builds a field from `f(i1, i2, out)`, rows in parallel.
    pub fn from_fn<F>(chart: GridChart, comps: usize, f: F) -> Self
    where
        F: Fn(usize, usize, &mut [f64]) + Sync + Send,
    {
        let mut field = Self::zeros(chart, comps);
        let n2 = chart.n2;
        par::for_each_row(&mut field.data, n2 * comps, |i1, row| {
            for i2 in 0..n2 {
                f(i1, i2, &mut row[i2 * comps..(i2 + 1) * comps]);
            }
        });
        field
    }

    /// Node-wise map into a new field with `comps` components.
    pub fn map<F>(&self, comps: usize, f: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]) + Sync + Send,
    {
        Self::from_fn(self.chart, comps, |i1, i2, out| f(self.at(i1, i2), out))
    }

    #[inline]
    pub fn at(&self, i1: usize, i2: usize) -> &[f64] {
        let k = self.chart.index(i1, i2) * self.comps;
        &self.data[k..k + self.comps]
    }

    #[inline]
    pub fn value(&self, i1: usize, i2: usize) -> f64 {
        self.data[self.chart.index(i1, i2) * self.comps]
    }

    pub fn check_same_chart(&self, other: &Field) -> Result<()> {
        if self.chart.same_nodes(&other.chart) {
            Ok(())
        } else {
            Err(Error::ChartMismatch(format!(
                "{}x{} vs {}x{}",
                self.chart.n1, self.chart.n2, other.chart.n1, other.chart.n2
            )))
        }
    }

    /// Partial derivative of order 1 or 2 along `axis`.
    pub fn diff(&self, axis: Axis, order: u8) -> Field {
        let chart = self.chart;
        let comps = self.comps;
        let n_axis = match axis {
            Axis::X1 => chart.n1,
            Axis::X2 => chart.n2,
        };
        let stencils: Vec<Stencil> = (0..n_axis).map(|i| chart.stencil(axis, order, i)).collect();
        Field::from_fn(chart, comps, |i1, i2, out| {
            out.iter_mut().for_each(|o| *o = 0.0);
            let (s, at) = match axis {
                Axis::X1 => (&stencils[i1], None),
                Axis::X2 => (&stencils[i2], Some(i1)),
            };
            for k in 0..s.len {
                let node = match at {
                    None => chart.index(s.idx[k], i2),
                    Some(i1) => chart.index(i1, s.idx[k]),
                };
                let src = &self.data[node * comps..(node + 1) * comps];
                for (o, v) in out.iter_mut().zip(src) {
                    *o += s.coef[k] * v;
                }
            }
        })
    }

    pub fn d1(&self) -> Field {
        self.diff(Axis::X1, 1)
    }

    pub fn d2(&self) -> Field {
        self.diff(Axis::X2, 1)
    }

    pub fn d11(&self) -> Field {
        self.diff(Axis::X1, 2)
    }

    pub fn d22(&self) -> Field {
        self.diff(Axis::X2, 2)
    }

    pub fn d12(&self) -> Field {
        self.d2().d1()
    }

    /// Five-point Laplacian with the same boundary stencils as `d11`/`d22`.
    pub fn laplacian(&self) -> Field {
        self.d11().add(&self.d22())
    }

    pub fn add(&self, other: &Field) -> Field {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Field {
        Field {
            chart: self.chart,
            comps: self.comps,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    fn zip(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        assert_eq!(self.data.len(), other.data.len(), "field shapes differ");
        Field {
            chart: self.chart,
            comps: self.comps,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    /// Euclidean norm of the node vector.
    #[inline]
    pub fn node_norm(&self, i1: usize, i2: usize) -> f64 {
        self.at(i1, i2).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Interior norms over the margin-trimmed index box.
    pub fn interior_norms(&self, margin: usize) -> Norms {
        let r1 = self.chart.interior(Axis::X1, margin);
        let r2 = self.chart.interior(Axis::X2, margin);
        let rows: Vec<(f64, f64, f64)> = par::map_collect(r1.len(), |k| {
            let i1 = r1.start + k;
            let mut l1 = 0.0;
            let mut l2 = 0.0;
            let mut linf: f64 = 0.0;
            for i2 in r2.clone() {
                let v = self.node_norm(i1, i2);
                let w = self.chart.node_weight(i1, i2);
                l1 += v * w;
                l2 += v * v * w;
                linf = linf.max(v);
            }
            (l1, l2, linf)
        });
        let mut n = Norms::default();
        for (l1, l2, linf) in rows {
            n.l1 += l1;
            n.l2 += l2;
            n.linf = n.linf.max(linf);
        }
        n.l2 = n.l2.sqrt();
        n
    }

    /// Quadrature integral of the first component over the whole chart.
    pub fn integral(&self) -> f64 {
        let c = self.chart;
        par::sum(c.n1, |i1| {
            (0..c.n2).map(|i2| self.value(i1, i2) * c.node_weight(i1, i2)).sum()
        })
    }

    /// Quadrature-weighted mean of the first component.
    pub fn mean(&self) -> f64 {
        let c = self.chart;
        let area = par::sum(c.n1, |i1| (0..c.n2).map(|i2| c.node_weight(i1, i2)).sum());
        self.integral() / area
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Interior L1, L2 and L-infinity norms of a field (node norms are Euclidean over components).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn chart(n: usize, periodic1: bool) -> GridChart {
        let x1 = if periodic1 { (0.0, 2.0 * PI) } else { (0.0, 1.0) };
        GridChart::new(x1, (0.0, 1.0), n, n, periodic1, false).unwrap()
    }

    #[test]
    fn rejects_degenerate_charts() {
        assert!(GridChart::new((0.0, 0.0), (0.0, 1.0), 16, 16, false, false).is_err());
        assert!(GridChart::new((0.0, 1.0), (0.0, 1.0), 4, 16, false, false).is_err());
    }

    #[test]
    fn linear_map_has_exact_first_derivative() {
        let c = chart(16, false);
        let phi = Field::from_fn(c, 3, |i1, i2, out| {
            out[0] = c.x1(i1);
            out[1] = c.x2(i2);
            out[2] = 0.0;
        });
        let d1 = phi.d1();
        for v in d1.data.chunks(3) {
            assert!((v[0] - 1.0).abs() < 1e-12 && v[1].abs() < 1e-12 && v[2] == 0.0);
        }
    }

    #[test]
    fn constant_field_has_zero_derivatives() {
        let c = chart(12, true);
        let f = Field::from_fn(c, 2, |_, _, out| out.copy_from_slice(&[3.5, -1.0]));
        for d in [f.d1(), f.d2(), f.d11(), f.d22(), f.d12()] {
            assert!(d.max_abs() < 1e-9);
        }
    }

    #[test]
    fn boundary_stencils_are_exact_on_quadratics() {
        let c = chart(10, false);
        let f = Field::from_fn(c, 1, |i1, i2, out| {
            let (x, y) = (c.x1(i1), c.x2(i2));
            out[0] = x * x + 3.0 * x * y - y * y;
        });
        let (d1, d22, d12) = (f.d1(), f.d22(), f.d12());
        for i1 in 0..10 {
            for i2 in 0..10 {
                let (x, y) = (c.x1(i1), c.x2(i2));
                assert!((d1.value(i1, i2) - (2.0 * x + 3.0 * y)).abs() < 1e-10);
                assert!((d22.value(i1, i2) + 2.0).abs() < 1e-8);
                assert!((d12.value(i1, i2) - 3.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn periodic_second_derivative_converges_at_second_order() {
        // d11 of (cos x1, sin x1, x2) is -(cos x1, sin x1, 0); compare against the analytic value.
        let err = |n: usize| {
            let c = chart(n, true);
            let phi = Field::from_fn(c, 3, |i1, i2, o| {
                let x = c.x1(i1);
                o.copy_from_slice(&[x.cos(), x.sin(), c.x2(i2)]);
            });
            let d = phi.d11();
            let mut e: f64 = 0.0;
            for i1 in 0..n {
                let x = c.x1(i1);
                let v = d.at(i1, 3);
                e = e
                    .max((v[0] + x.cos()).abs())
                    .max((v[1] + x.sin()).abs())
                    .max(v[2].abs());
            }
            e
        };
        let (e1, e2) = (err(32), err(64));
        let order = (e1 / e2).log2();
        assert!(order > 1.95 && order < 2.05, "order {order}");
    }

    #[test]
    fn trapezoid_weights_integrate_linear_exactly() {
        let c = chart(9, false);
        let f = Field::from_fn(c, 1, |i1, i2, o| o[0] = 1.0 + c.x1(i1) + 2.0 * c.x2(i2));
        assert!((f.integral() - 2.5).abs() < 1e-12);
    }
}
