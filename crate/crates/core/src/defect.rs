//! Box-averaged measures of immersion sequences, defect estimates, atom detection and the
//! additive product-structure test.

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::geometry::{Immersion, SurfaceGeometry};
use crate::grid::{Axis, Field, GridChart};
use crate::zoo::PlanarCurve;

/// Relative mismatch of box ranges tolerated when comparing measures of different family
/// members: charts of a family may differ by a small reparametrization.
pub const RANGE_TOLERANCE: f64 = 5e-2;

/// Smallest box count per axis accepted by the product-structure test.
pub const MIN_PRODUCT_BOXES: usize = 8;

/// Masses of a `b1 x b2` box partition of a rectangle, indexed `i * b2 + j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureGrid {
    pub x1_range: (f64, f64),
    pub x2_range: (f64, f64),
    pub b1: usize,
    pub b2: usize,
    pub mass: Vec<f64>,
}

impl MeasureGrid {
    pub fn zeros(x1_range: (f64, f64), x2_range: (f64, f64), b1: usize, b2: usize) -> Result<Self> {
        if b1 == 0 || b2 == 0 {
            return Err(Error::InvalidParameter("box counts must be positive".into()));
        }
        if !(x1_range.1 > x1_range.0 && x2_range.1 > x2_range.0) {
            return Err(Error::InvalidParameter("box ranges must be nonempty".into()));
        }
        Ok(Self {
            x1_range,
            x2_range,
            b1,
            b2,
            mass: vec![0.0; b1 * b2],
        })
    }

    /// Box integrals of a scalar density with the chart's quadrature: each node's cell is split
    /// between the boxes it overlaps, so the box masses add up to the global quadrature.
    pub fn from_density(density: &Field, b1: usize, b2: usize) -> Result<Self> {
        if density.comps != 1 {
            return Err(Error::InvalidParameter(format!(
                "density with {} components",
                density.comps
            )));
        }
        let c = density.chart;
        let (r1, r2) = (axis_range(&c, Axis::X1), axis_range(&c, Axis::X2));
        let mut out = Self::zeros(r1, r2, b1, b2)?;
        let s1 = axis_shares(&c, Axis::X1, b1);
        let s2 = axis_shares(&c, Axis::X2, b2);
        for i1 in 0..c.n1 {
            for i2 in 0..c.n2 {
                let v = density.value(i1, i2);
                for &(p, w1) in &s1[i1] {
                    for &(q, w2) in &s2[i2] {
                        out.mass[p * b2 + q] += v * w1 * w2;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.b2 + j]
    }

    pub fn width1(&self) -> f64 {
        (self.x1_range.1 - self.x1_range.0) / self.b1 as f64
    }

    pub fn width2(&self) -> f64 {
        (self.x2_range.1 - self.x2_range.0) / self.b2 as f64
    }

    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x1_range.0 + (i as f64 + 0.5) * self.width1(),
            self.x2_range.0 + (j as f64 + 0.5) * self.width2(),
        )
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn total_variation(&self) -> f64 {
        self.mass.iter().map(|m| m.abs()).sum()
    }

    pub fn nearest_center(&self, p: (f64, f64)) -> (f64, f64) {
        let idx = |x: f64, r: (f64, f64), w: f64, b: usize| (((x - r.0) / w).floor().max(0.0) as usize).min(b - 1);
        self.center(
            idx(p.0, self.x1_range, self.width1(), self.b1),
            idx(p.1, self.x2_range, self.width2(), self.b2),
        )
    }

    /// Mass per unit box area.
    pub fn density(&self) -> Vec<f64> {
        let a = self.width1() * self.width2();
        self.mass.iter().map(|m| m / a).collect()
    }

    /// Same box counts and ranges equal within [`RANGE_TOLERANCE`].
    pub fn check_compatible(&self, other: &MeasureGrid) -> Result<()> {
        let close = |a: (f64, f64), b: (f64, f64)| {
            let span = (a.1 - a.0).abs().max(b.1 - b.0);
            (a.0 - b.0).abs() <= RANGE_TOLERANCE * span && (a.1 - b.1).abs() <= RANGE_TOLERANCE * span
        };
        if self.b1 != other.b1 || self.b2 != other.b2 {
            return Err(Error::ChartMismatch(format!(
                "box counts {}x{} vs {}x{}",
                self.b1, self.b2, other.b1, other.b2
            )));
        }
        if !close(self.x1_range, other.x1_range) || !close(self.x2_range, other.x2_range) {
            return Err(Error::ChartMismatch(format!(
                "box ranges {:?} x {:?} vs {:?} x {:?}",
                self.x1_range, self.x2_range, other.x1_range, other.x2_range
            )));
        }
        Ok(())
    }

    /// `self + s * other` on the boxes of `self`.
    pub fn add_scaled(&self, other: &MeasureGrid, s: f64) -> Result<MeasureGrid> {
        self.check_compatible(other)?;
        Ok(MeasureGrid {
            mass: self.mass.iter().zip(&other.mass).map(|(a, b)| a + s * b).collect(),
            ..self.clone()
        })
    }

    fn with_mass(&self, mass: Vec<f64>) -> MeasureGrid {
        MeasureGrid { mass, ..self.clone() }
    }
}

fn axis_range(c: &GridChart, axis: Axis) -> (f64, f64) {
    let (r, n, periodic) = match axis {
        Axis::X1 => (c.x1_range, c.n1, c.periodic1),
        Axis::X2 => (c.x2_range, c.n2, c.periodic2),
    };
    if periodic {
        (r.0, r.0 + n as f64 * c.h(axis))
    } else {
        r
    }
}

/// For every node along an axis, the boxes its quadrature cell overlaps and the overlap
/// lengths. Periodic cells wrap around; non-periodic end cells are half cells.
fn axis_shares(c: &GridChart, axis: Axis, boxes: usize) -> Vec<Vec<(usize, f64)>> {
    let (a, b) = axis_range(c, axis);
    let (n, periodic) = match axis {
        Axis::X1 => (c.n1, c.periodic1),
        Axis::X2 => (c.n2, c.periodic2),
    };
    let h = c.h(axis);
    let span = b - a;
    let w = span / boxes as f64;
    let split = |lo: f64, hi: f64, out: &mut Vec<(usize, f64)>| {
        let first = (((lo - a) / w).floor().max(0.0) as usize).min(boxes - 1);
        let last = (((hi - a) / w).ceil() as usize).clamp(first + 1, boxes);
        for k in first..last {
            let len = hi.min(a + (k + 1) as f64 * w) - lo.max(a + k as f64 * w);
            if len > 0.0 {
                out.push((k, len));
            }
        }
    };
    (0..n)
        .map(|i| {
            let x = a + i as f64 * h;
            let (lo, hi) = (x - 0.5 * h, x + 0.5 * h);
            let mut out = Vec::with_capacity(2);
            if periodic {
                if lo < a {
                    split(lo + span, b, &mut out);
                    split(a, hi, &mut out);
                } else if hi > b {
                    split(lo, b, &mut out);
                    split(a, hi - span, &mut out);
                } else {
                    split(lo, hi, &mut out);
                }
            } else {
                split(lo.max(a), hi.min(b), &mut out);
            }
            out
        })
        .collect()
}

/// Box integrals of `|grad n|^2`, the Dirichlet density of the Gauss map in a conformal chart.
pub fn energy_measure(im: &Immersion, b1: usize, b2: usize, tol: &Tolerances) -> Result<MeasureGrid> {
    let g = SurfaceGeometry::new(im, tol)?;
    let n = &g.frame.n;
    let (n1, n2) = (n.d1(), n.d2());
    let density = Field::from_fn(g.chart(), 1, |i1, i2, out| {
        let s = |f: &Field| f.at(i1, i2).iter().map(|v| v * v).sum::<f64>();
        out[0] = s(&n1) + s(&n2);
    });
    MeasureGrid::from_density(&density, b1, b2)
}

/// Binned `int |gamma''|^2 ds` over arclength bins of a unit-speed curve. The result has a
/// single box along the second axis, spanning `[0, 1]`.
pub fn curve_energy_measure(curve: &PlanarCurve, bins: usize, tol: &Tolerances) -> Result<MeasureGrid> {
    let dev = curve.speed_deviation();
    if !(dev <= tol.curve_speed) {
        return Err(Error::InvalidCurve(format!(
            "speed deviates from 1 by {dev:.3e} > {:.1e}",
            tol.curve_speed
        )));
    }
    let mut out = MeasureGrid::zeros((0.0, curve.length), (0.0, 1.0), bins, 1)?;
    let ds = curve.ds();
    let w = out.width1();
    for (i, e) in curve.acceleration_energy_per_interval().into_iter().enumerate() {
        // The energy of a knot interval is split by overlap; intervals are far shorter than bins.
        let (lo, hi) = (i as f64 * ds, (i + 1) as f64 * ds);
        let first = ((lo / w).floor() as usize).min(bins - 1);
        let last = ((hi / w).ceil() as usize).clamp(first + 1, bins);
        for k in first..last {
            let len = hi.min((k + 1) as f64 * w) - lo.max(k as f64 * w);
            if len > 0.0 {
                out.mass[k] += e * len / ds;
            }
        }
    }
    Ok(out)
}

/// A point mass detected by [`atomic_detect`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: (f64, f64),
    pub weight: f64,
    /// Masses within radii `8b, 4b, 2b` of the location for the last family member, with `b`
    /// the larger box width.
    pub masses: [f64; 3],
}

/// Additive fit `D_ij ~ u_i w2 + v_j w1` of a box measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductFit {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Frobenius norm of `D - fit`; unchanged by adding an exact product measure to `D`.
    pub residual: f64,
    /// `residual / ||D||_F`, or 0 for a zero measure.
    pub relative: f64,
    /// Largest spread of `D_ij` along `i` for fixed `j`, over `max |D_ij|`.
    pub x1_variation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub defect: MeasureGrid,
    /// `|last - second to last|` per box.
    pub error_bar: MeasureGrid,
    /// Successive differences of the family decrease.
    pub monotone: bool,
    pub atoms: Vec<Atom>,
    pub unresolved: Vec<Atom>,
    pub product: Option<ProductFit>,
}

/// Defect of a family against its limit: the average of the last two members minus the limit,
/// with the difference of the last two as error bar.
pub fn defect_estimate(family: &[MeasureGrid], limit: &MeasureGrid) -> Result<DefectReport> {
    if family.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "defect estimate needs at least 3 family members, got {}",
            family.len()
        )));
    }
    for m in family {
        limit.check_compatible(m)?;
    }
    let n = family.len();
    let (a, b) = (&family[n - 2], &family[n - 1]);
    let defect = limit.with_mass(
        (0..limit.mass.len())
            .map(|i| 0.5 * (a.mass[i] + b.mass[i]) - limit.mass[i])
            .collect(),
    );
    let error_bar = limit.with_mass(a.mass.iter().zip(&b.mass).map(|(x, y)| (y - x).abs()).collect());
    let steps: Vec<f64> = family
        .windows(2)
        .map(|w| w[0].mass.iter().zip(&w[1].mass).map(|(x, y)| (y - x).abs()).sum())
        .collect();
    let monotone = steps.windows(2).all(|s| s[1] <= s[0]);
    if !monotone {
        log::warn!("defect_estimate: family differences do not decrease: {steps:?}");
    }
    Ok(DefectReport {
        defect,
        error_bar,
        monotone,
        atoms: Vec::new(),
        unresolved: Vec::new(),
        product: None,
    })
}

/// Least-squares additive decomposition of a box measure.
pub fn product_structure_test(d: &MeasureGrid) -> Result<ProductFit> {
    if d.b1 < MIN_PRODUCT_BOXES || d.b2 < MIN_PRODUCT_BOXES {
        return Err(Error::InvalidParameter(format!(
            "product test needs at least {MIN_PRODUCT_BOXES}x{MIN_PRODUCT_BOXES} boxes, got {}x{}",
            d.b1, d.b2
        )));
    }
    let (b1, b2) = (d.b1, d.b2);
    let row: Vec<f64> = (0..b1)
        .map(|i| (0..b2).map(|j| d.at(i, j)).sum::<f64>() / b2 as f64)
        .collect();
    let col: Vec<f64> = (0..b2)
        .map(|j| (0..b1).map(|i| d.at(i, j)).sum::<f64>() / b1 as f64)
        .collect();
    let grand = row.iter().sum::<f64>() / b1 as f64;
    // The additive model is fixed up to a constant; the grand mean is carried by v.
    let u: Vec<f64> = row.iter().map(|r| (r - grand) / d.width2()).collect();
    let v: Vec<f64> = col.iter().map(|c| c / d.width1()).collect();
    let mut res = 0.0;
    let mut size = 0.0;
    let mut top: f64 = 0.0;
    for i in 0..b1 {
        for j in 0..b2 {
            let x = d.at(i, j);
            let e = x - (row[i] - grand) - col[j];
            res += e * e;
            size += x * x;
            top = top.max(x.abs());
        }
    }
    let residual = res.sqrt();
    let spread = (0..b2)
        .map(|j| {
            let it = (0..b1).map(|i| d.at(i, j));
            it.clone().fold(f64::NEG_INFINITY, f64::max) - it.fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    Ok(ProductFit {
        u,
        v,
        residual,
        relative: if size > 0.0 { residual / size.sqrt() } else { 0.0 },
        x1_variation: if top > 0.0 { spread / top } else { 0.0 },
    })
}

/// Settings of the two-scale atom test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomSettings {
    /// Relative mass change between successive radii accepted as stabilized.
    pub stabilization: f64,
    /// Candidates need `|mass(2b)|` at least this fraction of the total variation.
    pub min_fraction: f64,
}

impl Default for AtomSettings {
    fn default() -> Self {
        Self {
            stabilization: 0.1,
            min_fraction: 0.05,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AtomReport {
    pub atoms: Vec<Atom>,
    /// Candidates whose mass concentrates along the family but has not stabilized at `2b`.
    pub unresolved: Vec<Atom>,
}

/// Two-scale atom test on a family of (signed) measures ordered by increasing concentration.
///
/// Around each box centre `p` the masses `M_r(p)` of the boxes with centres within `r` are taken
/// for `r = 8b, 4b, 2b`. A candidate is an atom when, on the last member, successive masses agree
/// within the stabilization tolerance; it is unresolved when the relative gap
/// `|M_4b - M_2b| / |M_4b|` shrinks along the family without stabilizing; otherwise the mass
/// is diffuse.
pub fn atomic_detect(family: &[MeasureGrid], settings: &AtomSettings) -> Result<AtomReport> {
    if family.len() < 2 {
        return Err(Error::InvalidParameter(
            "atom detection needs at least 2 family members".into(),
        ));
    }
    for m in &family[1..] {
        family[0].check_compatible(m)?;
    }
    let last = family.last().expect("nonempty family");
    let b = last.width1().max(last.width2());
    let radii = [8.0 * b, 4.0 * b, 2.0 * b];
    let masses = |m: &MeasureGrid, p: (f64, f64)| radii.map(|r| disc_mass(m, p, r));
    let floor = settings.min_fraction * last.total_variation();
    let mut candidates: Vec<((f64, f64), [f64; 3])> = (0..last.b1)
        .flat_map(|i| (0..last.b2).map(move |j| (i, j)))
        .map(|(i, j)| {
            let p = last.center(i, j);
            (p, masses(last, p))
        })
        .filter(|(_, m)| m[2].abs() > floor && m[2].abs() > 0.0)
        .collect();
    candidates.sort_by(|a, b| b.1[2].abs().total_cmp(&a.1[2].abs()));
    let gap = |m: &[f64; 3]| (m[1] - m[2]).abs() / m[1].abs().max(f64::MIN_POSITIVE);
    let mut report = AtomReport::default();
    let mut taken: Vec<(f64, f64)> = Vec::new();
    for (p, _) in candidates {
        // Neighbouring centres hold nearly the same mass; the |mass| centroid settles the tie.
        let p = last.nearest_center(abs_centroid(last, p, radii[2]));
        let m = masses(last, p);
        if taken.iter().any(|q| (p.0 - q.0).hypot(p.1 - q.1) < radii[0]) {
            continue;
        }
        let tol = settings.stabilization;
        let stable = (m[0] - m[1]).abs() <= tol * m[0].abs() && gap(&m) <= tol;
        let first = gap(&masses(&family[0], p));
        let concentrating = gap(&m) < 0.5 * first;
        let atom = Atom {
            location: p,
            weight: m[2],
            masses: m,
        };
        if stable && concentrating {
            report.atoms.push(atom);
        } else if concentrating {
            report.unresolved.push(atom);
        } else {
            continue;
        }
        taken.push(p);
    }
    Ok(report)
}

/// Centroid of `|mass|` over the boxes whose centres lie within `r` of `p`.
fn abs_centroid(m: &MeasureGrid, p: (f64, f64), r: f64) -> (f64, f64) {
    let (mut w, mut x, mut y) = (0.0, 0.0, 0.0);
    for i in 0..m.b1 {
        for j in 0..m.b2 {
            let c = m.center(i, j);
            if (c.0 - p.0).hypot(c.1 - p.1) <= r {
                let a = m.at(i, j).abs();
                w += a;
                x += a * c.0;
                y += a * c.1;
            }
        }
    }
    if w > 0.0 {
        (x / w, y / w)
    } else {
        p
    }
}

/// Mass of the boxes whose centres lie within `r` of `p`.
fn disc_mass(m: &MeasureGrid, p: (f64, f64), r: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..m.b1 {
        for j in 0..m.b2 {
            let c = m.center(i, j);
            if (c.0 - p.0).hypot(c.1 - p.1) <= r {
                s += m.at(i, j);
            }
        }
    }
    s
}
