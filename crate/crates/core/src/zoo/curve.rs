//! Planar profile curves (r, z), cubic-spline interpolated and sampled uniformly in arclength.

use std::f64::consts::PI;

use crate::config::Tolerances;
use crate::error::{Error, Result};

/// Five-point Gauss-Legendre rule on [-1, 1].
const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Integral of `f` over `[a, b]` by five-point Gauss-Legendre.
pub fn gauss_legendre(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Cubic spline through samples at uniform spacing `h`, starting at parameter 0. Periodic
/// splines wrap sample `n` to sample `0`; open splines extrapolate the second derivative linearly to the ends.
#[derive(Clone, Debug)]
pub struct CubicSpline {
    y: Vec<f64>,
    m: Vec<f64>,
    h: f64,
    periodic: bool,
}

impl CubicSpline {
    pub fn new(y: Vec<f64>, h: f64, periodic: bool) -> Self {
        let n = y.len();
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                let (p, q) = if periodic {
                    (y[(i + n - 1) % n], y[(i + 1) % n])
                } else if i == 0 || i + 1 == n {
                    return 0.0;
                } else {
                    (y[i - 1], y[i + 1])
                };
                6.0 * (p - 2.0 * y[i] + q) / (h * h)
            })
            .collect();
        let m = if periodic {
            solve_cyclic_141(&rhs)
        } else {
            // Second derivative extrapolated linearly to the ends: M0 = 2 M1 - M2.
            let mut m = vec![0.0; n];
            let k = n - 2;
            let mut diag = vec![4.0; k];
            let mut lower = vec![1.0; k];
            let mut upper = vec![1.0; k];
            diag[0] = 6.0;
            upper[0] = 0.0;
            diag[k - 1] = 6.0;
            lower[k - 1] = 0.0;
            let inner = solve_tridiagonal(&lower, &diag, &upper, &rhs[1..n - 1]);
            m[1..n - 1].copy_from_slice(&inner);
            m[0] = 2.0 * m[1] - m[2];
            m[n - 1] = 2.0 * m[n - 2] - m[n - 3];
            m
        };
        Self { y, m, h, periodic }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Parameter span covered by the spline.
    pub fn span(&self) -> f64 {
        let n = self.y.len();
        if self.periodic {
            n as f64 * self.h
        } else {
            (n - 1) as f64 * self.h
        }
    }

    /// Interval index and the local coordinates A, B of parameter `s`.
    fn locate(&self, s: f64) -> (usize, usize, f64, f64) {
        let n = self.y.len();
        let (i, t) = if self.periodic {
            let s = s.rem_euclid(self.span());
            let i = ((s / self.h).floor() as usize).min(n - 1);
            (i, s - i as f64 * self.h)
        } else {
            let i = ((s / self.h).floor().max(0.0) as usize).min(n - 2);
            (i, s - i as f64 * self.h)
        };
        let j = if self.periodic { (i + 1) % n } else { i + 1 };
        let b = t / self.h;
        (i, j, 1.0 - b, b)
    }

    pub fn value(&self, s: f64) -> f64 {
        let (i, j, a, b) = self.locate(s);
        let h2 = self.h * self.h / 6.0;
        a * self.y[i] + b * self.y[j] + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[j]) * h2
    }

    pub fn derivative(&self, s: f64) -> f64 {
        let (i, j, a, b) = self.locate(s);
        (self.y[j] - self.y[i]) / self.h - (3.0 * a * a - 1.0) / 6.0 * self.h * self.m[i]
            + (3.0 * b * b - 1.0) / 6.0 * self.h * self.m[j]
    }

    pub fn second_derivative(&self, s: f64) -> f64 {
        let (i, j, a, b) = self.locate(s);
        a * self.m[i] + b * self.m[j]
    }

    /// Second derivative at the knots (piecewise linear in between).
    pub fn knot_second_derivatives(&self) -> &[f64] {
        &self.m
    }
}

/// Thomas algorithm; `lower[i]` multiplies `x[i-1]` and `upper[i]` multiplies `x[i+1]`.
fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for i in 0..n {
        let (cp, dp) = if i > 0 { (c[i - 1], d[i - 1]) } else { (0.0, 0.0) };
        let denom = diag[i] - lower[i] * cp;
        c[i] = upper[i] / denom;
        d[i] = (rhs[i] - lower[i] * dp) / denom;
    }
    for i in (0..n.saturating_sub(1)).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    d
}

/// Solves the cyclic (1, 4, 1) system by Sherman-Morrison on the Thomas solver.
fn solve_cyclic_141(rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    // A = T + u v^T with u = (g, 0, .., 0, 1), v = (1, 0, .., 0, 1/g), g = -4.
    let g = -4.0;
    let mut diag = vec![4.0; n];
    diag[0] -= g;
    diag[n - 1] -= 1.0 / g;
    let ones = vec![1.0; n];
    let solve = |r: &[f64]| solve_tridiagonal(&ones, &diag, &ones, r);
    let x = solve(rhs);
    let mut u = vec![0.0; n];
    u[0] = g;
    u[n - 1] = 1.0;
    let z = solve(&u);
    let vx = x[0] + x[n - 1] / g;
    let vz = z[0] + z[n - 1] / g;
    let f = vx / (1.0 + vz);
    x.iter().zip(&z).map(|(a, b)| a - f * b).collect()
}

/// A profile curve in the (r, z) half-plane sampled uniformly in arclength.
#[derive(Clone, Debug)]
pub struct PlanarCurve {
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    pub closed: bool,
    pub length: f64,
    sr: CubicSpline,
    sz: CubicSpline,
}

impl PlanarCurve {
    /// Accepts samples that are already uniform in arclength. The length is measured from the
    /// spline through the samples; the speed at every knot must be 1 within `curve_speed`.
    pub fn from_samples(mut r: Vec<f64>, mut z: Vec<f64>, closed: bool, tol: &Tolerances) -> Result<Self> {
        if r.len() != z.len() {
            return Err(Error::InvalidCurve(format!(
                "{} r values but {} z values",
                r.len(),
                z.len()
            )));
        }
        if closed && r.len() > 1 && r[0] == r[r.len() - 1] && z[0] == z[z.len() - 1] {
            r.pop();
            z.pop();
        }
        if r.len() < 8 {
            return Err(Error::InvalidCurve(format!("{} samples, need at least 8", r.len())));
        }
        if let Some((i, v)) = r.iter().enumerate().find(|(_, v)| !(**v >= tol.r_min)) {
            return Err(Error::InvalidCurve(format!("r[{i}] = {v} below r_min = {}", tol.r_min)));
        }
        let by_index = (
            CubicSpline::new(r.clone(), 1.0, closed),
            CubicSpline::new(z.clone(), 1.0, closed),
        );
        let intervals = if closed { r.len() } else { r.len() - 1 };
        let length: f64 = (0..intervals)
            .map(|i| {
                gauss_legendre(i as f64, i as f64 + 1.0, |u| {
                    by_index.0.derivative(u).hypot(by_index.1.derivative(u))
                })
            })
            .sum();
        let ds = length / intervals as f64;
        let sr = CubicSpline::new(r.clone(), ds, closed);
        let sz = CubicSpline::new(z.clone(), ds, closed);
        let curve = Self {
            r,
            z,
            closed,
            length,
            sr,
            sz,
        };
        let dev = curve.speed_deviation();
        if dev > tol.curve_speed {
            return Err(Error::InvalidCurve(format!(
                "not unit speed: max |speed - 1| = {dev:.3e} exceeds {:.1e}",
                tol.curve_speed
            )));
        }
        Ok(curve)
    }

    /// Samples an exactly unit-speed parametrization `s -> (r, z)` on `[0, length]`.
    pub fn from_unit_speed<F>(f: F, length: f64, n: usize, closed: bool, tol: &Tolerances) -> Result<Self>
    where
        F: Fn(f64) -> (f64, f64),
    {
        let ds = if closed {
            length / n as f64
        } else {
            length / (n - 1) as f64
        };
        let (r, z) = (0..n).map(|i| f(i as f64 * ds)).unzip();
        Self::from_samples(r, z, closed, tol)
    }

    /// Counter-clockwise circle in the (r, z) plane.
    pub fn circle(center_r: f64, center_z: f64, radius: f64, n: usize, tol: &Tolerances) -> Result<Self> {
        Self::from_unit_speed(
            |s| {
                let a = s / radius;
                (center_r + radius * a.cos(), center_z + radius * a.sin())
            },
            2.0 * PI * radius,
            n,
            true,
            tol,
        )
    }

    /// Vertical segment at constant radius; its revolution is a cylinder.
    pub fn vertical_line(radius: f64, height: f64, n: usize, tol: &Tolerances) -> Result<Self> {
        Self::from_unit_speed(|s| (radius, s), height, n, false, tol)
    }

    /// Arc of the unit circle centred on the axis from polar angle `margin` to `pi - margin`;
    /// its revolution is the round sphere without polar caps.
    pub fn meridian(margin: f64, n: usize, tol: &Tolerances) -> Result<Self> {
        if !(margin > 0.0 && margin < PI / 2.0) {
            return Err(Error::InvalidParameter(format!(
                "meridian margin {margin} outside (0, pi/2)"
            )));
        }
        Self::from_unit_speed(
            |s| {
                let a = margin + s;
                (a.sin(), -a.cos())
            },
            PI - 2.0 * margin,
            n,
            false,
            tol,
        )
    }

    /// Re-samples an arbitrary regular curve through the given points uniformly in arclength.
    pub fn reparametrize(r: &[f64], z: &[f64], closed: bool, n_out: usize, tol: &Tolerances) -> Result<Self> {
        let sr = CubicSpline::new(r.to_vec(), 1.0, closed);
        let sz = CubicSpline::new(z.to_vec(), 1.0, closed);
        let speed = |u: f64| sr.derivative(u).hypot(sz.derivative(u));
        let intervals = if closed { r.len() } else { r.len() - 1 };
        let mut cum = vec![0.0; intervals + 1];
        for i in 0..intervals {
            cum[i + 1] = cum[i] + gauss_legendre(i as f64, i as f64 + 1.0, speed);
        }
        let total = cum[intervals];
        let steps = if closed { n_out } else { n_out - 1 };
        let mut rr = Vec::with_capacity(n_out);
        let mut zz = Vec::with_capacity(n_out);
        for j in 0..n_out {
            let target = j as f64 * total / steps as f64;
            let u = invert_monotone(&cum, target, |i, u| {
                (cum[i] + gauss_legendre(i as f64, u, speed), speed(u))
            })
            .ok_or_else(|| Error::Reparametrization(format!("arclength inversion failed at sample {j}")))?;
            rr.push(sr.value(u));
            zz.push(sz.value(u));
        }
        Self::from_samples(rr, zz, closed, tol).map_err(|e| Error::Reparametrization(e.to_string()))
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Arclength spacing of the samples.
    pub fn ds(&self) -> f64 {
        if self.closed {
            self.length / self.r.len() as f64
        } else {
            self.length / (self.r.len() - 1) as f64
        }
    }

    pub fn point(&self, s: f64) -> (f64, f64) {
        (self.sr.value(s), self.sz.value(s))
    }

    pub fn tangent(&self, s: f64) -> (f64, f64) {
        (self.sr.derivative(s), self.sz.derivative(s))
    }

    pub fn acceleration(&self, s: f64) -> (f64, f64) {
        (self.sr.second_derivative(s), self.sz.second_derivative(s))
    }

    /// Left unit normal `(-z', r')`; inward for counter-clockwise closed curves.
    pub fn normal(&self, s: f64) -> (f64, f64) {
        let (a, b) = self.tangent(s);
        let l = a.hypot(b);
        (-b / l, a / l)
    }

    /// Largest `| |gamma'| - 1 |` over the knots.
    pub fn speed_deviation(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                let (a, b) = self.tangent(i as f64 * self.ds());
                (a.hypot(b) - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Exact integral of `|gamma''|^2` over each knot interval (the spline's second derivative
    /// is piecewise linear).
    pub fn acceleration_energy_per_interval(&self) -> Vec<f64> {
        let (mr, mz) = (self.sr.knot_second_derivatives(), self.sz.knot_second_derivatives());
        let n = self.len();
        let intervals = if self.closed { n } else { n - 1 };
        let ds = self.ds();
        (0..intervals)
            .map(|i| {
                let j = (i + 1) % n;
                let sq = |a: f64, b: f64| (a * a + a * b + b * b) / 3.0;
                ds * (sq(mr[i], mr[j]) + sq(mz[i], mz[j]))
            })
            .collect()
    }

    /// Conformal coordinate `t(s) = int_0^s 1/r` at every knot, and its total over the curve.
    pub fn conformal_coordinate(&self) -> (Vec<f64>, f64) {
        let n = self.len();
        let intervals = if self.closed { n } else { n - 1 };
        let ds = self.ds();
        let mut cum = vec![0.0; intervals + 1];
        for i in 0..intervals {
            cum[i + 1] = cum[i] + gauss_legendre(i as f64 * ds, (i + 1) as f64 * ds, |s| 1.0 / self.sr.value(s));
        }
        let total = cum[intervals];
        (cum, total)
    }

    /// Arclength at which the conformal coordinate reaches `t`.
    pub fn arclength_at(&self, cum: &[f64], t: f64) -> Option<f64> {
        let ds = self.ds();
        invert_monotone(cum, t, |i, u| {
            let s = u * ds;
            let v = cum[i] + gauss_legendre(i as f64 * ds, s, |x| 1.0 / self.sr.value(x));
            (v, ds / self.sr.value(s))
        })
        .map(|u| u * ds)
    }
}

/// Finds `u` with `F(u) = target` for an increasing `F` tabulated at integer knots in `cum`.
/// `eval(i, u)` returns `(F(u), F'(u))` for `u` in interval `i`. Newton inside the bracketing
/// interval, falling back to bisection.
fn invert_monotone(cum: &[f64], target: f64, eval: impl Fn(usize, f64) -> (f64, f64)) -> Option<f64> {
    let last = cum.len() - 1;
    if target <= cum[0] {
        return Some(0.0);
    }
    if target >= cum[last] {
        return Some(last as f64);
    }
    let i = cum.partition_point(|c| *c <= target) - 1;
    let (mut lo, mut hi) = (i as f64, i as f64 + 1.0);
    let mut u = lo + (target - cum[i]) / (cum[i + 1] - cum[i]);
    for _ in 0..60 {
        let (f, df) = eval(i, u);
        let g = f - target;
        if g.abs() <= 1e-15 * (1.0 + target.abs()) {
            return Some(u);
        }
        if g > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let step = u - g / df;
        u = if df > 0.0 && step > lo && step < hi {
            step
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-15 {
            return Some(u);
        }
    }
    Some(u)
}

/// Oscillation applied along the normal of a closed base curve.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FamilySpec {
    pub amplitude: f64,
    pub k: u32,
}

/// `gamma_k = gamma + (a / k^2) sin(2 pi k s / L) nu`, re-sampled to unit speed with the
/// same sample count. The curvature becomes `kappa - a (2 pi / L)^2 sin(2 pi k s / L) + O(1/k)`.
pub fn oscillating_curve(base: &PlanarCurve, spec: FamilySpec, tol: &Tolerances) -> Result<PlanarCurve> {
    if !base.closed {
        return Err(Error::InvalidCurve(
            "oscillating family needs a closed base curve".into(),
        ));
    }
    if spec.k == 0 || !(spec.amplitude >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need k >= 1 and a >= 0, got k = {}, a = {}",
            spec.k, spec.amplitude
        )));
    }
    if spec.amplitude == 0.0 {
        return Ok(base.clone());
    }
    let k = spec.k as f64;
    let omega = 2.0 * PI * k / base.length;
    let eps = spec.amplitude / (k * k);
    let kappa_max = (0..base.len())
        .map(|i| {
            let (a, b) = base.acceleration(i as f64 * base.ds());
            a.hypot(b)
        })
        .fold(0.0, f64::max);
    // The perturbed tangent is (1 - eps kappa) T + eps omega cos(.) nu; keep it away from 0.
    if eps * omega + eps * kappa_max >= 0.5 {
        return Err(Error::Reparametrization(format!(
            "perturbation too large for a regular curve: (a/k^2)(omega + kappa_max) = {:.3}",
            eps * (omega + kappa_max)
        )));
    }
    let (mut r, mut z) = (Vec::with_capacity(base.len()), Vec::with_capacity(base.len()));
    for i in 0..base.len() {
        let s = i as f64 * base.ds();
        let (pr, pz) = base.point(s);
        let (nr, nz) = base.normal(s);
        let w = eps * (omega * s).sin();
        r.push(pr + w * nr);
        z.push(pz + w * nz);
    }
    PlanarCurve::reparametrize(&r, &z, true, base.len(), tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn spline_reproduces_cubics_and_periodic_trig() {
        let y: Vec<f64> = (0..64).map(|i| (2.0 * PI * i as f64 / 64.0).sin()).collect();
        let s = CubicSpline::new(y, 2.0 * PI / 64.0, true);
        for x in [0.1, 1.3, 4.0, 6.2] {
            assert!((s.value(x) - x.sin()).abs() < 1e-6);
            assert!((s.derivative(x) - x.cos()).abs() < 1e-4);
        }
        // Spline of a straight line is exact.
        let line: Vec<f64> = (0..10).map(|i| 3.0 - 0.5 * i as f64).collect();
        let s = CubicSpline::new(line, 0.25, false);
        assert!((s.value(1.1) - (3.0 - 0.5 * 1.1 / 0.25)).abs() < 1e-12);
    }

    #[test]
    fn circle_is_unit_speed_with_correct_length() {
        let c = PlanarCurve::circle(2.0, 0.0, 1.0, 1024, &tol()).unwrap();
        assert!((c.length - 2.0 * PI).abs() < 1e-9);
        assert!(c.speed_deviation() < 1e-10);
        let total: f64 = c.acceleration_energy_per_interval().iter().sum();
        assert!((total - 2.0 * PI).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_curves() {
        // Uniform in angle on an ellipse is not uniform in arclength.
        let n = 256;
        let (r, z): (Vec<f64>, Vec<f64>) = (0..n)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / n as f64;
                (3.0 + 2.0 * a.cos(), a.sin())
            })
            .unzip();
        assert!(matches!(
            PlanarCurve::from_samples(r.clone(), z.clone(), true, &tol()),
            Err(Error::InvalidCurve(_))
        ));
        // Re-sampling fixes it.
        let c = PlanarCurve::reparametrize(&r, &z, true, 1024, &tol()).unwrap();
        assert!(c.speed_deviation() < 1e-8);
        // Too close to the axis.
        assert!(PlanarCurve::circle(0.5, 0.0, 1.0, 64, &tol()).is_err());
    }

    #[test]
    fn zero_amplitude_is_identity() {
        let c = PlanarCurve::circle(2.0, 0.0, 1.0, 256, &tol()).unwrap();
        let o = oscillating_curve(&c, FamilySpec { amplitude: 0.0, k: 4 }, &tol()).unwrap();
        assert_eq!(o.r, c.r);
        assert_eq!(o.z, c.z);
    }

    #[test]
    fn oscillation_stays_within_amplitude_bound() {
        let c = PlanarCurve::circle(2.0, 0.0, 1.0, 4096, &tol()).unwrap();
        let k = 16u32;
        let o = oscillating_curve(&c, FamilySpec { amplitude: 1.0, k }, &tol()).unwrap();
        // Distance from the circle is |gamma_k - centre| - 1, bounded by 1/k^2.
        let dev =
            o.r.iter()
                .zip(&o.z)
                .map(|(r, z)| ((r - 2.0).hypot(*z) - 1.0).abs())
                .fold(0.0, f64::max);
        let bound = 1.0 / (k * k) as f64;
        assert!(dev <= bound * (1.0 + 1e-6), "{dev} vs {bound}");
        assert!(dev > 0.9 * bound);
    }

    #[test]
    fn oscillating_curvature_follows_expansion() {
        let c = PlanarCurve::circle(2.0, 0.0, 1.0, 4096, &tol()).unwrap();
        let k = 32u32;
        let o = oscillating_curve(&c, FamilySpec { amplitude: 1.0, k }, &tol()).unwrap();
        assert!((o.length - 2.0 * PI).abs() < 0.02);
        // Curvature vs. the angle seen from the centre, which equals s to O(1/k^2).
        let mut err: f64 = 0.0;
        for i in (0..o.len()).step_by(7) {
            let s = i as f64 * o.ds();
            let (pr, pz) = o.point(s);
            let theta = pz.atan2(pr - 2.0);
            let (ar, az) = o.acceleration(s);
            let kappa = ar.hypot(az);
            err = err.max((kappa - (1.0 - (k as f64 * theta).sin())).abs());
        }
        assert!(err < 0.15, "{err}");
    }
}
