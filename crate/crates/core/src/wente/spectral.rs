//! Free-space convolutions on a [`PlaneGrid`] by zero-padded FFT, the Newtonian potential and
//! the operators `d_ij Delta^-2`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::wente::grid::{DiscField, PlaneGrid};

/// Mean of `log|x|` over the unit square centred at the origin, `(pi/2 - 3 - ln 2) / 2`.
pub fn log_cell_average() -> f64 {
    0.5 * (PI / 2.0 - 3.0 - std::f64::consts::LN_2)
}

/// Nodes next to the box edge that must carry no source.
const EDGE_BAND: usize = 2;

/// Square complex 2-D FFT of side `p`.
struct Fft2 {
    p: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(p: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            p,
            forward: planner.plan_fft_forward(p),
            inverse: planner.plan_fft_inverse(p),
        }
    }

    fn run(&self, data: &mut [Complex64], inverse: bool) {
        let fft = if inverse { &self.inverse } else { &self.forward };
        let p = self.p;
        par::for_each_row(data, p, |_, row| fft.process(row));
        let mut t = transpose(data, p);
        par::for_each_row(&mut t, p, |_, row| fft.process(row));
        data.copy_from_slice(&transpose(&t, p));
        if inverse {
            let s = 1.0 / (p * p) as f64;
            data.iter_mut().for_each(|v| *v *= s);
        }
    }
}

fn transpose(a: &[Complex64], p: usize) -> Vec<Complex64> {
    let rows = par::map_collect(p, |j| (0..p).map(|i| a[i * p + j]).collect::<Vec<_>>());
    rows.concat()
}

/// Padded side length for linear convolution: at least `2n`, a product of small primes.
fn padded_side(n: usize) -> usize {
    fast_side(2 * n)
}

/// Smallest product of 2, 3 and 5 not below `m`.
fn fast_side(m: usize) -> usize {
    let mut p = m;
    loop {
        let mut q = p;
        for f in [2, 3, 5] {
            while q.is_multiple_of(f) {
                q /= f;
            }
        }
        if q == 1 {
            return p;
        }
        p += 1;
    }
}

fn embed(field: &DiscField, p: usize) -> Vec<Complex64> {
    let n = field.grid.n;
    let mut out = vec![Complex64::new(0.0, 0.0); p * p];
    for i1 in 0..n {
        for i2 in 0..n {
            out[i1 * p + i2] = Complex64::new(field.at(i1, i2), 0.0);
        }
    }
    out
}

fn extract(data: &[Complex64], grid: PlaneGrid, p: usize) -> DiscField {
    let n = grid.n;
    let values = (0..n * n).map(|k| data[(k / n) * p + k % n].re).collect();
    DiscField { grid, values }
}

/// `h^2 sum_j K(x_i - x_j) f_j` for a kernel given on lattice offsets.
pub fn lattice_convolution(f: &DiscField, kernel: impl Fn(isize, isize) -> f64 + Sync) -> DiscField {
    let grid = f.grid;
    let n = grid.n;
    let p = padded_side(n);
    let fft = Fft2::new(p);
    let wrap = |i: usize| {
        if i < p - n + 1 {
            i as isize
        } else {
            i as isize - p as isize
        }
    };
    let rows = par::map_collect(p, |i1| {
        (0..p)
            .map(|i2| {
                let (a, b) = (wrap(i1), wrap(i2));
                if a.unsigned_abs() < n && b.unsigned_abs() < n {
                    Complex64::new(kernel(a, b), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect::<Vec<_>>()
    });
    let mut k = rows.concat();
    let mut s = embed(f, p);
    fft.run(&mut k, false);
    fft.run(&mut s, false);
    let h2 = grid.h() * grid.h();
    s.iter_mut().zip(&k).for_each(|(a, b)| *a *= b * h2);
    fft.run(&mut s, true);
    extract(&s, grid, p)
}

fn check_support(omega: &DiscField, module: &'static str) -> Result<()> {
    let edge = omega.edge_max_abs(EDGE_BAND);
    let scale = omega.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if edge > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Support {
            module,
            msg: format!("source reaches the box edge (|value| = {edge:.3e} within {EDGE_BAND} nodes)"),
        });
    }
    Ok(())
}

/// `(1 / 2 pi) log|x| * omega` on the box.
pub fn newtonian_potential(omega: &DiscField) -> Result<DiscField> {
    check_support(omega, "wente_cc")?;
    let h = omega.grid.h();
    let c = 1.0 / (2.0 * PI);
    let origin = c * (h.ln() + log_cell_average());
    Ok(lattice_convolution(omega, |a, b| {
        if a == 0 && b == 0 {
            origin
        } else {
            c * (h * (a as f64).hypot(b as f64)).ln()
        }
    }))
}

/// Which second derivative of `Delta^-2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    /// `d_12 Delta^-2`, multiplier `-xi1 xi2 / |xi|^4`, kernel `x1 x2 / |x|^2`.
    Cross,
    /// `(d_11 - d_22) Delta^-2`, multiplier `-(xi1^2 - xi2^2) / |xi|^4`, kernel `(x1^2 - x2^2) / |x|^2`.
    Diff,
}

impl Which {
    pub fn multiplier(self, xi1: f64, xi2: f64) -> f64 {
        let r2 = xi1 * xi1 + xi2 * xi2;
        if r2 == 0.0 {
            return 0.0;
        }
        match self {
            Which::Cross => -xi1 * xi2 / (r2 * r2),
            Which::Diff => -(xi1 * xi1 - xi2 * xi2) / (r2 * r2),
        }
    }

    pub fn kernel(self, x1: f64, x2: f64) -> f64 {
        let r2 = x1 * x1 + x2 * x2;
        if r2 == 0.0 {
            return 0.0;
        }
        match self {
            Which::Cross => x1 * x2 / r2,
            Which::Diff => (x1 * x1 - x2 * x2) / r2,
        }
    }

    /// Constant of the free-space kernel, from `Delta^-2 = (1 / 8 pi) |x|^2 log|x|`.
    pub fn exact_constant(self) -> f64 {
        1.0 / (4.0 * PI)
    }
}

/// Both evaluations of `d_ij Delta^-2 omega` and the fitted kernel constant.
#[derive(Clone, Debug)]
pub struct RieszResult {
    pub which: Which,
    /// Multiplier path with the free-space truncation window, zero mode removed.
    pub spectral: DiscField,
    /// Spatial path, convolution with the bare kernel (no constant).
    pub spatial: DiscField,
    /// Least-squares constant `c` in `spectral ~ c * spatial`.
    pub c0: f64,
    /// `||spectral - c0 spatial||_2 / ||spectral||_2` over the box.
    pub disagreement: f64,
}

/// Multiplier path alone, in free space. The kernel of a degree -2, angular mode 2 multiplier
/// truncated at radius `R` has the symbol `m(xi) (1 - J0(kR) - kR J1(kR) / 2)`, `k = |xi|`.
/// With `R` at least the box diagonal and the period at least box side plus `R`, the periodic
/// convolution equals the free-space one on the box.
pub fn riesz_spectral(omega: &DiscField, which: Which) -> DiscField {
    let grid = omega.grid;
    let n = grid.n;
    let h = grid.h();
    let radius = std::f64::consts::SQRT_2 * (n - 1) as f64 * h + h;
    let p = fast_side(n + (radius / h).ceil() as usize + 1);
    let fft = Fft2::new(p);
    let mut s = embed(omega, p);
    fft.run(&mut s, false);
    let step = 2.0 * PI / (p as f64 * h);
    let freq = |k: usize| {
        if 2 * k <= p {
            k as f64 * step
        } else {
            (k as f64 - p as f64) * step
        }
    };
    par::for_each_row(&mut s, p, |k1, row| {
        let a = freq(k1);
        for (k2, v) in row.iter_mut().enumerate() {
            let b = freq(k2);
            let kr = a.hypot(b) * radius;
            let window = 1.0 - libm::j0(kr) - 0.5 * kr * libm::j1(kr);
            *v *= which.multiplier(a, b) * window;
        }
    });
    fft.run(&mut s, true);
    extract(&s, grid, p)
}

/// Spatial path alone, with the exact constant applied.
pub fn riesz_spatial(omega: &DiscField, which: Which) -> DiscField {
    let h = omega.grid.h();
    let c = which.exact_constant();
    lattice_convolution(omega, |a, b| c * which.kernel(a as f64 * h, b as f64 * h))
}

/// Evaluates `d_ij Delta^-2 omega` along both paths and fits the kernel constant.
pub fn riesz_second(omega: &DiscField, which: Which, tolerance: f64) -> Result<RieszResult> {
    check_support(omega, "wente_cc")?;
    let h = omega.grid.h();
    let spectral = riesz_spectral(omega, which);
    let spatial = lattice_convolution(omega, |a, b| which.kernel(a as f64 * h, b as f64 * h));
    let (mut ss, mut sk, mut kk) = (0.0, 0.0, 0.0);
    for (a, b) in spectral.values.iter().zip(&spatial.values) {
        ss += a * a;
        sk += a * b;
        kk += b * b;
    }
    let c0 = if kk > 0.0 { sk / kk } else { 0.0 };
    let rr: f64 = spectral
        .values
        .iter()
        .zip(&spatial.values)
        .map(|(a, b)| (a - c0 * b).powi(2))
        .sum();
    let disagreement = if ss > 0.0 { (rr / ss).sqrt() } else { 0.0 };
    let result = RieszResult {
        which,
        spectral,
        spatial,
        c0,
        disagreement,
    };
    if disagreement > tolerance {
        log::warn!("kernel paths disagree: {disagreement:.3e} > {tolerance:.1e}");
        return Err(Error::KernelDisagreement {
            disagreement,
            tol: tolerance,
        });
    }
    Ok(result)
}

/// Same as [`riesz_second`] but returns both fields even when the paths disagree.
pub fn riesz_second_report(omega: &DiscField, which: Which) -> Result<RieszResult> {
    riesz_second(omega, which, f64::INFINITY)
}
