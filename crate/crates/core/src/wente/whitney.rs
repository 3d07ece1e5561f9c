//! Extension of disc functions to the plane by inversion, `u~(x) = u(x / |x|^2)` for `|x| > 1`.

use crate::par;
use crate::wente::grid::DiscField;

/// Catmull-Rom weights for fractional offset `t` in `[0, 1)`; exact for quadratics.
fn cubic_weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

/// Bicubic interpolation of grid values at `(x, y)`.
pub fn interpolate(u: &DiscField, x: f64, y: f64) -> f64 {
    let g = u.grid;
    let n = g.n as isize;
    let h = g.h();
    let locate = |v: f64| {
        let s = (v + g.half_width) / h;
        let i = (s.floor() as isize).clamp(1, n - 3);
        (i, s - i as f64)
    };
    let (i, tx) = locate(x);
    let (j, ty) = locate(y);
    let (wx, wy) = (cubic_weights(tx), cubic_weights(ty));
    let mut s = 0.0;
    for (a, wa) in wx.iter().enumerate() {
        for (b, wb) in wy.iter().enumerate() {
            s += wa * wb * u.at((i - 1 + a as isize) as usize, (j - 1 + b as isize) as usize);
        }
    }
    s
}

/// Keeps `u` on the disc and fills every other node with `u(x / |x|^2)`. The input must be
/// sampled on the disc and at least two nodes beyond the circle.
pub fn whitney_extend(u: &DiscField) -> DiscField {
    let g = u.grid;
    DiscField::from_fn(g, |x, y| {
        let r2 = x * x + y * y;
        if r2 < 1.0 {
            // Grid nodes inside the disc keep their values exactly.
            let i = ((x + g.half_width) / g.h()).round() as usize;
            let j = ((y + g.half_width) / g.h()).round() as usize;
            u.at(i, j)
        } else {
            interpolate(u, x / r2, y / r2)
        }
    })
}

/// Dirichlet energies of the extension outside the disc (within the box) and of `u` on the
/// image of that region under inversion.
#[derive(Clone, Copy, Debug)]
pub struct ExtensionEnergy {
    pub inside: f64,
    pub outside: f64,
    pub ratio: f64,
}

/// Compares the two energies. Outside, gradients of the extension use finite differences that
/// never straddle the circle; inside, the region is `{ |y| < 1 : y / |y|^2 in the box }`.
pub fn extension_energy(u: &DiscField) -> ExtensionEnergy {
    let ext = whitney_extend(u);
    let g = u.grid;
    let n = g.n;
    let h = g.h();
    let outside_node = |i1: isize, i2: isize| {
        i1 >= 0 && i2 >= 0 && (i1 as usize) < n && (i2 as usize) < n && !g.inside(i1 as usize, i2 as usize)
    };
    // Derivative along one axis at (i1, i2) using only exterior nodes.
    let deriv = |i1: usize, i2: usize, axis: usize| {
        let at = |k: isize| {
            let (a, b) = if axis == 0 {
                (i1 as isize + k, i2 as isize)
            } else {
                (i1 as isize, i2 as isize + k)
            };
            (
                outside_node(a, b),
                if outside_node(a, b) {
                    ext.at(a as usize, b as usize)
                } else {
                    0.0
                },
            )
        };
        let (p1, m1, p2, m2) = (at(1), at(-1), at(2), at(-2));
        let c = ext.at(i1, i2);
        if p1.0 && m1.0 {
            (p1.1 - m1.1) / (2.0 * h)
        } else if p1.0 && p2.0 {
            (-3.0 * c + 4.0 * p1.1 - p2.1) / (2.0 * h)
        } else if m1.0 && m2.0 {
            (3.0 * c - 4.0 * m1.1 + m2.1) / (2.0 * h)
        } else {
            0.0
        }
    };
    let outside = par::sum(n, |i1| {
        (0..n)
            .filter(|&i2| !g.inside(i1, i2))
            .map(|i2| {
                let (a, b) = (deriv(i1, i2, 0), deriv(i1, i2, 1));
                (a * a + b * b) * g.exterior_weight(i1, i2)
            })
            .sum()
    });
    let (u1, u2) = u.gradient();
    let l = g.half_width;
    let inside = par::sum(n, |i1| {
        (0..n)
            .filter(|&i2| {
                let (y1, y2) = (g.x(i1), g.x(i2));
                let r2 = y1 * y1 + y2 * y2;
                y1.abs() <= l * r2 && y2.abs() <= l * r2
            })
            .map(|i2| {
                let (a, b) = (u1.at(i1, i2), u2.at(i1, i2));
                (a * a + b * b) * g.disc_weight(i1, i2)
            })
            .sum()
    });
    ExtensionEnergy {
        inside,
        outside,
        ratio: if inside > 0.0 { outside / inside } else { f64::NAN },
    }
}
