//! Concentrating function pairs `alpha_k(x) = A(k (x - c))`, `beta_k(x) = B(k (x - c))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wente::{DiscField, PlaneGrid};

/// `(1 - |x - center|^2 / radius^2)^power * (a0 + a1 x1 + a2 x2)` inside the ball, 0 outside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub center: [f64; 2],
    pub radius: f64,
    pub power: i32,
    pub affine: [f64; 3],
}

impl Profile {
    pub fn bump(center: [f64; 2], radius: f64, power: i32) -> Self {
        Self {
            center,
            radius,
            power,
            affine: [1.0, 0.0, 0.0],
        }
    }

    pub fn with_affine(mut self, affine: [f64; 3]) -> Self {
        self.affine = affine;
        self
    }

    /// Default first profile: a bump shifted along `x1`.
    pub fn default_a() -> Self {
        Self::bump([0.05, 0.0], 0.95, 2)
    }

    /// Default second profile: a bump shifted along `x2`, tilted by `1 + x1`.
    pub fn default_b() -> Self {
        Self::bump([0.0, 0.05], 0.95, 2).with_affine([1.0, 1.0, 0.0])
    }

    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        let (d1, d2) = (x1 - self.center[0], x2 - self.center[1]);
        let s = (d1 * d1 + d2 * d2) / (self.radius * self.radius);
        if s >= 1.0 {
            return 0.0;
        }
        (1.0 - s).powi(self.power) * (self.affine[0] + self.affine[1] * x1 + self.affine[2] * x2)
    }

    /// Radius of the smallest origin-centred disc containing the support.
    pub fn extent(&self) -> f64 {
        self.center[0].hypot(self.center[1]) + self.radius
    }

    fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) || self.power < 1 {
            return Err(Error::InvalidParameter(format!(
                "profile needs radius > 0 and power >= 1, got {} and {}",
                self.radius, self.power
            )));
        }
        if self.extent() > 1.0 {
            return Err(Error::Support {
                module: "surface_zoo",
                msg: format!(
                    "profile support reaches radius {:.4} outside the unit disc",
                    self.extent()
                ),
            });
        }
        Ok(())
    }
}

/// `(A(k x), B(k x))` on `grid`.
pub fn concentrating_pair(k: u32, a: &Profile, b: &Profile, grid: PlaneGrid) -> Result<(DiscField, DiscField)> {
    concentrating_pair_at(k, a, b, grid, [0.0, 0.0])
}

/// `(A(k (x - c)), B(k (x - c)))`; the rescaled supports must stay inside the unit disc.
pub fn concentrating_pair_at(
    k: u32,
    a: &Profile,
    b: &Profile,
    grid: PlaneGrid,
    c: [f64; 2],
) -> Result<(DiscField, DiscField)> {
    if k == 0 {
        return Err(Error::InvalidParameter("concentration index k must be positive".into()));
    }
    a.validate()?;
    b.validate()?;
    let k = k as f64;
    let reach = c[0].hypot(c[1]) + a.extent().max(b.extent()) / k;
    if reach > 1.0 {
        return Err(Error::Support {
            module: "surface_zoo",
            msg: format!("translated support reaches radius {reach:.4} outside the unit disc"),
        });
    }
    let alpha = DiscField::from_fn(grid, |x, y| a.eval(k * (x - c[0]), k * (y - c[1])));
    let beta = DiscField::from_fn(grid, |x, y| b.eval(k * (x - c[0]), k * (y - c[1])));
    Ok((alpha, beta))
}
