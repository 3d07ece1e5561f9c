//! Dense exterior algebra over R^m for m <= 6.
//!
//! Basis blades are bitmasks: bit `i` set means `e_{i+1}` is a factor, factors in increasing
//! order. The Euclidean inner product makes the blades orthonormal.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 6;
const MAX_BLADES: usize = 1 << MAX_DIM;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Multivector {
    m: usize,
    coef: [f64; MAX_BLADES],
}

/// Sign of the permutation that sorts the concatenation `a ++ b` of two disjoint blades.
pub fn reorder_sign(a: u8, b: u8) -> f64 {
    let mut swaps = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        bb &= bb - 1;
    }
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Blades of grade `k` in R^m, in increasing mask order. Used for compact field storage.
pub fn grade_masks(m: usize, k: usize) -> Vec<u8> {
    (0u16..(1u16 << m))
        .filter(|b| b.count_ones() as usize == k)
        .map(|b| b as u8)
        .collect()
}

impl Multivector {
    pub fn zero(m: usize) -> Result<Self> {
        if m == 0 || m > MAX_DIM {
            return Err(Error::Dimension(m));
        }
        Ok(Self {
            m,
            coef: [0.0; MAX_BLADES],
        })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    fn blades(&self) -> usize {
        1 << self.m
    }

    pub fn blade(m: usize, mask: u8) -> Result<Self> {
        let mut v = Self::zero(m)?;
        v.coef[mask as usize] = 1.0;
        Ok(v)
    }

    pub fn scalar(m: usize, s: f64) -> Result<Self> {
        let mut v = Self::zero(m)?;
        v.coef[0] = s;
        Ok(v)
    }

    /// Grade-1 element from Cartesian components (only the first `m` are read).
    pub fn vector(m: usize, x: &[f64]) -> Result<Self> {
        let mut v = Self::zero(m)?;
        for (i, xi) in x.iter().take(m).enumerate() {
            v.coef[1 << i] = *xi;
        }
        Ok(v)
    }

    /// Grade-`k` element from components listed in [`grade_masks`] order.
    pub fn from_grade(m: usize, k: usize, comps: &[f64]) -> Result<Self> {
        let masks = grade_masks(m, k);
        if comps.len() != masks.len() {
            return Err(Error::GradeMismatch(format!(
                "grade {k} in R^{m} has {} components, got {}",
                masks.len(),
                comps.len()
            )));
        }
        let mut v = Self::zero(m)?;
        for (b, c) in masks.iter().zip(comps) {
            v.coef[*b as usize] = *c;
        }
        Ok(v)
    }

    /// Grade-`k` components in [`grade_masks`] order.
    pub fn grade_components(&self, k: usize) -> Vec<f64> {
        grade_masks(self.m, k)
            .into_iter()
            .map(|b| self.coef[b as usize])
            .collect()
    }

    pub fn coefficient(&self, mask: u8) -> f64 {
        self.coef[mask as usize]
    }

    /// Grades carrying a nonzero coefficient, as a bitmask over grades.
    fn grade_set(&self) -> u32 {
        (0..self.blades())
            .filter(|&b| self.coef[b] != 0.0)
            .fold(0, |acc, b| acc | 1 << (b as u32).count_ones())
    }

    /// Grade if homogeneous and nonzero.
    pub fn grade(&self) -> Option<usize> {
        let g = self.grade_set();
        (g.count_ones() == 1).then(|| g.trailing_zeros() as usize)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.m, other.m);
        (0..self.blades()).map(|b| self.coef[b] * other.coef[b]).sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn wedge(&self, other: &Self) -> Self {
        debug_assert_eq!(self.m, other.m);
        let mut out = Self {
            m: self.m,
            coef: [0.0; MAX_BLADES],
        };
        for a in 0..self.blades() {
            let ca = self.coef[a];
            if ca == 0.0 {
                continue;
            }
            for b in 0..self.blades() {
                let cb = other.coef[b];
                if cb == 0.0 || a & b != 0 {
                    continue;
                }
                out.coef[a | b] += reorder_sign(a as u8, b as u8) * ca * cb;
            }
        }
        out
    }

    /// Hodge star: `a ^ *b = <a, b> e_1 ^ ... ^ e_m`.
    pub fn hodge(&self) -> Self {
        let full = (self.blades() - 1) as u8;
        let mut out = Self {
            m: self.m,
            coef: [0.0; MAX_BLADES],
        };
        for s in 0..self.blades() {
            let c = self.coef[s];
            if c != 0.0 {
                let comp = full & !(s as u8);
                out.coef[comp as usize] += reorder_sign(s as u8, comp) * c;
            }
        }
        out
    }

    /// Contraction `a ⌐ b`, adjoint of the wedge: `<a ⌐ b, c> = <a, b ^ c>`.
    ///
    /// Every grade present in `b` must be at most every grade present in `a`.
    pub fn contract(&self, b: &Self) -> Result<Self> {
        let ga = self.grade_set();
        let gb = b.grade_set();
        if ga != 0 && gb != 0 {
            let min_a = ga.trailing_zeros();
            let max_b = 31 - gb.leading_zeros();
            if max_b > min_a {
                return Err(Error::GradeMismatch(format!(
                    "contraction needs grade(a) >= grade(b), got {min_a} < {max_b}"
                )));
            }
        }
        let mut out = Self {
            m: self.m,
            coef: [0.0; MAX_BLADES],
        };
        for a in 0..self.blades() {
            let ca = self.coef[a];
            if ca == 0.0 {
                continue;
            }
            for bm in 0..self.blades() {
                let cb = b.coef[bm];
                if cb == 0.0 || a & bm != bm {
                    continue;
                }
                let rest = (a & !bm) as u8;
                out.coef[rest as usize] += reorder_sign(bm as u8, rest) * ca * cb;
            }
        }
        Ok(out)
    }
}

/// A bilinear map between homogeneous grades, tabulated once from a [`Multivector`] operation
/// and applied to compact component slices. Per-node geometry uses this instead of dense
/// 64-blade arithmetic.
#[derive(Clone, Debug)]
pub struct GradedProduct {
    out_len: usize,
    entries: Vec<(usize, usize, usize, f64)>,
}

impl GradedProduct {
    pub fn new<F>(m: usize, ka: usize, kb: usize, kout: usize, op: F) -> Result<Self>
    where
        F: Fn(&Multivector, &Multivector) -> Result<Multivector>,
    {
        let (ma, mb, mo) = (grade_masks(m, ka), grade_masks(m, kb), grade_masks(m, kout));
        let mut entries = Vec::new();
        for (i, &a) in ma.iter().enumerate() {
            for (j, &b) in mb.iter().enumerate() {
                let r = op(&Multivector::blade(m, a)?, &Multivector::blade(m, b)?)?;
                if r.grade().is_some_and(|g| g != kout) {
                    return Err(Error::GradeMismatch(format!(
                        "tabulated product returned grade {:?}, expected {kout}",
                        r.grade()
                    )));
                }
                for (k, &o) in mo.iter().enumerate() {
                    let c = r.coefficient(o);
                    if c != 0.0 {
                        entries.push((i, j, k, c));
                    }
                }
            }
        }
        Ok(Self {
            out_len: mo.len(),
            entries,
        })
    }

    pub fn out_len(&self) -> usize {
        self.out_len
    }

    /// Overwrites `out` with the product of the compact operands `a` and `b`.
    pub fn apply(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        out[..self.out_len].iter_mut().for_each(|o| *o = 0.0);
        for &(i, j, k, c) in &self.entries {
            out[k] += c * a[i] * b[j];
        }
    }
}

impl Add for Multivector {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.coef.iter_mut().zip(rhs.coef) {
            *a += b;
        }
        self
    }
}

impl Sub for Multivector {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for Multivector {
    type Output = Self;
    fn neg(mut self) -> Self {
        self.coef.iter_mut().for_each(|c| *c = -*c);
        self
    }
}

impl Mul<f64> for Multivector {
    type Output = Self;
    fn mul(mut self, s: f64) -> Self {
        self.coef.iter_mut().for_each(|c| *c *= s);
        self
    }
}
