//! Scalar abstraction and hyper-dual numbers for exact first and second
//! derivatives of the model right-hand sides.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arithmetic needed to evaluate the rational model fields.
pub trait Scalar:
    Copy
    + From<f64>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Real part.
    fn re(self) -> f64;
}

impl Scalar for f64 {
    fn re(self) -> f64 {
        self
    }
}

/// Hyper-dual number `re + e1·ε1 + e2·ε2 + e12·ε1ε2` with `ε1² = ε2² = 0`.
///
/// Seeding `ε1` along `u` and `ε2` along `v` yields `∂f·u` in `e1`,
/// `∂f·v` in `e2` and `uᵀ∇²f v` in `e12`, all free of truncation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperDual {
    /// Real part.
    pub re: f64,
    /// First infinitesimal part.
    pub e1: f64,
    /// Second infinitesimal part.
    pub e2: f64,
    /// Mixed part.
    pub e12: f64,
}

impl HyperDual {
    /// Builds a hyper-dual number from its four parts.
    pub const fn new(re: f64, e1: f64, e2: f64, e12: f64) -> Self {
        Self { re, e1, e2, e12 }
    }
}

impl From<f64> for HyperDual {
    fn from(re: f64) -> Self {
        Self::new(re, 0.0, 0.0, 0.0)
    }
}

impl Scalar for HyperDual {
    fn re(self) -> f64 {
        self.re
    }
}

impl Add for HyperDual {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.e1 + o.e1, self.e2 + o.e2, self.e12 + o.e12)
    }
}

impl Sub for HyperDual {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.e1 - o.e1, self.e2 - o.e2, self.e12 - o.e12)
    }
}

impl Neg for HyperDual {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.e1, -self.e2, -self.e12)
    }
}

impl Mul for HyperDual {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.re * o.re,
            self.re * o.e1 + self.e1 * o.re,
            self.re * o.e2 + self.e2 * o.re,
            self.re * o.e12 + self.e1 * o.e2 + self.e2 * o.e1 + self.e12 * o.re,
        )
    }
}

impl Div for HyperDual {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = 1.0 / o.re;
        let inv2 = inv * inv;
        let recip = HyperDual::new(inv, -o.e1 * inv2, -o.e2 * inv2, -o.e12 * inv2 + 2.0 * o.e1 * o.e2 * inv2 * inv);
        self * recip
    }
}
