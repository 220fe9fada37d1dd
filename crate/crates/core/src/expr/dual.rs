//! Hyper-dual numbers `a + b ε₁ + c ε₂ + d ε₁ε₂` with `ε₁² = ε₂² = 0`.
//!
//! Seeding `ε₁` along `eᵢ` and `ε₂` along `eⱼ` makes the `ε₁ε₂` part the exact
//! second partial `∂ᵢ∂ⱼf`, with no truncation error.

use std::ops::{Add, Mul, Neg, Sub};

use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperDual<T> {
    pub re: T,
    pub e1: T,
    pub e2: T,
    pub e12: T,
}

impl<T: Scalar> HyperDual<T> {
    pub fn constant(re: T) -> Self {
        Self { re, e1: T::zero(), e2: T::zero(), e12: T::zero() }
    }

    pub fn seeded(re: T, e1: T, e2: T) -> Self {
        Self { re, e1, e2, e12: T::zero() }
    }

    fn has_infinitesimal(&self) -> bool {
        self.e1 != T::zero() || self.e2 != T::zero() || self.e12 != T::zero()
    }

    /// Applies a scalar function given its value and first two derivatives at `re`.
    fn chain(self, f: T, df: T, d2f: T) -> Self {
        Self { re: f, e1: df * self.e1, e2: df * self.e2, e12: df * self.e12 + d2f * self.e1 * self.e2 }
    }

    pub fn sin(self) -> Self {
        let (s, c) = (self.re.sin(), self.re.cos());
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = (self.re.sin(), self.re.cos());
        self.chain(c, -s, -c)
    }

    pub fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e, e)
    }

    /// `None` outside the domain (negative argument, or zero with a derivative requested).
    pub fn sqrt(self) -> Option<Self> {
        if self.re < T::zero() || (self.re == T::zero() && self.has_infinitesimal()) {
            return None;
        }
        let s = self.re.sqrt();
        if s == T::zero() {
            return Some(Self::constant(s));
        }
        let half = T::of(0.5);
        let d = half / s;
        let d2 = -d / (T::of(2.0) * self.re);
        Some(self.chain(s, d, d2))
    }

    pub fn recip(self) -> Option<Self> {
        if self.re == T::zero() {
            return None;
        }
        let r = T::one() / self.re;
        Some(self.chain(r, -r * r, T::of(2.0) * r * r * r))
    }

    pub fn checked_div(self, rhs: Self) -> Option<Self> {
        rhs.recip().map(|r| self * r)
    }

    pub fn powi(self, k: i32) -> Option<Self> {
        let base = if k < 0 { self.recip()? } else { self };
        let mut e = k.unsigned_abs();
        let mut acc = Self::constant(T::one());
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b;
            }
            b = b * b;
            e >>= 1;
        }
        Some(acc)
    }

    pub fn is_finite(&self) -> bool {
        [self.re, self.e1, self.e2, self.e12].iter().all(|v| v.is_finite())
    }
}

impl<T: Scalar> Add for HyperDual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { re: self.re + o.re, e1: self.e1 + o.e1, e2: self.e2 + o.e2, e12: self.e12 + o.e12 }
    }
}

impl<T: Scalar> Sub for HyperDual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { re: self.re - o.re, e1: self.e1 - o.e1, e2: self.e2 - o.e2, e12: self.e12 - o.e12 }
    }
}

impl<T: Scalar> Neg for HyperDual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { re: -self.re, e1: -self.e1, e2: -self.e2, e12: -self.e12 }
    }
}

impl<T: Scalar> Mul for HyperDual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            re: self.re * o.re,
            e1: self.re * o.e1 + self.e1 * o.re,
            e2: self.re * o.e2 + self.e2 * o.re,
            e12: self.re * o.e12 + self.e1 * o.e2 + self.e2 * o.e1 + self.e12 * o.re,
        }
    }
}
