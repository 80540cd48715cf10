//! Hyper-dual numbers: `value + d_a e1 + d_b e2 + d_ab e1 e2` with
//! `e1^2 = e2^2 = 0`.
//!
//! Seeding `d_a` along coordinate `i` and `d_b` along `j` makes `d_ab` the
//! exact mixed partial `d2f/dxi dxj`. The inner scalar is generic so the type
//! nests: `HyperDual<HyperDual<f64>>` carries third and fourth order terms,
//! which is how Jacobians of derivative-built fields are taken.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::Real;

#[derive(Clone, Copy, PartialEq, Default)]
pub struct HyperDual<T = f64> {
    pub value: T,
    pub d_a: T,
    pub d_b: T,
    pub d_ab: T,
}

impl<T: Real> HyperDual<T> {
    pub fn new(value: T, d_a: T, d_b: T, d_ab: T) -> Self {
        HyperDual { value, d_a, d_b, d_ab }
    }

    pub fn constant(value: T) -> Self {
        let zero = T::from_f64(0.0);
        HyperDual::new(value, zero, zero, zero)
    }

    /// Seeds a coordinate: `seed_a`/`seed_b` mark which directions it moves.
    pub fn seeded(value: T, seed_a: bool, seed_b: bool) -> Self {
        let one = T::from_f64(1.0);
        let zero = T::from_f64(0.0);
        HyperDual::new(
            value,
            if seed_a { one } else { zero },
            if seed_b { one } else { zero },
            zero,
        )
    }

    /// Applies a scalar function given its value and first two derivatives at
    /// `self.value`.
    fn chain(self, f0: T, f1: T, f2: T) -> Self {
        HyperDual {
            value: f0,
            d_a: f1 * self.d_a,
            d_b: f1 * self.d_b,
            d_ab: f1 * self.d_ab + f2 * self.d_a * self.d_b,
        }
    }
}

impl<T: Real> fmt::Debug for HyperDual<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "HyperDual({:?}, {:?}, {:?}, {:?})",
            self.value, self.d_a, self.d_b, self.d_ab
        )
    }
}

impl<T: Real> Add for HyperDual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        HyperDual::new(
            self.value + o.value,
            self.d_a + o.d_a,
            self.d_b + o.d_b,
            self.d_ab + o.d_ab,
        )
    }
}

impl<T: Real> Sub for HyperDual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        HyperDual::new(
            self.value - o.value,
            self.d_a - o.d_a,
            self.d_b - o.d_b,
            self.d_ab - o.d_ab,
        )
    }
}

impl<T: Real> Mul for HyperDual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        HyperDual::new(
            self.value * o.value,
            self.value * o.d_a + self.d_a * o.value,
            self.value * o.d_b + self.d_b * o.value,
            self.value * o.d_ab + self.d_a * o.d_b + self.d_b * o.d_a + self.d_ab * o.value,
        )
    }
}

impl<T: Real> Div for HyperDual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = T::from_f64(1.0) / o.value;
        let recip = o.chain(inv, -(inv * inv), T::from_f64(2.0) * inv * inv * inv);
        self * recip
    }
}

impl<T: Real> Neg for HyperDual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        HyperDual::new(-self.value, -self.d_a, -self.d_b, -self.d_ab)
    }
}

impl<T: Real> Real for HyperDual<T> {
    fn from_f64(v: f64) -> Self {
        HyperDual::constant(T::from_f64(v))
    }

    fn value(&self) -> f64 {
        self.value.value()
    }

    fn sin(self) -> Self {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.chain(s, c, -s)
    }

    fn cos(self) -> Self {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.chain(c, -s, -c)
    }

    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    fn ln(self) -> Self {
        let inv = T::from_f64(1.0) / self.value;
        self.chain(self.value.ln(), inv, -(inv * inv))
    }

    fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        let d1 = T::from_f64(0.5) / s;
        let d2 = -(T::from_f64(0.25) / (s * self.value));
        self.chain(s, d1, d2)
    }

    fn tanh(self) -> Self {
        let t = self.value.tanh();
        let sech2 = T::from_f64(1.0) - t * t;
        self.chain(t, sech2, T::from_f64(-2.0) * t * sech2)
    }

    fn abs(self) -> Self {
        let sign = T::from_f64(if self.value.value() < 0.0 { -1.0 } else { 1.0 });
        self.chain(self.value.abs(), sign, T::from_f64(0.0))
    }

    fn powc(self, c: f64) -> Self {
        let zero = T::from_f64(0.0);
        let f0 = self.value.powc(c);
        // Coefficients that vanish are skipped so that x^1 and x^2 stay finite
        // at x = 0.
        let f1 = if c == 0.0 {
            zero
        } else {
            T::from_f64(c) * self.value.powc(c - 1.0)
        };
        let f2 = if c == 0.0 || c == 1.0 {
            zero
        } else {
            T::from_f64(c * (c - 1.0)) * self.value.powc(c - 2.0)
        };
        self.chain(f0, f1, f2)
    }
}
