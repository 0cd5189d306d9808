//! Truncated bivariate Taylor arithmetic.
//!
//! A [`Taylor`] value holds the Taylor coefficients of a smooth function of
//! two variables around a fixed point, up to total degree [`MAX_ORDER`].
//! Evaluating a chart map on `Taylor` arguments yields all of its mixed
//! partial derivatives up to fourth order at once, with no truncation error.
//!
//! Each value carries the degree up to which its coefficients are valid.
//! Products and elementary functions preserve validity, differentiation
//! lowers it by one, and binary operations take the minimum.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Highest total degree tracked.
pub const MAX_ORDER: usize = 4;
/// Number of coefficients with total degree `<= MAX_ORDER`.
pub const LEN: usize = (MAX_ORDER + 1) * (MAX_ORDER + 2) / 2;

const fn index(a: usize, b: usize) -> usize {
    let deg = a + b;
    deg * (deg + 1) / 2 + b
}

const fn exponents(k: usize) -> (usize, usize) {
    let mut deg = 0;
    while (deg + 1) * (deg + 2) / 2 <= k {
        deg += 1;
    }
    let b = k - deg * (deg + 1) / 2;
    (deg - b, b)
}

const EXPONENTS: [(usize, usize); LEN] = {
    let mut table = [(0, 0); LEN];
    let mut k = 0;
    while k < LEN {
        table[k] = exponents(k);
        k += 1;
    }
    table
};

const fn degree(k: usize) -> usize {
    let (a, b) = exponents(k);
    a + b
}

const fn factorial(n: usize) -> f64 {
    let mut acc = 1.0;
    let mut i = 2;
    while i <= n {
        acc *= i as f64;
        i += 1;
    }
    acc
}

/// Truncated bivariate Taylor polynomial `Σ c_ab δ₁^a δ₂^b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Taylor {
    coef: [f64; LEN],
    order: usize,
}

impl Taylor {
    pub fn constant(value: f64) -> Self {
        let mut coef = [0.0; LEN];
        coef[0] = value;
        Self {
            coef,
            order: MAX_ORDER,
        }
    }

    /// The independent variable `s_dir` expanded around `value`, valid up
    /// to total degree `order`.
    pub fn variable(value: f64, dir: usize, order: usize) -> Self {
        assert!(dir < 2, "only two independent variables");
        let mut coef = [0.0; LEN];
        coef[0] = value;
        coef[if dir == 0 { index(1, 0) } else { index(0, 1) }] = 1.0;
        Self {
            coef,
            order: order.min(MAX_ORDER),
        }
    }

    /// Jet with the given mixed partial derivatives `∂₁^a ∂₂^b f`, valid to
    /// total degree `order`.
    pub fn from_partials(order: usize, partial: impl Fn(usize, usize) -> f64) -> Self {
        let order = order.min(MAX_ORDER);
        let mut coef = [0.0; LEN];
        for (k, c) in coef.iter_mut().enumerate() {
            let (a, b) = exponents(k);
            if a + b <= order {
                *c = partial(a, b) / (factorial(a) * factorial(b));
            }
        }
        Self { coef, order }
    }

    pub fn value(&self) -> f64 {
        self.coef[0]
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Raw coefficient of `δ₁^a δ₂^b`.
    pub fn coefficient(&self, a: usize, b: usize) -> f64 {
        self.coef[index(a, b)]
    }

    /// Mixed partial derivative `∂₁^a ∂₂^b f` at the expansion point.
    ///
    /// Panics if `a + b` exceeds the validity order.
    pub fn partial(&self, a: usize, b: usize) -> f64 {
        assert!(
            a + b <= self.order,
            "derivative of order {} requested from a jet valid to order {}",
            a + b,
            self.order
        );
        self.coef[index(a, b)] * factorial(a) * factorial(b)
    }

    /// Partial derivative with respect to `s_dir`, as a new jet.
    pub fn diff(&self, dir: usize) -> Self {
        assert!(self.order > 0, "cannot differentiate a zeroth-order jet");
        let mut coef = [0.0; LEN];
        for (k, c) in coef.iter_mut().enumerate() {
            let (a, b) = exponents(k);
            if a + b + 1 > MAX_ORDER {
                continue;
            }
            *c = if dir == 0 {
                (a + 1) as f64 * self.coef[index(a + 1, b)]
            } else {
                (b + 1) as f64 * self.coef[index(a, b + 1)]
            };
        }
        Self {
            coef,
            order: self.order - 1,
        }
    }

    fn truncated(mut self) -> Self {
        for k in 0..LEN {
            if degree(k) > self.order {
                self.coef[k] = 0.0;
            }
        }
        self
    }

    /// `f(self)` given `derivs[k] = f^(k)(self.value())`.
    fn compose(&self, derivs: &[f64; MAX_ORDER + 1]) -> Self {
        let mut delta = *self;
        delta.coef[0] = 0.0;
        let mut out = Self::constant(derivs[0]);
        out.order = self.order;
        let mut power = Self::constant(1.0);
        power.order = self.order;
        for (k, dk) in derivs.iter().enumerate().skip(1).take(self.order) {
            power = power * delta;
            out = out + power * (dk / factorial(k));
        }
        out.truncated()
    }

    pub fn recip(&self) -> Self {
        let x = self.value();
        let mut d = [0.0; MAX_ORDER + 1];
        // d^k/dx^k x^{-1} = (-1)^k k! x^{-k-1}
        let mut sign = 1.0;
        for (k, dk) in d.iter_mut().enumerate() {
            *dk = sign * factorial(k) * x.powi(-(k as i32) - 1);
            sign = -sign;
        }
        self.compose(&d)
    }

    pub fn sqrt(&self) -> Self {
        let x = self.value();
        let mut d = [0.0; MAX_ORDER + 1];
        // falling factorial of 1/2
        let mut c = 1.0;
        for (k, dk) in d.iter_mut().enumerate() {
            *dk = c * x.powf(0.5 - k as f64);
            c *= 0.5 - k as f64;
        }
        self.compose(&d)
    }

    pub fn ln(&self) -> Self {
        let x = self.value();
        let mut d = [0.0; MAX_ORDER + 1];
        d[0] = x.ln();
        let mut sign = 1.0;
        for (k, dk) in d.iter_mut().enumerate().skip(1) {
            *dk = sign * factorial(k - 1) * x.powi(-(k as i32));
            sign = -sign;
        }
        self.compose(&d)
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose(&[e; MAX_ORDER + 1])
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose(&[s, c, -s, -c, s])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose(&[c, -s, -c, s, c])
    }
}

impl Add for Taylor {
    type Output = Taylor;
    fn add(mut self, rhs: Taylor) -> Taylor {
        for (a, b) in self.coef.iter_mut().zip(rhs.coef.iter()) {
            *a += b;
        }
        self.order = self.order.min(rhs.order);
        self.truncated()
    }
}

impl Sub for Taylor {
    type Output = Taylor;
    fn sub(self, rhs: Taylor) -> Taylor {
        self + (-rhs)
    }
}

impl Neg for Taylor {
    type Output = Taylor;
    fn neg(mut self) -> Taylor {
        for a in self.coef.iter_mut() {
            *a = -*a;
        }
        self
    }
}

impl Mul for Taylor {
    type Output = Taylor;
    fn mul(self, rhs: Taylor) -> Taylor {
        let order = self.order.min(rhs.order);
        let mut coef = [0.0; LEN];
        for i in 0..LEN {
            let ci = self.coef[i];
            if ci == 0.0 {
                continue;
            }
            let (ai, bi) = EXPONENTS[i];
            for (j, &(aj, bj)) in EXPONENTS.iter().enumerate() {
                if ai + bi + aj + bj > order {
                    continue;
                }
                coef[index(ai + aj, bi + bj)] += ci * rhs.coef[j];
            }
        }
        Taylor { coef, order }
    }
}

impl Div for Taylor {
    type Output = Taylor;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Taylor) -> Taylor {
        self * rhs.recip()
    }
}

impl Add<f64> for Taylor {
    type Output = Taylor;
    fn add(mut self, rhs: f64) -> Taylor {
        self.coef[0] += rhs;
        self
    }
}

impl Sub<f64> for Taylor {
    type Output = Taylor;
    fn sub(mut self, rhs: f64) -> Taylor {
        self.coef[0] -= rhs;
        self
    }
}

impl Mul<f64> for Taylor {
    type Output = Taylor;
    fn mul(mut self, rhs: f64) -> Taylor {
        for a in self.coef.iter_mut() {
            *a *= rhs;
        }
        self
    }
}

impl Div<f64> for Taylor {
    type Output = Taylor;
    fn div(self, rhs: f64) -> Taylor {
        self * rhs.recip()
    }
}

/// Numbers a chart map can be evaluated on: plain `f64` or [`Taylor`] jets.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn sqrt(self) -> Self;
    fn ln(self) -> Self;
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
}

impl Scalar for Taylor {
    fn from_f64(x: f64) -> Self {
        Taylor::constant(x)
    }
    fn sin(self) -> Self {
        Taylor::sin(&self)
    }
    fn cos(self) -> Self {
        Taylor::cos(&self)
    }
    fn exp(self) -> Self {
        Taylor::exp(&self)
    }
    fn sqrt(self) -> Self {
        Taylor::sqrt(&self)
    }
    fn ln(self) -> Self {
        Taylor::ln(&self)
    }
}

/// Three-vector helpers over any [`Scalar`].
pub fn dot<T: Scalar>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross<T: Scalar>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jet(s1: f64, s2: f64) -> (Taylor, Taylor) {
        (
            Taylor::variable(s1, 0, MAX_ORDER),
            Taylor::variable(s2, 1, MAX_ORDER),
        )
    }

    #[test]
    fn index_roundtrip() {
        for k in 0..LEN {
            let (a, b) = exponents(k);
            assert_eq!(index(a, b), k);
        }
    }

    #[test]
    fn product_derivatives() {
        let (x, y) = jet(0.3, -0.7);
        // f = x^2 y^3
        let f = x * x * y * y * y;
        assert!((f.partial(2, 2) - 2.0 * 6.0 * (-0.7)).abs() < 1e-14);
        assert!((f.partial(1, 3) - 2.0 * 0.3 * 6.0).abs() < 1e-14);
        assert!((f.partial(0, 1) - 0.09 * 3.0 * 0.49).abs() < 1e-14);
    }

    #[test]
    fn elementary_functions_match_closed_forms() {
        let (x, y) = jet(0.4, 1.1);
        let f = (x * y).sin();
        // ∂x∂y sin(xy) = cos(xy) - xy sin(xy)
        let xy: f64 = 0.44;
        assert!((f.partial(1, 1) - (xy.cos() - xy * xy.sin())).abs() < 1e-13);
        let g = (x * x + y * y).sqrt();
        let r = (0.16f64 + 1.21).sqrt();
        assert!((g.partial(1, 0) - 0.4 / r).abs() < 1e-14);
        assert!((g.partial(2, 0) - 1.21 / r.powi(3)).abs() < 1e-13);
        let h = (x.exp() * y).ln();
        assert!((h.partial(1, 0) - 1.0).abs() < 1e-13);
        assert!((h.partial(0, 2) + 1.0 / 1.21).abs() < 1e-13);
        assert!(h.partial(3, 1).abs() < 1e-12);
    }

    #[test]
    fn reciprocal_fourth_derivative() {
        let (x, _) = jet(2.0, 0.0);
        let r = x.recip();
        // d^4/dx^4 1/x = 24 / x^5
        assert!((r.partial(4, 0) - 24.0 / 32.0).abs() < 1e-13);
    }

    #[test]
    fn differentiation_lowers_order() {
        let (x, y) = jet(1.0, 2.0);
        let f = x * x * x * y;
        let fx = f.diff(0);
        assert_eq!(fx.order(), MAX_ORDER - 1);
        assert!((fx.value() - 3.0 * 2.0).abs() < 1e-15);
        assert!((fx.partial(1, 1) - 6.0).abs() < 1e-14);
    }
}
