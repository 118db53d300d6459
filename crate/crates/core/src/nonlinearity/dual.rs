//! Forward-mode dual numbers.
//!
//! [`Real`] abstracts over `f64` and [`Dual<T>`], so the same evaluation code
//! produces values, first derivatives (`Dual<f64>`) and second derivatives
//! (`Dual<Dual<f64>>`).

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Real:
    Copy
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(c: f64) -> Self;
    /// The underlying real value (the 0th-order part).
    fn real(&self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn sqrt(self) -> Self;
    /// Power with a constant real exponent.
    fn powf(self, exponent: f64) -> Self;
    /// True when every component is finite.
    fn is_finite(&self) -> bool;

    /// General power `self^exponent` with a variable exponent.
    fn pow(self, exponent: Self) -> Self {
        (exponent * self.ln()).exp()
    }
}

impl Real for f64 {
    fn constant(c: f64) -> Self {
        c
    }
    fn real(&self) -> f64 {
        *self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powf(self, exponent: f64) -> Self {
        f64::powf(self, exponent)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn pow(self, exponent: Self) -> Self {
        f64::powf(self, exponent)
    }
}

/// `value + derivative·ε` with `ε² = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<T = f64> {
    pub value: T,
    pub derivative: T,
}

pub type DualScalar = Dual<f64>;

impl<T: Real> Dual<T> {
    pub fn new(value: T, derivative: T) -> Self {
        Dual { value, derivative }
    }

    /// The independent variable seeded with unit derivative.
    pub fn variable(value: T) -> Self {
        Dual {
            value,
            derivative: T::constant(1.0),
        }
    }

    fn chain(self, value: T, slope: T) -> Self {
        Dual {
            value,
            derivative: slope * self.derivative,
        }
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual::new(self.value + rhs.value, self.derivative + rhs.derivative)
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.value - rhs.value, self.derivative - rhs.derivative)
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Dual::new(
            self.value * rhs.value,
            self.derivative * rhs.value + self.value * rhs.derivative,
        )
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let value = self.value / rhs.value;
        Dual::new(
            value,
            (self.derivative - value * rhs.derivative) / rhs.value,
        )
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.value, -self.derivative)
    }
}

impl<T: Real> Real for Dual<T> {
    fn constant(c: f64) -> Self {
        Dual::new(T::constant(c), T::constant(0.0))
    }
    fn real(&self) -> f64 {
        self.value.real()
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.value.ln(), T::constant(1.0) / self.value)
    }
    fn sin(self) -> Self {
        self.chain(self.value.sin(), self.value.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.value.cos(), -self.value.sin())
    }
    fn sinh(self) -> Self {
        self.chain(self.value.sinh(), self.value.cosh())
    }
    fn cosh(self) -> Self {
        self.chain(self.value.cosh(), self.value.sinh())
    }
    fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, T::constant(0.5) / s)
    }
    fn powf(self, exponent: f64) -> Self {
        if exponent == 0.0 {
            return Self::constant(1.0);
        }
        let slope = T::constant(exponent) * self.value.powf(exponent - 1.0);
        self.chain(self.value.powf(exponent), slope)
    }
    fn is_finite(&self) -> bool {
        self.value.is_finite() && self.derivative.is_finite()
    }
}

/// Value and first derivative of `f` at `t`.
pub fn first_derivative<F>(f: F, t: f64) -> (f64, f64)
where
    F: FnOnce(Dual<f64>) -> Dual<f64>,
{
    let d = f(Dual::variable(t));
    (d.value, d.derivative)
}

/// Value, first and second derivative of `f` at `t` via nested duals.
pub fn second_derivative<F>(f: F, t: f64) -> (f64, f64, f64)
where
    F: FnOnce(Dual<Dual<f64>>) -> Dual<Dual<f64>>,
{
    let x = Dual::new(Dual::variable(t), Dual::new(1.0, 0.0));
    let d = f(x);
    (d.value.value, d.value.derivative, d.derivative.derivative)
}
