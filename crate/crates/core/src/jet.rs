//! Second-order truncated Taylor arithmetic in two variables.
//!
//! A [`Jet2`] carries a value together with its first and second partial
//! derivatives in the chart variables `(u, v)`. Arithmetic propagates the
//! chain rule exactly, so derivatives of composite expressions are exact up
//! to rounding.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet2 {
    pub val: f64,
    pub du: f64,
    pub dv: f64,
    pub duu: f64,
    pub duv: f64,
    pub dvv: f64,
}

impl Jet2 {
    pub const fn new(val: f64, du: f64, dv: f64, duu: f64, duv: f64, dvv: f64) -> Self {
        Self { val, du, dv, duu, duv, dvv }
    }

    pub const fn constant(val: f64) -> Self {
        Self::new(val, 0.0, 0.0, 0.0, 0.0, 0.0)
    }

    /// The coordinate function `u` seeded at `u`.
    pub const fn var_u(u: f64) -> Self {
        Self::new(u, 1.0, 0.0, 0.0, 0.0, 0.0)
    }

    /// The coordinate function `v` seeded at `v`.
    pub const fn var_v(v: f64) -> Self {
        Self::new(v, 0.0, 1.0, 0.0, 0.0, 0.0)
    }

    /// Composes a scalar function with this jet given `f(x)`, `f'(x)`, `f''(x)`
    /// at `x = self.val`.
    #[inline]
    pub fn compose(self, f: f64, df: f64, d2f: f64) -> Self {
        Self {
            val: f,
            du: df * self.du,
            dv: df * self.dv,
            duu: d2f * self.du * self.du + df * self.duu,
            duv: d2f * self.du * self.dv + df * self.duv,
            dvv: d2f * self.dv * self.dv + df * self.dvv,
        }
    }

    #[inline]
    pub fn sin(self) -> Self {
        let (s, c) = self.val.sin_cos();
        self.compose(s, c, -s)
    }

    #[inline]
    pub fn cos(self) -> Self {
        let (s, c) = self.val.sin_cos();
        self.compose(c, -s, -c)
    }

    #[inline]
    pub fn sqrt(self) -> Self {
        let r = self.val.sqrt();
        self.compose(r, 0.5 / r, -0.25 / (r * self.val))
    }

    #[inline]
    pub fn recip(self) -> Self {
        let r = 1.0 / self.val;
        self.compose(r, -r * r, 2.0 * r * r * r)
    }

    #[inline]
    pub fn scale(self, k: f64) -> Self {
        Self {
            val: k * self.val,
            du: k * self.du,
            dv: k * self.dv,
            duu: k * self.duu,
            duv: k * self.duv,
            dvv: k * self.dvv,
        }
    }
}

impl Add for Jet2 {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self {
            val: self.val + o.val,
            du: self.du + o.du,
            dv: self.dv + o.dv,
            duu: self.duu + o.duu,
            duv: self.duv + o.duv,
            dvv: self.dvv + o.dvv,
        }
    }
}

impl AddAssign for Jet2 {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for Jet2 {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for Jet2 {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self {
            val: self.val * o.val,
            du: self.du * o.val + self.val * o.du,
            dv: self.dv * o.val + self.val * o.dv,
            duu: self.duu * o.val + 2.0 * self.du * o.du + self.val * o.duu,
            duv: self.duv * o.val + self.du * o.dv + self.dv * o.du + self.val * o.duv,
            dvv: self.dvv * o.val + 2.0 * self.dv * o.dv + self.val * o.dvv,
        }
    }
}

impl Mul<f64> for Jet2 {
    type Output = Self;
    #[inline]
    fn mul(self, k: f64) -> Self {
        self.scale(k)
    }
}

impl Div for Jet2 {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn product_rule_matches_closed_form() {
        // f = u^2 v^3
        let (u, v) = (1.3, -0.7);
        let uu = Jet2::var_u(u);
        let vv = Jet2::var_v(v);
        let f = uu * uu * vv * vv * vv;
        assert!(close(f.val, u * u * v * v * v, 1e-15));
        assert!(close(f.du, 2.0 * u * v.powi(3), 1e-15));
        assert!(close(f.dv, 3.0 * u * u * v * v, 1e-15));
        assert!(close(f.duu, 2.0 * v.powi(3), 1e-15));
        assert!(close(f.duv, 6.0 * u * v * v, 1e-15));
        assert!(close(f.dvv, 6.0 * u * u * v, 1e-15));
    }

    #[test]
    fn quotient_and_sqrt() {
        // f = sqrt(1 + u^2 v^2) / (2 + sin(u + v))
        let (u, v) = (0.4, 1.1);
        let uu = Jet2::var_u(u);
        let vv = Jet2::var_v(v);
        let f = (Jet2::constant(1.0) + uu * uu * vv * vv).sqrt()
            / (Jet2::constant(2.0) + (uu + vv).sin());
        let g = |u: f64, v: f64| (1.0 + u * u * v * v).sqrt() / (2.0 + (u + v).sin());
        let h = 1e-4;
        let fd_du = (g(u + h, v) - g(u - h, v)) / (2.0 * h);
        let fd_uv = (g(u + h, v + h) - g(u + h, v - h) - g(u - h, v + h) + g(u - h, v - h))
            / (4.0 * h * h);
        let fd_vv = (g(u, v + h) - 2.0 * g(u, v) + g(u, v - h)) / (h * h);
        assert!(close(f.val, g(u, v), 1e-15));
        assert!(close(f.du, fd_du, 1e-8));
        assert!(close(f.duv, fd_uv, 1e-6));
        assert!(close(f.dvv, fd_vv, 1e-6));
    }
}
