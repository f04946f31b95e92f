//! Value, gradient and Laplacian of a scalar field at a point, with the product
//! and chain rules needed to differentiate the benchmark formulas by hand.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; 2],
    pub lap: f64,
}

impl Jet {
    pub const fn constant(v: f64) -> Self {
        Self { v, g: [0.0, 0.0], lap: 0.0 }
    }

    pub const fn x(x: f64) -> Self {
        Self { v: x, g: [1.0, 0.0], lap: 0.0 }
    }

    pub const fn y(y: f64) -> Self {
        Self { v: y, g: [0.0, 1.0], lap: 0.0 }
    }

    fn grad_sq(&self) -> f64 {
        self.g[0] * self.g[0] + self.g[1] * self.g[1]
    }

    /// `F(self)` for a scalar function with derivatives `d1`, `d2` at `self.v`.
    fn compose(self, f: f64, d1: f64, d2: f64) -> Self {
        Self { v: f, g: [d1 * self.g[0], d1 * self.g[1]], lap: d1 * self.lap + d2 * self.grad_sq() }
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose(c, -s, -c)
    }

    pub fn powi(self, n: i32) -> Self {
        let nf = f64::from(n);
        let d1 = if n == 0 { 0.0 } else { nf * self.v.powi(n - 1) };
        let d2 = if n < 2 { 0.0 } else { nf * (nf - 1.0) * self.v.powi(n - 2) };
        self.compose(self.v.powi(n), d1, d2)
    }

    pub fn scale(self, s: f64) -> Self {
        Self { v: s * self.v, g: [s * self.g[0], s * self.g[1]], lap: s * self.lap }
    }

    /// `(x^2 + y^2)^{3/2}`, which is `C^2` through the origin.
    pub fn radius_cubed(x: f64, y: f64) -> Self {
        let r = x.hypot(y);
        Self { v: r * r * r, g: [3.0 * r * x, 3.0 * r * y], lap: 9.0 * r }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet { v: self.v + o.v, g: [self.g[0] + o.g[0], self.g[1] + o.g[1]], lap: self.lap + o.lap }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            g: [self.g[0] * o.v + self.v * o.g[0], self.g[1] * o.v + self.v * o.g[1]],
            lap: self.lap * o.v + 2.0 * (self.g[0] * o.g[0] + self.g[1] * o.g[1]) + self.v * o.lap,
        }
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        Jet { v: self.v + c, ..self }
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, c: f64) -> Jet {
        self + (-c)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        self.scale(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_on_polynomial() {
        // (x y)^2 = x^2 y^2: gradient (2 x y^2, 2 x^2 y), Laplacian 2 y^2 + 2 x^2.
        let (x, y) = (0.7, -1.3);
        let j = (Jet::x(x) * Jet::y(y)).powi(2);
        assert!((j.v - (x * y).powi(2)).abs() < 1e-14);
        assert!((j.g[0] - 2.0 * x * y * y).abs() < 1e-14);
        assert!((j.g[1] - 2.0 * x * x * y).abs() < 1e-14);
        assert!((j.lap - 2.0 * (x * x + y * y)).abs() < 1e-14);
    }

    #[test]
    fn sine_of_product() {
        // Laplacian of sin(x y) is -(x^2 + y^2) sin(x y).
        let (x, y) = (0.4, 0.9);
        let j = (Jet::x(x) * Jet::y(y)).sin();
        assert!((j.lap + (x * x + y * y) * (x * y).sin()).abs() < 1e-14);
    }

    #[test]
    fn radius_cubed_matches_general_rule() {
        let (x, y) = (0.3, -0.45);
        let r2 = Jet::x(x).powi(2) + Jet::y(y).powi(2);
        let direct = Jet::radius_cubed(x, y);
        // r^3 = (r^2)^{3/2}: d1 = 1.5 sqrt(r^2), d2 = 0.75 / sqrt(r^2)
        let s = r2.v.sqrt();
        let via_chain = r2.compose(s * s * s, 1.5 * s, 0.75 / s);
        assert!((direct.v - via_chain.v).abs() < 1e-14);
        assert!((direct.lap - via_chain.lap).abs() < 1e-13);
        assert!((direct.g[0] - via_chain.g[0]).abs() < 1e-14);
    }
}
