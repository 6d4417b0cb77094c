//! Complex polynomials in one real variable `s`.
//!
//! A polynomial carries an affine [`Frame`]: its coefficients multiply powers
//! of the local variable `t = (s - origin) / scale`. Polynomials that live on
//! a short interval far from the origin (the orthonormal bases on
//! `[R1², R2²]`) keep well-scaled coefficients in the interval's own frame,
//! while data coming from Maclaurin series stay in the plain monomial frame.
//! Mixed arithmetic converts the monomial operand into the other frame, which
//! only ever adds positive multiples and so does not cancel.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::quadrature::GaussRule;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub origin: f64,
    pub scale: f64,
}

impl Frame {
    pub const MONOMIAL: Frame = Frame {
        origin: 0.0,
        scale: 1.0,
    };

    /// Frame mapping `[a, b]` onto `[-1, 1]`.
    pub fn for_interval(a: f64, b: f64) -> Frame {
        Frame {
            origin: 0.5 * (a + b),
            scale: 0.5 * (b - a),
        }
    }

    #[inline]
    pub fn local(&self, s: f64) -> f64 {
        (s - self.origin) / self.scale
    }

    pub fn is_monomial(&self) -> bool {
        *self == Frame::MONOMIAL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    frame: Frame,
    coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly {
            frame: Frame::MONOMIAL,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(c: Complex64) -> Self {
        Poly::from_coeffs(vec![c])
    }

    /// `c · s^power` in the monomial frame.
    pub fn monomial(power: usize, c: Complex64) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); power + 1];
        coeffs[power] = c;
        Poly::from_coeffs(coeffs)
    }

    /// Coefficients of `1, s, s², …`.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        Poly::with_frame(Frame::MONOMIAL, coeffs)
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly::from_coeffs(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn with_frame(frame: Frame, coeffs: Vec<Complex64>) -> Self {
        let mut p = Poly { frame, coeffs };
        p.trim_exact();
        p
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn trim_exact(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.re == 0.0 && c.im == 0.0) {
            self.coeffs.pop();
        }
    }

    /// Drops coefficients whose magnitude is at most `tol`.
    pub fn pruned(&self, tol: f64) -> Poly {
        let coeffs = self
            .coeffs
            .iter()
            .map(|&c| if c.norm() <= tol { Complex64::new(0.0, 0.0) } else { c })
            .collect();
        Poly::with_frame(self.frame, coeffs)
    }

    pub fn eval(&self, s: f64) -> Complex64 {
        let t = self.frame.local(s);
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * t + c)
    }

    /// The same polynomial expressed in `frame`.
    pub fn in_frame(&self, frame: Frame) -> Poly {
        if frame == self.frame {
            return self.clone();
        }
        // old local variable = alpha + beta * new local variable
        let alpha = (frame.origin - self.frame.origin) / self.frame.scale;
        let beta = frame.scale / self.frame.scale;
        let mut out: Vec<Complex64> = Vec::with_capacity(self.coeffs.len());
        for &c in self.coeffs.iter().rev() {
            // out <- out * (alpha + beta t) + c
            let mut next = vec![Complex64::new(0.0, 0.0); out.len() + 1];
            for (j, &o) in out.iter().enumerate() {
                next[j] += o * alpha;
                next[j + 1] += o * beta;
            }
            next[0] += c;
            out = next;
        }
        Poly::with_frame(frame, out)
    }

    fn common_frame(&self, other: &Poly) -> Frame {
        if self.frame.is_monomial() {
            other.frame
        } else {
            self.frame
        }
    }

    pub fn conj(&self) -> Poly {
        Poly::with_frame(self.frame, self.coeffs.iter().map(|c| c.conj()).collect())
    }

    pub fn scale(&self, c: Complex64) -> Poly {
        Poly::with_frame(self.frame, self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// Multiplies by `s^power`.
    pub fn shift_power(&self, power: usize) -> Poly {
        if power == 0 {
            return self.clone();
        }
        self * &Poly::monomial(power, Complex64::new(1.0, 0.0))
    }

    /// Exact `∫_a^b p(s) ds`.
    pub fn integral(&self, a: f64, b: f64) -> Complex64 {
        let ta = self.frame.local(a);
        let tb = self.frame.local(b);
        let mut pa = ta;
        let mut pb = tb;
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &c) in self.coeffs.iter().enumerate() {
            acc += c * ((pb - pa) / (j as f64 + 1.0));
            pa *= ta;
            pb *= tb;
        }
        acc * self.frame.scale
    }

    /// `∫_a^b p(s) s^power ds` for `0 < a < b`.
    ///
    /// Nonnegative powers are integrated exactly. Negative powers use a
    /// Gauss–Legendre rule sized for the polynomial degree plus a margin that
    /// drives the error to rounding level when `a` is bounded away from 0.
    pub fn integral_with_power(&self, power: i32, a: f64, b: f64) -> Complex64 {
        if power >= 0 {
            return self.shift_power(power as usize).integral(a, b);
        }
        let n = self.coeffs.len() + 64;
        GaussRule::new(n).integrate(a, b, |s| self.eval(s) * s.powi(power))
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let frame = self.common_frame(rhs);
        let a = self.in_frame(frame);
        let b = rhs.in_frame(frame);
        let n = a.coeffs.len().max(b.coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        let coeffs = (0..n)
            .map(|j| *a.coeffs.get(j).unwrap_or(&zero) + *b.coeffs.get(j).unwrap_or(&zero))
            .collect();
        Poly::with_frame(frame, coeffs)
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let frame = self.common_frame(rhs);
        let a = self.in_frame(frame);
        let b = rhs.in_frame(frame);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); a.coeffs.len() + b.coeffs.len() - 1];
        for (i, &x) in a.coeffs.iter().enumerate() {
            for (j, &y) in b.coeffs.iter().enumerate() {
                coeffs[i + j] += x * y;
            }
        }
        Poly::with_frame(frame, coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn frame_conversion_preserves_values() {
        let p = Poly::from_real(&[1.0, -2.0, 0.5, 3.0]);
        let q = p.in_frame(Frame::for_interval(0.49, 0.64));
        for s in [0.3, 0.49, 0.5, 0.64, 1.7] {
            assert!((p.eval(s) - q.eval(s)).norm() < 1e-12);
        }
        let back = q.in_frame(Frame::MONOMIAL);
        for (x, y) in back.coeffs().iter().zip(p.coeffs()) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn integral_of_monomials() {
        let p = Poly::monomial(2, c(3.0));
        assert!((p.integral(0.0, 2.0) - c(8.0)).norm() < 1e-14);
        let framed = p.in_frame(Frame::for_interval(1.0, 2.0));
        assert!((framed.integral(0.0, 2.0) - c(8.0)).norm() < 1e-12);
    }

    #[test]
    fn negative_power_integral_matches_log() {
        let one = Poly::constant(c(1.0));
        let v = one.integral_with_power(-1, 0.49, 0.64);
        assert!((v.re - (0.64f64 / 0.49).ln()).abs() < 1e-14);
        let s = Poly::monomial(1, c(1.0));
        let w = s.integral_with_power(-3, 0.5, 2.0);
        // ∫ s^-2 = 1/0.5 - 1/2
        assert!((w.re - 1.5).abs() < 1e-13);
    }

    #[test]
    fn products_across_frames() {
        let f = Frame::for_interval(2.0, 3.0);
        let p = Poly::with_frame(f, vec![c(1.0), c(1.0)]);
        let q = Poly::from_real(&[0.0, 1.0]);
        let r = &p * &q;
        assert_eq!(r.frame(), f);
        for s in [2.0, 2.25, 3.0] {
            assert!((r.eval(s) - p.eval(s) * s).norm() < 1e-12);
        }
    }
}
