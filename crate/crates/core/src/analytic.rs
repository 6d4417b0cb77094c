//! Truncated bivariate Maclaurin series in `(σ, σ̄)` and their Fourier–radial
//! decomposition on annuli.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::Poly;

type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// `Σ c(k, ℓ) σ^k σ̄^ℓ` with finitely many terms.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateSeries {
    coeffs: BTreeMap<(u32, u32), C64>,
    degree_bound: u32,
    radius: f64,
}

impl BivariateSeries {
    /// Builds a series from `(k, ℓ, c)` terms. Repeated indices are summed and
    /// exact zeros are dropped. `radius` may be `f64::INFINITY`.
    pub fn new<I>(terms: I, radius: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32, C64)>,
    {
        if radius.is_nan() || radius <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "series radius must be positive, got {radius}"
            )));
        }
        let mut coeffs = BTreeMap::new();
        for (k, l, c) in terms {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "non-finite coefficient at ({k}, {l})"
                )));
            }
            *coeffs.entry((k, l)).or_insert(ZERO) += c;
        }
        coeffs.retain(|_, c: &mut C64| *c != ZERO);
        let degree_bound = coeffs.keys().map(|&(k, l)| k + l).max().unwrap_or(0);
        Ok(BivariateSeries {
            coeffs,
            degree_bound,
            radius,
        })
    }

    fn from_map(coeffs: BTreeMap<(u32, u32), C64>, degree_bound: u32, radius: f64) -> Self {
        let mut coeffs = coeffs;
        coeffs.retain(|_, c| *c != ZERO);
        let actual = coeffs.keys().map(|&(k, l)| k + l).max().unwrap_or(0);
        BivariateSeries {
            coeffs,
            degree_bound: degree_bound.max(actual),
            radius,
        }
    }

    pub fn zero() -> Self {
        Self::from_map(BTreeMap::new(), 0, f64::INFINITY)
    }

    pub fn constant(c: C64) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    /// `c σ^k σ̄^ℓ`.
    pub fn monomial(k: u32, l: u32, c: C64) -> Self {
        let mut m = BTreeMap::new();
        m.insert((k, l), c);
        Self::from_map(m, k + l, f64::INFINITY)
    }

    pub fn sigma() -> Self {
        Self::monomial(1, 0, ONE)
    }

    pub fn sigma_bar() -> Self {
        Self::monomial(0, 1, ONE)
    }

    /// `Σ_k c_k σ^k` from a list of holomorphic coefficients.
    pub fn holomorphic(coeffs: &[C64]) -> Self {
        let m = coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| ((k as u32, 0), c))
            .collect();
        Self::from_map(m, coeffs.len().saturating_sub(1) as u32, f64::INFINITY)
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn coeff(&self, k: u32, l: u32) -> C64 {
        self.coeffs.get(&(k, l)).copied().unwrap_or(ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, C64)> + '_ {
        self.coeffs.iter().map(|(&(k, l), &c)| (k, l, c))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree_bound(&self) -> u32 {
        self.degree_bound
    }

    /// Largest `k + ℓ` actually present.
    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(|&(k, l)| k + l).max().unwrap_or(0)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn value_at_zero(&self) -> C64 {
        self.coeff(0, 0)
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, sigma: C64) -> Result<C64> {
        if sigma.norm() > self.radius * (1.0 + 1e-12) {
            return Err(Error::domain(
                &[sigma.re, sigma.im],
                format!("|σ| = {} exceeds series radius {}", sigma.norm(), self.radius),
            ));
        }
        Ok(self.eval_unchecked(sigma))
    }

    /// Evaluation without the radius check.
    pub fn eval_unchecked(&self, sigma: C64) -> C64 {
        let d = self.degree() as usize;
        let mut pw = Vec::with_capacity(d + 1);
        let mut pwb = Vec::with_capacity(d + 1);
        let (mut a, mut b) = (ONE, ONE);
        for _ in 0..=d {
            pw.push(a);
            pwb.push(b);
            a *= sigma;
            b *= sigma.conj();
        }
        self.coeffs
            .iter()
            .map(|(&(k, l), &c)| c * pw[k as usize] * pwb[l as usize])
            .sum()
    }

    /// Pointwise complex conjugate: `c'(k, ℓ) = conj c(ℓ, k)`.
    pub fn conjugate(&self) -> Self {
        let m = self
            .coeffs
            .iter()
            .map(|(&(k, l), &c)| ((l, k), c.conj()))
            .collect();
        Self::from_map(m, self.degree_bound, self.radius)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut m = self.coeffs.clone();
        for (&key, &c) in &other.coeffs {
            *m.entry(key).or_insert(ZERO) += c;
        }
        Self::from_map(
            m,
            self.degree_bound.max(other.degree_bound),
            self.radius.min(other.radius),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-ONE))
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = self.coeffs.iter().map(|(&key, &c)| (key, c * s)).collect();
        Self::from_map(m, self.degree_bound, self.radius)
    }

    /// Cauchy product.
    pub fn mul(&self, other: &Self) -> Self {
        let mut m: BTreeMap<(u32, u32), C64> = BTreeMap::new();
        for (&(k1, l1), &a) in &self.coeffs {
            for (&(k2, l2), &b) in &other.coeffs {
                *m.entry((k1 + k2, l1 + l2)).or_insert(ZERO) += a * b;
            }
        }
        Self::from_map(
            m,
            self.degree_bound + other.degree_bound,
            self.radius.min(other.radius),
        )
    }

    pub fn pow(&self, p: u32) -> Self {
        let mut out = Self::one().with_radius(self.radius);
        for _ in 0..p {
            out = out.mul(self);
        }
        out
    }

    /// Multiplies by `σ^k`.
    pub fn mul_sigma_pow(&self, k: u32) -> Self {
        let m = self
            .coeffs
            .iter()
            .map(|(&(a, b), &c)| ((a + k, b), c))
            .collect();
        Self::from_map(m, self.degree_bound + k, self.radius)
    }

    /// Wirtinger derivative `∂/∂σ`.
    pub fn d_sigma(&self) -> Self {
        let m = self
            .coeffs
            .iter()
            .filter(|(&(k, _), _)| k > 0)
            .map(|(&(k, l), &c)| ((k - 1, l), c * k as f64))
            .collect();
        Self::from_map(m, self.degree_bound.saturating_sub(1), self.radius)
    }

    /// Wirtinger derivative `∂/∂σ̄`.
    pub fn d_sigma_bar(&self) -> Self {
        let m = self
            .coeffs
            .iter()
            .filter(|(&(_, l), _)| l > 0)
            .map(|(&(k, l), &c)| ((k, l - 1), c * l as f64))
            .collect();
        Self::from_map(m, self.degree_bound.saturating_sub(1), self.radius)
    }

    /// `∂/∂x` with `σ = x + iy`.
    pub fn d_x(&self) -> Self {
        self.d_sigma().add(&self.d_sigma_bar())
    }

    /// `∂/∂y` with `σ = x + iy`.
    pub fn d_y(&self) -> Self {
        self.d_sigma()
            .sub(&self.d_sigma_bar())
            .scale(C64::new(0.0, 1.0))
    }

    /// Coefficientwise comparison within `tol` (absolute).
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let keys: std::collections::BTreeSet<_> =
            self.coeffs.keys().chain(other.coeffs.keys()).collect();
        keys.into_iter()
            .all(|&(k, l)| (self.coeff(k, l) - other.coeff(k, l)).norm() <= tol)
    }

    /// Angular Fourier coefficient `η_k(f)(r) = r^{|k|} q(r²)`.
    pub fn eta(&self, k: i32) -> RadialFunction {
        let a = k.unsigned_abs();
        let (dk, dl) = if k >= 0 { (a, 0) } else { (0, a) };
        let mut q = Vec::new();
        for (&(p, l), &c) in &self.coeffs {
            if p >= dk && l >= dl && p - dk == l - dl {
                let idx = (l - dl) as usize;
                if q.len() <= idx {
                    q.resize(idx + 1, ZERO);
                }
                q[idx] += c;
            }
        }
        RadialFunction::new(a as i32, Poly::from_coeffs(q))
    }

    /// `ξ_k(f)(s) = η_k(f)(√s) s^{k/2}`, always a polynomial in `s`.
    pub fn xi(&self, k: i32) -> Poly {
        let rho = self.eta(k);
        rho.poly.shift_power(k.max(0) as usize)
    }

    /// Range of angular frequencies carrying nonzero components.
    pub fn angular_support(&self) -> Option<(i32, i32)> {
        let ks = self.coeffs.keys().map(|&(k, l)| k as i32 - l as i32);
        let lo = ks.clone().min()?;
        let hi = ks.max()?;
        Some((lo, hi))
    }

    /// Restriction to an annulus as a Fourier–radial function.
    pub fn to_fourier_radial(&self, r1: f64, r2: f64) -> Result<FourierRadialFunction> {
        let mut comps = BTreeMap::new();
        if let Some((lo, hi)) = self.angular_support() {
            for k in lo..=hi {
                let rho = self.eta(k);
                if !rho.poly.is_zero() {
                    comps.insert(k, rho);
                }
            }
        }
        FourierRadialFunction::new(comps, r1, r2)
    }

    /// Exact `L²` norm squared over the disk of radius `r`.
    pub fn norm_sq_disk(&self, r: f64) -> f64 {
        self.norm_sq_annulus(0.0, r)
    }

    /// Exact `L²` norm squared over `r1 ≤ |σ| ≤ r2` (`r1` may be 0).
    pub fn norm_sq_annulus(&self, r1: f64, r2: f64) -> f64 {
        let Some((lo, hi)) = self.angular_support() else {
            return 0.0;
        };
        let (s1, s2) = (r1 * r1, r2 * r2);
        let mut total = 0.0;
        for k in lo..=hi {
            let rho = self.eta(k);
            if rho.poly.is_zero() {
                continue;
            }
            // ∫ |q(s)|² s^{|k|} ds / 2
            let sq = &rho.poly.conj() * &rho.poly;
            total += 0.5 * sq.shift_power(k.unsigned_abs() as usize).integral(s1, s2).re;
        }
        2.0 * PI * total
    }
}

/// `ρ(r) = q(r²) r^e`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction {
    pub exponent: i32,
    pub poly: Poly,
}

impl RadialFunction {
    pub fn new(exponent: i32, poly: Poly) -> Self {
        RadialFunction { exponent, poly }
    }

    pub fn zero() -> Self {
        RadialFunction::new(0, Poly::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn eval(&self, r: f64) -> C64 {
        self.poly.eval(r * r) * r.powi(self.exponent)
    }

    /// Rewrites with the smaller exponent `e`, multiplying the polynomial by
    /// `s^{(self.exponent - e)/2}`.
    fn lowered_to(&self, e: i32) -> Result<Poly> {
        let diff = self.exponent - e;
        if diff < 0 || diff % 2 != 0 {
            return Err(Error::Parity(self.exponent, e));
        }
        Ok(self.poly.shift_power((diff / 2) as usize))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        let e = self.exponent.min(other.exponent);
        let p = &self.lowered_to(e)? + &other.lowered_to(e)?;
        Ok(RadialFunction::new(e, p))
    }

    pub fn mul(&self, other: &Self) -> Self {
        RadialFunction::new(self.exponent + other.exponent, &self.poly * &other.poly)
    }

    pub fn scale(&self, c: C64) -> Self {
        RadialFunction::new(self.exponent, self.poly.scale(c))
    }

    pub fn conj(&self) -> Self {
        RadialFunction::new(self.exponent, self.poly.conj())
    }

    /// Monomial-frame coefficients after normalizing to the lowest exponent
    /// that keeps the polynomial's constant term nonzero.
    pub fn canonical(&self) -> (i32, Vec<C64>) {
        if self.poly.is_zero() {
            return (0, Vec::new());
        }
        let c = self.poly.in_frame(crate::poly::Frame::MONOMIAL);
        let coeffs = c.coeffs();
        let lead = coeffs.iter().position(|x| *x != ZERO).unwrap_or(0);
        (
            self.exponent + 2 * lead as i32,
            coeffs[lead..].to_vec(),
        )
    }

    /// Equality as functions, comparing monomial coefficients within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let e = self.exponent.min(other.exponent);
        let (Ok(a), Ok(b)) = (self.lowered_to(e), other.lowered_to(e)) else {
            return self.poly.max_abs() <= tol && other.poly.max_abs() <= tol;
        };
        let d = (&a - &b).in_frame(crate::poly::Frame::MONOMIAL);
        d.max_abs() <= tol
    }

    /// `∫_{r1}^{r2} conj(self) · other · r dr`, exact when the combined
    /// power of `s` is nonnegative.
    pub fn radial_inner(&self, other: &Self, r1: f64, r2: f64) -> Result<C64> {
        let e = self.exponent + other.exponent;
        if e % 2 != 0 {
            return Err(Error::Parity(self.exponent, other.exponent));
        }
        let prod = &self.poly.conj() * &other.poly;
        Ok(0.5 * prod.integral_with_power(e / 2, r1 * r1, r2 * r2))
    }
}

/// `f(r, θ) = Σ_k ρ_k(r) e^{ikθ}` on `R1 ≤ r ≤ R2`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierRadialFunction {
    components: BTreeMap<i32, RadialFunction>,
    r1: f64,
    r2: f64,
}

impl FourierRadialFunction {
    pub fn new(components: BTreeMap<i32, RadialFunction>, r1: f64, r2: f64) -> Result<Self> {
        if !(r1 >= 0.0 && r1 < r2 && r2.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "annulus needs 0 <= R1 < R2 < inf, got ({r1}, {r2})"
            )));
        }
        let mut components = components;
        components.retain(|_, rho| !rho.is_zero());
        Ok(FourierRadialFunction { components, r1, r2 })
    }

    pub fn annulus(&self) -> (f64, f64) {
        (self.r1, self.r2)
    }

    pub fn components(&self) -> &BTreeMap<i32, RadialFunction> {
        &self.components
    }

    pub fn component(&self, k: i32) -> Option<&RadialFunction> {
        self.components.get(&k)
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.r1 && r <= self.r2
    }

    /// Value of the Fourier sum at polar coordinates (no support test).
    pub fn eval_polar(&self, r: f64, theta: f64) -> C64 {
        self.components
            .iter()
            .map(|(&k, rho)| rho.eval(r) * C64::from_polar(1.0, k as f64 * theta))
            .sum()
    }

    /// Value of the zero extension to the whole plane.
    pub fn eval_extended(&self, sigma: C64) -> C64 {
        let r = sigma.norm();
        if self.contains(r) {
            self.eval_polar(r, sigma.arg())
        } else {
            ZERO
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        FourierRadialFunction {
            components: self
                .components
                .iter()
                .map(|(&k, rho)| (k, rho.scale(c)))
                .collect(),
            r1: self.r1,
            r2: self.r2,
        }
    }

    pub fn conj(&self) -> Self {
        FourierRadialFunction {
            components: self
                .components
                .iter()
                .map(|(&k, rho)| (-k, rho.conj()))
                .collect(),
            r1: self.r1,
            r2: self.r2,
        }
    }

    /// Product with a series restricted to the annulus.
    pub fn mul_series(&self, g: &BivariateSeries) -> Result<Self> {
        let mut out: BTreeMap<i32, RadialFunction> = BTreeMap::new();
        let Some((lo, hi)) = g.angular_support() else {
            return FourierRadialFunction::new(out, self.r1, self.r2);
        };
        for (&j, rho) in &self.components {
            for l in lo..=hi {
                let eta = g.eta(l);
                if eta.is_zero() {
                    continue;
                }
                let term = rho.mul(&eta);
                let slot = out.entry(j + l).or_insert_with(RadialFunction::zero);
                *slot = slot.add(&term)?;
            }
        }
        FourierRadialFunction::new(out, self.r1, self.r2)
    }

    /// `⟨self, g⟩` over the annulus with `g` a series.
    pub fn inner_series(&self, g: &BivariateSeries) -> Result<C64> {
        let mut acc = ZERO;
        for (&k, rho) in &self.components {
            let eta = g.eta(k);
            if eta.is_zero() {
                continue;
            }
            acc += rho.radial_inner(&eta, self.r1, self.r2)?;
        }
        Ok(2.0 * PI * acc)
    }

    /// `⟨self, other⟩` over the common annulus.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        let mut acc = ZERO;
        for (k, rho) in &self.components {
            if let Some(sigma) = other.components.get(k) {
                acc += rho.radial_inner(sigma, self.r1, self.r2)?;
            }
        }
        Ok(2.0 * PI * acc)
    }

    pub fn norm(&self) -> Result<f64> {
        Ok(self.inner(self)?.re.max(0.0).sqrt())
    }
}
