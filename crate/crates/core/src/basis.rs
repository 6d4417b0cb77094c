//! Orthonormal shifted Legendre polynomials on `[s1, s2]`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::{Frame, Poly};

#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    s1: f64,
    s2: f64,
    polys: Vec<Poly>,
}

/// `p_0 … p_n` with `p_n(s) = sqrt((2n+1)/(s2-s1)) P_n((2s-s1-s2)/(s2-s1))`.
///
/// Coefficients are stored in the frame of the interval, where they are those
/// of the scaled Legendre polynomials themselves.
pub fn build_basis(s1: f64, s2: f64, n: usize) -> Result<OrthonormalBasis> {
    if !(s1.is_finite() && s2.is_finite()) || s1 < 0.0 || s1 >= s2 {
        return Err(Error::domain(
            &[s1, s2],
            "basis interval needs 0 <= s1 < s2",
        ));
    }
    let frame = Frame::for_interval(s1, s2);
    let len = s2 - s1;
    // classical Legendre in the local variable t
    let mut legendre: Vec<Vec<f64>> = vec![vec![1.0]];
    if n >= 1 {
        legendre.push(vec![0.0, 1.0]);
    }
    for k in 1..n {
        let (pk, pkm1) = (&legendre[k], &legendre[k - 1]);
        let mut next = vec![0.0; k + 2];
        for (j, &c) in pk.iter().enumerate() {
            next[j + 1] += (2 * k + 1) as f64 * c;
        }
        for (j, &c) in pkm1.iter().enumerate() {
            next[j] -= k as f64 * c;
        }
        for c in &mut next {
            *c /= (k + 1) as f64;
        }
        legendre.push(next);
    }
    let polys = legendre
        .into_iter()
        .enumerate()
        .map(|(k, coeffs)| {
            let norm = ((2 * k + 1) as f64 / len).sqrt();
            Poly::with_frame(
                frame,
                coeffs.into_iter().map(|c| Complex64::new(c * norm, 0.0)).collect(),
            )
        })
        .collect();
    Ok(OrthonormalBasis { s1, s2, polys })
}

/// `∫_{s1}^{s2} conj(p) q ds`, evaluated exactly.
pub fn inner(p: &Poly, q: &Poly, s1: f64, s2: f64) -> Complex64 {
    (&p.conj() * q).integral(s1, s2)
}

impl OrthonormalBasis {
    pub fn interval(&self) -> (f64, f64) {
        (self.s1, self.s2)
    }

    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }

    pub fn get(&self, n: usize) -> Option<&Poly> {
        self.polys.get(n)
    }

    /// Highest index `N`.
    pub fn order(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn inner(&self, p: &Poly, q: &Poly) -> Complex64 {
        inner(p, q, self.s1, self.s2)
    }

    /// `⟨p_n, q⟩` for every `n`.
    pub fn coefficients(&self, q: &Poly) -> Vec<Complex64> {
        self.polys.iter().map(|p| self.inner(p, q)).collect()
    }

    /// `Σ_n ⟨p_n, q⟩ p_n`.
    pub fn project(&self, q: &Poly) -> Poly {
        self.coefficients(q)
            .iter()
            .zip(&self.polys)
            .fold(Poly::zero(), |acc, (&c, p)| &acc + &p.scale(c))
    }

    pub fn gram(&self) -> Vec<Vec<Complex64>> {
        self.polys
            .iter()
            .map(|p| self.polys.iter().map(|q| self.inner(p, q)).collect())
            .collect()
    }
}
