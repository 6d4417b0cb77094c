//! Construction and verification of obstruction witnesses for normal forms
//! `ẋ = σx + Σ b_i(σ) u_i` on a closed disk.
//!
//! The witness `f0` lives on an annulus `R1 ≤ |σ| ≤ R2` inside the disk and is
//! orthogonal to every `b_i σ^k`. Extended by zero it is a nonzero element of
//! the orthogonal complement of the controllable subspace.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::{BivariateSeries, FourierRadialFunction, RadialFunction};
use crate::basis::{build_basis, OrthonormalBasis};
use crate::error::{Error, Result};
use crate::laurent::{self, LaurentPoly};
use crate::poly::{Frame, Poly};

type C64 = Complex64;

/// Default residual tolerance relative to `‖f0‖ · ‖b_i σ^k‖`.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Default number of powers `σ^k` in the residual table.
pub const DEFAULT_K_MAX: u32 = 25;

/// Threshold below which `b_i(0)` counts as vanishing.
const REGULARIZE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusConfig {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "R1")]
    pub r1: f64,
    #[serde(rename = "R2")]
    pub r2: f64,
}

impl AnnulusConfig {
    pub fn s1(&self) -> f64 {
        self.r1 * self.r1
    }

    pub fn s2(&self) -> f64 {
        self.r2 * self.r2
    }
}

/// `R1 = 0.7 R`, `R2 = 0.8 R`, so that `R · R1 > R2²`.
pub fn select_annulus(r: f64) -> Result<AnnulusConfig> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "disk radius must be positive and finite, got {r}"
        )));
    }
    Ok(AnnulusConfig {
        r,
        r1: 0.7 * r,
        r2: 0.8 * r,
    })
}

/// Prepends the constant `1` and adds it to every input vanishing at the
/// origin. The returned radius is the smallest of `r` and the declared radii.
pub fn regularize(b: &[BivariateSeries], r: f64) -> (Vec<BivariateSeries>, f64) {
    let one = BivariateSeries::one();
    let mut out = vec![one.clone()];
    let mut radius = r;
    for g in b {
        radius = radius.min(g.radius());
        if g.value_at_zero().norm() < REGULARIZE_EPS {
            out.push(g.add(&one));
        } else {
            out.push(g.clone());
        }
    }
    (out, radius)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ResidualEntry {
    /// 0 is the constant input added by regularization; `i ≥ 1` is the
    /// caller's `b_i`.
    pub input: usize,
    pub k: u32,
    /// `|⟨f0, b_i σ^k⟩|`.
    pub value: f64,
    /// `value / (‖f0‖ · ‖b_i σ^k‖)`, or 0 when `b_i σ^k` vanishes.
    pub relative: f64,
}

#[derive(Debug, Clone)]
pub struct WitnessCertificate {
    pub config: AnnulusConfig,
    pub f0: FourierRadialFunction,
    pub f0_norm: f64,
    pub residuals: Vec<ResidualEntry>,
    pub k_max: u32,
    /// `(n, k, α_{n,k})`: Laurent coefficients of `ψ_n`.
    pub alpha: Vec<(usize, i32, C64)>,
    /// Regularized inputs left out of the null-vector minors (0 = constant).
    pub dropped_inputs: Vec<usize>,
    /// `(duplicate, kept)` pairs of regularized inputs merged before assembly.
    pub duplicates: Vec<(usize, usize)>,
    pub tolerance: f64,
    /// Largest coefficient of `Σ_n φ_n(ḡ_i) ψ_n` over all rows, relative to
    /// `Σ_n |φ_n(ḡ_i)|₁ · max_n |ψ_n|₁`.
    pub null_identity_residual: f64,
    /// `max_n ‖ψ_n‖` (coefficient 2-norm).
    pub psi_scale: f64,
}

impl WitnessCertificate {
    pub fn max_relative_residual(&self) -> f64 {
        self.residuals.iter().map(|e| e.relative).fold(0.0, f64::max)
    }

    /// Residual table within tolerance, nonzero witness, exact null identity.
    pub fn is_sound(&self) -> bool {
        self.f0_norm > 0.0
            && self.max_relative_residual() <= self.tolerance
            && self.null_identity_residual <= self.tolerance
    }
}

#[derive(Debug, Clone)]
pub struct WitnessOptions {
    pub k_max: u32,
    pub tolerance: f64,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        WitnessOptions {
            k_max: DEFAULT_K_MAX,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

/// Builds `f0` for the inputs `b` on the disk of radius `r`.
pub fn build_witness(b: &[BivariateSeries], r: f64, k_max: u32) -> Result<WitnessCertificate> {
    build_witness_with(
        b,
        r,
        &WitnessOptions {
            k_max,
            ..WitnessOptions::default()
        },
    )
}

pub fn build_witness_with(
    b: &[BivariateSeries],
    r: f64,
    opts: &WitnessOptions,
) -> Result<WitnessCertificate> {
    let (regs, r_eff) = regularize(b, r);
    let config = select_annulus(r_eff)?;

    let mut kept: Vec<usize> = Vec::new();
    let mut duplicates = Vec::new();
    for (i, g) in regs.iter().enumerate() {
        match kept.iter().find(|&&j| regs[j] == *g) {
            Some(&j) => duplicates.push((i, j)),
            None => kept.push(i),
        }
    }
    let m = kept.len();
    let basis = build_basis(config.s1(), config.s2(), m)?;
    let phi_m: Vec<Vec<LaurentPoly>> = kept
        .iter()
        .map(|&i| {
            let g = regs[i].conjugate();
            (0..=m).map(|n| laurent::phi(&g, n, &basis)).collect()
        })
        .collect::<Result<_>>()?;

    let (psi, dropped_rows) = match laurent::cofactor_nullvector(&phi_m) {
        Ok(psi) => (psi, Vec::new()),
        Err(Error::Degenerate { .. }) => {
            let sel = laurent::select_independent(&phi_m)?;
            let psi = laurent::nullvector_from_selection(&phi_m, &sel)?;
            let dropped: Vec<usize> = (0..m).filter(|i| !sel.rows.contains(i)).collect();
            (psi, dropped)
        }
        Err(e) => return Err(e),
    };
    let dropped_inputs: Vec<usize> = dropped_rows.iter().map(|&i| kept[i]).collect();

    let null_identity_residual = laurent::null_residual(&phi_m, &psi)
        .iter()
        .map(|(res, scale)| if *scale > 0.0 { res.max_abs() / scale } else { 0.0 })
        .fold(0.0, f64::max);
    if null_identity_residual > opts.tolerance {
        return Err(Error::Degenerate {
            dependent: dropped_inputs,
        });
    }

    let f0 = assemble_f0(&psi, &basis, &config)?;
    let f0_norm = f0.norm()?;
    let psi_scale = psi
        .iter()
        .map(|p| p.terms().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    if !(f0_norm > 0.0) {
        return Err(Error::Degenerate {
            dependent: dropped_inputs,
        });
    }

    let mut inputs = vec![BivariateSeries::one()];
    inputs.extend(b.iter().cloned());
    let mut residuals = Vec::new();
    for (i, g) in inputs.iter().enumerate() {
        for k in 0..=opts.k_max {
            let target = g.mul_sigma_pow(k);
            let value = verify_orthogonality(&f0, &target, 0)?;
            let norm = target.norm_sq_annulus(config.r1, config.r2).sqrt();
            let relative = if norm > 0.0 { value / (f0_norm * norm) } else { 0.0 };
            residuals.push(ResidualEntry {
                input: i,
                k,
                value,
                relative,
            });
        }
    }

    let alpha = psi
        .iter()
        .enumerate()
        .flat_map(|(n, p)| p.terms().map(move |(k, c)| (n, k, c)).collect::<Vec<_>>())
        .collect();

    Ok(WitnessCertificate {
        config,
        f0,
        f0_norm,
        residuals,
        k_max: opts.k_max,
        alpha,
        dropped_inputs,
        duplicates,
        tolerance: opts.tolerance,
        null_identity_residual,
        psi_scale,
    })
}

/// `ρ_k(r) = Σ_n α_{n,-k} p_n(r²) r^{-k}`.
fn assemble_f0(
    psi: &[LaurentPoly],
    basis: &OrthonormalBasis,
    config: &AnnulusConfig,
) -> Result<FourierRadialFunction> {
    let mut comps: BTreeMap<i32, Poly> = BTreeMap::new();
    for (n, p) in psi.iter().enumerate() {
        for (j, alpha) in p.terms() {
            let slot = comps.entry(-j).or_insert_with(Poly::zero);
            *slot = &*slot + &basis.polys()[n].scale(alpha);
        }
    }
    let comps = comps
        .into_iter()
        .map(|(k, q)| (k, RadialFunction::new(-k, q)))
        .collect();
    FourierRadialFunction::new(comps, config.r1, config.r2)
}

/// `|⟨f0, g σ^k⟩|` over the annulus of `f0`, by exact radial integration.
pub fn verify_orthogonality(f0: &FourierRadialFunction, g: &BivariateSeries, k: u32) -> Result<f64> {
    Ok(f0.inner_series(&g.mul_sigma_pow(k))?.norm())
}

/// `Σ_ℓ ⟨ξ̄_ℓ(f0), ξ_{k-ℓ}(ḡ)⟩` for one `k`.
pub fn null_condition_sum(f0: &FourierRadialFunction, g: &BivariateSeries, k: i32) -> Result<C64> {
    let (r1, r2) = f0.annulus();
    let gb = g.conjugate();
    let mut acc = C64::new(0.0, 0.0);
    for (&l, rho) in f0.components() {
        let xg = gb.xi(k - l);
        if xg.is_zero() {
            continue;
        }
        // ξ_ℓ(f0)(s) = q(s) s^{(e + ℓ)/2}
        let e = rho.exponent + l;
        if e % 2 != 0 {
            return Err(Error::Parity(rho.exponent, l));
        }
        acc += (&rho.poly * &xg).integral_with_power(e / 2, r1 * r1, r2 * r2);
    }
    Ok(acc)
}

/// `max_{0 ≤ k ≤ k_max} |Σ_ℓ ⟨ξ̄_ℓ(f0), ξ_{k-ℓ}(ḡ)⟩|`.
///
/// Equals `|⟨f0, g σ^k⟩| / π`, the radial moment identity behind the
/// null condition.
pub fn null_condition_check(f0: &FourierRadialFunction, g: &BivariateSeries, k_max: u32) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..=k_max as i32 {
        worst = worst.max(null_condition_sum(f0, g, k)?.norm());
    }
    Ok(worst)
}

/// Scale factor between [`verify_orthogonality`] and the null-condition sum.
pub const ROUTE_FACTOR: f64 = PI;

/// `|⟨f̃0, target⟩| / ‖f0‖`: a lower bound on the `L²` distance from
/// `target` to the controllable subspace.
pub fn extend_and_bound(cert: &WitnessCertificate, target: &BivariateSeries) -> Result<f64> {
    Ok(cert.f0.inner_series(target)?.norm() / cert.f0_norm)
}

/// Same bound for a target given on the annulus as a Fourier–radial function
/// (only its values on the annulus matter).
pub fn extend_and_bound_radial(
    cert: &WitnessCertificate,
    target: &FourierRadialFunction,
) -> Result<f64> {
    Ok(cert.f0.inner(target)?.norm() / cert.f0_norm)
}

/// Serialized certificate layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateJson {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "R1")]
    pub r1: f64,
    #[serde(rename = "R2")]
    pub r2: f64,
    /// `[n, k, re, im]`.
    pub alpha: Vec<(usize, i32, f64, f64)>,
    /// `[k, exponent, [[re, im], …]]` with plain coefficients of `1, s, s², …`.
    pub f0: Vec<(i32, i32, Vec<[f64; 2]>)>,
    pub f0_norm: f64,
    /// `[i, k, value]`.
    pub residuals: Vec<(usize, u32, f64)>,
    pub dropped_inputs: Vec<usize>,
    pub tolerance: f64,
    #[serde(default)]
    pub k_max: u32,
    #[serde(default)]
    pub max_relative_residual: f64,
    #[serde(default)]
    pub null_identity_residual: f64,
    #[serde(default)]
    pub duplicates: Vec<(usize, usize)>,
}

impl From<&WitnessCertificate> for CertificateJson {
    fn from(c: &WitnessCertificate) -> Self {
        CertificateJson {
            r: c.config.r,
            r1: c.config.r1,
            r2: c.config.r2,
            alpha: c.alpha.iter().map(|&(n, k, a)| (n, k, a.re, a.im)).collect(),
            f0: c
                .f0
                .components()
                .iter()
                .map(|(&k, rho)| {
                    let q = rho.poly.in_frame(Frame::MONOMIAL);
                    (k, rho.exponent, q.coeffs().iter().map(|z| [z.re, z.im]).collect())
                })
                .collect(),
            f0_norm: c.f0_norm,
            residuals: c.residuals.iter().map(|e| (e.input, e.k, e.value)).collect(),
            dropped_inputs: c.dropped_inputs.clone(),
            tolerance: c.tolerance,
            k_max: c.k_max,
            max_relative_residual: c.max_relative_residual(),
            null_identity_residual: c.null_identity_residual,
            duplicates: c.duplicates.clone(),
        }
    }
}

impl CertificateJson {
    /// The witness `f0` stored in the certificate.
    pub fn f0(&self) -> Result<FourierRadialFunction> {
        let comps = self
            .f0
            .iter()
            .map(|(k, e, coeffs)| {
                let q = Poly::from_coeffs(coeffs.iter().map(|c| C64::new(c[0], c[1])).collect());
                (*k, RadialFunction::new(*e, q))
            })
            .collect();
        FourierRadialFunction::new(comps, self.r1, self.r2)
    }
}
