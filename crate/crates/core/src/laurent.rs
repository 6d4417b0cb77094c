//! Laurent polynomials, the maps `φ_n`, and cofactor null vectors.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::analytic::BivariateSeries;
use crate::basis::OrthonormalBasis;
use crate::error::{Error, Result};

type C64 = Complex64;
const ZERO: C64 = C64::new(0.0, 0.0);

/// Finitely supported `Σ_k c_k z^k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i32, C64>,
}

impl LaurentPoly {
    pub fn new<I: IntoIterator<Item = (i32, C64)>>(terms: I) -> Self {
        let mut coeffs = BTreeMap::new();
        for (k, c) in terms {
            *coeffs.entry(k).or_insert(ZERO) += c;
        }
        coeffs.retain(|_, c: &mut C64| *c != ZERO);
        LaurentPoly { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: C64) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(k: i32, c: C64) -> Self {
        Self::new([(k, c)])
    }

    pub fn coeff(&self, k: i32) -> C64 {
        self.coeffs.get(&k).copied().unwrap_or(ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, C64)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `(min k, max k)` of the stored support.
    pub fn support(&self) -> Option<(i32, i32)> {
        Some((*self.coeffs.keys().next()?, *self.coeffs.keys().next_back()?))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Sum of coefficient magnitudes; bounds `|p(z)|` on `|z| = 1`.
    pub fn abs_sum(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.terms().chain(other.terms()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.terms().map(|(k, c)| (k, c * s)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = BTreeMap::new();
        for (&a, &x) in &self.coeffs {
            for (&b, &y) in &other.coeffs {
                *out.entry(a + b).or_insert(ZERO) += x * y;
            }
        }
        Self::new(out)
    }

    /// Drops coefficients with magnitude at most `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        Self::new(self.terms().filter(|(_, c)| c.norm() > tol))
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.terms().map(|(k, c)| c * z.powi(k)).sum()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.sub(other).max_abs() <= tol
    }
}

/// `φ_n(g)(z) = Σ_k ⟨p_n, ξ_{-k}(g)⟩ z^k`, supported in `[-D, D]`.
pub fn phi(g: &BivariateSeries, n: usize, basis: &OrthonormalBasis) -> Result<LaurentPoly> {
    let p = basis.get(n).ok_or_else(|| {
        Error::InvalidArgument(format!("basis index {n} exceeds order {}", basis.order()))
    })?;
    let d = g.degree() as i32;
    Ok(LaurentPoly::new((-d..=d).map(|k| (k, basis.inner(p, &g.xi(-k))))))
}

/// Relative threshold below which a Laurent determinant counts as zero.
pub const DET_ZERO_TOL: f64 = 1e-11;

/// Square-matrix determinant over the Laurent ring by Laplace expansion,
/// together with the matching permanent of entry `abs_sum`s (a scale for
/// zero tests).
fn det_with_scale(m: &[Vec<&LaurentPoly>]) -> (LaurentPoly, f64) {
    let n = m.len();
    if n == 0 {
        return (LaurentPoly::constant(C64::new(1.0, 0.0)), 1.0);
    }
    let mut memo: HashMap<u32, (LaurentPoly, f64)> = HashMap::new();
    fn rec(
        m: &[Vec<&LaurentPoly>],
        row: usize,
        cols: u32,
        memo: &mut HashMap<u32, (LaurentPoly, f64)>,
    ) -> (LaurentPoly, f64) {
        if row == m.len() {
            return (LaurentPoly::constant(C64::new(1.0, 0.0)), 1.0);
        }
        if let Some(v) = memo.get(&cols) {
            return v.clone();
        }
        let mut det = LaurentPoly::zero();
        let mut scale = 0.0;
        let mut sign = 1.0;
        for c in 0..m[row].len() {
            if cols & (1 << c) == 0 {
                continue;
            }
            let entry = m[row][c];
            if !entry.is_zero() {
                let (sub, sub_scale) = rec(m, row + 1, cols & !(1 << c), memo);
                det = det.add(&entry.mul(&sub).scale(C64::new(sign, 0.0)));
                scale += entry.abs_sum() * sub_scale;
            }
            sign = -sign;
        }
        memo.insert(cols, (det.clone(), scale));
        (det, scale)
    }
    let all = (1u32 << m[0].len()) - 1;
    rec(m, 0, all, &mut memo)
}

fn is_negligible(det: &LaurentPoly, scale: f64) -> bool {
    det.abs_sum() <= DET_ZERO_TOL * scale || scale == 0.0
}

/// `∏_i max_n |Φ[i][n]|₁` over the given rows. Minors built from rounding
/// noise are small against this even when their own entries are noise.
fn row_scale(phi: &[Vec<LaurentPoly>], rows: &[usize]) -> f64 {
    rows.iter()
        .map(|&i| phi[i].iter().map(LaurentPoly::abs_sum).fold(0.0, f64::max))
        .product()
}

/// Determinant of a square matrix of Laurent polynomials.
pub fn determinant(m: &[Vec<LaurentPoly>]) -> LaurentPoly {
    let refs: Vec<Vec<&LaurentPoly>> = m.iter().map(|r| r.iter().collect()).collect();
    det_with_scale(&refs).0
}

/// Signed maximal minors `ψ_n = (-1)^n det(Φ without column n)` of an
/// `r × (r+1)` matrix, restricted to the given rows and columns.
fn cofactors(phi: &[Vec<LaurentPoly>], rows: &[usize], cols: &[usize]) -> Vec<(LaurentPoly, f64)> {
    (0..cols.len())
        .map(|skip| {
            let sub: Vec<Vec<&LaurentPoly>> = rows
                .iter()
                .map(|&i| {
                    cols.iter()
                        .enumerate()
                        .filter(|&(j, _)| j != skip)
                        .map(|(_, &c)| &phi[i][c])
                        .collect()
                })
                .collect();
            let (d, s) = det_with_scale(&sub);
            let sign = if skip % 2 == 0 { 1.0 } else { -1.0 };
            (d.scale(C64::new(sign, 0.0)), s)
        })
        .collect()
}

fn check_shape(phi: &[Vec<LaurentPoly>]) -> Result<usize> {
    let rows = phi.len();
    if rows > 31 {
        return Err(Error::InvalidArgument("too many rows for cofactor expansion".into()));
    }
    for (i, r) in phi.iter().enumerate() {
        if r.len() != rows + 1 {
            return Err(Error::Dimension(format!(
                "row {i} has {} entries, expected {}",
                r.len(),
                rows + 1
            )));
        }
    }
    Ok(rows)
}

/// Cofactor null vector of an `m × (m+1)` Laurent matrix.
///
/// Every entry of the result is a signed maximal minor, so
/// `Σ_n Φ[i][n] ψ_n = 0` holds identically for every row. When all maximal
/// minors vanish the rows are ring-dependent and [`Error::Degenerate`] names
/// the rows that a greedy selection in index order leaves out.
pub fn cofactor_nullvector(phi: &[Vec<LaurentPoly>]) -> Result<Vec<LaurentPoly>> {
    let rows = check_shape(phi)?;
    let all_rows: Vec<usize> = (0..rows).collect();
    let all_cols: Vec<usize> = (0..=rows).collect();
    let cof = cofactors(phi, &all_rows, &all_cols);
    let rs = row_scale(phi, &all_rows);
    if cof.iter().all(|(d, s)| is_negligible(d, s.max(rs))) {
        let sel = select_independent(phi)?;
        let dependent = (0..rows).filter(|i| !sel.rows.contains(i)).collect();
        return Err(Error::Degenerate { dependent });
    }
    Ok(cof.into_iter().map(|(d, _)| d).collect())
}

/// Rows and columns spanning a nonsingular square block of a degenerate matrix.
#[derive(Debug, Clone)]
pub struct Selection {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

const SAMPLE_ANGLES: [f64; 4] = [0.7390851332, 2.2360679775, -1.3247179572, 2.9];

fn numerical_rank(m: &DMatrix<C64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-9 * max).count()
}

fn sample(phi: &[Vec<LaurentPoly>], rows: &[usize], cols: &[usize], z: C64) -> DMatrix<C64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| phi[rows[i]][cols[j]].eval(z))
}

/// Greedy row/column selection from evaluations on the unit circle, confirmed
/// by a nonvanishing Laurent determinant.
pub fn select_independent(phi: &[Vec<LaurentPoly>]) -> Result<Selection> {
    let rows = check_shape(phi)?;
    let ncols = rows + 1;
    for &theta in &SAMPLE_ANGLES {
        let z = C64::from_polar(1.0, theta);
        let mut sel_rows = Vec::new();
        for i in 0..rows {
            let mut trial = sel_rows.clone();
            trial.push(i);
            let all: Vec<usize> = (0..ncols).collect();
            if numerical_rank(&sample(phi, &trial, &all, z)) == trial.len() {
                sel_rows = trial;
            }
        }
        let mut sel_cols = Vec::new();
        for j in 0..ncols {
            if sel_cols.len() == sel_rows.len() {
                break;
            }
            let mut trial = sel_cols.clone();
            trial.push(j);
            if numerical_rank(&sample(phi, &sel_rows, &trial, z)) == trial.len() {
                sel_cols = trial;
            }
        }
        if sel_cols.len() != sel_rows.len() {
            continue;
        }
        let block: Vec<Vec<&LaurentPoly>> = sel_rows
            .iter()
            .map(|&i| sel_cols.iter().map(|&j| &phi[i][j]).collect())
            .collect();
        let (d, s) = det_with_scale(&block);
        if sel_rows.is_empty() || !is_negligible(&d, s.max(row_scale(phi, &sel_rows))) {
            return Ok(Selection {
                rows: sel_rows,
                cols: sel_cols,
            });
        }
    }
    Err(Error::Degenerate {
        dependent: (0..rows).collect(),
    })
}

/// Null vector built from cofactors of a selected nonsingular block plus one
/// extra column, scattered back into the full column range. Works for any
/// rank, returning the selection used.
pub fn nullvector_from_selection(
    phi: &[Vec<LaurentPoly>],
    sel: &Selection,
) -> Result<Vec<LaurentPoly>> {
    let rows = check_shape(phi)?;
    let extra = (0..=rows)
        .find(|c| !sel.cols.contains(c))
        .ok_or_else(|| Error::InvalidArgument("selection uses every column".into()))?;
    let mut cols = sel.cols.clone();
    cols.push(extra);
    let cof = cofactors(phi, &sel.rows, &cols);
    let mut psi = vec![LaurentPoly::zero(); rows + 1];
    for (j, (d, _)) in cols.iter().zip(cof) {
        psi[*j] = d;
    }
    Ok(psi)
}

/// Residual `Σ_n Φ[i][n] ψ_n` per row, with the scale
/// `Σ_n |Φ[i][n]|₁ · max_n |ψ_n|₁`.
pub fn null_residual(phi: &[Vec<LaurentPoly>], psi: &[LaurentPoly]) -> Vec<(LaurentPoly, f64)> {
    let psi_max = psi.iter().map(LaurentPoly::abs_sum).fold(0.0, f64::max);
    phi.iter()
        .map(|row| {
            let mut acc = LaurentPoly::zero();
            for (a, b) in row.iter().zip(psi) {
                acc = acc.add(&a.mul(b));
            }
            let scale = row.iter().map(LaurentPoly::abs_sum).sum::<f64>() * psi_max;
            (acc, scale)
        })
        .collect()
}
