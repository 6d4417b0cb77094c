//! Linear ensemble systems `ẋ(t, σ) = A(σ) x(t, σ) + B(σ) u(t)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::space::{point_to_sigma, ParamSpace};
use crate::analytic::BivariateSeries;
use crate::error::{Error, Result};

type C64 = Complex64;

pub type MatrixFn = Arc<dyn Fn(&[f64]) -> Result<DMatrix<C64>> + Send + Sync>;
pub type PointMap = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// One matrix entry as a function of the parameter.
#[derive(Debug, Clone)]
pub enum Entry {
    /// Series in `σ = x` (one dimension) or `σ = x + iy` (two dimensions).
    Series(BivariateSeries),
    /// Values at the grid nodes of the owning space.
    Samples(Arc<Vec<C64>>),
}

/// Matrix-valued function on a parameterization space.
#[derive(Clone)]
pub enum MatrixField {
    Entries {
        rows: usize,
        cols: usize,
        /// Row-major.
        entries: Vec<Entry>,
    },
    Function {
        rows: usize,
        cols: usize,
        f: MatrixFn,
    },
}

impl fmt::Debug for MatrixField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixField::Entries { rows, cols, entries } => f
                .debug_struct("Entries")
                .field("rows", rows)
                .field("cols", cols)
                .field("entries", entries)
                .finish(),
            MatrixField::Function { rows, cols, .. } => f
                .debug_struct("Function")
                .field("rows", rows)
                .field("cols", cols)
                .finish_non_exhaustive(),
        }
    }
}

impl MatrixField {
    pub fn from_series(rows: usize, cols: usize, entries: Vec<BivariateSeries>) -> Result<Self> {
        Self::from_entries(rows, cols, entries.into_iter().map(Entry::Series).collect())
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Entry>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(MatrixField::Entries { rows, cols, entries })
    }

    /// Scalar field from one series.
    pub fn scalar(entry: BivariateSeries) -> Self {
        MatrixField::Entries {
            rows: 1,
            cols: 1,
            entries: vec![Entry::Series(entry)],
        }
    }

    pub fn constant(m: DMatrix<C64>) -> Self {
        let (rows, cols) = m.shape();
        let entries = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| Entry::Series(BivariateSeries::constant(m[(i, j)])))
            .collect();
        MatrixField::Entries { rows, cols, entries }
    }

    pub fn function<F>(rows: usize, cols: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<DMatrix<C64>> + Send + Sync + 'static,
    {
        MatrixField::Function {
            rows,
            cols,
            f: Arc::new(f),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            MatrixField::Entries { rows, cols, .. } | MatrixField::Function { rows, cols, .. } => {
                (*rows, *cols)
            }
        }
    }

    /// The entry series when every entry is a series.
    pub fn series(&self) -> Option<Vec<&BivariateSeries>> {
        match self {
            MatrixField::Entries { entries, .. } => entries
                .iter()
                .map(|e| match e {
                    Entry::Series(s) => Some(s),
                    Entry::Samples(_) => None,
                })
                .collect(),
            MatrixField::Function { .. } => None,
        }
    }

    fn has_samples(&self) -> bool {
        matches!(self, MatrixField::Entries { entries, .. } if entries.iter().any(|e| matches!(e, Entry::Samples(_))))
    }

    /// Value at an arbitrary point. Sampled entries are not available here.
    pub fn eval_point(&self, p: &[f64]) -> Result<DMatrix<C64>> {
        self.eval_impl(p, None)
    }

    /// Value at node `idx` of `space`.
    pub fn eval_node(&self, space: &ParamSpace, idx: usize) -> Result<DMatrix<C64>> {
        self.eval_impl(&space.grid.points[idx], Some(idx))
    }

    fn eval_impl(&self, p: &[f64], node: Option<usize>) -> Result<DMatrix<C64>> {
        let m = match self {
            MatrixField::Entries { rows, cols, entries } => {
                let mut m = DMatrix::zeros(*rows, *cols);
                for (k, e) in entries.iter().enumerate() {
                    m[(k / cols, k % cols)] = match e {
                        Entry::Series(s) => s.eval(point_to_sigma(p)?)?,
                        Entry::Samples(v) => match node {
                            Some(i) => v[i],
                            None => {
                                return Err(Error::InvalidArgument(
                                    "sampled entries can only be read at grid nodes".into(),
                                ))
                            }
                        },
                    };
                }
                m
            }
            MatrixField::Function { rows, cols, f } => {
                let m = f(p)?;
                if m.shape() != (*rows, *cols) {
                    return Err(Error::Dimension(format!(
                        "matrix function returned {:?}, declared {rows}x{cols}",
                        m.shape()
                    )));
                }
                m
            }
        };
        if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::domain(p, "non-finite matrix entry"));
        }
        Ok(m)
    }

    /// `(re, im)` parts, each a field of the same shape.
    fn split(&self) -> (MatrixField, MatrixField) {
        match self {
            MatrixField::Entries { rows, cols, entries } => {
                let half = C64::new(0.5, 0.0);
                let mut re = Vec::with_capacity(entries.len());
                let mut im = Vec::with_capacity(entries.len());
                for e in entries {
                    match e {
                        Entry::Series(s) => {
                            let c = s.conjugate();
                            re.push(Entry::Series(s.add(&c).scale(half)));
                            im.push(Entry::Series(s.sub(&c).scale(C64::new(0.0, -0.5))));
                        }
                        Entry::Samples(v) => {
                            re.push(Entry::Samples(Arc::new(v.iter().map(|z| C64::new(z.re, 0.0)).collect())));
                            im.push(Entry::Samples(Arc::new(v.iter().map(|z| C64::new(z.im, 0.0)).collect())));
                        }
                    }
                }
                (
                    MatrixField::Entries { rows: *rows, cols: *cols, entries: re },
                    MatrixField::Entries { rows: *rows, cols: *cols, entries: im },
                )
            }
            MatrixField::Function { rows, cols, f } => {
                let (f1, f2) = (f.clone(), f.clone());
                (
                    MatrixField::function(*rows, *cols, move |p| Ok(f1(p)?.map(|z| C64::new(z.re, 0.0)))),
                    MatrixField::function(*rows, *cols, move |p| Ok(f2(p)?.map(|z| C64::new(z.im, 0.0)))),
                )
            }
        }
    }

    /// `[[X1, -X2], [X2, X1]]` for `X = X1 + i X2`.
    pub fn realify(&self) -> MatrixField {
        let (rows, cols) = self.shape();
        let (re, im) = self.split();
        match (re, im) {
            (
                MatrixField::Entries { entries: e1, .. },
                MatrixField::Entries { entries: e2, .. },
            ) => {
                let neg = |e: &Entry| match e {
                    Entry::Series(s) => Entry::Series(s.scale(C64::new(-1.0, 0.0))),
                    Entry::Samples(v) => Entry::Samples(Arc::new(v.iter().map(|z| -z).collect())),
                };
                let mut out = Vec::with_capacity(4 * rows * cols);
                for bi in 0..2 {
                    for i in 0..rows {
                        for bj in 0..2 {
                            for j in 0..cols {
                                let k = i * cols + j;
                                out.push(match (bi, bj) {
                                    (0, 0) | (1, 1) => e1[k].clone(),
                                    (0, 1) => neg(&e2[k]),
                                    _ => e2[k].clone(),
                                });
                            }
                        }
                    }
                }
                MatrixField::Entries {
                    rows: 2 * rows,
                    cols: 2 * cols,
                    entries: out,
                }
            }
            _ => {
                let f = self.clone();
                MatrixField::function(2 * rows, 2 * cols, move |p| {
                    let m = f.eval_point(p)?;
                    Ok(realify_matrix(&m))
                })
            }
        }
    }
}

/// Real block form of a complex matrix, as a complex matrix with zero
/// imaginary parts.
pub fn realify_matrix(m: &DMatrix<C64>) -> DMatrix<C64> {
    let (r, c) = m.shape();
    DMatrix::from_fn(2 * r, 2 * c, |i, j| {
        let z = m[(i % r, j % c)];
        let v = match (i < r, j < c) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        };
        C64::new(v, 0.0)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldTag {
    Real,
    Complex,
}

#[derive(Debug, Clone)]
pub struct EnsembleSystem {
    pub space: ParamSpace,
    pub n: usize,
    pub m: usize,
    pub a: MatrixField,
    pub b: MatrixField,
    pub field: FieldTag,
}

impl EnsembleSystem {
    pub fn new(space: ParamSpace, a: MatrixField, b: MatrixField, field: FieldTag) -> Result<Self> {
        let (n, n2) = a.shape();
        let (nb, m) = b.shape();
        if n != n2 || n == 0 {
            return Err(Error::Dimension(format!("A must be square and nonempty, got {n}x{n2}")));
        }
        if nb != n {
            return Err(Error::Dimension(format!("B has {nb} rows, A has {n}")));
        }
        if m == 0 {
            return Err(Error::Dimension("B needs at least one column".into()));
        }
        for field_ in [&a, &b] {
            if let MatrixField::Entries { entries, .. } = field_ {
                for e in entries {
                    match e {
                        Entry::Samples(v) if v.len() != space.len() => {
                            return Err(Error::Dimension(format!(
                                "sampled entry has {} values for {} nodes",
                                v.len(),
                                space.len()
                            )))
                        }
                        Entry::Series(_) if space.dim() > 2 => {
                            return Err(Error::Dimension(
                                "series entries need a 1- or 2-dimensional space".into(),
                            ))
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(EnsembleSystem { space, n, m, a, b, field })
    }

    /// `ẋ = σx + b(σ)u` with scalar series data.
    pub fn scalar(space: ParamSpace, a: BivariateSeries, b: Vec<BivariateSeries>, field: FieldTag) -> Result<Self> {
        let m = b.len();
        Self::new(space, MatrixField::scalar(a), MatrixField::from_series(1, m, b)?, field)
    }

    /// `(A, B)` at every node, evaluated in parallel.
    pub fn node_matrices(&self) -> Result<Vec<(DMatrix<C64>, DMatrix<C64>)>> {
        (0..self.space.len())
            .into_par_iter()
            .map(|i| Ok((self.a.eval_node(&self.space, i)?, self.b.eval_node(&self.space, i)?)))
            .collect()
    }

    /// The equivalent `2n`-dimensional real system.
    pub fn realify(&self) -> Result<EnsembleSystem> {
        EnsembleSystem::new(self.space.clone(), self.a.realify(), self.b.realify(), FieldTag::Real)
    }

    /// `A ∘ ρ`, `B ∘ ρ` on `new_space`. Every node image must lie in the
    /// current space.
    pub fn pullback(&self, new_space: ParamSpace, rho: PointMap) -> Result<EnsembleSystem> {
        if self.a.has_samples() || self.b.has_samples() {
            return Err(Error::InvalidArgument(
                "pullback needs entries defined off the grid (series or functions)".into(),
            ));
        }
        for p in &new_space.grid.points {
            let q = rho(p);
            if !self.space.contains(&q, 1e-12) {
                return Err(Error::domain(&q, "pullback image outside the parameter space"));
            }
        }
        let compose = |field: &MatrixField| {
            let (r, c) = field.shape();
            let (field, rho) = (field.clone(), rho.clone());
            MatrixField::function(r, c, move |p| field.eval_point(&rho(p)))
        };
        EnsembleSystem::new(new_space, compose(&self.a), compose(&self.b), self.field)
    }
}
