//! Translation of a scalar pair with full-rank Jacobian to the normal form
//! `a(μ) = μ` on a disk `D[R]`.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;

use super::jacobian::{jacobian_at, JacobianReport};
use crate::analytic::BivariateSeries;
use crate::ensemble::space::{ParamSpace, SpaceKind};
use crate::ensemble::system::EnsembleSystem;
use crate::error::{Error, Result};

type C64 = Complex64;

#[derive(Debug, Clone)]
pub struct NormalFormOptions {
    /// Total degree of the fitted input series.
    pub degree: u32,
    /// Smallest admissible radius, relative to the initial radius.
    pub r_min_rel: f64,
    pub shrink: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Boundary samples per side (box) or on the circle (disk).
    pub boundary_samples: usize,
}

impl Default for NormalFormOptions {
    fn default() -> Self {
        NormalFormOptions {
            degree: 6,
            r_min_rel: 1e-3,
            shrink: 0.8,
            newton_tol: 1e-13,
            max_newton: 60,
            boundary_samples: 64,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NormalForm {
    /// Radius of the normal-form disk.
    pub r: f64,
    pub a_j: C64,
    pub sigma_j: Vec<f64>,
    /// Inputs as series in `μ = a - a_J` on `D[R]`.
    pub b: Vec<BivariateSeries>,
    /// Relative weighted L² residual of each fit.
    pub fit_residuals: Vec<f64>,
    /// Largest `|a(σ(μ)) - a_J - μ|` over the fit nodes.
    pub round_trip: f64,
    /// Number of radius reductions.
    pub shrinks: usize,
    pub degree: u32,
}

fn a_at(sys: &EnsembleSystem, p: &[f64]) -> Result<C64> {
    Ok(sys.a.eval_point(p)?[(0, 0)])
}

fn boundary_points(space: &ParamSpace, k: usize) -> Vec<Vec<f64>> {
    let t = |i: usize| i as f64 / k as f64;
    match &space.kind {
        SpaceKind::Box { bounds } if bounds.len() == 2 => {
            let ((x0, x1), (y0, y1)) = (bounds[0], bounds[1]);
            let mut out = Vec::with_capacity(4 * k);
            for i in 0..k {
                let s = t(i);
                out.push(vec![x0 + s * (x1 - x0), y0]);
                out.push(vec![x1, y0 + s * (y1 - y0)]);
                out.push(vec![x1 - s * (x1 - x0), y1]);
                out.push(vec![x0, y1 - s * (y1 - y0)]);
            }
            out
        }
        SpaceKind::Disk { r } => (0..4 * k)
            .map(|i| {
                let th = std::f64::consts::TAU * i as f64 / (4 * k) as f64;
                vec![r * th.cos(), r * th.sin()]
            })
            .collect(),
        SpaceKind::Annulus { r1, r2 } => (0..4 * k)
            .flat_map(|i| {
                let th = std::f64::consts::TAU * i as f64 / (4 * k) as f64;
                [vec![r1 * th.cos(), r1 * th.sin()], vec![r2 * th.cos(), r2 * th.sin()]]
            })
            .collect(),
        _ => Vec::new(),
    }
}

fn to_m2(j: &DMatrix<f64>) -> Matrix2<f64> {
    Matrix2::new(j[(0, 0)], j[(0, 1)], j[(1, 0)], j[(1, 1)])
}

/// Solves `a(σ) = w` by Newton's method from `start`.
fn newton(
    sys: &EnsembleSystem,
    w: C64,
    start: &[f64],
    det_sign: f64,
    det_ref: f64,
    opts: &NormalFormOptions,
) -> Option<Vec<f64>> {
    let mut x = start.to_vec();
    let tol = opts.newton_tol * (1.0 + w.norm());
    for _ in 0..opts.max_newton {
        let v = a_at(sys, &x).ok()?;
        let r = v - w;
        if r.norm() <= tol {
            return Some(x);
        }
        let j = to_m2(&jacobian_at(&sys.a, &sys.space, &x).ok()?);
        let det = j.determinant();
        if det * det_sign <= 1e-8 * det_ref {
            return None;
        }
        let step = j.try_inverse()? * Vector2::new(r.re, r.im);
        x[0] -= step[0];
        x[1] -= step[1];
        if !sys.space.contains(&x, 0.0) {
            return None;
        }
    }
    let v = a_at(sys, &x).ok()?;
    ((v - w).norm() <= 1e3 * tol).then_some(x)
}

/// Inverts `a` on the polar grid of `D[R]` by continuation along rays.
fn invert_on(sys: &EnsembleSystem, grid: &ParamSpace, a_j: C64, sigma_j: &[f64], n_r: usize, n_t: usize, opts: &NormalFormOptions) -> Option<Vec<Vec<f64>>> {
    let j0 = to_m2(&jacobian_at(&sys.a, &sys.space, sigma_j).ok()?);
    let det0 = j0.determinant();
    let sign = det0.signum();
    let rays: Option<Vec<Vec<Vec<f64>>>> = (0..n_t)
        .into_par_iter()
        .map(|it| {
            let mut prev = sigma_j.to_vec();
            let mut out = Vec::with_capacity(n_r);
            for ir in 0..n_r {
                let p = &grid.grid.points[ir * n_t + it];
                let w = a_j + C64::new(p[0], p[1]);
                let x = newton(sys, w, &prev, sign, det0.abs(), opts)?;
                prev = x.clone();
                out.push(x);
            }
            Some(out)
        })
        .collect();
    let rays = rays?;
    let mut pre = vec![Vec::new(); n_r * n_t];
    for (it, ray) in rays.into_iter().enumerate() {
        for (ir, x) in ray.into_iter().enumerate() {
            pre[ir * n_t + it] = x;
        }
    }
    Some(pre)
}

/// Weighted least-squares fit of `values` by `μ^k μ̄^ℓ`, `k + ℓ ≤ deg`.
fn fit(grid: &ParamSpace, values: &[C64], deg: u32, r: f64) -> Result<(BivariateSeries, f64)> {
    let idx: Vec<(u32, u32)> = (0..=deg).flat_map(|t| (0..=t).map(move |l| (t - l, l))).collect();
    let sw: Vec<f64> = grid.grid.weights.iter().map(|w| w.sqrt()).collect();
    let rows = values.len();
    let phi = DMatrix::from_fn(rows, idx.len(), |i, c| {
        let p = &grid.grid.points[i];
        let nu = C64::new(p[0], p[1]) / r;
        let (k, l) = idx[c];
        nu.powu(k) * nu.conj().powu(l) * sw[i]
    });
    let y = DVector::from_iterator(rows, values.iter().zip(&sw).map(|(v, s)| v * *s));
    let coef = phi
        .clone()
        .svd(true, true)
        .solve(&y, 1e-14)
        .map_err(|e| Error::NormalForm(format!("least-squares fit failed: {e}")))?;
    let ynorm = y.norm();
    let res = (&phi * &coef - &y).norm();
    let rel = if ynorm == 0.0 { res } else { res / ynorm };
    let terms = idx.iter().zip(coef.iter()).map(|(&(k, l), &c)| (k, l, c / r.powi((k + l) as i32)));
    Ok((BivariateSeries::new(terms, r)?, rel))
}

/// Pulls the scalar system back by `a⁻¹` around the most interior node of
/// full Jacobian rank and fits the inputs as series in `μ = a - a_J`.
pub fn to_normal_form(sys: &EnsembleSystem, report: &JacobianReport, opts: &NormalFormOptions) -> Result<NormalForm> {
    if sys.n != 1 {
        return Err(Error::Dimension(format!("normal form needs a scalar system, got n = {}", sys.n)));
    }
    if sys.space.dim() != 2 || report.k_j != 2 {
        return Err(Error::Precondition(format!(
            "normal form needs a 2-dimensional space and full Jacobian rank, found k_J = {}",
            report.k_j
        )));
    }
    let sigma_j = report.sigma_j.clone();
    let a_j = a_at(sys, &sigma_j)?;
    let boundary = boundary_points(&sys.space, opts.boundary_samples);
    let mut dist = f64::INFINITY;
    for q in &boundary {
        dist = dist.min((a_at(sys, q)? - a_j).norm());
    }
    if !(dist > 0.0 && dist.is_finite()) {
        return Err(Error::NormalForm("a_J lies on the image of the boundary".into()));
    }
    let r0 = 0.9 * dist;
    let r_min = opts.r_min_rel * r0;
    let deg = opts.degree;
    let (n_r, n_t) = (deg as usize + 6, 4 * deg as usize + 8);

    let mut r = r0;
    let mut shrinks = 0;
    while r >= r_min {
        let grid = ParamSpace::disk(r, n_r, n_t)?;
        if let Some(pre) = invert_on(sys, &grid, a_j, &sigma_j, n_r, n_t, opts) {
            let round_trip = pre
                .iter()
                .zip(&grid.grid.points)
                .map(|(x, p)| Ok((a_at(sys, x)? - a_j - C64::new(p[0], p[1])).norm()))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            let bvals: Vec<DMatrix<C64>> = pre.iter().map(|x| sys.b.eval_point(x)).collect::<Result<_>>()?;
            let mut b = Vec::with_capacity(sys.m);
            let mut fit_residuals = Vec::with_capacity(sys.m);
            for i in 0..sys.m {
                let vals: Vec<C64> = bvals.iter().map(|m| m[(0, i)]).collect();
                let (s, res) = fit(&grid, &vals, deg, r)?;
                b.push(s);
                fit_residuals.push(res);
            }
            return Ok(NormalForm {
                r,
                a_j,
                sigma_j,
                b,
                fit_residuals,
                round_trip,
                shrinks,
                degree: deg,
            });
        }
        r *= opts.shrink;
        shrinks += 1;
    }
    Err(Error::NormalForm(format!(
        "no radius above {r_min:.3e} admits a well-defined inverse around a_J = {a_j}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::FieldTag;
    use crate::reduction::jacobian::jacobian_rank;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn run(a: BivariateSeries, b: Vec<BivariateSeries>, space: ParamSpace) -> NormalForm {
        let sys = EnsembleSystem::scalar(space, a, b, FieldTag::Complex).unwrap();
        let rep = jacobian_rank(&sys.a, &sys.space).unwrap();
        to_normal_form(&sys, &rep, &NormalFormOptions::default()).unwrap()
    }

    #[test]
    fn identity_is_already_normal() {
        let nf = run(BivariateSeries::sigma(), vec![BivariateSeries::one()], ParamSpace::disk(1.0, 8, 32).unwrap());
        assert!(nf.fit_residuals[0] < 1e-12);
        assert!(nf.round_trip < 1e-12);
        assert!(nf.b[0].approx_eq(&BivariateSeries::one(), 1e-10));
        assert_eq!(nf.shrinks, 0);
    }

    #[test]
    fn quadratic_perturbation() {
        let a = BivariateSeries::holomorphic(&[c(0.0, 0.0), c(1.0, 0.0), c(0.1, 0.0)]);
        let b = vec![BivariateSeries::holomorphic(&[c(1.0, 0.0), c(1.0, 0.0)])];
        let nf = run(a.clone(), b, ParamSpace::disk(0.5, 8, 32).unwrap());
        assert!(nf.fit_residuals[0] < 1e-6, "{:?}", nf.fit_residuals);
        assert!(nf.round_trip < 1e-10);
        // b(a⁻¹(a_J + μ)) near μ = 0
        let sj = c(nf.sigma_j[0], nf.sigma_j[1]);
        assert!((nf.b[0].value_at_zero() - (1.0 + sj)).norm() < 1e-6);
    }

    #[test]
    fn rank_deficient_is_rejected() {
        let sys = EnsembleSystem::scalar(
            ParamSpace::disk(1.0, 8, 16).unwrap(),
            crate::reduction::demos::sigma1(),
            vec![BivariateSeries::one()],
            FieldTag::Complex,
        )
        .unwrap();
        let rep = jacobian_rank(&sys.a, &sys.space).unwrap();
        assert!(matches!(to_normal_form(&sys, &rep, &NormalFormOptions::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn conjugate_map_inverts() {
        let nf = run(BivariateSeries::sigma_bar(), vec![BivariateSeries::sigma()], ParamSpace::disk(1.0, 8, 32).unwrap());
        // b(σ(μ)) = conj(μ + a_J)
        let expect = BivariateSeries::sigma_bar().add(&BivariateSeries::constant(nf.a_j.conj()));
        assert!(nf.b[0].approx_eq(&expect, 1e-9));
    }
}
