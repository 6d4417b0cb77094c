//! Distance from a target profile to the span of the columns of `A^j B`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::space::{point_to_sigma, GridShape, ParamSpace};
use super::system::EnsembleSystem;
use crate::analytic::BivariateSeries;
use crate::error::{Error, Result};

type C64 = Complex64;

/// Krylov vectors whose orthogonalized norm falls below this fraction of
/// their original norm are treated as already in the span.
pub const DEFLATION_TOL: f64 = 1e-10;

fn dot(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn norm(u: &[C64]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(y: &mut [C64], a: C64, x: &[C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Target profile from a series, `n = 1`.
pub fn profile_from_series(space: &ParamSpace, f: &BivariateSeries) -> Result<Vec<C64>> {
    space
        .grid
        .points
        .iter()
        .map(|p| f.eval(point_to_sigma(p)?))
        .collect()
}

/// Target profile from a closure returning the `n` state components.
pub fn profile_from_fn<F>(space: &ParamSpace, n: usize, f: F) -> Result<Vec<C64>>
where
    F: Fn(&[f64]) -> Vec<C64>,
{
    let mut out = Vec::with_capacity(space.len() * n);
    for p in &space.grid.points {
        let v = f(p);
        if v.len() != n {
            return Err(Error::Dimension(format!("profile returned {} components, expected {n}", v.len())));
        }
        out.extend(v);
    }
    Ok(out)
}

/// Residuals `r_0, …, r_K` of the weighted least-squares fit of `target`
/// (node-major, `n` components per node) by the columns of `A^j B`, `j ≤ K`.
///
/// The Krylov space is built by a block Arnoldi process: each step applies
/// `A` pointwise to the newest orthonormal block, orthogonalizes twice against
/// everything so far and deflates vectors that are numerically in the span.
/// The target residual is updated by one projection per new basis vector.
/// The spaces are nested, so each reported value is capped by its
/// predecessor; this only absorbs last-bit rounding in the norm.
pub fn gram_residual(sys: &EnsembleSystem, target: &[C64], k_max: usize) -> Result<Vec<f64>> {
    let nodes = sys.space.len();
    let n = sys.n;
    if target.len() != nodes * n {
        return Err(Error::Dimension(format!(
            "target has {} values, expected {} nodes x {n} states",
            target.len(),
            nodes
        )));
    }
    if let GridShape::Polar { n_theta, .. } = sys.space.grid.shape {
        if n_theta < 4 * k_max + 8 {
            return Err(Error::InvalidArgument(format!(
                "polar grid with {n_theta} angles resolves K <= {}, requested {k_max}",
                n_theta.saturating_sub(8) / 4
            )));
        }
    }
    let mats = sys.node_matrices()?;
    let sw: Vec<f64> = sys.space.grid.weights.iter().map(|w| w.sqrt()).collect();

    let mut res: Vec<C64> = target
        .chunks(n)
        .zip(&sw)
        .flat_map(|(t, &s)| t.iter().map(move |z| z * s))
        .collect();

    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut block: Vec<Vec<C64>> = (0..sys.m)
        .map(|j| {
            let mut v = Vec::with_capacity(nodes * n);
            for ((_, b), &s) in mats.iter().zip(&sw) {
                v.extend(b.column(j).iter().map(|z| z * s));
            }
            v
        })
        .collect();

    let mut out = Vec::with_capacity(k_max + 1);
    for step in 0..=k_max {
        if step > 0 {
            block = block.par_iter().map(|q| apply(&mats, n, q)).collect();
        }
        let mut newest = Vec::new();
        for mut v in block.drain(..) {
            let original = norm(&v);
            if original == 0.0 {
                continue;
            }
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &v);
                    axpy(&mut v, -c, q);
                }
            }
            let nv = norm(&v);
            if nv <= DEFLATION_TOL * original {
                continue;
            }
            v.iter_mut().for_each(|z| *z /= nv);
            let c = dot(&v, &res);
            axpy(&mut res, -c, &v);
            basis.push(v.clone());
            newest.push(v);
        }
        block = newest;
        let r = norm(&res);
        out.push(out.last().map_or(r, |&prev: &f64| prev.min(r)));
    }
    Ok(out)
}

fn apply(mats: &[(DMatrix<C64>, DMatrix<C64>)], n: usize, q: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(q.len());
    for ((a, _), chunk) in mats.iter().zip(q.chunks(n)) {
        for i in 0..n {
            out.push((0..n).map(|j| a[(i, j)] * chunk[j]).sum());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::demos;
    use std::f64::consts::PI;

    #[test]
    fn interval_target_in_span() {
        let sys = demos::interval_demo(256).unwrap();
        let t = profile_from_series(&sys.space, &BivariateSeries::sigma()).unwrap();
        let r = gram_residual(&sys, &t, 1).unwrap();
        assert!(r[1] < 1e-10, "{r:?}");
        assert!(r[0] > 0.1);
    }

    #[test]
    fn disk_target_conj_is_orthogonal() {
        let sys = demos::disk_demo(1.0, 32, 64).unwrap();
        let t = profile_from_series(&sys.space, &BivariateSeries::sigma_bar()).unwrap();
        let r = gram_residual(&sys, &t, 10).unwrap();
        for v in &r {
            assert!((v - (PI / 2.0).sqrt()).abs() < 1e-10, "{r:?}");
        }
    }

    #[test]
    fn polar_grid_must_resolve_k() {
        let sys = demos::disk_demo(1.0, 8, 16).unwrap();
        let t = vec![C64::new(1.0, 0.0); sys.space.len()];
        assert!(gram_residual(&sys, &t, 2).is_ok());
        assert!(matches!(gram_residual(&sys, &t, 3), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn target_length_checked() {
        let sys = demos::interval_demo(8).unwrap();
        assert!(matches!(gram_residual(&sys, &[C64::new(0.0, 0.0)], 1), Err(Error::Dimension(_))));
    }
}
