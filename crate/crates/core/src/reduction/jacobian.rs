//! Real Jacobian rank of a scalar coefficient `a : Σ → ℂ ≅ ℝ²`.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::analytic::BivariateSeries;
use crate::ensemble::space::{point_to_sigma, GridShape, ParamSpace, SpaceKind};
use crate::ensemble::system::{Entry, MatrixField};
use crate::error::{Error, Result};

type C64 = Complex64;

/// Singular values above `RANK_REL · σ_max` count towards the rank.
pub const RANK_REL: f64 = 1e-8;
/// Relative step of central differences.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct JacobianReport {
    /// `2 × d` real Jacobian at every node.
    pub jacobians: Vec<DMatrix<f64>>,
    pub ranks: Vec<usize>,
    /// Largest singular value over all nodes; the rank threshold scale.
    pub sigma_max: f64,
    /// Maximal rank `k_J`.
    pub k_j: usize,
    /// Node of rank `k_J` farthest from the boundary.
    pub node: usize,
    pub sigma_j: Vec<f64>,
}

/// Distance from `p` to the boundary of the space.
pub fn boundary_distance(space: &ParamSpace, p: &[f64]) -> f64 {
    match &space.kind {
        SpaceKind::Interval { a, b } => (p[0] - a).min(b - p[0]),
        SpaceKind::Box { bounds } => bounds
            .iter()
            .zip(p)
            .map(|(&(a, b), &x)| (x - a).min(b - x))
            .fold(f64::INFINITY, f64::min),
        SpaceKind::Disk { r } => r - p[0].hypot(p[1]),
        SpaceKind::Annulus { r1, r2 } => {
            let r = p[0].hypot(p[1]);
            (r - r1).min(r2 - r)
        }
    }
}

fn scale(space: &ParamSpace) -> f64 {
    match &space.kind {
        SpaceKind::Interval { a, b } => b - a,
        SpaceKind::Box { bounds } => bounds.iter().map(|(a, b)| b - a).fold(0.0, f64::max),
        SpaceKind::Disk { r } => 2.0 * r,
        SpaceKind::Annulus { r2, .. } => 2.0 * r2,
    }
}

fn split(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn series_jacobian(s: &BivariateSeries, p: &[f64]) -> Result<DMatrix<f64>> {
    let sigma = point_to_sigma(p)?;
    let mut j = DMatrix::zeros(2, p.len());
    let dx = split(s.d_x().eval_unchecked(sigma));
    j[(0, 0)] = dx[0];
    j[(1, 0)] = dx[1];
    if p.len() == 2 {
        let dy = split(s.d_y().eval_unchecked(sigma));
        j[(0, 1)] = dy[0];
        j[(1, 1)] = dy[1];
    }
    Ok(j)
}

/// Central-difference Jacobian of `f` at `p` with step `h`.
pub fn fd_jacobian<F: Fn(&[f64]) -> Result<C64>>(f: F, p: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let mut j = DMatrix::zeros(2, p.len());
    for d in 0..p.len() {
        let mut plus = p.to_vec();
        let mut minus = p.to_vec();
        plus[d] += h;
        minus[d] -= h;
        let diff = (f(&plus)? - f(&minus)?) / (2.0 * h);
        j[(0, d)] = diff.re;
        j[(1, d)] = diff.im;
    }
    Ok(j)
}

/// Real Jacobian of the scalar field at an arbitrary point.
pub fn jacobian_at(a: &MatrixField, space: &ParamSpace, p: &[f64]) -> Result<DMatrix<f64>> {
    if let Some(s) = a.series() {
        return series_jacobian(s[0], p);
    }
    let h = FD_STEP * scale(space);
    fd_jacobian(|q| Ok(a.eval_point(q)?[(0, 0)]), p, h)
}

/// Neighbour differences of sampled values on a tensor grid.
fn sampled_jacobian(space: &ParamSpace, values: &[C64], idx: usize) -> Result<DMatrix<f64>> {
    let GridShape::Tensor(dims) = &space.grid.shape else {
        return Err(Error::InvalidArgument("sampled Jacobians need a tensor grid".into()));
    };
    let multi = space.grid.multi_index(idx);
    let mut j = DMatrix::zeros(2, dims.len());
    for d in 0..dims.len() {
        if dims[d] < 2 {
            return Err(Error::InvalidArgument("sampled Jacobians need two nodes per axis".into()));
        }
        let lo = multi[d].saturating_sub(1);
        let hi = (multi[d] + 1).min(dims[d] - 1);
        let (mut ml, mut mh) = (multi.clone(), multi.clone());
        ml[d] = lo;
        mh[d] = hi;
        let (il, ih) = (space.grid.linear_index(&ml), space.grid.linear_index(&mh));
        let dx = space.grid.axes[d][hi] - space.grid.axes[d][lo];
        let diff = (values[ih] - values[il]) / dx;
        j[(0, d)] = diff.re;
        j[(1, d)] = diff.im;
    }
    Ok(j)
}

/// Jacobian at every node, its rank and the most interior node of maximal
/// rank. Series are differentiated exactly, functions by central differences
/// and samples by neighbour differences.
pub fn jacobian_rank(a: &MatrixField, space: &ParamSpace) -> Result<JacobianReport> {
    if a.shape() != (1, 1) {
        return Err(Error::Dimension(format!("Jacobian rank needs a scalar field, got {:?}", a.shape())));
    }
    let jacobians: Vec<DMatrix<f64>> = match a {
        MatrixField::Entries { entries, .. } if matches!(entries[0], Entry::Samples(_)) => {
            let Entry::Samples(v) = &entries[0] else { unreachable!() };
            (0..space.len()).map(|i| sampled_jacobian(space, v, i)).collect::<Result<_>>()?
        }
        _ => space
            .grid
            .points
            .par_iter()
            .map(|p| jacobian_at(a, space, p))
            .collect::<Result<_>>()?,
    };
    let svs: Vec<Vec<f64>> = jacobians.iter().map(|j| j.clone().singular_values().iter().copied().collect()).collect();
    let sigma_max = svs.iter().flatten().copied().fold(0.0, f64::max);
    let thresh = RANK_REL * sigma_max;
    let ranks: Vec<usize> = svs
        .iter()
        .map(|s| if sigma_max == 0.0 { 0 } else { s.iter().filter(|&&x| x > thresh).count() })
        .collect();
    let k_j = ranks.iter().copied().max().unwrap_or(0);
    let node = (0..space.len())
        .filter(|&i| ranks[i] == k_j)
        .max_by(|&i, &j| {
            boundary_distance(space, &space.grid.points[i])
                .total_cmp(&boundary_distance(space, &space.grid.points[j]))
                .then(j.cmp(&i))
        })
        .ok_or_else(|| Error::InvalidArgument("empty grid".into()))?;
    Ok(JacobianReport {
        sigma_j: space.grid.points[node].clone(),
        jacobians,
        ranks,
        sigma_max,
        k_j,
        node,
    })
}

/// Unit vector spanning the kernel direction of a `2 × 2` Jacobian (the
/// right singular vector of the smallest singular value).
pub fn kernel_direction(j: &DMatrix<f64>) -> [f64; 2] {
    let m = Matrix2::new(j[(0, 0)], j[(0, 1)], j[(1, 0)], j[(1, 1)]);
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let i = if svd.singular_values[0] <= svd.singular_values[1] { 0 } else { 1 };
    let v = [vt[(i, 0)], vt[(i, 1)]];
    // fix the sign for reproducibility
    if v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0) {
        [-v[0], -v[1]]
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::demos;

    fn square() -> ParamSpace {
        ParamSpace::box_space(vec![(-1.0, 1.0), (-1.0, 1.0)], vec![9, 9]).unwrap()
    }

    #[test]
    fn ranks_of_simple_fields() {
        let r = jacobian_rank(&MatrixField::scalar(BivariateSeries::sigma()), &square()).unwrap();
        assert_eq!(r.k_j, 2);
        // odd node count: the center is a node
        assert!(r.sigma_j.iter().all(|x| x.abs() < 1e-14));
        let r = jacobian_rank(&MatrixField::scalar(demos::sigma1()), &square()).unwrap();
        assert_eq!(r.k_j, 1);
        let r = jacobian_rank(&MatrixField::scalar(BivariateSeries::constant(C64::new(3.0, 1.0))), &square()).unwrap();
        assert_eq!(r.k_j, 0);
        let r = jacobian_rank(&MatrixField::scalar(BivariateSeries::sigma_bar()), &square()).unwrap();
        assert_eq!(r.k_j, 2);
    }

    #[test]
    fn series_and_differences_agree() {
        let s = BivariateSeries::sigma().pow(2).add(&BivariateSeries::sigma_bar().mul(&BivariateSeries::sigma()).scale(C64::new(0.3, 0.1)));
        let space = square();
        let f = s.clone();
        let func = MatrixField::function(1, 1, move |p| Ok(DMatrix::from_element(1, 1, f.eval_unchecked(C64::new(p[0], p[1])))));
        for p in space.grid.points.iter().step_by(4) {
            let exact = jacobian_at(&MatrixField::scalar(s.clone()), &space, p).unwrap();
            let fd = jacobian_at(&func, &space, p).unwrap();
            assert!((exact - fd).abs().max() < 1e-6);
        }
    }

    #[test]
    fn sampled_field_rank() {
        let space = square();
        let v: Vec<C64> = space.grid.points.iter().map(|p| C64::new(p[0], 0.0)).collect();
        let a = MatrixField::from_entries(1, 1, vec![Entry::Samples(std::sync::Arc::new(v))]).unwrap();
        assert_eq!(jacobian_rank(&a, &space).unwrap().k_j, 1);
    }

    #[test]
    fn kernel_of_real_part() {
        let j = series_jacobian(&demos::sigma1(), &[0.2, 0.3]).unwrap();
        let v = kernel_direction(&j);
        assert!(v[0].abs() < 1e-14 && (v[1].abs() - 1.0).abs() < 1e-14);
    }
}
