//! Block-triangular form along an eigenvalue branch and the reduction to
//! scalar pairs.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::branch::{eigen_branch, BranchOptions, EigenBranch};
use crate::ensemble::space::{ParamSpace, SpaceKind};
use crate::ensemble::system::{EnsembleSystem, MatrixField};
use crate::error::{Error, Result};

type C64 = Complex64;

const INDEPENDENCE_TOL: f64 = 1e-8;

/// Orthonormalizes `cols` (twice-iterated Gram–Schmidt against `against` and
/// each other), keeping at most `want` vectors whose residual norm exceeds
/// `INDEPENDENCE_TOL` times the original norm.
fn orthonormal(cols: &[DMatrix<C64>], against: &[DMatrix<C64>], want: usize) -> Vec<DMatrix<C64>> {
    let mut out: Vec<DMatrix<C64>> = Vec::new();
    for c in cols {
        if out.len() == want {
            break;
        }
        let original = c.norm();
        if original == 0.0 {
            continue;
        }
        let mut v = c.clone();
        for _ in 0..2 {
            for q in against.iter().chain(out.iter()) {
                let coef = q.dotc(&v);
                v -= q * coef;
            }
        }
        let nv = v.norm();
        if nv > INDEPENDENCE_TOL * original {
            out.push(v / C64::new(nv, 0.0));
        }
    }
    out
}

/// Orthonormal basis of `ker(A - λI)` of dimension `k`.
fn eigenspace(a: &DMatrix<C64>, lambda: C64, k: usize) -> DMatrix<C64> {
    let n = a.nrows();
    let shifted = a - DMatrix::identity(n, n) * lambda;
    let svd = shifted.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let cols: Vec<_> = order[..k].iter().map(|&i| vt.row(i).adjoint()).collect();
    DMatrix::from_columns(&cols)
}

fn hstack(cols: &[DMatrix<C64>]) -> DMatrix<C64> {
    DMatrix::from_columns(&cols.iter().map(|c| c.column(0)).collect::<Vec<_>>())
}

fn unit(n: usize, i: usize) -> DMatrix<C64> {
    let mut e = DMatrix::zeros(n, 1);
    e[(i, 0)] = C64::new(1.0, 0.0);
    e
}

/// Unitary frames `P(σ) = [V W]` adapted to a branch: `V` spans the
/// eigenspace and is the orthonormalized projection of a fixed seed basis,
/// `W` the orthonormalized projection of a fixed complement.
#[derive(Debug, Clone)]
pub struct BranchFrame {
    pub branch: EigenBranch,
    v_seed: Vec<DMatrix<C64>>,
    w_seed: Vec<DMatrix<C64>>,
}

impl BranchFrame {
    pub fn new(a: &MatrixField, branch: EigenBranch) -> Result<Self> {
        let p = branch.seed_point().to_vec();
        let a0 = a.eval_point(&p)?;
        let n = a0.nrows();
        let k = branch.geo_mult;
        let e = eigenspace(&a0, branch.seed_lambda(), k);
        let proj = &e * e.adjoint();
        let v_seed = orthonormal(&(0..n).map(|i| &proj * unit(n, i)).collect::<Vec<_>>(), &[], k);
        let w_seed = orthonormal(&(0..n).map(|i| unit(n, i)).collect::<Vec<_>>(), &v_seed, n - k);
        if v_seed.len() != k || w_seed.len() != n - k {
            return Err(Error::Precondition("could not build a seed frame for the eigenspace".into()));
        }
        Ok(BranchFrame { branch, v_seed, w_seed })
    }

    /// `P` at the point `p` given `A(p)`.
    pub fn frame_at(&self, a: &DMatrix<C64>, p: &[f64]) -> Result<DMatrix<C64>> {
        let n = a.nrows();
        let k = self.branch.geo_mult;
        let cl = self.branch.cluster_at(a, p)?;
        let e = eigenspace(a, cl.lambda, k);
        let proj = &e * e.adjoint();
        let v = orthonormal(&self.v_seed.iter().map(|s| &proj * s).collect::<Vec<_>>(), &[], k);
        if v.len() != k {
            return Err(Error::EigenspaceChange {
                point: p.to_vec(),
                expected: k,
                found: v.len(),
            });
        }
        let w = orthonormal(&self.w_seed, &v, n - k);
        if w.len() != n - k {
            return Err(Error::EigenspaceChange {
                point: p.to_vec(),
                expected: k,
                found: n - w.len(),
            });
        }
        let mut cols = v;
        cols.extend(w);
        Ok(hstack(&cols))
    }
}

#[derive(Debug, Clone)]
pub struct Triangularization {
    /// `(P⁻¹AP, P⁻¹B)` on the branch region.
    pub system: EnsembleSystem,
    pub frame: Arc<BranchFrame>,
    /// Size of the leading block `λI`.
    pub k: usize,
    /// Largest `‖A'₂₁‖_F` over the region nodes.
    pub lower_left: f64,
    /// Largest `‖A'₁₁ - λI‖_F` over the region nodes.
    pub leading_defect: f64,
}

/// Transforms `sys` to block upper-triangular form along `branch`.
pub fn triangularize(sys: &EnsembleSystem, branch: &EigenBranch) -> Result<Triangularization> {
    if matches!(sys.space.kind, SpaceKind::Annulus { .. }) {
        return Err(Error::InvalidArgument("triangularization needs a box or disk".into()));
    }
    let frame = Arc::new(BranchFrame::new(&sys.a, branch.clone())?);
    let (n, m) = (sys.n, sys.m);
    let (a_field, b_field) = (sys.a.clone(), sys.b.clone());

    let (fa, af) = (frame.clone(), a_field.clone());
    let a_new = MatrixField::function(n, n, move |p| {
        let a = af.eval_point(p)?;
        let pm = fa.frame_at(&a, p)?;
        Ok(pm.adjoint() * a * pm)
    });
    let (fb, af) = (frame.clone(), a_field);
    let b_new = MatrixField::function(n, m, move |p| {
        let a = af.eval_point(p)?;
        let pm = fb.frame_at(&a, p)?;
        Ok(pm.adjoint() * b_field.eval_point(p)?)
    });
    let system = EnsembleSystem::new(branch.space.clone(), a_new, b_new, sys.field)?;

    let k = branch.geo_mult;
    let checks: Vec<(f64, f64)> = (0..branch.space.len())
        .into_par_iter()
        .map(|i| {
            let ap = system.a.eval_point(&branch.space.grid.points[i])?;
            let low = ap.view((k, 0), (n - k, k)).norm();
            let lead = (ap.view((0, 0), (k, k)) - DMatrix::identity(k, k) * branch.lambda[i]).norm();
            Ok((low, lead))
        })
        .collect::<Result<_>>()?;
    let lower_left = checks.iter().map(|c| c.0).fold(0.0, f64::max);
    let leading_defect = checks.iter().map(|c| c.1).fold(0.0, f64::max);
    Ok(Triangularization {
        system,
        frame,
        k,
        lower_left,
        leading_defect,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionCase {
    /// The input was already scalar.
    Scalar,
    /// `A' = λI`: every row gives a scalar pair.
    Diagonal,
    /// Proper eigenspace: recurse on the lower-right corner.
    Corner,
}

#[derive(Debug, Clone)]
pub struct ReductionLevel {
    pub n: usize,
    pub case: ReductionCase,
    pub alg_mult: usize,
    pub geo_mult: usize,
    pub seed_lambda: C64,
    pub region: ParamSpace,
    pub lower_left: f64,
}

#[derive(Debug, Clone)]
pub struct ScalarReduction {
    /// Scalar systems; the first one is the primary pair.
    pub pairs: Vec<EnsembleSystem>,
    pub levels: Vec<ReductionLevel>,
}

impl ScalarReduction {
    pub fn primary(&self) -> &EnsembleSystem {
        &self.pairs[0]
    }
}

fn block(field: &MatrixField, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> MatrixField {
    let f = field.clone();
    let (r0, c0) = (rows.start, cols.start);
    let (nr, nc) = (rows.len(), cols.len());
    MatrixField::function(nr, nc, move |p| Ok(f.eval_point(p)?.view((r0, c0), (nr, nc)).into_owned()))
}

/// Reduces `sys` to scalar pairs `(a, b)` by repeated triangularization.
pub fn reduce_to_scalar(sys: &EnsembleSystem, opts: &BranchOptions) -> Result<ScalarReduction> {
    let mut levels = Vec::new();
    let pairs = reduce_rec(sys, opts, &mut levels)?;
    Ok(ScalarReduction { pairs, levels })
}

fn reduce_rec(sys: &EnsembleSystem, opts: &BranchOptions, levels: &mut Vec<ReductionLevel>) -> Result<Vec<EnsembleSystem>> {
    let n = sys.n;
    if n == 1 {
        if levels.is_empty() {
            levels.push(ReductionLevel {
                n,
                case: ReductionCase::Scalar,
                alg_mult: 1,
                geo_mult: 1,
                seed_lambda: C64::new(f64::NAN, f64::NAN),
                region: sys.space.clone(),
                lower_left: 0.0,
            });
        }
        return Ok(vec![sys.clone()]);
    }
    let branch = eigen_branch(sys, opts).map_err(|e| e.in_stage("eigen_branch"))?;
    let tri = triangularize(sys, &branch).map_err(|e| e.in_stage("triangularize"))?;
    let k = tri.k;
    let case = if k == n { ReductionCase::Diagonal } else { ReductionCase::Corner };
    levels.push(ReductionLevel {
        n,
        case,
        alg_mult: branch.alg_mult,
        geo_mult: k,
        seed_lambda: branch.seed_lambda(),
        region: branch.space.clone(),
        lower_left: tri.lower_left,
    });
    let t = &tri.system;
    match case {
        ReductionCase::Diagonal => (0..n)
            .map(|i| {
                EnsembleSystem::new(t.space.clone(), block(&t.a, i..i + 1, i..i + 1), block(&t.b, i..i + 1, 0..t.m), t.field)
            })
            .collect(),
        _ => {
            let corner = EnsembleSystem::new(t.space.clone(), block(&t.a, k..n, k..n), block(&t.b, k..n, 0..t.m), t.field)
                .map_err(|e| e.in_stage("reduce_to_scalar"))?;
            let inner = BranchOptions {
                seed: None,
                ..opts.clone()
            };
            reduce_rec(&corner, &inner, levels)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::demos;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_frame_is_identity() {
        let sys = demos::diagonal_real(demos::unit_box(10).unwrap()).unwrap();
        let br = eigen_branch(&sys, &BranchOptions::default()).unwrap();
        let tri = triangularize(&sys, &br).unwrap();
        for p in br.space.grid.points.iter().step_by(7) {
            let a = sys.a.eval_point(p).unwrap();
            let pm = tri.frame.frame_at(&a, p).unwrap();
            assert!((pm.clone() - DMatrix::identity(2, 2)).norm() < 1e-12, "{pm}");
            assert!((tri.system.a.eval_point(p).unwrap() - a).norm() < 1e-12);
        }
        assert!(tri.lower_left < 1e-12);
    }

    #[test]
    fn similarity_and_triangular_block() {
        // A = [[σ1, 1 + σ2], [0.5, 2 + σ2]] has simple real eigenvalues
        use crate::analytic::BivariateSeries;
        let s1 = demos::sigma1();
        let s2 = demos::sigma2();
        let k = |x: f64| BivariateSeries::constant(c(x, 0.0));
        let a = MatrixField::from_series(2, 2, vec![s1, k(1.0).add(&s2), k(0.5), k(2.0).add(&s2)]).unwrap();
        let b = MatrixField::from_series(2, 1, vec![k(1.0), k(0.0)]).unwrap();
        let sys = EnsembleSystem::new(demos::unit_box(8).unwrap(), a, b, crate::ensemble::FieldTag::Real).unwrap();
        let br = eigen_branch(&sys, &BranchOptions::default()).unwrap();
        let tri = triangularize(&sys, &br).unwrap();
        assert!(tri.lower_left < 1e-10);
        for (i, p) in br.space.grid.points.iter().enumerate().step_by(5) {
            let a = sys.a.eval_point(p).unwrap();
            let pm = tri.frame.frame_at(&a, p).unwrap();
            let inv = pm.clone().try_inverse().unwrap();
            let ap = tri.system.a.eval_point(p).unwrap();
            assert!((&inv * &a * &pm - &ap).norm() < 1e-10);
            assert!((ap[(0, 0)] - br.lambda[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn case_one_pairs() {
        let sys = demos::scalar_identity(demos::unit_box(8).unwrap()).unwrap();
        let red = reduce_to_scalar(&sys, &BranchOptions::default()).unwrap();
        assert_eq!(red.levels[0].case, ReductionCase::Diagonal);
        assert_eq!(red.pairs.len(), 2);
        let p = &red.pairs[0].space.grid.points[3];
        let a = red.pairs[0].a.eval_point(p).unwrap()[(0, 0)];
        assert!((a - c(p[0], 0.0)).norm() < 1e-12);
        let b0 = red.pairs[0].b.eval_point(p).unwrap()[(0, 0)];
        let b1 = red.pairs[1].b.eval_point(p).unwrap()[(0, 0)];
        // rows of P⁻¹B, with P = I
        assert!((b0 - c(1.0, 0.0)).norm() < 1e-12 && (b1 - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn case_two_corner() {
        let sys = demos::diagonal_real(demos::unit_box(8).unwrap()).unwrap();
        let red = reduce_to_scalar(&sys, &BranchOptions::default()).unwrap();
        assert_eq!(red.levels[0].case, ReductionCase::Corner);
        assert_eq!(red.pairs.len(), 1);
        let pair = red.primary();
        for p in pair.space.grid.points.iter().step_by(9) {
            let a = pair.a.eval_point(p).unwrap()[(0, 0)];
            assert!((a - c(2.0 + p[0] + p[1] * p[1], 0.0)).norm() < 1e-12);
            assert!((pair.b.eval_point(p).unwrap()[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn jordan_corner() {
        let sys = demos::jordan(demos::unit_box(8).unwrap()).unwrap();
        let red = reduce_to_scalar(&sys, &BranchOptions::default()).unwrap();
        assert_eq!((red.levels[0].alg_mult, red.levels[0].geo_mult), (2, 1));
        let pair = red.primary();
        let p = &pair.space.grid.points[10];
        let a = pair.a.eval_point(p).unwrap()[(0, 0)];
        assert!((a - c(p[0], 0.0)).norm() < 1e-7);
    }

    #[test]
    fn scalar_input_unchanged() {
        use crate::analytic::BivariateSeries;
        let sys = EnsembleSystem::scalar(
            demos::unit_box(4).unwrap(),
            BivariateSeries::sigma(),
            vec![BivariateSeries::one()],
            crate::ensemble::FieldTag::Complex,
        )
        .unwrap();
        let red = reduce_to_scalar(&sys, &BranchOptions::default()).unwrap();
        assert_eq!(red.levels[0].case, ReductionCase::Scalar);
        assert!(red.primary().a.series().is_some());
    }

    #[test]
    fn eigenspace_change_is_reported() {
        // A = [[σ1, σ2], [0, σ1]]: geometric multiplicity drops off σ2 = 0
        use crate::analytic::BivariateSeries;
        let s1 = demos::sigma1();
        let a = MatrixField::from_series(2, 2, vec![s1.clone(), demos::sigma2(), BivariateSeries::zero(), s1]).unwrap();
        let b = MatrixField::from_series(2, 1, vec![BivariateSeries::one(), BivariateSeries::one()]).unwrap();
        let space = ParamSpace::box_space(vec![(0.0, 1.0), (-1e-9, 1.0)], vec![6, 6]).unwrap();
        let sys = EnsembleSystem::new(space, a, b, crate::ensemble::FieldTag::Real).unwrap();
        let br = eigen_branch(&sys, &BranchOptions::default()).unwrap();
        assert_eq!(br.geo_mult, 1);
        let frame = BranchFrame::new(&sys.a, br).unwrap();
        let p = [0.5, 0.0];
        let err = frame.frame_at(&sys.a.eval_point(&p).unwrap(), &p).unwrap_err();
        assert!(matches!(err, Error::EigenspaceChange { .. }), "{err}");
    }
}
