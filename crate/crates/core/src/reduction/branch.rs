//! Eigenvalue branches of a matrix field over a box.

use std::collections::VecDeque;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::ensemble::space::{GridShape, ParamSpace, SpaceKind};
use crate::ensemble::system::{EnsembleSystem, MatrixField};
use crate::error::{Error, Result};

type C64 = Complex64;

/// Eigenvalues closer than `CLUSTER_REL · (1 + ‖A‖_F)` form one cluster.
pub const CLUSTER_REL: f64 = 1e-6;
/// Matching to the nearest cluster needs `d1 < AMBIGUITY · d2`.
pub const AMBIGUITY: f64 = 0.5;
const MAX_SHRINKS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenCluster {
    pub lambda: C64,
    /// Algebraic multiplicity (cluster size).
    pub alg: usize,
    /// Geometric multiplicity `n - rank(A - λI)`.
    pub geo: usize,
}

pub fn cluster_tol(a: &DMatrix<C64>) -> f64 {
    CLUSTER_REL * (1.0 + a.norm())
}

/// Eigenvalues of `a` from its complex Schur form.
pub fn eigenvalues(a: &DMatrix<C64>) -> Vec<C64> {
    let (_, t) = a.clone().schur().unpack();
    t.diagonal().iter().copied().collect()
}

/// Numerical rank with singular values above `tol`.
pub fn rank(m: &DMatrix<C64>, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    m.clone().singular_values().iter().filter(|&&s| s > tol).count()
}

/// Eigenvalue clusters of `a`, sorted by `(re, im)` of their centers.
pub fn clusters(a: &DMatrix<C64>) -> Vec<EigenCluster> {
    let n = a.nrows();
    let tol = cluster_tol(a);
    let mut ev = eigenvalues(a);
    ev.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    // single linkage
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (ev[i] - ev[j]).norm() <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj.max(ri)] = rj.min(ri);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<C64>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, g)) => g.push(ev[i]),
            None => groups.push((r, vec![ev[i]])),
        }
    }
    let mut out: Vec<EigenCluster> = groups
        .into_iter()
        .map(|(_, g)| {
            let lambda = g.iter().sum::<C64>() / g.len() as f64;
            let shifted = a - DMatrix::identity(n, n) * lambda;
            EigenCluster {
                lambda,
                alg: g.len(),
                geo: n - rank(&shifted, tol),
            }
        })
        .collect();
    out.sort_by(|x, y| x.lambda.re.total_cmp(&y.lambda.re).then(x.lambda.im.total_cmp(&y.lambda.im)));
    out
}

/// Index of the cluster nearest `target` and whether the match is
/// unambiguous.
pub fn match_cluster(cs: &[EigenCluster], target: C64) -> Option<(usize, bool)> {
    let mut d: Vec<(f64, usize)> = cs.iter().enumerate().map(|(i, c)| ((c.lambda - target).norm(), i)).collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (d1, i) = *d.first()?;
    let clear = d.get(1).map_or(true, |&(d2, _)| d1 < AMBIGUITY * d2);
    Some((i, clear))
}

#[derive(Debug, Clone)]
pub struct EigenBranch {
    /// Region the branch is tracked on (a box with a tensor grid).
    pub space: ParamSpace,
    /// Eigenvalue at every region node.
    pub lambda: Vec<C64>,
    pub alg_mult: usize,
    pub geo_mult: usize,
    pub seed_node: usize,
    /// Set when the region is smaller than the input box.
    pub shrunk: bool,
    /// Largest eigenvalue jump between adjacent region nodes.
    pub max_jump: f64,
}

impl EigenBranch {
    pub fn seed_point(&self) -> &[f64] {
        &self.space.grid.points[self.seed_node]
    }

    pub fn seed_lambda(&self) -> C64 {
        self.lambda[self.seed_node]
    }

    /// Nearest region node to `p`.
    pub fn nearest_node(&self, p: &[f64]) -> usize {
        nearest_node(&self.space, p)
    }

    /// The branch eigenvalue of `a` at an arbitrary point, matched against
    /// the nearest region node.
    pub fn cluster_at(&self, a: &DMatrix<C64>, p: &[f64]) -> Result<EigenCluster> {
        let reference = self.lambda[self.nearest_node(p)];
        let cs = clusters(a);
        let (i, clear) = match_cluster(&cs, reference).ok_or_else(|| Error::domain(p, "empty matrix"))?;
        let c = cs[i].clone();
        if !clear {
            return Err(Error::BranchCollision {
                node: self.nearest_node(p),
                detail: format!("ambiguous eigenvalue match at {p:?}"),
            });
        }
        if c.geo != self.geo_mult || c.alg != self.alg_mult {
            return Err(Error::EigenspaceChange {
                point: p.to_vec(),
                expected: self.geo_mult,
                found: c.geo,
            });
        }
        Ok(c)
    }
}

fn nearest_node(space: &ParamSpace, p: &[f64]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, q) in space.grid.points.iter().enumerate() {
        let d: f64 = q.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

fn center(space: &ParamSpace) -> Vec<f64> {
    match &space.kind {
        SpaceKind::Interval { a, b } => vec![0.5 * (a + b)],
        SpaceKind::Box { bounds } => bounds.iter().map(|(a, b)| 0.5 * (a + b)).collect(),
        SpaceKind::Disk { .. } | SpaceKind::Annulus { .. } => vec![0.0, 0.0],
    }
}

fn box_bounds(space: &ParamSpace) -> Option<Vec<(f64, f64)>> {
    match &space.kind {
        SpaceKind::Interval { a, b } => Some(vec![(*a, *b)]),
        SpaceKind::Box { bounds } => Some(bounds.clone()),
        _ => None,
    }
}

/// Largest square inscribed in a disk, with `nodes` Gauss nodes per side.
pub fn inscribed_square(r: f64, nodes: usize) -> Result<ParamSpace> {
    let h = r / 2f64.sqrt();
    ParamSpace::box_space(vec![(-h, h), (-h, h)], vec![nodes, nodes])
}

/// Same system over a box: disks are replaced by their inscribed square.
pub fn to_box(sys: &EnsembleSystem, nodes: usize) -> Result<EnsembleSystem> {
    match sys.space.kind {
        SpaceKind::Disk { r } => sys.pullback(inscribed_square(r, nodes)?, Arc::new(|p: &[f64]| p.to_vec())),
        SpaceKind::Annulus { .. } => Err(Error::InvalidArgument(
            "eigenvalue branches need a box or disk parameter space".into(),
        )),
        _ => Ok(sys.clone()),
    }
}

#[derive(Debug, Clone)]
pub struct BranchOptions {
    /// Explicit seed point; `None` scans for the smallest multiplicity.
    pub seed: Option<Vec<f64>>,
    /// Nodes per side when a disk is replaced by its inscribed square.
    pub square_nodes: usize,
}

impl Default for BranchOptions {
    fn default() -> Self {
        BranchOptions {
            seed: None,
            square_nodes: 24,
        }
    }
}

/// Tracks one eigenvalue branch of `sys.a`.
///
/// Without an explicit seed the node and eigenvalue of smallest clustered
/// algebraic multiplicity are chosen (ties: node nearest the center, then
/// lowest `(re, im)`). The branch is continued by nearest-cluster matching
/// from neighbouring nodes; the largest sub-rectangle around the seed with
/// constant multiplicities and unambiguous matches is kept and regridded.
pub fn eigen_branch(sys: &EnsembleSystem, opts: &BranchOptions) -> Result<EigenBranch> {
    let sys = to_box(sys, opts.square_nodes)?;
    let original = box_bounds(&sys.space).expect("box space");
    let mut space = sys.space.clone();
    let mut hint: Option<(Vec<f64>, C64)> = None;
    for _ in 0..MAX_SHRINKS {
        let mats: Vec<DMatrix<C64>> = (0..space.len())
            .into_par_iter()
            .map(|i| sys.a.eval_point(&space.grid.points[i]))
            .collect::<Result<_>>()?;
        let all: Vec<Vec<EigenCluster>> = mats.par_iter().map(clusters).collect();
        let (seed_node, seed_cluster) = pick_seed(&space, &all, opts.seed.as_deref(), hint.as_ref())?;
        let target = (all[seed_node][seed_cluster].alg, all[seed_node][seed_cluster].geo);

        let dims = match &space.grid.shape {
            GridShape::Tensor(d) => d.clone(),
            GridShape::Polar { .. } => unreachable!("box grids are tensor grids"),
        };
        if dims.len() > 2 {
            return Err(Error::Dimension("eigenvalue branches support 1- or 2-dimensional boxes".into()));
        }
        let mut lambda: Vec<Option<C64>> = vec![None; space.len()];
        lambda[seed_node] = Some(all[seed_node][seed_cluster].lambda);
        let mut queue = VecDeque::from([seed_node]);
        let mut max_jump: f64 = 0.0;
        while let Some(i) = queue.pop_front() {
            let li = lambda[i].unwrap();
            for j in neighbours(&space, &dims, i) {
                if lambda[j].is_some() {
                    continue;
                }
                let Some((c, clear)) = match_cluster(&all[j], li) else { continue };
                let cl = &all[j][c];
                if clear && (cl.alg, cl.geo) == target {
                    max_jump = max_jump.max((cl.lambda - li).norm());
                    lambda[j] = Some(cl.lambda);
                    queue.push_back(j);
                }
            }
        }
        let ok: Vec<bool> = lambda.iter().map(|l| l.is_some()).collect();
        let seed_multi = space.grid.multi_index(seed_node);
        let (lo, hi) = largest_rectangle(&dims, &ok, &seed_multi);
        let full = lo.iter().all(|&x| x == 0) && hi.iter().zip(&dims).all(|(&h, &n)| h + 1 == n);
        if full {
            let current = box_bounds(&space).unwrap();
            return Ok(EigenBranch {
                lambda: lambda.into_iter().map(Option::unwrap).collect(),
                alg_mult: target.0,
                geo_mult: target.1,
                seed_node,
                shrunk: current != original,
                max_jump,
                space,
            });
        }
        if lo.iter().zip(&hi).any(|(&l, &h)| h - l + 1 < 3) {
            let bad = (0..space.len()).find(|&i| !ok[i] && is_adjacent(&space, &dims, i, &ok)).unwrap_or(seed_node);
            return Err(Error::BranchCollision {
                node: bad,
                detail: format!(
                    "branch through {:?} (lambda = {}) cannot be separated on a region at least 3 nodes wide",
                    space.grid.points[seed_node],
                    all[seed_node][seed_cluster].lambda
                ),
            });
        }
        let bounds: Vec<(f64, f64)> = (0..dims.len())
            .map(|d| (space.grid.axes[d][lo[d]], space.grid.axes[d][hi[d]]))
            .collect();
        hint = Some((space.grid.points[seed_node].clone(), all[seed_node][seed_cluster].lambda));
        space = ParamSpace::box_space(bounds, dims.clone())?;
    }
    Err(Error::BranchCollision {
        node: 0,
        detail: "region kept shrinking without stabilizing".into(),
    })
}

fn pick_seed(
    space: &ParamSpace,
    all: &[Vec<EigenCluster>],
    seed: Option<&[f64]>,
    hint: Option<&(Vec<f64>, C64)>,
) -> Result<(usize, usize)> {
    let lowest = |cs: &[EigenCluster]| -> usize {
        let min_alg = cs.iter().map(|c| c.alg).min().unwrap_or(0);
        cs.iter().position(|c| c.alg == min_alg).unwrap_or(0)
    };
    if let Some((p, l)) = hint {
        let node = nearest_node(space, p);
        let (c, _) = match_cluster(&all[node], *l).ok_or_else(|| Error::domain(p, "no eigenvalues"))?;
        return Ok((node, c));
    }
    if let Some(p) = seed {
        if !space.contains(p, 1e-12) {
            return Err(Error::domain(p, "seed point outside the parameter box"));
        }
        let node = nearest_node(space, p);
        return Ok((node, lowest(&all[node])));
    }
    let best = all.iter().map(|cs| cs.iter().map(|c| c.alg).min().unwrap_or(usize::MAX)).min().unwrap_or(0);
    let c = center(space);
    let node = (0..space.len())
        .filter(|&i| all[i].iter().any(|cl| cl.alg == best))
        .min_by(|&i, &j| {
            let di: f64 = space.grid.points[i].iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum();
            let dj: f64 = space.grid.points[j].iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum();
            di.total_cmp(&dj)
        })
        .ok_or_else(|| Error::InvalidArgument("empty grid".into()))?;
    Ok((node, lowest(&all[node])))
}

fn neighbours(space: &ParamSpace, dims: &[usize], i: usize) -> Vec<usize> {
    let m = space.grid.multi_index(i);
    let mut out = Vec::new();
    for d in 0..dims.len() {
        for delta in [-1i64, 1] {
            let v = m[d] as i64 + delta;
            if v >= 0 && (v as usize) < dims[d] {
                let mut q = m.clone();
                q[d] = v as usize;
                out.push(space.grid.linear_index(&q));
            }
        }
    }
    out
}

fn is_adjacent(space: &ParamSpace, dims: &[usize], i: usize, ok: &[bool]) -> bool {
    neighbours(space, dims, i).into_iter().any(|j| ok[j])
}

/// Largest all-`ok` index rectangle containing `seed` (1 or 2 dimensions).
fn largest_rectangle(dims: &[usize], ok: &[bool], seed: &[usize]) -> (Vec<usize>, Vec<usize>) {
    if dims.len() == 1 {
        let (mut lo, mut hi) = (seed[0], seed[0]);
        while lo > 0 && ok[lo - 1] {
            lo -= 1;
        }
        while hi + 1 < dims[0] && ok[hi + 1] {
            hi += 1;
        }
        return (vec![lo], vec![hi]);
    }
    let (n0, n1) = (dims[0], dims[1]);
    // prefix sums of bad nodes
    let mut pre = vec![0usize; (n0 + 1) * (n1 + 1)];
    for i in 0..n0 {
        for j in 0..n1 {
            let bad = usize::from(!ok[i * n1 + j]);
            pre[(i + 1) * (n1 + 1) + j + 1] =
                bad + pre[i * (n1 + 1) + j + 1] + pre[(i + 1) * (n1 + 1) + j] - pre[i * (n1 + 1) + j];
        }
    }
    let count = |i0: usize, i1: usize, j0: usize, j1: usize| {
        pre[(i1 + 1) * (n1 + 1) + j1 + 1] + pre[i0 * (n1 + 1) + j0] - pre[i0 * (n1 + 1) + j1 + 1] - pre[(i1 + 1) * (n1 + 1) + j0]
    };
    let mut best = (0usize, vec![seed[0], seed[1]], vec![seed[0], seed[1]]);
    for i0 in 0..=seed[0] {
        for i1 in seed[0]..n0 {
            for j0 in 0..=seed[1] {
                for j1 in seed[1]..n1 {
                    let area = (i1 - i0 + 1) * (j1 - j0 + 1);
                    if area > best.0 && count(i0, i1, j0, j1) == 0 {
                        best = (area, vec![i0, j0], vec![i1, j1]);
                    }
                }
            }
        }
    }
    (best.1, best.2)
}

/// Convenience: branch of a constant-shape matrix field over a box.
pub fn eigen_branch_of(space: ParamSpace, a: MatrixField, opts: &BranchOptions) -> Result<EigenBranch> {
    let (n, _) = a.shape();
    let b = MatrixField::constant(DMatrix::from_element(n, 1, C64::new(1.0, 0.0)));
    let sys = EnsembleSystem::new(space, a, b, crate::ensemble::FieldTag::Complex)?;
    eigen_branch(&sys, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::demos;

    fn unit_box() -> ParamSpace {
        ParamSpace::box_space(vec![(0.0, 1.0), (0.0, 1.0)], vec![12, 12]).unwrap()
    }

    #[test]
    fn clusters_of_jordan_and_scalar_blocks() {
        let one = C64::new(1.0, 0.0);
        let z = C64::new(0.0, 0.0);
        let j = DMatrix::from_row_slice(2, 2, &[one * 0.3, one, z, one * 0.3]);
        let cs = clusters(&j);
        assert_eq!(cs.len(), 1);
        assert_eq!((cs[0].alg, cs[0].geo), (2, 1));
        let s = DMatrix::identity(2, 2) * (one * 0.3);
        let cs = clusters(&s);
        assert_eq!((cs[0].alg, cs[0].geo), (2, 2));
    }

    #[test]
    fn diagonal_branch() {
        let sys = demos::diagonal_real(unit_box()).unwrap();
        let br = eigen_branch(&sys, &BranchOptions::default()).unwrap();
        assert_eq!((br.alg_mult, br.geo_mult), (1, 1));
        assert!(!br.shrunk);
        for (l, p) in br.lambda.iter().zip(&br.space.grid.points) {
            assert!((l - C64::new(p[0], 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn scalar_and_jordan_multiplicities() {
        let br = eigen_branch(&demos::scalar_identity(unit_box()).unwrap(), &BranchOptions::default()).unwrap();
        assert_eq!((br.alg_mult, br.geo_mult), (2, 2));
        let br = eigen_branch(&demos::jordan(unit_box()).unwrap(), &BranchOptions::default()).unwrap();
        assert_eq!((br.alg_mult, br.geo_mult), (2, 1));
        for (l, p) in br.lambda.iter().zip(&br.space.grid.points) {
            assert!((l - C64::new(p[0], 0.0)).norm() < 1e-7);
        }
    }

    #[test]
    fn crossing_is_a_collision() {
        let space = ParamSpace::box_space(vec![(-1.0, 1.0), (-1.0, 1.0)], vec![12, 12]).unwrap();
        let sys = demos::ring_crossing(space, 0.2).unwrap();
        assert!(matches!(eigen_branch(&sys, &BranchOptions::default()), Err(Error::BranchCollision { .. })));
    }

    #[test]
    fn crossing_off_center_shrinks() {
        // eigenvalues σ1 and 1.6 - σ1 meet on the line σ1 = 0.8
        let space = ParamSpace::box_space(vec![(0.0, 1.0), (0.0, 1.0)], vec![16, 8]).unwrap();
        let sys = demos::crossing_at(space, 0.8).unwrap();
        let br = eigen_branch(&sys, &BranchOptions::default()).unwrap();
        assert!(br.shrunk);
        let SpaceKind::Box { bounds } = &br.space.kind else { panic!() };
        assert!(bounds[0].1 < 0.8);
    }
}
