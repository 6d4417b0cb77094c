//! Witnesses of non-density when the scalar coefficient has a rank-deficient
//! Jacobian: project a probe off the span of the inputs on every slice where
//! `a` is constant.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use num_complex::Complex64;

use super::branch::inscribed_square;
use super::jacobian::{boundary_distance, jacobian_at, jacobian_rank, kernel_direction};
use crate::ensemble::space::{GridShape, ParamSpace, SpaceKind};
use crate::ensemble::system::{EnsembleSystem, Entry, MatrixField};
use crate::error::{Error, Result};

type C64 = Complex64;

#[derive(Debug, Clone)]
pub struct SliceOptions {
    /// The coordinates are already straightened: `a` is constant in `μ1`.
    pub straightened: bool,
    /// Probe powers `p` of `μ1^p`, tried in order.
    pub probes: Vec<u32>,
    /// Largest power `k` of `a` in the orthogonality check.
    pub k_check: u32,
    pub tolerance: f64,
    /// Nodes per side of the chart box.
    pub nodes: usize,
}

impl Default for SliceOptions {
    fn default() -> Self {
        SliceOptions {
            straightened: false,
            probes: vec![1, 2, 3],
            k_check: 10,
            tolerance: 1e-8,
            nodes: 24,
        }
    }
}

/// Chart on `[-h, h]²`: `μ2` moves along `across` from `origin`, `μ1` follows
/// the kernel direction of the Jacobian of `a`, so `a` depends on `μ2` only.
/// When `a`'s level sets are straight this is the affine map
/// `origin + μ1·along + μ2·across`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelChart {
    pub origin: [f64; 2],
    pub along: [f64; 2],
    pub across: [f64; 2],
    pub half_width: f64,
}

impl KernelChart {
    pub fn affine(&self, mu: &[f64]) -> Vec<f64> {
        (0..2)
            .map(|d| self.origin[d] + mu[0] * self.along[d] + mu[1] * self.across[d])
            .collect()
    }
}

const FLOW_STEPS: usize = 32;
const CHART_SHRINK: f64 = 0.7;
const CHART_TRIES: usize = 10;

fn oriented(v: [f64; 2], reference: [f64; 2]) -> [f64; 2] {
    if v[0] * reference[0] + v[1] * reference[1] < 0.0 {
        [-v[0], -v[1]]
    } else {
        v
    }
}

fn value(a: &MatrixField, p: &[f64]) -> Result<C64> {
    Ok(a.eval_point(p)?[(0, 0)])
}

/// Newton steps with the rank-truncated pseudo-inverse, pulling `p` back to
/// the level set `a = target`.
fn correct(a: &MatrixField, space: &ParamSpace, p: &mut [f64; 2], target: C64) -> Result<()> {
    for _ in 0..4 {
        let r = target - value(a, p)?;
        let j = jacobian_at(a, space, p)?;
        let svd = j.svd(true, true);
        let smax = svd.singular_values.max();
        if smax == 0.0 {
            return Ok(());
        }
        let pinv = svd
            .pseudo_inverse(1e-8 * smax)
            .map_err(|e| Error::Precondition(e.to_string()))?;
        let d = pinv * nalgebra::Vector2::new(r.re, r.im);
        p[0] += d[0];
        p[1] += d[1];
        if d.norm() <= 1e-15 * (1.0 + p[0].abs() + p[1].abs()) {
            break;
        }
    }
    Ok(())
}

fn rk4_step(a: &MatrixField, space: &ParamSpace, p: &mut [f64; 2], dt: f64, dir: &mut [f64; 2]) -> Result<()> {
    let field = |q: [f64; 2], reference: [f64; 2]| -> Result<[f64; 2]> {
        Ok(oriented(kernel_direction(&jacobian_at(a, space, &q)?), reference))
    };
    let k1 = field(*p, *dir)?;
    let k2 = field([p[0] + 0.5 * dt * k1[0], p[1] + 0.5 * dt * k1[1]], k1)?;
    let k3 = field([p[0] + 0.5 * dt * k2[0], p[1] + 0.5 * dt * k2[1]], k1)?;
    let k4 = field([p[0] + dt * k3[0], p[1] + dt * k3[1]], k1)?;
    for d in 0..2 {
        p[d] += dt / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
    }
    *dir = k1;
    Ok(())
}

/// Chart images of `(μ1, μ2)` for all `μ1` in `mu1` (ascending): one
/// corrected RK4 path along the kernel field in each direction from
/// `origin + μ2·across`.
fn flow_slice(
    a: &MatrixField,
    space: &ParamSpace,
    chart: &KernelChart,
    mu1: &[f64],
    mu2: f64,
) -> Result<Vec<[f64; 2]>> {
    let start = chart.affine(&[0.0, mu2]);
    let start = [start[0], start[1]];
    let target = value(a, &start)?;
    let max_dt = chart.half_width / FLOW_STEPS as f64;
    let mut out = vec![start; mu1.len()];
    let forward: Vec<usize> = (0..mu1.len()).filter(|&i| mu1[i] >= 0.0).collect();
    let backward: Vec<usize> = (0..mu1.len()).rev().filter(|&i| mu1[i] < 0.0).collect();
    for side in [forward, backward] {
        let (mut p, mut t, mut dir) = (start, 0.0, chart.along);
        for i in side {
            let span = mu1[i] - t;
            let steps = (span.abs() / max_dt).ceil().max(1.0) as usize;
            let dt = span / steps as f64;
            for _ in 0..steps {
                rk4_step(a, space, &mut p, dt, &mut dir)?;
                correct(a, space, &mut p, target)?;
            }
            t = mu1[i];
            out[i] = p;
        }
    }
    Ok(out)
}

/// Chart images of the nodes of `[-h, h]²`, shrinking `h` until all of them
/// lie in the parameter space.
fn chart_images(
    sys: &EnsembleSystem,
    chart: &mut KernelChart,
    nodes: usize,
    straight: bool,
) -> Result<(ParamSpace, Vec<Vec<f64>>)> {
    for _ in 0..CHART_TRIES {
        let h = chart.half_width;
        let space = ParamSpace::box_space(vec![(-h, h), (-h, h)], vec![nodes, nodes])?;
        let images: Vec<Vec<f64>> = if straight {
            space.grid.points.iter().map(|mu| chart.affine(mu)).collect()
        } else {
            let (mu1, mu2) = (&space.grid.axes[0], &space.grid.axes[1]);
            let slices: Vec<Vec<[f64; 2]>> = mu2
                .par_iter()
                .map(|&m2| flow_slice(&sys.a, &sys.space, chart, mu1, m2))
                .collect::<Result<_>>()?;
            (0..space.len())
                .map(|k| slices[k % mu2.len()][k / mu2.len()].to_vec())
                .collect()
        };
        if images.iter().all(|p| p.iter().all(|x| x.is_finite()) && sys.space.contains(p, 0.0)) {
            return Ok((space, images));
        }
        chart.half_width *= CHART_SHRINK;
    }
    Err(Error::Precondition("no chart around the maximal-rank node fits in the parameter space".into()))
}

/// The system sampled at `images`, carried by `space`.
fn sampled_system(sys: &EnsembleSystem, space: ParamSpace, images: &[Vec<f64>]) -> Result<EnsembleSystem> {
    let mats: Vec<(DMatrix<C64>, DMatrix<C64>)> = images
        .iter()
        .map(|p| Ok((sys.a.eval_point(p)?, sys.b.eval_point(p)?)))
        .collect::<Result<_>>()?;
    let a = vec![Entry::Samples(Arc::new(mats.iter().map(|(a, _)| a[(0, 0)]).collect()))];
    let b = (0..sys.m)
        .map(|i| Entry::Samples(Arc::new(mats.iter().map(|(_, b)| b[(0, i)]).collect())))
        .collect();
    EnsembleSystem::new(
        space,
        MatrixField::from_entries(1, 1, a)?,
        MatrixField::from_entries(1, sys.m, b)?,
        sys.field,
    )
}

#[derive(Debug, Clone)]
pub struct SliceWitness {
    /// Box in `(μ1, μ2)` coordinates carrying the witness samples.
    pub space: ParamSpace,
    pub chart: Option<KernelChart>,
    /// Parameter points of the witness nodes.
    pub points: Vec<Vec<f64>>,
    /// Witness `g` at the grid nodes.
    pub g: Vec<C64>,
    pub g_norm: f64,
    pub probe_power: u32,
    /// Number of independent inputs on each slice.
    pub slice_ranks: Vec<usize>,
    /// `(k, i, |⟨g, a^k b_i⟩| / (‖g‖ ‖a^k b_i‖))`.
    pub ratios: Vec<(u32, usize, f64)>,
    pub max_ratio: f64,
    /// Largest spread of `a` along a slice relative to `1 + max|a|`.
    pub a_variation: f64,
}

fn box_system(sys: &EnsembleSystem, nodes: usize) -> Result<EnsembleSystem> {
    match &sys.space.kind {
        SpaceKind::Box { bounds } if bounds.len() == 2 => Ok(sys.clone()),
        SpaceKind::Disk { r } => sys.pullback(inscribed_square(*r, nodes)?, Arc::new(|p: &[f64]| p.to_vec())),
        _ => Err(Error::Precondition("slice witnesses need a 2-dimensional box or disk".into())),
    }
}

/// Builds a slice witness for the scalar system `sys` (`n = 1`).
pub fn slice_witness(sys: &EnsembleSystem, opts: &SliceOptions) -> Result<SliceWitness> {
    if sys.n != 1 {
        return Err(Error::Dimension(format!("slice witnesses need a scalar system, got n = {}", sys.n)));
    }
    let (work, chart) = if opts.straightened {
        (box_system(sys, opts.nodes)?, None)
    } else {
        let report = jacobian_rank(&sys.a, &sys.space)?;
        if sys.space.dim() != 2 || report.k_j >= 2 {
            return Err(Error::Precondition(format!(
                "slice witnesses need a rank-deficient Jacobian, found k_J = {}",
                report.k_j
            )));
        }
        let v = if report.k_j == 0 { [1.0, 0.0] } else { kernel_direction(&report.jacobians[report.node]) };
        let h = boundary_distance(&sys.space, &report.sigma_j) / 2f64.sqrt();
        if !(h > 0.0) {
            return Err(Error::Precondition("no interior node for the chart".into()));
        }
        let p = &report.sigma_j;
        let mut chart = KernelChart {
            origin: [p[0], p[1]],
            along: v,
            across: [-v[1], v[0]],
            half_width: h,
        };
        let (chart_space, images) = chart_images(sys, &mut chart, opts.nodes, report.k_j == 0)?;
        (sampled_system(sys, chart_space, &images)?, Some((chart, images)))
    };
    let (chart, points) = match chart {
        Some((c, images)) => (Some(c), images),
        None => (None, work.space.grid.points.clone()),
    };

    let space = &work.space;
    let GridShape::Tensor(dims) = &space.grid.shape else {
        return Err(Error::Precondition("slice witnesses need a tensor grid".into()));
    };
    let (n0, n1) = (dims[0], dims[1]);
    let mats = work.node_matrices()?;
    let a: Vec<C64> = mats.iter().map(|(a, _)| a[(0, 0)]).collect();
    let b: Vec<Vec<C64>> = (0..work.m).map(|i| mats.iter().map(|(_, b)| b[(0, i)]).collect()).collect();
    let w = &space.grid.weights;

    let a_max = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut a_variation: f64 = 0.0;
    for j in 0..n1 {
        let first = a[j];
        for i in 0..n0 {
            a_variation = a_variation.max((a[i * n1 + j] - first).norm());
        }
    }
    a_variation /= 1.0 + a_max;

    for &power in &opts.probes {
        let f: Vec<C64> = space.grid.points.iter().map(|p| C64::new(p[0].powi(power as i32), 0.0)).collect();
        let mut g = vec![C64::new(0.0, 0.0); f.len()];
        let mut slice_ranks = Vec::with_capacity(n1);
        for j in 0..n1 {
            let idx: Vec<usize> = (0..n0).map(|i| i * n1 + j).collect();
            let ws: Vec<f64> = idx.iter().map(|&k| w[k]).collect();
            let cols: Vec<Vec<C64>> = b.iter().map(|bi| idx.iter().map(|&k| bi[k]).collect()).collect();
            let fs: Vec<C64> = idx.iter().map(|&k| f[k]).collect();
            let (gs, rank) = project_off(&fs, &cols, &ws);
            slice_ranks.push(rank);
            for (t, &k) in idx.iter().enumerate() {
                g[k] = gs[t];
            }
        }
        let g_norm = space.norm(&g);
        if g_norm <= opts.tolerance * space.norm(&f) {
            continue;
        }
        let mut ratios = Vec::new();
        let mut apow = vec![C64::new(1.0, 0.0); a.len()];
        for k in 0..=opts.k_check {
            for (i, bi) in b.iter().enumerate() {
                let h: Vec<C64> = apow.iter().zip(bi).map(|(x, y)| x * y).collect();
                let hn = space.norm(&h);
                let r = if hn == 0.0 { 0.0 } else { space.inner(&g, &h).norm() / (g_norm * hn) };
                ratios.push((k, i, r));
            }
            apow.iter_mut().zip(&a).for_each(|(x, y)| *x *= y);
        }
        let max_ratio = ratios.iter().map(|r| r.2).fold(0.0, f64::max);
        if max_ratio > opts.tolerance {
            return Err(Error::Precondition(format!(
                "witness is not orthogonal to the reachable span (ratio {max_ratio:.3e}); a varies by {a_variation:.3e} along the slices"
            )));
        }
        return Ok(SliceWitness {
            space: space.clone(),
            chart,
            points,
            g,
            g_norm,
            probe_power: power,
            slice_ranks,
            ratios,
            max_ratio,
            a_variation,
        });
    }
    Err(Error::ProbesExhausted)
}

/// `f - Σ c_j b_j` for the weighted least-squares coefficients on a pivoted
/// independent subset of `cols`, with one refinement pass.
fn project_off(f: &[C64], cols: &[Vec<C64>], w: &[f64]) -> (Vec<C64>, usize) {
    let ip = |u: &[C64], v: &[C64]| -> C64 { u.iter().zip(v).zip(w).map(|((a, b), w)| a.conj() * b * *w).sum() };
    // pivoted Gram–Schmidt to choose an independent subset
    let scale = cols.iter().map(|c| ip(c, c).re.sqrt()).fold(0.0, f64::max);
    let mut chosen: Vec<usize> = Vec::new();
    let mut resid: Vec<Vec<C64>> = cols.to_vec();
    let mut q: Vec<Vec<C64>> = Vec::new();
    loop {
        let best = (0..cols.len())
            .filter(|i| !chosen.contains(i))
            .map(|i| (ip(&resid[i], &resid[i]).re.sqrt(), i))
            .max_by(|a, b| a.0.total_cmp(&b.0));
        let Some((nrm, i)) = best else { break };
        if scale == 0.0 || nrm <= 1e-10 * scale {
            break;
        }
        chosen.push(i);
        let qi: Vec<C64> = resid[i].iter().map(|z| z / nrm).collect();
        for r in resid.iter_mut() {
            let c = ip(&qi, r);
            r.iter_mut().zip(&qi).for_each(|(x, y)| *x -= c * y);
        }
        q.push(qi);
    }
    let k = chosen.len();
    if k == 0 {
        return (f.to_vec(), 0);
    }
    let gram = DMatrix::from_fn(k, k, |r, c| ip(&cols[chosen[r]], &cols[chosen[c]]));
    let chol = gram.cholesky();
    let mut g = f.to_vec();
    for _ in 0..2 {
        let rhs = DVector::from_iterator(k, chosen.iter().map(|&i| ip(&cols[i], &g)));
        let coef = match &chol {
            Some(ch) => ch.solve(&rhs),
            None => {
                // fall back to the orthonormalized basis
                for qi in &q {
                    let c = ip(qi, &g);
                    g.iter_mut().zip(qi).for_each(|(x, y)| *x -= c * y);
                }
                continue;
            }
        };
        for (t, &i) in chosen.iter().enumerate() {
            g.iter_mut().zip(&cols[i]).for_each(|(x, y)| *x -= coef[t] * y);
        }
    }
    (g, k)
}
