//! Parameterization spaces and their quadrature grids.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussRule;

pub const DEFAULT_INTERVAL_NODES: usize = 256;
pub const DEFAULT_POLAR_RADIAL: usize = 128;
pub const DEFAULT_POLAR_ANGULAR: usize = 256;
pub const DEFAULT_BOX_NODES: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub enum SpaceKind {
    Interval { a: f64, b: f64 },
    Box { bounds: Vec<(f64, f64)> },
    Disk { r: f64 },
    Annulus { r1: f64, r2: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridShape {
    /// Gauss–Legendre tensor grid; the last coordinate varies fastest.
    Tensor(Vec<usize>),
    /// Gauss–Legendre in `s = r²` (outer) times uniform angles (inner).
    Polar { n_r: usize, n_theta: usize },
}

#[derive(Debug, Clone)]
pub struct Grid {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub shape: GridShape,
    /// Per-axis node coordinates of tensor grids.
    pub axes: Vec<Vec<f64>>,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Linear index of a tensor multi-index.
    pub fn linear_index(&self, multi: &[usize]) -> usize {
        match &self.shape {
            GridShape::Tensor(dims) => multi
                .iter()
                .zip(dims)
                .fold(0, |acc, (&i, &n)| acc * n + i),
            GridShape::Polar { n_theta, .. } => multi[0] * n_theta + multi[1],
        }
    }

    /// Multi-index of a linear index.
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let dims = match &self.shape {
            GridShape::Tensor(dims) => dims.clone(),
            GridShape::Polar { n_r, n_theta } => vec![*n_r, *n_theta],
        };
        let mut out = vec![0; dims.len()];
        for (slot, &n) in out.iter_mut().zip(&dims).rev() {
            *slot = idx % n;
            idx /= n;
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ParamSpace {
    pub kind: SpaceKind,
    pub grid: Grid,
}

fn check_nodes(n: usize, what: &str) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument(format!("{what} needs at least one node")));
    }
    Ok(())
}

impl ParamSpace {
    pub fn interval(a: f64, b: f64, nodes: usize) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument(format!("interval needs a < b, got [{a}, {b}]")));
        }
        let mut s = Self::tensor(vec![(a, b)], vec![nodes])?;
        s.kind = SpaceKind::Interval { a, b };
        Ok(s)
    }

    pub fn box_space(bounds: Vec<(f64, f64)>, nodes: Vec<usize>) -> Result<Self> {
        if bounds.is_empty() || bounds.len() != nodes.len() {
            return Err(Error::Dimension(format!(
                "box has {} bounds and {} node counts",
                bounds.len(),
                nodes.len()
            )));
        }
        for &(a, b) in &bounds {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidArgument(format!("box side needs a < b, got [{a}, {b}]")));
            }
        }
        Self::tensor(bounds, nodes)
    }

    fn tensor(bounds: Vec<(f64, f64)>, nodes: Vec<usize>) -> Result<Self> {
        let mut axes = Vec::new();
        let mut axis_w = Vec::new();
        for (&(a, b), &n) in bounds.iter().zip(&nodes) {
            check_nodes(n, "grid axis")?;
            let (x, w) = GaussRule::new(n).on_interval(a, b);
            axes.push(x);
            axis_w.push(w);
        }
        let total: usize = nodes.iter().product();
        let mut points = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        let mut multi = vec![0usize; nodes.len()];
        for _ in 0..total {
            points.push(multi.iter().enumerate().map(|(d, &i)| axes[d][i]).collect());
            weights.push(multi.iter().enumerate().map(|(d, &i)| axis_w[d][i]).product());
            for d in (0..nodes.len()).rev() {
                multi[d] += 1;
                if multi[d] < nodes[d] {
                    break;
                }
                multi[d] = 0;
            }
        }
        Ok(ParamSpace {
            kind: SpaceKind::Box { bounds },
            grid: Grid {
                points,
                weights,
                shape: GridShape::Tensor(nodes),
                axes,
            },
        })
    }

    pub fn disk(r: f64, n_r: usize, n_theta: usize) -> Result<Self> {
        let mut s = Self::annulus(0.0, r, n_r, n_theta)?;
        s.kind = SpaceKind::Disk { r };
        Ok(s)
    }

    pub fn annulus(r1: f64, r2: f64, n_r: usize, n_theta: usize) -> Result<Self> {
        if !(r1 >= 0.0 && r1 < r2 && r2.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "annulus needs 0 <= R1 < R2, got ({r1}, {r2})"
            )));
        }
        check_nodes(n_r, "radial grid")?;
        check_nodes(n_theta, "angular grid")?;
        let (s, ws) = GaussRule::new(n_r).on_interval(r1 * r1, r2 * r2);
        let dtheta = 2.0 * PI / n_theta as f64;
        let mut points = Vec::with_capacity(n_r * n_theta);
        let mut weights = Vec::with_capacity(n_r * n_theta);
        for (&si, &wi) in s.iter().zip(&ws) {
            let r = si.sqrt();
            for j in 0..n_theta {
                let th = j as f64 * dtheta;
                points.push(vec![r * th.cos(), r * th.sin()]);
                weights.push(0.5 * wi * dtheta);
            }
        }
        Ok(ParamSpace {
            kind: SpaceKind::Annulus { r1, r2 },
            grid: Grid {
                points,
                weights,
                shape: GridShape::Polar { n_r, n_theta },
                axes: vec![s.iter().map(|x| x.sqrt()).collect(), (0..n_theta).map(|j| j as f64 * dtheta).collect()],
            },
        })
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            SpaceKind::Interval { .. } => 1,
            SpaceKind::Box { bounds } => bounds.len(),
            SpaceKind::Disk { .. } | SpaceKind::Annulus { .. } => 2,
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn measure(&self) -> f64 {
        match &self.kind {
            SpaceKind::Interval { a, b } => b - a,
            SpaceKind::Box { bounds } => bounds.iter().map(|(a, b)| b - a).product(),
            SpaceKind::Disk { r } => PI * r * r,
            SpaceKind::Annulus { r1, r2 } => PI * (r2 * r2 - r1 * r1),
        }
    }

    /// Membership with a relative slack `tol`.
    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        if p.len() != self.dim() {
            return false;
        }
        match &self.kind {
            SpaceKind::Interval { a, b } => {
                let slack = tol * (b - a);
                p[0] >= a - slack && p[0] <= b + slack
            }
            SpaceKind::Box { bounds } => bounds.iter().zip(p).all(|(&(a, b), &x)| {
                let slack = tol * (b - a);
                x >= a - slack && x <= b + slack
            }),
            SpaceKind::Disk { r } => p[0].hypot(p[1]) <= r * (1.0 + tol),
            SpaceKind::Annulus { r1, r2 } => {
                let r = p[0].hypot(p[1]);
                r >= r1 * (1.0 - tol) && r <= r2 * (1.0 + tol)
            }
        }
    }

    /// Whether the grid is a polar grid.
    pub fn is_polar(&self) -> bool {
        matches!(self.grid.shape, GridShape::Polar { .. })
    }

    /// Samples `f` at every node.
    pub fn sample<F: Fn(&[f64]) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        self.grid.points.iter().map(|p| f(p)).collect()
    }

    /// Weighted inner product of two scalar profiles.
    pub fn inner(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        self.grid
            .weights
            .iter()
            .zip(u.iter().zip(v))
            .map(|(w, (a, b))| a.conj() * b * *w)
            .sum()
    }

    pub fn norm(&self, u: &[Complex64]) -> f64 {
        self.inner(u, u).re.max(0.0).sqrt()
    }
}

/// Complex parameter `σ` of a point: `x` in one dimension, `x + iy` in two.
pub fn point_to_sigma(p: &[f64]) -> Result<Complex64> {
    match p.len() {
        1 => Ok(Complex64::new(p[0], 0.0)),
        2 => Ok(Complex64::new(p[0], p[1])),
        d => Err(Error::Dimension(format!(
            "series coefficients need a 1- or 2-dimensional parameter, got {d}"
        ))),
    }
}

/// Serialized space description.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpaceJson {
    Interval {
        a: f64,
        b: f64,
        #[serde(default)]
        nodes: Option<usize>,
    },
    Box {
        bounds: Vec<(f64, f64)>,
        #[serde(default)]
        nodes: Option<Vec<usize>>,
    },
    Disk {
        #[serde(rename = "R")]
        r: f64,
        #[serde(default)]
        nodes: Option<(usize, usize)>,
    },
    Annulus {
        #[serde(rename = "R1")]
        r1: f64,
        #[serde(rename = "R2")]
        r2: f64,
        #[serde(default)]
        nodes: Option<(usize, usize)>,
    },
}

impl SpaceJson {
    /// Builds the space, letting `radial`/`angular` override polar grid sizes.
    pub fn build(&self, radial: Option<usize>, angular: Option<usize>) -> Result<ParamSpace> {
        match self {
            SpaceJson::Interval { a, b, nodes } => {
                ParamSpace::interval(*a, *b, nodes.unwrap_or(DEFAULT_INTERVAL_NODES))
            }
            SpaceJson::Box { bounds, nodes } => {
                let nodes = nodes.clone().unwrap_or_else(|| vec![DEFAULT_BOX_NODES; bounds.len()]);
                ParamSpace::box_space(bounds.clone(), nodes)
            }
            SpaceJson::Disk { r, nodes } => {
                let (nr, nt) = nodes.unwrap_or((DEFAULT_POLAR_RADIAL, DEFAULT_POLAR_ANGULAR));
                ParamSpace::disk(*r, radial.unwrap_or(nr), angular.unwrap_or(nt))
            }
            SpaceJson::Annulus { r1, r2, nodes } => {
                let (nr, nt) = nodes.unwrap_or((DEFAULT_POLAR_RADIAL, DEFAULT_POLAR_ANGULAR));
                ParamSpace::annulus(*r1, *r2, radial.unwrap_or(nr), angular.unwrap_or(nt))
            }
        }
    }

    pub fn from_space(space: &ParamSpace) -> Self {
        let sizes = match &space.grid.shape {
            GridShape::Tensor(d) => d.clone(),
            GridShape::Polar { n_r, n_theta } => vec![*n_r, *n_theta],
        };
        match &space.kind {
            SpaceKind::Interval { a, b } => SpaceJson::Interval {
                a: *a,
                b: *b,
                nodes: Some(sizes[0]),
            },
            SpaceKind::Box { bounds } => SpaceJson::Box {
                bounds: bounds.clone(),
                nodes: Some(sizes),
            },
            SpaceKind::Disk { r } => SpaceJson::Disk {
                r: *r,
                nodes: Some((sizes[0], sizes[1])),
            },
            SpaceKind::Annulus { r1, r2 } => SpaceJson::Annulus {
                r1: *r1,
                r2: *r2,
                nodes: Some((sizes[0], sizes[1])),
            },
        }
    }
}
