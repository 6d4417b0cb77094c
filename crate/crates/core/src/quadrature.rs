//! Gauss–Legendre rules on `[-1, 1]`, symmetrized and sorted.

use std::ops::{AddAssign, Mul};

use gauss_quad::GaussLegendre;

#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// `n`-point rule, exact for polynomials of degree `2n - 1`. Panics on `n == 0`.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss rule needs at least one node");
        if n == 1 {
            return GaussRule {
                nodes: vec![0.0],
                weights: vec![2.0],
            };
        }
        let rule = GaussLegendre::new(n).expect("valid Gauss-Legendre degree");
        let mut pairs: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (*x, *w)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // enforce exact mirror symmetry so odd moments cancel to rounding
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let x = 0.5 * (pairs[j].0 - pairs[i].0);
            let w = 0.5 * (pairs[i].1 + pairs[j].1);
            pairs[i] = (-x, w);
            pairs[j] = (x, w);
        }
        if n % 2 == 1 {
            pairs[n / 2].0 = 0.0;
        }
        GaussRule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        (
            self.nodes.iter().map(|x| mid + half * x).collect(),
            self.weights.iter().map(|w| w * half).collect(),
        )
    }

    pub fn integrate<T, F>(&self, a: f64, b: f64, mut f: F) -> T
    where
        T: Default + AddAssign + Mul<f64, Output = T>,
        F: FnMut(f64) -> T,
    {
        let (xs, ws) = self.on_interval(a, b);
        let mut acc = T::default();
        for (x, w) in xs.into_iter().zip(ws) {
            acc += f(x) * w;
        }
        acc
    }
}
