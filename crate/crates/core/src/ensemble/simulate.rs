//! Fixed-step RK4 integration of every ensemble member under a common input.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::system::EnsembleSystem;
use crate::error::{Error, Result};

type C64 = Complex64;

/// Stability factor in the step bound `h ≤ STEP_FACTOR / (1 + max‖A‖_F)`.
pub const STEP_FACTOR: f64 = 1e-2;

pub type InputFn = Arc<dyn Fn(f64) -> Vec<C64> + Send + Sync>;

/// Common input `u(t) ∈ ℂ^m`.
#[derive(Clone)]
pub enum Input {
    /// Values at `t = j·dt`, linearly interpolated and held after the last sample.
    Samples { dt: f64, values: Vec<Vec<C64>> },
    Function(InputFn),
}

impl Input {
    pub fn constant(u: Vec<C64>) -> Self {
        Input::Function(Arc::new(move |_| u.clone()))
    }

    pub fn function<F: Fn(f64) -> Vec<C64> + Send + Sync + 'static>(f: F) -> Self {
        Input::Function(Arc::new(f))
    }

    pub fn at(&self, t: f64) -> Vec<C64> {
        match self {
            Input::Function(f) => f(t),
            Input::Samples { dt, values } => {
                let x = (t / dt).max(0.0);
                let j = x.floor() as usize;
                if j + 1 >= values.len() {
                    return values.last().cloned().unwrap_or_default();
                }
                let a = x - j as f64;
                values[j]
                    .iter()
                    .zip(&values[j + 1])
                    .map(|(u, v)| u * (1.0 - a) + v * a)
                    .collect()
            }
        }
    }

    /// `[re u; im u]`, the input of the realified system.
    pub fn realified(&self) -> Input {
        let me = self.clone();
        Input::function(move |t| {
            let u = me.at(t);
            u.iter()
                .map(|z| C64::new(z.re, 0.0))
                .chain(u.iter().map(|z| C64::new(z.im, 0.0)))
                .collect()
        })
    }
}

/// `[re x; im x]` per node, the state of the realified system.
pub fn realify_profile(x: &[C64], n: usize) -> Vec<C64> {
    x.chunks(n)
        .flat_map(|c| {
            c.iter()
                .map(|z| C64::new(z.re, 0.0))
                .chain(c.iter().map(|z| C64::new(z.im, 0.0)))
                .collect::<Vec<_>>()
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Node-major profiles, one per time.
    pub states: Vec<Vec<C64>>,
    pub step: f64,
    pub step_bound: f64,
    /// Set when the step exceeds `step_bound`.
    pub step_warning: bool,
}

impl Trajectory {
    pub fn final_state(&self) -> &[C64] {
        self.states.last().map(|v| v.as_slice()).unwrap_or(&[])
    }
}

/// Integrates from `x0` over `[0, horizon]`. With `steps = None` the step
/// count is chosen to meet the step bound.
pub fn simulate(
    sys: &EnsembleSystem,
    u: &Input,
    x0: &[C64],
    horizon: f64,
    steps: Option<usize>,
) -> Result<Trajectory> {
    let (nodes, n, m) = (sys.space.len(), sys.n, sys.m);
    if x0.len() != nodes * n {
        return Err(Error::Dimension(format!(
            "initial profile has {} values, expected {}",
            x0.len(),
            nodes * n
        )));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
    }
    let mats = sys.node_matrices()?;
    let a_max = mats.iter().map(|(a, _)| a.norm()).fold(0.0, f64::max);
    let step_bound = STEP_FACTOR / (1.0 + a_max);
    let steps = match steps {
        Some(0) => return Err(Error::InvalidArgument("steps must be positive".into())),
        Some(s) => s,
        None => (horizon / step_bound).ceil() as usize,
    };
    let h = horizon / steps as f64;
    let times: Vec<f64> = (0..=steps).map(|j| j as f64 * h).collect();

    // the input is shared by every node; sample it once per stage
    let mut inputs = Vec::with_capacity(2 * steps + 1);
    for j in 0..=2 * steps {
        let v = u.at(j as f64 * h / 2.0);
        if v.len() != m {
            return Err(Error::Dimension(format!("input has {} components, expected {m}", v.len())));
        }
        inputs.push(DVector::from_vec(v));
    }

    let per_node: Vec<Vec<DVector<C64>>> = mats
        .par_iter()
        .zip(x0.par_chunks(n))
        .map(|((a, b), x)| rk4_node(a, b, DVector::from_column_slice(x), &inputs, h, steps))
        .collect();

    let states = (0..=steps)
        .map(|j| per_node.iter().flat_map(|traj| traj[j].iter().copied()).collect())
        .collect();
    Ok(Trajectory {
        times,
        states,
        step: h,
        step_bound,
        step_warning: h > step_bound,
    })
}

fn rk4_node(
    a: &DMatrix<C64>,
    b: &DMatrix<C64>,
    mut x: DVector<C64>,
    inputs: &[DVector<C64>],
    h: f64,
    steps: usize,
) -> Vec<DVector<C64>> {
    let bu: Vec<DVector<C64>> = inputs.iter().map(|u| b * u).collect();
    let f = |x: &DVector<C64>, k: usize| a * x + &bu[k];
    let mut out = Vec::with_capacity(steps + 1);
    out.push(x.clone());
    for j in 0..steps {
        let k1 = f(&x, 2 * j);
        let k2 = f(&(&x + &k1 * C64::new(h / 2.0, 0.0)), 2 * j + 1);
        let k3 = f(&(&x + &k2 * C64::new(h / 2.0, 0.0)), 2 * j + 1);
        let k4 = f(&(&x + &k3 * C64::new(h, 0.0)), 2 * j + 2);
        x += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0);
        out.push(x.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::BivariateSeries;
    use crate::ensemble::space::ParamSpace;
    use crate::ensemble::system::FieldTag;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn pure_integrator() {
        let space = ParamSpace::interval(0.0, 1.0, 5).unwrap();
        let sys = EnsembleSystem::scalar(space, BivariateSeries::zero(), vec![BivariateSeries::one()], FieldTag::Real).unwrap();
        let tr = simulate(&sys, &Input::constant(vec![c(1.0)]), &[c(0.0); 5], 1.0, None).unwrap();
        assert!(!tr.step_warning);
        for x in tr.final_state() {
            assert!((x - c(1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn exponential_growth() {
        let space = ParamSpace::interval(0.0, 1.0, 9).unwrap();
        let sys = EnsembleSystem::scalar(space.clone(), BivariateSeries::sigma(), vec![BivariateSeries::one()], FieldTag::Real).unwrap();
        let tr = simulate(&sys, &Input::constant(vec![c(0.0)]), &[c(1.0); 9], 1.0, None).unwrap();
        for (x, p) in tr.final_state().iter().zip(&space.grid.points) {
            assert!((x - c(p[0].exp())).norm() < 1e-10);
        }
    }

    #[test]
    fn large_step_sets_warning() {
        let space = ParamSpace::interval(0.0, 1.0, 3).unwrap();
        let sys = EnsembleSystem::scalar(space, BivariateSeries::sigma(), vec![BivariateSeries::one()], FieldTag::Real).unwrap();
        let tr = simulate(&sys, &Input::constant(vec![c(0.0)]), &[c(1.0); 3], 1.0, Some(10)).unwrap();
        assert!(tr.step_warning);
    }

    #[test]
    fn sampled_input_interpolates() {
        let u = Input::Samples { dt: 0.5, values: vec![vec![c(0.0)], vec![c(1.0)], vec![c(3.0)]] };
        assert!((u.at(0.25)[0] - c(0.5)).norm() < 1e-15);
        assert!((u.at(0.75)[0] - c(2.0)).norm() < 1e-15);
        assert_eq!(u.at(5.0)[0], c(3.0));
    }
}
