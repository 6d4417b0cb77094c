//! Small matrix ensembles over two-parameter boxes.

use num_complex::Complex64;

use crate::analytic::BivariateSeries;
use crate::ensemble::space::ParamSpace;
use crate::ensemble::system::{EnsembleSystem, FieldTag, MatrixField};
use crate::error::Result;

type C64 = Complex64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `σ1 = re σ`.
pub fn sigma1() -> BivariateSeries {
    BivariateSeries::sigma().add(&BivariateSeries::sigma_bar()).scale(c(0.5, 0.0))
}

/// `σ2 = im σ`.
pub fn sigma2() -> BivariateSeries {
    BivariateSeries::sigma().sub(&BivariateSeries::sigma_bar()).scale(c(0.0, -0.5))
}

fn konst(x: f64) -> BivariateSeries {
    BivariateSeries::constant(c(x, 0.0))
}

fn two_by_two(space: ParamSpace, a: [BivariateSeries; 4], field: FieldTag) -> Result<EnsembleSystem> {
    let b = MatrixField::from_series(2, 1, vec![konst(1.0), konst(1.0)])?;
    EnsembleSystem::new(space, MatrixField::from_series(2, 2, a.to_vec())?, b, field)
}

/// `A = diag(σ1, σ1 + 2 + σ2²)`, `B = [1; 1]`.
pub fn diagonal_real(space: ParamSpace) -> Result<EnsembleSystem> {
    let s1 = sigma1();
    let corner = s1.add(&konst(2.0)).add(&sigma2().pow(2));
    two_by_two(space, [s1, BivariateSeries::zero(), BivariateSeries::zero(), corner], FieldTag::Real)
}

/// `A = diag(σ1, 2 + σ1 + σ2² + iσ2)`, `B = [1; 1]`. The corner entry has a
/// Jacobian of full rank.
pub fn diagonal_complex(space: ParamSpace) -> Result<EnsembleSystem> {
    let s1 = sigma1();
    let s2 = sigma2();
    let corner = s1.add(&konst(2.0)).add(&s2.pow(2)).add(&s2.scale(c(0.0, 1.0)));
    two_by_two(space, [s1, BivariateSeries::zero(), BivariateSeries::zero(), corner], FieldTag::Complex)
}

/// `A = σ1·I₂`.
pub fn scalar_identity(space: ParamSpace) -> Result<EnsembleSystem> {
    let s1 = sigma1();
    two_by_two(space, [s1.clone(), BivariateSeries::zero(), BivariateSeries::zero(), s1], FieldTag::Real)
}

/// `A = [[σ1, 1], [0, σ1]]`.
pub fn jordan(space: ParamSpace) -> Result<EnsembleSystem> {
    let s1 = sigma1();
    two_by_two(space, [s1.clone(), konst(1.0), BivariateSeries::zero(), s1], FieldTag::Real)
}

/// `A = diag(|σ|² - r0², r0² - |σ|²)`: the eigenvalues meet on the circle
/// `|σ| = r0`.
pub fn ring_crossing(space: ParamSpace, r0: f64) -> Result<EnsembleSystem> {
    let d = BivariateSeries::sigma().mul(&BivariateSeries::sigma_bar()).sub(&konst(r0 * r0));
    let neg = d.scale(c(-1.0, 0.0));
    two_by_two(space, [d, BivariateSeries::zero(), BivariateSeries::zero(), neg], FieldTag::Real)
}

/// `A = diag(σ1, 2x0 - σ1)`: the eigenvalues meet on `σ1 = x0`.
pub fn crossing_at(space: ParamSpace, x0: f64) -> Result<EnsembleSystem> {
    let s1 = sigma1();
    let other = konst(2.0 * x0).sub(&s1);
    two_by_two(space, [s1, BivariateSeries::zero(), BivariateSeries::zero(), other], FieldTag::Real)
}

/// Box `[0, 1]²` used by the two-dimensional demos.
pub fn unit_box(nodes: usize) -> Result<ParamSpace> {
    ParamSpace::box_space(vec![(0.0, 1.0), (0.0, 1.0)], vec![nodes, nodes])
}
