//! The scalar ensembles `ẋ = σx + u` on `[0, 1]` and on a closed disk.

use super::space::ParamSpace;
use super::system::{EnsembleSystem, FieldTag};
use crate::analytic::BivariateSeries;
use crate::error::Result;

/// `ẋ(t, σ) = σ x(t, σ) + u(t)` for real `σ ∈ [0, 1]`.
pub fn interval_demo(nodes: usize) -> Result<EnsembleSystem> {
    let space = ParamSpace::interval(0.0, 1.0, nodes)?;
    EnsembleSystem::scalar(space, BivariateSeries::sigma(), vec![BivariateSeries::one()], FieldTag::Real)
}

/// `ẋ(t, σ) = σ x(t, σ) + u(t)` for complex `|σ| ≤ r`.
pub fn disk_demo(r: f64, n_r: usize, n_theta: usize) -> Result<EnsembleSystem> {
    let space = ParamSpace::disk(r, n_r, n_theta)?;
    EnsembleSystem::scalar(space, BivariateSeries::sigma(), vec![BivariateSeries::one()], FieldTag::Complex)
}
