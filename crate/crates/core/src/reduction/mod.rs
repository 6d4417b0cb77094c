//! Reduction of matrix ensembles to scalar pairs and the two certificate
//! routes for scalar pairs: the normal form `a(μ) = μ` (full Jacobian rank)
//! and slice witnesses (rank-deficient Jacobian).

pub mod branch;
pub mod demos;
pub mod jacobian;
pub mod normal_form;
pub mod slice;
pub mod triangular;

pub use branch::{eigen_branch, BranchOptions, EigenBranch};
pub use jacobian::{jacobian_rank, JacobianReport};
pub use normal_form::{to_normal_form, NormalForm, NormalFormOptions};
pub use slice::{slice_witness, SliceOptions, SliceWitness};
pub use triangular::{reduce_to_scalar, triangularize, ReductionCase, ScalarReduction, Triangularization};

use crate::ensemble::system::EnsembleSystem;
use crate::error::{Error, Result};
use crate::witness::{build_witness_with, WitnessCertificate, WitnessOptions};

#[derive(Debug, Clone, Default)]
pub struct PipelineOptions {
    pub branch: BranchOptions,
    pub slice: SliceOptions,
    pub normal_form: NormalFormOptions,
    pub witness: WitnessOptions,
}

#[derive(Debug, Clone)]
pub enum Route {
    NormalForm {
        normal_form: NormalForm,
        certificate: WitnessCertificate,
    },
    Slice(SliceWitness),
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub reduction: ScalarReduction,
    pub jacobian: JacobianReport,
    pub route: Route,
}

/// Full chain: scalar reduction, Jacobian rank, then either the normal form
/// followed by a witness certificate or a slice witness. Errors carry the
/// name of the failing stage.
/// Only the primary pair is certified.
pub fn run_pipeline(sys: &EnsembleSystem, opts: &PipelineOptions) -> Result<PipelineReport> {
    if sys.space.dim() != 2 {
        return Err(Error::Precondition(format!(
            "the reduction chain needs a 2-dimensional parameter space, got {}",
            sys.space.dim()
        )));
    }
    let reduction = reduce_to_scalar(sys, &opts.branch)?;
    let pair = reduction.primary();
    let jacobian = jacobian_rank(&pair.a, &pair.space).map_err(|e| e.in_stage("jacobian_rank"))?;
    let route = if jacobian.k_j == 2 {
        let normal_form = to_normal_form(pair, &jacobian, &opts.normal_form).map_err(|e| e.in_stage("to_normal_form"))?;
        let certificate =
            build_witness_with(&normal_form.b, normal_form.r, &opts.witness).map_err(|e| e.in_stage("build_witness"))?;
        Route::NormalForm { normal_form, certificate }
    } else {
        Route::Slice(slice_witness(pair, &opts.slice).map_err(|e| e.in_stage("slice_witness"))?)
    };
    Ok(PipelineReport {
        reduction,
        jacobian,
        route,
    })
}
