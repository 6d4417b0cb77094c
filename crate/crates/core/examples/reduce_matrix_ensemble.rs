//! Reduction of `A = diag(σ1, 2 + σ1 + σ2² + iσ2)` to a scalar pair, its normal
//! form and the final witness certificate.

use ensemblectl::reduction::{demos, run_pipeline, PipelineOptions, Route};

fn main() -> ensemblectl::Result<()> {
    let sys = demos::diagonal_complex(demos::unit_box(12)?)?;
    let rep = run_pipeline(&sys, &PipelineOptions::default())?;
    for l in &rep.reduction.levels {
        println!(
            "level n = {}: {:?}, k_a = {}, k_g = {}, seed λ = {:.6}, ‖A'21‖ = {:.1e}",
            l.n, l.case, l.alg_mult, l.geo_mult, l.seed_lambda, l.lower_left
        );
    }
    println!("k_J = {}, sigma_J = {:?}", rep.jacobian.k_j, rep.jacobian.sigma_j);
    match &rep.route {
        Route::NormalForm { normal_form, certificate } => {
            println!(
                "normal form: R = {:.6}, a_J = {:.6}, fit residuals = {:?}, round trip = {:.1e}",
                normal_form.r, normal_form.a_j, normal_form.fit_residuals, normal_form.round_trip
            );
            println!(
                "certificate: ‖f0‖ = {:.6e}, max relative residual = {:.2e}, sound = {}",
                certificate.f0_norm,
                certificate.max_relative_residual(),
                certificate.is_sound()
            );
        }
        Route::Slice(w) => println!("slice witness, max ratio {:.2e}", w.max_ratio),
    }

    let crossing = demos::ring_crossing(ensemblectl::ensemble::ParamSpace::box_space(
        vec![(-1.0, 1.0), (-1.0, 1.0)],
        vec![12, 12],
    )?, 0.2)?;
    match run_pipeline(&crossing, &PipelineOptions::default()) {
        Ok(_) => println!("crossing unexpectedly reduced"),
        Err(e) => println!("crossing: {e}"),
    }
    Ok(())
}
