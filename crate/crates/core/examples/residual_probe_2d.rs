//! Residual curves for `ẋ = σx + u` on the unit disk: `σ̄` stays at the
//! constant distance `√(π/2)`, `σ²` is reached at `K = 2`.

use ensemblectl::analytic::BivariateSeries;
use ensemblectl::ensemble::{demos, gram_residual, profile_from_series};

fn main() -> ensemblectl::Result<()> {
    let k_max = 8;
    let sys = demos::disk_demo(1.0, 32, 4 * k_max + 8)?;
    for (name, f) in [("conj(σ)", BivariateSeries::sigma_bar()), ("σ²", BivariateSeries::sigma().pow(2))] {
        let target = profile_from_series(&sys.space, &f)?;
        let r = gram_residual(&sys, &target, k_max)?;
        println!("target {name}:");
        for (k, v) in r.iter().enumerate() {
            println!("  K = {k}  residual = {v:.15e}");
        }
    }
    println!("sqrt(pi/2) = {:.15e}", (std::f64::consts::PI / 2.0).sqrt());
    Ok(())
}
