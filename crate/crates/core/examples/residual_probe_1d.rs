//! Residual curves for `ẋ = σx + u` on `[0, 1]`.
//!
//! The target `σ` is reached exactly at `K = 1`; the kink `|σ - 1/2|` is only
//! approached, at the algebraic rate of polynomial approximation.

use ensemblectl::analytic::BivariateSeries;
use ensemblectl::ensemble::{demos, gram_residual, profile_from_fn, profile_from_series};
use num_complex::Complex64;

fn main() -> ensemblectl::Result<()> {
    let sys = demos::interval_demo(256)?;

    let smooth = profile_from_series(&sys.space, &BivariateSeries::sigma())?;
    let r = gram_residual(&sys, &smooth, 3)?;
    println!("target sigma:");
    for (k, v) in r.iter().enumerate() {
        println!("  K = {k:2}  residual = {v:.3e}");
    }

    let kink = profile_from_fn(&sys.space, 1, |p| vec![Complex64::new((p[0] - 0.5).abs(), 0.0)])?;
    let r = gram_residual(&sys, &kink, 40)?;
    println!("target |sigma - 1/2|:");
    for (k, v) in r.iter().enumerate() {
        let drop = if k > 0 { r[k - 1] - v } else { 0.0 };
        println!("  K = {k:2}  residual = {v:.17e}  decrease = {drop:.3e}");
    }
    Ok(())
}
