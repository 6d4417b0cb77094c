//! A complex scalar ensemble and its real `2n`-dimensional counterpart
//! produce the same trajectories.

use ensemblectl::analytic::BivariateSeries;
use ensemblectl::ensemble::simulate::realify_profile;
use ensemblectl::ensemble::{simulate, EnsembleSystem, FieldTag, Input, ParamSpace};
use num_complex::Complex64;

fn main() -> ensemblectl::Result<()> {
    let space = ParamSpace::disk(1.0, 6, 12)?;
    let a = BivariateSeries::sigma().scale(Complex64::new(0.0, 1.0));
    let sys = EnsembleSystem::scalar(space, a, vec![BivariateSeries::one()], FieldTag::Complex)?;
    let real = sys.realify()?;

    let u = Input::function(|t| vec![Complex64::new(t.cos(), (2.0 * t).sin())]);
    let x0: Vec<Complex64> = sys.space.grid.points.iter().map(|p| Complex64::new(p[0], -p[1])).collect();

    let tc = simulate(&sys, &u, &x0, 1.0, None)?;
    let tr = simulate(&real, &u.realified(), &realify_profile(&x0, 1), 1.0, Some(tc.times.len() - 1))?;
    let expect = realify_profile(tc.final_state(), 1);
    let diff = expect
        .iter()
        .zip(tr.final_state())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    println!("steps = {}, step = {:.3e}, bound = {:.3e}", tc.times.len() - 1, tc.step, tc.step_bound);
    println!("max |(re, im) complex - real| at T = 1: {diff:.2e}");
    Ok(())
}
