//! Steering the whole ensemble `ẋ = σx + u` on `[0, 1]` with one input.

use ensemblectl::ensemble::{demos, simulate, Input};
use num_complex::Complex64;

fn main() -> ensemblectl::Result<()> {
    let sys = demos::interval_demo(32)?;
    let x0 = vec![Complex64::new(1.0, 0.0); sys.space.len()];
    let u = Input::function(|t| vec![Complex64::new(-(1.0 + t), 0.0)]);
    let tr = simulate(&sys, &u, &x0, 1.0, None)?;
    println!("{} steps of size {:.3e}", tr.times.len() - 1, tr.step);
    let fin = tr.final_state();
    for i in [0, 8, 16, 24, 31] {
        println!("  σ = {:.4}  x(1) = {:.6}", sys.space.grid.points[i][0], fin[i].re);
    }
    println!("profile norm at T = 1: {:.6}", sys.space.norm(fin));
    Ok(())
}
