//! Bivariate series in `σ, σ̄`: arithmetic, derivatives and the radial
//! components `η_k`.

use ensemblectl::analytic::BivariateSeries;
use num_complex::Complex64;

fn main() -> ensemblectl::Result<()> {
    let s = BivariateSeries::sigma();
    let sb = BivariateSeries::sigma_bar();
    // f = 1 + 2σ + σσ̄ - iσ̄²
    let f = BivariateSeries::one()
        .add(&s.scale(Complex64::new(2.0, 0.0)))
        .add(&s.mul(&sb))
        .sub(&sb.pow(2).scale(Complex64::new(0.0, 1.0)));

    println!("f terms:");
    for (k, l, c) in f.terms() {
        println!("  σ^{k} σ̄^{l}  {c}");
    }
    let z = Complex64::new(0.3, -0.4);
    println!("f({z}) = {}", f.eval(z)?);
    println!("∂f/∂x at {z} = {}", f.d_x().eval(z)?);
    println!("∂f/∂y at {z} = {}", f.d_y().eval(z)?);

    if let Some((lo, hi)) = f.angular_support() {
        for k in lo..=hi {
            let eta = f.eta(k);
            println!("η_{k}(f)(0.5) = {}", eta.eval(0.5));
        }
    }
    println!("‖f‖² on the unit disk = {:.15}", f.norm_sq_disk(1.0));
    Ok(())
}
