//! Witness certificates for normal forms `ẋ = σx + Σ b_i(σ)u_i` on a disk.

use ensemblectl::analytic::BivariateSeries;
use ensemblectl::witness::{build_witness, extend_and_bound, CertificateJson};
use num_complex::Complex64;

fn report(name: &str, b: &[BivariateSeries]) -> ensemblectl::Result<()> {
    let cert = build_witness(b, 1.0, 25)?;
    println!(
        "{name}: annulus [{}, {}], ‖f0‖ = {:.6e}, max relative residual = {:.2e}, sound = {}",
        cert.config.r1,
        cert.config.r2,
        cert.f0_norm,
        cert.max_relative_residual(),
        cert.is_sound()
    );
    let target = BivariateSeries::sigma().mul(&BivariateSeries::sigma_bar());
    println!("  lower bound on dist(|σ|², reachable) = {:.6e}", extend_and_bound(&cert, &target)?);
    Ok(())
}

fn main() -> ensemblectl::Result<()> {
    report("b = [1]", &[BivariateSeries::one()])?;
    report("b = [σ̄]", &[BivariateSeries::sigma_bar()])?;
    report("b = [σ̄²]", &[BivariateSeries::sigma_bar().pow(2)])?;
    let mixed = [
        BivariateSeries::holomorphic(&[Complex64::new(1.0, 0.0), Complex64::new(0.3, 0.2)]),
        BivariateSeries::sigma_bar().pow(2),
    ];
    report("b = [1 + (0.3+0.2i)σ, σ̄²]", &mixed)?;

    let cert = build_witness(&[BivariateSeries::one()], 1.0, 5)?;
    let json = serde_json::to_string(&CertificateJson::from(&cert))?;
    println!("certificate JSON is {} bytes", json.len());
    Ok(())
}
