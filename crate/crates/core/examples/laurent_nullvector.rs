//! The Laurent matrix `Φ` of a conjugated input list and its cofactor null
//! vector `ψ` with `Σ_n Φ[i][n] ψ_n = 0`.

use ensemblectl::analytic::BivariateSeries;
use ensemblectl::basis::build_basis;
use ensemblectl::laurent::{cofactor_nullvector, null_residual, nullvector_from_selection, phi, select_independent};
use ensemblectl::Error;
use num_complex::Complex64;

fn main() -> ensemblectl::Result<()> {
    let g = vec![
        BivariateSeries::one(),
        BivariateSeries::one().add(&BivariateSeries::sigma_bar().scale(Complex64::new(0.5, 0.0))),
    ];
    let basis = build_basis(0.49, 0.64, g.len())?;
    let rows: Vec<Vec<_>> = g
        .iter()
        .map(|gi| {
            let conj = gi.conjugate();
            (0..=g.len()).map(|n| phi(&conj, n, &basis)).collect::<ensemblectl::Result<Vec<_>>>()
        })
        .collect::<ensemblectl::Result<_>>()?;

    let psi = match cofactor_nullvector(&rows) {
        Ok(psi) => psi,
        Err(Error::Degenerate { dependent }) => {
            println!("cofactor minors vanish (dependent rows {dependent:?}), using an independent selection");
            let sel = select_independent(&rows)?;
            nullvector_from_selection(&rows, &sel)?
        }
        Err(e) => return Err(e),
    };
    for (n, p) in psi.iter().enumerate() {
        let terms: Vec<String> = p.terms().map(|(k, c)| format!("({:.4e}{:+.4e}i) z^{k}", c.re, c.im)).collect();
        println!("ψ_{n} = {}", terms.join(" + "));
    }
    for (i, (r, scale)) in null_residual(&rows, &psi).iter().enumerate() {
        println!("row {i}: max |Σ Φψ| = {:.2e} (scale {scale:.2e})", r.max_abs());
    }
    Ok(())
}
