//! Orthonormal shifted Legendre basis on `[s1, s2]` and projections onto it.

use ensemblectl::basis::build_basis;
use ensemblectl::poly::Poly;

fn main() -> ensemblectl::Result<()> {
    let (s1, s2) = (0.49, 0.64);
    let basis = build_basis(s1, s2, 5)?;

    let gram = basis.gram();
    let mut worst: f64 = 0.0;
    for (i, row) in gram.iter().enumerate() {
        for (j, g) in row.iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g.re - expect).abs().max(g.im.abs()));
        }
    }
    println!("basis of order {} on [{s1}, {s2}], max |G - I| = {worst:.2e}", basis.order());

    let q = Poly::from_real(&[0.5, -1.0, 0.0, 2.0]);
    let coeffs = basis.coefficients(&q);
    println!("coefficients of 0.5 - s + 2s³:");
    for (n, c) in coeffs.iter().enumerate() {
        println!("  <p_{n}, q> = {:.12}", c.re);
    }
    let back = basis.project(&q);
    for s in [s1, 0.55, s2] {
        println!("  q({s}) = {:.15}  projection = {:.15}", q.eval(s).re, back.eval(s).re);
    }
    Ok(())
}
