//! Slice witnesses when `a` has a rank-deficient Jacobian.

use ensemblectl::analytic::BivariateSeries;
use ensemblectl::ensemble::{EnsembleSystem, FieldTag, ParamSpace};
use ensemblectl::reduction::{demos, jacobian_rank, slice_witness, SliceOptions};

fn main() -> ensemblectl::Result<()> {
    // a = re σ on the unit disk: the chart comes from the Jacobian kernel
    let disk = ParamSpace::disk(1.0, 16, 32)?;
    let sys = EnsembleSystem::scalar(disk, demos::sigma1(), vec![BivariateSeries::one()], FieldTag::Complex)?;
    let rep = jacobian_rank(&sys.a, &sys.space)?;
    println!("k_J = {} at {:?}", rep.k_j, rep.sigma_j);
    let w = slice_witness(&sys, &SliceOptions::default())?;
    println!(
        "probe μ1^{}: ‖g‖ = {:.6e}, max ratio = {:.2e}, chart = {:?}",
        w.probe_power, w.g_norm, w.max_ratio, w.chart
    );

    // a = σ1 + σ2²: level sets are parabolas, followed by the kernel flow
    let sys = EnsembleSystem::scalar(
        demos::unit_box(12)?,
        demos::sigma1().add(&demos::sigma2().pow(2)),
        vec![BivariateSeries::one()],
        FieldTag::Complex,
    )?;
    let w = slice_witness(&sys, &SliceOptions::default())?;
    println!(
        "curved: a varies by {:.1e} along slices, max ratio = {:.2e}, half width = {:.4}",
        w.a_variation,
        w.max_ratio,
        w.chart.as_ref().map_or(0.0, |c| c.half_width)
    );

    // a = μ2 in straightened coordinates with inputs 1 and μ1
    let square = ParamSpace::box_space(vec![(-1.0, 1.0), (-1.0, 1.0)], vec![16, 16])?;
    let sys = EnsembleSystem::scalar(square, demos::sigma2(), vec![BivariateSeries::one(), demos::sigma1()], FieldTag::Complex)?;
    let opts = SliceOptions { straightened: true, ..SliceOptions::default() };
    let w = slice_witness(&sys, &opts)?;
    println!(
        "straightened: probe μ1^{}, slice ranks {:?}, ‖g‖ = {:.6e}, max ratio = {:.2e}",
        w.probe_power,
        &w.slice_ranks[..3],
        w.g_norm,
        w.max_ratio
    );
    Ok(())
}
