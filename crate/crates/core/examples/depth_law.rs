//! The exponential law `lambda_1 ~ exp(-d_1 / eps)`: the slope of
//! `ln lambda_1` against `1/eps` recovers the well depth.

use reslab::operator::assemble_interior;
use reslab::pipeline::{default_eps_list, fit_depth, GridConfig};
use reslab::potential::{default_fit_range, presets, scaling_radius, verify_hypotheses};
use reslab::spectral::lowest_eigs;
use reslab::wells::{default_domain, well_structure};

fn main() -> reslab::Result<()> {
    let spec = presets::reference();
    let hyp = verify_hypotheses(&spec, default_fit_range(&spec), &[])?;
    let wells = well_structure(&spec, default_domain(&spec), 20_000)?;
    let mut points = Vec::new();
    println!("{:>6} {:>8} {:>7} {:>14} {:>10}", "eps", "r0", "N", "lambda_1", "ln");
    for eps in default_eps_list() {
        let r0 = scaling_radius(&hyp, eps)?;
        let n = GridConfig::default().node_count(r0, eps);
        let sp = lowest_eigs(&assemble_interior(&spec, eps, r0, n)?, 2, 1e-12)?;
        let l1 = sp.eigenvalues[1];
        println!("{eps:>6} {r0:>8.3} {n:>7} {l1:>14.6e} {:>10.4}", l1.ln());
        points.push((eps, l1));
    }
    let (d, r2) = fit_depth(&points)?;
    let d1 = wells.depth(1);
    println!("fitted d_1 = {d:.4}, well analysis d_1 = {d1:.4}, rel err {:.3}, r2 = {r2:.6}", (d - d1).abs() / d1);
    Ok(())
}
