//! Agmon decay of the first excited eigenfunction and the residual of the
//! cut-off quasimode on the scaled operator.

use reslab::operator::{assemble_full_scaled, assemble_interior, ScalingContour};
use reslab::pipeline::GridConfig;
use reslab::potential::{default_fit_range, presets, scaling_radius, verify_hypotheses};
use reslab::spectral::{cutoff_quasimode, decay_check, lowest_eigs, quasimode_residual};
use reslab::wells::{agmon_field, default_domain, well_structure};
use reslab::Complex64;

fn main() -> reslab::Result<()> {
    let spec = presets::reference();
    let hyp = verify_hypotheses(&spec, default_fit_range(&spec), &[])?;
    let wells = well_structure(&spec, default_domain(&spec), 20_000)?;
    let sources: Vec<f64> = wells.minima.iter().map(|m| m.x).collect();
    let r_in = spec.tail_start().expect("reference has a tail");
    for eps in [0.15, 0.1] {
        let r0 = scaling_radius(&hyp, eps)?;
        let n = GridConfig::default().node_count(r0, eps);
        let sp = lowest_eigs(&assemble_interior(&spec, eps, r0, n)?, 2, 1e-12)?;
        let field = agmon_field(&spec, &sp.coords, &sources)?;
        let sup = decay_check(&sp.vectors[1], &field, eps);
        let d0 = sp
            .coords
            .iter()
            .zip(&field.dist)
            .filter(|(x, _)| x.abs() >= r_in)
            .map(|(_, d)| *d)
            .fold(f64::INFINITY, f64::min);
        let op = assemble_full_scaled(&spec, eps, &ScalingContour::sharp(r0, 0.3), n, 4.0 * r0, false)?;
        let psi = cutoff_quasimode(&op, &sp.vectors[1], r_in)?;
        let res = quasimode_residual(&op, &psi, Complex64::new(sp.eigenvalues[1], 0.0));
        println!(
            "eps {eps}: sup(eps ln|u_1| + d) = {sup:.4}  eps ln(residual) = {:.4}  -d'_0 = {:.4}",
            eps * res.ln(),
            -d0
        );
    }
    Ok(())
}
