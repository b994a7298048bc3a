//! Minima, critical depths and decay hypotheses of the bundled potentials.

use reslab::potential::{default_fit_range, presets, verify_hypotheses};
use reslab::wells::{agmon_distance, default_domain, well_structure};

fn main() -> reslab::Result<()> {
    for (name, spec) in [("reference", presets::reference()), ("tilted_quartic", presets::tilted_quartic())] {
        let wells = well_structure(&spec, default_domain(&spec), 20_000)?;
        println!("{name}:");
        for (i, m) in wells.minima.iter().enumerate() {
            println!("  x_{i} = {:+.6}  F = {:+.6}  d_{i} = {:.6}", m.x, m.f, wells.depth(i));
        }
        if wells.minima.len() > 1 {
            let (x0, x1) = (wells.minima[0].x, wells.minima[1].x);
            println!("  Agmon distance x_1 -> x_0: {:.6}", agmon_distance(&spec, x1, &[x0])?);
        }
        let h = verify_hypotheses(&spec, default_fit_range(&spec), &[])?;
        println!(
            "  gamma = {:.4}  c_V = {:.4}  C_V = {:.4}  beta0 = {:.4}  pass = {}",
            h.gamma_fit,
            h.c_v,
            h.c_v_upper,
            h.beta0,
            h.passed()
        );
    }
    Ok(())
}
