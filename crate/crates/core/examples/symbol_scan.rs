//! Symbol lower bound, non-trapping ratio and Taylor remainders of the
//! rotated potential, at three values of eps.

use reslab::operator::assemble_interior;
use reslab::pipeline::GridConfig;
use reslab::potential::{default_fit_range, presets, scaling_radius, verify_hypotheses};
use reslab::spectral::lowest_eigs;
use reslab::symbols::{symbol_report, ScanGrids};

fn main() -> reslab::Result<()> {
    let spec = presets::reference();
    let hyp = verify_hypotheses(&spec, default_fit_range(&spec), &[])?;
    for eps in [0.2, 0.1, 0.05] {
        let r0 = scaling_radius(&hyp, eps)?;
        let n = GridConfig::default().node_count(r0, eps);
        let lambda = lowest_eigs(&assemble_interior(&spec, eps, r0, n)?, 2, 1e-12)?.eigenvalues[1];
        let r = symbol_report(&spec, &hyp, eps, 0.3, lambda, &ScanGrids::new(r0), &[0.1, 0.2, 0.3])?;
        println!(
            "eps {eps}: lambda {lambda:.3e}  c_lower {:.4} at x = {:.3?}, eps xi = {:.3?}  nontrap min {:.4} (c_S {:.4})  taylor {:.3} / {:.3}",
            r.c_lower,
            r.argmin.x,
            r.argmin.xi.iter().map(|k| k * eps).collect::<Vec<_>>(),
            r.nontrap_min,
            r.c_s_used,
            r.taylor_err1,
            r.taylor_err2
        );
    }
    Ok(())
}
