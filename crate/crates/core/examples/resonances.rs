//! Resonances of the reference double well by exterior complex scaling,
//! seeded by the interior Dirichlet eigenvalues.

use reslab::operator::{assemble_interior, ScalingContour};
use reslab::pipeline::GridConfig;
use reslab::potential::{default_fit_range, presets, scaling_radius, verify_hypotheses};
use reslab::spectral::{find_resonances, lowest_eigs, ResonanceParams};

fn main() -> reslab::Result<()> {
    let spec = presets::reference();
    let hyp = verify_hypotheses(&spec, default_fit_range(&spec), &[])?;
    for eps in [0.16, 0.14, 0.12] {
        let r0 = scaling_radius(&hyp, eps)?;
        let n = GridConfig::default().node_count(r0, eps);
        let sp = lowest_eigs(&assemble_interior(&spec, eps, r0, n)?, 3, 1e-12)?;
        let params = ResonanceParams { n, ..Default::default() };
        let results = find_resonances(&spec, eps, &ScalingContour::sharp(r0, 0.3), &sp.eigenvalues, &params)?;
        println!("eps = {eps}, r0 = {r0:.3}, N = {n}");
        for (i, r) in results.iter().enumerate() {
            match r {
                Ok(r) => println!(
                    "  {i}: lambda {:.6e}  mu {:.6e} {:+.3e}i  |Re mu - lambda|/lambda {:.2e}  theta drift {:.1e}  grid drift {:.1e}",
                    r.seed,
                    r.mu.re,
                    r.mu.im,
                    (r.mu.re - r.seed).abs() / r.seed,
                    r.theta_drift,
                    r.grid_drift
                ),
                Err(e) => println!("  {i}: {e}"),
            }
        }
    }
    Ok(())
}
