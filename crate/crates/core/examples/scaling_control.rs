//! Complex scaling leaves discrete eigenvalues alone. For the harmonic
//! well the scaled operator (beta = 0.3 beyond r0) returns the interior
//! Dirichlet eigenvalues with a negligible imaginary part.

use reslab::operator::{assemble_full_scaled, assemble_interior, ScalingContour};
use reslab::potential::presets;
use reslab::spectral::{lowest_eigs, shift_invert_complex};
use reslab::Complex64;

fn main() -> reslab::Result<()> {
    let spec = presets::harmonic();
    let (eps, r0, n) = (0.1, 3.0, 4000);
    let interior = lowest_eigs(&assemble_interior(&spec, eps, r0, n)?, 3, 1e-12)?;
    let contour = ScalingContour::sharp(r0, 0.3);
    let scaled = assemble_full_scaled(&spec, eps, &contour, n, 4.0 * r0, false)?;
    println!("beta0 = {:.4}, scaled dimension {}", spec.beta0, scaled.n());
    println!("{:>3} {:>22} {:>22} {:>11} {:>11}", "n", "unscaled", "Re mu", "|Im mu|", "rel diff");
    for (k, &lam) in interior.eigenvalues.iter().enumerate() {
        let r = shift_invert_complex(&scaled, Complex64::new(lam * (1.0 + 1e-6), 0.0), 1e-12, 200)?;
        println!(
            "{k:>3} {lam:>22.15e} {:>22.15e} {:>11.2e} {:>11.2e}",
            r.mu.re,
            r.mu.im.abs(),
            (r.mu.re - lam).abs() / lam
        );
    }
    Ok(())
}
