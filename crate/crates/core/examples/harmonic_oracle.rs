//! Interior Dirichlet levels of the harmonic well against the closed form
//! `eps (sqrt(2) (n + 1/2) - 1/2)`.

use reslab::operator::assemble_interior;
use reslab::potential::presets;
use reslab::spectral::lowest_eigs;

fn main() -> reslab::Result<()> {
    let spec = presets::harmonic();
    for eps in [0.2, 0.1, 0.05] {
        let op = assemble_interior(&spec, eps, 6.0, 4000)?;
        let sp = lowest_eigs(&op, 4, 1e-12)?;
        println!("eps = {eps}");
        for (n, &l) in sp.eigenvalues.iter().enumerate() {
            let exact = eps * (2f64.sqrt() * (n as f64 + 0.5) - 0.5);
            println!(
                "  n = {n}: {l:.12e}  exact {exact:.12e}  rel err {:.2e}  residual {:.1e}",
                (l - exact).abs() / exact,
                sp.residuals[n]
            );
        }
    }
    Ok(())
}
