//! Writes the scaled operator in Matrix Market form for use elsewhere.
//! Usage: cargo run --example export_operator -- [EPS] [PATH]

use reslab::operator::{assemble_full_scaled, ScalingContour};
use reslab::potential::{default_fit_range, presets, scaling_radius, verify_hypotheses};

fn main() -> reslab::Result<()> {
    let mut args = std::env::args().skip(1);
    let eps: f64 = args.next().map_or(Ok(0.15), |s| s.parse()).expect("EPS must be a number");
    let path = args.next().unwrap_or_else(|| "operator.mtx".into());
    let spec = presets::reference();
    let r0 = scaling_radius(&verify_hypotheses(&spec, default_fit_range(&spec), &[])?, eps)?;
    let op = assemble_full_scaled(&spec, eps, &ScalingContour::sharp(r0, 0.3), 4000, 4.0 * r0, false)?;
    op.write_matrix_market(std::fs::File::create(&path)?)?;
    println!("wrote {path}: {} unknowns, h = {:.4e}, r0 = {r0:.3}", op.n(), op.grid.h);
    Ok(())
}
