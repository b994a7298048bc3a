//! Full sweep from a config file, with reports written to a directory.
//! Usage: cargo run --example sweep -- [CONFIG] [OUT]

use std::path::PathBuf;

use reslab::pipeline::{emit_report, ExperimentConfig, ReportFormat, SweepRunner};

fn main() -> reslab::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/experiment_reference.toml"));
    let cfg = ExperimentConfig::load(&config)?;
    let out = args.next().map_or_else(|| std::env::temp_dir().join("reslab-sweep"), PathBuf::from);
    let rec = SweepRunner::new(None).run(&cfg)?;
    for e in &rec.per_eps {
        let lambdas: Vec<String> = e.lambdas.iter().map(|l| format!("{l:.3e}")).collect();
        let mu1 = e
            .resonances
            .iter()
            .find(|r| r.index == 1)
            .map_or("-".into(), |r| format!("{:.4e} {:+.3e}i", r.mu.re, r.mu.im));
        let s1 = e.s_proxy.get(1).copied().flatten().map_or("-".into(), |s| format!("{s:.3}"));
        println!("eps {:<6} lambda [{}]  mu_1 {mu1}  S-proxy {s1}", e.eps, lambdas.join(", "));
    }
    for d in &rec.depths {
        println!("d_{}: fitted {:?} well analysis {:.4}", d.index, d.d_fitted, d.d_well_analysis);
    }
    for f in [ReportFormat::Csv, ReportFormat::Json, ReportFormat::SvgData] {
        emit_report(&rec, f, &out)?;
    }
    println!("status {:?}, reports in {}", rec.status(), out.display());
    Ok(())
}
