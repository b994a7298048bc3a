//! Command-line front end. Every subcommand builds an experiment config,
//! runs the stages it needs and writes its tables to the output directory.
//!
//! Exit codes: 0 success, 2 config error, 3 partial failure, 4 numerical
//! failure at every eps.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use reslab::operator::ContourMode;
use reslab::pipeline::{
    emit_report, run_sweep, write_resonances_csv, write_spectra_csv, write_symbol_csv, Cache, ExperimentConfig,
    ReportFormat, RunRecord, Stages, SweepRunner, SweepStatus,
};
use reslab::Error;

#[derive(Parser)]
#[command(name = "reslab", version, about = "Semiclassical resonance laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minima, depths and hypothesis checks of the potential.
    Wells(Common),
    /// Lowest interior Dirichlet eigenvalues at each eps.
    InteriorSpectrum(Common),
    /// Resonances seeded by the interior eigenvalues.
    Resonances(Common),
    /// Symbol lower bound, non-trapping and Taylor scans.
    SymbolCheck(Common),
    /// All stages, depth fits and every report format.
    Sweep(Common),
    /// Re-emit the reports of a saved run record.
    Report {
        /// Record written by `sweep` (record.json or a cache entry).
        #[arg(long)]
        record: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// csv, json or svg-data.
        #[arg(long, default_value = "csv")]
        format: String,
    },
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML); a bare potential file also works.
    /// Defaults to the reference double well.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated eps values, descending.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    mode: Option<ContourMode>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cache directory for sweep records (RESLAB_CACHE overrides).
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    no_cache: bool,
    #[arg(long)]
    check_truncation: bool,
}

impl Common {
    fn config(&self) -> reslab::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(e) = &self.eps {
            cfg.eps_list = e.clone();
        }
        if let Some(b) = self.beta {
            cfg.contour.beta = b;
        }
        if let Some(m) = self.mode {
            cfg.contour.mode = m;
        }
        if let Some(o) = &self.out {
            cfg.out_dir = o.display().to_string();
        }
        cfg.grid.check_truncation |= self.check_truncation;
        cfg.validate(&cfg.spec()?)?;
        Ok(cfg)
    }

    fn cache(&self) -> reslab::Result<Option<Cache>> {
        if self.no_cache {
            return Ok(None);
        }
        let dir = std::env::var_os("RESLAB_CACHE").map(PathBuf::from).or(self.cache.clone());
        dir.map(Cache::new).transpose()
    }
}

fn status_code(rec: &RunRecord) -> ExitCode {
    for e in rec.errors.iter().chain(rec.per_eps.iter().flat_map(|r| &r.errors)) {
        eprintln!("error [{}]: {}", e.stage, e.message);
    }
    match rec.status() {
        SweepStatus::Complete => ExitCode::SUCCESS,
        SweepStatus::Partial => ExitCode::from(3),
        SweepStatus::Failed => ExitCode::from(4),
    }
}

fn write_file(dir: &std::path::Path, name: &str, f: impl FnOnce(std::fs::File) -> reslab::Result<()>) -> reslab::Result<()> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    f(std::fs::File::create(&path)?)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn staged(common: &Common, stages: Stages) -> reslab::Result<(RunRecord, PathBuf)> {
    let mut cfg = common.config()?;
    cfg.stages = stages;
    let out = PathBuf::from(&cfg.out_dir);
    Ok((run_sweep(&cfg)?, out))
}

fn run(cli: Cli) -> reslab::Result<ExitCode> {
    let only = |resonances, symbols| Stages {
        spectrum: true,
        resonances,
        symbols,
    };
    match cli.command {
        Command::Wells(c) => {
            let (rec, out) = staged(
                &Common { eps: Some(Vec::new()), ..c },
                Stages {
                    spectrum: false,
                    resonances: false,
                    symbols: false,
                },
            )?;
            let summary = serde_json::json!({ "wells": rec.wells, "hypotheses": rec.hypotheses });
            let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
            println!("{text}");
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("wells.json"), text)?;
            Ok(if rec.errors.is_empty() {
                ExitCode::SUCCESS
            } else {
                status_code(&rec);
                ExitCode::from(4)
            })
        }
        Command::InteriorSpectrum(c) => {
            let (rec, out) = staged(&c, only(false, false))?;
            write_file(&out, "spectra.csv", |f| write_spectra_csv(&rec, f))?;
            Ok(status_code(&rec))
        }
        Command::Resonances(c) => {
            let (rec, out) = staged(&c, only(true, false))?;
            write_file(&out, "spectra.csv", |f| write_spectra_csv(&rec, f))?;
            write_file(&out, "resonances.csv", |f| write_resonances_csv(&rec, f))?;
            for e in &rec.per_eps {
                for s in &e.seed_failures {
                    eprintln!("eps {} seed {}: {}", e.eps, s.index, s.message);
                }
            }
            Ok(status_code(&rec))
        }
        Command::SymbolCheck(c) => {
            let (rec, out) = staged(&c, only(false, true))?;
            write_file(&out, "symbol.csv", |f| write_symbol_csv(&rec, f))?;
            let reports: Vec<_> = rec.per_eps.iter().filter_map(|e| e.symbol.as_ref()).collect();
            std::fs::write(
                out.join("symbol.json"),
                serde_json::to_string_pretty(&reports).expect("reports serialize"),
            )?;
            Ok(status_code(&rec))
        }
        Command::Sweep(c) => {
            let cfg = c.config()?;
            let runner = SweepRunner::new(c.cache()?);
            let rec = runner.run(&cfg)?;
            if runner.computed() == 0 {
                println!("cache hit {}", rec.config_hash);
            }
            let out = PathBuf::from(&cfg.out_dir);
            for format in [ReportFormat::Json, ReportFormat::Csv, ReportFormat::SvgData] {
                for p in emit_report(&rec, format, &out)? {
                    println!("wrote {}", p.display());
                }
            }
            for d in &rec.depths {
                match d.d_fitted {
                    Some(f) => println!("depth {}: fitted {f:.4} well analysis {:.4}", d.index, d.d_well_analysis),
                    None => println!("depth {}: not fitted ({} points)", d.index, d.points),
                }
            }
            Ok(status_code(&rec))
        }
        Command::Report { record, out, format } => {
            let format: ReportFormat = format.parse()?;
            let text = std::fs::read_to_string(&record).map_err(|e| Error::Config(format!("{}: {e}", record.display())))?;
            let rec = RunRecord::from_json(&text).map_err(|e| Error::Config(e.to_string()))?;
            for p in emit_report(&rec, format, &out)? {
                println!("wrote {}", p.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e @ Error::Config(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(4)
        }
    }
}
