//! Experiment configs, epsilon sweeps, depth fits, caching and reports.
//!
//! A sweep runs every stage at each `eps` of the config: interior
//! spectrum, resonances, symbol scans. A failure at one `eps` is recorded
//! in that row and the sweep goes on. Records are content-addressed by a
//! hash of the resolved config, which keys the on-disk cache.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::operator::{assemble_interior, ContourMode, ScalingContour};
use crate::potential::{
    build_potential, default_fit_range, linear_fit, presets, scaling_radius, verify_hypotheses, HypothesisReport,
    PotentialConfig, PotentialSpec,
};
use crate::spectral::{find_resonances, lowest_eigs, ResonanceParams};
use crate::symbols::{symbol_report, ScanGrids, SymbolScanReport};
use crate::wells::{default_domain, well_structure, WellStructure};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Grid resolution of the well analysis.
const WELL_GRID: usize = 20_000;

/// Minimum number of converged points for a depth fit.
pub const MIN_FIT_POINTS: usize = 4;

// ---------------------------------------------------------------------------
// config

/// Where the potential comes from: a file path (relative to the config
/// file), `preset:NAME`, or an inline table. Loading resolves it to
/// `Inline`.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(untagged)]
pub enum PotentialRef {
    Path(String),
    Inline(PotentialConfig),
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Fixed interior node count; automatic when absent.
    pub n: Option<usize>,
    pub n_min: usize,
    /// Nodes per `h_target` across one `r0`.
    pub points_per_r0: f64,
    pub h_target_max: f64,
    /// Fixed Dirichlet radius; `scaling_radius` when absent. Required for
    /// potentials without a tail.
    pub r0: Option<f64>,
    /// `R_max = r_max_factor * r0`.
    pub r_max_factor: f64,
    /// Also solve with `R_max` doubled and record the change.
    pub r_max_check: bool,
    pub check_truncation: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n: None,
            n_min: 4000,
            points_per_r0: 40.0,
            h_target_max: 0.01,
            r0: None,
            r_max_factor: 4.0,
            r_max_check: false,
            check_truncation: false,
        }
    }
}

impl GridConfig {
    /// `max(n_min, points_per_r0 * r0 / h_target)`, `h_target = min(h_max, eps/4)`.
    pub fn node_count(&self, r0: f64, eps: f64) -> usize {
        if let Some(n) = self.n {
            return n;
        }
        let h_target = self.h_target_max.min(eps / 4.0);
        (self.n_min as f64).max(self.points_per_r0 * r0 / h_target) as usize
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ContourConfig {
    pub beta: f64,
    pub mode: ContourMode,
    /// Transition width of the smooth contour.
    pub width: f64,
}

impl Default for ContourConfig {
    fn default() -> Self {
        ContourConfig {
            beta: 0.3,
            mode: ContourMode::Sharp,
            width: 0.5,
        }
    }
}

impl ContourConfig {
    pub fn at(&self, r0: f64) -> ScalingContour {
        match self.mode {
            ContourMode::Sharp => ScalingContour::sharp(r0, self.beta),
            ContourMode::Smooth => ScalingContour::smooth(r0, self.beta, self.width),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub eig_tol: f64,
    pub res_tol: f64,
    pub max_iter: usize,
    pub beta_step: f64,
    pub drifts: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eig_tol: 1e-12,
            res_tol: 1e-10,
            max_iter: 500,
            beta_step: 0.05,
            drifts: true,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub n_x: usize,
    pub n_xi: usize,
    pub n_omega: usize,
    pub c_z: f64,
    pub xi_band: f64,
    pub n_directions: usize,
    pub beta_list: Vec<f64>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        let g = ScanGrids::new(1.0);
        ScanConfig {
            n_x: g.n_x,
            n_xi: g.n_xi,
            n_omega: g.n_omega,
            c_z: g.c_z,
            xi_band: g.xi_band,
            n_directions: g.n_directions,
            beta_list: vec![0.1, 0.2, 0.3],
        }
    }
}

impl ScanConfig {
    pub fn grids(&self, r0: f64) -> ScanGrids {
        ScanGrids {
            r0,
            n_x: self.n_x,
            n_xi: self.n_xi,
            n_omega: self.n_omega,
            c_z: self.c_z,
            xi_band: self.xi_band,
            n_directions: self.n_directions,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(deny_unknown_fields, default)]
pub struct Stages {
    pub spectrum: bool,
    pub resonances: bool,
    pub symbols: bool,
}

impl Default for Stages {
    fn default() -> Self {
        Stages {
            spectrum: true,
            resonances: true,
            symbols: true,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub potential: PotentialRef,
    #[serde(default = "default_eps_list")]
    pub eps_list: Vec<f64>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub contour: ContourConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    /// Number of low eigenvalues `k` (and resonance seeds) per `eps`.
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default)]
    pub stages: Stages,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
}

pub fn default_eps_list() -> Vec<f64> {
    vec![0.20, 0.175, 0.15, 0.125, 0.10]
}

fn default_seeds() -> usize {
    3
}

fn default_out_dir() -> String {
    "out".into()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            potential: PotentialRef::Inline(presets::reference().to_config()),
            eps_list: default_eps_list(),
            grid: GridConfig::default(),
            contour: ContourConfig::default(),
            solver: SolverConfig::default(),
            scan: ScanConfig::default(),
            seeds: default_seeds(),
            stages: Stages::default(),
            out_dir: default_out_dir(),
        }
    }
}

fn preset(name: &str) -> Option<PotentialSpec> {
    match name {
        "reference" => Some(presets::reference()),
        "harmonic" => Some(presets::harmonic()),
        "tilted_quartic" => Some(presets::tilted_quartic()),
        _ => None,
    }
}

impl ExperimentConfig {
    /// Parses TOML text. Potential paths are resolved against `base`.
    /// The result holds the potential inline and has been validated.
    pub fn from_toml(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let spec = cfg.resolve_potential(base)?;
        cfg.potential = PotentialRef::Inline(spec.to_config());
        cfg.validate(&spec)?;
        Ok(cfg)
    }

    /// Reads a config file. A bare potential file is also accepted and
    /// run with the default experiment settings.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        match Self::from_toml(&text, path.parent()) {
            Ok(cfg) => Ok(cfg),
            Err(err) => match build_potential(&text) {
                Ok(spec) => Self::for_potential(&spec),
                Err(_) => Err(err),
            },
        }
    }

    /// Default settings around a given potential.
    pub fn for_potential(spec: &PotentialSpec) -> Result<Self> {
        let cfg = ExperimentConfig {
            potential: PotentialRef::Inline(spec.to_config()),
            ..Default::default()
        };
        cfg.validate(spec)?;
        Ok(cfg)
    }

    fn resolve_potential(&self, base: Option<&Path>) -> Result<PotentialSpec> {
        match &self.potential {
            PotentialRef::Inline(p) => PotentialSpec::from_config(p.clone()).map_err(|e| Error::Config(e.to_string())),
            PotentialRef::Path(s) => {
                if let Some(name) = s.strip_prefix("preset:") {
                    return preset(name).ok_or_else(|| Error::Config(format!("unknown preset '{name}'")));
                }
                let p = base.map_or_else(|| PathBuf::from(s), |b| b.join(s));
                let text = fs::read_to_string(&p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                build_potential(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))
            }
        }
    }

    /// The potential, validated.
    pub fn spec(&self) -> Result<PotentialSpec> {
        self.resolve_potential(None)
    }

    pub fn validate(&self, spec: &PotentialSpec) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.eps_list.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return bad("eps values must be positive".into());
        }
        if self.eps_list.windows(2).any(|w| w[0] <= w[1]) {
            return bad("eps_list must be sorted in strictly descending order".into());
        }
        let s = &self.solver;
        if !(s.eig_tol > 0.0 && s.res_tol > 0.0 && s.beta_step > 0.0) || s.max_iter == 0 {
            return bad("solver tolerances must be positive".into());
        }
        if self.seeds == 0 {
            return bad("seeds must be at least 1".into());
        }
        let g = &self.grid;
        if !(g.h_target_max > 0.0 && g.points_per_r0 > 0.0) {
            return bad("grid spacing parameters must be positive".into());
        }
        if !(g.r_max_factor >= 3.0) {
            return bad("grid.r_max_factor must be at least 3".into());
        }
        if g.r0.is_some_and(|r| !(r > 0.0)) {
            return bad("grid.r0 must be positive".into());
        }
        if spec.tail.is_none() && g.r0.is_none() && !self.eps_list.is_empty() {
            return bad("a potential without a tail needs grid.r0".into());
        }
        if spec.tail.is_some() && self.contour.beta.abs() > spec.beta0 {
            return bad(format!("contour.beta = {} exceeds beta0 = {}", self.contour.beta, spec.beta0));
        }
        if self.contour.mode == ContourMode::Smooth && !(self.contour.width > 0.0) {
            return bad("contour.width must be positive".into());
        }
        if self.scan.n_x == 0 || self.scan.n_xi == 0 || self.scan.n_omega == 0 || !(self.scan.c_z > 0.0) {
            return bad("scan grids must be non-empty".into());
        }
        Ok(())
    }

    /// Hex sha256 of the canonical JSON of the config (output directory
    /// excluded) and the tool version. Object keys are sorted, so the
    /// hash does not depend on key order in the source file.
    pub fn content_hash(&self) -> String {
        let mut view = self.clone();
        view.out_dir.clear();
        let canonical = serde_json::json!({ "config": view, "tool_version": TOOL_VERSION });
        // serde_json::Value maps are ordered by key
        let text = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

// ---------------------------------------------------------------------------
// depth fit

/// Least squares of `ln λ` against `1/ε`. Returns `(-slope, r²)`.
pub fn fit_depth(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints(points.len()));
    }
    if let Some(&(_, l)) = points.iter().find(|(_, l)| !(*l > 0.0)) {
        return Err(Error::NonPositiveEigenvalue(l));
    }
    let x: Vec<f64> = points.iter().map(|(e, _)| 1.0 / e).collect();
    let y: Vec<f64> = points.iter().map(|(_, l)| l.ln()).collect();
    let (slope, _, r2) = linear_fit(&x, &y);
    Ok((-slope, r2))
}

// ---------------------------------------------------------------------------
// run records

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

/// One converged resonance. Drifts are absent when the drift solve failed
/// or was not requested.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ResonanceRow {
    pub index: usize,
    pub lambda_seed: f64,
    pub mu: Complex64,
    pub theta_drift: Option<f64>,
    pub grid_drift: Option<f64>,
    /// `|Δμ|` when `R_max` is doubled.
    pub r_max_drift: Option<f64>,
    pub iters: usize,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct SeedFailure {
    pub index: usize,
    pub lambda_seed: f64,
    pub message: String,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct EpsRecord {
    pub eps: f64,
    pub r0: Option<f64>,
    pub n: Option<usize>,
    pub lambdas: Vec<f64>,
    pub residuals: Vec<f64>,
    pub resonances: Vec<ResonanceRow>,
    pub seed_failures: Vec<SeedFailure>,
    pub symbol: Option<SymbolScanReport>,
    /// `eps ln(λ_i / |Im μ_i|)` per index, where a resonance converged.
    pub s_proxy: Vec<Option<f64>>,
    pub errors: Vec<StageError>,
}

impl EpsRecord {
    fn empty(eps: f64) -> Self {
        EpsRecord {
            eps,
            r0: None,
            n: None,
            lambdas: Vec::new(),
            residuals: Vec::new(),
            resonances: Vec::new(),
            seed_failures: Vec::new(),
            symbol: None,
            s_proxy: Vec::new(),
            errors: Vec::new(),
        }
    }

    fn fail(&mut self, stage: &str, e: Error) {
        self.errors.push(StageError {
            stage: stage.into(),
            message: e.to_string(),
        });
    }

    /// True when the interior spectrum was computed.
    pub fn converged(&self) -> bool {
        !self.lambdas.is_empty()
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct DepthRow {
    pub index: usize,
    pub d_well_analysis: f64,
    pub d_fitted: Option<f64>,
    pub rel_err: Option<f64>,
    pub r2: Option<f64>,
    pub points: usize,
    pub note: Option<String>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub config_hash: String,
    pub tool_version: String,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub config: ExperimentConfig,
    pub wells: Option<WellStructure>,
    pub hypotheses: Option<HypothesisReport>,
    /// Failures outside the per-eps stages.
    pub errors: Vec<StageError>,
    pub per_eps: Vec<EpsRecord>,
    pub depths: Vec<DepthRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepStatus {
    Complete,
    /// Some stage failed at some `eps` (a missing resonance for one seed
    /// does not count).
    Partial,
    /// No `eps` produced a spectrum.
    Failed,
}

impl RunRecord {
    pub fn status(&self) -> SweepStatus {
        if !self.per_eps.is_empty() && self.per_eps.iter().all(|r| !r.converged()) {
            return SweepStatus::Failed;
        }
        if !self.errors.is_empty() || self.per_eps.iter().any(|r| !r.errors.is_empty()) {
            return SweepStatus::Partial;
        }
        SweepStatus::Complete
    }

    /// Copy with both timestamps zeroed, for comparisons.
    pub fn without_timestamps(&self) -> Self {
        RunRecord {
            started_unix_ms: 0,
            finished_unix_ms: 0,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Record with no stages run, used as a starting point.
    pub fn empty(config: ExperimentConfig) -> Self {
        RunRecord {
            config_hash: config.content_hash(),
            tool_version: TOOL_VERSION.into(),
            started_unix_ms: 0,
            finished_unix_ms: 0,
            config,
            wells: None,
            hypotheses: None,
            errors: Vec::new(),
            per_eps: Vec::new(),
            depths: Vec::new(),
        }
    }
}

fn unix_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

// ---------------------------------------------------------------------------
// sweep

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn run_eps(cfg: &ExperimentConfig, spec: &PotentialSpec, hyp: Option<&HypothesisReport>, eps: f64) -> EpsRecord {
    let mut rec = EpsRecord::empty(eps);
    let r0 = match cfg.grid.r0 {
        Some(r) => Ok(r),
        None => hyp.ok_or(Error::HypothesesNotVerified).and_then(|h| scaling_radius(h, eps)),
    };
    let r0 = match r0 {
        Ok(r) => r,
        Err(e) => {
            rec.fail("scaling_radius", e);
            return rec;
        }
    };
    let n = cfg.grid.node_count(r0, eps);
    rec.r0 = Some(r0);
    rec.n = Some(n);
    if !cfg.stages.spectrum {
        return rec;
    }
    let spectrum = assemble_interior(spec, eps, r0, n).and_then(|op| lowest_eigs(&op, cfg.seeds, cfg.solver.eig_tol));
    match spectrum {
        Ok(sp) => {
            rec.lambdas = sp.eigenvalues;
            rec.residuals = sp.residuals;
        }
        Err(e) => {
            rec.fail("interior_spectrum", e);
            return rec;
        }
    }
    let open = spec.tail.is_some() && hyp.is_some();
    if cfg.stages.resonances && open {
        resonance_stage(cfg, spec, eps, r0, n, &mut rec);
    }
    if cfg.stages.symbols && open {
        let lambda = rec.lambdas[1.min(rec.lambdas.len() - 1)];
        let grids = cfg.scan.grids(r0);
        let hyp = hyp.expect("checked above");
        match symbol_report(spec, hyp, eps, cfg.contour.beta, lambda, &grids, &cfg.scan.beta_list) {
            Ok(r) => rec.symbol = Some(r),
            Err(e) => rec.fail("symbol_scan", e),
        }
    }
    rec
}

fn resonance_stage(cfg: &ExperimentConfig, spec: &PotentialSpec, eps: f64, r0: f64, n: usize, rec: &mut EpsRecord) {
    let contour = cfg.contour.at(r0);
    let params = ResonanceParams {
        n,
        r_max: Some(cfg.grid.r_max_factor * r0),
        tol: cfg.solver.res_tol,
        max_iter: cfg.solver.max_iter,
        beta_step: cfg.solver.beta_step,
        drifts: cfg.solver.drifts,
        check_truncation: cfg.grid.check_truncation,
    };
    let results = match find_resonances(spec, eps, &contour, &rec.lambdas, &params) {
        Ok(r) => r,
        Err(e) => {
            rec.fail("resonances", e);
            return;
        }
    };
    let doubled = if cfg.grid.r_max_check {
        let p = ResonanceParams {
            r_max: Some(2.0 * cfg.grid.r_max_factor * r0),
            drifts: false,
            ..params.clone()
        };
        match find_resonances(spec, eps, &contour, &rec.lambdas, &p) {
            Ok(r) => Some(r),
            Err(e) => {
                rec.fail("r_max_check", e);
                None
            }
        }
    } else {
        None
    };
    rec.s_proxy = vec![None; rec.lambdas.len()];
    for (i, r) in results.into_iter().enumerate() {
        let seed = rec.lambdas[i];
        match r {
            Ok(res) => {
                let r_max_drift = doubled
                    .as_ref()
                    .and_then(|d| d[i].as_ref().ok())
                    .map(|d| (d.mu - res.mu).norm());
                if res.mu.im != 0.0 && seed > 0.0 {
                    rec.s_proxy[i] = finite(eps * (seed / res.mu.im.abs()).ln());
                }
                rec.resonances.push(ResonanceRow {
                    index: i,
                    lambda_seed: seed,
                    mu: res.mu,
                    theta_drift: finite(res.theta_drift),
                    grid_drift: finite(res.grid_drift),
                    r_max_drift,
                    iters: res.iterations,
                });
            }
            Err(e) => rec.seed_failures.push(SeedFailure {
                index: i,
                lambda_seed: seed,
                message: e.to_string(),
            }),
        }
    }
}

fn depth_rows(wells: &WellStructure, per_eps: &[EpsRecord], k: usize) -> Vec<DepthRow> {
    (1..=wells.n())
        .filter(|&i| i < k)
        .map(|i| {
            let d = wells.depth(i);
            let points: Vec<(f64, f64)> = per_eps
                .iter()
                .filter_map(|r| r.lambdas.get(i).map(|&l| (r.eps, l)))
                .collect();
            let mut row = DepthRow {
                index: i,
                d_well_analysis: d,
                d_fitted: None,
                rel_err: None,
                r2: None,
                points: points.len(),
                note: None,
            };
            match fit_depth(&points) {
                Ok((dh, r2)) => {
                    row.d_fitted = Some(dh);
                    row.rel_err = Some((dh - d).abs() / d);
                    row.r2 = Some(r2);
                }
                Err(e) => row.note = Some(e.to_string()),
            }
            row
        })
        .collect()
}

/// Runs every enabled stage at every `eps` (in parallel), then fits the
/// depths. Per-eps failures are recorded, not returned.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let spec = cfg.spec()?;
    cfg.validate(&spec)?;
    let mut rec = RunRecord::empty(cfg.clone());
    rec.started_unix_ms = unix_ms();
    match well_structure(&spec, default_domain(&spec), WELL_GRID) {
        Ok(w) => rec.wells = Some(w),
        Err(e) => rec.errors.push(StageError {
            stage: "wells".into(),
            message: e.to_string(),
        }),
    }
    if spec.tail.is_some() {
        match verify_hypotheses(&spec, default_fit_range(&spec), &cfg.eps_list) {
            Ok(h) => rec.hypotheses = Some(h),
            Err(e) => rec.errors.push(StageError {
                stage: "hypotheses".into(),
                message: e.to_string(),
            }),
        }
    }
    let hyp = rec.hypotheses.clone().filter(|h| h.passed());
    rec.per_eps = cfg
        .eps_list
        .par_iter()
        .map(|&eps| run_eps(cfg, &spec, hyp.as_ref(), eps))
        .collect();
    if let Some(w) = &rec.wells {
        rec.depths = depth_rows(w, &rec.per_eps, cfg.seeds);
    }
    rec.finished_unix_ms = unix_ms();
    Ok(rec)
}

// ---------------------------------------------------------------------------
// cache

/// Directory of records keyed by config hash. Reads and writes are
/// serialized through a lock file in the directory.
#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

struct LockGuard(PathBuf);

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

const LOCK_TIMEOUT: Duration = Duration::from_secs(120);

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Cache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn record_path(&self, hash: &str) -> PathBuf {
        self.dir.join(format!("{hash}.json"))
    }

    fn lock(&self) -> Result<LockGuard> {
        let path = self.dir.join(".lock");
        let start = Instant::now();
        loop {
            match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(_) => return Ok(LockGuard(path)),
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                    if start.elapsed() > LOCK_TIMEOUT {
                        return Err(Error::Io(format!("cache lock {} is held", path.display())));
                    }
                    std::thread::sleep(Duration::from_millis(20));
                }
                Err(e) => return Err(e.into()),
            }
        }
    }

    pub fn load(&self, hash: &str) -> Result<Option<RunRecord>> {
        let _guard = self.lock()?;
        let path = self.record_path(hash);
        if !path.exists() {
            return Ok(None);
        }
        RunRecord::from_json(&fs::read_to_string(path)?).map(Some)
    }

    pub fn store(&self, rec: &RunRecord) -> Result<()> {
        let _guard = self.lock()?;
        let tmp = self.dir.join(format!(".{}.tmp", rec.config_hash));
        fs::write(&tmp, rec.to_json())?;
        fs::rename(tmp, self.record_path(&rec.config_hash))?;
        Ok(())
    }
}

/// Sweep runner with an optional cache. Counts the sweeps it actually
/// computes, so cache hits can be observed.
#[derive(Debug, Default)]
pub struct SweepRunner {
    cache: Option<Cache>,
    computed: AtomicUsize,
}

impl SweepRunner {
    pub fn new(cache: Option<Cache>) -> Self {
        SweepRunner {
            cache,
            computed: AtomicUsize::new(0),
        }
    }

    /// Number of sweeps computed (cache misses) so far.
    pub fn computed(&self) -> usize {
        self.computed.load(Ordering::SeqCst)
    }

    pub fn run(&self, cfg: &ExperimentConfig) -> Result<RunRecord> {
        let hash = cfg.content_hash();
        if let Some(c) = &self.cache {
            if let Some(rec) = c.load(&hash)? {
                return Ok(rec);
            }
        }
        self.computed.fetch_add(1, Ordering::SeqCst);
        let rec = run_sweep(cfg)?;
        if let Some(c) = &self.cache {
            c.store(&rec)?;
        }
        Ok(rec)
    }
}

// ---------------------------------------------------------------------------
// reports

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    SvgData,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "svg-data" => Ok(ReportFormat::SvgData),
            _ => Err(Error::Config(format!("unknown report format '{s}'"))),
        }
    }
}

pub const SPECTRA_HEADER: [&str; 4] = ["eps", "index", "lambda", "residual"];
pub const RESONANCES_HEADER: [&str; 8] = [
    "eps",
    "index",
    "lambda_seed",
    "re_mu",
    "im_mu",
    "theta_drift",
    "grid_drift",
    "iters",
];
pub const DEPTHS_HEADER: [&str; 5] = ["index", "d_well_analysis", "d_fitted", "rel_err", "r2"];
pub const SYMBOL_HEADER: [&str; 5] = ["eps", "c_lower", "nontrap_min", "taylor_err1", "taylor_err2"];

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn write_table<W: Write>(w: W, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(csv_err)?;
    for r in rows {
        out.write_record(&r).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_spectra_csv<W: Write>(rec: &RunRecord, w: W) -> Result<()> {
    let rows = rec
        .per_eps
        .iter()
        .flat_map(|e| {
            e.lambdas
                .iter()
                .zip(&e.residuals)
                .enumerate()
                .map(move |(i, (l, r))| vec![num(e.eps), i.to_string(), num(*l), num(*r)])
        })
        .collect();
    write_table(w, &SPECTRA_HEADER, rows)
}

pub fn write_resonances_csv<W: Write>(rec: &RunRecord, w: W) -> Result<()> {
    let rows = rec
        .per_eps
        .iter()
        .flat_map(|e| {
            e.resonances.iter().map(move |r| {
                vec![
                    num(e.eps),
                    r.index.to_string(),
                    num(r.lambda_seed),
                    num(r.mu.re),
                    num(r.mu.im),
                    opt(r.theta_drift),
                    opt(r.grid_drift),
                    r.iters.to_string(),
                ]
            })
        })
        .collect();
    write_table(w, &RESONANCES_HEADER, rows)
}

pub fn write_depths_csv<W: Write>(rec: &RunRecord, w: W) -> Result<()> {
    let rows = rec
        .depths
        .iter()
        .map(|d| {
            vec![
                d.index.to_string(),
                num(d.d_well_analysis),
                opt(d.d_fitted),
                opt(d.rel_err),
                opt(d.r2),
            ]
        })
        .collect();
    write_table(w, &DEPTHS_HEADER, rows)
}

pub fn write_symbol_csv<W: Write>(rec: &RunRecord, w: W) -> Result<()> {
    let rows = rec
        .per_eps
        .iter()
        .filter_map(|e| e.symbol.as_ref())
        .map(|s| {
            vec![
                num(s.eps),
                num(s.c_lower),
                num(s.nontrap_min),
                num(s.taylor_err1),
                num(s.taylor_err2),
            ]
        })
        .collect();
    write_table(w, &SYMBOL_HEADER, rows)
}

/// Polyline as `x y` lines under a one-line comment.
fn write_polyline(path: &Path, comment: &str, points: &[(f64, f64)]) -> Result<()> {
    let mut text = format!("# {comment}\n");
    for (x, y) in points {
        text.push_str(&format!("{} {}\n", num(*x), num(*y)));
    }
    fs::write(path, text)?;
    Ok(())
}

fn svg_data(rec: &RunRecord, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let k = rec.per_eps.iter().map(|e| e.lambdas.len()).max().unwrap_or(0);
    for i in 0..k {
        let pts: Vec<(f64, f64)> = rec
            .per_eps
            .iter()
            .filter_map(|e| e.lambdas.get(i).filter(|l| **l > 0.0).map(|l| (1.0 / e.eps, l.ln())))
            .collect();
        let path = dir.join(format!("ln_lambda_{i}.dat"));
        write_polyline(&path, &format!("1/eps ln(lambda_{i})"), &pts)?;
        files.push(path);
        let pts: Vec<(f64, f64)> = rec
            .per_eps
            .iter()
            .filter_map(|e| {
                e.resonances
                    .iter()
                    .find(|r| r.index == i && r.mu.im != 0.0)
                    .map(|r| (1.0 / e.eps, r.mu.im.abs().ln()))
            })
            .collect();
        let path = dir.join(format!("ln_im_mu_{i}.dat"));
        write_polyline(&path, &format!("1/eps ln|Im mu_{i}|"), &pts)?;
        files.push(path);
    }
    let pts: Vec<(f64, f64)> = rec
        .per_eps
        .iter()
        .flat_map(|e| e.resonances.iter().map(|r| (r.mu.re, r.mu.im)))
        .collect();
    let path = dir.join("resonances_complex.dat");
    write_polyline(&path, "Re mu Im mu", &pts)?;
    files.push(path);
    Ok(files)
}

/// Writes the record in one format into `dir` and returns the files.
/// CSV gives spectra, resonances, depths and symbol tables; JSON the
/// whole record; svg-data plain polylines of `(1/eps, ln λ_i)`,
/// `(1/eps, ln|Im μ_i|)` and the resonance positions.
pub fn emit_report(rec: &RunRecord, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    match format {
        ReportFormat::Json => {
            let path = dir.join("record.json");
            fs::write(&path, rec.to_json())?;
            Ok(vec![path])
        }
        ReportFormat::Csv => {
            type Writer = fn(&RunRecord, fs::File) -> Result<()>;
            let tables: [(&str, Writer); 4] = [
                ("spectra.csv", write_spectra_csv),
                ("resonances.csv", write_resonances_csv),
                ("depths.csv", write_depths_csv),
                ("symbol.csv", write_symbol_csv),
            ];
            let mut files = Vec::new();
            for (name, write) in tables {
                let path = dir.join(name);
                write(rec, fs::File::create(&path)?)?;
                files.push(path);
            }
            Ok(files)
        }
        ReportFormat::SvgData => svg_data(rec, dir),
    }
}
