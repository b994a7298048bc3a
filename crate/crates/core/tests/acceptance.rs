//! Acceptance suite: one PASS/FAIL line per criterion, with the measured
//! quantity next to its bound. Exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reslab::operator::{assemble_full_scaled, assemble_interior, ScalingContour};
use reslab::pipeline::{fit_depth, GridConfig};
use reslab::potential::{
    default_fit_range, presets, scaling_radius, verify_hypotheses, CoreTerm, HypothesisReport, PotentialConfig,
    PotentialSpec,
};
use reslab::spectral::{
    cutoff_quasimode, decay_check, find_resonances, lowest_eigs, quasimode_residual, shift_invert_complex,
    ResonanceParams, SpectrumResult,
};
use reslab::symbols::{lower_bound_scan, non_trapping_scan, security_constant, ScanGrids};
use reslab::wells::{
    agmon_field, barrier_cost, barrier_cost_bruteforce, barrier_cost_grid, default_domain, well_structure, Grid2D,
    WellStructure,
};
use reslab::Complex64;

// criterion 1
const HARMONIC_RTOL: f64 = 1e-4;
const HARMONIC_BUDGET: Duration = Duration::from_secs(10);
// criterion 2
const DEPTH_RTOL: f64 = 0.10;
const DEPTH_R2_MIN: f64 = 0.999;
const DEPTH_BUDGET: Duration = Duration::from_secs(180);
// criterion 3
const RESONANCE_RATIO_MAX: f64 = 1e-2;
const RESONANCE_EPS: [f64; 3] = [0.16, 0.14, 0.12];
const RESONANCE_BUDGET: Duration = Duration::from_secs(300);
// criterion 4
const THETA_VS_GRID_MAX: f64 = 10.0;
// criterion 5
const CONTROL_IM_MAX: f64 = 1e-8;
const CONTROL_RTOL: f64 = 1e-8;
// criterion 6
const NONTRAP_EPS: [f64; 2] = [0.05, 0.1];
// criterion 7
const C_LOWER_MIN: f64 = 0.01;
const C_LOWER_SPREAD_MAX: f64 = 2.0;
const SYMBOL_EPS: [f64; 3] = [0.05, 0.1, 0.2];
// criterion 8
const DECAY_SLACK: f64 = 0.15;
const DECAY_EPS: [f64; 2] = [0.1, 0.15];
// criterion 9
const GRID_TRIALS: usize = 200;
const POLY_TRIALS: usize = 50;
const POLY_ATOL: f64 = 1e-8;
// criterion 10
const QUASIMODE_SLACK: f64 = 0.1;

const BETA: f64 = 0.3;

struct Reference {
    spec: PotentialSpec,
    hyp: HypothesisReport,
    wells: WellStructure,
}

impl Reference {
    fn new() -> Self {
        let spec = presets::reference();
        let hyp = verify_hypotheses(&spec, default_fit_range(&spec), &[]).expect("hypotheses");
        let wells = well_structure(&spec, default_domain(&spec), 20_000).expect("wells");
        Reference { spec, hyp, wells }
    }

    /// Dirichlet radius, node count and lowest `k` eigenpairs at `eps`.
    fn interior(&self, eps: f64, k: usize) -> Result<(f64, usize, SpectrumResult), String> {
        let r0 = scaling_radius(&self.hyp, eps).map_err(|e| e.to_string())?;
        let n = GridConfig::default().node_count(r0, eps);
        let op = assemble_interior(&self.spec, eps, r0, n).map_err(|e| e.to_string())?;
        let sp = lowest_eigs(&op, k, 1e-12).map_err(|e| e.to_string())?;
        Ok((r0, n, sp))
    }

    /// `mu_1` at `eps` and angle `beta`, with or without drifts.
    fn mu1(&self, eps: f64, beta: f64, drifts: bool) -> Result<(f64, reslab::spectral::ResonanceResult), String> {
        let (r0, n, sp) = self.interior(eps, 3)?;
        let params = ResonanceParams {
            n,
            drifts,
            ..Default::default()
        };
        let c = ScalingContour::sharp(r0, beta);
        let res = find_resonances(&self.spec, eps, &c, &sp.eigenvalues, &params).map_err(|e| e.to_string())?;
        let r = res[1].clone().map_err(|e| e.to_string())?;
        Ok((sp.eigenvalues[1], r))
    }
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

type Check = Result<(bool, String), String>;

fn harmonic_oracle() -> Check {
    let t = Instant::now();
    let eps = 0.1;
    let op = assemble_interior(&presets::harmonic(), eps, 6.0, 4000).map_err(|e| e.to_string())?;
    let sp = lowest_eigs(&op, 3, 1e-12).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (n, &l) in sp.eigenvalues.iter().enumerate() {
        let exact = eps * (2f64.sqrt() * (n as f64 + 0.5) - 0.5);
        worst = worst.max((l - exact).abs() / exact);
    }
    let dt = t.elapsed();
    Ok((
        worst <= HARMONIC_RTOL && dt < HARMONIC_BUDGET,
        format!("max rel err {worst:.2e} <= {HARMONIC_RTOL:e}, {dt:.2?} < {HARMONIC_BUDGET:?}"),
    ))
}

fn depth_law(r: &Reference) -> Check {
    let t = Instant::now();
    let mut pts = Vec::new();
    for eps in reslab::pipeline::default_eps_list() {
        let (_, _, sp) = r.interior(eps, 2)?;
        pts.push((eps, sp.eigenvalues[1]));
    }
    let (d, r2) = fit_depth(&pts).map_err(|e| e.to_string())?;
    let d1 = r.wells.depth(1);
    let rel = (d - d1).abs() / d1;
    let dt = t.elapsed();
    Ok((
        rel <= DEPTH_RTOL && r2 >= DEPTH_R2_MIN && dt < DEPTH_BUDGET,
        format!("fitted {d:.4} vs d1 {d1:.4} (rel {rel:.3} <= {DEPTH_RTOL}), r2 {r2:.6} >= {DEPTH_R2_MIN}, {dt:.2?}"),
    ))
}

fn main_theorem_proxy(r: &Reference) -> Check {
    let t = Instant::now();
    let mut re = Vec::new();
    let mut im = Vec::new();
    for eps in RESONANCE_EPS {
        let (lam, res) = r.mu1(eps, BETA, false)?;
        re.push((res.mu.re - lam).abs() / lam);
        im.push(res.mu.im.abs() / lam);
    }
    let dt = t.elapsed();
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let last = RESONANCE_EPS.len() - 1;
    let pass = re[last] <= RESONANCE_RATIO_MAX
        && im[last] <= RESONANCE_RATIO_MAX
        && decreasing(&re)
        && decreasing(&im)
        && dt < RESONANCE_BUDGET;
    Ok((
        pass,
        format!(
            "eps {RESONANCE_EPS:?}: |Re mu1 - l1|/l1 {}, |Im mu1|/l1 {}, {dt:.2?}",
            sci(&re),
            sci(&im)
        ),
    ))
}

fn theta_stability(r: &Reference) -> Check {
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for eps in RESONANCE_EPS {
        let (_, base) = r.mu1(eps, BETA, true)?;
        let (_, lo) = r.mu1(eps, 0.25, false)?;
        let (_, hi) = r.mu1(eps, 0.35, false)?;
        let dtheta = (hi.mu - lo.mu).norm();
        let ratio = dtheta / base.grid_drift;
        worst = worst.max(ratio);
        lines.push(format!("{eps}: {dtheta:.1e}/{:.1e}", base.grid_drift));
    }
    Ok((
        worst <= THETA_VS_GRID_MAX,
        format!(
            "|d mu| beta 0.25->0.35 over |d mu| h->h/2: max {worst:.2e} <= {THETA_VS_GRID_MAX} ({})",
            lines.join(", ")
        ),
    ))
}

fn scaling_control() -> Check {
    let spec = presets::harmonic();
    let (eps, r0, n) = (0.1, 3.0, 4000);
    let sp = lowest_eigs(&assemble_interior(&spec, eps, r0, n).map_err(|e| e.to_string())?, 3, 1e-12)
        .map_err(|e| e.to_string())?;
    let c = ScalingContour::sharp(r0, BETA);
    let op = assemble_full_scaled(&spec, eps, &c, n, 4.0 * r0, false).map_err(|e| e.to_string())?;
    let (mut im_max, mut rel_max) = (0.0f64, 0.0f64);
    for &lam in &sp.eigenvalues {
        let r = shift_invert_complex(&op, Complex64::new(lam * (1.0 + 1e-6), 0.0), 1e-12, 200)
            .map_err(|e| e.to_string())?;
        im_max = im_max.max(r.mu.im.abs());
        rel_max = rel_max.max((r.mu.re - lam).abs() / lam);
    }
    Ok((
        im_max <= CONTROL_IM_MAX && rel_max <= CONTROL_RTOL,
        format!("harmonic well, beta {BETA}: max |Im mu| {im_max:.1e}, max rel diff {rel_max:.1e}"),
    ))
}

fn non_trapping(r: &Reference) -> Check {
    let c_s = security_constant(&r.hyp);
    let mut mins = Vec::new();
    for eps in NONTRAP_EPS {
        let (r0, _, sp) = r.interior(eps, 2)?;
        mins.push(non_trapping_scan(&r.spec, eps, sp.eigenvalues[1], r0, c_s).map_err(|e| e.to_string())?);
    }
    let pass = (c_s - 1.0 / 12.0).abs() < 1e-9 && mins.iter().all(|&m| m >= c_s);
    Ok((pass, format!("c_S {c_s:.4}, min ratio at eps {NONTRAP_EPS:?}: {mins:.4?}")))
}

fn symbol_lower_bound(r: &Reference) -> Check {
    let mut c = Vec::new();
    for eps in SYMBOL_EPS {
        let (r0, _, sp) = r.interior(eps, 2)?;
        let scan = lower_bound_scan(&r.spec, eps, BETA, sp.eigenvalues[1], &ScanGrids::new(r0))
            .map_err(|e| e.to_string())?;
        c.push(scan.c_lower);
    }
    let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = c.iter().cloned().fold(0.0, f64::max);
    Ok((
        lo > C_LOWER_MIN && hi / lo < C_LOWER_SPREAD_MAX,
        format!("c_lower at eps {SYMBOL_EPS:?}: {c:.4?}, spread {:.3}", hi / lo),
    ))
}

fn agmon_decay(r: &Reference) -> Check {
    let sources: Vec<f64> = r.wells.minima.iter().map(|m| m.x).collect();
    let mut sups = Vec::new();
    for eps in DECAY_EPS {
        let (_, _, sp) = r.interior(eps, 2)?;
        let field = agmon_field(&r.spec, &sp.coords, &sources).map_err(|e| e.to_string())?;
        sups.push(decay_check(&sp.vectors[1], &field, eps));
    }
    Ok((
        sups.iter().all(|&s| s <= DECAY_SLACK),
        format!("sup(eps ln|u1| + d_Ag) at eps {DECAY_EPS:?}: {sups:.3?} <= {DECAY_SLACK}"),
    ))
}

/// Minimax path cost on a dense sample of `f`, as an independent oracle.
fn dense_barrier(f: &impl Fn(f64) -> f64, x: f64, target: f64, samples: usize) -> f64 {
    let (lo, hi) = if target < x { (target, x) } else { (x, target) };
    let top = (0..=samples)
        .map(|i| f(lo + (hi - lo) * i as f64 / samples as f64))
        .fold(f64::NEG_INFINITY, f64::max);
    top - f(x)
}

fn oracle_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let grid = Grid2D {
        nx: 5,
        ny: 5,
        x0: 0.0,
        y0: 0.0,
        hx: 1.0,
        hy: 1.0,
    };
    let mut grid_mismatch = 0;
    for _ in 0..GRID_TRIALS {
        let v: Vec<f64> = (0..25).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = (rng.gen_range(0..5), rng.gen_range(0..5));
        let targets: Vec<(usize, usize)> = (0..rng.gen_range(1..4))
            .map(|_| (rng.gen_range(0..5), rng.gen_range(0..5)))
            .collect();
        let fast = barrier_cost_grid(&grid, &v, x, &targets).map_err(|e| e.to_string())?;
        let slow = barrier_cost_bruteforce(&grid, &v, x, &targets).map_err(|e| e.to_string())?;
        if fast != slow {
            grid_mismatch += 1;
        }
    }
    // F' = (x - r1)...(x - r5): minima at r1, r3, r5
    let mut worst: f64 = 0.0;
    for _ in 0..POLY_TRIALS {
        let mut roots: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
        roots.sort_by(f64::total_cmp);
        let mut dcoef = vec![1.0];
        for &r in &roots {
            let mut next = vec![0.0; dcoef.len() + 1];
            for (k, &c) in dcoef.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= r * c;
            }
            dcoef = next;
        }
        let mut coeffs = vec![0.0];
        coeffs.extend(dcoef.iter().enumerate().map(|(k, c)| c / (k + 1) as f64));
        let horner = |x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
        let spec = PotentialSpec::from_config(PotentialConfig {
            dimension: 1,
            normalization: Default::default(),
            core: vec![CoreTerm::Polynomial {
                center: 0.0,
                coeffs: coeffs.clone(),
            }],
            tail: None,
            glue_radius: None,
            beta0: None,
        })
        .map_err(|e| e.to_string())?;
        for (x, t) in [(roots[0], roots[4]), (roots[4], roots[0]), (roots[2], roots[0])] {
            let got = barrier_cost(&spec, x, &[t], 2000).map_err(|e| e.to_string())?;
            let want = dense_barrier(&horner, x, t, 2_000_000);
            worst = worst.max((got - want).abs());
        }
    }
    Ok((
        grid_mismatch == 0 && worst <= POLY_ATOL,
        format!(
            "{grid_mismatch}/{GRID_TRIALS} grid mismatches, 1D max |diff| {worst:.1e} <= {POLY_ATOL:e} over {POLY_TRIALS} polynomials"
        ),
    ))
}

fn quasimode_bound(r: &Reference) -> Check {
    let r_in = r.spec.tail_start().ok_or("reference has no tail")?;
    let sources: Vec<f64> = r.wells.minima.iter().map(|m| m.x).collect();
    let mut lines = Vec::new();
    let mut pass = true;
    for eps in DECAY_EPS {
        let (r0, n, sp) = r.interior(eps, 2)?;
        let field = agmon_field(&r.spec, &sp.coords, &sources).map_err(|e| e.to_string())?;
        let d0 = sp
            .coords
            .iter()
            .zip(&field.dist)
            .filter(|(x, _)| x.abs() >= r_in)
            .map(|(_, d)| *d)
            .fold(f64::INFINITY, f64::min);
        let op = assemble_full_scaled(&r.spec, eps, &ScalingContour::sharp(r0, BETA), n, 4.0 * r0, false)
            .map_err(|e| e.to_string())?;
        let mut worst = f64::NEG_INFINITY;
        for i in 0..2 {
            let psi = cutoff_quasimode(&op, &sp.vectors[i], r_in).map_err(|e| e.to_string())?;
            let res = quasimode_residual(&op, &psi, Complex64::new(sp.eigenvalues[i], 0.0));
            worst = worst.max(eps * res.ln());
        }
        pass &= worst <= -(d0 - QUASIMODE_SLACK);
        lines.push(format!("eps {eps}: {worst:.3} <= {:.3}", -(d0 - QUASIMODE_SLACK)));
    }
    Ok((pass, format!("eps ln(residual) vs -(d'0 - {QUASIMODE_SLACK}): {}", lines.join(", "))))
}

fn main() -> ExitCode {
    let reference = Reference::new();
    let r = &reference;
    type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("harmonic oracle", Box::new(harmonic_oracle)),
        ("depth law", Box::new(|| depth_law(r))),
        ("resonance vs eigenvalue", Box::new(|| main_theorem_proxy(r))),
        ("angle stability", Box::new(|| theta_stability(r))),
        ("scaling invariance control", Box::new(scaling_control)),
        ("non-trapping", Box::new(|| non_trapping(r))),
        ("symbol lower bound", Box::new(|| symbol_lower_bound(r))),
        ("Agmon decay", Box::new(|| agmon_decay(r))),
        ("oracle equivalence", Box::new(oracle_equivalence)),
        ("quasimode bound", Box::new(|| quasimode_bound(r))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (pass, detail) = match check() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("{tag} [{}] {name}: {detail} ({:.2?})", i + 1, t.elapsed());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
