//! Principal symbols of the scaled operator and grid scans of the
//! inequalities they are expected to satisfy: a lower bound against a small
//! circle around `λ`, the non-trapping condition in the exterior, and the
//! first and second order Taylor remainders of the rotated potential.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{eval_potential, eval_v_rotated_side, HypothesisReport, PotentialSpec};

type C = Complex64;

/// One evaluation of the scaled symbol.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct SymbolPoint {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub h1: Complex64,
    /// `max(V_1(x), eps^2 |ξ|^2)`.
    pub m: f64,
}

/// Sampling parameters of [`lower_bound_scan`].
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ScanGrids {
    pub r0: f64,
    /// Spatial samples (split between the ball and the two exterior sides).
    pub n_x: usize,
    /// Frequency samples, half on `eps|ξ| <= 10 sqrt(λ)`, half on the O(1) band.
    pub n_xi: usize,
    pub n_omega: usize,
    /// Radius of the circle `z = λ (1 + c_z e^{iω})`.
    pub c_z: f64,
    /// Upper end of the O(1) band of `eps|ξ|`.
    pub xi_band: f64,
    /// Directions of `ξ` relative to `x` in 3D (angles spread over `[0, π/2]`).
    pub n_directions: usize,
}

impl ScanGrids {
    pub fn new(r0: f64) -> Self {
        ScanGrids {
            r0,
            n_x: 1500,
            n_xi: 300,
            n_omega: 16,
            c_z: 0.2,
            xi_band: 3.0,
            n_directions: 3,
        }
    }
}

/// Location of the smallest ratio found by [`lower_bound_scan`].
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ScanArgmin {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub omega: f64,
    pub h1: Complex64,
    pub z: Complex64,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct LowerBoundScan {
    pub c_lower: f64,
    pub argmin: ScanArgmin,
    pub evaluations: usize,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct SymbolScanReport {
    pub eps: f64,
    pub beta: f64,
    pub lambda: f64,
    pub c_lower: f64,
    pub argmin: ScanArgmin,
    pub nontrap_min: f64,
    pub c_s_used: f64,
    pub taylor_err1: f64,
    pub taylor_err2: f64,
    pub beta_list: Vec<f64>,
    pub grids: ScanGrids,
}

impl SymbolScanReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serialisable")
    }
}

/// Symbol of the radial second derivative,
/// `(n-1)(n-3)/(4r^2) + i (n-1)/r^2 x·ξ - (x·ξ)^2/r^2`.
pub fn symbol_d2(x: &[f64], xi: &[f64], n: usize) -> Complex64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let xd: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
    let nf = n as f64;
    C::new((nf - 1.0) * (nf - 3.0) / (4.0 * r2) - xd * xd / r2, (nf - 1.0) * xd / r2)
}

/// `1` on the ball `r <= r0`, `0` beyond `r0 + 1`, quintic in between.
fn blend(r: f64, r0: f64) -> f64 {
    crate::spectral::cutoff(r, r0, r0 + 1.0)
}

/// The parts of `h1` that depend on `x` only.
struct SpatialPart {
    r: f64,
    chi: f64,
    /// `r^2 / r_θ^2`.
    stretch: C,
    v1: C,
    v1_real: f64,
}

fn spatial_part(spec: &PotentialSpec, x: &[f64], eps: f64, beta: f64, r0: f64) -> Result<SpatialPart> {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let signed = if spec.dimension == 1 { x[0] } else { r };
    let side = if signed < 0.0 { -1.0 } else { 1.0 };
    let v_here = eval_potential(spec, signed, eps).v_eps;
    if r <= r0 {
        let v1 = v_here.max(eps);
        return Ok(SpatialPart {
            r,
            chi: 1.0,
            stretch: C::new(1.0, 0.0),
            v1: C::new(v1, 0.0),
            v1_real: v1,
        });
    }
    let r_theta = r0 + (r - r0) * C::from_polar(1.0, beta);
    Ok(SpatialPart {
        r,
        chi: blend(r, r0),
        stretch: C::new(r * r, 0.0) / (r_theta * r_theta),
        v1: eval_v_rotated_side(spec, r, side, beta, r0, eps)?,
        v1_real: v_here.max(0.0),
    })
}

fn assemble_h1(part: &SpatialPart, x: &[f64], xi: &[f64], eps: f64, beta: f64, n: usize) -> (C, f64) {
    let xi2: f64 = xi.iter().map(|v| v * v).sum();
    let e2 = eps * eps;
    let rot = C::from_polar(1.0, -2.0 * beta);
    let mut h = e2 * xi2 * (part.chi + rot * (1.0 - part.chi)) + part.v1;
    if part.chi < 1.0 && n > 1 && part.r > 0.0 {
        h += e2 * (1.0 - part.chi) * (part.stretch - rot) * (xi2 + symbol_d2(x, xi, n));
    }
    (h, part.v1_real.max(e2 * xi2))
}

fn check_cone(spec: &PotentialSpec, beta: f64) -> Result<()> {
    if beta.abs() > spec.beta0 + 1e-15 {
        return Err(Error::ConeViolation {
            beta,
            beta0: spec.beta0,
        });
    }
    Ok(())
}

/// Scaled symbol
/// `h1 = eps^2|ξ|^2 (χ + e^{-2iβ}(1-χ)) + eps^2 (1-χ)(r^2/r_θ^2 - e^{-2iβ})(|ξ|^2 + σ(D^2)) + V_1(x_θ)`
/// with `χ` the blend from `r0` to `r0 + 1`, `V_1 = max(V_eps, eps)` on the
/// ball and `V_eps(r_θ)` outside.
pub fn symbol_h1(spec: &PotentialSpec, x: &[f64], xi: &[f64], eps: f64, beta: f64, r0: f64) -> Result<SymbolPoint> {
    check_cone(spec, beta)?;
    let n = spec.dimension as usize;
    if x.len() != n || xi.len() != n {
        return Err(Error::InvalidArgument(format!("x and xi need {n} components")));
    }
    let part = spatial_part(spec, x, eps, beta, r0)?;
    let (h1, m) = assemble_h1(&part, x, xi, eps, beta, n);
    Ok(SymbolPoint {
        x: x.to_vec(),
        xi: xi.to_vec(),
        h1,
        m,
    })
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect()
}

/// Radius beyond `r0` where `V` has fallen to `level`, by doubling; capped.
fn radius_below(spec: &PotentialSpec, r0: f64, level: f64) -> f64 {
    let mut r = r0.max(1e-3);
    for _ in 0..200 {
        if eval_potential(spec, r, 0.0).v <= level || r > 1e300 {
            break;
        }
        let next = 2.0 * r;
        if eval_potential(spec, next, 0.0).v > eval_potential(spec, r, 0.0).v {
            // confining: no decay to reach
            return (1e3 * r0).max(r);
        }
        r = next;
    }
    r
}

fn spatial_samples(spec: &PotentialSpec, grids: &ScanGrids, lambda: f64) -> Vec<Vec<f64>> {
    let r0 = grids.r0;
    let r_far = radius_below(spec, r0, lambda / 10.0).max(2.0 * r0);
    let third = grids.n_x / 3;
    let outer = logspace(r0 * (1.0 + 1e-9), r_far, grids.n_x - 2 * third);
    if spec.dimension == 1 {
        let mut xs: Vec<Vec<f64>> = linspace(-r0, r0, 2 * third).into_iter().map(|v| vec![v]).collect();
        for &r in &outer {
            xs.push(vec![r]);
            xs.push(vec![-r]);
        }
        xs
    } else {
        let inner = linspace(r0 / (2 * third) as f64, r0, 2 * third);
        inner.into_iter().chain(outer).map(|r| vec![r, 0.0, 0.0]).collect()
    }
}

fn frequency_samples(spec: &PotentialSpec, grids: &ScanGrids, eps: f64, lambda: f64) -> Vec<Vec<f64>> {
    let half = grids.n_xi / 2;
    let mut mags = linspace(0.0, 10.0 * lambda.sqrt(), half);
    mags.extend(linspace(0.0, grids.xi_band, grids.n_xi - half));
    let mags: Vec<f64> = mags.into_iter().map(|m| m / eps).collect();
    if spec.dimension == 1 {
        mags.into_iter().map(|k| vec![k]).collect()
    } else {
        let angles = linspace(0.0, std::f64::consts::FRAC_PI_2, grids.n_directions.max(1));
        let mut out = Vec::with_capacity(mags.len() * angles.len());
        for &k in &mags {
            for &a in &angles {
                out.push(vec![k * a.cos(), k * a.sin(), 0.0]);
            }
        }
        out
    }
}

/// One lattice sample of the lower-bound scan (minimised over `ω`).
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct LatticeRow {
    pub r: f64,
    pub xi: f64,
    pub ratio: f64,
}

fn scan(
    spec: &PotentialSpec,
    eps: f64,
    beta: f64,
    lambda: f64,
    grids: &ScanGrids,
    keep_lattice: bool,
) -> Result<(LowerBoundScan, Vec<LatticeRow>)> {
    check_cone(spec, beta)?;
    if grids.n_x < 3 || grids.n_xi == 0 || grids.n_omega == 0 {
        return Err(Error::EmptyGrid);
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument("lambda must be positive".into()));
    }
    let n = spec.dimension as usize;
    let xs = spatial_samples(spec, grids, lambda);
    let xis = frequency_samples(spec, grids, eps, lambda);
    let omegas: Vec<f64> = (0..grids.n_omega)
        .map(|k| 2.0 * std::f64::consts::PI * k as f64 / grids.n_omega as f64)
        .collect();
    let zs: Vec<C> = omegas
        .iter()
        .map(|&w| lambda * (1.0 + grids.c_z * C::from_polar(1.0, w)))
        .collect();

    type Best = (f64, usize, usize, usize, C);
    let per_x: Vec<Result<(Best, Vec<LatticeRow>)>> = xs
        .par_iter()
        .enumerate()
        .map(|(ix, x)| {
            let part = spatial_part(spec, x, eps, beta, grids.r0)?;
            let mut best: Best = (f64::INFINITY, ix, 0, 0, C::new(0.0, 0.0));
            let mut rows = Vec::new();
            for (ik, xi) in xis.iter().enumerate() {
                let (h1, m) = assemble_h1(&part, x, xi, eps, beta, n);
                let denom = m.max(lambda);
                let mut local = f64::INFINITY;
                for (iw, z) in zs.iter().enumerate() {
                    let ratio = (h1 - z).norm() / denom;
                    if ratio < best.0 {
                        best = (ratio, ix, ik, iw, h1);
                    }
                    local = local.min(ratio);
                }
                if keep_lattice {
                    let xi_norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
                    rows.push(LatticeRow {
                        r: if n == 1 { x[0] } else { part.r },
                        xi: xi_norm,
                        ratio: local,
                    });
                }
            }
            Ok((best, rows))
        })
        .collect();
    let mut best: Option<Best> = None;
    let mut lattice = Vec::new();
    for item in per_x {
        let (b, rows) = item?;
        if best.is_none_or(|cur| b.0 < cur.0) {
            best = Some(b);
        }
        lattice.extend(rows);
    }
    let (c_lower, ix, ik, iw, h1) = best.ok_or(Error::EmptyGrid)?;
    Ok((
        LowerBoundScan {
            c_lower,
            argmin: ScanArgmin {
                x: xs[ix].clone(),
                xi: xis[ik].clone(),
                omega: omegas[iw],
                h1,
                z: zs[iw],
            },
            evaluations: xs.len() * xis.len() * zs.len(),
        },
        lattice,
    ))
}

/// `min |h1 - z| / max(M, λ)` over the lattice and `z = λ(1 + c_z e^{iω})`.
pub fn lower_bound_scan(spec: &PotentialSpec, eps: f64, beta: f64, lambda: f64, grids: &ScanGrids) -> Result<LowerBoundScan> {
    scan(spec, eps, beta, lambda, grids, false).map(|(s, _)| s)
}

/// Full lattice of the lower-bound scan, for plotting.
pub fn lower_bound_lattice(spec: &PotentialSpec, eps: f64, beta: f64, lambda: f64, grids: &ScanGrids) -> Result<Vec<LatticeRow>> {
    scan(spec, eps, beta, lambda, grids, true).map(|(_, rows)| rows)
}

pub fn write_lattice_csv<W: Write>(rows: &[LatticeRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

/// `c_S = c_V / (12 C_V)`.
pub fn security_constant(report: &HypothesisReport) -> f64 {
    report.c_v / (12.0 * report.c_v_upper)
}

/// `min |(r - r0) V'(r) + 2(V(r) - λ)| / λ` over 10^4 log-spaced radii in
/// `{V <= (1 + c_S) λ}`, which starts at the radius `r_λ > r0` where `V`
/// crosses `(1 + c_S) λ`. Both half-lines are scanned in 1D.
pub fn non_trapping_scan(spec: &PotentialSpec, eps: f64, lambda: f64, r0: f64, c_s: f64) -> Result<f64> {
    let _ = eps;
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument("lambda must be positive".into()));
    }
    let level = (1.0 + c_s) * lambda;
    let sides: &[f64] = if spec.dimension == 1 { &[1.0, -1.0] } else { &[1.0] };
    let mut best = f64::INFINITY;
    for &side in sides {
        let v = |r: f64| eval_potential(spec, side * r, 0.0);
        if v(r0).v <= level {
            return Err(Error::RegionEmpty);
        }
        // bracket the crossing, then bisect
        let mut hi = 2.0 * r0;
        while v(hi).v > level {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::RegionEmpty);
            }
        }
        let mut lo = r0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if v(mid).v > level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        for r in logspace(hi, 1e3 * hi, 10_000) {
            let p = v(r);
            let dv = side * p.dv;
            let ratio = ((r - r0) * dv + 2.0 * (p.v - lambda)).abs() / lambda;
            best = best.min(ratio);
        }
    }
    Ok(best)
}

/// First and second order Taylor remainders of `V(r_θ)` around `V(r)`:
/// `err1 = max |V(r_θ) - V(r)| / (β V(r))` over `r0 < r <= 1e4 r0`, and
/// `err2 = max |V(r_θ) - V(r) - iβ(r - r0)V'(r)| / (β |β(r - r0)V'(r)|)`
/// over `{V <= 2λ}`. Maxima over all `β` in `beta_list`.
pub fn taylor_remainder_scan(spec: &PotentialSpec, beta_list: &[f64], r0: f64, lambda: f64) -> Result<(f64, f64)> {
    let first = logspace(r0 * (1.0 + 1e-6), 1e4 * r0, 4000);
    let start = radius_below(spec, r0, 2.0 * lambda).max(r0 * (1.0 + 1e-6));
    let second = logspace(start, 1e3 * start, 4000);
    let mut err1: f64 = 0.0;
    let mut err2: f64 = 0.0;
    for &beta in beta_list {
        check_cone(spec, beta)?;
        if beta == 0.0 {
            continue;
        }
        for &r in &first {
            let v = eval_potential(spec, r, 0.0).v;
            let vt = eval_v_rotated_side(spec, r, 1.0, beta, r0, 0.0)?;
            err1 = err1.max((vt - v).norm() / (beta.abs() * v));
        }
        for &r in &second {
            let p = eval_potential(spec, r, 0.0);
            if p.v > 2.0 * lambda {
                continue;
            }
            let lin = beta * (r - r0) * p.dv;
            if lin == 0.0 {
                continue;
            }
            let vt = eval_v_rotated_side(spec, r, 1.0, beta, r0, 0.0)?;
            let rem = vt - p.v - C::new(0.0, lin);
            err2 = err2.max(rem.norm() / (beta.abs() * lin.abs()));
        }
    }
    Ok((err1, err2))
}

/// All three scans at one `eps`.
pub fn symbol_report(
    spec: &PotentialSpec,
    hypotheses: &HypothesisReport,
    eps: f64,
    beta: f64,
    lambda: f64,
    grids: &ScanGrids,
    beta_list: &[f64],
) -> Result<SymbolScanReport> {
    let lb = lower_bound_scan(spec, eps, beta, lambda, grids)?;
    let c_s = security_constant(hypotheses);
    let nontrap_min = non_trapping_scan(spec, eps, lambda, grids.r0, c_s)?;
    let (taylor_err1, taylor_err2) = taylor_remainder_scan(spec, beta_list, grids.r0, lambda)?;
    Ok(SymbolScanReport {
        eps,
        beta,
        lambda,
        c_lower: lb.c_lower,
        argmin: lb.argmin,
        nontrap_min,
        c_s_used: c_s,
        taylor_err1,
        taylor_err2,
        beta_list: beta_list.to_vec(),
        grids: grids.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{build_potential, presets};

    fn inverse_r() -> PotentialSpec {
        // Half weight, F = 2 sqrt(2) |x|^{1/2} beyond the glue: V = 1/r exactly there
        build_potential(
            "glue_radius = 1.0\n[[core]]\nkind='polynomial'\ncoeffs=[0,0,1]\n[tail]\na=0.5\ncoeff=2.8284271247461903\n",
        )
        .unwrap()
    }

    #[test]
    fn d2_examples() {
        assert_eq!(symbol_d2(&[2.0], &[3.0], 1), C::new(-9.0, 0.0));
        let v = symbol_d2(&[2.0, 0.0, 0.0], &[1.0, 1.0, 0.0], 3);
        assert!((v - C::new(-1.0, 1.0)).norm() < 1e-15);
        assert_eq!(symbol_d2(&[2.0, 0.0, 0.0], &[0.0, 1.0, 0.0], 3), C::new(0.0, 0.0));
    }

    #[test]
    fn h1_on_the_ball() {
        let s = presets::reference();
        let p = symbol_h1(&s, &[0.3], &[2.0], 0.1, 0.0, 4.9).unwrap();
        let v1 = eval_potential(&s, 0.3, 0.1).v_eps.max(0.1);
        assert_eq!(p.h1.im, 0.0);
        assert!((p.h1.re - (0.04 + v1)).abs() < 1e-15);
        let q = symbol_h1(&s, &[0.3], &[0.0], 0.1, 0.3, 4.9).unwrap();
        assert!(q.h1.re >= 0.1);
        assert!(matches!(symbol_h1(&s, &[0.3], &[0.0], 0.1, 0.9, 4.9), Err(Error::ConeViolation { .. })));
    }

    #[test]
    fn h1_far_out_uses_rotated_potential() {
        let s = inverse_r();
        let p = symbol_h1(&s, &[400.0], &[0.0], 0.1, 0.3, 10.0).unwrap();
        let v = crate::potential::eval_v_rotated(&s, 400.0, 0.3, 10.0, 0.1).unwrap();
        assert_eq!(p.h1, v);
    }

    #[test]
    fn real_symbol_against_complex_circle() {
        // at β = 0 the symbol is real, so |h1 - λ(1 + i/2)| >= λ/2
        let s = presets::reference();
        let lambda = 1e-9;
        let z = lambda * C::new(1.0, 0.5);
        let g = ScanGrids::new(4.9);
        for x in spatial_samples(&s, &g, lambda).iter().step_by(7) {
            for k in [0.0, 1e-4, 0.3, 10.0] {
                let p = symbol_h1(&s, x, &[k], 0.1, 0.0, 4.9).unwrap();
                assert!(p.h1.im.abs() <= 1e-14 * p.h1.norm());
                assert!((p.h1 - z).norm() >= 0.5 * lambda * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn empty_grid_and_cone() {
        let s = presets::reference();
        let mut g = ScanGrids::new(4.9);
        g.n_xi = 0;
        assert_eq!(lower_bound_scan(&s, 0.1, 0.3, 1e-9, &g), Err(Error::EmptyGrid));
        let g = ScanGrids::new(4.9);
        assert!(matches!(lower_bound_scan(&s, 0.1, 0.7, 1e-9, &g), Err(Error::ConeViolation { .. })));
    }

    #[test]
    fn inverse_r_non_trapping() {
        let s = inverse_r();
        let r0 = 10.0;
        let lambda = 1e-3;
        let ratio = non_trapping_scan(&s, 0.1, lambda, r0, 1.0 / 12.0).unwrap();
        // the closed form V(1 + r0/r) - 2λ on the region gives at least 1 - c_S - 2 r0 V/r
        assert!(ratio >= 1.0 / 12.0, "{ratio}");
        let v_r0 = eval_potential(&s, r0, 0.0).v;
        assert_eq!(non_trapping_scan(&s, 0.1, 10.0 * v_r0, r0, 1.0 / 12.0), Err(Error::RegionEmpty));
    }

    #[test]
    fn inverse_r_taylor_remainders() {
        let s = inverse_r();
        let (e1, e2) = taylor_remainder_scan(&s, &[0.3], 10.0, 1e-3).unwrap();
        assert!(e1 < 3.0 && e1 > 0.5, "{e1}");
        assert!(e2.is_finite() && e2 > 0.0);
        let (a, _) = taylor_remainder_scan(&s, &[0.1], 10.0, 1e-3).unwrap();
        let (b, _) = taylor_remainder_scan(&s, &[0.2], 10.0, 1e-3).unwrap();
        assert!((0.4..=1.1).contains(&(a / b)), "{}", a / b);
    }
}
