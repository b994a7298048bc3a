//! Eigensolvers for the discretised operators and the eigenfunction
//! diagnostics built on them.
//!
//! Real interior spectra come from Sturm bisection followed by block inverse
//! iteration and a Rayleigh-Ritz step through the energy form, so that
//! exponentially small eigenvalues keep their relative accuracy. Complex
//! eigenvalues of scaled operators come from shift-invert iteration and a
//! joint Rayleigh-Ritz step with the bilinear (unconjugated) form.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{assemble_full_scaled, embed_interior, DiscretizedOperator, ScalingContour};
use crate::potential::PotentialSpec;
use crate::wells::AgmonField;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

/// Inverse-iteration sweeps after convergence in the joint resonance solve.
const POLISH: usize = 3;

/// Low-lying eigenpairs of a real operator. Vectors are normalised in the
/// `h`-weighted norm `h * sum u_k^2 = 1`.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub coords: Vec<f64>,
    pub h: f64,
}

impl SpectrumResult {
    /// Eigenvalues and residuals only.
    pub fn summary_json(&self) -> String {
        serde_json::json!({
            "eigenvalues": self.eigenvalues,
            "residuals": self.residuals,
            "n": self.coords.len(),
            "h": self.h,
        })
        .to_string()
    }
}

/// One resonance found from one Dirichlet seed.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ResonanceResult {
    pub seed: f64,
    pub mu: Complex64,
    /// Largest `|Δμ|` when the angle moves by `± beta_step`.
    pub theta_drift: f64,
    /// `|Δμ|` when the grid spacing is halved.
    pub grid_drift: f64,
    pub iterations: usize,
}

/// Settings for [`find_resonances`].
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ResonanceParams {
    /// Interior node count (spacing `2 r0 / (n + 1)` on the line).
    pub n: usize,
    /// Outer wall; `4 r0` when absent.
    pub r_max: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub beta_step: f64,
    /// Compute `theta_drift` and `grid_drift` (three extra solves).
    pub drifts: bool,
    pub check_truncation: bool,
}

impl Default for ResonanceParams {
    fn default() -> Self {
        ResonanceParams {
            n: 4000,
            r_max: None,
            tol: 1e-10,
            max_iter: 500,
            beta_step: 0.05,
            drifts: true,
            check_truncation: false,
        }
    }
}

// ---------------------------------------------------------------------------
// Sturm sequences

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`
/// (negative pivots of `LDL^T` of `T - x`).
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let pivmin = f64::MIN_POSITIVE / f64::EPSILON;
    let mut count = 0;
    let mut d = 1.0;
    for k in 0..diag.len() {
        let coupling = if k == 0 { 0.0 } else { off[k - 1] * off[k - 1] / d };
        d = diag[k] - x - coupling;
        if d.abs() < pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval containing the spectrum.
pub fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..n {
        let mut r = 0.0;
        if k > 0 {
            r += off[k - 1].abs();
        }
        if k + 1 < n {
            r += off[k].abs();
        }
        lo = lo.min(diag[k] - r);
        hi = hi.max(diag[k] + r);
    }
    (lo, hi)
}

/// Bisection for eigenvalue `index` (0-based) down to `max(rtol |λ|, floor)`.
pub fn bisect_eigenvalue(diag: &[f64], off: &[f64], index: usize, rtol: f64, floor: f64) -> f64 {
    let (mut a, mut b) = gershgorin(diag, off);
    for _ in 0..2000 {
        if b - a <= (rtol * a.abs().max(b.abs())).max(floor) {
            break;
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if sturm_count(diag, off, m) > index {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

// ---------------------------------------------------------------------------
// tridiagonal LU with partial pivoting

/// LU factors of `T - shift` for a (complex) symmetric tridiagonal `T`.
pub struct TridiagLu {
    dl: Vec<C>,
    d: Vec<C>,
    du: Vec<C>,
    du2: Vec<C>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    pub fn factor(diag: &[C], off: &[C], shift: C) -> Result<Self> {
        let n = diag.len();
        let mut d: Vec<C> = diag.iter().map(|z| z - shift).collect();
        let mut dl = off.to_vec();
        let mut du = off.to_vec();
        let mut du2 = vec![ZERO; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].norm() >= dl[i].norm() {
                if d[i].norm() < f64::MIN_POSITIVE {
                    return Err(Error::SingularShift);
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if n == 0 || d[n - 1].norm() < f64::MIN_POSITIVE {
            return Err(Error::SingularShift);
        }
        Ok(TridiagLu { dl, d, du, du2, swapped })
    }

    pub fn solve(&self, b: &mut [C]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

// ---------------------------------------------------------------------------
// small dense helpers

fn start_vector(n: usize, seed: usize) -> Vec<C> {
    // deterministic, smooth plus a little roughness, never orthogonal to a low mode in practice
    (0..n)
        .map(|k| {
            let t = (k as f64 + 0.5) / n as f64;
            let jitter = ((k * 7919 + seed * 104_729) as f64 * 0.618_033_988_749_895).fract() - 0.5;
            C::new(1.0 + 0.1 * jitter + 0.3 * ((seed + 1) as f64 * std::f64::consts::PI * t).sin(), 0.0)
        })
        .collect()
}

fn hnorm(u: &[C]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn scale_in_place(u: &mut [C], s: C) {
    for z in u.iter_mut() {
        *z *= s;
    }
}

/// Modified Gram-Schmidt (Hermitian, twice). Returns false when `u` is
/// numerically inside the span of `basis`.
fn orthonormalize(u: &mut [C], basis: &[Vec<C>]) -> bool {
    let before = hnorm(u);
    if before == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for q in basis {
            let p: C = q.iter().zip(u.iter()).map(|(a, b)| a.conj() * b).sum();
            for (z, a) in u.iter_mut().zip(q) {
                *z -= p * a;
            }
        }
    }
    let after = hnorm(u);
    if after <= 1e-8 * before {
        return false;
    }
    scale_in_place(u, C::new(1.0 / after, 0.0));
    true
}

fn dense_complex_eigen(m: &DMatrix<C>) -> Result<Vec<C>> {
    let n = m.nrows();
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let schur = nalgebra::Schur::try_new(m.clone(), 1e-15, 10_000).ok_or(Error::NoConvergence(10_000))?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Eigenvalues of the pencil `(A, G)` for complex symmetric `A`, `G`.
fn pencil_eigenvalues(a: &DMatrix<C>, g: &DMatrix<C>) -> Result<Vec<C>> {
    let lu = g.clone().lu();
    let m = lu
        .solve(a)
        .ok_or_else(|| Error::InvalidArgument("singular Gram matrix in Rayleigh-Ritz".into()))?;
    dense_complex_eigen(&m)
}

// ---------------------------------------------------------------------------
// real spectra

/// The `k` lowest eigenpairs of a real symmetric operator.
pub fn lowest_eigs(op: &DiscretizedOperator, k: usize, tol: f64) -> Result<SpectrumResult> {
    if !op.is_real() {
        return Err(Error::InvalidArgument("lowest_eigs needs a real operator".into()));
    }
    let n = op.n();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} must lie in 1..={n}")));
    }
    let d = op.real_diag();
    let e = op.real_offdiag();
    let scale = op.norm_scale();
    let floor = 4.0 * f64::EPSILON * scale;
    let cluster_gap = 1e-9 * scale;

    // Sturm estimates, extended over a cluster straddling index k - 1
    let mut theta: Vec<f64> = (0..k).map(|i| bisect_eigenvalue(&d, &e, i, tol, floor)).collect();
    while theta.len() < n {
        let next = bisect_eigenvalue(&d, &e, theta.len(), tol, floor);
        let close = next - theta[theta.len() - 1] <= cluster_gap;
        theta.push(next);
        if !close {
            break;
        }
    }
    let m = theta.len();

    // blocks of numerically coincident estimates share one shift
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=m {
        if i == m || theta[i] - theta[i - 1] > cluster_gap {
            blocks.push((start, i));
            start = i;
        }
    }

    let diag_c: Vec<C> = d.iter().map(|&x| C::new(x, 0.0)).collect();
    let off_c: Vec<C> = e.iter().map(|&x| C::new(x, 0.0)).collect();
    let mut basis: Vec<Vec<C>> = Vec::with_capacity(m);
    for &(a, b) in &blocks {
        let mean = theta[a..b].iter().sum::<f64>() / (b - a) as f64;
        let lu = factor_near(&diag_c, &off_c, C::new(mean, 0.0), floor)?;
        let mut block: Vec<Vec<C>> = (a..b).map(|j| start_vector(n, j)).collect();
        for _ in 0..4 {
            let mut fresh: Vec<Vec<C>> = Vec::with_capacity(block.len());
            for (j, mut v) in block.into_iter().enumerate() {
                lu.solve(&mut v);
                let known: Vec<Vec<C>> = basis.iter().chain(fresh.iter()).cloned().collect();
                if !orthonormalize(&mut v, &known) {
                    v = start_vector(n, 1000 + a + j);
                    lu.solve(&mut v);
                    if !orthonormalize(&mut v, &known) {
                        return Err(Error::ClusterUnresolved { index: a + j });
                    }
                }
                fresh.push(v);
            }
            block = fresh;
        }
        basis.extend(block);
    }

    // Rayleigh-Ritz through the energy form
    let real_basis: Vec<Vec<f64>> = basis.iter().map(|v| v.iter().map(|z| z.re).collect()).collect();
    let mut a = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = op.energy_real(&real_basis[i], &real_basis[j]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if m > k {
        let gap = values[k] - values[k - 1];
        if gap <= tol * values[k].abs() + f64::EPSILON * f64::EPSILON * scale {
            return Err(Error::ClusterUnresolved { index: k - 1 });
        }
    }

    let h = op.grid.h;
    let mut vectors = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for (slot, &i) in order.iter().take(k).enumerate() {
        let mut y = vec![0.0; n];
        for (j, v) in real_basis.iter().enumerate() {
            let c = eig.eigenvectors[(j, i)];
            for (acc, x) in y.iter_mut().zip(v) {
                *acc += c * x;
            }
        }
        let norm = (h * y.iter().map(|x| x * x).sum::<f64>()).sqrt();
        let s: f64 = y.iter().sum();
        let sign = if s.abs() > 1e-8 * norm {
            s.signum()
        } else {
            let big = y.iter().cloned().fold(0.0_f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            big.signum()
        };
        for x in y.iter_mut() {
            *x *= sign / norm;
        }
        let hy = op.apply_real(&y);
        let lam = values[slot];
        let res = (h * hy.iter().zip(&y).map(|(a, b)| (a - lam * b).powi(2)).sum::<f64>()).sqrt();
        residuals.push(res);
        vectors.push(y);
    }
    Ok(SpectrumResult {
        eigenvalues: values[..k].to_vec(),
        vectors,
        residuals,
        coords: op.grid.nodes(),
        h,
    })
}

fn factor_near(diag: &[C], off: &[C], shift: C, nudge: f64) -> Result<TridiagLu> {
    match TridiagLu::factor(diag, off, shift) {
        Err(Error::SingularShift) => TridiagLu::factor(diag, off, shift + C::new(10.0 * nudge, 0.0)),
        other => other,
    }
}

// ---------------------------------------------------------------------------
// complex spectra

/// Outcome of [`shift_invert_complex`].
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftInvertResult {
    pub mu: Complex64,
    /// Euclidean-normalised eigenvector.
    pub vector: Vec<Complex64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Inverse iteration at `shift`, switching to Rayleigh-quotient shifts once
/// the relative residual drops below 1e-3. Converged when
/// `|Hu - μu| <= tol (|μ| + scale)` with `scale` the largest row sum.
pub fn shift_invert_complex(op: &DiscretizedOperator, shift: C, tol: f64, max_iter: usize) -> Result<ShiftInvertResult> {
    shift_invert_from(op, shift, tol, max_iter, 0)
}

fn shift_invert_from(
    op: &DiscretizedOperator,
    shift: C,
    tol: f64,
    max_iter: usize,
    polish: usize,
) -> Result<ShiftInvertResult> {
    let n = op.n();
    let scale = op.norm_scale();
    let mut sigma = shift;
    let mut lu = match TridiagLu::factor(&op.diag, &op.offdiag, sigma) {
        Ok(lu) => lu,
        Err(Error::SingularShift) => {
            sigma = shift * C::new(1.0, 1e-8);
            if sigma == shift {
                sigma = shift + C::new(0.0, 1e-8 * scale.max(1.0) * f64::EPSILON);
            }
            TridiagLu::factor(&op.diag, &op.offdiag, sigma)?
        }
        Err(e) => return Err(e),
    };
    let mut u = start_vector(n, 0);
    let nu = hnorm(&u);
    scale_in_place(&mut u, C::new(1.0 / nu, 0.0));
    for it in 1..=max_iter {
        lu.solve(&mut u);
        let nu = hnorm(&u);
        if !nu.is_finite() || nu == 0.0 {
            return Err(Error::SingularShift);
        }
        scale_in_place(&mut u, C::new(1.0 / nu, 0.0));
        let hu = op.apply(&u);
        let uu: C = u.iter().map(|z| z * z).sum();
        let mu = if uu.norm() > 1e-8 {
            u.iter().zip(&hu).map(|(a, b)| a * b).sum::<C>() / uu
        } else {
            u.iter().zip(&hu).map(|(a, b)| a.conj() * b).sum::<C>()
        };
        let res = hu.iter().zip(&u).map(|(a, b)| (a - mu * b).norm_sqr()).sum::<f64>().sqrt();
        let level = mu.norm() + scale;
        if res <= tol * level {
            // extra sweeps remove far components the residual test cannot see
            for _ in 0..polish {
                lu.solve(&mut u);
                let nu = hnorm(&u);
                scale_in_place(&mut u, C::new(1.0 / nu, 0.0));
            }
            return Ok(ShiftInvertResult {
                mu,
                vector: u,
                iterations: it,
                residual: res,
            });
        }
        if res < 1e-3 * level && (mu - sigma).norm() > 1e-8 * level {
            match TridiagLu::factor(&op.diag, &op.offdiag, mu) {
                Ok(f) => {
                    lu = f;
                    sigma = mu;
                }
                Err(Error::SingularShift) => {
                    return Ok(ShiftInvertResult {
                        mu,
                        vector: u,
                        iterations: it,
                        residual: res,
                    })
                }
                Err(e) => return Err(e),
            }
        }
    }
    Err(Error::NoConvergence(max_iter))
}

/// Block inverse iteration at one shift for a group of coincident seeds.
fn block_shift_invert(op: &DiscretizedOperator, shift: C, count: usize, tol: f64, max_iter: usize) -> Result<(Vec<Vec<C>>, usize)> {
    let n = op.n();
    let scale = op.norm_scale();
    let lu = match TridiagLu::factor(&op.diag, &op.offdiag, shift) {
        Err(Error::SingularShift) => TridiagLu::factor(&op.diag, &op.offdiag, shift * C::new(1.0, 1e-8))?,
        other => other?,
    };
    let mut block: Vec<Vec<C>> = (0..count).map(|j| start_vector(n, j)).collect();
    for it in 1..=max_iter {
        let mut fresh: Vec<Vec<C>> = Vec::with_capacity(count);
        for (j, mut v) in block.into_iter().enumerate() {
            lu.solve(&mut v);
            if !orthonormalize(&mut v, &fresh) {
                v = start_vector(n, 1000 + j + it);
                lu.solve(&mut v);
                if !orthonormalize(&mut v, &fresh) {
                    return Err(Error::NoConvergence(it));
                }
            }
            fresh.push(v);
        }
        block = fresh;
        // subspace residual: |H Q - Q (Q^H H Q)|
        let hq: Vec<Vec<C>> = block.iter().map(|q| op.apply(q)).collect();
        let mut worst: f64 = 0.0;
        for hqj in hq.iter().take(count) {
            let mut r = hqj.clone();
            for qi in &block {
                let p: C = qi.iter().zip(hqj).map(|(a, b)| a.conj() * b).sum();
                for (z, a) in r.iter_mut().zip(qi) {
                    *z -= p * a;
                }
            }
            worst = worst.max(hnorm(&r));
        }
        if worst <= tol * (shift.norm() + scale) {
            for _ in 0..POLISH {
                let mut fresh: Vec<Vec<C>> = Vec::with_capacity(count);
                for mut v in block {
                    lu.solve(&mut v);
                    if !orthonormalize(&mut v, &fresh) {
                        return Err(Error::NoConvergence(it));
                    }
                    fresh.push(v);
                }
                block = fresh;
            }
            return Ok((block, it));
        }
    }
    Err(Error::NoConvergence(max_iter))
}

struct ScaledSolve {
    /// Per seed: Ritz value (or the failure) and iteration count.
    mu: Vec<Result<(C, usize)>>,
}

fn solve_scaled(op: &DiscretizedOperator, seeds: &[f64], tol: f64, max_iter: usize) -> Result<ScaledSolve> {
    let scale = op.norm_scale();
    let cluster_gap = 1e-9 * scale;
    let mut order: Vec<usize> = (0..seeds.len()).collect();
    order.sort_by(|&a, &b| seeds[a].total_cmp(&seeds[b]));

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match groups.last_mut() {
            Some(g) if seeds[i] - seeds[*g.last().expect("non-empty")] <= cluster_gap => g.push(i),
            _ => groups.push(vec![i]),
        }
    }

    let mut mu: Vec<Result<(C, usize)>> = vec![Err(Error::NoConvergence(0)); seeds.len()];
    for g in &groups {
        let solved = if g.len() == 1 {
            shift_invert_from(op, C::new(seeds[g[0]], 0.0), tol, max_iter, POLISH).map(|r| (vec![r.vector], r.iterations))
        } else {
            let mean = g.iter().map(|&i| seeds[i]).sum::<f64>() / g.len() as f64;
            block_shift_invert(op, C::new(mean, 0.0), g.len(), tol, max_iter)
        };
        let (vectors, iterations) = match solved {
            Ok(v) => v,
            Err(e) => {
                for &i in g {
                    mu[i] = Err(e.clone());
                }
                continue;
            }
        };
        // Rayleigh-Ritz inside the group only: loosely converged vectors of
        // other groups would pollute exponentially small values
        let m = vectors.len();
        let mut a = DMatrix::<C>::zeros(m, m);
        let mut gram = DMatrix::<C>::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let e = op.energy(&vectors[i], &vectors[j]);
                let o: C = vectors[i].iter().zip(&vectors[j]).map(|(x, y)| x * y).sum();
                a[(i, j)] = e;
                a[(j, i)] = e;
                gram[(i, j)] = o;
                gram[(j, i)] = o;
            }
        }
        let mut ritz = pencil_eigenvalues(&a, &gram)?;
        ritz.sort_by(|x, y| x.re.total_cmp(&y.re));
        // g is in ascending seed order
        for (&i, value) in g.iter().zip(ritz) {
            mu[i] = Ok((value, iterations));
        }
    }
    Ok(ScaledSolve { mu })
}

fn scaled_eigenvalues(
    spec: &PotentialSpec,
    eps: f64,
    contour: &ScalingContour,
    seeds: &[f64],
    n: usize,
    params: &ResonanceParams,
) -> Result<ScaledSolve> {
    let r_max = params.r_max.unwrap_or(4.0 * contour.r0);
    let op = assemble_full_scaled(spec, eps, contour, n, r_max, params.check_truncation)?;
    solve_scaled(&op, seeds, params.tol, params.max_iter)
}

/// Resonances of the scaled operator near each Dirichlet seed.
///
/// Seeds should be all low interior eigenvalues at the same `eps`, in any
/// order. Seeds closer than the LU can resolve are solved as one block and
/// separated by a Rayleigh-Ritz step through the energy form. Failures are
/// per seed; an assembly failure fails every seed.
pub fn find_resonances(
    spec: &PotentialSpec,
    eps: f64,
    contour: &ScalingContour,
    seeds: &[f64],
    params: &ResonanceParams,
) -> Result<Vec<Result<ResonanceResult>>> {
    let base = scaled_eigenvalues(spec, eps, contour, seeds, params.n, params)?;
    let mut variants: Vec<ScaledSolve> = Vec::new();
    let mut grid_variant: Option<ScaledSolve> = None;
    if params.drifts {
        for db in [-params.beta_step, params.beta_step] {
            let beta = contour.beta + db;
            if beta.abs() <= spec.beta0 + 1e-15 && beta != 0.0 {
                let c = ScalingContour { beta, ..*contour };
                variants.push(scaled_eigenvalues(spec, eps, &c, seeds, params.n, params)?);
            }
        }
        grid_variant = Some(scaled_eigenvalues(spec, eps, contour, seeds, 2 * params.n + 1, params)?);
    }
    let drift = |other: &ScaledSolve, i: usize, mu: C| match &other.mu[i] {
        Ok((m, _)) => (m - mu).norm(),
        Err(_) => f64::NAN,
    };
    Ok(base
        .mu
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let (mu, iterations) = r.clone()?;
            let seed = seeds[i];
            if !((mu - seed).norm() <= 0.5 * seed.abs()) {
                return Err(Error::ResonanceNotFound { seed });
            }
            let theta_drift = variants.iter().map(|v| drift(v, i, mu)).fold(0.0, f64::max);
            let grid_drift = grid_variant.as_ref().map_or(0.0, |g| drift(g, i, mu));
            Ok(ResonanceResult {
                seed,
                mu,
                theta_drift,
                grid_drift,
                iterations,
            })
        })
        .collect())
}

// ---------------------------------------------------------------------------
// quasimodes and decay

/// C² cutoff: 1 for `r <= r_in`, 0 for `r >= r_out`, quintic in between.
pub fn cutoff(r: f64, r_in: f64, r_out: f64) -> f64 {
    if r <= r_in {
        return 1.0;
    }
    if r >= r_out {
        return 0.0;
    }
    let t = (r - r_in) / (r_out - r_in);
    1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

/// Interior eigenvector extended by zero to the full grid and multiplied by
/// the cutoff from `r_in` to the scaling radius.
pub fn cutoff_quasimode(op_full: &DiscretizedOperator, interior: &[f64], r_in: f64) -> Result<Vec<C>> {
    let r0 = op_full
        .contour
        .map(|c| c.r0)
        .ok_or_else(|| Error::InvalidArgument("quasimodes live on a scaled operator".into()))?;
    if !(r_in < r0) {
        return Err(Error::InvalidArgument("cutoff must start inside r0".into()));
    }
    let u: Vec<C> = interior.iter().map(|&x| C::new(x, 0.0)).collect();
    let mut psi = embed_interior(op_full, &u)?;
    for (k, z) in psi.iter_mut().enumerate() {
        *z *= cutoff(op_full.grid.node(k).abs(), r_in, r0);
    }
    Ok(psi)
}

/// `|H ψ - λ ψ|` in the `h`-weighted norm, with `ψ` normalised first.
pub fn quasimode_residual(op_full: &DiscretizedOperator, psi: &[C], lambda: C) -> f64 {
    let h = op_full.grid.h;
    let norm = (h * psi.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
    let hpsi = op_full.apply(psi);
    let r2: f64 = hpsi.iter().zip(psi).map(|(a, b)| (a - lambda * b).norm_sqr()).sum();
    (h * r2).sqrt() / norm
}

/// `sup_k (eps ln|u_k| + dist_k)` over nodes where `u` is non-zero; `u`
/// and `field` must share the grid.
pub fn decay_check(u: &[f64], field: &AgmonField, eps: f64) -> f64 {
    debug_assert_eq!(u.len(), field.dist.len(), "u and the field must share a grid");
    u.iter()
        .zip(&field.dist)
        .filter(|(x, _)| **x != 0.0)
        .map(|(x, d)| eps * x.abs().ln() + d)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{assemble_interior, fd_operator};
    use crate::potential::presets;

    fn tridiag(d: &[f64], e: &[f64]) -> DiscretizedOperator {
        let mut op = fd_operator(0.0, 1.0, d.len(), 1.0, |_| 0.0).unwrap();
        op.diag = d.iter().map(|&x| C::new(x, 0.0)).collect();
        op.offdiag = e.iter().map(|&x| C::new(x, 0.0)).collect();
        // energy form of a general tridiagonal: c_e = -off, pot = diag - c_l - c_r
        let n = d.len();
        let mut c = vec![0.0; n + 1];
        for k in 0..n - 1 {
            c[k + 1] = -e[k];
        }
        op.form.edge_coef = c.iter().map(|&x| C::new(x, 0.0)).collect();
        op.form.node_pot = (0..n).map(|k| C::new(d[k] - c[k] - c[k + 1], 0.0)).collect();
        op
    }

    #[test]
    fn diagonal_example() {
        let op = tridiag(&[1.0, 2.0, 3.0], &[0.0, 0.0]);
        let r = lowest_eigs(&op, 2, 1e-12).unwrap();
        assert!((r.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((r.eigenvalues[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn repeated_eigenvalue_is_unresolved() {
        let op = tridiag(&[1.0, 1.0, 2.0], &[0.0, 0.0]);
        assert!(matches!(lowest_eigs(&op, 1, 1e-12), Err(Error::ClusterUnresolved { index: 0 })));
        let r = lowest_eigs(&op, 2, 1e-12).unwrap();
        assert_eq!(r.eigenvalues.len(), 2);
    }

    #[test]
    fn dirichlet_laplacian_closed_form() {
        let op = fd_operator(0.0, 1.0, 99, 1.0, |_| 0.0).unwrap();
        let h = 0.01;
        let r = lowest_eigs(&op, 5, 1e-12).unwrap();
        for (j, lam) in r.eigenvalues.iter().enumerate() {
            let kk = (j + 1) as f64;
            let exact = 2.0 / (h * h) * (1.0 - (kk * std::f64::consts::PI * h).cos());
            assert!((lam - exact).abs() < 1e-12 * exact, "{lam} {exact}");
        }
        let scale = op.norm_scale();
        assert!(r.residuals.iter().all(|&x| x < 1e-10 * scale));
        for i in 0..5 {
            for j in 0..5 {
                let dot: f64 = h * r.vectors[i].iter().zip(&r.vectors[j]).map(|(a, b)| a * b).sum::<f64>();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn harmonic_levels() {
        let s = presets::harmonic();
        let op = assemble_interior(&s, 0.1, 6.0, 4000).unwrap();
        let r = lowest_eigs(&op, 2, 1e-12).unwrap();
        assert!((r.eigenvalues[0] / 0.020_710_678 - 1.0).abs() < 1e-4);
        assert!((r.eigenvalues[1] / 0.162_132_034 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn witten_ground_state_is_tiny() {
        let s = presets::reference();
        let op = assemble_interior(&s, 0.15, 3.3, 4000).unwrap();
        let r = lowest_eigs(&op, 3, 1e-12).unwrap();
        assert!(r.eigenvalues[0].abs() < 1e-10, "{:?}", r.eigenvalues);
        assert!(r.eigenvalues[1] > 0.0 && r.eigenvalues[1] < 1e-3 * r.eigenvalues[2]);
    }

    #[test]
    fn tridiagonal_lu_solves() {
        let d = [C::new(2.0, 1.0), C::new(0.1, 0.0), C::new(-1.0, 0.5), C::new(3.0, 0.0)];
        let e = [C::new(1.0, 0.0), C::new(4.0, -1.0), C::new(0.5, 0.5)];
        let lu = TridiagLu::factor(&d, &e, C::new(0.3, 0.2)).unwrap();
        let x = [C::new(1.0, 2.0), C::new(-1.0, 0.0), C::new(0.5, 0.5), C::new(0.0, 1.0)];
        let mut op = fd_operator(0.0, 1.0, 4, 1.0, |_| 0.0).unwrap();
        op.diag = d.iter().map(|z| z - C::new(0.3, 0.2)).collect();
        op.offdiag = e.to_vec();
        let mut b = op.apply(&x);
        lu.solve(&mut b);
        for (a, b) in b.iter().zip(&x) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    fn diag_op(values: &[C]) -> DiscretizedOperator {
        let mut op = fd_operator(0.0, 1.0, values.len(), 1.0, |_| 0.0).unwrap();
        op.diag = values.to_vec();
        op.offdiag = vec![ZERO; values.len() - 1];
        op
    }

    #[test]
    fn nearest_eigenvalue_example() {
        let op = diag_op(&[C::new(1.0, 0.0), C::new(2.0, 1.0)]);
        let r = shift_invert_complex(&op, C::new(1.9, 0.9), 1e-10, 500).unwrap();
        assert!((r.mu - C::new(2.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn exact_shift_is_perturbed() {
        let op = diag_op(&[C::new(1.0, 0.0), C::new(2.0, 0.0)]);
        assert!(matches!(TridiagLu::factor(&op.diag, &op.offdiag, C::new(1.0, 0.0)), Err(Error::SingularShift)));
        let r = shift_invert_complex(&op, C::new(1.0, 0.0), 1e-10, 500).unwrap();
        assert!((r.mu - 1.0).norm() < 1e-12);
    }

    #[test]
    fn cutoff_is_c2() {
        let (a, b) = (1.0, 3.0);
        assert_eq!(cutoff(0.5, a, b), 1.0);
        assert_eq!(cutoff(3.5, a, b), 0.0);
        let h = 1e-4;
        for r in [a, b] {
            let d1 = (cutoff(r + h, a, b) - cutoff(r - h, a, b)) / (2.0 * h);
            let d2 = (cutoff(r + h, a, b) - 2.0 * cutoff(r, a, b) + cutoff(r - h, a, b)) / (h * h);
            assert!(d1.abs() < 1e-6 && d2.abs() < 1e-3, "{d1} {d2}");
        }
    }

    #[test]
    fn decay_of_a_spike() {
        let field = AgmonField {
            coords: vec![0.0, 1.0, 2.0],
            dist: vec![1.0, 0.0, 1.0],
            sources: vec![1.0],
        };
        let v = decay_check(&[0.0, 2.0, 0.0], &field, 0.1);
        assert!((v - 0.1 * 2f64.ln()).abs() < 1e-15);
    }
}
