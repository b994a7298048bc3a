//! Tridiagonal discretisations of `-eps^2 Δ + V_eps` on the line and on the
//! s-wave radial half-line.
//!
//! Every operator is stored twice: as the tridiagonal matrix used by the
//! solvers, and as an energy form
//!
//! ```text
//! B(u, w) = sum_e c_e (σ_e v_i - v_{i+1} / σ_e)(σ_e y_i - y_{i+1} / σ_e) + sum_k p_k u_k w_k
//! v = s ∘ u,  y = s ∘ w,  zero boundary values
//! ```
//!
//! with `c_e` the edge coupling, `σ_e` a real edge balance, `s_k` a node
//! scaling and `p_k` a node potential. The matrix is exactly the Gram matrix
//! of `B`. Rayleigh quotients evaluated through `B` have no cancellation
//! between the kinetic and potential parts, which is what allows
//! eigenvalues of size 1e-18 to be resolved next to matrix entries of size
//! 1e5.
//!
//! Witten-weighted potentials use the ground-state-preserving interior
//! diagonal `(eps^2/h^2)(g_{k-1} + g_{k+1})/g_k` with
//! `g = r^{(n-1)/2} exp(-F/(2 eps))`, for which `σ_e = sqrt(g_{k+1}/g_k)`
//! and `p_k = 0`. Half-weighted potentials use the sampled `V_eps`.
//!
//! Under complex scaling the kinetic part is `K = -(1/z') d/dr (1/z') d/dr`
//! realised as `M^{-1/2} K_b M^{-1/2}` with `1/z'` at edge midpoints and
//! `M = diag(z'_k)`, `z'_k` the mean of the two adjacent midpoint values.
//! The matrix stays complex symmetric and the sharp jump of `z'` at `r0`
//! falls between nodes.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{eval_potential, eval_v_rotated_side, Normalization, PotentialSpec};

type C = Complex64;

/// Uniform grid with `n` interior nodes strictly between `x_min` and `x_max`.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub h: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if n < 16 {
            return Err(Error::GridTooCoarse(format!("N = {n} < 16 interior nodes")));
        }
        Self::unchecked(x_min, x_max, n)
    }

    fn unchecked(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_max > x_min && x_min.is_finite() && x_max.is_finite()) || n == 0 {
            return Err(Error::InvalidArgument("grid needs x_min < x_max and n > 0".into()));
        }
        Ok(Grid1D {
            x_min,
            x_max,
            n,
            h: (x_max - x_min) / (n + 1) as f64,
        })
    }

    /// Coordinate of interior node `k` (0-based).
    pub fn node(&self, k: usize) -> f64 {
        self.x_min + (k + 1) as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.node(k)).collect()
    }
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, Default, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ContourMode {
    #[default]
    Sharp,
    Smooth,
}

impl std::str::FromStr for ContourMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sharp" => Ok(ContourMode::Sharp),
            "smooth" => Ok(ContourMode::Smooth),
            _ => Err(Error::Config(format!("unknown contour mode '{s}'"))),
        }
    }
}

/// Exterior complex scaling `r -> z(r)` beyond `r0`.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
pub struct ScalingContour {
    pub r0: f64,
    pub beta: f64,
    pub mode: ContourMode,
    /// Smoothing width, smooth mode only.
    pub width: f64,
}

impl ScalingContour {
    pub fn sharp(r0: f64, beta: f64) -> Self {
        ScalingContour {
            r0,
            beta,
            mode: ContourMode::Sharp,
            width: 0.0,
        }
    }

    pub fn smooth(r0: f64, beta: f64, width: f64) -> Self {
        ScalingContour {
            r0,
            beta,
            mode: ContourMode::Smooth,
            width,
        }
    }
}

/// `z(r)` and `z'(r)` for a radial coordinate `r >= 0`.
pub fn contour_map(c: &ScalingContour, r: f64) -> (C, C) {
    let s = r - c.r0;
    if s <= 0.0 || c.beta == 0.0 {
        return (C::new(r, 0.0), C::new(1.0, 0.0));
    }
    let rot = C::from_polar(1.0, c.beta);
    match c.mode {
        ContourMode::Sharp => (c.r0 + s * rot, rot),
        ContourMode::Smooth => {
            let t = (s / c.width).tanh();
            let g = s - c.width * t;
            let dg = t * t;
            (r + (rot - 1.0) * g, 1.0 + (rot - 1.0) * dg)
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    RealSymmetric,
    ComplexSymmetric,
}

/// Dirichlet walls at both ends of the grid.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
pub struct Boundary {
    pub left: f64,
    pub right: f64,
}

/// Edge/node data of the energy form (see the module docs).
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct EnergyForm {
    /// `n + 1` edges, edge `e` joins nodes `e - 1` and `e` (boundary at the ends).
    pub edge_coef: Vec<C>,
    pub edge_balance: Vec<f64>,
    pub node_scale: Vec<C>,
    pub node_pot: Vec<C>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct DiscretizedOperator {
    pub kind: OperatorKind,
    pub diag: Vec<C>,
    pub offdiag: Vec<C>,
    pub grid: Grid1D,
    pub eps: f64,
    pub dimension: u8,
    pub boundary: Boundary,
    pub contour: Option<ScalingContour>,
    /// Full-grid indices `[start, end)` of the nodes of the matching interior
    /// operator, when this operator extends one.
    pub interior_range: Option<(usize, usize)>,
    pub form: EnergyForm,
}

impl DiscretizedOperator {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn is_real(&self) -> bool {
        self.kind == OperatorKind::RealSymmetric
    }

    pub fn real_diag(&self) -> Vec<f64> {
        self.diag.iter().map(|z| z.re).collect()
    }

    pub fn real_offdiag(&self) -> Vec<f64> {
        self.offdiag.iter().map(|z| z.re).collect()
    }

    /// Largest absolute row sum.
    pub fn norm_scale(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|k| {
                let mut s = self.diag[k].norm();
                if k > 0 {
                    s += self.offdiag[k - 1].norm();
                }
                if k + 1 < n {
                    s += self.offdiag[k].norm();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, u: &[C]) -> Vec<C> {
        let n = self.n();
        (0..n)
            .map(|k| {
                let mut s = self.diag[k] * u[k];
                if k > 0 {
                    s += self.offdiag[k - 1] * u[k - 1];
                }
                if k + 1 < n {
                    s += self.offdiag[k] * u[k + 1];
                }
                s
            })
            .collect()
    }

    pub fn apply_real(&self, u: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|k| {
                let mut s = self.diag[k].re * u[k];
                if k > 0 {
                    s += self.offdiag[k - 1].re * u[k - 1];
                }
                if k + 1 < n {
                    s += self.offdiag[k].re * u[k + 1];
                }
                s
            })
            .collect()
    }

    /// Bilinear energy form `B(x, y)` (no complex conjugation).
    pub fn energy(&self, x: &[C], y: &[C]) -> C {
        let f = &self.form;
        let n = self.n();
        let mut acc = C::new(0.0, 0.0);
        for e in 0..=n {
            let sig = f.edge_balance[e];
            let (xl, yl) = if e > 0 {
                (f.node_scale[e - 1] * x[e - 1], f.node_scale[e - 1] * y[e - 1])
            } else {
                (C::new(0.0, 0.0), C::new(0.0, 0.0))
            };
            let (xr, yr) = if e < n {
                (f.node_scale[e] * x[e], f.node_scale[e] * y[e])
            } else {
                (C::new(0.0, 0.0), C::new(0.0, 0.0))
            };
            acc += f.edge_coef[e] * (sig * xl - xr / sig) * (sig * yl - yr / sig);
        }
        for k in 0..n {
            acc += f.node_pot[k] * x[k] * y[k];
        }
        acc
    }

    /// Real energy form, for real operators.
    pub fn energy_real(&self, x: &[f64], y: &[f64]) -> f64 {
        let f = &self.form;
        let n = self.n();
        let mut acc = 0.0;
        for e in 0..=n {
            let sig = f.edge_balance[e];
            let (xl, yl) = if e > 0 {
                let s = f.node_scale[e - 1].re;
                (s * x[e - 1], s * y[e - 1])
            } else {
                (0.0, 0.0)
            };
            let (xr, yr) = if e < n {
                let s = f.node_scale[e].re;
                (s * x[e], s * y[e])
            } else {
                (0.0, 0.0)
            };
            acc += f.edge_coef[e].re * (sig * xl - xr / sig) * (sig * yl - yr / sig);
        }
        for k in 0..n {
            acc += f.node_pot[k].re * x[k] * y[k];
        }
        acc
    }

    /// Matrix-market coordinate file (complex symmetric, lower triangle).
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.n();
        writeln!(w, "%%MatrixMarket matrix coordinate complex symmetric")?;
        writeln!(
            w,
            "% reslab operator: eps={} h={} x=[{}, {}] dimension={}",
            self.eps, self.grid.h, self.grid.x_min, self.grid.x_max, self.dimension
        )?;
        if let Some(c) = &self.contour {
            writeln!(w, "% contour: r0={} beta={} mode={:?} width={}", c.r0, c.beta, c.mode, c.width)?;
        }
        writeln!(w, "{} {} {}", n, n, 2 * n - 1)?;
        for k in 0..n {
            writeln!(w, "{} {} {:.17e} {:.17e}", k + 1, k + 1, self.diag[k].re, self.diag[k].im)?;
            if k + 1 < n {
                writeln!(w, "{} {} {:.17e} {:.17e}", k + 2, k + 1, self.offdiag[k].re, self.offdiag[k].im)?;
            }
        }
        Ok(())
    }

    pub fn to_matrix_market(&self) -> String {
        let mut buf = Vec::new();
        self.write_matrix_market(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// Reads back the diagonal and sub-diagonal of a file written by
/// [`DiscretizedOperator::write_matrix_market`].
pub fn read_matrix_market(text: &str) -> Result<(Vec<C>, Vec<C>)> {
    let mut lines = text.lines().filter(|l| !l.starts_with('%'));
    let header = lines.next().ok_or_else(|| Error::Parse("empty file".into()))?;
    let n: usize = header
        .split_whitespace()
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse("bad size line".into()))?;
    let mut diag = vec![C::new(0.0, 0.0); n];
    let mut off = vec![C::new(0.0, 0.0); n.saturating_sub(1)];
    for l in lines {
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() != 4 {
            return Err(Error::Parse(format!("bad entry line '{l}'")));
        }
        let p = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(e.to_string()));
        let i: usize = t[0].parse().map_err(|_| Error::Parse("bad row".into()))?;
        let j: usize = t[1].parse().map_err(|_| Error::Parse("bad column".into()))?;
        let z = C::new(p(t[2])?, p(t[3])?);
        if i == j {
            diag[i - 1] = z;
        } else if i == j + 1 {
            off[j - 1] = z;
        } else {
            return Err(Error::Parse("entry outside the band".into()));
        }
    }
    Ok((diag, off))
}

// ---------------------------------------------------------------------------
// assembly

#[derive(Clone, Copy, PartialEq)]
enum EdgeType {
    /// Unscaled edge whose balance carries the ground-state ratio.
    Balanced,
    /// Unscaled edge without balance; nodes that want the ratio fix it in `p`.
    Plain,
    /// Scaled edge.
    Exterior,
}

struct Layout<'a> {
    spec: &'a PotentialSpec,
    eps: f64,
    grid: Grid1D,
    contour: Option<ScalingContour>,
}

impl Layout<'_> {
    fn is_exterior(&self, x: f64) -> bool {
        match &self.contour {
            Some(c) => x.abs() > c.r0 * (1.0 + 1e-13),
            None => false,
        }
    }

    fn zprime(&self, x: f64) -> C {
        match &self.contour {
            Some(c) => contour_map(c, x.abs()).1,
            None => C::new(1.0, 0.0),
        }
    }

    /// `ln g(x)` with `g = r^{(n-1)/2} exp(-F / (2 eps))`.
    fn log_ground(&self, x: f64) -> f64 {
        let f = self.spec.f(x) / (2.0 * self.eps);
        if self.spec.dimension == 3 {
            let r = x.abs();
            if r == 0.0 {
                return f64::NEG_INFINITY;
            }
            r.ln() - f
        } else {
            -f
        }
    }

    fn exterior_pot(&self, x: f64) -> Result<C> {
        let c = self.contour.as_ref().expect("exterior nodes need a contour");
        let r = x.abs();
        let side = if x < 0.0 { -1.0 } else { 1.0 };
        match c.mode {
            ContourMode::Sharp => eval_v_rotated_side(self.spec, r, side, c.beta, c.r0, self.eps),
            ContourMode::Smooth => {
                let z = contour_map(c, r).0;
                Ok(self.spec.v_eps_complex(z, side, self.eps))
            }
        }
    }

    fn build(&self, kinetic_only: bool) -> Result<DiscretizedOperator> {
        let g = self.grid;
        let n = g.n;
        let h = g.h;
        let c = self.eps * self.eps / (h * h);
        let ground_state = self.spec.normalization == Normalization::Witten && !kinetic_only;
        let point = |i: isize| g.x_min + (i + 1) as f64 * h; // i = -1 and n are the walls

        let mut edge_coef = Vec::with_capacity(n + 1);
        let mut edge_type = Vec::with_capacity(n + 1);
        let mut edge_zp = Vec::with_capacity(n + 1);
        let mut edge_log = Vec::with_capacity(n + 1);
        for e in 0..=n {
            let (xl, xr) = (point(e as isize - 1), point(e as isize));
            let mid = 0.5 * (xl + xr);
            let zp = self.zprime(mid);
            edge_zp.push(zp);
            edge_coef.push(c / zp);
            let ext = self.is_exterior(mid);
            edge_type.push(if ext { EdgeType::Exterior } else { EdgeType::Plain });
            edge_log.push(if ground_state && !ext {
                self.log_ground(xr) - self.log_ground(xl)
            } else {
                0.0
            });
        }
        let interior: Vec<bool> = (0..n).map(|k| !self.is_exterior(g.node(k))).collect();
        let junction: Vec<bool> = (0..n)
            .map(|k| interior[k] && (edge_type[k] == EdgeType::Exterior || edge_type[k + 1] == EdgeType::Exterior))
            .collect();
        if ground_state {
            for e in 0..=n {
                let touches_junction = (e > 0 && junction[e - 1]) || (e < n && junction[e]);
                if edge_type[e] == EdgeType::Plain && !touches_junction && edge_log[e].is_finite() {
                    edge_type[e] = EdgeType::Balanced;
                }
            }
        }
        let edge_balance: Vec<f64> = (0..=n)
            .map(|e| {
                if edge_type[e] == EdgeType::Balanced {
                    (0.5 * edge_log[e]).exp()
                } else {
                    1.0
                }
            })
            .collect();

        let mut node_scale = Vec::with_capacity(n);
        let mut node_inv_zp = Vec::with_capacity(n);
        let mut node_pot = Vec::with_capacity(n);
        for k in 0..n {
            let x = g.node(k);
            let zp = 0.5 * (edge_zp[k] + edge_zp[k + 1]);
            node_inv_zp.push(1.0 / zp);
            node_scale.push(1.0 / zp.sqrt());
            let pot = if kinetic_only {
                C::new(0.0, 0.0)
            } else if !interior[k] {
                self.exterior_pot(x)?
            } else if ground_state {
                // restore the ground-state ratio on edges that do not carry it
                let mut p = 0.0;
                if edge_type[k] != EdgeType::Balanced {
                    p += c * (-edge_log[k]).exp_m1();
                }
                if edge_type[k + 1] != EdgeType::Balanced {
                    p += c * edge_log[k + 1].exp_m1();
                }
                C::new(p, 0.0)
            } else {
                C::new(eval_potential(self.spec, x, self.eps).v_eps, 0.0)
            };
            node_pot.push(pot);
        }

        let mut diag = Vec::with_capacity(n);
        let mut offdiag = Vec::with_capacity(n.saturating_sub(1));
        for k in 0..n {
            let (sl, sr) = (edge_balance[k], edge_balance[k + 1]);
            let kin = edge_coef[k] / (sl * sl) + edge_coef[k + 1] * (sr * sr);
            diag.push(node_inv_zp[k] * kin + node_pot[k]);
            if k + 1 < n {
                offdiag.push(-(node_scale[k] * node_scale[k + 1] * edge_coef[k + 1]));
            }
        }
        let real = diag.iter().chain(offdiag.iter()).all(|z| z.im == 0.0);
        Ok(DiscretizedOperator {
            kind: if real {
                OperatorKind::RealSymmetric
            } else {
                OperatorKind::ComplexSymmetric
            },
            diag,
            offdiag,
            grid: g,
            eps: self.eps,
            dimension: self.spec.dimension,
            boundary: Boundary {
                left: g.x_min,
                right: g.x_max,
            },
            contour: self.contour,
            interior_range: None,
            form: EnergyForm {
                edge_coef,
                edge_balance,
                node_scale,
                node_pot,
            },
        })
    }
}

/// Textbook three-point operator `diag = 2 eps^2/h^2 + v(x_k)`,
/// `offdiag = -eps^2/h^2`, with no restriction on `n`.
pub fn fd_operator(x_min: f64, x_max: f64, n: usize, eps: f64, v: impl Fn(f64) -> f64) -> Result<DiscretizedOperator> {
    let g = Grid1D::unchecked(x_min, x_max, n)?;
    let c = eps * eps / (g.h * g.h);
    let pot: Vec<C> = (0..n).map(|k| C::new(v(g.node(k)), 0.0)).collect();
    let diag = pot.iter().map(|p| C::new(2.0 * c, 0.0) + p).collect();
    Ok(DiscretizedOperator {
        kind: OperatorKind::RealSymmetric,
        diag,
        offdiag: vec![C::new(-c, 0.0); n.saturating_sub(1)],
        grid: g,
        eps,
        dimension: 1,
        boundary: Boundary {
            left: x_min,
            right: x_max,
        },
        contour: None,
        interior_range: None,
        form: EnergyForm {
            edge_coef: vec![C::new(c, 0.0); n + 1],
            edge_balance: vec![1.0; n + 1],
            node_scale: vec![C::new(1.0, 0.0); n],
            node_pot: pot,
        },
    })
}

fn check_resolution(spec: &PotentialSpec, grid: &Grid1D, eps: f64) -> Result<()> {
    let h = grid.h;
    let v: Vec<f64> = (0..grid.n + 2)
        .map(|i| eval_potential(spec, grid.x_min + i as f64 * h, eps).v_eps)
        .collect();
    let curv = v
        .windows(3)
        .map(|w| (w[0] - 2.0 * w[1] + w[2]).abs() / (h * h))
        .fold(0.0, f64::max);
    if h * h * curv > 0.1 * eps {
        return Err(Error::GridTooCoarse(format!(
            "h^2 max|V''| = {:.3e} exceeds 0.1 eps = {:.3e}",
            h * h * curv,
            0.1 * eps
        )));
    }
    Ok(())
}

fn interior_grid(spec: &PotentialSpec, r0: f64, n: usize) -> Result<Grid1D> {
    if spec.dimension == 3 {
        Grid1D::new(0.0, r0, n)
    } else {
        Grid1D::new(-r0, r0, n)
    }
}

fn check_r0(spec: &PotentialSpec, r0: f64) -> Result<()> {
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::InvalidArgument("r0 must be positive".into()));
    }
    if let Some(start) = spec.tail_start() {
        if r0 <= start {
            return Err(Error::InvalidArgument(format!(
                "r0 = {r0} must exceed the end of the glue bridge ({start})"
            )));
        }
    }
    Ok(())
}

/// Dirichlet operator on `(-r0, r0)` (1D) or the s-wave on `(0, r0)` (3D).
pub fn assemble_interior(spec: &PotentialSpec, eps: f64, r0: f64, n: usize) -> Result<DiscretizedOperator> {
    check_r0(spec, r0)?;
    let grid = interior_grid(spec, r0, n)?;
    check_resolution(spec, &grid, eps)?;
    Layout {
        spec,
        eps,
        grid,
        contour: None,
    }
    .build(false)
}

fn check_cone(spec: &PotentialSpec, contour: &ScalingContour) -> Result<()> {
    if contour.beta.abs() > spec.beta0 + 1e-15 {
        return Err(Error::ConeViolation {
            beta: contour.beta,
            beta0: spec.beta0,
        });
    }
    if contour.mode == ContourMode::Smooth && !(contour.width > 0.0) {
        return Err(Error::InvalidArgument("smooth contour needs a positive width".into()));
    }
    Ok(())
}

fn check_truncation(spec: &PotentialSpec, eps: f64, r_max: f64) -> Result<()> {
    let v = eval_potential(spec, r_max, eps).v_eps.abs();
    let limit = 1e-3 * eps;
    if v > limit {
        return Err(Error::TruncationTooTight { v, limit });
    }
    Ok(())
}

/// Exterior-scaled operator on `(-R, R)` (1D) or `(0, R)` (3D).
///
/// The spacing is that of `assemble_interior(spec, eps, contour.r0, n)`, so
/// `r0` is a node and interior rows coincide; `R` is `r_max` rounded up to
/// the grid. `interior_range` records where the interior nodes sit.
pub fn assemble_full_scaled(
    spec: &PotentialSpec,
    eps: f64,
    contour: &ScalingContour,
    n: usize,
    r_max: f64,
    check_trunc: bool,
) -> Result<DiscretizedOperator> {
    check_cone(spec, contour)?;
    let r0 = contour.r0;
    check_r0(spec, r0)?;
    if r_max < 3.0 * r0 {
        return Err(Error::InvalidArgument(format!("R_max = {r_max} must be at least 3 r0")));
    }
    let inner = interior_grid(spec, r0, n)?;
    let h = inner.h;
    let m = ((r_max - r0) / h).ceil() as usize;
    let big_r = r0 + m as f64 * h;
    if check_trunc {
        check_truncation(spec, eps, big_r)?;
    }
    let (grid, start) = if spec.dimension == 3 {
        (Grid1D::unchecked(0.0, big_r, n + m)?, 0)
    } else {
        (Grid1D::unchecked(-big_r, big_r, n + 2 * m)?, m)
    };
    let grid = Grid1D { h, ..grid };
    let mut op = Layout {
        spec,
        eps,
        grid,
        contour: Some(*contour),
    }
    .build(false)?;
    op.interior_range = Some((start, start + n));
    Ok(op)
}

/// Scaled operator on `(r0, R_max)` with Dirichlet walls at both ends
/// (positive half-line in 1D).
pub fn assemble_exterior_dirichlet_scaled(
    spec: &PotentialSpec,
    eps: f64,
    contour: &ScalingContour,
    n: usize,
    r_max: f64,
    check_trunc: bool,
) -> Result<DiscretizedOperator> {
    check_cone(spec, contour)?;
    check_r0(spec, contour.r0)?;
    if r_max <= contour.r0 {
        return Err(Error::InvalidArgument("R_max must exceed r0".into()));
    }
    if check_trunc {
        check_truncation(spec, eps, r_max)?;
    }
    let grid = Grid1D::new(contour.r0, r_max, n)?;
    Layout {
        spec,
        eps,
        grid,
        contour: Some(*contour),
    }
    .build(false)
}

/// Kinetic part alone (`V = 0`) on the scaled full grid; used to check the
/// rotated free spectrum.
pub fn assemble_free_scaled(contour: &ScalingContour, x_min: f64, x_max: f64, n: usize, eps: f64) -> Result<DiscretizedOperator> {
    let spec = crate::potential::presets::harmonic();
    Layout {
        spec: &spec,
        eps,
        grid: Grid1D::unchecked(x_min, x_max, n)?,
        contour: Some(*contour),
    }
    .build(true)
}

/// Interior vector (length `n`) extended by zeros to the full grid.
pub fn embed_interior(full: &DiscretizedOperator, u: &[C]) -> Result<Vec<C>> {
    let (a, b) = full
        .interior_range
        .ok_or_else(|| Error::InvalidArgument("operator has no interior range".into()))?;
    if b - a != u.len() {
        return Err(Error::InvalidArgument("vector length does not match the interior grid".into()));
    }
    let mut out = vec![C::new(0.0, 0.0); full.n()];
    out[a..b].copy_from_slice(u);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::presets;

    #[test]
    fn textbook_three_point() {
        let op = fd_operator(0.0, 1.0, 3, 1.0, |_| 0.0).unwrap();
        assert_eq!(op.diag[0].re, 32.0);
        assert_eq!(op.offdiag[0].re, -16.0);
    }

    #[test]
    fn grid_invariants() {
        assert!(matches!(Grid1D::new(0.0, 1.0, 8), Err(Error::GridTooCoarse(_))));
        let g = Grid1D::new(-1.0, 1.0, 99).unwrap();
        assert!((g.h - 0.02).abs() < 1e-15);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn wild_potential_is_too_coarse() {
        let s = crate::potential::build_potential("[[core]]\nkind='polynomial'\ncoeffs=[0,0,200]\n").unwrap();
        assert!(matches!(assemble_interior(&s, 0.01, 5.0, 16), Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn contour_examples() {
        let c = ScalingContour::sharp(10.0, 0.3);
        let (z, zp) = contour_map(&c, 20.0);
        assert!((z.re - 19.5534).abs() < 1e-4 && (z.im - 2.9552).abs() < 1e-4);
        assert!((zp - C::from_polar(1.0, 0.3)).norm() < 1e-15);
        let c0 = ScalingContour::sharp(10.0, 0.0);
        assert_eq!(contour_map(&c0, 20.0), (C::new(20.0, 0.0), C::new(1.0, 0.0)));
        let w = 0.5;
        let sm = ScalingContour::smooth(10.0, 0.3, w);
        let r = 10.0 + 10.0 * w;
        let shift = (C::from_polar(1.0, 0.3) - 1.0) * w;
        // smooth map is the sharp one shifted by w (e^{iβ} - 1) up to e^{-2(r-r0)/w}
        let d = contour_map(&sm, r).0 - (contour_map(&c, r).0 - shift);
        assert!(d.norm() < 1e-7, "{d}");
    }

    #[test]
    fn witten_interior_annihilates_ground_state() {
        let s = presets::reference();
        let eps = 0.15;
        let op = assemble_interior(&s, eps, 3.5, 4000).unwrap();
        // interior rows: H g = 0 exactly up to rounding
        let g: Vec<f64> = op.grid.nodes().iter().map(|&x| (-s.f(x) / (2.0 * eps)).exp()).collect();
        let hg = op.apply_real(&g);
        let scale = op.norm_scale() * g.iter().cloned().fold(0.0, f64::max);
        assert!(hg[1..op.n() - 1].iter().all(|v| v.abs() < 1e-12 * scale));
        assert!(op.form.node_pot.iter().all(|p| *p == C::new(0.0, 0.0)));
    }

    #[test]
    fn energy_form_is_the_matrix() {
        let s = presets::reference();
        let c = ScalingContour::sharp(3.5, 0.3);
        let op = assemble_full_scaled(&s, 0.15, &c, 400, 14.0, false).unwrap();
        let n = op.n();
        let x: Vec<C> = (0..n).map(|k| C::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos())).collect();
        let y: Vec<C> = (0..n).map(|k| C::new((k as f64 * 0.23).cos(), 0.5)).collect();
        let hy = op.apply(&y);
        let direct: C = x.iter().zip(&hy).map(|(a, b)| a * b).sum();
        let form = op.energy(&x, &y);
        assert!((direct - form).norm() < 1e-9 * direct.norm().max(1.0), "{direct} {form}");
    }

    #[test]
    fn unscaled_full_operator_equals_plain_fd() {
        let s = presets::harmonic();
        let c = ScalingContour::sharp(3.0, 0.0);
        let op = assemble_full_scaled(&s, 0.1, &c, 200, 9.0, false).unwrap();
        let plain = fd_operator(op.grid.x_min, op.grid.x_max, op.n(), 0.1, |x| x * x / 2.0 - 0.05).unwrap();
        assert_eq!(op.kind, OperatorKind::RealSymmetric);
        for k in 0..op.n() {
            assert_eq!(op.diag[k], plain.diag[k], "k = {k}");
        }
        for k in 0..op.n() - 1 {
            assert_eq!(op.offdiag[k], plain.offdiag[k]);
        }
    }

    #[test]
    fn scaled_operator_is_complex_symmetric_not_hermitian() {
        let s = presets::reference();
        let c = ScalingContour::sharp(3.5, 0.3);
        let op = assemble_full_scaled(&s, 0.15, &c, 4000, 14.0, false).unwrap();
        assert_eq!(op.kind, OperatorKind::ComplexSymmetric);
        // one stored off-diagonal serves both triangles; conjugate transpose differs
        assert!(op.offdiag.iter().any(|z| z.im != 0.0));
        assert!(op.diag.iter().any(|z| z.im != 0.0));
        let (a, b) = op.interior_range.unwrap();
        let inner = assemble_interior(&s, 0.15, 3.5, 4000).unwrap();
        for k in 1..(b - a - 1) {
            // node coordinates are measured from different walls, so allow rounding
            assert!((op.diag[a + k] - inner.diag[k]).norm() < 1e-12 * inner.diag[k].norm());
        }
    }

    #[test]
    fn cone_and_truncation_guards() {
        let s = presets::reference();
        let c = ScalingContour::sharp(3.5, 0.6);
        assert!(matches!(
            assemble_full_scaled(&s, 0.15, &c, 400, 14.0, false),
            Err(Error::ConeViolation { .. })
        ));
        let c = ScalingContour::sharp(3.5, 0.3);
        assert!(matches!(
            assemble_full_scaled(&s, 0.15, &c, 400, 14.0, true),
            Err(Error::TruncationTooTight { .. })
        ));
    }

    #[test]
    fn matrix_market_round_trip() {
        let s = presets::reference();
        let c = ScalingContour::sharp(3.5, 0.3);
        let op = assemble_full_scaled(&s, 0.15, &c, 100, 14.0, false).unwrap();
        let (d, o) = read_matrix_market(&op.to_matrix_market()).unwrap();
        assert_eq!(d, op.diag);
        assert_eq!(o, op.offdiag);
    }

    #[test]
    fn radial_interior_has_wall_at_origin() {
        let s = crate::potential::build_potential(
            "dimension = 3\nnormalization='witten'\nglue_radius=1.0\n[[core]]\nkind='polynomial'\ncoeffs=[0,0,1]\n[tail]\na=0.5\ncoeff=2\n",
        )
        .unwrap();
        let op = assemble_interior(&s, 0.2, 4.0, 500).unwrap();
        let c = 0.04 / (op.grid.h * op.grid.h);
        assert!((op.form.node_pot[0].re + c).abs() < 1e-9 * c);
        // u = r exp(-F/(2 eps)) is annihilated away from the outer wall
        let g: Vec<f64> = op.grid.nodes().iter().map(|&r| r * (-s.f(r) / 0.4).exp()).collect();
        let hg = op.apply_real(&g);
        let scale = op.norm_scale();
        assert!(hg[..op.n() - 1].iter().all(|v| v.abs() < 1e-11 * scale));
    }
}
