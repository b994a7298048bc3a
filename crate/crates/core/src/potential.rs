//! Drift potentials `F` made of a multi-well core glued to a power-law tail,
//! together with `V = w |F'|^2`, `V_eps = V - (eps/2) ΔF` and their
//! continuation along the complex scaling ray.
//!
//! The tail is `coeff * |x|^a + offset` with `a` in (0, 1). Between the glue
//! radius `R` and `R + 1` a quintic bridge joins core and tail. The bridge
//! derivative is the cubic Hermite interpolant of `(F', F'')` at both ends,
//! so `F` is C² everywhere and the tail offset follows from integrating the
//! bridge.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default half-angle of the analyticity cone, in radians.
pub const DEFAULT_BETA0: f64 = 0.5;

/// Weight `w` in `V = w |F'|^2`.
///
/// `Half` is the textbook `V = |F'|^2 / 2`. `Witten` is `|F'|^2 / 4`, the
/// weight for which `H` is conjugate to the diffusion generator and whose
/// ground state is exactly `exp(-F / (2 eps))`.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, Default, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    #[default]
    Half,
    Witten,
}

impl Normalization {
    pub fn weight(self) -> f64 {
        match self {
            Normalization::Half => 0.5,
            Normalization::Witten => 0.25,
        }
    }
}

/// One additive term of the core.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CoreTerm {
    /// `sum_k coeffs[k] (x - center)^k`
    Polynomial {
        #[serde(default)]
        center: f64,
        coeffs: Vec<f64>,
    },
    /// `amplitude * exp(-(x - center)^2 / (2 width^2))`
    Gaussian {
        #[serde(default)]
        center: f64,
        amplitude: f64,
        width: f64,
    },
}

/// Power-law tail `coeff * |x|^a`.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
pub struct Tail {
    pub a: f64,
    pub coeff: f64,
}

/// Matching data of the bridge on one side (`sign = ±1`).
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
pub struct GlueSide {
    pub sign: f64,
    /// `F` at the glue radius.
    pub f0: f64,
    /// Outward `F'` and `F''` at the glue radius.
    pub p0: f64,
    pub m0: f64,
    /// Tail `F'` and `F''` at the far end of the bridge.
    pub p1: f64,
    pub m1: f64,
    /// Constant added to the tail so that `F` is continuous.
    pub tail_offset: f64,
}

/// Text form of a potential, as read from a config file.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    #[serde(default = "default_dimension")]
    pub dimension: u8,
    #[serde(default)]
    pub normalization: Normalization,
    pub core: Vec<CoreTerm>,
    #[serde(default)]
    pub tail: Option<Tail>,
    #[serde(default)]
    pub glue_radius: Option<f64>,
    #[serde(default)]
    pub beta0: Option<f64>,
}

fn default_dimension() -> u8 {
    1
}

/// Validated, immutable potential.
#[derive(Serialize, Clone, Debug, PartialEq)]
pub struct PotentialSpec {
    pub dimension: u8,
    pub normalization: Normalization,
    pub core: Vec<CoreTerm>,
    pub tail: Option<Tail>,
    /// `None` means no tail (`R = ∞`).
    pub glue_radius: Option<f64>,
    pub beta0: f64,
    glue: Vec<GlueSide>,
}

/// Closed-form values at one point.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
pub struct PotentialValues {
    pub f: f64,
    pub grad_f: f64,
    pub lapl_f: f64,
    pub v: f64,
    pub v_eps: f64,
    /// Derivative of `V_eps` along `x` (1D) or `r` (3D).
    pub dv_eps: f64,
    /// Derivative of `V` along `x` (1D) or `r` (3D).
    pub dv: f64,
}

/// Point on the scaling ray: `r0 + (r - r0) e^{i beta}` beyond `r0`, `r` inside.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
pub struct ComplexRadius {
    pub r: f64,
    pub r0: f64,
    pub beta: f64,
    pub value: Complex64,
}

impl ComplexRadius {
    pub fn new(r: f64, r0: f64, beta: f64) -> Self {
        let value = if r <= r0 || beta == 0.0 {
            Complex64::new(r, 0.0)
        } else {
            r0 + (r - r0) * Complex64::from_polar(1.0, beta)
        };
        ComplexRadius { r, r0, beta, value }
    }
}

/// Per-clause outcome of [`verify_hypotheses`].
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
pub struct HypothesisPass {
    /// `0 < gamma < 2`.
    pub gamma_in_range: bool,
    /// `0 < c_V <= C_V`.
    pub bounds_ordered: bool,
    /// `V' < 0` on the whole sampled range.
    pub tail_decreasing: bool,
}

impl HypothesisPass {
    pub fn all(&self) -> bool {
        self.gamma_in_range && self.bounds_ordered && self.tail_decreasing
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct HypothesisReport {
    pub gamma_fit: f64,
    pub c_v: f64,
    pub c_v_upper: f64,
    /// `min |V'|/V` over the range, divided by `c_V`.
    pub nontrap_min: f64,
    /// `max |V'| r^gamma` (the bound as printed).
    pub dv_bound_gamma: f64,
    /// `max |V'| r^(gamma+1)` (the bound one expects from differentiating).
    pub dv_bound_gamma_plus_one: f64,
    pub beta0: f64,
    pub r_range: (f64, f64),
    pub pass: HypothesisPass,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.pass.all()
    }
}

// ---------------------------------------------------------------------------
// scalar helper so that real and complex evaluation share one code path

pub(crate) trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + Add<f64, Output = Self>
{
    fn real(x: f64) -> Self;
    fn exp(self) -> Self;
    fn powf(self, a: f64) -> Self;
}

impl Scalar for f64 {
    fn real(x: f64) -> Self {
        x
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn powf(self, a: f64) -> Self {
        f64::powf(self, a)
    }
}

impl Scalar for Complex64 {
    fn real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn exp(self) -> Self {
        Complex64::exp(self)
    }
    fn powf(self, a: f64) -> Self {
        Complex64::powf(self, a)
    }
}

impl CoreTerm {
    /// `[F, F', F'', F''']` of this term.
    pub(crate) fn derivs<T: Scalar>(&self, x: T) -> [T; 4] {
        match self {
            CoreTerm::Polynomial { center, coeffs } => {
                let u = x + (-center);
                let zero = T::real(0.0);
                let (mut p0, mut p1, mut p2, mut p3) = (zero, zero, zero, zero);
                for &c in coeffs.iter().rev() {
                    p3 = p3 * u + p2;
                    p2 = p2 * u + p1;
                    p1 = p1 * u + p0;
                    p0 = p0 * u + c;
                }
                [p0, p1, p2 * 2.0, p3 * 6.0]
            }
            CoreTerm::Gaussian {
                center,
                amplitude,
                width,
            } => {
                let u = x + (-center);
                let w2 = width * width;
                let g = (u * u * (-0.5 / w2)).exp() * *amplitude;
                let u_w = u * (1.0 / w2);
                [
                    g,
                    -(u_w * g),
                    (u_w * u_w + (-1.0 / w2)) * g,
                    (u_w * (3.0 / w2) - u_w * u_w * u_w) * g,
                ]
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            CoreTerm::Polynomial { center, coeffs } => {
                if coeffs.is_empty() || !center.is_finite() || coeffs.iter().any(|c| !c.is_finite())
                {
                    return Err(Error::InvalidPotential("bad polynomial term".into()));
                }
            }
            CoreTerm::Gaussian {
                center,
                amplitude,
                width,
            } => {
                if !(width.is_finite() && *width > 0.0 && center.is_finite() && amplitude.is_finite())
                {
                    return Err(Error::InvalidPotential("bad Gaussian term".into()));
                }
            }
        }
        Ok(())
    }
}

impl Tail {
    pub(crate) fn derivs<T: Scalar>(&self, r: T) -> [T; 4] {
        let a = self.a;
        let c = self.coeff;
        [
            r.powf(a) * c,
            r.powf(a - 1.0) * (c * a),
            r.powf(a - 2.0) * (c * a * (a - 1.0)),
            r.powf(a - 3.0) * (c * a * (a - 1.0) * (a - 2.0)),
        ]
    }
}

fn hermite(t: f64) -> ([f64; 4], [f64; 4], [f64; 4], [f64; 4]) {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    // integrated basis, basis, first and second derivative of the basis
    let int = [
        t4 / 2.0 - t3 + t,
        t4 / 4.0 - 2.0 * t3 / 3.0 + t2 / 2.0,
        -t4 / 2.0 + t3,
        t4 / 4.0 - t3 / 3.0,
    ];
    let val = [
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + t,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
    ];
    let d1 = [
        6.0 * t2 - 6.0 * t,
        3.0 * t2 - 4.0 * t + 1.0,
        -6.0 * t2 + 6.0 * t,
        3.0 * t2 - 2.0 * t,
    ];
    let d2 = [12.0 * t - 6.0, 6.0 * t - 4.0, -12.0 * t + 6.0, 6.0 * t - 2.0];
    (int, val, d1, d2)
}

impl GlueSide {
    /// Outward `[F, F', F'', F''']` at `t = |x| - R` in `[0, 1]`.
    fn bridge(&self, t: f64) -> [f64; 4] {
        let (int, val, d1, d2) = hermite(t);
        let w = [self.p0, self.m0, self.p1, self.m1];
        let dot = |b: [f64; 4]| b.iter().zip(w.iter()).map(|(x, y)| x * y).sum::<f64>();
        [self.f0 + dot(int), dot(val), dot(d1), dot(d2)]
    }

    fn min_slope(&self) -> f64 {
        (0..=2000)
            .map(|i| self.bridge(i as f64 / 2000.0)[1])
            .fold(f64::INFINITY, f64::min)
    }
}

impl PotentialSpec {
    /// Validates a parsed config and derives the glue data.
    pub fn from_config(cfg: PotentialConfig) -> Result<Self> {
        if cfg.dimension != 1 && cfg.dimension != 3 {
            return Err(Error::InvalidPotential(format!(
                "dimension must be 1 or 3, got {}",
                cfg.dimension
            )));
        }
        if cfg.core.is_empty() {
            return Err(Error::InvalidPotential("at least one core term is required".into()));
        }
        for t in &cfg.core {
            t.validate()?;
        }
        let beta0 = cfg.beta0.unwrap_or(DEFAULT_BETA0);
        if !(beta0 > 0.0 && beta0 < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidPotential("beta0 must lie in (0, pi/2)".into()));
        }
        let glue_radius = cfg.glue_radius.filter(|r| r.is_finite());
        let mut spec = PotentialSpec {
            dimension: cfg.dimension,
            normalization: cfg.normalization,
            core: cfg.core,
            tail: None,
            glue_radius: None,
            beta0,
            glue: Vec::new(),
        };
        match (cfg.tail, glue_radius) {
            (Some(tail), Some(r)) => {
                if !(tail.a > 0.0 && tail.a < 1.0) {
                    return Err(Error::InvalidPotential(format!(
                        "tail exponent a = {} must lie in (0, 1)",
                        tail.a
                    )));
                }
                if !(tail.coeff > 0.0 && tail.coeff.is_finite()) {
                    return Err(Error::InvalidPotential("tail coefficient must be positive".into()));
                }
                if r <= 0.0 {
                    return Err(Error::InvalidPotential("glue radius must be positive".into()));
                }
                spec.tail = Some(tail);
                spec.glue_radius = Some(r);
                spec.glue = spec.solve_glue(tail, r)?;
            }
            (Some(tail), None) => {
                // a tail without a glue radius is still checked for range
                if !(tail.a > 0.0 && tail.a < 1.0) {
                    return Err(Error::InvalidPotential(format!(
                        "tail exponent a = {} must lie in (0, 1)",
                        tail.a
                    )));
                }
                return Err(Error::InvalidPotential("tail given without a finite glue_radius".into()));
            }
            (None, Some(_)) => {
                return Err(Error::InvalidPotential("glue_radius given without a tail".into()));
            }
            (None, None) => spec.check_confining()?,
        }
        if spec.dimension == 3 {
            let d = spec.core_derivs(0.0);
            if d[1].abs() > 1e-10 * (1.0 + d[2].abs()) {
                return Err(Error::InvalidPotential("radial core must satisfy F'(0) = 0".into()));
            }
        }
        spec.check_global_minimum()?;
        Ok(spec)
    }

    fn solve_glue(&self, tail: Tail, r: f64) -> Result<Vec<GlueSide>> {
        let signs: &[f64] = if self.dimension == 1 { &[1.0, -1.0] } else { &[1.0] };
        let mut sides = Vec::new();
        for &s in signs {
            let c = self.core_derivs(s * r);
            let t = tail.derivs(r + 1.0);
            let mut side = GlueSide {
                sign: s,
                f0: c[0],
                p0: s * c[1],
                m0: c[2],
                p1: t[1],
                m1: t[2],
                tail_offset: 0.0,
            };
            let end = side.bridge(1.0)[0];
            side.tail_offset = end - t[0];
            if side.min_slope() <= 0.0 {
                return Err(Error::InvalidPotential(format!(
                    "glue infeasible: bridge slope not positive on side {s:+}"
                )));
            }
            sides.push(side);
        }
        Ok(sides)
    }

    fn check_confining(&self) -> Result<()> {
        let mut degree = 0usize;
        let mut lead = 0.0;
        for t in &self.core {
            if let CoreTerm::Polynomial { coeffs, .. } = t {
                if let Some(d) = coeffs.iter().rposition(|c| *c != 0.0) {
                    if d > degree {
                        degree = d;
                        lead = coeffs[d];
                    } else if d == degree {
                        lead += coeffs[d];
                    }
                }
            }
        }
        let ok = lead > 0.0 && degree >= 1 && (self.dimension == 3 || degree.is_multiple_of(2));
        if !ok {
            return Err(Error::InvalidPotential(
                "no tail and the core does not grow at infinity: no finite global minimum".into(),
            ));
        }
        Ok(())
    }

    fn check_global_minimum(&self) -> Result<()> {
        let l = self.scan_half_width();
        match crate::wells::find_minima(self, (-l, l), 20_000) {
            Ok(_) => Ok(()),
            Err(Error::TieAtGlobalMin { gap }) => Err(Error::InvalidPotential(format!(
                "global minimum is not unique (|dF| = {gap:e})"
            ))),
            Err(Error::NoMinimum) => Err(Error::InvalidPotential("no finite global minimum".into())),
            Err(e) => Err(e),
        }
    }

    /// Half-width of an interval that contains every critical point of `F`.
    pub fn scan_half_width(&self) -> f64 {
        if let Some(r) = self.glue_radius {
            return r + 1.0;
        }
        let mut l: f64 = 1.0;
        for t in &self.core {
            let (c, w) = match t {
                CoreTerm::Polynomial { center, .. } => (*center, 0.0),
                CoreTerm::Gaussian { center, width, .. } => (*center, *width),
            };
            l = l.max(c.abs() + 8.0 * w + 1.0);
        }
        // grow until F' points outward on both sides with margin
        for _ in 0..60 {
            let right = self.derivs(l)[1] > 0.0 && self.derivs(2.0 * l)[1] > 0.0;
            let left = self.dimension == 3 || (self.derivs(-l)[1] < 0.0 && self.derivs(-2.0 * l)[1] < 0.0);
            if right && left {
                break;
            }
            l *= 1.5;
        }
        2.0 * l
    }

    pub fn weight(&self) -> f64 {
        self.normalization.weight()
    }

    pub fn glue_sides(&self) -> &[GlueSide] {
        &self.glue
    }

    /// End of the bridge, beyond which `F` is the closed-form tail.
    pub fn tail_start(&self) -> Option<f64> {
        self.glue_radius.map(|r| r + 1.0)
    }

    fn core_derivs<T: Scalar>(&self, x: T) -> [T; 4] {
        let mut acc = [T::real(0.0); 4];
        for t in &self.core {
            let d = t.derivs(x);
            for k in 0..4 {
                acc[k] = acc[k] + d[k];
            }
        }
        acc
    }

    /// `[F, F', F'', F''']` in the natural coordinate (`x` in 1D, `r = |x|` in 3D).
    pub fn derivs(&self, x: f64) -> [f64; 4] {
        let x = if self.dimension == 3 { x.abs() } else { x };
        let (Some(tail), Some(r)) = (self.tail, self.glue_radius) else {
            return self.core_derivs(x);
        };
        let ax = x.abs();
        if ax <= r {
            return self.core_derivs(x);
        }
        let s = if x >= 0.0 { 1.0 } else { -1.0 };
        let side = if s > 0.0 { &self.glue[0] } else { &self.glue[1] };
        let out = if ax < r + 1.0 {
            side.bridge(ax - r)
        } else {
            let t = tail.derivs(ax);
            [t[0] + side.tail_offset, t[1], t[2], t[3]]
        };
        [out[0], s * out[1], out[2], s * out[3]]
    }

    /// `F(x)`.
    pub fn f(&self, x: f64) -> f64 {
        self.derivs(x)[0]
    }

    /// `F'(x)`.
    pub fn grad(&self, x: f64) -> f64 {
        self.derivs(x)[1]
    }

    /// Complex `V_eps` at the point `side * rho` of the continued region.
    ///
    /// With a tail this is the tail's closed form (an even function of `x`,
    /// so `side` is irrelevant). Core-only specs continue the core, which is
    /// entire.
    pub fn v_eps_complex(&self, rho: Complex64, side: f64, eps: f64) -> Complex64 {
        let n = self.dimension as f64;
        let w = self.weight();
        match self.tail {
            Some(tail) => {
                let d = tail.derivs(rho);
                let lapl = d[2] + (n - 1.0) * d[1] / rho;
                w * d[1] * d[1] - 0.5 * eps * lapl
            }
            None => {
                let x = if self.dimension == 3 { rho } else { side * rho };
                let d = self.core_derivs(x);
                let lapl = if self.dimension == 3 { d[2] + 2.0 * d[1] / x } else { d[2] };
                w * d[1] * d[1] - 0.5 * eps * lapl
            }
        }
    }

    /// Validated text form, for reports.
    pub fn to_config(&self) -> PotentialConfig {
        PotentialConfig {
            dimension: self.dimension,
            normalization: self.normalization,
            core: self.core.clone(),
            tail: self.tail,
            glue_radius: self.glue_radius,
            beta0: Some(self.beta0),
        }
    }
}

/// Parses and validates a potential from its TOML text.
///
/// ```toml
/// dimension = 1
/// normalization = "witten"
/// glue_radius = 1.3
/// [[core]]
/// kind = "polynomial"
/// coeffs = [0.0, 0.0, 0.1]
/// [tail]
/// a = 0.5
/// coeff = 2.8
/// ```
pub fn build_potential(text: &str) -> Result<PotentialSpec> {
    let cfg: PotentialConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    PotentialSpec::from_config(cfg)
}

/// Closed-form `F`, derivatives, `V` and `V_eps` at `x`.
pub fn eval_potential(spec: &PotentialSpec, x: f64, eps: f64) -> PotentialValues {
    let d = spec.derivs(x);
    let w = spec.weight();
    let (lapl, dlapl) = if spec.dimension == 3 {
        let r = x.abs();
        if r < 1e-12 {
            (3.0 * d[2], 0.0)
        } else {
            (d[2] + 2.0 * d[1] / r, d[3] + 2.0 * d[2] / r - 2.0 * d[1] / (r * r))
        }
    } else {
        (d[2], d[3])
    };
    let v = w * d[1] * d[1];
    let dv = 2.0 * w * d[1] * d[2];
    PotentialValues {
        f: d[0],
        grad_f: d[1],
        lapl_f: lapl,
        v,
        v_eps: v - 0.5 * eps * lapl,
        dv_eps: dv - 0.5 * eps * dlapl,
        dv,
    }
}

/// `V_eps(r0 + (r - r0) e^{i beta})` from the tail closed form.
pub fn eval_v_rotated(spec: &PotentialSpec, r: f64, beta: f64, r0: f64, eps: f64) -> Result<Complex64> {
    eval_v_rotated_side(spec, r, 1.0, beta, r0, eps)
}

/// As [`eval_v_rotated`] on the half-line of sign `side` (1D only matters
/// for core-only specs).
pub fn eval_v_rotated_side(
    spec: &PotentialSpec,
    r: f64,
    side: f64,
    beta: f64,
    r0: f64,
    eps: f64,
) -> Result<Complex64> {
    if beta.abs() > spec.beta0 + 1e-15 {
        return Err(Error::OutsideAnalyticityCone {
            beta,
            beta0: spec.beta0,
        });
    }
    if r < r0 {
        return Err(Error::InsideCore { r, r0 });
    }
    if let Some(start) = spec.tail_start() {
        if r0 < start {
            return Err(Error::InsideCore { r: r0, r0: start });
        }
    }
    if beta == 0.0 {
        return Ok(Complex64::new(eval_potential(spec, side * r, eps).v_eps, 0.0));
    }
    let rho = ComplexRadius::new(r, r0, beta).value;
    Ok(spec.v_eps_complex(rho, side, eps))
}

/// Least-squares slope of `ln v` against `ln r`; returns `gamma = -slope`.
pub fn fit_power_law(r: &[f64], v: &[f64]) -> Result<f64> {
    if r.len() != v.len() || r.len() < 20 {
        return Err(Error::FitFailed("need at least 20 samples".into()));
    }
    if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::FitFailed("V vanishes or is not finite".into()));
    }
    let xs: Vec<f64> = r.iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = v.iter().map(|x| x.ln()).collect();
    let (slope, _, _) = linear_fit(&xs, &ys);
    let spread = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - ys.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread < 1e-12 {
        return Err(Error::FitFailed("V is constant".into()));
    }
    Ok(-slope)
}

/// Ordinary least squares `y = slope x + intercept`; returns (slope, intercept, r²).
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - (slope * a + intercept);
            e * e
        })
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    (slope, intercept, r2)
}

/// Decay hypotheses from raw samples of `V` and `V'` on a radial range.
pub fn hypotheses_from_samples(r: &[f64], v: &[f64], dv: &[f64], beta0: f64) -> Result<HypothesisReport> {
    let gamma = fit_power_law(r, v)?;
    let neg = dv.iter().filter(|d| **d < 0.0).count();
    let pos = dv.iter().filter(|d| **d > 0.0).count();
    if neg > 0 && pos > 0 {
        return Err(Error::FitFailed("non-monotone tail".into()));
    }
    let scaled: Vec<f64> = r.iter().zip(v).map(|(x, y)| y * x.powf(gamma)).collect();
    let c_v = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    let c_v_upper = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut ratio_min = f64::INFINITY;
    let mut b0: f64 = 0.0;
    let mut b1: f64 = 0.0;
    for i in 0..r.len() {
        ratio_min = ratio_min.min(dv[i].abs() / v[i]);
        b0 = b0.max(dv[i].abs() * r[i].powf(gamma));
        b1 = b1.max(dv[i].abs() * r[i].powf(gamma + 1.0));
    }
    let pass = HypothesisPass {
        gamma_in_range: gamma > 0.0 && gamma < 2.0,
        bounds_ordered: c_v > 0.0 && c_v <= c_v_upper,
        tail_decreasing: pos == 0,
    };
    Ok(HypothesisReport {
        gamma_fit: gamma,
        c_v,
        c_v_upper,
        nontrap_min: ratio_min / c_v,
        dv_bound_gamma: b0,
        dv_bound_gamma_plus_one: b1,
        beta0,
        r_range: (r[0], r[r.len() - 1]),
        pass,
    })
}

/// Fits `gamma`, `c_V`, `C_V` on `[r_lo, r_hi]` (beyond the bridge).
///
/// `gamma` comes from `V`; the bounds are widened to cover `V_eps` for every
/// `eps` in `eps_list`.
pub fn verify_hypotheses(spec: &PotentialSpec, r_range: (f64, f64), eps_list: &[f64]) -> Result<HypothesisReport> {
    let (lo, hi) = r_range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidArgument("r_range must satisfy 0 < lo < hi".into()));
    }
    if let Some(r) = spec.glue_radius {
        if lo < r {
            return Err(Error::InvalidArgument(format!("r_range must start beyond the glue radius {r}")));
        }
    }
    const SAMPLES: usize = 256;
    let sides: &[f64] = if spec.dimension == 1 { &[1.0, -1.0] } else { &[1.0] };
    let mut rs = Vec::new();
    let mut vs = Vec::new();
    let mut dvs = Vec::new();
    for &s in sides {
        for i in 0..SAMPLES {
            let r = lo * (hi / lo).powf(i as f64 / (SAMPLES - 1) as f64);
            let p = eval_potential(spec, s * r, 0.0);
            rs.push(r);
            vs.push(p.v);
            dvs.push(s * p.dv);
        }
    }
    let mut rep = hypotheses_from_samples(&rs, &vs, &dvs, spec.beta0)?;
    for &eps in eps_list {
        for (i, &r) in rs.iter().enumerate() {
            let s = if i < SAMPLES { 1.0 } else { -1.0 };
            let ve = eval_potential(spec, s * r, eps).v_eps;
            let sc = ve * r.powf(rep.gamma_fit);
            rep.c_v = rep.c_v.min(sc);
            rep.c_v_upper = rep.c_v_upper.max(sc);
        }
    }
    rep.pass.bounds_ordered = rep.c_v > 0.0 && rep.c_v <= rep.c_v_upper;
    Ok(rep)
}

/// Default fitting range: from the end of the bridge over four decades.
pub fn default_fit_range(spec: &PotentialSpec) -> (f64, f64) {
    let lo = spec.tail_start().unwrap_or(1.0);
    (lo, lo * 1e4)
}

/// Dirichlet radius `r0 = (c_V / eps)^(1/gamma)`.
pub fn scaling_radius(report: &HypothesisReport, eps: f64) -> Result<f64> {
    if !report.passed() {
        return Err(Error::HypothesesNotVerified);
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    Ok((report.c_v / eps).powf(1.0 / report.gamma_fit))
}

/// Ready-made potentials used by the examples, the CLI defaults and the tests.
pub mod presets {
    use super::*;

    /// Asymmetric double well with a `|x|^{1/2}` tail, in the Witten weight.
    /// Deep well near `-0.6`, shallow well near `+0.6`, depth about 1.97.
    pub const REFERENCE_TOML: &str = include_str!("../configs/reference.toml");
    /// `F = x^2 / 2`, no tail.
    pub const HARMONIC_TOML: &str = include_str!("../configs/harmonic.toml");
    /// `(x^2 - 1)^2 + 0.2 x` glued to `|x|^{1/2}` at 3.
    pub const TILTED_QUARTIC_TOML: &str = include_str!("../configs/tilted_quartic.toml");

    pub fn reference() -> PotentialSpec {
        build_potential(REFERENCE_TOML).expect("reference potential is valid")
    }

    pub fn harmonic() -> PotentialSpec {
        build_potential(HARMONIC_TOML).expect("harmonic potential is valid")
    }

    pub fn tilted_quartic() -> PotentialSpec {
        build_potential(TILTED_QUARTIC_TOML).expect("tilted quartic is valid")
    }
}
