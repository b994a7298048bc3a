//! Minima of `F`, barrier costs, critical depths and Agmon distances.
//!
//! The cost of going from `x` to a set `A` is the lowest level `F` must
//! climb to on a path from `x` to `A`, measured from `F(x)`. Depths are
//! costs of each minimum to the set of deeper ones, always computed on `F`
//! (never on `V_eps`).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;

/// Two minima closer than this in `F` count as a tie.
pub const TIE_TOL: f64 = 1e-10;
/// Stopping tolerance on `|F'|` when polishing a minimum.
pub const NEWTON_TOL: f64 = 1e-12;
/// Target accuracy of refined barrier levels.
pub const BARRIER_TOL: f64 = 1e-8;

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub f: f64,
}

/// Minima ordered by decreasing depth, `x_0` the global minimum.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct WellStructure {
    pub minima: Vec<Minimum>,
    /// `depths[i] = d_{i+1} = C(x_{i+1}, {x_0, ..., x_i})`. `d_0` is infinite
    /// and not stored.
    pub depths: Vec<f64>,
    pub domain: (f64, f64),
    pub n_grid: usize,
    pub tolerances: WellTolerances,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
pub struct WellTolerances {
    pub grad: f64,
    pub tie: f64,
    pub barrier: f64,
}

impl Default for WellTolerances {
    fn default() -> Self {
        WellTolerances {
            grad: NEWTON_TOL,
            tie: TIE_TOL,
            barrier: BARRIER_TOL,
        }
    }
}

impl WellStructure {
    /// Number of non-global wells.
    pub fn n(&self) -> usize {
        self.depths.len()
    }

    /// `d_i`, with `d_0 = ∞`.
    pub fn depth(&self, i: usize) -> f64 {
        if i == 0 {
            f64::INFINITY
        } else {
            self.depths[i - 1]
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("well structure serializes")
    }
}

/// Agmon distance to a source set, sampled on a 1D grid.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct AgmonField {
    pub coords: Vec<f64>,
    pub dist: Vec<f64>,
    pub sources: Vec<f64>,
}

/// Rectangular grid geometry for 2D fields (row-major, `index = iy * nx + ix`).
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub hx: f64,
    pub hy: f64,
}

impl Grid2D {
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn point(&self, ix: usize, iy: usize) -> (f64, f64) {
        (self.x0 + ix as f64 * self.hx, self.y0 + iy as f64 * self.hy)
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let (x, y) = self.point(ix, iy);
                out.push(f(x, y));
            }
        }
        out
    }

    fn neighbours(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let ix = (i % self.nx) as isize;
        let iy = (i / self.nx) as isize;
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        (-1..=1isize)
            .flat_map(move |dy| (-1..=1isize).map(move |dx| (dx, dy)))
            .filter(|&(dx, dy)| dx != 0 || dy != 0)
            .filter_map(move |(dx, dy)| {
                let (x, y) = (ix + dx, iy + dy);
                (x >= 0 && y >= 0 && x < nx && y < ny).then(|| (y * nx + x) as usize)
            })
    }
}

/// Agmon distance on a 2D grid.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct AgmonField2D {
    pub grid: Grid2D,
    pub dist: Vec<f64>,
    pub sources: Vec<(usize, usize)>,
}

// ---------------------------------------------------------------------------
// minima

/// Minima of a function given with its derivative, sorted by value.
pub fn find_minima_fn(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    domain: (f64, f64),
    n_grid: usize,
) -> Result<Vec<Minimum>> {
    let xs = critical_minima(&df, domain, n_grid)?;
    finish_minima(xs.into_iter().map(|x| Minimum { x, f: f(x) }).collect())
}

fn critical_minima(df: &impl Fn(f64) -> f64, domain: (f64, f64), n_grid: usize) -> Result<Vec<f64>> {
    if n_grid < 100 {
        return Err(Error::InvalidArgument("n_grid must be at least 100".into()));
    }
    let (a, b) = domain;
    if !(a < b && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument("bad domain".into()));
    }
    let h = (b - a) / (n_grid - 1) as f64;
    let xs: Vec<f64> = (0..n_grid).map(|i| a + i as f64 * h).collect();
    let mut out = Vec::new();
    let mut last_neg: Option<usize> = None;
    for (i, &x) in xs.iter().enumerate() {
        let g = df(x);
        if g < 0.0 {
            last_neg = Some(i);
        } else if g > 0.0 {
            if let Some(j) = last_neg.take() {
                out.push(bisect_root(df, xs[j], x));
            }
        }
    }
    Ok(out)
}

fn finish_minima(mut out: Vec<Minimum>) -> Result<Vec<Minimum>> {
    if out.is_empty() {
        return Err(Error::NoMinimum);
    }
    out.sort_by(|p, q| p.f.total_cmp(&q.f));
    if out.len() > 1 && (out[1].f - out[0].f).abs() < TIE_TOL {
        return Err(Error::TieAtGlobalMin {
            gap: (out[1].f - out[0].f).abs(),
        });
    }
    Ok(out)
}

/// Root of an increasing sign change `df(lo) < 0 < df(hi)`.
fn bisect_root(df: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        let g = df(mid);
        if g.abs() <= NEWTON_TOL {
            return mid;
        }
        if g < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Local minima of `F` on `domain`, sorted by `F`.
///
/// In 3D the radial profile is scanned through its even extension, so a
/// minimum at the origin is found as well.
pub fn find_minima(spec: &PotentialSpec, domain: (f64, f64), n_grid: usize) -> Result<Vec<Minimum>> {
    if spec.dimension == 3 {
        let l = domain.0.abs().max(domain.1.abs());
        let xs = critical_minima(&|x: f64| x.signum() * spec.grad(x.abs()), (-l, l), n_grid)?;
        // fold mirror images back onto r >= 0
        let mut out: Vec<Minimum> = Vec::new();
        for x in xs {
            let r = x.abs();
            if !out.iter().any(|o| (o.x - r).abs() < 1e-9) {
                out.push(Minimum { x: r, f: spec.f(r) });
            }
        }
        return finish_minima(out);
    }
    find_minima_fn(|x| spec.f(x), |x| spec.grad(x), domain, n_grid)
}

// ---------------------------------------------------------------------------
// barrier costs

/// Largest value of `f` on `[lo, hi]`: dense sampling, then golden-section
/// refinement around the best sample.
pub fn max_on_interval(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, n_grid: usize) -> f64 {
    let m = n_grid.max(2);
    let h = (hi - lo) / (m - 1) as f64;
    let mut best = f64::NEG_INFINITY;
    let mut k = 0;
    for i in 0..m {
        let x = if i == m - 1 { hi } else { lo + i as f64 * h };
        let v = f(x);
        if v > best {
            best = v;
            k = i;
        }
    }
    if h == 0.0 {
        return best;
    }
    let a = (lo + (k as f64 - 1.0) * h).max(lo);
    let b = (lo + (k as f64 + 1.0) * h).min(hi);
    best.max(golden_max(f, a, b))
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = fc.max(fd).max(f(a)).max(f(b));
    while (b - a).abs() > 1e-10 * (1.0 + a.abs().max(b.abs())) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        best = best.max(fc).max(fd);
    }
    best
}

/// `min_a (max F on [x, a]) - F(x)` for an arbitrary 1D function.
pub fn barrier_cost_fn(f: impl Fn(f64) -> f64, x: f64, targets: &[f64], n_grid: usize) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::OutOfDomain(x));
    }
    if targets.is_empty() {
        return Err(Error::InvalidArgument("empty target set".into()));
    }
    let fx = f(x);
    let mut best = f64::INFINITY;
    for &a in targets {
        if !a.is_finite() {
            return Err(Error::OutOfDomain(a));
        }
        if a == x {
            return Ok(0.0);
        }
        let (lo, hi) = if a < x { (a, x) } else { (x, a) };
        let top = max_on_interval(&f, lo, hi, n_grid);
        best = best.min(top - fx);
    }
    Ok(best.max(0.0))
}

/// Barrier cost of `x` to `targets` for the spec's `F` (radial in 3D).
pub fn barrier_cost(spec: &PotentialSpec, x: f64, targets: &[f64], n_grid: usize) -> Result<f64> {
    if spec.dimension == 3 && (x < 0.0 || targets.iter().any(|a| *a < 0.0)) {
        return Err(Error::OutOfDomain(x.min(targets.iter().cloned().fold(0.0, f64::min))));
    }
    barrier_cost_fn(|u| spec.f(u), x, targets, n_grid)
}

#[derive(Copy, Clone, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on the key, index as tie breaker for determinism
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimax path level on an 8-connected grid (path cost = max node value),
/// returned as `level - F(x)`.
pub fn barrier_cost_grid(grid: &Grid2D, values: &[f64], x: (usize, usize), targets: &[(usize, usize)]) -> Result<f64> {
    check_field(grid, values, x, targets)?;
    let src = grid.index(x.0, x.1);
    let is_target = target_mask(grid, targets);
    if is_target[src] {
        return Ok(0.0);
    }
    let mut level = vec![f64::INFINITY; grid.len()];
    let mut heap = BinaryHeap::new();
    level[src] = values[src];
    heap.push(Entry(values[src], src));
    while let Some(Entry(l, p)) = heap.pop() {
        if l > level[p] {
            continue;
        }
        if is_target[p] {
            return Ok(l - values[src]);
        }
        for q in grid.neighbours(p) {
            let cand = l.max(values[q]);
            if cand < level[q] {
                level[q] = cand;
                heap.push(Entry(cand, q));
            }
        }
    }
    Err(Error::InvalidArgument("no target reachable".into()))
}

/// Exhaustive minimax over chordless 8-connected paths (test oracle).
///
/// Any path can be shortcut to a chordless one (no cell adjacent to an
/// earlier cell other than its predecessor) without raising its maximum,
/// so enumerating chordless paths is exact. Branches whose running maximum
/// already reaches the best complete path are cut.
pub fn barrier_cost_bruteforce(
    grid: &Grid2D,
    values: &[f64],
    x: (usize, usize),
    targets: &[(usize, usize)],
) -> Result<f64> {
    if grid.nx > 7 || grid.ny > 7 {
        return Err(Error::TooLarge(grid.len()));
    }
    check_field(grid, values, x, targets)?;
    let src = grid.index(x.0, x.1);
    let is_target = target_mask(grid, targets);
    if is_target[src] {
        return Ok(0.0);
    }
    // closed neighbourhoods as bit masks
    let closed: Vec<u64> = (0..grid.len())
        .map(|p| grid.neighbours(p).fold(1u64 << p, |m, q| m | (1u64 << q)))
        .collect();
    struct Search<'a> {
        grid: &'a Grid2D,
        values: &'a [f64],
        is_target: &'a [bool],
        closed: &'a [u64],
        best: f64,
    }
    impl Search<'_> {
        // `blocked`: cells on or next to the path before `p`
        fn dfs(&mut self, p: usize, blocked: u64, cur: f64) {
            if cur >= self.best {
                return;
            }
            if self.is_target[p] {
                self.best = cur;
                return;
            }
            let blocked_next = blocked | self.closed[p];
            for q in self.grid.neighbours(p) {
                if blocked & (1u64 << q) == 0 && q != p {
                    self.dfs(q, blocked_next, cur.max(self.values[q]));
                }
            }
        }
    }
    let mut search = Search {
        grid,
        values,
        is_target: &is_target,
        closed: &closed,
        best: f64::INFINITY,
    };
    search.dfs(src, 0, values[src]);
    if search.best.is_infinite() {
        return Err(Error::InvalidArgument("no target reachable".into()));
    }
    Ok(search.best - values[src])
}

fn check_field(grid: &Grid2D, values: &[f64], x: (usize, usize), targets: &[(usize, usize)]) -> Result<()> {
    if values.len() != grid.len() || grid.is_empty() {
        return Err(Error::InvalidArgument("field size does not match grid".into()));
    }
    if targets.is_empty() {
        return Err(Error::InvalidArgument("empty target set".into()));
    }
    for &(ix, iy) in std::iter::once(&x).chain(targets) {
        if ix >= grid.nx || iy >= grid.ny {
            return Err(Error::OutOfDomain(grid.index(ix, iy) as f64));
        }
    }
    Ok(())
}

fn target_mask(grid: &Grid2D, targets: &[(usize, usize)]) -> Vec<bool> {
    let mut m = vec![false; grid.len()];
    for &(ix, iy) in targets {
        m[grid.index(ix, iy)] = true;
    }
    m
}

/// Orders the minima and computes the critical depths.
///
/// Greedy: the next minimum is the one with the largest cost to the set
/// already chosen, so the depths come out non-increasing; equal depths
/// are rejected.
pub fn well_structure(spec: &PotentialSpec, domain: (f64, f64), n_grid: usize) -> Result<WellStructure> {
    let minima = find_minima(spec, domain, n_grid)?;
    let mut chosen = vec![minima[0]];
    let mut rest: Vec<Minimum> = minima[1..].to_vec();
    let mut depths = Vec::new();
    while !rest.is_empty() {
        let xs: Vec<f64> = chosen.iter().map(|m| m.x).collect();
        let mut costs = Vec::with_capacity(rest.len());
        for m in &rest {
            costs.push(barrier_cost(spec, m.x, &xs, n_grid)?);
        }
        let mut order: Vec<usize> = (0..rest.len()).collect();
        order.sort_by(|&i, &j| costs[j].total_cmp(&costs[i]));
        let top = order[0];
        if order.len() > 1 && (costs[top] - costs[order[1]]).abs() < TIE_TOL {
            return Err(Error::DegenerateDepths(costs[top]));
        }
        if let Some(&prev) = depths.last() {
            if prev - costs[top] < TIE_TOL {
                return Err(Error::DegenerateDepths(costs[top]));
            }
        }
        depths.push(costs[top]);
        chosen.push(rest.remove(top));
    }
    Ok(WellStructure {
        minima: chosen,
        depths,
        domain,
        n_grid,
        tolerances: WellTolerances::default(),
    })
}

/// Default scan window for [`well_structure`]: the core plus the bridge.
pub fn default_domain(spec: &PotentialSpec) -> (f64, f64) {
    let l = spec.scan_half_width();
    if spec.dimension == 3 {
        (0.0, l)
    } else {
        (-l, l)
    }
}

// ---------------------------------------------------------------------------
// Agmon distance

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol || (b - a).abs() < 1e-13 * (1.0 + a.abs()) {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(Error::QuadratureFailure);
        }
        Ok(rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 60)
}

/// Integrates `sqrt(V)` from `a` to `b` piecewise on a uniform partition, so
/// that narrow features are not missed by the first Simpson panel.
fn sqrt_v_integral(spec: &PotentialSpec, a: f64, b: f64, tol: f64) -> Result<f64> {
    let w = spec.weight().sqrt();
    let g = |u: f64| w * spec.grad(u).abs();
    let pieces = ((b - a).abs() / 0.05).ceil().clamp(1.0, 4096.0) as usize;
    let h = (b - a) / pieces as f64;
    let mut sum = 0.0;
    for i in 0..pieces {
        let lo = a + i as f64 * h;
        let hi = if i + 1 == pieces { b } else { lo + h };
        sum += adaptive_simpson(&g, lo, hi, tol / pieces as f64)?;
    }
    Ok(sum)
}

/// `min_s |∫_x^s sqrt(V)|`: in 1D the straight path is optimal.
pub fn agmon_distance(spec: &PotentialSpec, x: f64, sources: &[f64]) -> Result<f64> {
    if sources.is_empty() {
        return Err(Error::InvalidArgument("empty source set".into()));
    }
    let mut best = f64::INFINITY;
    for &s in sources {
        let d = sqrt_v_integral(spec, x, s, 1e-8)?.abs();
        best = best.min(d);
    }
    Ok(best)
}

/// Agmon distance to `sources` at every node of a sorted 1D grid.
///
/// A single cumulative integral through nodes and sources gives all
/// distances in one sweep.
pub fn agmon_field(spec: &PotentialSpec, grid: &[f64], sources: &[f64]) -> Result<AgmonField> {
    if sources.is_empty() || grid.is_empty() {
        return Err(Error::InvalidArgument("empty grid or source set".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
    }
    // merged, sorted abscissae; tag < 0 marks a grid node
    let mut pts: Vec<(f64, isize)> = grid.iter().enumerate().map(|(i, &x)| (x, -(i as isize) - 1)).collect();
    pts.extend(sources.iter().enumerate().map(|(j, &s)| (s, j as isize)));
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    let w = spec.weight().sqrt();
    let g = |u: f64| w * spec.grad(u).abs();
    let mut cum = vec![0.0; pts.len()];
    for k in 1..pts.len() {
        let (a, b) = (pts[k - 1].0, pts[k].0);
        let seg = if b > a {
            adaptive_simpson(&g, a, b, 1e-12 * (1.0 + (b - a)))?
        } else {
            0.0
        };
        cum[k] = cum[k - 1] + seg;
    }
    let mut node_cum = vec![0.0; grid.len()];
    let mut src_cum = vec![0.0; sources.len()];
    for (k, &(_, tag)) in pts.iter().enumerate() {
        if tag < 0 {
            node_cum[(-tag - 1) as usize] = cum[k];
        } else {
            src_cum[tag as usize] = cum[k];
        }
    }
    let dist = node_cum
        .iter()
        .zip(grid)
        .map(|(c, x)| {
            if sources.contains(x) {
                0.0
            } else {
                src_cum.iter().map(|s| (c - s).abs()).fold(f64::INFINITY, f64::min)
            }
        })
        .collect();
    Ok(AgmonField {
        coords: grid.to_vec(),
        dist,
        sources: sources.to_vec(),
    })
}

/// Dijkstra on an 8-connected grid with edge weight
/// `(sqrt(V(p)) + sqrt(V(q))) / 2 * |p - q|`.
pub fn agmon_field_2d(grid: &Grid2D, v: &[f64], sources: &[(usize, usize)]) -> Result<AgmonField2D> {
    if v.len() != grid.len() || grid.is_empty() || sources.is_empty() {
        return Err(Error::InvalidArgument("bad grid, field or sources".into()));
    }
    if v.iter().any(|x| *x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidArgument("V must be finite and non-negative".into()));
    }
    let sq: Vec<f64> = v.iter().map(|x| x.sqrt()).collect();
    let mut dist = vec![f64::INFINITY; grid.len()];
    let mut heap = BinaryHeap::new();
    for &(ix, iy) in sources {
        if ix >= grid.nx || iy >= grid.ny {
            return Err(Error::OutOfDomain(grid.index(ix, iy) as f64));
        }
        let i = grid.index(ix, iy);
        dist[i] = 0.0;
        heap.push(Entry(0.0, i));
    }
    while let Some(Entry(d, p)) = heap.pop() {
        if d > dist[p] {
            continue;
        }
        let (px, py) = ((p % grid.nx) as f64, (p / grid.nx) as f64);
        for q in grid.neighbours(p) {
            let (qx, qy) = ((q % grid.nx) as f64, (q / grid.nx) as f64);
            let len = ((qx - px) * grid.hx).hypot((qy - py) * grid.hy);
            let cand = d + 0.5 * (sq[p] + sq[q]) * len;
            if cand < dist[q] {
                dist[q] = cand;
                heap.push(Entry(cand, q));
            }
        }
    }
    Ok(AgmonField2D {
        grid: *grid,
        dist,
        sources: sources.to_vec(),
    })
}

/// Largest excess of the discrete slope of the field over `sqrt(V)`.
///
/// Non-positive (up to quadrature error) when `|∇d| <= sqrt(V)` holds.
pub fn eikonal_excess(spec: &PotentialSpec, field: &AgmonField) -> f64 {
    let w = spec.weight().sqrt();
    field
        .coords
        .windows(2)
        .zip(field.dist.windows(2))
        .map(|(x, d)| {
            let slope = (d[1] - d[0]).abs() / (x[1] - x[0]);
            let bound = max_on_interval(&|u: f64| w * spec.grad(u).abs(), x[0], x[1], 8);
            slope - bound
        })
        .fold(f64::NEG_INFINITY, f64::max)
}
