//! Tensor-product quadrature over annuli (and cylinder-annuli) in `R^N`.
//!
//! A rule is the product of a composite radial Gauss–Legendre rule carrying the
//! Jacobian `r^{k-1}`, a rule on the unit sphere `S^{k-1}`, and an optional
//! Gauss–Legendre box rule for trailing coordinates. Nodes are generated
//! lazily in a fixed order so that even very fine rules never materialize
//! the full node list.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::Params;

/// Largest ambient dimension handled by the quadrature and field code.
pub const MAX_DIM: usize = 4;

/// A point of `R^N` padded with zeros to [`MAX_DIM`].
pub type Point = [f64; MAX_DIM];

const CHUNK: usize = 4096;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, cached per order.
pub fn gauss_legendre(n: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&n) {
        return rule.clone();
    }
    let rule = Arc::new(compute_gauss_legendre(n));
    cache.lock().unwrap().insert(n, rule.clone());
    rule
}

fn compute_gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        // Tricomi's initial guess, then Newton on the three-term recurrence.
        let theta = PI * (4.0 * i as f64 + 3.0) / (4.0 * nf + 2.0);
        let mut z = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-16 * z.abs().max(1.0) {
                let (_, d) = legendre_with_derivative(n, z);
                dp = d;
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Tensor-product rule; see the module docs.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    dim: usize,
    level: u32,
    /// Dimension of the radial block (the `x'` part).
    radial_dim: usize,
    radial: Vec<(f64, f64)>,
    sphere: Vec<(Point, f64)>,
    /// Trailing-coordinate nodes (points in `R^{N-k}`) and weights.
    cross: Vec<(Point, f64)>,
}

/// Radial node count at a level.
pub fn radial_nodes(level: u32) -> usize {
    16 << level
}

/// Finest level `integrate_to_tol` will try for dimension `n`.
pub fn level_cap(n: usize) -> u32 {
    match n {
        0..=2 => 7,
        3 => 4,
        _ => 3,
    }
}

fn check_annulus(r_in: f64, r_out: f64, level: u32) -> Result<()> {
    if !(r_in > 0.0 && r_out > r_in && r_out.is_finite()) {
        return Err(Error::Domain(format!("annulus radii ({r_in}, {r_out}) must satisfy 0 < r_in < r_out")));
    }
    if level < 1 {
        return Err(Error::Domain("quadrature level must be at least 1".into()));
    }
    Ok(())
}

/// Composite Gauss–Legendre rule on `[r_in, r_out]` with breakpoints at the
/// midpoint, where the radial profiles of the builtin fields have their
/// critical point, and at `r = 1`, where `|ln r|` has a kink.
fn radial_rule(k: usize, r_in: f64, r_out: f64, level: u32) -> Vec<(f64, f64)> {
    let gl = gauss_legendre(radial_nodes(level) / 2);
    let mid = 0.5 * (r_out + r_in);
    let mut cuts = vec![r_in, mid, r_out];
    let gap = 1e-3 * (r_out - r_in);
    if 1.0 > r_in + gap && 1.0 < r_out - gap && (1.0 - mid).abs() > gap {
        cuts.push(1.0);
        cuts.sort_by(f64::total_cmp);
    }
    let mut out = Vec::with_capacity((cuts.len() - 1) * gl.0.len());
    for pair in cuts.windows(2) {
        let half = 0.5 * (pair[1] - pair[0]);
        let centre = 0.5 * (pair[0] + pair[1]);
        for (&z, &w) in gl.0.iter().zip(&gl.1) {
            let r = centre + half * z;
            out.push((r, w * half * r.powi(k as i32 - 1)));
        }
    }
    out
}

fn circle(m: usize) -> Vec<(f64, f64)> {
    (0..m)
        .map(|j| (2.0 * PI * j as f64 / m as f64, 2.0 * PI / m as f64))
        .collect()
}

fn sphere_rule(k: usize, level: u32) -> Result<Vec<(Point, f64)>> {
    let scale = 1usize << level;
    let mut out = Vec::new();
    match k {
        2 => {
            for (phi, w) in circle(32 * scale) {
                out.push(([phi.cos(), phi.sin(), 0.0, 0.0], w));
            }
        }
        3 => {
            // Gauss–Legendre in the polar angle itself: integrands like
            // |x₁ + i x₂|^p are far smoother in θ than in cos θ at the poles.
            let gl = gauss_legendre(8 * scale);
            let az = circle(16 * scale);
            for (&z, &wz) in gl.0.iter().zip(&gl.1) {
                let th = 0.5 * PI * (z + 1.0);
                let (sn, c) = th.sin_cos();
                for &(phi, wp) in &az {
                    out.push(([sn * phi.cos(), sn * phi.sin(), c, 0.0], 0.5 * PI * wz * sn * wp));
                }
            }
        }
        4 => {
            // Hopf coordinates (cos α e^{iφ₁}, sin α e^{iφ₂}), density sin α cos α.
            let gl = gauss_legendre(4 * scale);
            let az = circle(8 * scale);
            for (&z, &wz) in gl.0.iter().zip(&gl.1) {
                let al = 0.25 * PI * (z + 1.0);
                let (b, a) = al.sin_cos();
                for &(p1, w1) in &az {
                    for &(p2, w2) in &az {
                        out.push((
                            [a * p1.cos(), a * p1.sin(), b * p2.cos(), b * p2.sin()],
                            0.25 * PI * wz * a * b * w1 * w2,
                        ));
                    }
                }
            }
        }
        _ => return Err(Error::UnsupportedDimension(k)),
    }
    Ok(out)
}

/// Gauss–Legendre box rule on `[-h, h]^m` with `16·2^level` nodes per axis.
fn box_rule(m: usize, half_width: f64, level: u32) -> Vec<(Point, f64)> {
    let gl = gauss_legendre(radial_nodes(level));
    let mut out = vec![([0.0; MAX_DIM], 1.0)];
    for axis in 0..m {
        let mut next = Vec::with_capacity(out.len() * gl.0.len());
        for (pt, w) in &out {
            for (&z, &wz) in gl.0.iter().zip(&gl.1) {
                let mut q = *pt;
                q[axis] = half_width * z;
                next.push((q, w * wz * half_width));
            }
        }
        out = next;
    }
    out
}

/// Tensor rule on the annulus `r_in < |x| < r_out` in `R^N`, `N ∈ {2, 3, 4}`.
pub fn annulus_rule(params: &Params, r_in: f64, r_out: f64, level: u32) -> Result<QuadratureRule> {
    annulus_rule_dim(params.dim(), r_in, r_out, level)
}

pub(crate) fn annulus_rule_dim(n: usize, r_in: f64, r_out: f64, level: u32) -> Result<QuadratureRule> {
    if !(2..=MAX_DIM).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    check_annulus(r_in, r_out, level)?;
    Ok(QuadratureRule {
        dim: n,
        level,
        radial_dim: n,
        radial: radial_rule(n, r_in, r_out, level),
        sphere: sphere_rule(n, level)?,
        cross: vec![([0.0; MAX_DIM], 1.0)],
    })
}

/// Rule on `{r_in < |x'| < r_out} × [-h, h]^{N-k}` for the split `x = (x', x'')`.
pub fn cylinder_rule(n: usize, k: usize, r_in: f64, r_out: f64, half_width: f64, level: u32) -> Result<QuadratureRule> {
    if !(2..=MAX_DIM).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    if k < 2 || k > n {
        return Err(Error::Domain(format!("split k = {k} outside 2..={n}")));
    }
    check_annulus(r_in, r_out, level)?;
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::Domain(format!("box half-width {half_width} must be positive")));
    }
    Ok(QuadratureRule {
        dim: n,
        level,
        radial_dim: k,
        radial: radial_rule(k, r_in, r_out, level),
        sphere: sphere_rule(k, level)?,
        cross: box_rule(n - k, half_width, level),
    })
}

impl QuadratureRule {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.radial.len() * self.sphere.len() * self.cross.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node `i` and its (positive) weight.
    pub fn node(&self, i: usize) -> (Point, f64) {
        let nc = self.cross.len();
        let ns = self.sphere.len();
        let (ic, rest) = (i % nc, i / nc);
        let (is, ir) = (rest % ns, rest / ns);
        let (r, wr) = self.radial[ir];
        let (dir, ws) = &self.sphere[is];
        let (tail, wc) = &self.cross[ic];
        let mut x = [0.0; MAX_DIM];
        for (j, xj) in x.iter_mut().enumerate().take(self.radial_dim) {
            *xj = r * dir[j];
        }
        for j in self.radial_dim..self.dim {
            x[j] = tail[j - self.radial_dim];
        }
        (x, wr * ws * wc)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    pub fn weight_sum(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for (_, w) in self.nodes() {
            acc.add(w);
        }
        acc.value()
    }
}

/// `Σ wᵢ f(xᵢ)` with compensated summation in node order.
pub fn integrate<F>(rule: &QuadratureRule, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    integrate_many(rule, |x| [f(x)]).map(|[v]| v)
}

/// Several integrands over one rule in a single sweep.
///
/// Integrand values may be computed in parallel, but accumulation always
/// runs single-threaded in node order, so the result is bit-stable.
pub fn integrate_many<const K: usize, F>(rule: &QuadratureRule, f: F) -> Result<[f64; K]>
where
    F: Fn(&[f64]) -> [f64; K] + Sync,
{
    let n = rule.len();
    let dim = rule.dim();
    let mut acc = [CompensatedSum::new(); K];
    let mut start = 0;
    while start < n {
        let end = (start + CHUNK).min(n);
        let values: Vec<(f64, [f64; K])> = (start..end)
            .into_par_iter()
            .map(|i| {
                let (x, w) = rule.node(i);
                (w, f(&x[..dim]))
            })
            .collect();
        for (offset, (w, vals)) in values.iter().enumerate() {
            for (a, v) in acc.iter_mut().zip(vals) {
                if !v.is_finite() {
                    let (x, _) = rule.node(start + offset);
                    return Err(Error::NonFiniteIntegrand { index: start + offset, point: x[..dim].to_vec() });
                }
                a.add(w * v);
            }
        }
        start = end;
    }
    Ok(acc.map(|a| a.value()))
}

/// Values at the converged level, the values one level coarser, and the level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Converged<const K: usize> {
    pub values: [f64; K],
    pub previous: [f64; K],
    pub level: u32,
}

impl<const K: usize> Converged<K> {
    /// `|values[i] - previous[i]|`, the quadrature error estimate of component `i`.
    pub fn change(&self, i: usize) -> f64 {
        (self.values[i] - self.previous[i]).abs()
    }
}

/// Refine a family of rules level by level until every component changes by
/// less than `tol·(|value| + 1e-30)` between consecutive levels.
pub fn converge_many<const K: usize, R, F>(make_rule: R, f: F, tol: f64, cap: u32) -> Result<Converged<K>>
where
    R: Fn(u32) -> Result<QuadratureRule>,
    F: Fn(&[f64]) -> [f64; K] + Sync,
{
    converge_selected(make_rule, f, tol, cap, [true; K])
}

/// As [`converge_many`], but only components with `watch[i]` set take part
/// in the stopping test; the others ride along on the same rules.
pub fn converge_selected<const K: usize, R, F>(make_rule: R, f: F, tol: f64, cap: u32, watch: [bool; K]) -> Result<Converged<K>>
where
    R: Fn(u32) -> Result<QuadratureRule>,
    F: Fn(&[f64]) -> [f64; K] + Sync,
{
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    let rel = |a: f64, b: f64| (b - a).abs() / (b.abs() + 1e-30);
    let mut previous = integrate_many(&make_rule(1)?, &f)?;
    let mut current = previous;
    for level in 2..=cap {
        current = integrate_many(&make_rule(level)?, &f)?;
        let done = (0..K).filter(|&i| watch[i]).all(|i| rel(previous[i], current[i]) < tol);
        if done {
            return Ok(Converged { values: current, previous, level });
        }
        if level < cap {
            previous = current;
        }
    }
    // report the watched component that failed worst
    let worst = (0..K)
        .filter(|&i| watch[i])
        .max_by(|&i, &j| rel(previous[i], current[i]).total_cmp(&rel(previous[j], current[j])))
        .unwrap_or(0);
    Err(Error::NonConvergence { level: cap, previous: previous[worst], last: current[worst] })
}

/// Level-doubling integration of `f` over the annulus until converged to `tol`.
pub fn integrate_to_tol<F>(params: &Params, r_in: f64, r_out: f64, f: F, tol: f64) -> Result<(f64, u32)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = params.dim();
    let c = converge_many(|l| annulus_rule_dim(n, r_in, r_out, l), |x| [f(x)], tol, level_cap(n))?;
    Ok((c.values[0], c.level))
}

/// Surface area of the unit sphere `S^{N-1}`.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 2.0) * sphere_area(n - 2),
    }
}

/// Volume of the annulus `r_in < |x| < r_out` in `R^N`.
pub fn annulus_volume(n: usize, r_in: f64, r_out: f64) -> f64 {
    sphere_area(n) * (r_out.powi(n as i32) - r_in.powi(n as i32)) / n as f64
}
