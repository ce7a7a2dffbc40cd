//! The variational constants `c₁(p)`, `c₂(p)`, `c₃(p)`.
//!
//! Each constant is an infimum or supremum over the punctured `(s, t)` plane.
//! The objectives depend on `t` only through `t²`, so the search runs over the
//! half-plane `t >= 0` in compactified polar coordinates
//! `s = r cos θ`, `t = r sin θ`, `r = ρ/(1-ρ)` with `(ρ, θ) ∈ (0,1) × [0,π]`.
//! Candidates are a uniform grid in `(ρ, θ)`, the analytic boundary limits
//! (at the origin, at infinity and, for `c₃`, on the unit circle) and a
//! Nelder–Mead refinement started from the best grid cell.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::Params;

/// Default grid resolution per axis.
pub const DEFAULT_GRID: usize = 512;
/// Default evaluation budget for the local refinement stage.
pub const DEFAULT_BUDGET: usize = 2000;
/// Default relative tolerance.
pub const DEFAULT_TOL: f64 = 1e-6;

/// Where an estimate was attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Witness {
    Point { s: f64, t: f64 },
    /// Limit at the origin along the ray of angle `theta`.
    OriginDirectional { theta: f64 },
    /// Limit as `s² + t² → ∞`.
    Infinity,
    /// On `s² + t² = 1`, parameterized by `s`.
    UnitCircle { s: f64 },
}

/// A computed constant; `bracket.0 <= value <= bracket.1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub witness: Witness,
    pub bracket: (f64, f64),
    pub evals: usize,
    /// Set when a supremum could not be shown to stabilize.
    pub unbounded_unproven: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub grid: usize,
    pub budget: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { grid: DEFAULT_GRID, budget: DEFAULT_BUDGET }
    }
}

/// `(t²+s²+2s+1)^{p/2} - 1 - p s`, evaluated without cancellation near the origin.
pub fn numerator(p: f64, s: f64, t: f64) -> f64 {
    let x = 2.0 * s + s * s + t * t;
    (0.5 * p * x.ln_1p()).exp_m1() - p * s
}

pub(crate) fn g_raw(p: f64, s: f64, t: f64) -> f64 {
    let r2 = s * s + t * t;
    let q = (r2 + 2.0 * s + 1.0).max(0.0);
    numerator(p, s, t) / ((q.sqrt() + 1.0).powf(p - 2.0) * r2)
}

pub(crate) fn f1_raw(p: f64, s: f64, t: f64) -> f64 {
    numerator(p, s, t) / (s * s + t * t).powf(0.5 * p)
}

pub(crate) fn f2_raw(p: f64, s: f64, t: f64) -> f64 {
    numerator(p, s, t) / (s * s + t * t)
}

fn check_point(s: f64, t: f64) -> Result<()> {
    if !s.is_finite() || !t.is_finite() {
        return Err(Error::Domain(format!("non-finite point ({s}, {t})")));
    }
    if s == 0.0 && t == 0.0 {
        return Err(Error::Domain("the origin is a removable singularity; use the limit operations".into()));
    }
    Ok(())
}

/// `G(s, t)`.
pub fn eval_g(params: &Params, s: f64, t: f64) -> Result<f64> {
    check_point(s, t)?;
    Ok(g_raw(params.p(), s, t))
}

/// `F₁(s, t) = numerator/(s²+t²)^{p/2}`.
pub fn eval_f1(params: &Params, s: f64, t: f64) -> Result<f64> {
    check_point(s, t)?;
    Ok(f1_raw(params.p(), s, t))
}

/// `F₂(s, t) = numerator/(s²+t²)`.
pub fn eval_f2(params: &Params, s: f64, t: f64) -> Result<f64> {
    check_point(s, t)?;
    Ok(f2_raw(params.p(), s, t))
}

/// Directional limit of `G` at the origin: `(p(p-2)cos²θ + p)/2^{p-1}`.
pub fn origin_limit_g(params: &Params, theta: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain(format!("angle {theta} outside [0, π]")));
    }
    let p = params.p();
    let c = theta.cos();
    Ok((p * (p - 2.0) * c * c + p) / 2f64.powf(p - 1.0))
}

/// Directional limit of `F₂` at the origin: `(p/2)(1 + (p-2)cos²θ)`.
pub fn origin_limit_f2(params: &Params, theta: f64) -> f64 {
    let p = params.p();
    let c = theta.cos();
    0.5 * p * (1.0 + (p - 2.0) * c * c)
}

/// `h_p(s) = 2^{p/2}(s+1)^{p/2} - 1 - p s`, the restriction of `F₁` to the unit circle.
pub fn h_p(params: &Params, s: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("h_p argument {s} outside [-1, 1]")));
    }
    let p = params.p();
    Ok((2.0 * (s + 1.0)).powf(0.5 * p) - 1.0 - p * s)
}

/// Closed-form endpoints quoted alongside the constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormBounds {
    /// `p(p-1)/2^{p-1}`, upper bound for `c₁`.
    pub c1_upper: f64,
    /// `p/2^{p-1}`, lower bound for `c₂`.
    pub c2_lower: f64,
    /// `p(p-1)/2`, upper bound for `c₃`.
    pub c3_upper: f64,
    /// `min{p-1, 2^p-p-1}`, the unit-circle bound for `c₃`.
    pub c3_circle: f64,
}

pub fn closed_form_bounds(params: &Params) -> ClosedFormBounds {
    let p = params.p();
    ClosedFormBounds {
        c1_upper: p * (p - 1.0) / 2f64.powf(p - 1.0),
        c2_lower: p / 2f64.powf(p - 1.0),
        c3_upper: 0.5 * p * (p - 1.0),
        c3_circle: (p - 1.0).min(2f64.powf(p) - p - 1.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Sense {
    Min,
    Max,
}

impl Sense {
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Sense::Min => a < b,
            Sense::Max => a > b,
        }
    }
    fn sign(self) -> f64 {
        match self {
            Sense::Min => 1.0,
            Sense::Max => -1.0,
        }
    }
}

fn to_st(rho: f64, theta: f64) -> (f64, f64) {
    let r = rho / (1.0 - rho);
    (r * theta.cos(), r * theta.sin())
}

struct GridBest {
    value: f64,
    rho: f64,
    theta: f64,
    /// ρ index of the best cell, for boundary diagnostics.
    row: usize,
    evals: usize,
}

/// Exhaustive grid over cell-centred `ρ` and endpoint-inclusive `θ`.
fn grid_search<F>(n: usize, sense: Sense, rho_range: (f64, f64), f: &F) -> GridBest
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let (lo, hi) = rho_range;
    let rows: Vec<(f64, f64, usize)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let rho = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
            let mut best = (f64::NAN, 0.0);
            for j in 0..n {
                let theta = PI * j as f64 / (n - 1) as f64;
                let v = f(rho, theta);
                if v.is_finite() && (best.0.is_nan() || sense.better(v, best.0)) {
                    best = (v, theta);
                }
            }
            (best.0, best.1, i)
        })
        .collect();
    // sequential, index-ordered reduction: the first best cell wins ties
    let mut out = GridBest { value: f64::NAN, rho: 0.0, theta: 0.0, row: 0, evals: n * n };
    for (v, theta, i) in rows {
        if v.is_finite() && (out.value.is_nan() || sense.better(v, out.value)) {
            out.value = v;
            out.theta = theta;
            out.row = i;
            out.rho = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
        }
    }
    out
}

struct LocalResult {
    value: f64,
    x: [f64; 2],
    evals: usize,
}

/// Reflection/expansion/contraction simplex search, minimizing `f`.
fn nelder_mead<F>(f: &F, start: [f64; 2], step: [f64; 2], max_evals: usize) -> (LocalResult, bool)
where
    F: Fn([f64; 2]) -> f64,
{
    let counter = std::cell::Cell::new(0usize);
    let eval = |x: [f64; 2]| {
        counter.set(counter.get() + 1);
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut simplex = [
        (start, 0.0),
        ([start[0] + step[0], start[1]], 0.0),
        ([start[0], start[1] + step[1]], 0.0),
    ];
    for v in simplex.iter_mut() {
        v.1 = eval(v.0);
    }
    let mut converged = false;
    while counter.get() < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[2].1);
        let size = (0..2)
            .map(|k| (simplex[1].0[k] - simplex[0].0[k]).abs().max((simplex[2].0[k] - simplex[0].0[k]).abs()))
            .fold(0.0, f64::max);
        if (worst - best).abs() <= 1e-15 * best.abs().max(1e-300) || size < 1e-13 {
            converged = true;
            break;
        }
        let centroid = [(simplex[0].0[0] + simplex[1].0[0]) / 2.0, (simplex[0].0[1] + simplex[1].0[1]) / 2.0];
        let along = |c: f64| [centroid[0] + c * (simplex[2].0[0] - centroid[0]), centroid[1] + c * (simplex[2].0[1] - centroid[1])];
        let xr = along(-1.0);
        let fr = eval(xr);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = eval(xe);
            simplex[2] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[1].1 {
            simplex[2] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[2].1 {
                let x = along(-0.5);
                (x, eval(x))
            } else {
                let x = along(0.5);
                (x, eval(x))
            };
            if fc < simplex[2].1.min(fr) {
                simplex[2] = (xc, fc);
            } else {
                // shrink toward the best vertex
                let b = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    v.0 = [b[0] + 0.5 * (v.0[0] - b[0]), b[1] + 0.5 * (v.0[1] - b[1])];
                    v.1 = eval(v.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    (LocalResult { value: simplex[0].1, x: simplex[0].0, evals: counter.get() }, converged)
}

/// Repeated simplex searches from the incumbent until the improvement is
/// below `tol` relative; fails when the budget runs out first.
fn refine<F>(f: &F, sense: Sense, start: [f64; 2], start_value: f64, step: [f64; 2], tol: f64, budget: usize) -> Result<LocalResult>
where
    F: Fn([f64; 2]) -> f64,
{
    let signed = |x: [f64; 2]| sense.sign() * f(x);
    let mut best = LocalResult { value: start_value, x: start, evals: 0 };
    let mut step = step;
    loop {
        let remaining = budget.saturating_sub(best.evals);
        if remaining < 4 {
            return Err(Error::BudgetExhausted {
                lo: best.value.min(start_value),
                hi: best.value.max(start_value),
                evals: best.evals,
            });
        }
        let (local, converged) = nelder_mead(&signed, best.x, step, remaining);
        let value = sense.sign() * local.value;
        let evals = best.evals + local.evals;
        let change = (value - best.value).abs() / best.value.abs().max(1e-300);
        let improved = sense.better(value, best.value);
        if improved {
            best = LocalResult { value, x: local.x, evals };
        } else {
            best.evals = evals;
        }
        if converged && (!improved || change < tol) {
            return Ok(best);
        }
        if !converged && evals >= budget {
            return Err(Error::BudgetExhausted {
                lo: best.value.min(start_value),
                hi: best.value.max(start_value),
                evals,
            });
        }
        step = [step[0] * 0.25, step[1] * 0.25];
    }
}

struct Candidate {
    value: f64,
    witness: Witness,
    is_limit: bool,
}

/// Pick the extreme candidate; exact limits win ties against interior points.
fn select(sense: Sense, candidates: &[Candidate]) -> &Candidate {
    let mut best = &candidates[0];
    for c in &candidates[1..] {
        let tie = (c.value - best.value).abs() <= 1e-12 * best.value.abs().max(1e-300);
        if tie {
            if c.is_limit && !best.is_limit {
                best = c;
            }
        } else if sense.better(c.value, best.value) {
            best = c;
        }
    }
    best
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    Ok(())
}

struct Search {
    refined: LocalResult,
    coarse: f64,
    fine: GridBest,
}

fn search<F>(f: &F, sense: Sense, rho_range: (f64, f64), tol: f64, cfg: &SearchConfig) -> Result<Search>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    if cfg.grid < 4 {
        return Err(Error::Domain(format!("grid resolution {} is too small", cfg.grid)));
    }
    let coarse = grid_search((cfg.grid / 2).max(2), sense, rho_range, f);
    let fine = grid_search(cfg.grid, sense, rho_range, f);
    let (lo, hi) = rho_range;
    let clamp = |x: [f64; 2]| {
        let rho = x[0].clamp(lo + 1e-15, hi - 1e-15);
        f(rho, x[1])
    };
    let step = [(hi - lo) / cfg.grid as f64, PI / (cfg.grid - 1) as f64];
    let mut refined = refine(&clamp, sense, [fine.rho, fine.theta], fine.value, step, tol, cfg.budget)?;
    refined.x[0] = refined.x[0].clamp(lo + 1e-15, hi - 1e-15);
    refined.evals += coarse.evals + fine.evals;
    Ok(Search { refined, coarse: coarse.value, fine })
}

fn point_candidate(value: f64, x: [f64; 2]) -> Candidate {
    let (s, t) = to_st(x[0], x[1]);
    Candidate { value, witness: Witness::Point { s, t: t.abs() }, is_limit: false }
}

fn finish(sense: Sense, chosen: &Candidate, coarse: f64, tol: f64, evals: usize) -> Estimate {
    let v = chosen.value;
    let pad = tol * v.abs().max(1.0);
    let bracket = match sense {
        Sense::Min => (v - pad, coarse.max(v)),
        Sense::Max => (coarse.min(v), v + pad),
    };
    Estimate { value: v, witness: chosen.witness, bracket, evals, unbounded_unproven: false }
}

/// `c₁(p) = inf G` with the default search configuration.
pub fn c1(params: &Params, tol: f64) -> Result<Estimate> {
    c1_with(params, tol, &SearchConfig::default())
}

pub fn c1_with(params: &Params, tol: f64, cfg: &SearchConfig) -> Result<Estimate> {
    check_tol(tol)?;
    let p = params.p();
    let f = |rho: f64, theta: f64| {
        let (s, t) = to_st(rho, theta);
        g_raw(p, s, t)
    };
    let found = search(&f, Sense::Min, (0.0, 1.0), tol, cfg)?;
    let bounds = closed_form_bounds(params);
    let candidates = [
        point_candidate(found.refined.value, found.refined.x),
        // the directional limits are smallest along the s-axis
        Candidate { value: bounds.c1_upper, witness: Witness::OriginDirectional { theta: 0.0 }, is_limit: true },
        Candidate { value: 1.0, witness: Witness::Infinity, is_limit: true },
    ];
    let chosen = select(Sense::Min, &candidates);
    Ok(finish(Sense::Min, chosen, found.coarse, tol, found.refined.evals))
}

/// `c₂(p) = sup G` with the default search configuration.
pub fn c2(params: &Params, tol: f64) -> Result<Estimate> {
    c2_with(params, tol, &SearchConfig::default())
}

pub fn c2_with(params: &Params, tol: f64, cfg: &SearchConfig) -> Result<Estimate> {
    check_tol(tol)?;
    let p = params.p();
    let f = |rho: f64, theta: f64| {
        let (s, t) = to_st(rho, theta);
        g_raw(p, s, t)
    };
    let found = search(&f, Sense::Max, (0.0, 1.0), tol, cfg)?;
    // A maximizer in the outermost rows that beats the limit at infinity means
    // the supremum is still growing with r.
    let outer = found.fine.row + 1 >= cfg.grid - cfg.grid / 100;
    if outer && found.fine.value > 1.0 {
        return Err(Error::UnstableSupremum { lo: found.coarse, hi: found.refined.value });
    }
    let bounds = closed_form_bounds(params);
    let candidates = [
        point_candidate(found.refined.value, found.refined.x),
        Candidate { value: bounds.c2_lower, witness: Witness::OriginDirectional { theta: PI / 2.0 }, is_limit: true },
        Candidate { value: 1.0, witness: Witness::Infinity, is_limit: true },
    ];
    let chosen = select(Sense::Max, &candidates);
    Ok(finish(Sense::Max, chosen, found.coarse, tol, found.refined.evals))
}

/// `c₃(p) = min{inf_{s²+t²>=1} F₁, inf_{0<s²+t²<1} F₂}` with the default configuration.
pub fn c3(params: &Params, tol: f64) -> Result<Estimate> {
    c3_with(params, tol, &SearchConfig::default())
}

pub fn c3_with(params: &Params, tol: f64, cfg: &SearchConfig) -> Result<Estimate> {
    check_tol(tol)?;
    let p = params.p();
    // r = ρ/(1-ρ) >= 1 exactly when ρ >= 1/2
    let outer = |rho: f64, theta: f64| {
        let (s, t) = to_st(rho, theta);
        f1_raw(p, s, t)
    };
    let inner = |rho: f64, theta: f64| {
        let (s, t) = to_st(rho, theta);
        f2_raw(p, s, t)
    };
    let cfg_half = SearchConfig { grid: cfg.grid, budget: cfg.budget / 2 };
    let a = search(&outer, Sense::Min, (0.5, 1.0), tol, &cfg_half)?;
    let b = search(&inner, Sense::Min, (0.0, 0.5), tol, &cfg_half)?;

    // h_p is increasing on [-1, -1/2] and decreasing on [-1/2, 1]; sample it
    // anyway and keep the smallest value, endpoints included.
    let mut circle = (f64::INFINITY, 0.0);
    let samples = 2001;
    for i in 0..samples {
        let s = -1.0 + 2.0 * i as f64 / (samples - 1) as f64;
        let v = h_p(params, s)?;
        if v < circle.0 {
            circle = (v, s);
        }
    }
    let bounds = closed_form_bounds(params);
    let candidates = [
        point_candidate(a.refined.value, a.refined.x),
        point_candidate(b.refined.value, b.refined.x),
        Candidate { value: circle.0, witness: Witness::UnitCircle { s: circle.1 }, is_limit: true },
        Candidate { value: bounds.c3_upper, witness: Witness::OriginDirectional { theta: 0.0 }, is_limit: true },
        Candidate { value: 1.0, witness: Witness::Infinity, is_limit: true },
    ];
    let chosen = select(Sense::Min, &candidates);
    let evals = a.refined.evals + b.refined.evals + samples;
    Ok(finish(Sense::Min, chosen, a.coarse.min(b.coarse), tol, evals))
}

/// Re-evaluate the objective of an estimate at its witness.
pub fn witness_value(params: &Params, which: Constant, witness: &Witness) -> Result<f64> {
    match (which, *witness) {
        (Constant::C1 | Constant::C2, Witness::Point { s, t }) => eval_g(params, s, t),
        (Constant::C3, Witness::Point { s, t }) => {
            if s * s + t * t >= 1.0 {
                eval_f1(params, s, t)
            } else {
                eval_f2(params, s, t)
            }
        }
        (Constant::C1 | Constant::C2, Witness::OriginDirectional { theta }) => origin_limit_g(params, theta),
        (Constant::C3, Witness::OriginDirectional { theta }) => Ok(origin_limit_f2(params, theta)),
        (_, Witness::Infinity) => Ok(1.0),
        (Constant::C3, Witness::UnitCircle { s }) => h_p(params, s),
        (_, Witness::UnitCircle { s }) => eval_g(params, s, (1.0 - s * s).max(0.0).sqrt()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    C1,
    C2,
    C3,
}

/// First-order Richardson extrapolation from the last two samples of a
/// sequence taken at radii shrinking to zero.
pub fn richardson(radii: &[f64], values: &[f64]) -> Result<f64> {
    if radii.len() < 2 || radii.len() != values.len() {
        return Err(Error::Extrapolation("need at least two radii with matching values".into()));
    }
    let n = radii.len();
    let (r0, r1) = (radii[n - 2], radii[n - 1]);
    let (v0, v1) = (values[n - 2], values[n - 1]);
    Ok(v1 + (v1 - v0) * r1 / (r0 - r1))
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.len() < 2 {
        return Err(Error::Extrapolation("need at least two radii".into()));
    }
    if radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::Extrapolation(format!("radii {radii:?} must lie in (0, 1)")));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Extrapolation(format!("radii {radii:?} must be strictly decreasing")));
    }
    Ok(())
}

/// Monotone up to rounding noise of relative size `1e-12`.
fn monotone(values: &[f64]) -> bool {
    let slack = |w: &[f64]| 1e-12 * w[0].abs().max(w[1].abs());
    let up = values.windows(2).all(|w| w[1] >= w[0] - slack(w));
    let down = values.windows(2).all(|w| w[1] <= w[0] + slack(w));
    up || down
}

/// Extrapolated limit of `G` along the ray of angle `theta` as `r → 0`.
pub fn ray_limit_g(params: &Params, theta: f64, radii: &[f64]) -> Result<f64> {
    check_radii(radii)?;
    let p = params.p();
    let values: Vec<f64> = radii.iter().map(|&r| g_raw(p, r * theta.cos(), r * theta.sin())).collect();
    if !monotone(&values) {
        return Err(Error::Extrapolation(format!("non-monotone ray values {values:?}")));
    }
    richardson(radii, &values)
}

/// Extrapolated `liminf` of `F₂` at the origin from the per-radius minima over
/// a θ-grid; fails when the minima are not monotone or the extrapolated
/// limit falls below `p(p-1)/2 - 1e-3`.
pub fn f2_origin_liminf_check(params: &Params, radii: &[f64]) -> Result<f64> {
    check_radii(radii)?;
    let p = params.p();
    let thetas = 2001;
    let minima: Vec<f64> = radii
        .iter()
        .map(|&r| {
            (0..thetas)
                .map(|j| {
                    let th = PI * j as f64 / (thetas - 1) as f64;
                    f2_raw(p, r * th.cos(), r * th.sin())
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    if !monotone(&minima) {
        return Err(Error::Extrapolation(format!("per-radius minima are not monotone: {minima:?}")));
    }
    let limit = richardson(radii, &minima)?;
    let floor = closed_form_bounds(params).c3_upper;
    if limit < floor - 1e-3 {
        return Err(Error::Extrapolation(format!(
            "extrapolated liminf {limit} is below p(p-1)/2 = {floor} (minima {minima:?})"
        )));
    }
    Ok(limit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pr(p: f64) -> Params {
        Params::new(p, 2).unwrap()
    }

    #[test]
    fn g_hand_values() {
        let params = pr(1.5);
        assert!((eval_g(&params, -1.0, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((eval_g(&params, 1e12, 0.0).unwrap() - 1.0).abs() < 1e-5);
        let lim = 1.5 * 0.5 / 2f64.powf(0.5);
        assert!((eval_g(&params, 1e-6, 0.0).unwrap() - lim).abs() < 1e-4);
        assert!((lim - 0.530_330).abs() < 1e-6);
        assert!(eval_g(&params, 0.0, 0.0).is_err());
    }

    #[test]
    fn origin_limits() {
        let params = pr(1.5);
        assert!((origin_limit_g(&params, 0.0).unwrap() - 0.530_330_085_9).abs() < 1e-9);
        assert!((origin_limit_g(&params, PI / 2.0).unwrap() - 1.060_660_171_8).abs() < 1e-9);
        assert!(origin_limit_g(&params, 4.0).is_err());
        let near_two = pr(1.999_999);
        for th in [0.0, 1.0, 2.0, PI] {
            assert!((origin_limit_g(&near_two, th).unwrap() - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn h_p_values() {
        for p in [1.2, 1.5, 1.8] {
            let params = pr(p);
            assert!((h_p(&params, -0.5).unwrap() - p / 2.0).abs() < 1e-14);
            assert!((h_p(&params, -1.0).unwrap() - (p - 1.0)).abs() < 1e-14);
            assert!((h_p(&params, 1.0).unwrap() - (2f64.powf(p) - p - 1.0)).abs() < 1e-14);
        }
        assert!(h_p(&pr(1.5), 1.1).is_err());
    }

    #[test]
    fn estimates_respect_brackets() {
        for p in [1.2, 1.5, 1.8] {
            let params = pr(p);
            let b = closed_form_bounds(&params);
            let e1 = c1(&params, 1e-6).unwrap();
            assert!(e1.value > 0.0 && e1.value <= b.c1_upper + 1e-6);
            let e2 = c2(&params, 1e-6).unwrap();
            assert!(e2.value >= b.c2_lower - 1e-6);
            assert!(!e2.unbounded_unproven);
            let e3 = c3(&params, 1e-6).unwrap();
            assert!(e3.value > 0.0 && e3.value <= b.c3_upper.min(b.c3_circle) + 1e-6);
            for (e, which) in [(e1, Constant::C1), (e2, Constant::C2), (e3, Constant::C3)] {
                assert!(e.bracket.0 <= e.value && e.value <= e.bracket.1);
                let again = witness_value(&params, which, &e.witness).unwrap();
                assert!((again - e.value).abs() <= 1e-10 * e.value.abs(), "{which:?}: {again} vs {}", e.value);
            }
        }
    }

    #[test]
    fn c3_is_attained_on_the_unit_circle() {
        let e = c3(&pr(1.5), 1e-6).unwrap();
        assert_eq!(e.witness, Witness::UnitCircle { s: 1.0 });
        assert!((e.value - (2f64.powf(1.5) - 2.5)).abs() < 1e-14);
    }

    #[test]
    fn refinement_is_monotone() {
        let params = pr(1.4);
        let tol = 1e-6;
        let coarse = SearchConfig { grid: 128, budget: 2000 };
        let fine = SearchConfig { grid: 256, budget: 2000 };
        let (a, b) = (c1_with(&params, tol, &coarse).unwrap(), c1_with(&params, tol, &fine).unwrap());
        assert!(b.value <= a.value + tol);
        let (a, b) = (c2_with(&params, tol, &coarse).unwrap(), c2_with(&params, tol, &fine).unwrap());
        assert!(b.value >= a.value - tol);
        let (a, b) = (c3_with(&params, tol, &coarse).unwrap(), c3_with(&params, tol, &fine).unwrap());
        assert!(b.value <= a.value + tol);
    }

    #[test]
    fn tiny_budget_is_reported() {
        let cfg = SearchConfig { grid: 64, budget: 5 };
        match c1_with(&pr(1.5), 1e-6, &cfg) {
            Err(Error::BudgetExhausted { lo, hi, .. }) => assert!(lo <= hi),
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
        assert!(c1(&pr(1.5), 0.0).is_err());
    }

    #[test]
    fn f2_liminf_extrapolation() {
        let radii: Vec<f64> = (2..=6).map(|k| 10f64.powi(-k)).collect();
        let l = f2_origin_liminf_check(&pr(1.5), &radii).unwrap();
        assert!(l >= 0.375 - 1e-3);
        let l = f2_origin_liminf_check(&pr(1.1), &radii).unwrap();
        assert!(l >= 0.055 - 1e-3);
        assert!(f2_origin_liminf_check(&pr(1.5), &[1e-3, 1e-2]).is_err());
        assert!(f2_origin_liminf_check(&pr(1.5), &[1e-2]).is_err());
    }

    #[test]
    fn f2_vertical_slice_tends_to_half_p() {
        // ((t²+1)^{p/2} - 1)/t² = p/2 + (p/2)(p/2-1)/2 · t² + O(t⁴)
        let params = pr(1.5);
        for t in [1e-2, 1e-3, 1e-4] {
            let v = eval_f2(&params, 0.0, t).unwrap();
            let series = 0.75 + 0.75 * (-0.25) / 2.0 * t * t;
            assert!((v - series).abs() < 1e-8);
        }
    }

    #[test]
    fn ray_limits_match_closed_form() {
        let params = pr(1.5);
        let radii: Vec<f64> = (2..=6).map(|k| 10f64.powi(-k)).collect();
        for j in 0..=8 {
            let th = PI * j as f64 / 8.0;
            let l = ray_limit_g(&params, th, &radii).unwrap();
            assert!((l - origin_limit_g(&params, th).unwrap()).abs() < 1e-3);
        }
    }
}
