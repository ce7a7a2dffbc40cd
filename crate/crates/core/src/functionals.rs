//! The Hardy functional, its kernel representation and the remainder
//! estimates, evaluated by quadrature over the support of a test field.
//!
//! All integrals belonging to one `(u, A)` case are computed on the same rule
//! in one sweep. Gradient powers `|∇u|^p` are only Hölder continuous where
//! `∇u` vanishes, so separately converged integrals would each carry an
//! algebraic quadrature error; on a shared rule, exact pointwise relations
//! between the integrands survive quadrature unchanged.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{self, magnetic_eval, Potential, PotentialKind, ScalarField};
use crate::integrate::{self, annulus_rule, converge_selected, level_cap, MAX_DIM};
use crate::kernel::{cnorm, kernel_value, sandwich_from_norms, Params};

/// Outcome of one verification case.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs/rhs`, absent when `rhs <= 0`.
    pub ratio: Option<f64>,
    pub constant_used: f64,
    /// `lhs - constant_used·rhs`.
    pub margin: f64,
    pub slack: f64,
    pub quadrature_level: u32,
    pub field_name: String,
    pub potential_name: String,
    pub pass: bool,
}

impl VerificationReport {
    fn new(lhs: f64, rhs: f64, constant: f64, slack: f64, level: u32, u: &ScalarField, a: &Potential) -> Self {
        Self {
            lhs,
            rhs,
            ratio: (rhs > 0.0).then(|| lhs / rhs),
            constant_used: constant,
            margin: lhs - constant * rhs,
            slack,
            quadrature_level: level,
            field_name: u.name().to_string(),
            potential_name: a.name(),
            pass: false,
        }
    }
}

/// Slack for inequality checks: `1e-6·(sum of both sides) + 10·tol`.
pub fn slack(a: f64, b: f64, tol: f64) -> f64 {
    1e-6 * (a.abs() + b.abs()) + 10.0 * tol
}

/// Every integral needed for one `(u, A)` pair, on a common rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseIntegrals {
    /// `∫|∇_A u|^p`.
    pub gradient: f64,
    /// `∫|u|^p/|x|^p`.
    pub mass: f64,
    /// `∫K_p(∇_A u, |x|^{-a}∇_A(u|x|^a))`, `a = (N-p)/p`.
    pub kernel: f64,
    /// `∫(|∇_A u| + a|u|/|x|)^{p-2}|x|^{-2a}|∇_A(u|x|^a)|²`.
    pub rem: f64,
    /// The min-form remainder.
    pub min_form: f64,
    /// Change of `min_form` over the last refinement. Its integrand has a kink
    /// along the surface where the two branches meet, so it converges more
    /// slowly than the rest and does not take part in the stopping test.
    pub min_form_change: f64,
    /// `∫|u|^p/(|x|^p(1 + |ln|x||² + |ln|x||^p))`.
    pub log_mass: f64,
    /// `H_{A,p}(u) = gradient - ((N-p)/p)^p mass`.
    pub hardy: f64,
    /// `hardy` and `log_mass` one level coarser (equal to the fine values for
    /// single-level evaluations).
    pub hardy_coarse: f64,
    pub log_mass_coarse: f64,
    pub level: u32,
}

const COMPONENTS: usize = 6;

fn check_case(params: &Params, u: &ScalarField, a: &Potential) -> Result<()> {
    if u.box_half_width().is_some() {
        return Err(Error::Domain(format!("{} is a cylindrical field; use the cylindrical module", u.name())));
    }
    if let PotentialKind::AharonovBohm { alpha } = a.kind {
        if params.dim() != 2 && alpha != 0.0 {
            return Err(Error::Domain(format!(
                "the Aharonov–Bohm potential is singular on a codimension-2 axis for N = {}; only N = 2 is supported",
                params.dim()
            )));
        }
    }
    Ok(())
}

fn case_integrand(params: &Params, u: &ScalarField, a: &Potential, x: &[f64]) -> [f64; COMPONENTS] {
    let n = x.len();
    let p = params.p();
    let ae = params.hardy_exponent();
    let Some((v, eta)) = magnetic_eval(u, a, x) else {
        return [f64::NAN; COMPONENTS];
    };
    let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
    let mut zeta = [Complex64::new(0.0, 0.0); MAX_DIM];
    fields::weighted_gradient(ae, v, &eta[..n], x, &mut zeta[..n]);
    let eta_norm = cnorm(&eta[..n]);
    let u_abs = v.norm();
    let diff = ae * u_abs / r;
    let sw = sandwich_from_norms(p, eta_norm, diff, cnorm(&zeta[..n]));
    let up = u_abs.powf(p);
    let l = r.ln().abs();
    [
        eta_norm.powf(p),
        up / r.powf(p),
        kernel_value(p, &eta[..n], &zeta[..n]),
        sw.lower,
        sw.mid,
        up / (r.powf(p) * (1.0 + l * l + l.powf(p))),
    ]
}

fn assemble(params: &Params, v: [f64; COMPONENTS], coarse: [f64; COMPONENTS], level: u32) -> CaseIntegrals {
    let hardy = |w: &[f64; COMPONENTS]| w[0] - params.hardy_constant() * w[1];
    CaseIntegrals {
        gradient: v[0],
        mass: v[1],
        kernel: v[2],
        rem: v[3],
        min_form: v[4],
        min_form_change: (v[4] - coarse[4]).abs(),
        log_mass: v[5],
        hardy: hardy(&v),
        hardy_coarse: hardy(&coarse),
        log_mass_coarse: coarse[5],
        level,
    }
}

/// Case integrals refined level by level until all change by less than `tol` relative.
pub fn case_integrals(params: &Params, u: &ScalarField, a: &Potential, tol: f64) -> Result<CaseIntegrals> {
    check_case(params, u, a)?;
    let (r_in, r_out) = u.support();
    let c = converge_selected(
        |l| annulus_rule(params, r_in, r_out, l),
        |x| case_integrand(params, u, a, x),
        tol,
        level_cap(params.dim()),
        [true, true, true, true, false, true],
    )?;
    Ok(assemble(params, c.values, c.previous, c.level))
}

/// Case integrals on the rule of a fixed level.
pub fn case_integrals_at(params: &Params, u: &ScalarField, a: &Potential, level: u32) -> Result<CaseIntegrals> {
    check_case(params, u, a)?;
    let (r_in, r_out) = u.support();
    let rule = annulus_rule(params, r_in, r_out, level)?;
    let v = integrate::integrate_many(&rule, |x| case_integrand(params, u, a, x))?;
    Ok(assemble(params, v, v, level))
}

/// `H_{A,p}(u) = ∫|∇_A u|^p - ((N-p)/p)^p ∫|u|^p/|x|^p`.
pub fn hardy_functional(params: &Params, u: &ScalarField, a: &Potential, tol: f64) -> Result<f64> {
    let c = case_integrals(params, u, a, tol)?;
    if c.hardy < -10.0 * tol {
        return Err(Error::Inconsistency(format!(
            "Hardy functional {} is negative beyond quadrature tolerance",
            c.hardy
        )));
    }
    Ok(c.hardy)
}

/// `H_{A,p}(u)` against the integral of the kernel.
pub fn identity_report(c: &CaseIntegrals, u: &ScalarField, a: &Potential, tol: f64) -> VerificationReport {
    let bound = (1e-6 * (c.hardy.abs() + c.kernel.abs())).max(100.0 * tol);
    let mut r = VerificationReport::new(c.hardy, c.kernel, 1.0, bound, c.level, u, a);
    r.pass = r.margin.abs() <= bound;
    r
}

pub fn identity_2_11_residual(params: &Params, u: &ScalarField, a: &Potential, tol: f64) -> Result<VerificationReport> {
    let c = case_integrals(params, u, a, tol)?;
    Ok(identity_report(&c, u, a, tol))
}

/// Relative identity residual `|H - ∫K_p| / (|H| + |∫K_p|)`, zero for `u = 0`.
pub fn relative_residual(c: &CaseIntegrals) -> f64 {
    let scale = c.hardy.abs() + c.kernel.abs();
    if scale == 0.0 {
        0.0
    } else {
        (c.hardy - c.kernel).abs() / scale
    }
}

fn vacuous_or_inconsistent(lhs: f64, rhs: f64, s: f64, what: &str) -> Result<()> {
    if rhs == 0.0 && lhs.abs() > s {
        return Err(Error::Inconsistency(format!("{what} vanishes while H = {lhs}")));
    }
    Ok(())
}

/// Two-sided band `c₁ Rem <= H <= c₂ Rem`; `constant_used = c₁`.
pub fn theorem_1_1_report(c: &CaseIntegrals, u: &ScalarField, a: &Potential, c1: f64, c2: f64, tol: f64) -> Result<VerificationReport> {
    let s = slack(c.hardy, c.rem, tol);
    vacuous_or_inconsistent(c.hardy, c.rem, s, "Rem")?;
    let mut r = VerificationReport::new(c.hardy, c.rem, c1, s, c.level, u, a);
    r.pass = c1 * c.rem - s <= c.hardy && c.hardy <= c2 * c.rem + s;
    Ok(r)
}

pub fn verify_theorem_1_1(
    params: &Params,
    u: &ScalarField,
    a: &Potential,
    c1: f64,
    c2: f64,
    tol: f64,
) -> Result<VerificationReport> {
    let c = case_integrals(params, u, a, tol)?;
    theorem_1_1_report(&c, u, a, c1, c2, tol)
}

/// `H >= c₃·(min-form)`, together with `Rem <= min-form <= 3^{2-p} Rem`.
pub fn theorem_1_2_report(
    params: &Params,
    c: &CaseIntegrals,
    u: &ScalarField,
    a: &Potential,
    c3: f64,
    tol: f64,
) -> Result<VerificationReport> {
    let s = slack(c.hardy, c.min_form, tol) + c3 * c.min_form_change;
    vacuous_or_inconsistent(c.hardy, c.min_form, s, "the min-form remainder")?;
    let mut r = VerificationReport::new(c.hardy, c.min_form, c3, s, c.level, u, a);
    r.pass = r.margin >= -s && sandwich_holds(params, c);
    Ok(r)
}

/// `Rem <= min-form <= 3^{2-p} Rem` up to rounding.
pub fn sandwich_holds(params: &Params, c: &CaseIntegrals) -> bool {
    let eps = 1e-12 * c.rem.abs();
    let upper = 3f64.powf(2.0 - params.p()) * c.rem;
    c.rem - eps <= c.min_form && c.min_form <= upper + eps
}

pub fn verify_theorem_1_2(params: &Params, u: &ScalarField, a: &Potential, c3: f64, tol: f64) -> Result<VerificationReport> {
    let c = case_integrals(params, u, a, tol)?;
    theorem_1_2_report(params, &c, u, a, c3, tol)
}

/// `∫|u|^p/(|x|^p(1 + |ln|x||² + |ln|x||^p))`.
pub fn log_weight_integral(params: &Params, u: &ScalarField, tol: f64) -> Result<f64> {
    Ok(case_integrals(params, u, &Potential::zero(), tol)?.log_mass)
}

/// `H/∫(log-weighted mass)` against the floor `c₃/C`, which is recorded only.
/// The report passes when the ratio is positive.
pub fn theorem_1_3_report(c: &CaseIntegrals, u: &ScalarField, a: &Potential, c3: f64, c_bpn: f64) -> Result<VerificationReport> {
    if c.log_mass <= 0.0 {
        if c.mass > 0.0 {
            return Err(Error::Inconsistency(format!("log-weighted integral vanishes for nonzero {}", u.name())));
        }
        let mut r = VerificationReport::new(0.0, 0.0, c3 / c_bpn, 0.0, c.level, u, a);
        r.pass = true;
        return Ok(r);
    }
    let mut r = VerificationReport::new(c.hardy, c.log_mass, c3 / c_bpn, 0.0, c.level, u, a);
    r.pass = c.hardy / c.log_mass > 0.0;
    Ok(r)
}

pub fn verify_theorem_1_3(
    params: &Params,
    u: &ScalarField,
    a: &Potential,
    c3: f64,
    c_bpn: f64,
    tol: f64,
) -> Result<VerificationReport> {
    let c = case_integrals(params, u, a, tol)?;
    theorem_1_3_report(&c, u, a, c3, c_bpn)
}

/// Infimum of `H/∫(log-weighted mass)` over a family at the converged
/// quadrature level and at the level below it.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioStability {
    pub inf_ratio: f64,
    pub inf_ratio_coarse: f64,
    pub relative_change: f64,
}

pub fn theorem_1_3_stability(cases: &[CaseIntegrals]) -> Result<RatioStability> {
    let inf = |f: &dyn Fn(&CaseIntegrals) -> Option<f64>| cases.iter().filter_map(f).fold(f64::INFINITY, f64::min);
    let fine = inf(&|c| (c.log_mass > 0.0).then(|| c.hardy / c.log_mass));
    let coarse = inf(&|c| (c.log_mass_coarse > 0.0).then(|| c.hardy_coarse / c.log_mass_coarse));
    if !fine.is_finite() || !coarse.is_finite() {
        return Err(Error::DegenerateTrials);
    }
    Ok(RatioStability { inf_ratio: fine, inf_ratio_coarse: coarse, relative_change: (fine - coarse).abs() / fine.abs() })
}

/// `max{p²((N-p)/p)^{2-p}, (p/(p-1))^p}`.
pub fn c_tilde(params: &Params) -> f64 {
    let p = params.p();
    (p * p * params.hardy_exponent().powf(2.0 - p)).max((p / (p - 1.0)).powf(p))
}

/// Which side of the sphere `|x| = R̂` the support lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportSide {
    Ball,
    Complement,
}

/// Log-weighted mass against `C̃` times the min-form remainder of `|u|`.
pub fn verify_lemma_3_1(params: &Params, u: &ScalarField, rhat: f64, tol: f64) -> Result<(VerificationReport, SupportSide)> {
    if !(rhat > 0.0 && rhat.is_finite()) {
        return Err(Error::Domain(format!("sphere radius {rhat} must be positive")));
    }
    check_case(params, u, &Potential::zero())?;
    let (r_in, r_out) = u.support();
    let band = 0.05 * rhat;
    let side = if r_out <= rhat - band {
        SupportSide::Ball
    } else if r_in >= rhat + band {
        SupportSide::Complement
    } else {
        return Err(Error::Domain(format!(
            "support ({r_in}, {r_out}) must stay {band} away from the sphere |x| = {rhat}"
        )));
    };
    let p = params.p();
    let ae = params.hardy_exponent();
    let integrand = |x: &[f64]| -> [f64; 2] {
        let n = x.len();
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        let m = u.value(x).norm();
        if m == 0.0 {
            return [0.0, 0.0];
        }
        let l = (rhat / r).ln().abs();
        let lhs = m.powf(p) / (r.powf(p) * (l * l + l.powf(p)));
        // ζ = |x|^{-a}∇(|u||x|^a) = ∇|u| + a|u|x/|x|²
        let g = fields::grad_abs(u, x);
        let zeta: f64 = (0..n).map(|j| (g[j] + ae * m * x[j] / (r * r)).powi(2)).sum::<f64>().sqrt();
        let eta = g.iter().map(|c| c * c).sum::<f64>().sqrt();
        [lhs, sandwich_from_norms(p, eta, ae * m / r, zeta).mid]
    };
    let c = converge_selected(
        |l| annulus_rule(params, r_in, r_out, l),
        integrand,
        tol,
        level_cap(params.dim()),
        [true, false],
    )?;
    let [lhs, min_form] = c.values;
    let ct = c_tilde(params);
    let rhs = ct * min_form;
    let s = slack(lhs, rhs, tol) + ct * c.change(1);
    let mut report = VerificationReport::new(lhs, min_form, ct, s, c.level, u, &Potential::zero());
    report.pass = lhs <= rhs + s;
    Ok((report, side))
}

/// The annulus `O_R = B_R \ B_{1/R}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusSpec {
    r: f64,
}

impl AnnulusSpec {
    pub fn new(r: f64) -> Result<Self> {
        if !(r > 1.0 && r.is_finite()) {
            return Err(Error::Domain(format!("annulus radius R = {r} must exceed 1")));
        }
        Ok(Self { r })
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    /// Support of the rescaled trial family, `(1/R + δ, R - δ)` with `δ = 0.02 R`.
    pub fn trial_support(&self) -> (f64, f64) {
        let d = 0.02 * self.r;
        (1.0 / self.r + d, self.r - d)
    }
}

/// A Rayleigh-quotient minimum over a trial family. It is an upper bound for
/// the true infimum, not an approximation of known quality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperBound {
    pub value: f64,
    pub trial: String,
    pub trials: usize,
    pub level: u32,
    /// Change of the value over the last refinement.
    pub quadrature_change: f64,
    pub caveat: Option<String>,
}

/// Coefficients `c` of the combinations `uᵢ + c·uⱼ`: two moduli times eight phases.
fn combination_coefficients() -> Vec<Complex64> {
    let mut out = Vec::with_capacity(16);
    for modulus in [0.5, 1.0] {
        for k in 0..8 {
            out.push(Complex64::from_polar(modulus, PI * k as f64 / 4.0));
        }
    }
    out
}

/// Trial family: the base fields and the combinations `uᵢ + c·uⱼ`, `i < j`,
/// as names with coefficients over the base fields.
fn trial_family(base: &[ScalarField]) -> Vec<(String, Vec<(usize, Complex64)>)> {
    let one = Complex64::new(1.0, 0.0);
    let mut out: Vec<_> = base.iter().enumerate().map(|(i, f)| (f.name().to_string(), vec![(i, one)])).collect();
    for i in 0..base.len() {
        for j in i + 1..base.len() {
            for c in combination_coefficients() {
                out.push((format!("{}+({:.3})*{}", base[i].name(), c, base[j].name()), vec![(i, one), (j, c)]));
            }
        }
    }
    out
}

/// Upper bounds for `μ_B(R)` and `ν_B(R)` from a trial family.
pub fn mu_nu_estimates(params: &Params, a: &Potential, spec: &AnnulusSpec, tol: f64) -> Result<(UpperBound, UpperBound)> {
    let (lo, hi) = spec.trial_support();
    let base = fields::builtin_fields_on(params, lo, hi)?;
    for u in &base {
        check_case(params, u, a)?;
    }
    let family = trial_family(&base);
    let p = params.p();
    let ae = params.hardy_exponent();
    let n = params.dim();

    let at_level = |level: u32| -> Result<(f64, usize, f64, usize)> {
        let rule = annulus_rule(params, lo, hi, level)?;
        // per-node values of (u, ∇_A u) for each base field
        let mut values: Vec<Vec<(Complex64, [Complex64; MAX_DIM])>> = Vec::with_capacity(base.len());
        for u in &base {
            let mut column = Vec::with_capacity(rule.len());
            for (x, _) in rule.nodes() {
                let (v, g) = magnetic_eval(u, a, &x[..n])
                    .ok_or_else(|| Error::Domain(format!("{} is singular at {:?}", a.name(), &x[..n])))?;
                column.push((v, g));
            }
            values.push(column);
        }
        let weights: Vec<f64> = rule.nodes().map(|(_, w)| w).collect();
        let quotients: Vec<Option<(f64, f64)>> = family
            .par_iter()
            .map(|(_, terms)| {
                let mut sums = [integrate::CompensatedSum::new(); 3];
                for (i, &w) in weights.iter().enumerate() {
                    let mut v = Complex64::new(0.0, 0.0);
                    let mut g = [Complex64::new(0.0, 0.0); MAX_DIM];
                    for &(b, c) in terms {
                        let (bv, bg) = &values[b][i];
                        v += c * bv;
                        for j in 0..n {
                            g[j] += c * bg[j];
                        }
                    }
                    let m = v.norm();
                    let gn = cnorm(&g[..n]);
                    let gp = gn.powf(p);
                    // min{|∇_A u|^p, a^{p-2}|u|^{p-2}|∇_A u|²}, first branch where u = 0
                    let second = if m > 0.0 { (ae * m).powf(p - 2.0) * gn * gn } else { f64::INFINITY };
                    sums[0].add(w * gp);
                    sums[1].add(w * gp.min(second));
                    sums[2].add(w * m.powf(p));
                }
                let mass = sums[2].value();
                (mass > 0.0).then(|| (sums[0].value() / mass, sums[1].value() / mass))
            })
            .collect();
        let mut mu = (f64::INFINITY, usize::MAX);
        let mut nu = (f64::INFINITY, usize::MAX);
        for (idx, q) in quotients.iter().enumerate() {
            if let Some((m, v)) = q {
                if *m < mu.0 {
                    mu = (*m, idx);
                }
                if *v < nu.0 {
                    nu = (*v, idx);
                }
            }
        }
        if mu.1 == usize::MAX {
            return Err(Error::DegenerateTrials);
        }
        Ok((mu.0, mu.1, nu.0, nu.1))
    };

    // The ν quotients integrate a kinked min-form and converge slowly, so
    // only μ enters the stopping test; ν carries its last change instead.
    let mut previous = at_level(1)?;
    let mut level = 2;
    let cap = level_cap(n);
    let found = loop {
        let current = at_level(level)?;
        if (previous.0 - current.0).abs() < tol * current.0.abs() {
            break current;
        }
        if level >= cap {
            return Err(Error::NonConvergence { level, previous: previous.0, last: current.0 });
        }
        previous = current;
        level += 1;
    };
    let name = |idx: usize| family[idx].0.clone();
    let caveat = a.is_zero().then(|| {
        "A = 0: the infimum over all functions on O_R is 0 (constants), but every trial vanishes on the boundary".to_string()
    });
    let mu = UpperBound {
        value: found.0,
        trial: name(found.1),
        trials: family.len(),
        level,
        quadrature_change: (found.0 - previous.0).abs(),
        caveat: caveat.clone(),
    };
    let nu = UpperBound {
        value: found.2,
        trial: name(found.3),
        trials: family.len(),
        level,
        quadrature_change: (found.2 - previous.2).abs(),
        caveat,
    };
    Ok((mu, nu))
}

/// `((N-p)/p)^p R^{-2} {2^{p-1} max{[2(N-p)/p]^p R^p, 1} [1 + 1/μ]}^{-2/p}`.
pub fn lemma_3_3_lower_bound(params: &Params, spec: &AnnulusSpec, mu: f64) -> Result<f64> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Domain(format!("μ = {mu} must be positive and finite")));
    }
    let p = params.p();
    let ae = params.hardy_exponent();
    let r = spec.radius();
    let inner = 2f64.powf(p - 1.0) * ((2.0 * ae).powf(p) * r.powf(p)).max(1.0) * (1.0 + 1.0 / mu);
    Ok(ae.powf(p) / (r * r) * inner.powf(-2.0 / p))
}

/// Radial cutoff: 1 on `|x| <= 1/R` and `|x| >= R`, 0 on `[R₁, R₂]`, smooth steps between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSpec {
    r: f64,
    r1: f64,
    r2: f64,
}

impl ChiSpec {
    pub fn new(spec: &AnnulusSpec, r1: f64, r2: f64) -> Result<Self> {
        let r = spec.radius();
        if !(1.0 / r < r1 && r1 < 1.0 && 1.0 < r2 && r2 < r) {
            return Err(Error::Domain(format!("cutoff radii need 1/R < R₁ < 1 < R₂ < R, got R₁ = {r1}, R₂ = {r2}, R = {r}")));
        }
        Ok(Self { r, r1, r2 })
    }

    /// `R₁ = (1 + 1/R)/2`, `R₂ = (1 + R)/2`.
    pub fn default_for(spec: &AnnulusSpec) -> Self {
        let r = spec.radius();
        Self { r, r1: 0.5 * (1.0 + 1.0 / r), r2: 0.5 * (1.0 + r) }
    }

    /// `(χ(r), χ'(r))`.
    pub fn profile(&self, rad: f64) -> (f64, f64) {
        let inner = 1.0 / self.r;
        if rad <= inner || rad >= self.r {
            (1.0, 0.0)
        } else if rad < self.r1 {
            let w = self.r1 - inner;
            let (s, ds) = smooth_step((rad - inner) / w);
            (1.0 - s, -ds / w)
        } else if rad <= self.r2 {
            (0.0, 0.0)
        } else {
            let w = self.r - self.r2;
            let (s, ds) = smooth_step((rad - self.r2) / w);
            (s, ds / w)
        }
    }
}

fn step_base(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        (0.0, 0.0)
    } else {
        let f = (-1.0 / t).exp();
        (f, f / (t * t))
    }
}

/// `S(t) = f(t)/(f(t) + f(1-t))` with `f(t) = exp(-1/t)`, and `S'(t)`.
pub fn smooth_step(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0);
    }
    let (a, da) = step_base(t);
    let (b, db) = step_base(1.0 - t);
    let d = a + b;
    (a / d, (da * b + a * db) / (d * d))
}

/// `sup|χ'|` from `10^5` samples of the radial profile on `[1/R, R]`.
pub fn grad_chi_sup(chi: &ChiSpec) -> f64 {
    let samples = 100_000;
    let (lo, hi) = (1.0 / chi.r, chi.r);
    (0..samples)
        .map(|i| chi.profile(lo + (hi - lo) * i as f64 / (samples - 1) as f64).1.abs())
        .fold(0.0, f64::max)
}

/// `2^{p-1}{R^{2N-p}/ν + 4C̃[‖∇χ‖^p R^{2N}/ν + ((N-p)/p)^{p-2}‖∇χ‖² R^{2N+2-p}/ν + 1]}`.
pub fn c_bpn(params: &Params, spec: &AnnulusSpec, chi: &ChiSpec, nu: f64) -> Result<f64> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::Domain(format!("ν = {nu} must be positive and finite")));
    }
    let p = params.p();
    let n = params.dim() as f64;
    let r = spec.radius();
    let g = grad_chi_sup(chi);
    let ct = c_tilde(params);
    let bracket = g.powf(p) * r.powf(2.0 * n) / nu
        + params.hardy_exponent().powf(p - 2.0) * g * g * r.powf(2.0 * n + 2.0 - p) / nu
        + 1.0;
    Ok(2f64.powf(p - 1.0) * (r.powf(2.0 * n - p) / nu + 4.0 * ct * bracket))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(name: &str) -> ScalarField {
        let params = Params::new(1.5, 2).unwrap();
        fields::builtin_fields(&params).into_iter().find(|f| f.name() == name).unwrap()
    }

    #[test]
    fn c_tilde_closed_form() {
        let params = Params::new(1.5, 3).unwrap();
        assert!((c_tilde(&params) - 27f64.sqrt()).abs() < 1e-12);
        assert!((c_tilde(&params) - 5.196_15).abs() < 1e-5);
    }

    #[test]
    fn zero_field_is_vacuous() {
        let params = Params::new(1.5, 2).unwrap();
        let u = field("bump").scaled(Complex64::new(0.0, 0.0));
        let c = case_integrals(&params, &u, &Potential::zero(), 1e-6).unwrap();
        assert_eq!(c.hardy, 0.0);
        assert_eq!(c.kernel, 0.0);
        let r = theorem_1_1_report(&c, &u, &Potential::zero(), 0.1, 2.0, 1e-6).unwrap();
        assert!(r.pass && r.ratio.is_none());
        assert!(theorem_1_2_report(&params, &c, &u, &Potential::zero(), 0.3, 1e-6).unwrap().pass);
        assert!(theorem_1_3_report(&c, &u, &Potential::zero(), 0.3, 10.0).unwrap().pass);
    }

    #[test]
    fn identity_and_bands_for_bump() {
        let params = Params::new(1.5, 2).unwrap();
        let u = field("phase1");
        let a = Potential::aharonov_bohm(0.5);
        let c = case_integrals(&params, &u, &a, 1e-7).unwrap();
        assert!(relative_residual(&c) < 1e-10, "{c:?}");
        assert!(c.hardy > 0.0);
        assert!(sandwich_holds(&params, &c));
    }

    #[test]
    fn ab_requires_the_plane() {
        let params = Params::new(1.5, 3).unwrap();
        let u = fields::builtin_fields(&params).remove(0);
        assert!(case_integrals(&params, &u, &Potential::aharonov_bohm(0.5), 1e-6).is_err());
        assert!(case_integrals(&params, &u, &Potential::aharonov_bohm(0.0), 1e-6).is_ok());
    }

    #[test]
    fn lemma_3_1_support_rules() {
        let params = Params::new(1.5, 3).unwrap();
        let inside = ScalarField::annular("ball", 0.3, 0.9, fields::Modulation::None).unwrap();
        let (r, side) = verify_lemma_3_1(&params, &inside, 1.0, 1e-6).unwrap();
        assert_eq!(side, SupportSide::Ball);
        assert!(r.pass);
        let outside = ScalarField::annular("out", 1.5, 3.0, fields::Modulation::Phase(1)).unwrap();
        let (r, side) = verify_lemma_3_1(&params, &outside, 1.0, 1e-6).unwrap();
        assert_eq!(side, SupportSide::Complement);
        assert!(r.pass);
        let touching = ScalarField::annular("touch", 0.5, 0.98, fields::Modulation::None).unwrap();
        assert!(matches!(verify_lemma_3_1(&params, &touching, 1.0, 1e-6), Err(Error::Domain(_))));
    }

    #[test]
    fn smooth_step_shape() {
        assert_eq!(smooth_step(0.0).0, 0.0);
        assert_eq!(smooth_step(1.0).0, 1.0);
        assert!((smooth_step(0.5).0 - 0.5).abs() < 1e-15);
        // S(t) + S(1-t) = 1
        for t in [0.1, 0.3, 0.7] {
            assert!((smooth_step(t).0 + smooth_step(1.0 - t).0 - 1.0).abs() < 1e-15);
        }
        let h = 1e-6;
        for t in [0.2, 0.5, 0.9] {
            let fd = (smooth_step(t + h).0 - smooth_step(t - h).0) / (2.0 * h);
            assert!((fd - smooth_step(t).1).abs() < 1e-8);
        }
    }

    #[test]
    fn chi_profile() {
        let spec = AnnulusSpec::new(2.0).unwrap();
        let chi = ChiSpec::default_for(&spec);
        assert_eq!(chi.profile(0.4).0, 1.0);
        assert_eq!(chi.profile(1.0).0, 0.0);
        assert_eq!(chi.profile(2.5).0, 1.0);
        assert!(grad_chi_sup(&chi) > 0.0);
        assert!(ChiSpec::new(&spec, 1.2, 1.5).is_err());
        assert!(AnnulusSpec::new(1.0).is_err());
    }

    #[test]
    fn c_bpn_terms() {
        let params = Params::new(1.5, 2).unwrap();
        let spec = AnnulusSpec::new(2.0).unwrap();
        let chi = ChiSpec::default_for(&spec);
        let a = c_bpn(&params, &spec, &chi, 1.0).unwrap();
        let b = c_bpn(&params, &spec, &chi, 2.0).unwrap();
        assert!(b < a);
        assert!(a > 2f64.powf(0.5) * 4.0 * c_tilde(&params));
        assert!(c_bpn(&params, &spec, &chi, 0.0).is_err());
    }

    #[test]
    fn lower_bound_increases_with_mu() {
        let params = Params::new(1.5, 2).unwrap();
        let spec = AnnulusSpec::new(2.0).unwrap();
        let mut last = 0.0;
        for mu in [0.1, 1.0, 10.0, 100.0] {
            let v = lemma_3_3_lower_bound(&params, &spec, mu).unwrap();
            assert!(v > last);
            last = v;
        }
    }
}
