//! Cylindrical Hardy inequalities for the split `x = (x', x'') ∈ R^k × R^{N-k}`,
//! weighted by `|x'|`, without magnetic potential.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{Modulation, Potential, ScalarField, DEFAULT_SUPPORT};
use crate::functionals::{slack, VerificationReport};
use crate::integrate::{converge_selected, cylinder_rule, integrate_many, level_cap};
use crate::kernel::{cnorm, kernel_scalar, sandwich_from_norms, Params};

/// Half-width of the `x''` box used by the builtin cylindrical fields.
pub const DEFAULT_HALF_WIDTH: f64 = 1.0;

/// Parameters with a validated split `2 <= k <= N`, `1 < p < 2 <= k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylSplit {
    params: Params,
    k: usize,
}

impl CylSplit {
    pub fn new(params: Params) -> Result<Self> {
        let k = params
            .split()
            .ok_or_else(|| Error::InvalidParams("parameters carry no split k".into()))?;
        Ok(Self { params, k })
    }

    pub fn from_parts(p: f64, n: usize, k: usize) -> Result<Self> {
        Self::new(Params::with_split(p, n, k)?)
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    /// `(k-p)/p`.
    pub fn exponent(&self) -> f64 {
        (self.k as f64 - self.params.p()) / self.params.p()
    }

    /// `((k-p)/p)^p`.
    pub fn constant(&self) -> f64 {
        self.exponent().powf(self.params.p())
    }

    /// `|x'|`.
    pub fn partial_radius(&self, x: &[f64]) -> f64 {
        cnorm_real(&x[..self.k])
    }
}

fn cnorm_real(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn radial_of(k: usize, x: &[f64], grad: &[Complex64]) -> Complex64 {
    let r = cnorm_real(&x[..k]);
    (0..k).map(|j| grad[j] * (x[j] / r)).sum()
}

/// `(x'/|x'|)·∇_k u(x)`.
pub fn radial_partial_derivative(split: &CylSplit, u: &ScalarField, x: &[f64]) -> Result<Complex64> {
    if x.len() != split.dim() {
        return Err(Error::Domain(format!("point has {} coordinates, expected {}", x.len(), split.dim())));
    }
    if split.partial_radius(x) == 0.0 {
        return Err(Error::Domain(format!("x' = 0 at {x:?}")));
    }
    let (_, g) = u.eval(x);
    Ok(radial_of(split.k, x, &g))
}

/// Builtin family supported in `{0.5 < |x'| < 2} × (-1, 1)^{N-k}`.
pub fn builtin_cylindrical_fields(split: &CylSplit) -> Vec<ScalarField> {
    let (lo, hi) = DEFAULT_SUPPORT;
    let k = split.k;
    let make = |name: &str, m: Modulation| {
        ScalarField::cylindrical(name, k, lo, hi, DEFAULT_HALF_WIDTH, m).expect("default cylinder support is valid")
    };
    vec![
        make("bump", Modulation::None),
        make("phase1", Modulation::Phase(1)),
        make("phase2", Modulation::Phase(2)),
        make("wave", Modulation::PlaneWave(1.0)),
        make("modulated", Modulation::Angular(0.5)),
    ]
}

/// All integrals of one cylindrical case on a common rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylIntegrals {
    /// `∫|(x'/|x'|)·∇_k u|^p`.
    pub radial_gradient: f64,
    /// `∫|u|^p/|x'|^p`.
    pub mass: f64,
    /// `∫K_p(w, w + ((k-p)/p)u/|x'|)` with `w = (x'/|x'|)·∇_k u`.
    pub kernel: f64,
    /// `∫(|w| + ((k-p)/p)|u|/|x'|)^{p-2}|w + ((k-p)/p)u/|x'||²`.
    pub rem: f64,
    pub min_form: f64,
    /// Change of `min_form` over the last refinement (kinked integrand).
    pub min_form_change: f64,
    /// `∫|∇_k u|^p`.
    pub partial_gradient: f64,
    /// `∫|∇u|^p`.
    pub full_gradient: f64,
    /// `radial_gradient - ((k-p)/p)^p mass`.
    pub hardy: f64,
    /// `full_gradient - ((k-p)/p)^p mass`.
    pub hardy_full: f64,
    pub level: u32,
}

const COMPONENTS: usize = 7;

fn support_of(split: &CylSplit, u: &ScalarField) -> Result<(f64, f64, f64)> {
    let (r_in, r_out) = u.support();
    match u.box_half_width() {
        Some(h) => Ok((r_in, r_out, h)),
        // an annular field lives in {r_in < |x'| < r_out} only without trailing coordinates
        None if split.k == split.dim() => Ok((r_in, r_out, DEFAULT_HALF_WIDTH)),
        None => Err(Error::Domain(format!(
            "{} is not supported away from x' = 0 for k = {} < N = {}",
            u.name(),
            split.k,
            split.dim()
        ))),
    }
}

fn integrand(split: &CylSplit, u: &ScalarField, x: &[f64]) -> [f64; COMPONENTS] {
    let p = split.params.p();
    let b = split.exponent();
    let k = split.k;
    let (v, g) = u.eval(x);
    let n = x.len();
    let rp = split.partial_radius(x);
    let w = radial_of(k, x, &g);
    let z = w + v * (b / rp);
    let m = v.norm();
    let sw = sandwich_from_norms(p, w.norm(), b * m / rp, z.norm());
    [
        w.norm().powf(p),
        m.powf(p) / rp.powf(p),
        kernel_scalar(p, w, z),
        sw.lower,
        sw.mid,
        cnorm(&g[..k]).powf(p),
        cnorm(&g[..n]).powf(p),
    ]
}

fn assemble(split: &CylSplit, v: [f64; COMPONENTS], coarse: [f64; COMPONENTS], level: u32) -> CylIntegrals {
    let c = split.constant();
    CylIntegrals {
        radial_gradient: v[0],
        mass: v[1],
        kernel: v[2],
        rem: v[3],
        min_form: v[4],
        min_form_change: (v[4] - coarse[4]).abs(),
        partial_gradient: v[5],
        full_gradient: v[6],
        hardy: v[0] - c * v[1],
        hardy_full: v[6] - c * v[1],
        level,
    }
}

/// Cylindrical case integrals refined until all but the min-form converge to `tol`.
pub fn cyl_integrals(split: &CylSplit, u: &ScalarField, tol: f64) -> Result<CylIntegrals> {
    let (r_in, r_out, h) = support_of(split, u)?;
    let (n, k) = (split.dim(), split.k);
    let c = converge_selected(
        |l| cylinder_rule(n, k, r_in, r_out, h, l),
        |x| integrand(split, u, x),
        tol,
        level_cap(n),
        [true, true, true, true, false, true, true],
    )?;
    Ok(assemble(split, c.values, c.previous, c.level))
}

/// Cylindrical case integrals on a fixed level.
pub fn cyl_integrals_at(split: &CylSplit, u: &ScalarField, level: u32) -> Result<CylIntegrals> {
    let (r_in, r_out, h) = support_of(split, u)?;
    let rule = cylinder_rule(split.dim(), split.k, r_in, r_out, h, level)?;
    let v = integrate_many(&rule, |x| integrand(split, u, x))?;
    Ok(assemble(split, v, v, level))
}

fn report(lhs: f64, rhs: f64, constant: f64, s: f64, c: &CylIntegrals, u: &ScalarField) -> VerificationReport {
    VerificationReport {
        lhs,
        rhs,
        ratio: (rhs > 0.0).then(|| lhs / rhs),
        constant_used: constant,
        margin: lhs - constant * rhs,
        slack: s,
        quadrature_level: c.level,
        field_name: u.name().to_string(),
        potential_name: Potential::zero().name(),
        pass: false,
    }
}

/// Identity between the cylindrical Hardy difference and the integral of
/// the scalar kernel.
pub fn cylindrical_identity_report(c: &CylIntegrals, u: &ScalarField, tol: f64) -> VerificationReport {
    let bound = (1e-6 * (c.hardy.abs() + c.kernel.abs())).max(100.0 * tol);
    let mut r = report(c.hardy, c.kernel, 1.0, bound, c, u);
    r.pass = r.margin.abs() <= bound;
    r
}

pub fn cylindrical_identity_residual(split: &CylSplit, u: &ScalarField, tol: f64) -> Result<VerificationReport> {
    let c = cyl_integrals(split, u, tol)?;
    Ok(cylindrical_identity_report(&c, u, tol))
}

/// `|hardy - kernel| / (|hardy| + |kernel|)`, zero for `u = 0`.
pub fn relative_residual(c: &CylIntegrals) -> f64 {
    let scale = c.hardy.abs() + c.kernel.abs();
    if scale == 0.0 {
        0.0
    } else {
        (c.hardy - c.kernel).abs() / scale
    }
}

/// The three checks of the cylindrical remainder theorem and its corollary.
#[derive(Debug, Clone, PartialEq)]
pub struct Section4Reports {
    /// `c₁ Rem <= lhs <= c₂ Rem`; `constant_used = c₁`.
    pub two_sided: VerificationReport,
    /// `lhs >= c₃·min-form`.
    pub min_form: VerificationReport,
    /// Full-gradient left side against `c₁ Rem` and `c₃·min-form`;
    /// `constant_used = c₁`.
    pub corollary: VerificationReport,
}

impl Section4Reports {
    pub fn pass(&self) -> bool {
        self.two_sided.pass && self.min_form.pass && self.corollary.pass
    }
}

pub fn section_4_reports(c: &CylIntegrals, u: &ScalarField, c1: f64, c2: f64, c3: f64, tol: f64) -> Section4Reports {
    let s = slack(c.hardy, c.rem, tol);
    let mut two_sided = report(c.hardy, c.rem, c1, s, c, u);
    two_sided.pass = c1 * c.rem - s <= c.hardy && c.hardy <= c2 * c.rem + s;

    let s = slack(c.hardy, c.min_form, tol) + c3 * c.min_form_change;
    let mut min_form = report(c.hardy, c.min_form, c3, s, c, u);
    min_form.pass = min_form.margin >= -s;

    let s_rem = slack(c.hardy_full, c.rem, tol);
    let s_min = slack(c.hardy_full, c.min_form, tol) + c3 * c.min_form_change;
    let mut corollary = report(c.hardy_full, c.rem, c1, s_rem, c, u);
    corollary.pass = c.hardy_full >= c1 * c.rem - s_rem && c.hardy_full >= c3 * c.min_form - s_min;

    Section4Reports { two_sided, min_form, corollary }
}

pub fn verify_section_4(split: &CylSplit, u: &ScalarField, c1: f64, c2: f64, c3: f64, tol: f64) -> Result<Section4Reports> {
    let c = cyl_integrals(split, u, tol)?;
    Ok(section_4_reports(&c, u, c1, c2, c3, tol))
}

/// `∫|(x'/|x'|)·∇_k u|^p <= ∫|∇_k u|^p <= ∫|∇u|^p`, up to rounding.
pub fn truncation_chain_holds(c: &CylIntegrals) -> bool {
    let eps = 1e-12 * c.full_gradient.abs();
    c.radial_gradient <= c.partial_gradient + eps && c.partial_gradient <= c.full_gradient + eps
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_validation() {
        assert!(CylSplit::from_parts(1.5, 3, 2).is_ok());
        assert!(CylSplit::from_parts(1.5, 3, 4).is_err());
        assert!(CylSplit::from_parts(1.5, 3, 1).is_err());
        assert!(CylSplit::new(Params::new(1.5, 3).unwrap()).is_err());
    }

    #[test]
    fn radial_derivative_basics() {
        let split = CylSplit::from_parts(1.5, 3, 2).unwrap();
        let u = &builtin_cylindrical_fields(&split)[0];
        assert!(radial_partial_derivative(&split, u, &[0.0, 0.0, 0.3]).is_err());
        // bump(|x'|) g(x''): the radial derivative is bump'(|x'|) g(x'')
        let x = [0.9, 0.6, 0.2];
        let r = (0.81f64 + 0.36).sqrt();
        let (_, db) = crate::fields::bump(r, 0.5, 2.0);
        let g = (-1.0 / (1.0 - 0.04f64)).exp();
        let w = radial_partial_derivative(&split, u, &x).unwrap();
        assert!((w.re - db * g).abs() < 1e-14 && w.im == 0.0);
        let h = 1e-6;
        let along = |t: f64| u.value(&[x[0] * (1.0 + t / r), x[1] * (1.0 + t / r), x[2]]);
        let fd = (along(h) - along(-h)) / (2.0 * h);
        assert!((fd - w).norm() < 1e-6 * (1.0 + w.norm()));
    }

    #[test]
    fn radial_derivative_vanishes_at_profile_peak() {
        // w = bump'·g vanishes where bump' does, although u still varies in x''
        let split = CylSplit::from_parts(1.5, 3, 2).unwrap();
        let u = &builtin_cylindrical_fields(&split)[0];
        let w = radial_partial_derivative(&split, u, &[1.25, 0.0, 0.4]).unwrap();
        assert!(w.norm() < 1e-15);
        assert!(u.eval(&[1.25, 0.0, 0.4]).1[2].norm() > 0.0);
    }

    #[test]
    fn annular_fields_need_a_full_split() {
        let split = CylSplit::from_parts(1.5, 3, 2).unwrap();
        let u = ScalarField::annular("bump", 0.5, 2.0, Modulation::None).unwrap();
        assert!(cyl_integrals(&split, &u, 1e-6).is_err());
    }

    #[test]
    fn zero_field() {
        let split = CylSplit::from_parts(1.5, 2, 2).unwrap();
        let u = builtin_cylindrical_fields(&split)[0].scaled(Complex64::new(0.0, 0.0));
        let c = cyl_integrals(&split, &u, 1e-6).unwrap();
        assert_eq!(relative_residual(&c), 0.0);
        assert!(section_4_reports(&c, &u, 0.4, 1.4, 0.3, 1e-6).pass());
    }
}
