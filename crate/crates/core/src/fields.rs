//! Magnetic potentials, complex test functions with closed-form gradients,
//! and the pointwise magnetic identities.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::integrate::MAX_DIM;
use crate::kernel::{cnorm, CVec, Params};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Complex gradient padded to [`MAX_DIM`].
pub type Grad = [Complex64; MAX_DIM];

/// Default annulus; straddles `|x| = 1` so `ln|x|` changes sign inside the support.
pub const DEFAULT_SUPPORT: (f64, f64) = (0.5, 2.0);

/// Points closer than this to the `x₁ = x₂ = 0` axis are skipped by sweeps.
pub const AXIS_EXCLUSION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialKind {
    Zero,
    /// `α(-x₂, x₁, 0, …)/(x₁² + x₂²)`.
    AharonovBohm { alpha: f64 },
    /// `(-b x₂/2, b x₁/2, 0, …)`: constant field of strength `b` in the (1,2)-plane.
    ConstantField { b: f64 },
}

/// A real vector potential `A` on `R^N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potential {
    pub kind: PotentialKind,
}

impl Potential {
    pub fn zero() -> Self {
        Self { kind: PotentialKind::Zero }
    }

    pub fn aharonov_bohm(alpha: f64) -> Self {
        Self { kind: PotentialKind::AharonovBohm { alpha } }
    }

    pub fn constant_field(b: f64) -> Self {
        Self { kind: PotentialKind::ConstantField { b } }
    }

    pub fn is_zero(&self) -> bool {
        match self.kind {
            PotentialKind::Zero => true,
            PotentialKind::AharonovBohm { alpha } => alpha == 0.0,
            PotentialKind::ConstantField { b } => b == 0.0,
        }
    }

    pub fn name(&self) -> String {
        match self.kind {
            PotentialKind::Zero => "zero".into(),
            PotentialKind::AharonovBohm { alpha } => format!("ab({alpha})"),
            PotentialKind::ConstantField { b } => format!("constant({b})"),
        }
    }

    /// `A(x)`, or `None` on the Aharonov–Bohm singular set.
    pub fn eval(&self, x: &[f64]) -> Option<[f64; MAX_DIM]> {
        let mut a = [0.0; MAX_DIM];
        match self.kind {
            PotentialKind::Zero => {}
            PotentialKind::AharonovBohm { alpha } => {
                let rho2 = x[0] * x[0] + x[1] * x[1];
                if rho2 == 0.0 {
                    return None;
                }
                a[0] = -alpha * x[1] / rho2;
                a[1] = alpha * x[0] / rho2;
            }
            PotentialKind::ConstantField { b } => {
                a[0] = -0.5 * b * x[1];
                a[1] = 0.5 * b * x[0];
            }
        }
        Some(a)
    }

    /// Fallible variant of [`Potential::eval`].
    pub fn eval_checked(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.eval(x)
            .map(|a| a[..x.len()].to_vec())
            .ok_or_else(|| Error::Domain(format!("{} is singular at {x:?}", self.name())))
    }
}

/// Smooth radial bump `exp(-1/(1-z²))`, `z = (2r - r_in - r_out)/(r_out - r_in)`,
/// and its derivative in `r`.
pub fn bump(r: f64, r_in: f64, r_out: f64) -> (f64, f64) {
    if r <= r_in || r >= r_out {
        return (0.0, 0.0);
    }
    let width = r_out - r_in;
    let z = (2.0 * r - r_in - r_out) / width;
    let q = 1.0 - z * z;
    let b = (-1.0 / q).exp();
    (b, b * (-2.0 * z / (q * q)) * (2.0 / width))
}

/// Angular or oscillatory factor multiplying the radial bump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Modulation {
    None,
    /// `((x₁ + i x₂)/ρ)^m` where ρ is the radius of the support variable.
    Phase(i32),
    /// `exp(i ω x₁)`.
    PlaneWave(f64),
    /// `1 + a·x₁/ρ`.
    Angular(f64),
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    /// Supported in `r_in < |x| < r_out`.
    Annular { r_in: f64, r_out: f64, modulation: Modulation },
    /// Supported in `{r_in < |x'| < r_out} × (-h, h)^{N-k}`.
    Cylindrical { k: usize, r_in: f64, r_out: f64, half_width: f64, modulation: Modulation },
    Combination(Vec<(Complex64, ScalarField)>),
}

/// A complex-valued test function with closed-form gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    name: String,
    shape: Shape,
}

impl ScalarField {
    pub fn annular(name: impl Into<String>, r_in: f64, r_out: f64, modulation: Modulation) -> Result<Self> {
        if !(r_in > 0.0 && r_out > r_in && r_out.is_finite()) {
            return Err(Error::Domain(format!("support radii ({r_in}, {r_out}) must satisfy 0 < r_in < r_out")));
        }
        Ok(Self { name: name.into(), shape: Shape::Annular { r_in, r_out, modulation } })
    }

    pub fn cylindrical(
        name: impl Into<String>,
        k: usize,
        r_in: f64,
        r_out: f64,
        half_width: f64,
        modulation: Modulation,
    ) -> Result<Self> {
        if !(r_in > 0.0 && r_out > r_in && r_out.is_finite() && half_width > 0.0) {
            return Err(Error::Domain(format!(
                "cylinder support ({r_in}, {r_out}) × (-{half_width}, {half_width}) is invalid"
            )));
        }
        if k < 2 {
            return Err(Error::Domain(format!("split k = {k} must be at least 2")));
        }
        Ok(Self { name: name.into(), shape: Shape::Cylindrical { k, r_in, r_out, half_width, modulation } })
    }

    /// `Σ cᵢ uᵢ`.
    pub fn combination(name: impl Into<String>, terms: Vec<(Complex64, ScalarField)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Domain("empty combination".into()));
        }
        Ok(Self { name: name.into(), shape: Shape::Combination(terms) })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn scaled(&self, lambda: Complex64) -> Self {
        Self { name: format!("{}*{}", lambda, self.name), shape: Shape::Combination(vec![(lambda, self.clone())]) }
    }

    /// Radii of the support in `|x|` (or `|x'|` for cylindrical fields).
    pub fn support(&self) -> (f64, f64) {
        match &self.shape {
            Shape::Annular { r_in, r_out, .. } | Shape::Cylindrical { r_in, r_out, .. } => (*r_in, *r_out),
            Shape::Combination(terms) => terms.iter().fold((f64::INFINITY, 0.0), |(lo, hi), (_, f)| {
                let (a, b) = f.support();
                (lo.min(a), hi.max(b))
            }),
        }
    }

    /// Half-width of the trailing box for cylindrical fields.
    pub fn box_half_width(&self) -> Option<f64> {
        match &self.shape {
            Shape::Cylindrical { half_width, .. } => Some(*half_width),
            Shape::Combination(terms) => terms.iter().filter_map(|(_, f)| f.box_half_width()).reduce(f64::max),
            Shape::Annular { .. } => None,
        }
    }

    /// Value and gradient at `x` (length `N`).
    pub fn eval(&self, x: &[f64]) -> (Complex64, Grad) {
        let mut grad = [ZERO; MAX_DIM];
        let n = x.len();
        match &self.shape {
            Shape::Annular { r_in, r_out, modulation } => {
                let r = radius(x);
                let (b, db) = bump(r, *r_in, *r_out);
                if b == 0.0 {
                    return (ZERO, grad);
                }
                let (m, dm) = modulate(*modulation, x, n, r);
                for j in 0..n {
                    grad[j] = m * (db * x[j] / r) + dm[j] * b;
                }
                (m * b, grad)
            }
            Shape::Cylindrical { k, r_in, r_out, half_width, modulation } => {
                let k = (*k).min(n);
                let r = radius(&x[..k]);
                let (b, db) = bump(r, *r_in, *r_out);
                if b == 0.0 {
                    return (ZERO, grad);
                }
                let mut g = 1.0;
                let mut dlog = [0.0; MAX_DIM];
                for j in k..n {
                    let y = x[j] / half_width;
                    let q = 1.0 - y * y;
                    if q <= 0.0 {
                        return (ZERO, grad);
                    }
                    g *= (-1.0 / q).exp();
                    dlog[j] = -2.0 * y / (q * q) / half_width;
                }
                let (m, dm) = modulate(*modulation, &x[..k], k, r);
                let u = m * (b * g);
                for j in 0..k {
                    grad[j] = (m * (db * x[j] / r) + dm[j] * b) * g;
                }
                for j in k..n {
                    grad[j] = u * dlog[j];
                }
                (u, grad)
            }
            Shape::Combination(terms) => {
                let mut u = ZERO;
                for (c, f) in terms {
                    let (v, g) = f.eval(x);
                    u += c * v;
                    for j in 0..n {
                        grad[j] += c * g[j];
                    }
                }
                (u, grad)
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> Complex64 {
        self.eval(x).0
    }

    /// Central-difference check of the closed-form gradient at `count` random
    /// interior points; returns the worst error relative to the local scale
    /// `|∇u| + |u|/width`.
    pub fn check_gradient(&self, n: usize, count: usize, seed: u64) -> Result<f64> {
        let (r_in, r_out) = self.support();
        let width = r_out - r_in;
        let h = 1e-5 * width;
        let mut worst: f64 = 0.0;
        for x in sample_points(self, n, count, seed) {
            let (u, g) = self.eval(&x);
            let mut err2 = 0.0;
            for j in 0..n {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let fd = (self.value(&xp) - self.value(&xm)) / (2.0 * h);
                err2 += (fd - g[j]).norm_sqr();
            }
            let scale = cnorm(&g[..n]) + u.norm() / width;
            if scale > 0.0 {
                worst = worst.max(err2.sqrt() / scale);
            }
        }
        if worst > 1e-6 {
            return Err(Error::Inconsistency(format!(
                "gradient of {} disagrees with finite differences (relative {worst:e})",
                self.name
            )));
        }
        Ok(worst)
    }
}

fn radius(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Modulation factor and its gradient; `x` is the support variable, `r = |x|`.
fn modulate(modulation: Modulation, x: &[f64], n: usize, r: f64) -> (Complex64, Grad) {
    let mut d = [ZERO; MAX_DIM];
    match modulation {
        Modulation::None => (Complex64::new(1.0, 0.0), d),
        Modulation::Phase(m) => {
            let w = Complex64::new(x[0], x[1]) / r;
            let r3 = r * r * r;
            let z = Complex64::new(x[0], x[1]);
            let wm1 = w.powi(m - 1);
            for j in 0..n {
                let dz = match j {
                    0 => Complex64::new(1.0, 0.0),
                    1 => I,
                    _ => ZERO,
                };
                let dw = dz / r - z * (x[j] / r3);
                d[j] = wm1 * dw * m as f64;
            }
            (wm1 * w, d)
        }
        Modulation::PlaneWave(omega) => {
            let e = Complex64::new(0.0, omega * x[0]).exp();
            d[0] = I * omega * e;
            (e, d)
        }
        Modulation::Angular(a) => {
            let r3 = r * r * r;
            for j in 0..n {
                let delta = if j == 0 { 1.0 / r } else { 0.0 };
                d[j] = Complex64::new(a * (delta - x[0] * x[j] / r3), 0.0);
            }
            (Complex64::new(1.0 + a * x[0] / r, 0.0), d)
        }
    }
}

/// Deterministic random points inside the support of `u`, away from its
/// boundary layer and from the `x₁ = x₂ = 0` axis.
pub fn sample_points(u: &ScalarField, n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let (r_in, r_out) = u.support();
    let width = r_out - r_in;
    let (lo, hi) = (r_in + 0.05 * width, r_out - 0.05 * width);
    let cyl = u.box_half_width();
    let k = match &u.shape {
        Shape::Cylindrical { k, .. } => (*k).min(n),
        _ => n,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut dir: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = radius(&dir);
        if !(0.1..=1.0).contains(&norm) {
            continue;
        }
        let r = rng.gen_range(lo..hi);
        dir.iter_mut().for_each(|v| *v *= r / norm);
        if let Some(h) = cyl {
            for _ in k..n {
                dir.push(rng.gen_range(-0.9 * h..0.9 * h));
            }
        }
        if (dir[0] * dir[0] + dir[1] * dir[1]).sqrt() < AXIS_EXCLUSION {
            continue;
        }
        out.push(dir);
    }
    out
}

/// Standard test family on the default support.
pub fn builtin_fields(params: &Params) -> Vec<ScalarField> {
    builtin_fields_on(params, DEFAULT_SUPPORT.0, DEFAULT_SUPPORT.1)
        .expect("default support is valid")
}

/// Standard test family on the annulus `r_in < |x| < r_out`: radial bump,
/// bump with phase `m = 1, 2`, bump times `exp(i x₁)`, angularly modulated bump.
pub fn builtin_fields_on(_params: &Params, r_in: f64, r_out: f64) -> Result<Vec<ScalarField>> {
    Ok(vec![
        ScalarField::annular("bump", r_in, r_out, Modulation::None)?,
        ScalarField::annular("phase1", r_in, r_out, Modulation::Phase(1))?,
        ScalarField::annular("phase2", r_in, r_out, Modulation::Phase(2))?,
        ScalarField::annular("wave", r_in, r_out, Modulation::PlaneWave(1.0))?,
        ScalarField::annular("modulated", r_in, r_out, Modulation::Angular(0.5))?,
    ])
}

/// `u(x)` and `∇_A u(x) = ∇u + i A u`, or `None` where `A` is singular.
pub fn magnetic_eval(u: &ScalarField, a: &Potential, x: &[f64]) -> Option<(Complex64, Grad)> {
    let (v, mut g) = u.eval(x);
    if v == ZERO {
        // ∇u vanishes wherever u does for these fields, and the iAu term is 0
        return Some((v, g));
    }
    let av = a.eval(x)?;
    for j in 0..x.len() {
        g[j] += I * (av[j] * v);
    }
    Some((v, g))
}

/// `∇_A u(x)`.
pub fn magnetic_gradient(u: &ScalarField, a: &Potential, x: &[f64]) -> Result<CVec> {
    let (v, mut g) = u.eval(x);
    let av = a.eval(x).ok_or_else(|| Error::Domain(format!("{} is singular at {x:?}", a.name())))?;
    for j in 0..x.len() {
        g[j] += I * (av[j] * v);
    }
    Ok(CVec(g[..x.len()].to_vec()))
}

/// `∇|u|`, analytic where `|u| > 1e-12` and by forward differences otherwise.
pub fn grad_abs(u: &ScalarField, x: &[f64]) -> Vec<f64> {
    let (v, g) = u.eval(x);
    let n = x.len();
    let m = v.norm();
    if m > 1e-12 {
        return (0..n).map(|j| (v.conj() * g[j]).re / m).collect();
    }
    let h = 1e-7;
    (0..n)
        .map(|j| {
            let mut xp = x.to_vec();
            xp[j] += h;
            (u.value(&xp).norm() - m) / h
        })
        .collect()
}

/// Outcome of a diamagnetic sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct DiamagneticReport {
    /// `min (|∇_A u| - |∇|u||)` over the points.
    pub worst_margin: f64,
    pub worst_point: Vec<f64>,
    pub points: usize,
}

/// Checks `|∇_A u| >= |∇|u|| - tol` at every point.
pub fn diamagnetic_check(u: &ScalarField, a: &Potential, points: &[Vec<f64>], tol: f64) -> Result<DiamagneticReport> {
    let mut report = DiamagneticReport { worst_margin: f64::INFINITY, worst_point: Vec::new(), points: points.len() };
    for x in points {
        let ga = magnetic_gradient(u, a, x)?;
        let gabs = grad_abs(u, x);
        let margin = ga.norm() - crate::kernel::rnorm(&gabs);
        if !margin.is_finite() {
            return Err(Error::Domain(format!("diamagnetic evaluation failed at {x:?}")));
        }
        if margin < report.worst_margin {
            report.worst_margin = margin;
            report.worst_point = x.clone();
        }
    }
    if report.worst_margin < -tol {
        return Err(Error::Inconsistency(format!(
            "diamagnetic inequality violated by {} at {:?}",
            -report.worst_margin, report.worst_point
        )));
    }
    Ok(report)
}

/// `ζ = |x|^{-a} ∇_A(u |x|^a)` with `a = (N-p)/p`, expanded by the product rule.
pub fn weighted_gradient(a_exp: f64, u: Complex64, grad_a: &[Complex64], x: &[f64], out: &mut [Complex64]) {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    for j in 0..x.len() {
        out[j] = grad_a[j] + u * (a_exp * x[j] / r2);
    }
}

/// Norm of `∇_A u - |x|^{(p-N)/p} ∇_A(u|x|^{(N-p)/p}) + ((N-p)/p)(u/|x|)(x/|x|)`.
///
/// The middle term is built from the gradient of the product `u·|x|^a`
/// and the potential applied to that product, independently of
/// [`weighted_gradient`].
pub fn identity_2_6_residual(params: &Params, u: &ScalarField, a: &Potential, x: &[f64]) -> Result<f64> {
    let r = radius(x);
    if r == 0.0 {
        return Err(Error::Domain("identity residual requested at the origin".into()));
    }
    let n = x.len();
    let ae = params.hardy_exponent();
    let av = a.eval(x).ok_or_else(|| Error::Domain(format!("{} is singular at {x:?}", a.name())))?;
    let (v, g) = u.eval(x);
    let w = r.powf(ae);
    let mut res = vec![ZERO; n];
    for j in 0..n {
        let grad_a_u = g[j] + I * av[j] * v;
        // ∇(u |x|^a) = |x|^a ∇u + a u |x|^{a-2} x, then + i A (u |x|^a)
        let prod = g[j] * w + v * (ae * r.powf(ae - 2.0) * x[j]) + I * av[j] * (v * w);
        res[j] = grad_a_u - prod / w + v * (ae / r) * (x[j] / r);
    }
    Ok(cnorm(&res))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pr(n: usize) -> Params {
        Params::new(1.5, n).unwrap()
    }

    #[test]
    fn family_and_midpoint_value() {
        let fields = builtin_fields(&pr(2));
        assert!(fields.len() >= 4);
        let bump = &fields[0];
        let v = bump.value(&[1.25, 0.0]);
        assert!((v.re - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn support_is_enforced() {
        for n in [2, 3] {
            for f in builtin_fields(&pr(n)) {
                for r in [0.1, 0.5, 2.0, 3.0] {
                    let mut x = vec![0.0; n];
                    x[0] = r * 0.6;
                    x[1] = r * 0.8;
                    let (v, g) = f.eval(&x);
                    assert_eq!(v, ZERO, "{} at r = {r}", f.name());
                    assert!(g.iter().all(|z| *z == ZERO));
                }
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        for n in [2, 3, 4] {
            for f in builtin_fields(&pr(n)) {
                let err = f.check_gradient(n, 100, 7).unwrap();
                assert!(err < 1e-6, "{} in N = {n}: {err}", f.name());
            }
        }
        let cyl = ScalarField::cylindrical("c", 2, 0.5, 2.0, 0.8, Modulation::Phase(1)).unwrap();
        assert!(cyl.check_gradient(3, 100, 3).unwrap() < 1e-6);
    }

    #[test]
    fn bump_gradient_at_midpoint_matches_differences() {
        let f = &builtin_fields(&pr(2))[0];
        let x = [1.25 * 0.6, 1.25 * 0.8];
        let (_, g) = f.eval(&x);
        let h = 1e-5;
        for j in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let fd = (f.value(&xp) - f.value(&xm)) / (2.0 * h);
            assert!((fd - g[j]).norm() < 1e-8);
        }
    }

    #[test]
    fn magnetic_gradient_basics() {
        let fields = builtin_fields(&pr(2));
        let x = [1.0, 1.0];
        let g0 = magnetic_gradient(&fields[0], &Potential::zero(), &x).unwrap();
        assert!(g0.0.iter().all(|z| z.im == 0.0));
        let (_, g) = fields[3].eval(&x);
        let gz = magnetic_gradient(&fields[3], &Potential::zero(), &x).unwrap();
        assert_eq!(gz.0, g[..2].to_vec());
        assert!(magnetic_gradient(&fields[0], &Potential::aharonov_bohm(0.5), &[0.0, 0.0]).is_err());
    }

    #[test]
    fn magnetic_gradient_against_differences() {
        let wave = &builtin_fields(&pr(2))[3];
        let ab = Potential::aharonov_bohm(0.5);
        let x = [1.0, 1.0];
        let got = magnetic_gradient(wave, &ab, &x).unwrap();
        let u = wave.value(&x);
        let av = ab.eval(&x).unwrap();
        let h = 1e-5;
        for j in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let fd = (wave.value(&xp) - wave.value(&xm)) / (2.0 * h) + I * av[j] * u;
            assert!((fd - got.0[j]).norm() < 1e-6 * (got.norm() + u.norm()));
        }
    }

    #[test]
    fn diamagnetic_equality_for_real_fields() {
        let bump = &builtin_fields(&pr(2))[0];
        let pts = sample_points(bump, 2, 200, 1);
        let rep = diamagnetic_check(bump, &Potential::zero(), &pts, 1e-12).unwrap();
        assert!(rep.worst_margin.abs() < 1e-12);
    }

    #[test]
    fn diamagnetic_strict_for_phase() {
        let phase = &builtin_fields(&pr(2))[1];
        let pts = sample_points(phase, 2, 200, 2);
        let rep = diamagnetic_check(phase, &Potential::zero(), &pts, 1e-12).unwrap();
        assert!(rep.worst_margin > 0.0);
    }

    #[test]
    fn identity_2_6_small_everywhere() {
        let params = pr(2);
        let pots = [Potential::zero(), Potential::aharonov_bohm(0.5), Potential::constant_field(1.0)];
        for f in builtin_fields(&params) {
            for a in &pots {
                for x in sample_points(&f, 2, 100, 5) {
                    let r = identity_2_6_residual(&params, &f, a, &x).unwrap();
                    let g = magnetic_gradient(&f, a, &x).unwrap();
                    let scale = g.norm() + f.value(&x).norm() / radius(&x);
                    assert!(r <= 1e-10 * scale.max(1e-300), "{} / {}: {r}", f.name(), a.name());
                }
            }
        }
        assert!(identity_2_6_residual(&params, &builtin_fields(&params)[0], &pots[0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn combinations_are_linear() {
        let fields = builtin_fields(&pr(2));
        let c = Complex64::new(0.3, -1.2);
        let combo = ScalarField::combination("mix", vec![(Complex64::new(1.0, 0.0), fields[0].clone()), (c, fields[1].clone())]).unwrap();
        let x = [0.9, -0.4];
        let (v, g) = combo.eval(&x);
        let (v0, g0) = fields[0].eval(&x);
        let (v1, g1) = fields[1].eval(&x);
        assert!((v - (v0 + c * v1)).norm() < 1e-15);
        assert!((g[1] - (g0[1] + c * g1[1])).norm() < 1e-15);
    }
}
