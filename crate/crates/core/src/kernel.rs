//! The convexity-defect kernel `K_p(η, ζ)` and its companions.
//!
//! For `1 < p < 2` the exponent `p - 2` is negative, so every power of
//! `|η - ζ|` is routed through `|η - ζ|^{p-1}` times a unit vector and the
//! product is pinned to zero once `|η - ζ|` drops below [`SINGULAR_CUTOFF`].

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Below this norm the singular factor `|t|^{p-2} t` is replaced by its limit 0.
pub const SINGULAR_CUTOFF: f64 = 1e-300;

/// Exponent and dimensions. `k` is the optional cylindrical split dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    p: f64,
    n: usize,
    k: Option<usize>,
}

impl Params {
    /// Validated `1 < p < 2 <= N`.
    pub fn new(p: f64, n: usize) -> Result<Self> {
        if !p.is_finite() || p <= 1.0 || p >= 2.0 {
            return Err(Error::InvalidParams(format!("p = {p} must satisfy 1 < p < 2")));
        }
        if n < 2 {
            return Err(Error::InvalidParams(format!("N = {n} must satisfy N >= 2")));
        }
        Ok(Self { p, n, k: None })
    }

    /// Validated `1 < p < 2 <= k <= N` (and therefore `p < k`).
    pub fn with_split(p: f64, n: usize, k: usize) -> Result<Self> {
        let base = Self::new(p, n)?;
        if k < 2 || k > n {
            return Err(Error::InvalidParams(format!("split k = {k} must satisfy 2 <= k <= N = {n}")));
        }
        if p >= k as f64 {
            return Err(Error::InvalidParams(format!("p = {p} must be below k = {k}")));
        }
        Ok(Self { k: Some(k), ..base })
    }

    /// The looser regime `1 < p < N` used for cross-checks of the Hardy functional,
    /// which also admits `p >= 2`.
    pub fn hardy_regime(p: f64, n: usize) -> Result<Self> {
        if !p.is_finite() || p <= 1.0 || p >= n as f64 {
            return Err(Error::InvalidParams(format!("p = {p} must satisfy 1 < p < N = {n}")));
        }
        Ok(Self { p, n, k: None })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn split(&self) -> Option<usize> {
        self.k
    }

    /// `(N - p) / p`.
    pub fn hardy_exponent(&self) -> f64 {
        (self.n as f64 - self.p) / self.p
    }

    /// The sharp Hardy constant `((N - p)/p)^p`.
    pub fn hardy_constant(&self) -> f64 {
        self.hardy_exponent().powf(self.p)
    }
}

/// A vector in `C^N`, stored as complex components.
#[derive(Debug, Clone, PartialEq)]
pub struct CVec(pub Vec<Complex64>);

impl CVec {
    pub fn from_parts(re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::Domain(format!(
                "real and imaginary parts differ in length ({} vs {})",
                re.len(),
                im.len()
            )));
        }
        let v = CVec(re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect());
        v.check_finite()?;
        Ok(v)
    }

    pub fn real(re: &[f64]) -> Self {
        CVec(re.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        CVec(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn re(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.re).collect()
    }

    pub fn im(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.im).collect()
    }

    pub fn norm(&self) -> f64 {
        cnorm(&self.0)
    }

    pub fn sub(&self, other: &CVec) -> CVec {
        CVec(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    fn check_finite(&self) -> Result<()> {
        if self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::Domain("vector has non-finite components".into()))
        }
    }
}

/// Euclidean norm of a real vector by scaled sum of squares.
pub fn rnorm(v: &[f64]) -> f64 {
    scaled_norm(v.iter().copied())
}

/// Euclidean norm of a complex vector by scaled sum of squares.
pub fn cnorm(v: &[Complex64]) -> f64 {
    scaled_norm(v.iter().flat_map(|z| [z.re, z.im]))
}

fn scaled_norm(values: impl Iterator<Item = f64>) -> f64 {
    let mut scale = 0.0_f64;
    let mut ssq = 1.0_f64;
    for x in values {
        if x != 0.0 {
            let ax = x.abs();
            if scale < ax {
                let r = scale / ax;
                ssq = 1.0 + ssq * r * r;
                scale = ax;
            } else {
                let r = ax / scale;
                ssq += r * r;
            }
        }
    }
    scale * ssq.sqrt()
}

/// `Re(v · w̄)` summed over components.
pub fn re_dot_conj(v: &[Complex64], w: &[Complex64]) -> f64 {
    v.iter().zip(w).map(|(a, b)| a.re * b.re + a.im * b.im).sum()
}

fn check_pair(params: &Params, eta: &CVec, zeta: &CVec) -> Result<()> {
    if eta.len() != params.dim() || zeta.len() != params.dim() {
        return Err(Error::Domain(format!(
            "vector lengths ({}, {}) do not match N = {}",
            eta.len(),
            zeta.len(),
            params.dim()
        )));
    }
    eta.check_finite()?;
    zeta.check_finite()
}

/// `K_p(η, ζ) = |η|^p - |η-ζ|^p - p |η-ζ|^{p-2} Re((η-ζ)·ζ̄)` with the third term 0 at `η = ζ`.
pub fn k_p(params: &Params, eta: &CVec, zeta: &CVec) -> Result<f64> {
    check_pair(params, eta, zeta)?;
    Ok(kernel_value(params.p(), &eta.0, &zeta.0))
}

/// Unchecked kernel evaluation on slices; the hot path for quadrature.
pub fn kernel_value(p: f64, eta: &[Complex64], zeta: &[Complex64]) -> f64 {
    let mut diff = [Complex64::new(0.0, 0.0); 8];
    let n = eta.len();
    if n <= diff.len() {
        for i in 0..n {
            diff[i] = eta[i] - zeta[i];
        }
        kernel_from_parts(p, cnorm(eta), &diff[..n], zeta)
    } else {
        let d: Vec<Complex64> = eta.iter().zip(zeta).map(|(a, b)| a - b).collect();
        kernel_from_parts(p, cnorm(eta), &d, zeta)
    }
}

fn kernel_from_parts(p: f64, eta_norm: f64, diff: &[Complex64], zeta: &[Complex64]) -> f64 {
    let dn = cnorm(diff);
    let head = eta_norm.powf(p);
    if dn < SINGULAR_CUTOFF {
        return head;
    }
    // |d|^{p-2} Re(d·ζ̄) = |d|^{p-1} Re(d/|d| · ζ̄)
    let proj = re_dot_conj(diff, zeta) / dn;
    head - dn.powf(p) - p * dn.powf(p - 1.0) * proj
}

/// Scalar-argument kernel for `η, ζ ∈ C` (the `N = 1` complex case).
pub fn kernel_scalar(p: f64, eta: Complex64, zeta: Complex64) -> f64 {
    kernel_from_parts(p, eta.norm(), &[eta - zeta], &[zeta])
}

/// Magnitude of the three terms of `K_p`; the natural scale for rounding slack.
pub fn kernel_scale(p: f64, eta: &[Complex64], zeta: &[Complex64]) -> f64 {
    let d: Vec<Complex64> = eta.iter().zip(zeta).map(|(a, b)| a - b).collect();
    let dn = cnorm(&d);
    cnorm(eta).powf(p) + dn.powf(p) + p * dn.powf(p - 1.0) * cnorm(zeta)
}

/// `K_p` from the real decomposition `η - ζ = a + ib`, `ζ = c + id`.
pub fn k_p_via_abcd(params: &Params, a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Result<f64> {
    let n = params.dim();
    if [a.len(), b.len(), c.len(), d.len()].iter().any(|&l| l != n) {
        return Err(Error::Domain(format!("component vectors must have length N = {n}")));
    }
    if a.iter().chain(b).chain(c).chain(d).any(|x| !x.is_finite()) {
        return Err(Error::Domain("non-finite component".into()));
    }
    let p = params.p();
    // |η|² = |a+c|² + |b+d|²
    let eta_norm = scaled_norm(
        a.iter().zip(c).map(|(x, y)| x + y).chain(b.iter().zip(d).map(|(x, y)| x + y)),
    );
    let ab = scaled_norm(a.iter().chain(b).copied());
    let cross: f64 = a.iter().zip(c).map(|(x, y)| x * y).sum::<f64>()
        + b.iter().zip(d).map(|(x, y)| x * y).sum::<f64>();
    let head = eta_norm.powf(p);
    if ab < SINGULAR_CUTOFF {
        return Ok(head);
    }
    // (|a|²+|b|²)^{p/2-1} (a·c + b·d), written through the norm to avoid squaring
    Ok(head - ab.powf(p) - p * ab.powf(p - 1.0) * (cross / ab))
}

/// The three members of the sandwich `lower <= mid <= upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sandwich {
    pub lower: f64,
    pub mid: f64,
    pub upper: f64,
}

/// `((|η|+|η-ζ|)^{p-2}|ζ|², min{|ζ|^p, |η-ζ|^{p-2}|ζ|²}, 3^{2-p}(|η|+|η-ζ|)^{p-2}|ζ|²)`.
pub fn sandwich_bounds(params: &Params, eta: &CVec, zeta: &CVec) -> Result<Sandwich> {
    check_pair(params, eta, zeta)?;
    let diff = eta.sub(zeta);
    Ok(sandwich_from_norms(params.p(), eta.norm(), diff.norm(), zeta.norm()))
}

/// Sandwich from the three norms `|η|`, `|η-ζ|`, `|ζ|`.
pub fn sandwich_from_norms(p: f64, eta: f64, diff: f64, zeta: f64) -> Sandwich {
    let sum = eta + diff;
    if sum == 0.0 || zeta == 0.0 {
        return Sandwich { lower: 0.0, mid: 0.0, upper: 0.0 };
    }
    let lower = sum.powf(p - 2.0) * zeta * zeta;
    let first = zeta.powf(p);
    let mid = if diff < SINGULAR_CUTOFF {
        first
    } else {
        first.min(diff.powf(p - 2.0) * zeta * zeta)
    };
    Sandwich { lower, mid, upper: 3f64.powf(2.0 - p) * lower }
}

/// `g_p(s) = (s²+2s+1)^{p/2} - 1 - p s`, positive for every `s != 0`.
pub fn g_p(params: &Params, s: f64) -> Result<f64> {
    if !s.is_finite() {
        return Err(Error::Domain(format!("g_p argument {s} is not finite")));
    }
    Ok(g_p_value(params.p(), s))
}

pub(crate) fn g_p_value(p: f64, s: f64) -> f64 {
    if s > -1.0 {
        (p * s.ln_1p()).exp_m1() - p * s
    } else {
        (-1.0 - s).powf(p) - 1.0 - p * s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pr(p: f64, n: usize) -> Params {
        Params::new(p, n).unwrap()
    }

    #[test]
    fn params_reject_out_of_regime() {
        assert!(Params::new(2.0, 3).is_err());
        assert!(Params::new(1.0, 3).is_err());
        assert!(Params::new(1.5, 1).is_err());
        assert!(Params::new(f64::NAN, 3).is_err());
        assert!(Params::with_split(1.5, 3, 4).is_err());
        assert!(Params::with_split(1.5, 3, 1).is_err());
        assert_eq!(Params::with_split(1.5, 3, 2).unwrap().split(), Some(2));
        assert!(Params::hardy_regime(2.5, 3).is_ok());
        assert!(Params::hardy_regime(3.0, 3).is_err());
    }

    #[test]
    fn kernel_diagonal_and_zero() {
        let params = pr(1.5, 3);
        let eta = CVec::real(&[1.0, 0.0, 0.0]);
        assert_eq!(k_p(&params, &eta, &eta).unwrap(), 1.0);
        let eta = CVec::from_parts(&[0.3, -1.2, 2.0], &[0.5, 0.1, -0.7]).unwrap();
        assert_eq!(k_p(&params, &eta, &CVec::zeros(3)).unwrap(), 0.0);
    }

    #[test]
    fn kernel_hand_value() {
        let params = pr(1.5, 2);
        let v = k_p(&params, &CVec::real(&[2.0, 0.0]), &CVec::real(&[1.0, 0.0])).unwrap();
        let expected = 2f64.powf(1.5) - 1.0 - 1.5;
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 0.328_427_1).abs() < 1e-7);
    }

    #[test]
    fn kernel_rejects_bad_input() {
        let params = pr(1.5, 2);
        let bad = CVec(vec![Complex64::new(f64::NAN, 0.0), Complex64::new(0.0, 0.0)]);
        assert!(k_p(&params, &bad, &CVec::zeros(2)).is_err());
        assert!(k_p(&params, &CVec::zeros(3), &CVec::zeros(2)).is_err());
        assert!(CVec::from_parts(&[1.0], &[f64::INFINITY]).is_err());
    }

    #[test]
    fn abcd_edge_cases() {
        let params = pr(1.3, 2);
        let z = [0.0, 0.0];
        let c = [0.4, -1.1];
        let d = [2.0, 0.3];
        let zeta = CVec::from_parts(&c, &d).unwrap();
        let via = k_p_via_abcd(&params, &z, &z, &c, &d).unwrap();
        assert!((via - zeta.norm().powf(1.3)).abs() < 1e-14);
        assert_eq!(k_p_via_abcd(&params, &c, &d, &z, &z).unwrap(), 0.0);
    }

    #[test]
    fn sandwich_hand_values() {
        let params = pr(1.5, 2);
        let s = sandwich_bounds(&params, &CVec::real(&[2.0, 0.0]), &CVec::real(&[1.0, 0.0])).unwrap();
        assert!((s.lower - 3f64.powf(-0.5)).abs() < 1e-15);
        assert!((s.mid - 1.0).abs() < 1e-15);
        assert!((s.upper - 1.0).abs() < 1e-15);
        let s = sandwich_bounds(&params, &CVec::real(&[2.0, 0.0]), &CVec::zeros(2)).unwrap();
        assert_eq!((s.lower, s.mid, s.upper), (0.0, 0.0, 0.0));
        let s = sandwich_bounds(&params, &CVec::zeros(2), &CVec::zeros(2)).unwrap();
        assert_eq!((s.lower, s.mid, s.upper), (0.0, 0.0, 0.0));
        // η = ζ: the second branch is +∞ and the min falls back to |ζ|^p
        let e = CVec::real(&[0.0, 4.0]);
        let s = sandwich_bounds(&params, &e, &e).unwrap();
        assert!((s.mid - 8.0).abs() < 1e-12);
    }

    #[test]
    fn g_p_hand_values() {
        let params = pr(1.5, 2);
        assert_eq!(g_p(&params, 0.0).unwrap(), 0.0);
        assert!((g_p(&params, -1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((g_p(&params, 1.0).unwrap() - (2f64.powf(1.5) - 2.5)).abs() < 1e-15);
        assert!(g_p(&params, f64::INFINITY).is_err());
    }

    #[test]
    fn g_p_positive_on_log_grid() {
        for &p in &[1.01, 1.3, 1.5, 1.7, 1.99] {
            for i in 0..=160 {
                let m = 10f64.powf(-8.0 + 0.1 * i as f64);
                for s in [m, -m] {
                    let v = g_p_value(p, s);
                    assert!(v > 0.0, "g_p({s}) = {v} at p = {p}");
                }
            }
        }
    }

    #[test]
    fn norms_survive_extreme_magnitudes() {
        assert!((rnorm(&[3e200, 4e200]) / 5e200 - 1.0).abs() < 1e-15);
        assert!((rnorm(&[3e-200, 4e-200]) - 5e-200).abs() < 1e-214);
        assert_eq!(rnorm(&[]), 0.0);
    }
}
