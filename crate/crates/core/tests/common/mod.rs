#![allow(dead_code)]

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Writes past the test harness capture so the line always shows.
pub fn report(criterion: u32, title: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "criterion {criterion:>2} [{verdict}] {title}: {detail}");
    let _ = out.flush();
}

/// Radical inverse of `i` in `base`.
pub fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..n {
        let v = f(a + h * i as f64);
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even)
}

/// Simpson over `[a, b]` split at the interior `cuts`.
pub fn simpson_pieces(f: impl Fn(f64) -> f64 + Copy, a: f64, b: f64, cuts: &[f64], n: usize) -> f64 {
    let mut knots = vec![a];
    knots.extend(cuts.iter().copied().filter(|&c| c > a && c < b));
    knots.push(b);
    knots.windows(2).map(|w| simpson(f, w[0], w[1], n)).sum()
}

/// `exp(-1/(1-z²))` on `z = (2r - lo - hi)/(hi - lo)` and its `r`-derivative.
pub fn bump(r: f64, lo: f64, hi: f64) -> (f64, f64) {
    let half = 0.5 * (hi - lo);
    let z = (r - 0.5 * (lo + hi)) / half;
    if z.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let v = (1.0 / (z * z - 1.0)).exp();
    // d/dz exp(1/(z²-1)) = -2z/(z²-1)² exp(1/(z²-1))
    let dz = -2.0 * z / (z * z - 1.0).powi(2) * v;
    (v, dz / half)
}

/// Area of the unit sphere in `R^n` for `n = 2, 3, 4`.
pub fn sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    match n {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        4 => 2.0 * PI * PI,
        _ => panic!("no sphere area for n = {n}"),
    }
}

/// Unit normal or log-uniform magnitude in `[1e-6, 1e6]` with random sign.
pub fn component(rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen::<bool>() {
        rng.sample::<f64, _>(StandardNormal)
    } else {
        let e: f64 = rng.gen_range(-6.0..=6.0);
        let m = 10f64.powf(e);
        if rng.gen::<bool>() {
            m
        } else {
            -m
        }
    }
}

pub fn cvec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(component(rng), component(rng))).collect()
}

/// `(η, ζ)` with special configurations mixed in: `ζ = η`, `ζ = 0`,
/// `ζ` close to `η`, and `ζ` parallel to `η`.
pub fn pair(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let eta = cvec(rng, n);
    let zeta = match rng.gen_range(0..10) {
        0 => eta.clone(),
        1 => vec![Complex64::new(0.0, 0.0); n],
        2 => {
            let d = cvec(rng, n);
            let dn = norm(&d);
            let eps = 10f64.powf(rng.gen_range(-10.0..-2.0)) * norm(&eta);
            eta.iter().zip(&d).map(|(a, b)| a + b * (eps / dn)).collect()
        }
        3 => {
            let c = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            eta.iter().map(|a| a * c).collect()
        }
        _ => cvec(rng, n),
    };
    (eta, zeta)
}

/// Euclidean norm in `C^n` by plain summation in extended range.
pub fn norm(v: &[Complex64]) -> f64 {
    let m = v.iter().map(|z| z.re.abs().max(z.im.abs())).fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    m * v.iter().map(|z| (z.re / m).powi(2) + (z.im / m).powi(2)).sum::<f64>().sqrt()
}

/// Relative difference against the larger magnitude.
pub fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}
