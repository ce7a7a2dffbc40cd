//! Integrals of radial and phase fields against one-dimensional quadrature.

mod common;

use common::{bump, rel, simpson_pieces, sphere_area};
use hardylab::fields::{builtin_fields, Potential, DEFAULT_SUPPORT};
use hardylab::functionals::{case_integrals, hardy_functional, log_weight_integral};
use hardylab::kernel::Params;

const PANEL: usize = 20_000;

/// `|S^{N-1}| ∫ f(r) r^{N-1} dr` over the default support, split at the
/// kinks of the integrands (the bump peak and `r = 1`).
fn radial(n: usize, f: impl Fn(f64) -> f64 + Copy) -> f64 {
    let (lo, hi) = DEFAULT_SUPPORT;
    let g = move |r: f64| f(r) * r.powi(n as i32 - 1);
    sphere_area(n) * simpson_pieces(g, lo, hi, &[0.5 * (lo + hi), 1.0], PANEL)
}

fn field(params: &Params, name: &str) -> hardylab::fields::ScalarField {
    builtin_fields(params).into_iter().find(|u| u.name() == name).unwrap()
}

#[test]
fn radial_bump_integrals() {
    let (lo, hi) = DEFAULT_SUPPORT;
    for p in [1.2, 1.5, 1.8] {
        for n in [2, 3] {
            let params = Params::new(p, n).unwrap();
            let a = (n as f64 - p) / p;
            let u = field(&params, "bump");
            let c = case_integrals(&params, &u, &Potential::zero(), 1e-9).unwrap();

            let grad = radial(n, |r| bump(r, lo, hi).1.abs().powf(p));
            let mass = radial(n, |r| bump(r, lo, hi).0.powf(p) / r.powf(p));
            let hardy = grad - a.powf(p) * mass;
            // for a radial bump, η = f' and ζ = f' + a f/r point along x/|x|
            let rem = radial(n, |r| {
                let (f, df) = bump(r, lo, hi);
                if f == 0.0 {
                    return 0.0;
                }
                let z = df + a * f / r;
                (df.abs() + a * f / r).powf(p - 2.0) * z * z
            });
            let log_mass = radial(n, |r| {
                let f = bump(r, lo, hi).0;
                let l = r.ln().abs();
                f.powf(p) / (r.powf(p) * (1.0 + l * l + l.powf(p)))
            });

            assert!(rel(c.gradient, grad) < 1e-8, "gradient p={p} N={n}: {} vs {grad}", c.gradient);
            assert!(rel(c.mass, mass) < 1e-8, "mass p={p} N={n}: {} vs {mass}", c.mass);
            assert!(rel(c.hardy, hardy) < 1e-8, "H p={p} N={n}: {} vs {hardy}", c.hardy);
            assert!(rel(c.rem, rem) < 1e-8, "Rem p={p} N={n}: {} vs {rem}", c.rem);
            assert!(rel(c.log_mass, log_mass) < 1e-8, "log mass p={p} N={n}: {} vs {log_mass}", c.log_mass);

            if n == 2 {
                let h = hardy_functional(&params, &u, &Potential::zero(), 1e-9).unwrap();
                assert!(rel(h, hardy) < 1e-8);
                let lw = log_weight_integral(&params, &u, 1e-9).unwrap();
                assert!(rel(lw, log_mass) < 1e-8);
            }
        }
    }
}

/// `u = f(r)e^{imθ}` under the Aharonov–Bohm potential has
/// `|∇_A u|² = f'² + (m+α)² f²/r²`.
#[test]
fn aharonov_bohm_phase_fields() {
    let (lo, hi) = DEFAULT_SUPPORT;
    for p in [1.2, 1.5, 1.8] {
        let params = Params::new(p, 2).unwrap();
        let a = (2.0 - p) / p;
        for (name, m) in [("bump", 0.0), ("phase1", 1.0), ("phase2", 2.0)] {
            for alpha in [0.5, 1.0, -0.3] {
                let u = field(&params, name);
                let h = hardy_functional(&params, &u, &Potential::aharonov_bohm(alpha), 1e-10).unwrap();
                let k = m + alpha;
                let grad = radial(2, |r| {
                    let (f, df) = bump(r, lo, hi);
                    (df * df + k * k * f * f / (r * r)).powf(0.5 * p)
                });
                let mass = radial(2, |r| bump(r, lo, hi).0.powf(p) / r.powf(p));
                let oracle = grad - a.powf(p) * mass;
                assert!(rel(h, oracle) < 1e-8, "{name}, α = {alpha}, p = {p}: {h} vs {oracle}");
            }
        }
    }
}

/// An integer flux is a gauge transform of `e^{iθ}`: `H(phase_m, AB(1)) = H(phase_{m+1}, 0)`.
#[test]
fn integer_flux_is_a_gauge() {
    let params = Params::new(1.5, 2).unwrap();
    let h1 = hardy_functional(&params, &field(&params, "phase1"), &Potential::aharonov_bohm(1.0), 1e-10).unwrap();
    let h2 = hardy_functional(&params, &field(&params, "phase2"), &Potential::zero(), 1e-10).unwrap();
    assert!(rel(h1, h2) < 1e-9, "{h1} vs {h2}");
}

#[test]
fn bump_profile_matches_library() {
    let (lo, hi) = DEFAULT_SUPPORT;
    for i in 1..200 {
        let r = lo + (hi - lo) * i as f64 / 200.0;
        let (f, df) = bump(r, lo, hi);
        let (g, dg) = hardylab::fields::bump(r, lo, hi);
        assert!(rel(f, g) < 1e-14 && rel(df, dg) < 1e-12, "r = {r}");
    }
}
