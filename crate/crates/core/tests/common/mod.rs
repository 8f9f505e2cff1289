#![allow(clippy::excessive_precision)]

//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

pub mod combinatorics;

/// (κ, c) of the models with κ < 8 in the table of conformally invariant
/// curves; several models share κ = 4.
pub const CENTRAL_CHARGES: &[(f64, f64)] = &[
    (2.0, -2.0),
    (8.0 / 3.0, 0.0),
    (3.0, 0.5),
    (10.0 / 3.0, 0.8),
    (4.0, 1.0),
    (24.0 / 5.0, 0.8),
    (16.0 / 3.0, 0.5),
    (6.0, 0.0),
];

/// (R, P(R), m(R)) for Cardy's formula, to 30 digits from an
/// arbitrary-precision evaluation.
pub const CARDY_TABLE: [(f64, f64, f64); 6] = [
    (0.5, 0.824353106199344760870641499053, 0.970562748477140585620264690516),
    (1.0, 0.5, 0.5),
    (1.5, 0.296494998201343719781759753189, 0.133894127265743502237150384124),
    (2.0, 0.175646893800655239129358500947, 0.0294372515228594143797353094836),
    (3.0, 0.0616380967048880131257619584112, 0.00129035906222736289513948218482),
    (4.0, 0.0216300290908667550711370994622, 5.57959210499423734518538813082e-5),
];

/// ∫₀¹ g(x, 1 − x) dx by tanh-sinh quadrature. `g` receives both x and 1 − x,
/// each accurate near its own endpoint, so integrable endpoint singularities
/// are handled. Returns (∫ g, ∫ |g|).
pub fn tanh_sinh_unit(g: impl Fn(f64, f64) -> f64) -> (f64, f64) {
    let step = 1.0 / 256.0;
    let (mut sum, mut abs) = (0.0, 0.0);
    let n = (6.0 / step) as i64;
    for k in -n..=n {
        let t = k as f64 * step;
        let s = PI * t.sinh();
        // x = σ(s), 1 − x = σ(−s)
        let x = 1.0 / (1.0 + (-s).exp());
        let xc = 1.0 / (1.0 + s.exp());
        if x == 0.0 || xc == 0.0 {
            continue;
        }
        let w = PI * t.cosh() * x * xc;
        let v = g(x, xc) * w;
        if v.is_finite() {
            sum += v;
            abs += v.abs();
        }
    }
    (sum * step, abs * step)
}

/// ₂F₁(a, b; c | z) from Euler's integral, valid for c > b > 0 and z < 1
/// (z = 1 too when c − a − b > 0).
/// The Beta normalization is integrated with the same rule, so no Gamma
/// function enters. Returns (value, absolute error scale).
pub fn euler_2f1(a: f64, b: f64, c: f64, z: f64) -> (f64, f64) {
    assert!(c > b && b > 0.0 && (z < 1.0 || (z == 1.0 && c - a - b > 0.0)));
    let kernel = |t: f64, tc: f64| t.powf(b - 1.0) * tc.powf(c - b - 1.0);
    let (beta, _) = tanh_sinh_unit(kernel);
    let (num, abs) = tanh_sinh_unit(|t, tc| {
        // 1 − z t without cancellation near t = 1
        let w = (1.0 - z) + z * tc;
        kernel(t, tc) * w.powf(-a)
    });
    (num / beta, abs / beta)
}

/// K(m) = ∫₀^{π/2} dθ/√(1 − m sin²θ) by the trapezoid rule over a full
/// period, which converges geometrically for this periodic integrand.
pub fn elliptic_k_trapezoid(m: f64) -> f64 {
    let n = 20_000;
    let h = 2.0 * PI / n as f64;
    let s: f64 = (0..n)
        .map(|i| {
            let th = i as f64 * h;
            1.0 / (1.0 - m * th.sin().powi(2)).sqrt()
        })
        .sum();
    s * h / 4.0
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
