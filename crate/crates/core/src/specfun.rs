//! Real-argument Gauss hypergeometric function and the complete elliptic
//! integral of the first kind.
//!
//! ₂F₁ is summed directly for `0 ≤ z ≤ 1/2`. Arguments in `(1/2, 1)` go through
//! the `1 − z` connection formula, including its logarithmic form when
//! `c − a − b` is an integer. Negative arguments are first folded into
//! `(0, 1)` by the Pfaff transformation.
//!
//! K uses the parameter convention `m = k²`:
//!
//! ```text
//! K(m) = ∫₀^{π/2} dθ / √(1 − m sin²θ) = π / (2 · AGM(1, √(1 − m)))
//! ```

use std::f64::consts::PI;

use statrs::function::gamma::{digamma, gamma};

use crate::error::{Error, Result};

/// Relative size of the next series term below which summation stops.
const SERIES_RTOL: f64 = 1e-16;
const MAX_TERMS: usize = 10_000;
/// Distance to an integer below which `c − a − b` takes the logarithmic branch.
const INTEGER_SNAP: f64 = 1e-8;
const POLE_TOL: f64 = 1e-14;

/// Parameters and argument of ₂F₁(a, b; c | z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub z: f64,
}

impl HyperParams {
    pub fn new(a: f64, b: f64, c: f64, z: f64) -> Self {
        Self { a, b, c, z }
    }
}

/// ₂F₁(a, b; c | z) for real z < 1.
pub fn gauss_2f1(p: &HyperParams) -> Result<f64> {
    hyp2f1(p.a, p.b, p.c, p.z)
}

/// Shorthand for [`gauss_2f1`].
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    hyp2f1_split(a, b, c, z, 1.0 - z)
}

/// ₂F₁ with the complement `zc = 1 − z` supplied by the caller.
///
/// Callers that can form `1 − z` without cancellation (cross-ratios built from
/// coordinate gaps, elliptic moduli near 1) should use this entry point so the
/// connection formula sees the accurate complement.
pub fn hyp2f1_split(a: f64, b: f64, c: f64, z: f64, zc: f64) -> Result<f64> {
    if ![a, b, c, z, zc].iter().all(|v| v.is_finite()) {
        return Err(Error::Domain(format!(
            "non-finite input to 2F1: a={a}, b={b}, c={c}, z={z}"
        )));
    }
    if is_nonpositive_integer(c) {
        return Err(Error::Parameter(format!(
            "c = {c} is a nonpositive integer (pole of 2F1)"
        )));
    }
    // z may round to 1 while the supplied complement is still positive
    if z > 1.0 || zc <= 0.0 {
        return Err(Error::Domain(format!("2F1 requires z < 1, got z = {z}")));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if is_nonpositive_integer(a) || is_nonpositive_integer(b) {
        return Ok(terminating_sum(a, b, c, z));
    }
    if z < 0.0 {
        // Pfaff: F(a,b;c;z) = (1-z)^{-a} F(a, c-b; c; z/(z-1)).
        let w = z / (z - 1.0);
        let wc = 1.0 / zc;
        return Ok(zc.powf(-a) * hyp2f1_split(a, c - b, c, w, wc)?);
    }
    if z <= 0.5 {
        return power_series(a, b, c, z);
    }

    let s = c - a - b;
    let m = s.round();
    if (s - m).abs() < INTEGER_SNAP {
        if m < 0.0 {
            // Euler: F(a,b;c;z) = (1-z)^{c-a-b} F(c-a, c-b; c; z), flipping the sign of c-a-b.
            return Ok(zc.powf(s) * hyp2f1_split(c - a, c - b, c, z, zc)?);
        }
        return log_connection(a, b, m as usize, zc);
    }

    let g1 = gamma(c) * gamma(s) * rgamma(c - a) * rgamma(c - b);
    let g2 = gamma(c) * gamma(-s) * rgamma(a) * rgamma(b);
    let mut value = 0.0;
    if g1 != 0.0 {
        value += g1 * power_series(a, b, 1.0 - s, zc)?;
    }
    if g2 != 0.0 {
        value += g2 * zc.powf(s) * power_series(c - a, c - b, 1.0 + s, zc)?;
    }
    Ok(value)
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= POLE_TOL && (x - x.round()).abs() < POLE_TOL
}

/// 1/Γ(x), zero at the poles of Γ.
fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

fn terminating_sum(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let degree = if is_nonpositive_integer(a) && is_nonpositive_integer(b) {
        (-a.round()).min(-b.round())
    } else if is_nonpositive_integer(a) {
        -a.round()
    } else {
        -b.round()
    } as usize;
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..degree {
        let n = n as f64;
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
        sum += term;
    }
    sum
}

/// Direct Gauss series; intended for |z| ≤ 1/2.
fn power_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..MAX_TERMS {
        let n = n as f64;
        let ratio = (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
        term *= ratio;
        sum += term;
        if term.abs() <= SERIES_RTOL * sum.abs() && ratio.abs() < 1.0 {
            return Ok(sum);
        }
        if term == 0.0 {
            return Ok(sum);
        }
    }
    Err(Error::SeriesConvergence {
        terms: MAX_TERMS,
        partial_sum: sum,
        last_term: term,
    })
}

/// The `1 − z` connection formula when `c = a + b + m` with integer `m ≥ 0`,
/// where the two Frobenius exponents at z = 1 differ by an integer and a
/// logarithm appears. `w = 1 − z ∈ (0, 1/2)`.
fn log_connection(a: f64, b: f64, m: usize, w: f64) -> Result<f64> {
    let mf = m as f64;
    let ln_w = w.ln();

    // Finite part: Γ(m)Γ(a+b+m)/(Γ(a+m)Γ(b+m)) Σ_{n<m} (a)_n (b)_n / (n! (1-m)_n) w^n.
    let mut finite = 0.0;
    if m > 0 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 0..m - 1 {
            let nf = n as f64;
            term *= (a + nf) * (b + nf) / ((nf + 1.0) * (1.0 - mf + nf)) * w;
            sum += term;
        }
        finite = gamma(mf) * gamma(a + b + mf) * rgamma(a + mf) * rgamma(b + mf) * sum;
    }

    // Logarithmic part:
    // -(-w)^m Γ(a+b+m)/(Γ(a)Γ(b)) Σ_n (a+m)_n (b+m)_n / (n! (n+m)!) w^n
    //      × [ln w − ψ(n+1) − ψ(n+m+1) + ψ(a+n+m) + ψ(b+n+m)]
    let prefactor = -(-w).powi(m as i32) * gamma(a + b + mf) * rgamma(a) * rgamma(b);
    if prefactor == 0.0 {
        return Ok(finite);
    }
    let mut coeff = 1.0 / factorial(m);
    let mut psi_n1 = digamma(1.0);
    let mut psi_nm1 = digamma(mf + 1.0);
    let mut psi_a = digamma(a + mf);
    let mut psi_b = digamma(b + mf);
    let mut power = 1.0;
    let mut sum = 0.0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let bracket = ln_w - psi_n1 - psi_nm1 + psi_a + psi_b;
        let term = coeff * power * bracket;
        sum += term;
        if n > 0 && term.abs() <= SERIES_RTOL * sum.abs() {
            return Ok(finite + prefactor * sum);
        }
        coeff *= (a + mf + nf) * (b + mf + nf) / ((nf + 1.0) * (nf + mf + 1.0));
        power *= w;
        psi_n1 += 1.0 / (nf + 1.0);
        psi_nm1 += 1.0 / (nf + mf + 1.0);
        psi_a += 1.0 / (a + mf + nf);
        psi_b += 1.0 / (b + mf + nf);
        if coeff == 0.0 {
            return Ok(finite + prefactor * sum);
        }
    }
    Err(Error::SeriesConvergence {
        terms: MAX_TERMS,
        partial_sum: finite + prefactor * sum,
        last_term: coeff * power,
    })
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Arithmetic-geometric mean of two positive numbers.
fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 4.0 * f64::EPSILON * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

fn check_parameter(m: f64) -> Result<()> {
    if m > 0.0 && m < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "elliptic parameter must lie in (0, 1), got m = {m}"
        )))
    }
}

/// Complete elliptic integral of the first kind, K(m) with parameter m = k².
pub fn elliptic_k(m: f64) -> Result<f64> {
    check_parameter(m)?;
    Ok(PI / (2.0 * agm(1.0, (1.0 - m).sqrt())))
}

/// K(1 − m), evaluated without forming `1 − m`.
pub fn elliptic_k_complement(m: f64) -> Result<f64> {
    check_parameter(m)?;
    Ok(PI / (2.0 * agm(1.0, m.sqrt())))
}

/// Rectangle aspect ratio R(m) = K(1 − m) / K(m); strictly decreasing in m,
/// with R(1/2) = 1.
pub fn aspect_ratio(m: f64) -> Result<f64> {
    check_parameter(m)?;
    Ok(agm(1.0, (1.0 - m).sqrt()) / agm(1.0, m.sqrt()))
}

/// R expressed through the pair `(m, 1 − m)` when the complement is known
/// more accurately than `1 − m` would be.
pub(crate) fn aspect_ratio_split(m: f64, mc: f64) -> f64 {
    agm(1.0, mc.sqrt()) / agm(1.0, m.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn zero_argument_is_one() {
        assert_eq!(hyp2f1(0.3, 0.7, 1.1, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn logarithm_identity() {
        let v = hyp2f1(1.0, 1.0, 2.0, 0.5).unwrap();
        assert!(rel(v, -(0.5f64).ln() / 0.5) < 1e-14, "{v}");
        // same identity through the logarithmic connection branch
        for z in [0.6, 0.9, 0.999, 1.0 - 1e-9] {
            let v = hyp2f1(1.0, 1.0, 2.0, z).unwrap();
            assert!(rel(v, -(1.0 - z).ln() / z) < 1e-12, "z={z}: {v}");
        }
    }

    #[test]
    fn pole_and_domain_errors() {
        assert!(matches!(
            hyp2f1(0.5, 0.5, -2.0, 0.3),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(hyp2f1(0.5, 0.5, 1.5, 1.0), Err(Error::Domain(_))));
        assert!(matches!(hyp2f1(0.5, 0.5, 1.5, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn terminating_series() {
        // F(-2, b; c; z) = 1 - 2bz/c + b(b+1)z²/(c(c+1))
        let (b, c, z) = (0.7, 1.3, -4.0);
        let expect = 1.0 - 2.0 * b * z / c + b * (b + 1.0) * z * z / (c * (c + 1.0));
        assert!(rel(hyp2f1(-2.0, b, c, z).unwrap(), expect) < 1e-14);
        // kappa = 4 two-leg block: F(1, 0; 2; z) = 1
        assert_eq!(hyp2f1(1.0, 0.0, 2.0, 0.9).unwrap(), 1.0);
    }

    #[test]
    fn elementary_closed_forms() {
        // (1-z)^{-a} = F(a, b; b; z), crossing the z = 1/2 switch
        for z in [-5.0, -0.7, 0.2, 0.5, 0.75, 0.99] {
            let v = hyp2f1(0.3, 1.7, 1.7, z).unwrap();
            assert!(rel(v, (1.0f64 - z).powf(-0.3)) < 1e-13, "z={z}");
        }
        // arcsin(x)/x = F(1/2, 1/2; 3/2; x²)
        for x in [0.3f64, 0.8, 0.99] {
            let v = hyp2f1(0.5, 0.5, 1.5, x * x).unwrap();
            assert!(rel(v, x.asin() / x) < 1e-13, "x={x}");
        }
    }

    #[test]
    fn elliptic_k_basics() {
        assert!(rel(elliptic_k(1e-15).unwrap(), PI / 2.0) < 1e-14);
        assert!(rel(elliptic_k(0.5).unwrap(), elliptic_k_complement(0.5).unwrap()) < 1e-15);
        assert!(rel(aspect_ratio(0.5).unwrap(), 1.0) < 1e-15);
        assert!(elliptic_k(0.0).is_err());
        assert!(elliptic_k(1.0).is_err());
        assert!(aspect_ratio(-0.1).is_err());
        // 2F1(1/2,1/2;1|m) = 2K(m)/π, logarithmic branch with c-a-b = 0
        for m in [0.1, 0.6, 0.9, 0.999_999] {
            let f = hyp2f1(0.5, 0.5, 1.0, m).unwrap();
            assert!(rel(f, 2.0 * elliptic_k(m).unwrap() / PI) < 1e-13, "m={m}");
        }
    }
}
