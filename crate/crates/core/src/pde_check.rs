//! Finite-difference residuals of the null-state PDEs and the three conformal
//! Ward identities.
//!
//! Every residual is normalized by the sum of the absolute values of the
//! terms that make up the operator, so 0 means the terms cancel exactly and
//! values of order one mean the identity is violated. This keeps the zero
//! function at 0 and stops large prefactors from hiding a violation.
//!
//! The denominator also carries a reference size built from |F| alone (the
//! operator's F-terms with unit weight in place of θ). Without it a function
//! that is locally constant, such as G₁ + G₂ at κ = 6 where θ = 0, would be
//! judged on rounding noise divided by rounding noise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::one_leg_weight;
use crate::solutions::{ConfigPoint, Evaluate};
use crate::stencil::{partials, Partials};

/// Default step as a fraction of the smallest gap of the point.
pub const DEFAULT_RELATIVE_STEP: f64 = 1e-3;

/// Default convergence sweep, in fractions of the smallest gap.
pub const DEFAULT_SWEEP: [f64; 6] = [0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625];

/// Residuals below this level are left out of the convergence-order fit.
pub const FIT_FLOOR: f64 = 1e-14;
/// Assumed evaluation error of a handle, in units of ε·|F|.
const EVAL_ULPS: f64 = 2.0;
/// A sweep level enters the order fit only if its residual exceeds the
/// estimated rounding level by this factor.
const FLOOR_MARGIN: f64 = 10.0;

/// Residuals of every identity at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResiduals {
    /// One per centred null-state PDE, in coordinate order.
    pub null_state: Vec<f64>,
    /// Translation, dilation and inversion identities.
    pub ward: [f64; 3],
}

/// Worst-case residuals over a sample of points, plus fitted convergence orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub n_points: usize,
    /// Step used for the reported residuals, as a fraction of each point's smallest gap.
    pub relative_step: f64,
    pub null_state: Vec<f64>,
    pub ward: [f64; 3],
    /// Steps of the convergence sweep, as fractions of each point's smallest gap.
    pub step_sizes: Vec<f64>,
    /// Fitted order of the 2N null-state residuals followed by the three Ward
    /// residuals; `None` where fewer than three sweep levels stand clear of
    /// rounding (for example when the finite differences are exact).
    pub convergence_order: Vec<Option<f64>>,
}

impl ResidualReport {
    pub fn max_null_state(&self) -> f64 {
        self.null_state.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest fitted order over all residuals that admitted a fit.
    pub fn min_order(&self) -> Option<f64> {
        self.convergence_order
            .iter()
            .flatten()
            .copied()
            .reduce(f64::min)
    }
}

fn normalized(terms: impl IntoIterator<Item = f64>, reference: f64) -> f64 {
    let (sum, magnitude) = terms
        .into_iter()
        .fold((0.0, reference), |(s, m), t| (s + t, m + t.abs()));
    if magnitude == 0.0 {
        0.0
    } else {
        sum.abs() / magnitude
    }
}

fn checked_partials(
    f: &(impl Evaluate + ?Sized),
    pt: &ConfigPoint,
    h: f64,
) -> Result<Partials> {
    if pt.len() != f.arity() {
        return Err(Error::Domain(format!(
            "point has {} coordinates, the handle takes {}",
            pt.len(),
            f.arity()
        )));
    }
    let min_gap = pt.min_gap();
    if !(h > 0.0 && 4.0 * h < min_gap) {
        return Err(Error::StepTooLarge { step: h, min_gap });
    }
    partials(f, pt.coords(), h)
}

fn null_state_from(p: &Partials, x: &[f64], j: usize, kappa: f64, theta: f64) -> f64 {
    let mut terms = vec![kappa / 4.0 * p.second[j]];
    for k in (0..x.len()).filter(|&k| k != j) {
        let d = x[k] - x[j];
        terms.push(p.first[k] / d);
        terms.push(-theta * p.value / (d * d));
    }
    normalized(terms, null_state_reference(p.value, x, j))
}

fn null_state_reference(f: f64, x: &[f64], j: usize) -> f64 {
    (0..x.len())
        .filter(|&k| k != j)
        .map(|k| f.abs() / (x[k] - x[j]).powi(2))
        .sum()
}

/// Reference sizes of the translation, dilation and inversion identities.
fn ward_references(f: f64, x: &[f64]) -> [f64; 3] {
    let min_gap = x.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let n = x.len() as f64;
    [
        n * f.abs() / min_gap,
        n * f.abs(),
        2.0 * f.abs() * x.iter().map(|xk| xk.abs()).sum::<f64>(),
    ]
}

fn ward_from(p: &Partials, x: &[f64], theta: f64) -> [f64; 3] {
    let f = p.value;
    let [r0, r1, r2] = ward_references(f, x);
    let translation = normalized(p.first.iter().copied(), r0);
    let dilation = normalized(
        x.iter()
            .zip(&p.first)
            .flat_map(|(xk, dk)| [xk * dk, theta * f]),
        r1,
    );
    let inversion = normalized(
        x.iter()
            .zip(&p.first)
            .flat_map(|(xk, dk)| [xk * xk * dk, 2.0 * theta * xk * f]),
        r2,
    );
    [translation, dilation, inversion]
}

/// Normalized residual of the null-state PDE centred on coordinate `j`
/// (0-based), with derivatives from 4th-order central differences of step `h`.
pub fn null_state_residual(
    f: &(impl Evaluate + ?Sized),
    pt: &ConfigPoint,
    j: usize,
    h: f64,
) -> Result<f64> {
    if j >= pt.len() {
        return Err(Error::Parameter(format!(
            "coordinate index {j} out of range for {} coordinates",
            pt.len()
        )));
    }
    let p = checked_partials(f, pt, h)?;
    let kappa = f.kappa();
    Ok(null_state_from(
        &p,
        pt.coords(),
        j,
        kappa.value(),
        one_leg_weight(kappa),
    ))
}

/// Normalized residuals of the translation, dilation and inversion identities.
pub fn ward_residuals(f: &(impl Evaluate + ?Sized), pt: &ConfigPoint, h: f64) -> Result<[f64; 3]> {
    let p = checked_partials(f, pt, h)?;
    Ok(ward_from(&p, pt.coords(), one_leg_weight(f.kappa())))
}

/// All residuals at one point from a single set of finite differences.
pub fn point_residuals(
    f: &(impl Evaluate + ?Sized),
    pt: &ConfigPoint,
    h: f64,
) -> Result<PointResiduals> {
    let p = checked_partials(f, pt, h)?;
    let x = pt.coords();
    let kappa = f.kappa();
    let theta = one_leg_weight(kappa);
    Ok(PointResiduals {
        null_state: (0..x.len())
            .map(|j| null_state_from(&p, x, j, kappa.value(), theta))
            .collect(),
        ward: ward_from(&p, x, theta),
    })
}

/// Rounding level of each normalized residual (same layout as the residuals),
/// from the stencil weights: Σ|w| = 18/12 for first and 64/12 for second
/// derivatives, applied to an evaluation error of `EVAL_ULPS`·ε·|F|.
fn rounding_levels(p: &Partials, x: &[f64], h: f64, kappa: f64, theta: f64) -> Vec<f64> {
    let u = EVAL_ULPS * f64::EPSILON * p.value.abs();
    let (n1, n2) = (1.5 * u / h, 64.0 / 12.0 * u / (h * h));
    let scaled = |noise: f64, reference: f64, terms: &mut dyn Iterator<Item = f64>| {
        let magnitude: f64 = reference + terms.map(f64::abs).sum::<f64>();
        if magnitude == 0.0 { 0.0 } else { noise / magnitude }
    };
    let f = p.value;
    let mut out = Vec::with_capacity(x.len() + 3);
    for j in 0..x.len() {
        let others = || (0..x.len()).filter(move |&k| k != j);
        let noise = kappa / 4.0 * n2 + others().map(|k| n1 / (x[k] - x[j]).abs()).sum::<f64>();
        let mut terms = std::iter::once(kappa / 4.0 * p.second[j]).chain(others().flat_map(|k| {
            let d = x[k] - x[j];
            [p.first[k] / d, theta * f / (d * d)]
        }));
        out.push(scaled(noise, null_state_reference(f, x, j), &mut terms));
    }
    let [r0, r1, r2] = ward_references(f, x);
    out.push(scaled(x.len() as f64 * n1, r0, &mut p.first.iter().copied()));
    out.push(scaled(
        x.iter().map(|xk| xk.abs() * n1).sum(),
        r1,
        &mut x.iter().zip(&p.first).flat_map(|(xk, dk)| [xk * dk, theta * f]),
    ));
    out.push(scaled(
        x.iter().map(|xk| xk * xk * n1).sum(),
        r2,
        &mut x.iter().zip(&p.first).flat_map(|(xk, dk)| [xk * xk * dk, 2.0 * theta * xk * f]),
    ));
    out
}

/// Largest residual of each identity over `pts`, and whether every point's
/// residual stands clear of its rounding level.
fn worst(
    f: &(impl Evaluate + ?Sized),
    pts: &[ConfigPoint],
    relative_step: f64,
) -> Result<(Vec<f64>, Vec<bool>)> {
    let n = f.arity() + 3;
    let (mut acc, mut clear) = (vec![0.0; n], vec![true; n]);
    let kappa = f.kappa();
    let theta = one_leg_weight(kappa);
    for pt in pts {
        let h = relative_step * pt.min_gap();
        let p = checked_partials(f, pt, h)?;
        let x = pt.coords();
        let residuals = (0..x.len())
            .map(|j| null_state_from(&p, x, j, kappa.value(), theta))
            .chain(ward_from(&p, x, theta));
        let floors = rounding_levels(&p, x, h, kappa.value(), theta);
        for (i, (r, fl)) in residuals.zip(floors).enumerate() {
            acc[i] = f64::max(acc[i], r);
            clear[i] &= r > FLOOR_MARGIN * fl;
        }
    }
    Ok((acc, clear))
}

/// Median of the level-to-level slopes of log r against log h (steps in
/// decreasing order). Only the leading run of levels that stay above
/// [`FIT_FLOOR`] and keep falling is used; once rounding takes over the
/// residuals stop falling. The median shrugs off a pre-asymptotic first
/// level or a single level where the error coefficient nearly cancels.
pub fn fit_order(steps: &[f64], residuals: &[f64]) -> Option<f64> {
    let usable = usable_levels(residuals);
    if usable < 3 {
        return None;
    }
    let mut slopes: Vec<f64> = (1..usable)
        .map(|i| (residuals[i] / residuals[i - 1]).ln() / (steps[i] / steps[i - 1]).ln())
        .collect();
    slopes.sort_by(f64::total_cmp);
    let mid = slopes.len() / 2;
    Some(if slopes.len() % 2 == 1 {
        slopes[mid]
    } else {
        0.5 * (slopes[mid - 1] + slopes[mid])
    })
}

/// Length of the leading run of residuals that are finite, above
/// [`FIT_FLOOR`] and falling. After the first pair (which may still be
/// pre-asymptotic) each level must at least halve the residual; a smaller
/// drop means rounding or a sign change of the error has set in.
fn usable_levels(residuals: &[f64]) -> usize {
    let mut prev = f64::INFINITY;
    for (i, &r) in residuals.iter().enumerate() {
        let drop = if i < 2 { 1.0 } else { 2.0 };
        if !(r.is_finite() && r > FIT_FLOOR && r * drop < prev) {
            return i;
        }
        prev = r;
    }
    residuals.len()
}

/// Worst residuals over `pts` at the default step, and convergence orders
/// fitted over `sweep` (steps as fractions of each point's smallest gap).
pub fn full_report(
    f: &(impl Evaluate + ?Sized),
    pts: &[ConfigPoint],
    sweep: &[f64],
) -> Result<ResidualReport> {
    full_report_at(f, pts, DEFAULT_RELATIVE_STEP, sweep)
}

/// [`full_report`] with the reported residuals taken at `relative_step`.
pub fn full_report_at(
    f: &(impl Evaluate + ?Sized),
    pts: &[ConfigPoint],
    relative_step: f64,
    sweep: &[f64],
) -> Result<ResidualReport> {
    if pts.is_empty() {
        return Err(Error::Parameter("residual report needs at least one point".into()));
    }
    let (base, _) = worst(f, pts, relative_step)?;
    let per_step = sweep
        .iter()
        .map(|&s| worst(f, pts, s))
        .collect::<Result<Vec<_>>>()?;
    let convergence_order = (0..base.len())
        .map(|i| {
            // levels lost in rounding end the series
            let series: Vec<f64> = per_step
                .iter()
                .map_while(|(r, clear)| clear[i].then_some(r[i]))
                .collect();
            fit_order(&sweep[..series.len()], &series)
        })
        .collect();
    let n = f.arity();
    Ok(ResidualReport {
        n_points: pts.len(),
        relative_step,
        null_state: base[..n].to_vec(),
        ward: [base[n], base[n + 1], base[n + 2]],
        step_sizes: sweep.to_vec(),
        convergence_order,
    })
}

/// Whether |F(x)| ≤ C ∏_{i<j} |x_j − x_i|^{μ_ij(p)} at every sampled point,
/// with μ_ij = −p for gaps below 1 and +p otherwise.
pub fn growth_bound_probe(
    f: &(impl Evaluate + ?Sized),
    p: f64,
    c: f64,
    pts: &[ConfigPoint],
) -> Result<bool> {
    for pt in pts {
        let x = pt.coords();
        let mut log_bound = c.ln();
        for (i, xi) in x.iter().enumerate() {
            for xj in &x[i + 1..] {
                let gap = (xj - xi).abs();
                let mu = if gap < 1.0 { -p } else { p };
                log_bound += mu * gap.ln();
            }
        }
        let value = f.evaluate(x)?.abs();
        if value > 0.0 && value.ln() > log_bound {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Kappa;
    use crate::solutions::SolutionHandle;

    fn k(v: f64) -> Kappa {
        Kappa::new(v).unwrap()
    }

    fn pt(v: &[f64]) -> ConfigPoint {
        ConfigPoint::new(v.to_vec()).unwrap()
    }

    #[test]
    fn one_arc_solution_has_small_residuals() {
        for kv in [1.0, 8.0 / 3.0, 4.0, 6.5] {
            let f = SolutionHandle::s1(k(kv), 1.7);
            let p = pt(&[-0.3, 1.1]);
            for j in 0..2 {
                assert!(null_state_residual(&f, &p, j, 1e-3).unwrap() < 1e-8);
            }
            assert!(ward_residuals(&f, &p, 1e-3).unwrap().iter().all(|&r| r < 1e-8));
        }
    }

    #[test]
    fn four_point_solution_at_kappa_six() {
        let f = SolutionHandle::s2(k(6.0), 1.0, 0.0);
        let p = pt(&[0.0, 1.0, 2.0, 4.0]);
        for j in 0..4 {
            let r = null_state_residual(&f, &p, j, 1e-3).unwrap();
            assert!(r < 1e-6, "j = {j}: {r}");
        }
    }

    #[test]
    fn counterexample_fails_dilation_and_inversion() {
        let f = SolutionHandle::counterexample(k(4.0), 2);
        let p = pt(&[0.0, 1.0, 2.0, 4.0]);
        for j in 0..4 {
            assert!(null_state_residual(&f, &p, j, 1e-3).unwrap() < 1e-6);
        }
        let w = ward_residuals(&f, &p, 1e-3).unwrap();
        assert!(w[0] < 1e-6 && w[1] > 0.1 && w[2] > 0.1, "{w:?}");
    }

    #[test]
    fn constant_at_kappa_six() {
        let f = SolutionHandle::constant(2, k(6.0), 1.0);
        let w = ward_residuals(&f, &pt(&[0.0, 1.0, 2.0, 4.0]), 1e-3).unwrap();
        assert!(w.iter().all(|&r| r <= 1e-12));
    }

    #[test]
    fn step_guard() {
        let f = SolutionHandle::s1(k(4.0), 1.0);
        let p = pt(&[0.0, 1.0]);
        assert!(matches!(
            null_state_residual(&f, &p, 0, 0.3),
            Err(Error::StepTooLarge { .. })
        ));
        assert!(matches!(null_state_residual(&f, &p, 2, 1e-3), Err(Error::Parameter(_))));
    }

    #[test]
    fn fitted_order_for_one_arc() {
        let f = SolutionHandle::s1(k(4.0), 1.0);
        let pts = [pt(&[0.0, 1.0]), pt(&[0.5, 3.0])];
        let report = full_report(&f, &pts, &DEFAULT_SWEEP).unwrap();
        let order = report.min_order().unwrap();
        assert!((order - 4.0).abs() < 0.5, "{order}");
    }

    #[test]
    fn growth_bound() {
        let f = SolutionHandle::s1(k(4.0), 1.0);
        let pts: Vec<_> = [1e-4, 1e-2, 1.0, 1e2, 1e4]
            .iter()
            .map(|&g| pt(&[0.0, g]))
            .collect();
        assert!(growth_bound_probe(&f, 2.0, 10.0, &pts).unwrap());
        assert!(!growth_bound_probe(&f, 0.0, 1e-3, &pts).unwrap());
        let one = SolutionHandle::constant(1, k(6.0), 1.0);
        assert!(growth_bound_probe(&one, 1.0, 1.0, &pts).unwrap());
    }
}
