//! Numerical collapse limits.
//!
//! * Interval collapse: `lim_{δ→0} δ^{6/κ−1} F(…, x_i, x_i + δ, …)`.
//! * Outer collapse: `lim_{R→∞} (2R)^{6/κ−1} F(−R, …, R)`.
//!
//! Both are evaluated on a geometric ladder (ratio 1/2, 12 levels by default)
//! and extrapolated with a generalized Richardson tableau. Near a collapse
//! δ^{6/κ−1}F is an analytic series plus δ^{8/κ−1} times another analytic
//! series, so the eliminated correction exponents are n and 8/κ − 1 + n for
//! n = 0, 1, 2, … . The outer collapse has the same structure in 1/R.
//!
//! A [`CollapsedHandle`] is again an [`Evaluate`]: every evaluation runs the
//! inner extrapolation, so the cost grows like 12^(number of collapses) and
//! the inner uncertainty is propagated into the outer tableau.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::diagrams::{
    allowable_sequences, enumerate_diagrams, representative_sequence, validate_sequence,
    ArcDiagram, CollapseKind, LimitSequence,
};
use crate::error::{Error, Result};
use crate::params::{one_leg_weight, Kappa};
use crate::richardson::{exponent_ladder, extrapolate, two_series_exponents};
use crate::solutions::{ConfigPoint, Evaluate, SolutionHandle};

/// Largest N accepted by [`dual_vector`].
pub const MAX_DUAL_PAIRS: usize = 4;

/// Relative extrapolation error above which a limit counts as not converged.
const CONVERGENCE_TOLERANCE: f64 = 1e-4;

/// |limit| below this fraction of the ladder's largest sample counts as zero.
pub const ZERO_THRESHOLD: f64 = 1e-7;

/// Half-width of the exponent window used by [`classify_interval`].
pub const EXPONENT_TOLERANCE: f64 = 0.02;

/// Geometric ladder used by every collapse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub levels: usize,
    pub ratio: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            levels: 12,
            ratio: 0.5,
        }
    }
}

/// One extrapolated collapse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseResult {
    pub value: f64,
    /// Fitted leading power of the raw function in δ (for the outer collapse,
    /// in the length 2/R of the equivalent interval after an inversion).
    /// `None` when the function vanishes on the ladder.
    pub exponent_fit: Option<f64>,
    pub exponent_stderr: f64,
    pub stderr: f64,
    /// δ_k for an interval collapse, 1/R_k for an outer collapse.
    pub deltas_used: Vec<f64>,
    /// Largest |δ^{6/κ−1}F| on the ladder.
    pub scale: f64,
}

fn pow2_floor(x: f64) -> f64 {
    2f64.powi(x.log2().floor() as i32)
}

fn pow2_ceil(x: f64) -> f64 {
    2f64.powi(x.log2().ceil() as i32)
}

fn gap_exponent(kappa: Kappa) -> f64 {
    8.0 / kappa.value() - 1.0
}

/// Turns ladder samples into a [`CollapseResult`].
///
/// `weighted` holds δ^{6/κ−1}F, `raw` the plain F, `exponent_offset` is
/// subtracted from the fitted slope of log|F| against log δ.
fn analyse(
    kappa: Kappa,
    weighted: &[f64],
    sigma: &[f64],
    raw: &[f64],
    deltas: Vec<f64>,
    ratio: f64,
    exponent_offset: f64,
) -> Result<CollapseResult> {
    let n = weighted.len();
    if let Some(k) = weighted.iter().position(|v| !v.is_finite()) {
        return Err(Error::LimitConvergence(format!(
            "non-finite sample {} at level {k} (delta = {:e})",
            weighted[k], deltas[k]
        )));
    }
    let q = gap_exponent(kappa);
    let scale = weighted.iter().fold(0.0, |m, v| f64::max(m, v.abs()));
    // every sample carries at least its own rounding error
    let sigma: Vec<f64> = sigma
        .iter()
        .zip(weighted)
        .map(|(s, w)| s.max(4.0 * f64::EPSILON * w.abs()))
        .collect();
    let mut ex = extrapolate(weighted, &sigma, ratio, &two_series_exponents(q, n - 2));
    // a limit that cancels down to rounding level is only known to the ladder's precision
    ex.error = ex.error.max(4.0 * f64::EPSILON * scale);
    let drift = ex.error - 2.0 * ex.noise;
    if !ex.value.is_finite() || drift > CONVERGENCE_TOLERANCE * scale.max(ex.value.abs()) {
        return Err(Error::LimitConvergence(format!(
            "extrapolated {} with error estimate {:e} against sample scale {:e}",
            ex.value, ex.error, scale
        )));
    }

    let (exponent_fit, exponent_stderr) = if raw.iter().all(|v| *v != 0.0 && v.is_finite()) {
        let slopes: Vec<f64> = raw
            .windows(2)
            .map(|w| (w[1].abs().ln() - w[0].abs().ln()) / ratio.ln())
            .collect();
        let fit = extrapolate(
            &slopes,
            &vec![0.0; slopes.len()],
            ratio,
            &exponent_ladder(q, 4, slopes.len() - 2),
        );
        (Some(fit.value - exponent_offset), fit.error)
    } else {
        (None, 0.0)
    };

    Ok(CollapseResult {
        value: ex.value,
        exponent_fit,
        exponent_stderr,
        stderr: ex.error,
        deltas_used: deltas,
        scale,
    })
}

fn insert_pair(base: &[f64], pos: usize, left: f64, right: f64) -> Vec<f64> {
    let mut full = Vec::with_capacity(base.len() + 2);
    full.extend_from_slice(&base[..pos]);
    full.push(left);
    full.push(right);
    full.extend_from_slice(&base[pos..]);
    full
}

fn check_reduced(f: &(impl Evaluate + ?Sized), base: &[f64]) -> Result<()> {
    if base.len() + 2 != f.arity() {
        return Err(Error::Domain(format!(
            "reduced point has {} coordinates, expected {}",
            base.len(),
            f.arity().saturating_sub(2)
        )));
    }
    Ok(())
}

/// Distance from `x` to its nearest neighbours in `base` when inserted at `pos`.
fn neighbour_gap(base: &[f64], pos: usize, x: f64) -> Result<f64> {
    let left = pos.checked_sub(1).map(|p| x - base[p]);
    let right = base.get(pos).map(|r| r - x);
    let gap = match (left, right) {
        (Some(l), Some(r)) => l.min(r),
        (Some(g), None) | (None, Some(g)) => g,
        (None, None) => 1.0,
    };
    if gap > 0.0 && gap.is_finite() {
        Ok(gap)
    } else {
        Err(Error::Domain(format!(
            "left endpoint {x} does not fit between its neighbours at position {pos}"
        )))
    }
}

fn interval_ladder(
    f: &(impl Evaluate + ?Sized),
    base: &[f64],
    pos: usize,
    x_left: f64,
    gap: f64,
    schedule: Schedule,
) -> Result<CollapseResult> {
    let kappa = f.kappa();
    let power = 6.0 / kappa.value() - 1.0;
    let delta0 = pow2_floor(gap / 8.0);
    let n = schedule.levels;
    let (mut weighted, mut sigma, mut raw, mut deltas) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for k in 0..n {
        let right = x_left + delta0 * schedule.ratio.powi(k as i32);
        // the difference the evaluator actually sees
        let delta = right - x_left;
        let (v, e) = f.evaluate_with_error(&insert_pair(base, pos, x_left, right))?;
        let w = delta.powf(power);
        weighted[k] = w * v;
        sigma[k] = w * e;
        raw[k] = v;
        deltas[k] = delta;
    }
    analyse(kappa, &weighted, &sigma, &raw, deltas, schedule.ratio, 0.0)
}

/// Default left endpoint for an interval collapse inserted at `pos`: the
/// midpoint between the neighbours, or one smallest-gap beyond the end.
fn default_left(base: &[f64], pos: usize) -> f64 {
    let unit = ConfigPoint::new(base.to_vec())
        .map(|p| p.min_gap())
        .ok()
        .filter(|g| g.is_finite())
        .unwrap_or(1.0);
    match (pos.checked_sub(1).map(|p| base[p]), base.get(pos)) {
        (Some(l), Some(r)) => 0.5 * (l + r),
        (None, Some(r)) => r - unit,
        (Some(l), None) => l + unit,
        (None, None) => 0.0,
    }
}

/// Interval collapse of the pair at positions (`pos`, `pos` + 1), with the
/// left endpoint placed midway between its neighbours in `base`.
pub fn collapse_interval(
    f: &(impl Evaluate + ?Sized),
    pos: usize,
    base: &ConfigPoint,
) -> Result<CollapseResult> {
    collapse_interval_at(f, pos, base, default_left(base.coords(), pos.min(base.len())))
}

/// Interval collapse with an explicit left endpoint `x_left`, which must lie
/// strictly between the neighbours at positions `pos − 1` and `pos` of `base`.
pub fn collapse_interval_at(
    f: &(impl Evaluate + ?Sized),
    pos: usize,
    base: &ConfigPoint,
    x_left: f64,
) -> Result<CollapseResult> {
    check_reduced(f, base.coords())?;
    if pos > base.len() {
        return Err(Error::Parameter(format!(
            "interval position {pos} out of range for {} remaining coordinates",
            base.len()
        )));
    }
    let gap = neighbour_gap(base.coords(), pos, x_left)?;
    interval_ladder(f, base.coords(), pos, x_left, gap, Schedule::default())
}

/// Outer collapse of the first and last coordinates, evaluated at (−R, base…, R).
pub fn collapse_outer(f: &(impl Evaluate + ?Sized), base: &ConfigPoint) -> Result<CollapseResult> {
    collapse_outer_with(f, base.coords(), Schedule::default())
}

fn collapse_outer_with(
    f: &(impl Evaluate + ?Sized),
    base: &[f64],
    schedule: Schedule,
) -> Result<CollapseResult> {
    check_reduced(f, base)?;
    let kappa = f.kappa();
    let power = 6.0 / kappa.value() - 1.0;
    let span = match (base.first(), base.last()) {
        (Some(a), Some(b)) => b - a,
        _ => 0.0,
    };
    let reach = base.iter().fold(span, |m, v| m.max(v.abs())).max(0.125);
    let r0 = pow2_ceil(8.0 * reach);
    let n = schedule.levels;
    let (mut weighted, mut sigma, mut raw, mut inv_r) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for k in 0..n {
        let r = r0 / schedule.ratio.powi(k as i32);
        let mut full = Vec::with_capacity(base.len() + 2);
        full.push(-r);
        full.extend_from_slice(base);
        full.push(r);
        let (v, e) = f.evaluate_with_error(&full)?;
        let w = (2.0 * r).powf(power);
        weighted[k] = w * v;
        sigma[k] = w * e;
        raw[k] = v;
        inv_r[k] = 1.0 / r;
    }
    // After an inversion the pair becomes an interval of length 2/R and F picks
    // up R^{-4θ₁} from the two Jacobian factors; remove it from the slope.
    let offset = 4.0 * one_leg_weight(kappa);
    analyse(kappa, &weighted, &sigma, &raw, inv_r, schedule.ratio, offset)
}

/// Which single collapse a [`CollapsedHandle`] performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollapseStep {
    /// Collapse the pair at positions (`position`, `position` + 1).
    Interval { position: usize },
    /// Collapse the first and last coordinates.
    Outer,
}

/// Where to put the left endpoint of an interval collapse, as a function of
/// the reduced coordinates: the collapsed point keeps its relative position
/// with respect to its neighbours in an anchor configuration.
#[derive(Debug, Clone, PartialEq)]
struct Placement {
    anchor_reduced: Vec<f64>,
    anchor_left: f64,
    anchor_right: f64,
}

impl Placement {
    fn place(&self, y: &[f64], pos: usize) -> (f64, f64) {
        let a = &self.anchor_reduced;
        let m = y.len();
        let stretch = if m >= 2 {
            (y[m - 1] - y[0]) / (a[m - 1] - a[0])
        } else {
            1.0
        };
        if m == 0 {
            return (self.anchor_left, self.anchor_right - self.anchor_left);
        }
        if pos == 0 {
            let x = y[0] - (a[0] - self.anchor_left) * stretch;
            (x, y[0] - x)
        } else if pos == m {
            let x = y[m - 1] + (self.anchor_left - a[m - 1]) * stretch;
            (x, x - y[m - 1])
        } else {
            let t = (self.anchor_left - a[pos - 1]) / (a[pos] - a[pos - 1]);
            let x = y[pos - 1] + t * (y[pos] - y[pos - 1]);
            (x, (x - y[pos - 1]).min(y[pos] - x))
        }
    }
}

/// The function of the remaining coordinates obtained by one collapse.
#[derive(Clone)]
pub struct CollapsedHandle {
    parent: Arc<dyn Evaluate>,
    step: CollapseStep,
    placement: Option<Placement>,
    /// Arcs collapsed so far, as original 1-based labels.
    collapsed_arcs: Vec<(usize, usize)>,
    step_index: Option<usize>,
    schedule: Schedule,
}

impl std::fmt::Debug for CollapsedHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CollapsedHandle")
            .field("step", &self.step)
            .field("collapsed_arcs", &self.collapsed_arcs)
            .field("arity", &self.arity())
            .finish()
    }
}

impl CollapsedHandle {
    /// Collapse `step` of `parent`, with default interval placement.
    pub fn new(parent: Arc<dyn Evaluate>, step: CollapseStep) -> Result<Self> {
        if parent.arity() < 2 {
            return Err(Error::Parameter("nothing left to collapse".into()));
        }
        if let CollapseStep::Interval { position } = step {
            if position + 1 >= parent.arity() {
                return Err(Error::Parameter(format!(
                    "interval position {position} out of range for arity {}",
                    parent.arity()
                )));
            }
        }
        Ok(Self {
            parent,
            step,
            placement: None,
            collapsed_arcs: Vec::new(),
            step_index: None,
            schedule: Schedule::default(),
        })
    }

    pub fn step(&self) -> CollapseStep {
        self.step
    }

    pub fn collapsed_arcs(&self) -> &[(usize, usize)] {
        &self.collapsed_arcs
    }

    /// The extrapolation behind one evaluation.
    pub fn collapse(&self, y: &[f64]) -> Result<CollapseResult> {
        if y.len() != self.arity() {
            return Err(Error::Domain(format!(
                "collapsed handle takes {} coordinates, got {}",
                self.arity(),
                y.len()
            )));
        }
        let result = match self.step {
            CollapseStep::Outer => collapse_outer_with(&*self.parent, y, self.schedule),
            CollapseStep::Interval { position } => {
                let (x_left, gap) = match &self.placement {
                    Some(p) => p.place(y, position),
                    None => {
                        let x = default_left(y, position);
                        (x, neighbour_gap(y, position, x)?)
                    }
                };
                interval_ladder(&*self.parent, y, position, x_left, gap, self.schedule)
            }
        };
        result.map_err(|e| match (self.step_index, e) {
            (_, e @ Error::SequenceStep { .. }) | (None, e) => e,
            (Some(step), e) => Error::SequenceStep {
                step,
                source: Box::new(e),
            },
        })
    }
}

impl Evaluate for CollapsedHandle {
    fn arity(&self) -> usize {
        self.parent.arity() - 2
    }

    fn kappa(&self) -> Kappa {
        self.parent.kappa()
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.collapse(x).map(|r| r.value)
    }

    fn evaluate_with_error(&self, x: &[f64]) -> Result<(f64, f64)> {
        self.collapse(x).map(|r| (r.value, r.stderr))
    }
}

/// Builds the chain of collapsed handles for a sequence, anchored at `anchor`.
fn sequence_handle(
    f: &SolutionHandle,
    s: &LimitSequence,
    anchor: &ConfigPoint,
) -> Result<CollapsedHandle> {
    if let Err(v) = validate_sequence(s) {
        return Err(Error::Parameter(format!(
            "sequence breaks rule {:?} at step {} (arc {:?})",
            v.rule, v.step, v.arc
        )));
    }
    if s.diagram.n_pairs() != f.n_pairs() || anchor.len() != f.arity() {
        return Err(Error::Parameter(format!(
            "sequence over {} arcs and anchor with {} coordinates do not match N = {}",
            s.diagram.n_pairs(),
            anchor.len(),
            f.n_pairs()
        )));
    }
    let x = anchor.coords();
    let mut remaining: Vec<usize> = (1..=f.arity()).collect();
    let mut current: Arc<dyn Evaluate> = Arc::new(f.clone());
    let mut collapsed = Vec::new();
    let mut last = None;
    for (step, ((a, b), kind)) in s.steps().enumerate() {
        let pa = remaining.iter().position(|&l| l == a).expect("validated");
        let pb = remaining.iter().position(|&l| l == b).expect("validated");
        let (collapse, placement) = match kind {
            CollapseKind::IntervalCollapse => {
                debug_assert_eq!(pb, pa + 1);
                let reduced: Vec<f64> = remaining
                    .iter()
                    .filter(|&&l| l != a && l != b)
                    .map(|&l| x[l - 1])
                    .collect();
                (
                    CollapseStep::Interval { position: pa },
                    Some(Placement {
                        anchor_reduced: reduced,
                        anchor_left: x[a - 1],
                        anchor_right: x[b - 1],
                    }),
                )
            }
            CollapseKind::OuterCollapse => {
                debug_assert!(pa == 0 && pb == remaining.len() - 1);
                (CollapseStep::Outer, None)
            }
        };
        remaining.retain(|&l| l != a && l != b);
        collapsed.push((a, b));
        let mut h = CollapsedHandle::new(current, collapse)?;
        h.placement = placement;
        h.collapsed_arcs = collapsed.clone();
        h.step_index = Some(step);
        let h = Arc::new(h);
        last = Some(h.clone());
        current = h;
    }
    let last = last.ok_or_else(|| Error::Parameter("empty limit sequence".into()))?;
    Ok(Arc::try_unwrap(last).unwrap_or_else(|arc| (*arc).clone()))
}

/// The scalar 𝓛F of a full allowable sequence, with its propagated uncertainty.
pub fn apply_sequence_with_error(
    f: &SolutionHandle,
    s: &LimitSequence,
    anchor: &ConfigPoint,
) -> Result<(f64, f64)> {
    sequence_handle(f, s, anchor)?.evaluate_with_error(&[])
}

/// The scalar 𝓛F of a full allowable sequence.
pub fn apply_sequence(f: &SolutionHandle, s: &LimitSequence, anchor: &ConfigPoint) -> Result<f64> {
    apply_sequence_with_error(f, s, anchor).map(|(v, _)| v)
}

/// Every allowable sequence of `d` applied to `f`, for comparing orders within
/// one equivalence class.
pub fn apply_all_orders(
    f: &SolutionHandle,
    d: &ArcDiagram,
    anchor: &ConfigPoint,
) -> Result<Vec<(LimitSequence, f64, f64)>> {
    allowable_sequences(d)
        .into_iter()
        .map(|s| {
            let (v, e) = apply_sequence_with_error(f, &s, anchor)?;
            Ok((s, v, e))
        })
        .collect()
}

fn check_dual_inputs(f: &SolutionHandle, anchor: &ConfigPoint) -> Result<Vec<ArcDiagram>> {
    if f.n_pairs() > MAX_DUAL_PAIRS {
        return Err(Error::Resource(format!(
            "dual vectors are limited to N <= {MAX_DUAL_PAIRS}, got {}",
            f.n_pairs()
        )));
    }
    if anchor.len() != f.arity() {
        return Err(Error::Domain(format!(
            "anchor has {} coordinates, expected {}",
            anchor.len(),
            f.arity()
        )));
    }
    if anchor.min_gap() < 1.0 {
        return Err(Error::Domain(format!(
            "anchor gaps must be at least 1, got {}",
            anchor.min_gap()
        )));
    }
    enumerate_diagrams(f.n_pairs())
}

/// Dual vector with per-entry uncertainties, in canonical diagram order.
pub fn dual_vector_with_error(
    f: &SolutionHandle,
    anchor: &ConfigPoint,
) -> Result<Vec<(f64, f64)>> {
    let diagrams = check_dual_inputs(f, anchor)?;
    let entry = |(i, d): (usize, &ArcDiagram)| {
        apply_sequence_with_error(f, &representative_sequence(d), anchor).map_err(|e| {
            Error::SequenceStep {
                step: i,
                source: Box::new(e),
            }
        })
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        diagrams.par_iter().enumerate().map(entry).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        diagrams.iter().enumerate().map(entry).collect()
    }
}

/// v(F): one representative sequence per equivalence class, canonical diagram
/// order. Errors name the failing entry through [`Error::SequenceStep`].
pub fn dual_vector(f: &SolutionHandle, anchor: &ConfigPoint) -> Result<Vec<f64>> {
    Ok(dual_vector_with_error(f, anchor)?
        .into_iter()
        .map(|(v, _)| v)
        .collect())
}

/// Rows are the dual vectors of `handles`.
pub fn dual_matrix(handles: &[SolutionHandle], anchor: &ConfigPoint) -> Result<Vec<Vec<f64>>> {
    handles.iter().map(|h| dual_vector(h, anchor)).collect()
}

/// Determinant of a square matrix after scaling every row to unit length;
/// 0 for a zero row.
pub fn row_normalized_determinant(rows: &[Vec<f64>]) -> Result<f64> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parameter("matrix must be square".into()));
    }
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (i, r) in rows.iter().enumerate() {
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        for (j, v) in r.iter().enumerate() {
            m[(i, j)] = v / norm;
        }
    }
    Ok(m.determinant())
}

/// Singular-value summary of a matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSystemReport {
    pub matrix: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub condition_number: f64,
    /// Singular values below `tolerance` times the largest one.
    pub null_space_dim: usize,
    pub tolerance: f64,
}

impl LinearSystemReport {
    pub fn from_rows(rows: Vec<Vec<f64>>, tolerance: f64) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || rows.iter().any(|row| row.len() != c) {
            return Err(Error::Parameter("matrix rows must be nonempty and equal length".into()));
        }
        let m = DMatrix::from_fn(r, c, |i, j| rows[i][j]);
        let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        let max = sv.first().copied().unwrap_or(0.0);
        let rank = sv.iter().filter(|&&s| s > tolerance * max).count();
        let min = sv.last().copied().unwrap_or(0.0);
        Ok(Self {
            matrix: rows,
            condition_number: if min > 0.0 { max / min } else { f64::INFINITY },
            null_space_dim: c - rank.min(c),
            singular_values: sv,
            tolerance,
        })
    }
}

/// The system forcing C₁ = C₂ = 0 when both (x₂, x₃) and (x₃, x₄) are two-leg
/// intervals of C₁G₁ + C₂G₂: row i holds the two basis collapses of interval i
/// at `anchor`, so a nontrivial null vector would be a nonzero solution with
/// two two-leg intervals.
pub fn two_leg_system(kappa: Kappa, anchor: &ConfigPoint) -> Result<LinearSystemReport> {
    if anchor.len() != 4 {
        return Err(Error::Domain("the two-leg system needs four coordinates".into()));
    }
    let basis = [
        SolutionHandle::s2(kappa, 1.0, 0.0),
        SolutionHandle::s2(kappa, 0.0, 1.0),
    ];
    let x = anchor.coords();
    let rows = [1usize, 2]
        .iter()
        .map(|&pos| {
            let mut base = x.to_vec();
            base.drain(pos..pos + 2);
            let base = ConfigPoint::new(base)?;
            basis
                .iter()
                .map(|h| collapse_interval_at(h, pos, &base, x[pos]).map(|r| r.value))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    LinearSystemReport::from_rows(rows, 1e-6)
}

/// Fusion channel of an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    TwoLeg,
    Identity,
    Mixed,
}

/// Per-point evidence behind a classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelEvidence {
    pub point: Vec<f64>,
    pub channel: Channel,
    pub collapse: CollapseResult,
    /// Coefficient of δ^{8/κ−1} in δ^{6/κ−1}F relative to the limit, when the
    /// limit is nonzero. A nonzero value means the function also carries the
    /// two-leg channel, so δ^{6/κ−1}F is not analytic at the collapse even
    /// though the leading power is the identity one.
    pub two_leg_admixture: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalClassification {
    pub channel: Channel,
    pub evidence: Vec<ChannelEvidence>,
}

/// Coefficient B₀ of δ^q in H(δ) = L + A₁δ + … + δ^q(B₀ + …), from the ladder.
fn admixture(f: &(impl Evaluate + ?Sized), pt: &[f64], pos: usize, limit: f64) -> Result<f64> {
    let kappa = f.kappa();
    let q = gap_exponent(kappa);
    let power = 6.0 / kappa.value() - 1.0;
    let mut base = pt.to_vec();
    base.drain(pos..pos + 2);
    let x_left = pt[pos];
    let gap = neighbour_gap(&base, pos, x_left)?;
    let schedule = Schedule::default();
    let delta0 = pow2_floor(gap / 8.0);
    let mut y = Vec::with_capacity(schedule.levels);
    for k in 0..schedule.levels {
        let right = x_left + delta0 * schedule.ratio.powi(k as i32);
        let d = right - x_left;
        let h = d.powf(power) * f.evaluate(&insert_pair(&base, pos, x_left, right))?;
        y.push((h - limit) / d.powf(q));
    }
    // (H − L)/δ^q carries the exponents n and n − q for n ≥ 1
    let mut exps: Vec<f64> = (1..=schedule.levels)
        .flat_map(|n| [n as f64, n as f64 - q])
        .filter(|e| e.abs() > 1e-9)
        .collect();
    exps.sort_by(f64::total_cmp);
    exps.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let n = y.len();
    Ok(extrapolate(&y, &vec![0.0; n], schedule.ratio, &exps).value)
}

fn classify_point(f: &(impl Evaluate + ?Sized), pt: &ConfigPoint, pos: usize) -> Result<ChannelEvidence> {
    let kappa = f.kappa();
    let x = pt.coords();
    let mut base = x.to_vec();
    base.drain(pos..pos + 2);
    let base = ConfigPoint::new(base)?;
    let collapse = collapse_interval_at(f, pos, &base, x[pos])?;
    let vanishes = collapse.value.abs() <= ZERO_THRESHOLD * collapse.scale;
    let near = |target: f64| {
        collapse
            .exponent_fit
            .is_some_and(|p| (p - target).abs() <= EXPONENT_TOLERANCE)
    };
    let two_leg_power = near(kappa.two_leg_power());
    let identity_power = near(kappa.identity_power());
    let channel = match (vanishes, collapse.exponent_fit) {
        (true, None) => Channel::TwoLeg,
        (true, Some(_)) if two_leg_power => Channel::TwoLeg,
        (false, Some(_)) if identity_power => {
            if kappa.is_logarithmic() {
                return Err(Error::Classification(format!(
                    "the identity channel is not defined when 8/kappa is an integer (kappa = {}); \
                     limit {:e}, exponent {:?}",
                    kappa.value(),
                    collapse.value,
                    collapse.exponent_fit
                )));
            }
            Channel::Identity
        }
        (_, Some(p)) if !two_leg_power && !identity_power => {
            return Err(Error::Classification(format!(
                "fitted exponent {p} matches neither 2/kappa = {} nor 1 - 6/kappa = {} \
                 (limit {:e}, scale {:e})",
                kappa.two_leg_power(),
                kappa.identity_power(),
                collapse.value,
                collapse.scale
            )));
        }
        _ => Channel::Mixed,
    };
    let two_leg_admixture = if channel == Channel::Identity {
        Some(admixture(f, x, pos, collapse.value)? / collapse.value)
    } else {
        None
    };
    Ok(ChannelEvidence {
        point: x.to_vec(),
        channel,
        collapse,
        two_leg_admixture,
    })
}

/// Classifies the interval (x_pos, x_pos+1) (0-based) at every sample point,
/// collapsing onto each point's own left endpoint.
///
/// Two-leg: the limit vanishes (below [`ZERO_THRESHOLD`] times the ladder
/// scale) and the raw power is 2/κ. Identity: a nonzero limit with power
/// 1 − 6/κ; refused with a diagnostic when 8/κ is an integer. Mixed: the
/// diagnostics disagree, or different points disagree. An exponent matching
/// neither power is a classification error.
pub fn classify_interval(
    f: &(impl Evaluate + ?Sized),
    pos: usize,
    pts: &[ConfigPoint],
) -> Result<IntervalClassification> {
    if pts.is_empty() {
        return Err(Error::Parameter("classification needs at least one point".into()));
    }
    if pos + 1 >= f.arity() {
        return Err(Error::Parameter(format!(
            "interval position {pos} out of range for arity {}",
            f.arity()
        )));
    }
    let evidence = pts
        .iter()
        .map(|p| classify_point(f, p, pos))
        .collect::<Result<Vec<_>>>()?;
    let first = evidence[0].channel;
    let channel = if evidence.iter().all(|e| e.channel == first) {
        first
    } else {
        Channel::Mixed
    };
    Ok(IntervalClassification { channel, evidence })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(v: f64) -> Kappa {
        Kappa::new(v).unwrap()
    }

    fn pt(v: &[f64]) -> ConfigPoint {
        ConfigPoint::new(v.to_vec()).unwrap()
    }

    #[test]
    fn one_arc_collapses_are_exact() {
        for kv in [1.5, 4.0, 6.0, 7.2] {
            let f = SolutionHandle::s1(k(kv), 2.5);
            let r = collapse_interval(&f, 0, &pt(&[])).unwrap();
            assert!((r.value - 2.5).abs() <= 4.0 * f64::EPSILON * 2.5, "{r:?}");
            let r = collapse_outer(&f, &pt(&[])).unwrap();
            assert!((r.value - 2.5).abs() <= 4.0 * f64::EPSILON * 2.5, "{r:?}");
        }
    }

    #[test]
    fn two_leg_collapse_of_g1() {
        let f = SolutionHandle::s2(k(6.0), 1.0, 0.0);
        let r = collapse_interval_at(&f, 0, &pt(&[2.0, 4.0]), 0.0).unwrap();
        assert!(r.value.abs() < 1e-7 * r.scale, "{r:?}");
        assert!((r.exponent_fit.unwrap() - 1.0 / 3.0).abs() < 0.02, "{r:?}");
    }

    #[test]
    fn identity_collapse_matches_closed_form() {
        // collapsing (x₁, x₂) of G₂ leaves A·(x₄ − x₃)^{1−6/κ}
        for kv in [3.0, 6.0, 5.0] {
            let kk = k(kv);
            let f = SolutionHandle::s2(kk, 0.0, 1.0);
            let r = collapse_interval_at(&f, 0, &pt(&[2.0, 4.5]), 0.0).unwrap();
            let expected = crate::solutions::identity_amplitude(kk) * 2.5f64.powf(kk.identity_power());
            assert!((r.value - expected).abs() < 1e-7 * expected.abs(), "kappa {kv}: {r:?} vs {expected}");
        }
    }

    #[test]
    fn sequence_values_for_g1_at_kappa_six() {
        let f = SolutionHandle::s2(k(6.0), 1.0, 0.0);
        let anchor = pt(&[0.0, 1.0, 2.0, 4.0]);
        let ds = enumerate_diagrams(2).unwrap();
        let a = crate::solutions::identity_amplitude(k(6.0));
        let v0 = apply_sequence(&f, &representative_sequence(&ds[0]), &anchor).unwrap();
        let v1 = apply_sequence(&f, &representative_sequence(&ds[1]), &anchor).unwrap();
        assert!(v0.abs() < 1e-8, "{v0}");
        assert!((v1 - a).abs() < 1e-8 * a, "{v1} vs {a}");
    }

    #[test]
    fn bad_inputs() {
        let f = SolutionHandle::s2(k(6.0), 1.0, 0.0);
        assert!(collapse_interval(&f, 0, &pt(&[1.0])).is_err());
        assert!(collapse_interval_at(&f, 1, &pt(&[0.0, 4.0]), 5.0).is_err());
        let big = SolutionHandle::zero(5, k(6.0));
        let anchor = pt(&(0..10).map(f64::from).collect::<Vec<_>>());
        assert!(matches!(dual_vector(&big, &anchor), Err(Error::Resource(_))));
    }

    #[test]
    fn logarithmic_kappa_refuses_identity_label() {
        let f = SolutionHandle::s1(k(4.0), 1.0);
        let err = classify_interval(&f, 0, &[pt(&[0.0, 1.0])]).unwrap_err();
        assert!(matches!(err, Error::Classification(_)));
        // the two-leg label stays decidable
        let g1 = SolutionHandle::s2(k(4.0), 1.0, 0.0);
        let c = classify_interval(&g1, 0, &[pt(&[0.0, 1.0, 2.0, 4.0])]).unwrap();
        assert_eq!(c.channel, Channel::TwoLeg);
    }

    #[test]
    fn determinant_helpers() {
        let d = row_normalized_determinant(&[vec![2.0, 0.0], vec![0.0, 5.0]]).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
        assert_eq!(row_normalized_determinant(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap(), 0.0);
        let rep = LinearSystemReport::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]], 1e-6).unwrap();
        assert_eq!(rep.null_space_dim, 1);
    }
}
