//! Interior arc connectivity diagrams (noncrossing perfect matchings of the
//! boundary points 1..2N) and the allowable orders in which their arcs may be
//! collapsed.
//!
//! Diagrams are purely topological: points are indices, never coordinates.
//! [`enumerate_diagrams`] fixes the order of the C_N connectivities used for
//! every dual-vector component elsewhere in the crate.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_CATALAN_INDEX: u32 = 30;
const MAX_ENUMERATED_PAIRS: usize = 10;

/// The n-th Catalan number (2n)! / (n! (n+1)!).
pub fn catalan(n: u32) -> Result<u64> {
    if n > MAX_CATALAN_INDEX {
        return Err(Error::Resource(format!(
            "catalan({n}) is only supported for n <= {MAX_CATALAN_INDEX}"
        )));
    }
    // C_{k+1} = C_k · 2(2k+1)/(k+2), exact in u128.
    let mut c: u128 = 1;
    for k in 0..n as u128 {
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    Ok(c as u64)
}

/// A noncrossing perfect matching of 1..2N, pairs sorted by left endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<(usize, usize)>", into = "Vec<(usize, usize)>")]
pub struct ArcDiagram {
    pairs: Vec<(usize, usize)>,
}

impl ArcDiagram {
    /// Validates and canonicalizes a list of index pairs (either orientation).
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let n = pairs.len();
        if n == 0 {
            return Err(Error::Parameter("a diagram needs at least one arc".into()));
        }
        let mut pairs: Vec<(usize, usize)> = pairs
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        pairs.sort_unstable();
        let mut seen = vec![false; 2 * n + 1];
        for &(i, j) in &pairs {
            if i == 0 || j > 2 * n || i == j {
                return Err(Error::Parameter(format!(
                    "arc ({i}, {j}) is not a pair of distinct points in 1..={}",
                    2 * n
                )));
            }
            for p in [i, j] {
                if std::mem::replace(&mut seen[p], true) {
                    return Err(Error::Parameter(format!("point {p} is used twice")));
                }
            }
        }
        for (a, &(i, j)) in pairs.iter().enumerate() {
            for &(k, l) in &pairs[a + 1..] {
                if i < k && k < j && j < l {
                    return Err(Error::Parameter(format!(
                        "arcs ({i}, {j}) and ({k}, {l}) cross"
                    )));
                }
            }
        }
        Ok(Self { pairs })
    }

    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Partner of boundary point `p`.
    pub fn partner(&self, p: usize) -> Option<usize> {
        self.pairs.iter().find_map(|&(i, j)| match p {
            _ if p == i => Some(j),
            _ if p == j => Some(i),
            _ => None,
        })
    }

    /// Whether the arc at `index` encloses any other arc.
    pub fn is_nesting(&self, index: usize) -> bool {
        let (i, j) = self.pairs[index];
        j - i > 1
    }
}

impl TryFrom<Vec<(usize, usize)>> for ArcDiagram {
    type Error = Error;
    fn try_from(pairs: Vec<(usize, usize)>) -> Result<Self> {
        Self::new(pairs)
    }
}

impl From<ArcDiagram> for Vec<(usize, usize)> {
    fn from(d: ArcDiagram) -> Self {
        d.pairs
    }
}

impl fmt::Display for ArcDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, (i, j)) in self.pairs.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "({i},{j})")?;
        }
        write!(f, "}}")
    }
}

/// All C_N diagrams on 2N points, in lexicographic order of their pair lists.
pub fn enumerate_diagrams(n_pairs: usize) -> Result<Vec<ArcDiagram>> {
    if n_pairs == 0 || n_pairs > MAX_ENUMERATED_PAIRS {
        return Err(Error::Resource(format!(
            "diagram enumeration supports 1..={MAX_ENUMERATED_PAIRS} arcs, got {n_pairs}"
        )));
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n_pairs);
    match_range(1, 2 * n_pairs, &mut current, &mut out);
    let mut diagrams: Vec<ArcDiagram> = out
        .into_iter()
        .map(|mut pairs| {
            pairs.sort_unstable();
            ArcDiagram { pairs }
        })
        .collect();
    diagrams.sort();
    Ok(diagrams)
}

/// Every noncrossing matching of the points lo..=hi (an even count), appended to `out`.
fn match_range(
    lo: usize,
    hi: usize,
    current: &mut Vec<(usize, usize)>,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    if lo > hi {
        out.push(current.clone());
        return;
    }
    // lo pairs with some partner leaving an even number of points on each side.
    let mut partner = lo + 1;
    while partner <= hi {
        let mut inner = Vec::new();
        let mut tmp = Vec::new();
        match_range(lo + 1, partner - 1, &mut tmp, &mut inner);
        for inside in inner {
            let mark = current.len();
            current.push((lo, partner));
            current.extend_from_slice(&inside);
            match_range(partner + 1, hi, current, out);
            current.truncate(mark);
        }
        partner += 2;
    }
}

/// Whether an arc's collapse is the interval limit (`x_j → x_i`) or the outer
/// limit (`(x_i, x_j) = (−R, R)`, R → ∞).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollapseKind {
    IntervalCollapse,
    OuterCollapse,
}

/// An ordered list of arc collapses over one diagram.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LimitSequence {
    pub diagram: ArcDiagram,
    /// Execution order, as indices into `diagram.pairs()`.
    pub order: Vec<usize>,
    /// Collapse kind of each step, aligned with `order`.
    pub kinds: Vec<CollapseKind>,
}

impl LimitSequence {
    pub fn n_steps(&self) -> usize {
        self.order.len()
    }

    /// The arcs in execution order, paired with their kinds.
    pub fn steps(&self) -> impl Iterator<Item = ((usize, usize), CollapseKind)> + '_ {
        self.order
            .iter()
            .zip(&self.kinds)
            .map(|(&a, &k)| (self.diagram.pairs()[a], k))
    }
}

/// Which nesting rule a sequence breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// `order` is not a permutation of the arcs or `kinds` has the wrong length.
    Malformed,
    /// The remaining endpoints lie all inside the collapsed arc, which forces
    /// an outer collapse.
    InsideForcesOuter,
    /// The remaining endpoints lie all outside the collapsed arc, which forces
    /// an interval collapse.
    OutsideForcesInterval,
    /// The remaining endpoints straddle the collapsed arc.
    Straddles,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub step: usize,
    pub arc: (usize, usize),
    pub rule: Rule,
}

/// Kind forced on collapsing `arc` while the arcs in `remaining` are still
/// present: `Ok(None)` when nothing remains (either kind is allowed).
fn forced_kind(
    arc: (usize, usize),
    remaining: impl Iterator<Item = (usize, usize)>,
) -> std::result::Result<Option<CollapseKind>, Rule> {
    let (lo, hi) = arc;
    let (mut inside, mut outside) = (0usize, 0usize);
    for (i, j) in remaining {
        for p in [i, j] {
            if lo < p && p < hi {
                inside += 1;
            } else {
                outside += 1;
            }
        }
    }
    match (inside, outside) {
        (0, 0) => Ok(None),
        (_, 0) => Ok(Some(CollapseKind::OuterCollapse)),
        (0, _) => Ok(Some(CollapseKind::IntervalCollapse)),
        _ => Err(Rule::Straddles),
    }
}

/// Checks the nesting rules at every step; `Err` carries the first violation.
pub fn validate_sequence(s: &LimitSequence) -> std::result::Result<(), Violation> {
    let n = s.diagram.n_pairs();
    let mut used = vec![false; n];
    let malformed = |step| Violation {
        step,
        arc: (0, 0),
        rule: Rule::Malformed,
    };
    if s.order.len() != n || s.kinds.len() != n {
        return Err(malformed(0));
    }
    for (step, &a) in s.order.iter().enumerate() {
        if a >= n || std::mem::replace(&mut used[a], true) {
            return Err(malformed(step));
        }
    }
    let pairs = s.diagram.pairs();
    for (step, (&a, &kind)) in s.order.iter().zip(&s.kinds).enumerate() {
        let arc = pairs[a];
        let remaining = s.order[step + 1..].iter().map(|&b| pairs[b]);
        match forced_kind(arc, remaining) {
            Ok(None) => {}
            Ok(Some(forced)) if forced == kind => {}
            Ok(Some(CollapseKind::OuterCollapse)) => {
                return Err(Violation {
                    step,
                    arc,
                    rule: Rule::InsideForcesOuter,
                })
            }
            Ok(Some(CollapseKind::IntervalCollapse)) => {
                return Err(Violation {
                    step,
                    arc,
                    rule: Rule::OutsideForcesInterval,
                })
            }
            Err(rule) => return Err(Violation { step, arc, rule }),
        }
    }
    Ok(())
}

/// Every allowable (order, kinds) assignment for `d`. The final arc appears
/// with both kinds, interval first.
pub fn allowable_sequences(d: &ArcDiagram) -> Vec<LimitSequence> {
    let n = d.n_pairs();
    let mut out = Vec::new();
    let mut order = Vec::with_capacity(n);
    let mut kinds = Vec::with_capacity(n);
    let mut used = vec![false; n];
    extend_sequences(d, &mut used, &mut order, &mut kinds, &mut out);
    out
}

fn extend_sequences(
    d: &ArcDiagram,
    used: &mut [bool],
    order: &mut Vec<usize>,
    kinds: &mut Vec<CollapseKind>,
    out: &mut Vec<LimitSequence>,
) {
    let n = d.n_pairs();
    if order.len() == n {
        out.push(LimitSequence {
            diagram: d.clone(),
            order: order.clone(),
            kinds: kinds.clone(),
        });
        return;
    }
    for a in 0..n {
        if used[a] {
            continue;
        }
        let remaining = (0..n)
            .filter(|&b| !used[b] && b != a)
            .map(|b| d.pairs()[b]);
        let choices: &[CollapseKind] = match forced_kind(d.pairs()[a], remaining) {
            Ok(None) => &[CollapseKind::IntervalCollapse, CollapseKind::OuterCollapse],
            Ok(Some(CollapseKind::IntervalCollapse)) => &[CollapseKind::IntervalCollapse],
            Ok(Some(CollapseKind::OuterCollapse)) => &[CollapseKind::OuterCollapse],
            Err(_) => continue,
        };
        for &kind in choices {
            used[a] = true;
            order.push(a);
            kinds.push(kind);
            extend_sequences(d, used, order, kinds, out);
            kinds.pop();
            order.pop();
            used[a] = false;
        }
    }
}

/// Two sequences are equivalent when they collapse the same diagram.
pub fn same_equivalence_class(a: &LimitSequence, b: &LimitSequence) -> bool {
    a.diagram == b.diagram
}

/// The sequence used as the representative of `d`'s equivalence class.
///
/// Outer collapses are taken whenever the outermost remaining points form an
/// arc; otherwise the first arc (in canonical pair order) joining adjacent
/// remaining points is collapsed as an interval. The last arc is collapsed as
/// an interval unless it originally enclosed other arcs. This keeps nested
/// extrapolations from shrinking onto each other.
pub fn representative_sequence(d: &ArcDiagram) -> LimitSequence {
    let n = d.n_pairs();
    let pairs = d.pairs();
    let mut remaining_points: Vec<usize> = (1..=2 * n).collect();
    let mut used = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut kinds = Vec::with_capacity(n);
    for step in 0..n {
        let first = remaining_points[0];
        let last = *remaining_points.last().expect("points remain");
        let (arc, kind) = if step + 1 == n {
            let a = (0..n).find(|&a| !used[a]).expect("one arc remains");
            let kind = if d.is_nesting(a) {
                CollapseKind::OuterCollapse
            } else {
                CollapseKind::IntervalCollapse
            };
            (a, kind)
        } else if let Some(a) = (0..n).find(|&a| !used[a] && pairs[a] == (first, last)) {
            (a, CollapseKind::OuterCollapse)
        } else {
            let a = (0..n)
                .find(|&a| {
                    !used[a]
                        && remaining_points
                            .windows(2)
                            .any(|w| (w[0], w[1]) == pairs[a])
                })
                .expect("a noncrossing matching always has an adjacent arc");
            (a, CollapseKind::IntervalCollapse)
        };
        used[arc] = true;
        order.push(arc);
        kinds.push(kind);
        let (i, j) = pairs[arc];
        remaining_points.retain(|&p| p != i && p != j);
    }
    LimitSequence {
        diagram: d.clone(),
        order,
        kinds,
    }
}
