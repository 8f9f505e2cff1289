//! Brute-force oracles for arc diagrams and limit sequences.

use slelab::diagrams::CollapseKind;

pub type Pairs = Vec<(usize, usize)>;

/// All perfect matchings of the points in `points`, by pairing the first
/// point with each other point in turn.
pub fn all_matchings(points: &[usize]) -> Vec<Pairs> {
    if points.is_empty() {
        return vec![vec![]];
    }
    let first = points[0];
    let mut out = Vec::new();
    for k in 1..points.len() {
        let rest: Vec<usize> = points[1..].iter().copied().filter(|&p| p != points[k]).collect();
        for mut m in all_matchings(&rest) {
            m.push((first, points[k]));
            m.sort_unstable();
            out.push(m);
        }
    }
    out
}

pub fn crossing(m: &Pairs) -> bool {
    m.iter()
        .any(|&(i, j)| m.iter().any(|&(k, l)| i < k && k < j && j < l))
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for slot in 0..=p.len() {
            let mut q = p.clone();
            q.insert(slot, n - 1);
            out.push(q);
        }
    }
    out
}

/// Kinds from the bits of `mask` (1 = outer collapse).
pub fn kinds_of(mask: usize, n: usize) -> Vec<CollapseKind> {
    (0..n)
        .map(|i| {
            if mask >> i & 1 == 1 {
                CollapseKind::OuterCollapse
            } else {
                CollapseKind::IntervalCollapse
            }
        })
        .collect()
}

/// The nesting rules, restated: when arc k is collapsed, the endpoints of the
/// arcs collapsed after it must lie all inside it (then it is an outer
/// collapse) or all outside it (then it is an interval collapse). The last
/// arc may be collapsed either way.
pub fn obeys_rules(pairs: &Pairs, order: &[usize], kinds: &[CollapseKind]) -> bool {
    order.iter().enumerate().all(|(step, &a)| {
        let (lo, hi) = pairs[a];
        let later: Vec<usize> = order[step + 1..]
            .iter()
            .flat_map(|&b| [pairs[b].0, pairs[b].1])
            .collect();
        if later.is_empty() {
            return true;
        }
        let inside = later.iter().filter(|&&p| lo < p && p < hi).count();
        match kinds[step] {
            CollapseKind::OuterCollapse => inside == later.len(),
            CollapseKind::IntervalCollapse => inside == 0,
        }
    })
}
