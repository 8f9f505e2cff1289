//! Generalized Richardson extrapolation on a geometric ladder h_k = h₀ r^k for
//! sequences T(h) = L + Σ a_i h^{e_i} with known, increasing exponents e_i.
//!
//! Each tableau entry is tracked as an explicit linear combination of the raw
//! samples so that uncertainty already present in the samples (from inner
//! extrapolations) can be propagated through the weights.

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Extrapolation {
    pub value: f64,
    /// Difference between the last two rows of the chosen column, plus the
    /// propagated sample uncertainty.
    pub error: f64,
    /// The propagated sample uncertainty alone.
    pub noise: f64,
    /// Number of eliminated correction terms.
    pub column: usize,
}

/// Exponents m·q + n (m ∈ {0, 1}, n ≥ 0, not both zero) sorted and deduplicated:
/// the corrections of an analytic part plus one δ^q-times-analytic part.
pub(crate) fn two_series_exponents(q: f64, count: usize) -> Vec<f64> {
    exponent_ladder(q, 1, count)
}

/// Exponents m·q + n with m ≤ `max_q_multiple`, as above. Logarithms of such
/// series (used for exponent fits) need the larger multiples.
pub(crate) fn exponent_ladder(q: f64, max_q_multiple: usize, count: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for m in 0..=max_q_multiple {
        for n in 0..=count {
            if m == 0 && n == 0 {
                continue;
            }
            let e = m as f64 * q + n as f64;
            if e > 0.0 {
                out.push(e);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    out.truncate(count);
    out
}

/// Extrapolates `samples` (taken at h₀ r^k, k = 0, 1, …) to h → 0.
/// `sigma` holds per-sample absolute uncertainties (may be all zero).
pub(crate) fn extrapolate(
    samples: &[f64],
    sigma: &[f64],
    ratio: f64,
    exponents: &[f64],
) -> Extrapolation {
    let n = samples.len();
    assert!(n >= 2 && sigma.len() == n, "need at least two samples");
    // weights[k][i]: coefficient of sample i in the current column's row k
    let mut weights: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let mut w = vec![0.0; n];
            w[k] = 1.0;
            w
        })
        .collect();
    let combine = |w: &[f64]| -> (f64, f64) {
        let v = w.iter().zip(samples).map(|(a, s)| a * s).sum();
        let e = w.iter().zip(sigma).map(|(a, s)| (a * s).abs()).sum();
        (v, e)
    };
    let score = |weights: &[Vec<f64>], col: usize| -> Extrapolation {
        let (last, noise) = combine(&weights[n - 1]);
        let (prev, _) = combine(&weights[n - 2]);
        Extrapolation {
            value: last,
            error: (last - prev).abs() + noise,
            noise,
            column: col,
        }
    };
    let mut best = score(&weights, 0);
    for (col, &e) in exponents.iter().enumerate() {
        // each column consumes one row; keep two rows to estimate the error
        if n - (col + 1) < 2 {
            break;
        }
        let f = ratio.powf(e);
        let mut next: Vec<Vec<f64>> = vec![vec![0.0; n]; n];
        for k in (col + 1)..n {
            for i in 0..n {
                next[k][i] = (weights[k][i] - f * weights[k - 1][i]) / (1.0 - f);
            }
        }
        weights = next;
        let cand = score(&weights, col + 1);
        if cand.value.is_finite() && cand.error < best.error {
            best = cand;
        }
    }
    best
}
