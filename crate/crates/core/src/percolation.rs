//! Cardy's crossing formula and a Monte Carlo check of it.
//!
//! Lattice conventions:
//!
//! * `SquareBond`: vertices on a grid of `width + 1` columns and `height`
//!   rows. Every vertex of column 0 is merged into the left terminal and every
//!   vertex of column `width` into the right terminal. The open bonds are the
//!   `width·height` horizontal bonds and the vertical bonds inside interior
//!   columns. With `width = height` this graph is isomorphic to its planar dual
//!   for the top-bottom crossing, so the crossing probability at p = 1/2 is
//!   exactly 1/2 at every size. The aspect ratio is `width / height`.
//! * `TriangularSite`: `height` rows of `width` sites, odd rows shifted right
//!   by half a spacing. The left (right) terminal touches every site of the
//!   first (last) column. The aspect ratio is `width / (height·√3/2)`.
//!
//! Trials sweep the lattice one column at a time. Only the cluster labels of
//! the last column are kept; attaching the next column is a union-find over
//! those labels (plus the left terminal), and a trial that loses contact with
//! the left side stops early.
//!
//! Random numbers: trial `t` of a batch with seed `s` draws from ChaCha8
//! seeded with `s` on stream `t`, so the counts do not depend on how the
//! trials are distributed over threads.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solutions::cardy_normalization;
use crate::specfun::{aspect_ratio_split, hyp2f1_split};

/// Smallest accepted lattice side.
pub const MIN_SIDE: usize = 8;

/// Largest accepted number of lattice cells per trial.
pub const MAX_CELLS: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKind {
    SquareBond,
    TriangularSite,
}

#[derive(Deserialize)]
struct RawSpec {
    kind: LatticeKind,
    width_cells: usize,
    height_cells: usize,
    p_open: f64,
}

/// Rectangle of lattice cells with wired left and right sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct LatticeSpec {
    kind: LatticeKind,
    width_cells: usize,
    height_cells: usize,
    aspect_ratio: f64,
    p_open: f64,
}

impl TryFrom<RawSpec> for LatticeSpec {
    type Error = Error;
    fn try_from(r: RawSpec) -> Result<Self> {
        Self::new(r.kind, r.width_cells, r.height_cells, r.p_open)
    }
}

impl LatticeSpec {
    pub fn new(kind: LatticeKind, width_cells: usize, height_cells: usize, p_open: f64) -> Result<Self> {
        if width_cells < MIN_SIDE || height_cells < MIN_SIDE {
            return Err(Error::Parameter(format!(
                "lattice sides must be at least {MIN_SIDE}, got {width_cells} x {height_cells}"
            )));
        }
        if width_cells.saturating_mul(height_cells) > MAX_CELLS {
            return Err(Error::Resource(format!(
                "{width_cells} x {height_cells} exceeds {MAX_CELLS} cells"
            )));
        }
        if !(0.0..=1.0).contains(&p_open) {
            return Err(Error::Parameter(format!("p_open must lie in [0, 1], got {p_open}")));
        }
        let (w, h) = (width_cells as f64, height_cells as f64);
        let aspect_ratio = match kind {
            LatticeKind::SquareBond => w / h,
            LatticeKind::TriangularSite => w / (h * 3f64.sqrt() / 2.0),
        };
        Ok(Self {
            kind,
            width_cells,
            height_cells,
            aspect_ratio,
            p_open,
        })
    }

    /// Critical square-lattice bond percolation.
    pub fn square(width_cells: usize, height_cells: usize) -> Result<Self> {
        Self::new(LatticeKind::SquareBond, width_cells, height_cells, 0.5)
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn width_cells(&self) -> usize {
        self.width_cells
    }

    pub fn height_cells(&self) -> usize {
        self.height_cells
    }

    pub fn aspect_ratio(&self) -> f64 {
        self.aspect_ratio
    }

    pub fn p_open(&self) -> f64 {
        self.p_open
    }

    /// The finite-size part of the comparison budget, 2 / min(width, height).
    pub fn finite_size_allowance(&self) -> f64 {
        2.0 / self.width_cells.min(self.height_cells) as f64
    }
}

/// Disjoint sets with path compression and union by rank.
#[derive(Debug, Clone, Default)]
pub struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        let mut uf = Self::default();
        uf.reset(n);
        uf
    }

    /// Makes `n` singleton sets, reusing the allocation.
    pub fn reset(&mut self, n: usize) {
        self.parent.clear();
        self.parent.extend(0..n as u32);
        self.rank.clear();
        self.rank.resize(n, 0);
    }

    pub fn find(&mut self, x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut node = x;
        while self.parent[node as usize] != root {
            let next = self.parent[node as usize];
            self.parent[node as usize] = root;
            node = next;
        }
        root
    }

    pub fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.link(ra, rb);
        }
    }

    /// Merges two distinct roots by rank and returns the surviving root.
    pub(crate) fn link(&mut self, ra: u32, rb: u32) -> u32 {
        let (ka, kb) = (self.rank[ra as usize], self.rank[rb as usize]);
        if ka < kb {
            self.parent[ra as usize] = rb;
            rb
        } else {
            self.parent[rb as usize] = ra;
            if ka == kb {
                self.rank[ra as usize] += 1;
            }
            ra
        }
    }

    pub fn connected(&mut self, a: u32, b: u32) -> bool {
        self.find(a) == self.find(b)
    }
}

/// Bernoulli(p) draws in blocks. At p = 1/2 a block of n draws takes
/// ⌈n/64⌉ words of the stream; otherwise each draw takes one word, compared
/// as a 53-bit uniform against p.
struct Coin {
    rng: ChaCha8Rng,
    p: f64,
}

impl Coin {
    fn new(seed: u64, stream: u64, p: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, p }
    }

    /// Overwrites `out` with `n` draws, bit j of the block at `out[j / 64] >> (j % 64)`.
    fn draw(&mut self, n: usize, out: &mut Vec<u64>) {
        out.clear();
        if self.p == 0.5 {
            out.extend((0..n.div_ceil(64)).map(|_| self.rng.next_u64()));
        } else {
            out.resize(n.div_ceil(64), 0);
            for j in 0..n {
                let u = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                if u < self.p {
                    out[j >> 6] |= 1 << (j & 63);
                }
            }
        }
    }
}

#[inline]
fn bit(words: &[u64], j: usize) -> bool {
    (words[j >> 6] >> (j & 63)) & 1 == 1
}

/// Marks a closed site, or a run without a link to the previous column.
const NONE: u32 = u32::MAX;

/// A maximal vertically connected stretch `start..end` of open rows in the
/// column being attached, with a union-find node of its cluster (NONE if it
/// touches nothing in the previous column).
#[derive(Clone, Copy)]
struct Run {
    start: u32,
    end: u32,
    rep: u32,
}

/// Scratch space for one trial.
///
/// Between columns every row carries a label: 0 when joined to the left
/// terminal, NONE for a closed site, otherwise 1 + (first row of its
/// cluster within the column). The labels double as union-find nodes while
/// the next column is attached, so the arena only needs H + 1 nodes.
struct Sweep {
    uf: UnionFind,
    prev: Vec<u32>,
    first_bits: Vec<u64>,
    second_bits: Vec<u64>,
    runs: Vec<Run>,
    /// Union-find root -> compact label, valid where `stamp` equals `generation`.
    remap: Vec<u32>,
    stamp: Vec<u32>,
    generation: u32,
}

impl Sweep {
    fn new(height: usize) -> Self {
        Self {
            uf: UnionFind::new(height + 1),
            prev: vec![0; height],
            first_bits: Vec::new(),
            second_bits: Vec::new(),
            runs: Vec::with_capacity(height),
            remap: vec![0; height + 1],
            stamp: vec![0; height + 1],
            generation: 0,
        }
    }

    fn begin_column(&mut self, height: usize) {
        self.uf.reset(height + 1);
        self.runs.clear();
    }

    /// Joins a run with representative `rep` to the previous-column `label`.
    #[inline]
    fn attach(&mut self, rep: u32, label: u32) -> u32 {
        let r = self.uf.find(label);
        if rep == NONE || rep == r {
            r
        } else {
            self.uf.link(rep, r)
        }
    }

    /// Relabels the rows from the recorded runs; rows in no run are closed.
    /// Returns false if no run is joined to the left terminal.
    fn end_column(&mut self, height: usize) -> bool {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.generation = 1;
        }
        let left = self.uf.find(0);
        let mut alive = false;
        let mut row = 0;
        for i in 0..self.runs.len() {
            let Run { start, end, rep } = self.runs[i];
            let label = if rep == NONE {
                1 + start
            } else {
                let root = self.uf.find(rep);
                if root == left {
                    alive = true;
                    0
                } else {
                    let r = root as usize;
                    if self.stamp[r] != self.generation {
                        self.stamp[r] = self.generation;
                        self.remap[r] = 1 + start;
                    }
                    self.remap[r]
                }
            };
            for p in &mut self.prev[row..start as usize] {
                *p = NONE;
            }
            for p in &mut self.prev[start as usize..end as usize] {
                *p = label;
            }
            row = end as usize;
        }
        self.prev[row..height].fill(NONE);
        alive
    }
}

/// First set bit of `words` in `from..limit`, or `limit`.
#[inline]
fn next_set(words: &[u64], from: usize, limit: usize) -> usize {
    if from >= limit {
        return limit;
    }
    let mut k = from >> 6;
    let mut w = words[k] & (!0u64 << (from & 63));
    while w == 0 {
        k += 1;
        if k << 6 >= limit {
            return limit;
        }
        w = words[k];
    }
    ((k << 6) + w.trailing_zeros() as usize).min(limit)
}

/// Per column: `height` horizontal bonds into the next column, then (unless
/// the next column is the wired right side) `height − 1` vertical bonds
/// inside the next column, bottom to top.
fn square_bond_trial(width: usize, height: usize, coin: &mut Coin, sw: &mut Sweep) -> bool {
    let n_words = height.div_ceil(64);
    let mut starts = vec![0u64; n_words];
    // column 0 is wired to the left terminal
    sw.prev.fill(0);
    for c in 0..width {
        coin.draw(height, &mut sw.first_bits);
        if c + 1 == width {
            // the last horizontal bonds end on the wired right side
            return (0..height).any(|j| bit(&sw.first_bits, j) && sw.prev[j] == 0);
        }
        coin.draw(height - 1, &mut sw.second_bits);
        // a run starts at row 0 and above every closed vertical bond
        let v = &sw.second_bits;
        for (k, s) in starts.iter_mut().enumerate() {
            let below = if k > 0 { v.get(k - 1).map_or(0, |w| w >> 63) } else { 0 };
            *s = !((v.get(k).copied().unwrap_or(0) << 1) | below);
        }
        sw.begin_column(height);
        let mut start = 0;
        while start < height {
            let end = next_set(&starts, start + 1, height);
            let (mut rep, mut last) = (NONE, NONE);
            let mut j = next_set(&sw.first_bits, start, end);
            while j < end {
                // neighbouring rows usually share a label; skip repeats
                let label = sw.prev[j];
                if label != last {
                    last = label;
                    rep = sw.attach(rep, label);
                }
                j = next_set(&sw.first_bits, j + 1, end);
            }
            sw.runs.push(Run { start: start as u32, end: end as u32, rep });
            start = end;
        }
        if !sw.end_column(height) {
            return false;
        }
    }
    unreachable!("the loop returns at the last column")
}

/// Per column: `height` site states, bottom to top.
fn triangular_site_trial(width: usize, height: usize, coin: &mut Coin, sw: &mut Sweep) -> bool {
    // the left terminal acts as a fully open column -1
    sw.prev.fill(0);
    for _ in 0..width {
        coin.draw(height, &mut sw.first_bits);
        sw.begin_column(height);
        let mut current: Option<Run> = None;
        for j in 0..height {
            if !bit(&sw.first_bits, j) {
                if let Some(run) = current.take() {
                    sw.runs.push(run);
                }
                continue;
            }
            let mut run = current.unwrap_or(Run { start: j as u32, end: 0, rep: NONE });
            run.end = j as u32 + 1;
            // even rows sit half a spacing left of odd rows, so an even-row
            // site also touches rows j ± 1 of the previous column
            let (lo, hi) = if j % 2 == 0 {
                (j.saturating_sub(1), (j + 1).min(height - 1))
            } else {
                (j, j)
            };
            for i in lo..=hi {
                let label = sw.prev[i];
                if label != NONE {
                    run.rep = sw.attach(run.rep, label);
                }
            }
            current = Some(run);
        }
        if let Some(run) = current {
            sw.runs.push(run);
        }
        if !sw.end_column(height) {
            return false;
        }
    }
    // the right terminal touches every site of the last column
    true
}

/// Outcome of one trial; deterministic in (spec, seed, trial).
pub fn crosses(spec: &LatticeSpec, seed: u64, trial: u64) -> bool {
    let mut coin = Coin::new(seed, trial, spec.p_open);
    let mut sweep = Sweep::new(spec.height_cells);
    run_trial(spec, &mut coin, &mut sweep)
}

fn run_trial(spec: &LatticeSpec, coin: &mut Coin, sw: &mut Sweep) -> bool {
    match spec.kind {
        LatticeKind::SquareBond => square_bond_trial(spec.width_cells, spec.height_cells, coin, sw),
        LatticeKind::TriangularSite => {
            triangular_site_trial(spec.width_cells, spec.height_cells, coin, sw)
        }
    }
}

fn count_range(spec: &LatticeSpec, seed: u64, range: std::ops::Range<u64>) -> u64 {
    let mut sweep = Sweep::new(spec.height_cells);
    range
        .filter(|&t| {
            let mut coin = Coin::new(seed, t, spec.p_open);
            run_trial(spec, &mut coin, &mut sweep)
        })
        .count() as u64
}

/// One fully drawn square-lattice bond configuration, for inspection and
/// rendering. Uses the same random stream as trial `trial` of a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BondConfiguration {
    pub width: usize,
    pub height: usize,
    /// `horizontal[c * height + j]`: bond from column c to c + 1 in row j.
    pub horizontal: Vec<bool>,
    /// `vertical[c * (height − 1) + j]`: bond from row j to j + 1 in column c,
    /// for interior columns c = 1..width (entry c − 1).
    pub vertical: Vec<bool>,
    /// Vertices (column-major, (width + 1)·height) joined to the left side.
    pub left_cluster: Vec<bool>,
    pub crosses: bool,
}

/// Draws the whole configuration of a square-bond trial and labels the
/// cluster of the left side with a full-lattice union-find.
pub fn sample_square_bond(spec: &LatticeSpec, seed: u64, trial: u64) -> Result<BondConfiguration> {
    if spec.kind != LatticeKind::SquareBond {
        return Err(Error::Parameter("only square-bond configurations can be sampled".into()));
    }
    let (w, h) = (spec.width_cells, spec.height_cells);
    let mut coin = Coin::new(seed, trial, spec.p_open);
    let mut words = Vec::new();
    let mut horizontal = Vec::with_capacity(w * h);
    let mut vertical = Vec::with_capacity((w - 1) * (h - 1));
    for c in 0..w {
        coin.draw(h, &mut words);
        horizontal.extend((0..h).map(|j| bit(&words, j)));
        if c + 1 < w {
            coin.draw(h - 1, &mut words);
            vertical.extend((0..h - 1).map(|j| bit(&words, j)));
        }
    }
    let vertex = |c: usize, j: usize| (c * h + j) as u32;
    let n = (w + 1) * h;
    let mut uf = UnionFind::new(n);
    for j in 0..h {
        uf.union(vertex(0, j), vertex(0, 0));
        uf.union(vertex(w, j), vertex(w, 0));
    }
    for c in 0..w {
        for j in 0..h {
            if horizontal[c * h + j] {
                uf.union(vertex(c, j), vertex(c + 1, j));
            }
        }
    }
    for c in 1..w {
        for j in 0..h - 1 {
            if vertical[(c - 1) * (h - 1) + j] {
                uf.union(vertex(c, j), vertex(c, j + 1));
            }
        }
    }
    let left = vertex(0, 0);
    let left_cluster: Vec<bool> = (0..n as u32).map(|v| uf.connected(v, left)).collect();
    Ok(BondConfiguration {
        width: w,
        height: h,
        crosses: uf.connected(left, vertex(w, 0)),
        horizontal,
        vertical,
        left_cluster,
    })
}

/// One fully drawn triangular-lattice site configuration; see
/// [`sample_square_bond`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteConfiguration {
    pub width: usize,
    pub height: usize,
    /// `open[c * height + j]`: site in column c, row j.
    pub open: Vec<bool>,
    /// Sites joined to the left side.
    pub left_cluster: Vec<bool>,
    pub crosses: bool,
}

/// Draws the whole configuration of a triangular-site trial and labels the
/// cluster of the left side with a full-lattice union-find.
pub fn sample_triangular_site(
    spec: &LatticeSpec,
    seed: u64,
    trial: u64,
) -> Result<SiteConfiguration> {
    if spec.kind != LatticeKind::TriangularSite {
        return Err(Error::Parameter("expected a triangular-site lattice".into()));
    }
    let (w, h) = (spec.width_cells, spec.height_cells);
    let mut coin = Coin::new(seed, trial, spec.p_open);
    let mut words = Vec::new();
    let mut open = Vec::with_capacity(w * h);
    for _ in 0..w {
        coin.draw(h, &mut words);
        open.extend((0..h).map(|j| bit(&words, j)));
    }
    // sites are 0..w·h, then the two terminals
    let (left, right) = ((w * h) as u32, (w * h + 1) as u32);
    let site = |c: usize, j: usize| (c * h + j) as u32;
    let mut uf = UnionFind::new(w * h + 2);
    for c in 0..w {
        for j in 0..h {
            if !open[c * h + j] {
                continue;
            }
            if c == 0 {
                uf.union(site(c, j), left);
            }
            if c + 1 == w {
                uf.union(site(c, j), right);
            }
            if j + 1 < h && open[c * h + j + 1] {
                uf.union(site(c, j), site(c, j + 1));
            }
            if c > 0 {
                let rows: &[usize] = if j % 2 == 0 { &[j.wrapping_sub(1), j, j + 1] } else { &[j] };
                for &i in rows {
                    if i < h && open[(c - 1) * h + i] {
                        uf.union(site(c, j), site(c - 1, i));
                    }
                }
            }
        }
    }
    let left_cluster = (0..(w * h) as u32).map(|v| uf.connected(v, left)).collect();
    Ok(SiteConfiguration { width: w, height: h, crosses: uf.connected(left, right), open, left_cluster })
}

/// Crossing counts of a batch of independent trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialBatch {
    pub spec: LatticeSpec,
    pub n_trials: u64,
    pub seed: u64,
    pub crossings: u64,
    pub p_hat: f64,
    /// Binomial standard error sqrt(p̂(1 − p̂)/n).
    pub stderr: f64,
}

/// Runs `n_trials` trials; with the `parallel` feature they are spread over
/// the current rayon pool without changing the result.
pub fn run_batch(spec: &LatticeSpec, n_trials: u64, seed: u64) -> Result<TrialBatch> {
    if n_trials == 0 {
        return Err(Error::Parameter("need at least one trial".into()));
    }
    #[cfg(feature = "parallel")]
    let crossings = {
        use rayon::prelude::*;
        const CHUNK: u64 = 256;
        (0..n_trials.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| count_range(spec, seed, c * CHUNK..((c + 1) * CHUNK).min(n_trials)))
            .sum()
    };
    #[cfg(not(feature = "parallel"))]
    let crossings = count_range(spec, seed, 0..n_trials);
    let p_hat = crossings as f64 / n_trials as f64;
    Ok(TrialBatch {
        spec: *spec,
        n_trials,
        seed,
        crossings,
        p_hat,
        stderr: (p_hat * (1.0 - p_hat) / n_trials as f64).sqrt(),
    })
}

/// (m, 1 − m) for R ≥ 1, so that m ≤ 1/2 is resolved to full relative precision.
fn modulus_pair_at_least_one(r: f64) -> Result<(f64, f64)> {
    // R(m) decreases from ∞ at m = 0 to 1 at m = 1/2; bisect in log m.
    let ratio = |log_m: f64| {
        let m = log_m.exp();
        aspect_ratio_split(m, 1.0 - m)
    };
    let (mut lo, mut hi) = (-700.0f64, 0.5f64.ln());
    if ratio(lo) < r {
        return Err(Error::Bisection(format!(
            "aspect ratio {r} needs an elliptic parameter below e^-700"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ratio(mid) > r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let m = (0.5 * (lo + hi)).exp();
    let back = aspect_ratio_split(m, 1.0 - m);
    if !back.is_finite() || (back - r).abs() > 1e-12 * r {
        return Err(Error::Bisection(format!(
            "bisection stalled at m = {m} with R(m) = {back}, target {r}"
        )));
    }
    Ok((m, 1.0 - m))
}

/// The pair (m, 1 − m) with K(1 − m)/K(m) = R, each computed to full relative precision.
pub fn modulus_pair_from_ratio(r: f64) -> Result<(f64, f64)> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("aspect ratio must be positive, got {r}")));
    }
    if r >= 1.0 {
        modulus_pair_at_least_one(r)
    } else {
        // R(1 − m) = 1/R(m)
        let (mc, m) = modulus_pair_at_least_one(1.0 / r)?;
        Ok((m, mc))
    }
}

/// Elliptic parameter m with K(1 − m)/K(m) = R.
pub fn modulus_from_ratio(r: f64) -> Result<f64> {
    modulus_pair_from_ratio(r).map(|(m, _)| m)
}

/// Cardy's formula as a function of the elliptic parameter (given with its complement).
fn cardy_from_pair(m: f64, mc: f64) -> Result<f64> {
    let f = hyp2f1_split(1.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0, m, mc)?;
    Ok(cardy_normalization() * m.cbrt() * f)
}

/// Cardy's formula as a function of the elliptic parameter m ∈ (0, 1).
pub fn cardy_from_modulus(m: f64) -> Result<f64> {
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::Domain(format!("elliptic parameter must lie in (0, 1), got {m}")));
    }
    cardy_from_pair(m, 1.0 - m)
}

/// Left-right crossing probability of a rectangle of aspect ratio R (width/height).
pub fn cardy_probability(r: f64) -> Result<f64> {
    let (m, mc) = modulus_pair_from_ratio(r)?;
    cardy_from_pair(m, mc)
}

/// A simulated batch set against Cardy's formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub batch: TrialBatch,
    pub cardy: f64,
    /// (p̂ − P)/stderr; `None` when the standard error is zero.
    pub z_score: Option<f64>,
    pub finite_size_allowance: f64,
    /// max(3·stderr, finite-size allowance).
    pub tolerance: f64,
    pub pass: bool,
}

/// Runs a batch and compares it with Cardy's formula at the lattice's aspect ratio.
pub fn compare(spec: &LatticeSpec, n_trials: u64, seed: u64) -> Result<Comparison> {
    let batch = run_batch(spec, n_trials, seed)?;
    let cardy = cardy_probability(spec.aspect_ratio)?;
    let diff = batch.p_hat - cardy;
    let allowance = spec.finite_size_allowance();
    let tolerance = (3.0 * batch.stderr).max(allowance);
    Ok(Comparison {
        z_score: (batch.stderr > 0.0).then(|| diff / batch.stderr),
        pass: diff.abs() < tolerance,
        finite_size_allowance: allowance,
        tolerance,
        cardy,
        batch,
    })
}

/// One row of an aspect-ratio sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "R")]
    pub ratio: f64,
    pub p_hat: f64,
    pub stderr: f64,
    pub cardy: f64,
    pub z: Option<f64>,
}

/// Compares several aspect ratios at a fixed height, with width = round(R·height)
/// (round(R·height·√3/2) for the triangular lattice). Each ratio gets seed + index.
pub fn sweep(
    kind: LatticeKind,
    height: usize,
    ratios: &[f64],
    n_trials: u64,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    ratios
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let cells = match kind {
                LatticeKind::SquareBond => r * height as f64,
                LatticeKind::TriangularSite => r * height as f64 * 3f64.sqrt() / 2.0,
            };
            let spec = LatticeSpec::new(kind, cells.round() as usize, height, 0.5)?;
            let cmp = compare(&spec, n_trials, seed.wrapping_add(i as u64))?;
            Ok(SweepRow {
                ratio: spec.aspect_ratio,
                p_hat: cmp.batch.p_hat,
                stderr: cmp.batch.stderr,
                cardy: cmp.cardy,
                z: cmp.z_score,
            })
        })
        .collect()
}
