//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints one PASS/FAIL line; the process fails if any criterion does.
//! Positional arguments pick criteria by number: `cargo test --test acceptance -- 3 6`.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use common::combinatorics::{all_matchings, crossing, kinds_of, obeys_rules, permutations, Pairs};
use common::{elliptic_k_trapezoid, CENTRAL_CHARGES};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slelab::diagrams::{allowable_sequences, enumerate_diagrams, validate_sequence, LimitSequence};
use slelab::limits::{
    apply_all_orders, classify_interval, collapse_interval, collapse_interval_at, dual_matrix,
    row_normalized_determinant, two_leg_system, Channel,
};
use slelab::params::{central_charge, kac_weight, one_leg_weight, s_leg_weight, KacIndex, Kappa};
use slelab::pde_check::{full_report, ward_residuals, DEFAULT_SWEEP};
use slelab::percolation::{cardy_probability, modulus_from_ratio, run_batch, LatticeSpec};
use slelab::{ConfigPoint, Evaluate, Result, SolutionHandle};

type Outcome = std::result::Result<String, String>;

fn k(v: f64) -> Kappa {
    Kappa::new(v).expect("kappa in range")
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * (rng.next_u64() >> 11) as f64 * 2f64.powi(-53)
}

/// `count` increasing configurations of `n` points: first point in [0, 1],
/// gaps in [0.5, 2].
fn random_points(n: usize, count: usize, seed: u64) -> Vec<ConfigPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut x = vec![uniform(&mut rng, 0.0, 1.0)];
            for _ in 1..n {
                let next = x.last().unwrap() + uniform(&mut rng, 0.5, 2.0);
                x.push(next);
            }
            ConfigPoint::new(x).expect("increasing")
        })
        .collect()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cardy_agreement() -> Outcome {
    // about 4·10⁴ cells per lattice; 200 × 200 at R = 1
    let lattices = [(141, 282), (200, 200), (282, 141), (345, 115)];
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, &(w, h)) in lattices.iter().enumerate() {
        let spec = LatticeSpec::square(w, h).map_err(|e| e.to_string())?;
        let b = run_batch(&spec, 100_000, 1000 + i as u64).map_err(|e| e.to_string())?;
        let p = cardy_probability(spec.aspect_ratio()).map_err(|e| e.to_string())?;
        let tol = (3.0 * b.stderr).max(0.01);
        ok &= (b.p_hat - p).abs() < tol;
        if w == h {
            ok &= (b.p_hat - 0.5).abs() < 3.0 * b.stderr;
        }
        parts.push(format!(
            "R={}: {:.4}±{:.4} vs {:.4}",
            spec.aspect_ratio(),
            b.p_hat,
            b.stderr,
            p
        ));
    }
    parts.push(format!("{:.1} s", start.elapsed().as_secs_f64()));
    check(ok, parts.join("; "))
}

fn formula_duality() -> Outcome {
    let mut worst_sum: f64 = 0.0;
    let mut worst_trip: f64 = 0.0;
    for i in 0..50 {
        let r = 0.2 * 25f64.powf(i as f64 / 49.0);
        let a = cardy_probability(r).map_err(|e| e.to_string())?;
        let b = cardy_probability(1.0 / r).map_err(|e| e.to_string())?;
        worst_sum = worst_sum.max((a + b - 1.0).abs());
        // m ↦ R(m) ↦ m, with R(m) from an independent quadrature
        let m = modulus_from_ratio(r).map_err(|e| e.to_string())?;
        let r_back = elliptic_k_trapezoid(1.0 - m) / elliptic_k_trapezoid(m);
        let m_back = modulus_from_ratio(r_back).map_err(|e| e.to_string())?;
        worst_trip = worst_trip.max((m_back - m).abs() / m);
    }
    check(
        worst_sum <= 1e-10 && worst_trip <= 1e-10,
        format!("max |P(R)+P(1/R)-1| = {worst_sum:.1e}, max m round trip {worst_trip:.1e}"),
    )
}

fn pde_suite() -> Outcome {
    let mut handles = Vec::new();
    for kv in [2.0, 4.0, 16.0 / 3.0] {
        handles.push(SolutionHandle::s1(k(kv), 1.0));
    }
    for kv in [8.0 / 3.0, 4.0, 6.0] {
        for (c1, c2) in [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
            handles.push(SolutionHandle::s2(k(kv), c1, c2));
        }
    }
    let (mut worst, mut min_order, mut exact) = (0.0f64, f64::INFINITY, 0);
    let mut ok = true;
    for (i, f) in handles.iter().enumerate() {
        let pts = random_points(f.arity(), 20, 300 + i as u64);
        let rep = full_report(f, &pts, &DEFAULT_SWEEP).map_err(|e| e.to_string())?;
        let largest = rep.null_state.iter().chain(&rep.ward).fold(0.0f64, |a, &b| a.max(b));
        worst = worst.max(largest);
        match rep.min_order() {
            Some(o) => min_order = min_order.min(o),
            // no sweep level stands clear of rounding (e.g. G₁ + G₂ at κ = 6 is
            // constant); only acceptable when the residual is far below tolerance
            None if largest < 1e-6 => exact += 1,
            None => ok = false,
        }
    }
    ok &= worst <= 1e-5 && min_order >= 3.5;
    check(
        ok,
        format!(
            "{} handles x 20 points: max residual {worst:.1e}, min fitted order {min_order:.2} \
             ({exact} handles at rounding level, no order)",
            handles.len()
        ),
    )
}

fn counterexample() -> Outcome {
    let (mut ns, mut w0, mut w12) = (0.0f64, 0.0f64, f64::INFINITY);
    for (i, kv) in [1.5, 8.0 / 3.0, 4.0, 6.0, 7.5].into_iter().enumerate() {
        let f = SolutionHandle::counterexample(k(kv), 2);
        for p in random_points(4, 20, 400 + i as u64) {
            for j in 0..4 {
                let r = slelab::pde_check::null_state_residual(&f, &p, j, 1e-3)
                    .map_err(|e| e.to_string())?;
                ns = ns.max(r);
            }
            let w = ward_residuals(&f, &p, 1e-3).map_err(|e| e.to_string())?;
            w0 = w0.max(w[0]);
            w12 = w12.min(w[1]).min(w[2]);
        }
    }
    check(
        ns <= 1e-5 && w0 <= 1e-6 && w12 >= 0.1,
        format!("null-state max {ns:.1e}, translation max {w0:.1e}, dilation/inversion min {w12:.3}"),
    )
}

fn catalan() -> Outcome {
    let sizes: Vec<usize> = (1..=6)
        .map(|n| enumerate_diagrams(n).map(|d| d.len()))
        .collect::<Result<_>>()
        .map_err(|e| e.to_string())?;
    let mut ok = sizes == [1, 2, 5, 14, 42, 132];
    for n in 1..=4 {
        let points: Vec<usize> = (1..=2 * n).collect();
        let brute: BTreeSet<Pairs> = all_matchings(&points).into_iter().filter(|m| !crossing(m)).collect();
        let listed: BTreeSet<Pairs> = enumerate_diagrams(n)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|d| d.pairs().to_vec())
            .collect();
        ok &= brute == listed;
    }
    let mut sequences = 0;
    for n in 1..=5 {
        let perms = permutations(n);
        for d in enumerate_diagrams(n).map_err(|e| e.to_string())? {
            let mut searched = BTreeSet::new();
            for order in &perms {
                for mask in 0..1usize << n {
                    let kinds = kinds_of(mask, n);
                    let legal = obeys_rules(&d.pairs().to_vec(), order, &kinds);
                    let s = LimitSequence { diagram: d.clone(), order: order.clone(), kinds: kinds.clone() };
                    ok &= validate_sequence(&s).is_ok() == legal;
                    if legal {
                        searched.insert((order.clone(), kinds));
                    }
                }
            }
            let returned = allowable_sequences(&d);
            sequences += returned.len();
            let set: BTreeSet<_> = returned.into_iter().map(|s| (s.order, s.kinds)).collect();
            ok &= set == searched;
        }
    }
    check(ok, format!("sizes {sizes:?}; {sequences} allowable sequences for N <= 5 match the search"))
}

fn limit_suite() -> Outcome {
    let run = || -> Result<(bool, String)> {
        let mut notes = Vec::new();
        // (a)
        let mut a_ok = true;
        for kv in [2.0, 4.0, 6.0, 7.5] {
            let r = collapse_interval(&SolutionHandle::s1(k(kv), 1.7), 0, &ConfigPoint::new(vec![])?)?;
            a_ok &= (r.value - 1.7).abs() <= 4.0 * f64::EPSILON * 1.7;
        }
        notes.push(format!("(a) {a_ok}"));
        // (b)
        let g1 = SolutionHandle::s2(k(6.0), 1.0, 0.0);
        let pts = random_points(4, 5, 600);
        let c = classify_interval(&g1, 0, &pts)?;
        let exps: Vec<f64> = c.evidence.iter().filter_map(|e| e.collapse.exponent_fit).collect();
        let b_ok = c.channel == Channel::TwoLeg
            && exps.len() == pts.len()
            && exps.iter().all(|p| (p - 1.0 / 3.0).abs() <= 0.02);
        notes.push(format!("(b) {b_ok}"));
        // (c)
        let g2 = SolutionHandle::s2(k(6.0), 0.0, 1.0);
        let c = classify_interval(&g2, 0, &pts)?;
        let base = ConfigPoint::new(vec![2.0, 3.5])?;
        let values = (0..=10)
            .map(|i| collapse_interval_at(&g2, 0, &base, 0.5 + 0.1 * i as f64).map(|r| r.value))
            .collect::<Result<Vec<_>>>()?;
        let spread = values.iter().fold(0.0f64, |m, v| m.max((v - values[0]).abs())) / values[0].abs();
        let c_ok = c.channel == Channel::Identity && spread < 1e-4;
        notes.push(format!("(c) {c_ok}, spread {spread:.1e}"));
        // (d)
        let mut d_ok = true;
        let mut compared = 0;
        let anchor = ConfigPoint::new(vec![0.0, 1.0, 2.0, 3.5])?;
        for (c1, c2) in [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
            for d in enumerate_diagrams(2)? {
                let runs = apply_all_orders(&SolutionHandle::s2(k(6.0), c1, c2), &d, &anchor)?;
                let (_, v0, e0) = &runs[0];
                for (_, v, e) in &runs[1..] {
                    d_ok &= (v - v0).abs() <= (e0 + e).max(4.0 * f64::EPSILON * v0.abs());
                    compared += 1;
                }
            }
        }
        let one = SolutionHandle::constant(3, k(6.0), 1.0);
        let anchor3 = ConfigPoint::new(vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0])?;
        for d in enumerate_diagrams(3)? {
            if (0..3).any(|i| d.is_nesting(i)) {
                continue;
            }
            let runs = apply_all_orders(&one, &d, &anchor3)?;
            d_ok &= runs.iter().all(|(_, v, _)| (v - 1.0).abs() <= 1e-12);
            compared += runs.len() - 1;
        }
        notes.push(format!("(d) {d_ok} over {compared} order pairs"));
        // (e)
        let basis = [g1.clone(), g2.clone()];
        let det = row_normalized_determinant(&dual_matrix(&basis, &ConfigPoint::new(vec![0.0, 1.0, 2.0, 4.0])?)?)?;
        let e_ok = det.abs() >= 1e-3;
        notes.push(format!("(e) {e_ok}, |det| {:.6}", det.abs()));
        Ok((a_ok && b_ok && c_ok && d_ok && e_ok, notes.join("; ")))
    };
    match run() {
        Ok((ok, detail)) => check(ok, detail),
        Err(e) => Err(e.to_string()),
    }
}

fn two_leg_only_trivially() -> Outcome {
    let anchor = ConfigPoint::new(vec![0.0, 1.0, 2.0, 4.0]).map_err(|e| e.to_string())?;
    let rep = two_leg_system(k(6.0), &anchor).map_err(|e| e.to_string())?;
    check(
        rep.null_space_dim == 0 && rep.condition_number.is_finite(),
        format!("null space dim {}, condition number {:.3}", rep.null_space_dim, rep.condition_number),
    )
}

fn parameter_identities() -> Outcome {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-14 * b.abs().max(1.0);
    let kac = |r, s| KacIndex::new(r, s).expect("positive indices");
    let mut ok = true;
    for i in 0..1000 {
        let kv = 8.0 * (i as f64 + 0.5) / 1000.0;
        let kk = k(kv);
        let theta = one_leg_weight(kk);
        for s in 0..=4u32 {
            let idx = if kv > 4.0 { kac(1, s + 1) } else { kac(s + 1, 1) };
            let sw = s_leg_weight(s as i64, kk).map_err(|e| e.to_string())?;
            ok &= close(kac_weight(idx, kk), sw);
        }
        let idx = if kv > 4.0 { kac(1, 2) } else { kac(2, 1) };
        ok &= close(kac_weight(idx, kk), theta);
        let dual = 2.0 + 2.0 * (i as f64 + 1.0) / 1000.0;
        ok &= close(central_charge(k(dual)), central_charge(k(16.0 / dual)));
    }
    let table_ok = CENTRAL_CHARGES
        .iter()
        .all(|&(kv, c)| (central_charge(k(kv)) - c).abs() <= 4.0 * f64::EPSILON);
    check(
        ok && table_ok,
        format!("1000-point grid identities {ok}; {} tabulated central charges {table_ok}", CENTRAL_CHARGES.len()),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("1 Cardy agreement", cardy_agreement),
        ("2 formula duality", formula_duality),
        ("3 PDE residual suite", pde_suite),
        ("4 counterexample discrimination", counterexample),
        ("5 Catalan combinatorics", catalan),
        ("6 limit functional suite", limit_suite),
        ("7 two-leg system", two_leg_only_trivially),
        ("8 parameter identities", parameter_identities),
    ];
    // positional arguments select criteria by number; flags from cargo are ignored
    let wanted: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !wanted.is_empty() && !wanted.iter().any(|w| name.split(' ').next() == Some(w.as_str())) {
            continue;
        }
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
