//! Browser demo: Cardy's formula against a Monte Carlo estimate, a rendered
//! bond configuration with its left cluster, and the two-arc profiles G₁, G₂.
//!
//! Every export returns a JSON string. The plain functions in [`demo`] hold
//! the logic so it can be tested off the browser.

use wasm_bindgen::prelude::*;

pub mod demo {
    use serde::Serialize;
    use serde_json::json;
    use slelab::percolation::{cardy_probability, compare, sample_square_bond, LatticeSpec};
    use slelab::solutions::{g_functions, CrossRatio};
    use slelab::Kappa;

    type Out = Result<String, String>;

    fn text<T: Serialize>(v: &T) -> Out {
        serde_json::to_string(v).map_err(|e| e.to_string())
    }

    fn err(e: slelab::Error) -> String {
        e.to_string()
    }

    /// Cardy's formula on `points` ratios spaced evenly in log R.
    pub fn cardy_curve(r_min: f64, r_max: f64, points: usize) -> Out {
        if !(r_min > 0.0 && r_max > r_min && points >= 2) {
            return Err("need 0 < r_min < r_max and at least two points".into());
        }
        let rows = (0..points)
            .map(|i| {
                let t = i as f64 / (points - 1) as f64;
                let r = r_min * (r_max / r_min).powf(t);
                cardy_probability(r).map(|p| [r, p])
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        text(&rows)
    }

    /// A square-bond batch at the critical point against Cardy's formula.
    pub fn cardy_vs_simulation(width: usize, height: usize, trials: u64, seed: u64) -> Out {
        if trials > 1_000_000 {
            return Err("at most 10^6 trials in the browser".into());
        }
        let spec = LatticeSpec::square(width, height).map_err(err)?;
        let c = compare(&spec, trials, seed).map_err(err)?;
        text(&json!({
            "R": spec.aspect_ratio(),
            "cardy": c.cardy,
            "p_hat": c.batch.p_hat,
            "stderr": c.batch.stderr,
            "z": c.z_score,
            "tolerance": c.tolerance,
            "pass": c.pass,
        }))
    }

    /// One bond configuration, as drawn by trial `trial` of a batch with `seed`.
    pub fn bond_sample(width: usize, height: usize, seed: u64, trial: u64) -> Out {
        if width * height > 250_000 {
            return Err("lattice too large to draw".into());
        }
        let spec = LatticeSpec::square(width, height).map_err(err)?;
        text(&sample_square_bond(&spec, seed, trial).map_err(err)?)
    }

    /// G₁ and G₂ on `points` interior cross-ratios λ ∈ (0, 1).
    pub fn g_profiles(kappa: f64, points: usize) -> Out {
        if !(2..=10_000).contains(&points) {
            return Err("between 2 and 10000 points".into());
        }
        let k = Kappa::new(kappa).map_err(err)?;
        let (mut lam, mut g1, mut g2) = (Vec::new(), Vec::new(), Vec::new());
        for i in 1..=points {
            let l = i as f64 / (points + 1) as f64;
            let (a, b) = g_functions(k, CrossRatio::new(l).map_err(err)?).map_err(err)?;
            lam.push(l);
            g1.push(a);
            g2.push(b);
        }
        text(&json!({ "kappa": kappa, "lambda": lam, "g1": g1, "g2": g2 }))
    }
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn cardy_curve(r_min: f64, r_max: f64, points: usize) -> Result<String, JsError> {
    js(demo::cardy_curve(r_min, r_max, points))
}

#[wasm_bindgen]
pub fn cardy_vs_simulation(width: usize, height: usize, trials: u32, seed: u32) -> Result<String, JsError> {
    js(demo::cardy_vs_simulation(width, height, trials.into(), seed.into()))
}

#[wasm_bindgen]
pub fn bond_sample(width: usize, height: usize, seed: u32, trial: u32) -> Result<String, JsError> {
    js(demo::bond_sample(width, height, seed.into(), trial.into()))
}

#[wasm_bindgen]
pub fn g_profiles(kappa: f64, points: usize) -> Result<String, JsError> {
    js(demo::g_profiles(kappa, points))
}
