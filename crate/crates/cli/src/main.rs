mod args;
mod format;

use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::Parser;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use args::{Cli, Command, Format, SolutionArgs};
use format::Table;
use slelab::diagrams::{allowable_sequences, enumerate_diagrams};
use slelab::limits::{collapse_interval_at, collapse_outer, dual_vector_with_error};
use slelab::params::ParamsRecord;
use slelab::pde_check::{full_report_at, DEFAULT_SWEEP};
use slelab::percolation::{
    compare, cardy_probability, modulus_from_ratio, run_batch, sweep, LatticeSpec,
};
use slelab::{ConfigPoint, Evaluate, Kappa, SolutionHandle};

/// What a subcommand produced: the JSON result, the same data as a table,
/// the verdict of any check it ran, and the defaults it filled in.
struct Report {
    result: Value,
    table: Table,
    pass: Option<bool>,
    resolved: Value,
}

impl Report {
    fn new(result: Value, table: Table) -> Self {
        Self { result, table, pass: None, resolved: Value::Null }
    }

    fn with_pass(mut self, pass: bool) -> Self {
        self.pass = Some(pass);
        self
    }

    fn with_resolved(mut self, resolved: Value) -> Self {
        self.resolved = resolved;
        self
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(pass) => {
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            eprintln!("run `slelab --help` for usage");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let seed = cli.seed.unwrap_or(0);
    let report = dispatch(&cli.command, seed)?;

    let mut config = serde_json::to_value(cli)?;
    config["seed"] = json!(seed);
    config["threads"] = json!(rayon::current_num_threads());
    if !report.resolved.is_null() {
        config["resolved"] = report.resolved.clone();
    }

    let mut stdout = std::io::stdout().lock();
    match cli.output {
        Format::Json => {
            let mut out = json!({ "config": config, "result": report.result });
            if let Some(pass) = report.pass {
                out["pass"] = json!(pass);
            }
            use std::io::Write;
            stdout.write_all(format::json(&out).as_bytes())?;
        }
        Format::Csv => {
            let mut flat = serde_json::Map::new();
            flatten("", &config, &mut flat);
            if let Some(pass) = report.pass {
                flat.insert("pass".into(), json!(pass));
            }
            report.table.write(&Value::Object(flat), &mut stdout)?;
        }
    }
    Ok(report.pass.unwrap_or(true))
}

/// Dotted keys for the CSV config header.
fn flatten(prefix: &str, v: &Value, out: &mut serde_json::Map<String, Value>) {
    match v {
        Value::Object(map) => {
            for (k, item) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, item, out);
            }
        }
        other => {
            out.insert(prefix.to_string(), other.clone());
        }
    }
}

fn kappa(v: f64) -> anyhow::Result<Kappa> {
    Ok(Kappa::new(v)?)
}

fn handle(s: &SolutionArgs, n_pairs: usize) -> anyhow::Result<SolutionHandle> {
    Ok(SolutionHandle::named(s.solution.as_str(), kappa(s.kappa)?, n_pairs, &s.coeffs)?)
}

/// The given point, or 0, 1, …, 2N − 1.
fn point_or_default(coords: &[f64], n_pairs: usize) -> anyhow::Result<ConfigPoint> {
    let coords = if coords.is_empty() {
        (0..2 * n_pairs).map(|i| i as f64).collect()
    } else {
        coords.to_vec()
    };
    Ok(ConfigPoint::new(coords)?)
}

/// `count` points of 2N coordinates: the first in [0, 1], gaps in [0.5, 2].
fn sample_points(n_pairs: usize, count: usize, seed: u64) -> anyhow::Result<Vec<ConfigPoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut x = vec![rng.random_range(0.0..1.0)];
            for _ in 1..2 * n_pairs {
                let next = x.last().unwrap() + rng.random_range(0.5..2.0);
                x.push(next);
            }
            Ok(ConfigPoint::new(x)?)
        })
        .collect()
}

fn dispatch(command: &Command, seed: u64) -> anyhow::Result<Report> {
    match command {
        Command::Params(a) => {
            let rec = ParamsRecord::new(kappa(a.kappa)?);
            let mut table = Table::new(&["quantity", "value"]);
            table.push(vec![json!("c"), json!(rec.central_charge)]);
            table.push(vec![json!("theta_1"), json!(rec.theta_1)]);
            for (s, t) in rec.theta_s.iter().enumerate() {
                table.push(vec![json!(format!("theta_{s}")), json!(t)]);
            }
            for e in &rec.kac {
                table.push(vec![json!(format!("h_{}_{}", e.r, e.s)), json!(e.h)]);
            }
            table.push(vec![json!("potts_q_dense"), json!(rec.potts_q_dense)]);
            table.push(vec![json!("potts_q_dilute"), json!(rec.potts_q_dilute)]);
            Ok(Report::new(serde_json::to_value(&rec)?, table))
        }
        Command::Diagrams(a) => {
            let diagrams = enumerate_diagrams(a.n)?;
            let mut table = Table::new(&["index", "diagram", "allowable_sequences"]);
            let mut list = Vec::new();
            for (i, d) in diagrams.iter().enumerate() {
                let count = allowable_sequences(d).len();
                table.push(vec![json!(i + 1), json!(d.to_string()), json!(count)]);
                list.push(json!({ "index": i + 1, "pairs": d, "allowable_sequences": count }));
            }
            let result = json!({ "n": a.n, "count": diagrams.len(), "diagrams": list });
            Ok(Report::new(result, table))
        }
        Command::Eval(a) => {
            if a.point.len() % 2 != 0 {
                bail!("a point needs an even number of coordinates, got {}", a.point.len());
            }
            let f = handle(&a.solution, a.point.len() / 2)?;
            let value = f.evaluate(ConfigPoint::new(a.point.clone())?.coords())?;
            let mut table = Table::new(&["value"]);
            table.push(vec![json!(value)]);
            Ok(Report::new(json!({ "label": f.label(), "value": value }), table))
        }
        Command::CheckPde(a) => {
            let n = a.n.unwrap_or(a.solution.solution.natural_pairs());
            let f = handle(&a.solution, n)?;
            let pts: Vec<ConfigPoint> = match &a.points {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    serde_json::from_str(&text)
                        .with_context(|| format!("parsing points in {}", path.display()))?
                }
                None => sample_points(n, a.samples, seed)?,
            };
            let rep = full_report_at(&f, &pts, a.step, &DEFAULT_SWEEP)?;
            let worst = rep.null_state.iter().chain(&rep.ward).fold(0.0f64, |m, &r| m.max(r));
            let pass = worst <= a.tolerance;
            let mut table = Table::new(&["identity", "residual", "order"]);
            let names = (1..=f.arity())
                .map(|j| format!("null_state_{j}"))
                .chain(["translation", "dilation", "inversion"].map(String::from));
            let residuals = rep.null_state.iter().chain(&rep.ward);
            for ((name, r), order) in names.zip(residuals).zip(&rep.convergence_order) {
                table.push(vec![json!(name), json!(r), json!(order)]);
            }
            let result = json!({
                "label": f.label(),
                "report": rep,
                "max_residual": worst,
                "min_order": rep.min_order(),
                "tolerance": a.tolerance,
            });
            let source = if a.points.is_some() { "file" } else { "sampled" };
            let resolved = json!({ "n": n, "points": source, "n_points": pts.len() });
            Ok(Report::new(result, table).with_pass(pass).with_resolved(resolved))
        }
        Command::Collapse(a) => {
            let n = a.n.unwrap_or(a.solution.solution.natural_pairs());
            let f = handle(&a.solution, n)?;
            let pt = point_or_default(&a.point, n)?;
            if pt.len() != 2 * n {
                bail!("the point needs {} coordinates, got {}", 2 * n, pt.len());
            }
            let x = pt.coords();
            let res = if a.outer {
                collapse_outer(&f, &ConfigPoint::new(x[1..x.len() - 1].to_vec())?)?
            } else {
                let i = a.interval.expect("clap requires --interval without --outer");
                if i == 0 || i >= x.len() {
                    bail!("--interval must be in 1..={}, got {i}", x.len() - 1);
                }
                let mut base = x.to_vec();
                base.drain(i - 1..=i);
                collapse_interval_at(&f, i - 1, &ConfigPoint::new(base)?, x[i - 1])?
            };
            let mut table = Table::new(&["value", "stderr", "exponent", "exponent_stderr"]);
            table.push(vec![
                json!(res.value),
                json!(res.stderr),
                json!(res.exponent_fit),
                json!(res.exponent_stderr),
            ]);
            let resolved = json!({ "n": n, "point": pt });
            Ok(Report::new(serde_json::to_value(&res)?, table).with_resolved(resolved))
        }
        Command::DualVector(a) => {
            let n = a.n.unwrap_or(a.solution.solution.natural_pairs());
            let f = handle(&a.solution, n)?;
            let anchor = point_or_default(&a.anchor, n)?;
            let entries = dual_vector_with_error(&f, &anchor)?;
            let diagrams = enumerate_diagrams(n)?;
            let mut table = Table::new(&["index", "diagram", "value", "stderr"]);
            let mut list = Vec::new();
            for (i, (d, (v, e))) in diagrams.iter().zip(&entries).enumerate() {
                table.push(vec![json!(i + 1), json!(d.to_string()), json!(v), json!(e)]);
                list.push(json!({ "index": i + 1, "pairs": d, "value": v, "stderr": e }));
            }
            let result = json!({ "label": f.label(), "anchor": anchor, "entries": list });
            let resolved = json!({ "n": n, "anchor": anchor });
            Ok(Report::new(result, table).with_resolved(resolved))
        }
        Command::Cardy(a) => {
            let mut table = Table::new(&["R", "m", "probability"]);
            let mut list = Vec::new();
            for &r in &a.ratio {
                let (m, p) = (modulus_from_ratio(r)?, cardy_probability(r)?);
                table.push(vec![json!(r), json!(m), json!(p)]);
                list.push(json!({ "R": r, "m": m, "probability": p }));
            }
            Ok(Report::new(Value::Array(list), table))
        }
        Command::Percolate(a) => {
            let columns = ["R", "p_hat", "stderr", "cardy", "z"];
            let mut table = Table::new(&columns);
            if !a.ratios.is_empty() {
                let rows = sweep(a.kind.into(), a.height, &a.ratios, a.trials, seed)?;
                for r in &rows {
                    table.push(vec![
                        json!(r.ratio),
                        json!(r.p_hat),
                        json!(r.stderr),
                        json!(r.cardy),
                        json!(r.z),
                    ]);
                }
                return Ok(Report::new(serde_json::to_value(&rows)?, table));
            }
            let width = a.width.expect("clap requires --width without --ratios");
            let spec = LatticeSpec::new(a.kind.into(), width, a.height, a.p_open)?;
            if a.compare {
                let cmp = compare(&spec, a.trials, seed)?;
                let b = &cmp.batch;
                table.push(vec![
                    json!(spec.aspect_ratio()),
                    json!(b.p_hat),
                    json!(b.stderr),
                    json!(cmp.cardy),
                    json!(cmp.z_score),
                ]);
                let pass = cmp.pass;
                Ok(Report::new(serde_json::to_value(&cmp)?, table).with_pass(pass))
            } else {
                let b = run_batch(&spec, a.trials, seed)?;
                table.push(vec![
                    json!(spec.aspect_ratio()),
                    json!(b.p_hat),
                    json!(b.stderr),
                    Value::Null,
                    Value::Null,
                ]);
                Ok(Report::new(serde_json::to_value(&b)?, table))
            }
        }
    }
}
