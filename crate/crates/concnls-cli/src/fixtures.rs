//! Regression fixtures: flat JSON files named by operation and a hash of the
//! inputs that produced them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use concnls::error::{Error, Result};
use concnls::{bosonic, shoot};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::args::FixtureArgs;
use crate::commands::{num, Outcome, Table};
use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixture {
    pub schema: String,
    pub operation: String,
    pub key: String,
    /// Inputs, including the resolution the values were computed at.
    pub inputs: Value,
    pub values: BTreeMap<String, f64>,
}

struct Job {
    operation: &'static str,
    inputs: Value,
    values: BTreeMap<String, f64>,
}

fn key(operation: &str, inputs: &Value) -> String {
    let mut h = Sha256::new();
    h.update(operation.as_bytes());
    h.update(b"\0");
    h.update(inputs.to_string().as_bytes());
    let digest = h.finalize();
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn path_of(store: &Path, operation: &str, key: &str) -> PathBuf {
    store.join(format!("{operation}-{key}.json"))
}

fn compute(cfg: &RunConfig, slow: bool) -> Result<Vec<Job>> {
    let p = cfg.params.with_alpha(1.0)?;
    let so = cfg.shoot;
    let base = json!({ "params": p, "shoot": so });
    let mut jobs = Vec::new();
    let gs_values = |g: &shoot::GroundState| {
        BTreeMap::from([("center".to_string(), g.center()), ("mass".to_string(), g.lambda_mass), ("energy".to_string(), g.energy)])
    };
    if p.q < p.q_sobolev() {
        let v0 = shoot::solve_v0(&p, &so)?;
        let mut values = gs_values(&v0);
        values.insert("mu_c".into(), shoot::mu_c(&p, &v0));
        jobs.push(Job { operation: "shoot.v0", inputs: base.clone(), values });
    }
    let q = shoot::solve_q_profile(&p, &so)?;
    jobs.push(Job { operation: "shoot.q", inputs: base.clone(), values: gs_values(&q) });
    let g = shoot::solve_ground_state(&p, 1.0, &so)?;
    let mut inputs = base.clone();
    inputs["mu"] = json!(1.0);
    jobs.push(Job { operation: "shoot.ground_state", inputs, values: gs_values(&g) });
    if slow {
        let (bracket, tol) = ([1.0, 500.0], 1e-3);
        let scan = bosonic::find_lambda_c(&p, bracket, tol, &cfg.bosonic)?;
        let inputs = json!({ "params": p, "bosonic": cfg.bosonic, "bracket": bracket, "tol": tol });
        jobs.push(Job { operation: "bosonic.lambda_c", inputs, values: BTreeMap::from([("lambda_c".to_string(), scan.estimate)]) });
    }
    Ok(jobs)
}

fn fixture(job: Job) -> Fixture {
    let key = key(job.operation, &job.inputs);
    Fixture { schema: "1".into(), operation: job.operation.into(), key, inputs: job.inputs, values: job.values }
}

pub fn record(cfg: &RunConfig, a: &FixtureArgs) -> Result<Outcome> {
    std::fs::create_dir_all(&a.store)?;
    let mut t = Table { header: vec!["operation", "key", "name", "value"], rows: Vec::new() };
    let mut written = Vec::new();
    for job in compute(cfg, a.slow)? {
        let f = fixture(job);
        let path = path_of(&a.store, &f.operation, &f.key);
        std::fs::write(&path, serde_json::to_string_pretty(&f)? + "\n")?;
        for (k, v) in &f.values {
            t.rows.push(vec![f.operation.clone(), f.key.clone(), k.clone(), num(*v)]);
        }
        written.push(path.display().to_string());
    }
    Ok(Outcome { result: json!({ "written": written }), table: Some(t), pass: true, text: None })
}

pub fn compare(cfg: &RunConfig, a: &FixtureArgs) -> Result<Outcome> {
    if !(a.rtol >= 0.0) {
        return Err(Error::InvalidParams(format!("--rtol must be nonnegative, got {}", a.rtol)));
    }
    let mut t = Table { header: vec!["key", "stored", "computed", "rel_diff", "drifted"], rows: Vec::new() };
    let mut drifted = Vec::new();
    let mut missing = Vec::new();
    for job in compute(cfg, a.slow)? {
        let f = fixture(job);
        let path = path_of(&a.store, &f.operation, &f.key);
        let stored: Fixture = match std::fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text)?,
            Err(_) => {
                missing.push(path.display().to_string());
                continue;
            }
        };
        for (name, &now) in &f.values {
            let id = format!("{}/{}", f.operation, name);
            let Some(&then) = stored.values.get(name) else {
                missing.push(id);
                continue;
            };
            let scale = now.abs().max(then.abs());
            let rel = if scale == 0.0 { 0.0 } else { (now - then).abs() / scale };
            let bad = !(rel <= a.rtol);
            if bad {
                drifted.push(id.clone());
            }
            t.rows.push(vec![id, num(then), num(now), num(rel), bad.to_string()]);
        }
    }
    let pass = drifted.is_empty() && missing.is_empty();
    let text = (!pass).then(|| {
        let mut s = String::new();
        for d in &drifted {
            s.push_str(&format!("drifted: {d}\n"));
        }
        for m in &missing {
            s.push_str(&format!("missing: {m}\n"));
        }
        s
    });
    Ok(Outcome { result: json!({ "rtol": a.rtol, "drifted": drifted, "missing": missing }), table: Some(t), pass, text })
}
