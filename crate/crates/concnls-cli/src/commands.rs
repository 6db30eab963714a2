use concnls::asymptotics::{self, SuiteOptions};
use concnls::bosonic;
use concnls::error::{Error, Result};
use concnls::fermionic;
use concnls::grid::RadialProfile;
use concnls::shoot::{self, GroundState};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{BosonicCmd, EquationArg, FermiCmd, ShootArgs, VerifyArgs};
use crate::config::RunConfig;

/// A CSV table: header and rows of already formatted cells.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn profile(col: &'static str, p: &RadialProfile) -> Self {
        let mut t = Table::new(&["r", col]);
        for (r, u) in p.grid.nodes.iter().zip(&p.values) {
            t.push(vec![num(*r), num(*u)]);
        }
        t
    }
}

pub fn num(x: f64) -> String {
    format!("{x:.12e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub struct Outcome {
    pub result: Value,
    pub table: Option<Table>,
    /// False when a verification ran but did not pass.
    pub pass: bool,
    /// Human-readable text for stderr.
    pub text: Option<String>,
}

impl Outcome {
    fn ok(result: Value, table: Table) -> Self {
        Outcome { result, table: Some(table), pass: true, text: None }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("results serialize")
}

/// Drops sampled profiles from a serialized result; they go to the table.
fn strip(mut v: Value, keys: &[&str]) -> Value {
    if let Value::Object(m) = &mut v {
        for k in keys {
            m.remove(*k);
        }
    }
    v
}

fn ground_state_json(gs: &GroundState) -> Value {
    let mut v = strip(to_value(gs), &["profile", "slope", "tail"]);
    v["center"] = json!(gs.center());
    v["grid"] = to_value(&gs.profile.grid.info());
    v
}

pub fn shoot(cfg: &RunConfig, a: &ShootArgs) -> Result<Outcome> {
    let p = cfg.params;
    if let Some(mus) = &a.mu_list {
        let rows = shoot::lambda_of_mu_curve(&p, mus, &cfg.shoot, cfg.exec);
        let mut t = Table::new(&["mu", "lambda", "energy", "error"]);
        for r in &rows {
            t.push(vec![num(r.mu), opt(r.lambda_mass), opt(r.energy), r.error.clone().unwrap_or_default()]);
        }
        return Ok(Outcome::ok(json!({ "rows": rows }), t));
    }
    let gs = match a.equation {
        EquationArg::Model => {
            let mu = a.mu.ok_or_else(|| Error::InvalidParams("--mu is required for the model equation".into()))?;
            shoot::solve_ground_state(&p, mu, &cfg.shoot)?
        }
        EquationArg::V0 => shoot::solve_v0(&p, &cfg.shoot)?,
        EquationArg::Q => shoot::solve_q_profile(&p, &cfg.shoot)?,
        EquationArg::ZeroMass => shoot::solve_zero_mass(&p, a.height, &cfg.shoot)?,
    };
    let mut v = ground_state_json(&gs);
    if matches!(a.equation, EquationArg::V0) {
        v["mu_c"] = json!(shoot::mu_c(&p, &gs));
    }
    if p.d >= 3 {
        if let Ok(dual) = shoot::dual_max_functional(&gs) {
            v["dual"] = to_value(&dual);
        }
    }
    Ok(Outcome::ok(v, Table::profile("u", &gs.profile)))
}

pub fn bosonic(cfg: &RunConfig, c: &BosonicCmd) -> Result<Outcome> {
    let p = cfg.params;
    match c {
        BosonicCmd::Minimize { lambda } => {
            let res = bosonic::minimize(&p, *lambda, &cfg.bosonic)?;
            let mut v = strip(to_value(&res), &["profile"]);
            v["mass"] = json!(res.profile.l2_sq());
            Ok(Outcome::ok(v, Table::profile("u", &res.profile)))
        }
        BosonicCmd::LambdaC { bracket, tol } => {
            let b = pair(bracket, "--bracket")?;
            let scan = bosonic::find_lambda_c(&p, b, *tol, &cfg.bosonic)?;
            let mut t = Table::new(&["lambda", "energy", "mu", "iterations", "diagnostic"]);
            for r in &scan.records {
                let diag = to_value(&r.diagnostic).as_str().unwrap_or_default().to_string();
                t.push(vec![num(r.lambda), num(r.energy), num(r.mu), r.iterations.to_string(), diag]);
            }
            let mut v = to_value(&scan);
            v["alpha_c_single"] = json!(concnls::model::alpha_critical(&p.with_alpha(1.0)?, scan.estimate, 1.0));
            Ok(Outcome::ok(v, t))
        }
    }
}

fn pair(v: &[f64], flag: &str) -> Result<[f64; 2]> {
    match v {
        [a, b] => Ok([*a, *b]),
        _ => Err(Error::InvalidParams(format!("{flag} takes two comma-separated values"))),
    }
}

pub fn fermi(cfg: &RunConfig, c: &FermiCmd) -> Result<Outcome> {
    let p = cfg.params;
    let o = &cfg.fermi;
    match c {
        FermiCmd::Scf { n } => {
            let s = fermionic::scf(&p, *n, &o.scf)?;
            let v = strip(to_value(&s), &["orbitals", "density"]);
            Ok(Outcome::ok(v, Table::profile("rho", &s.density)))
        }
        FermiCmd::Binding { n } => {
            let rep = fermionic::binding_report(&p, *n, o)?;
            let mut t = Table::new(&["n", "energy", "source", "scf_energy", "two_center_energy"]);
            for e in &rep.estimates {
                t.push(vec![e.n.to_string(), num(e.energy), e.source.clone(), opt(e.scf_energy), opt(e.two_center_energy)]);
            }
            Ok(Outcome::ok(to_value(&rep), t))
        }
        FermiCmd::AlphaC { n, bracket, tol } => {
            let b = pair(bracket, "--bracket")?;
            let scan = fermionic::find_alpha_c(&p, *n, b, *tol, o)?;
            let mut t = Table::new(&["alpha", "energy", "source"]);
            for r in &scan.records {
                t.push(vec![num(r.alpha), num(r.energy), r.source.clone()]);
            }
            Ok(Outcome::ok(to_value(&scan), t))
        }
        FermiCmd::TwoCenter { r_list, scaled, critical } => {
            let orb = if *critical { fermionic::critical_orbital(&p, &o.shoot)? } else { fermionic::mass_one_orbital(&p, &o.shoot)? };
            let k = orb.mu.sqrt();
            let rs: Vec<f64> = r_list.iter().map(|&x| if *scaled { x / k } else { x }).collect();
            let scan = fermionic::two_center_scan(&orb, &rs, &o.two_center)?;
            let mut t = Table::new(&["R", "kappa_R", "overlap", "energy", "kinetic_excess", "nonlinear_excess", "attraction", "margin"]);
            for s in &scan.states {
                t.push(vec![
                    num(s.separation),
                    num(s.scaled_separation),
                    num(s.overlap),
                    num(s.energy),
                    num(s.kinetic_excess),
                    num(s.nonlinear_excess),
                    num(s.attraction),
                    num(s.margin),
                ]);
            }
            let v = json!({ "orbital": to_value(&orb), "scan": to_value(&scan) });
            Ok(Outcome::ok(v, t))
        }
    }
}

pub fn verify(cfg: &RunConfig, a: &VerifyArgs) -> Result<Outcome> {
    let so = SuiteOptions { shoot: cfg.shoot, bosonic: cfg.bosonic.clone(), exec: cfg.exec };
    let rep = asymptotics::run_suite(&a.suite, &cfg.params, &so)?;
    let mut t = Table::new(&["name", "expected", "measured", "tolerance", "pass", "anchor"]);
    for r in &rep.records {
        t.push(vec![r.name.clone(), num(r.expected), num(r.measured), num(r.tolerance), r.pass.to_string(), r.anchor.clone()]);
    }
    Ok(Outcome { result: to_value(&rep), table: Some(t), pass: rep.pass, text: Some(rep.table()) })
}
