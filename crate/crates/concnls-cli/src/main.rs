#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod config;
mod fixtures;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};

use args::{Cli, Command, FixturesCmd};
use commands::{Outcome, Table};
use config::RunConfig;

const SCHEMA: &str = "1";

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Shoot(_) => "shoot",
        Command::Bosonic(args::BosonicCmd::Minimize { .. }) => "bosonic minimize",
        Command::Bosonic(args::BosonicCmd::LambdaC { .. }) => "bosonic lambda-c",
        Command::Fermi(args::FermiCmd::Scf { .. }) => "fermi scf",
        Command::Fermi(args::FermiCmd::Binding { .. }) => "fermi binding",
        Command::Fermi(args::FermiCmd::AlphaC { .. }) => "fermi alpha-c",
        Command::Fermi(args::FermiCmd::TwoCenter { .. }) => "fermi two-center",
        Command::Verify(_) => "verify",
        Command::Fixtures(FixturesCmd::Record(_)) => "fixtures record",
        Command::Fixtures(FixturesCmd::Compare(_)) => "fixtures compare",
    }
}

/// Argument combinations clap cannot express.
fn validate(c: &Command) -> Result<(), String> {
    let two = |v: &Vec<f64>| if v.len() == 2 { Ok(()) } else { Err("--bracket takes two comma-separated values".to_string()) };
    match c {
        Command::Shoot(a) => {
            if matches!(a.equation, args::EquationArg::Model) && a.mu.is_none() && a.mu_list.is_none() {
                return Err("the model equation needs --mu or --mu-list".into());
            }
            Ok(())
        }
        Command::Bosonic(args::BosonicCmd::LambdaC { bracket, .. }) => two(bracket),
        Command::Fermi(args::FermiCmd::AlphaC { bracket, .. }) => two(bracket),
        Command::Verify(a) if !concnls::asymptotics::SUITES.contains(&a.suite.as_str()) => {
            Err(format!("unknown suite {:?}; expected one of {:?}", a.suite, concnls::asymptotics::SUITES))
        }
        _ => Ok(()),
    }
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}\n\nFor more information, try '--help'.");
    ExitCode::from(2)
}

fn write_json(v: &Value, cfg_out: Option<&std::path::Path>) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(v).expect("json") + "\n";
    match cfg_out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

fn write_table(t: &Table, path: &std::path::Path) -> concnls::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&t.header)?;
    for row in &t.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn run(cfg: &RunConfig, command: &Command) -> concnls::Result<Outcome> {
    match command {
        Command::Shoot(a) => commands::shoot(cfg, a),
        Command::Bosonic(c) => commands::bosonic(cfg, c),
        Command::Fermi(c) => commands::fermi(cfg, c),
        Command::Verify(a) => commands::verify(cfg, a),
        Command::Fixtures(FixturesCmd::Record(a)) => fixtures::record(cfg, a),
        Command::Fixtures(FixturesCmd::Compare(a)) => fixtures::compare(cfg, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = validate(&cli.command) {
        return usage_error(&msg);
    }
    match config::threads_from_env() {
        Ok(Some(n)) => {
            concnls::exec::init_threads(n);
        }
        Ok(None) => {}
        Err(msg) => return usage_error(&msg),
    }
    let cfg = match RunConfig::resolve(&cli.common) {
        Ok(c) => c,
        Err(msg) => return usage_error(&msg),
    };
    let name = command_name(&cli.command);
    let out = cfg.out.as_deref();
    match run(&cfg, &cli.command) {
        Ok(o) => {
            let doc = json!({ "schema": SCHEMA, "command": name, "params": cfg.params, "pass": o.pass, "result": o.result });
            if let Some(text) = &o.text {
                eprint!("{text}");
            }
            if let (Some(t), Some(path)) = (&o.table, &cfg.table) {
                if let Err(e) = write_table(t, path) {
                    return failure(name, &e, out);
                }
            }
            if let Err(e) = write_json(&doc, out) {
                return failure(name, &e.into(), out);
            }
            if o.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => failure(name, &e, out),
    }
}

fn failure(name: &str, e: &concnls::Error, out: Option<&std::path::Path>) -> ExitCode {
    let doc = json!({ "schema": SCHEMA, "command": name, "error": { "kind": e.kind(), "message": e.to_string() } });
    eprintln!("error: {e}");
    if write_json(&doc, out).is_err() {
        let _ = write_json(&doc, None);
    }
    ExitCode::from(1)
}
