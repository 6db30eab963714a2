use std::path::{Path, PathBuf};

use concnls::bosonic::MinimizeOptions;
use concnls::exec::Execution;
use concnls::fermionic::EstimateOptions;
use concnls::shoot::ShootOptions;
use concnls::ModelParams;
use serde::Deserialize;

use crate::args::{Common, ExecArg};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub d: Option<usize>,
    pub q: Option<f64>,
    pub r: Option<f64>,
    pub alpha: Option<f64>,
}

/// Contents of `--config`. Every section is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub params: ParamsConfig,
    pub shoot: Option<ShootOptions>,
    pub bosonic: Option<MinimizeOptions>,
    pub fermi: Option<EstimateOptions>,
    pub exec: Option<Execution>,
    pub out: Option<PathBuf>,
    pub table: Option<PathBuf>,
}

/// Resolved configuration: flags, then the file, then defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ModelParams,
    pub shoot: ShootOptions,
    pub bosonic: MinimizeOptions,
    pub fermi: EstimateOptions,
    pub exec: Execution,
    pub out: Option<PathBuf>,
    pub table: Option<PathBuf>,
}

pub const DEFAULT_D: usize = 3;
pub const DEFAULT_Q: f64 = 2.0;
pub const DEFAULT_R: f64 = 4.0 / 3.0;

fn read_file(path: &Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
}

impl RunConfig {
    /// Errors here are usage errors.
    pub fn resolve(c: &Common) -> Result<Self, String> {
        let file = match &c.config {
            Some(p) => read_file(p)?,
            None => FileConfig::default(),
        };
        let fp = &file.params;
        let d = c.d.or(fp.d).unwrap_or(DEFAULT_D);
        let q = c.q.or(fp.q).unwrap_or(DEFAULT_Q);
        let r = c.r.or(fp.r).unwrap_or(DEFAULT_R);
        let alpha = c.alpha.or(fp.alpha).unwrap_or(1.0);
        let params = ModelParams::new(d, q, r, alpha).map_err(|e| e.to_string())?;

        let exec = match c.exec {
            Some(ExecArg::Sequential) => Execution::Sequential,
            Some(ExecArg::Parallel) => Execution::Parallel,
            None => file.exec.unwrap_or_default(),
        };
        let mut shoot = file.shoot.unwrap_or_default();
        let mut bosonic = file.bosonic.unwrap_or_default();
        let mut fermi = file.fermi.unwrap_or_default();
        if let Some(n) = c.grid_n {
            shoot.n = n;
            bosonic.n = n;
            fermi.scf.n = n;
        }
        if let Some(r_max) = c.r_max {
            if !(r_max > 0.0) {
                return Err(format!("--r-max must be positive, got {r_max}"));
            }
            shoot.r_max = Some(r_max);
            bosonic.r_max = r_max;
            fermi.scf.r_max = r_max;
        }
        if let Some(l) = c.l_max {
            fermi.scf.l_max = l;
        }
        bosonic.exec = exec;
        fermi.scf.exec = exec;
        fermi.two_center.exec = exec;
        Ok(RunConfig { params, shoot, bosonic, fermi, exec, out: c.out.clone().or(file.out), table: c.table.clone().or(file.table) })
    }
}

/// `CONCNLS_THREADS`, if set, caps the worker pool.
pub fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var("CONCNLS_THREADS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("CONCNLS_THREADS must be a positive integer, got {s:?}")),
        },
        Err(_) => Ok(None),
    }
}
