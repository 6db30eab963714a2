//! Fermionic problem in `d = 3`: a radial self-consistent field over
//! angular-momentum channels, the two-center Gram state, binding reports and
//! scans of the critical threshold for `N` particles.
//!
//! The SCF works at threshold 1 with coupling `β = α^{q−5/3}` (the Pauli
//! constraint is preserved by that change of variables) and reports in the
//! units of `α`: energies carry `α^{2/3}`, lengths `α^{−1/3}`.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::grid::{fit_exp_power, CylGrid, RadialGrid, RadialProfile, TailFit};
use crate::linalg;
use crate::model::{self, ModelParams};
use crate::shoot::{self, GroundState, ShootOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScfOptions {
    pub n: usize,
    /// Outer radius at threshold 1.
    pub r_max: f64,
    pub l_max: usize,
    /// Density mixing weight; halved whenever the energy would rise.
    pub theta: f64,
    /// Stop when `‖ρ_new − ρ‖₁` falls below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Peak densities (threshold 1) of the Gaussian starting densities.
    pub start_peaks: Vec<f64>,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for ScfOptions {
    fn default() -> Self {
        ScfOptions {
            n: 3000,
            r_max: 30.0,
            l_max: 4,
            theta: 0.3,
            tol: 1e-8,
            max_iter: 5000,
            start_peaks: vec![1.0, 4.0, 16.0, 64.0],
            exec: Execution::default(),
        }
    }
}

/// One radial level, counted once for its whole `m`-shell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub l: usize,
    /// Radial quantum number, from 0.
    pub k: usize,
    /// Eigenvalue `−μ`.
    pub eigenvalue: f64,
    pub occupation: f64,
    pub capacity: f64,
    /// Kinetic energy `⟨φ, (−Δ + ℓ(ℓ+1)/r²) φ⟩`.
    pub kinetic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScfRecord {
    pub energy: f64,
    pub residual: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScfState {
    pub params: ModelParams,
    pub n_particles: usize,
    /// Computed levels in ascending order, occupied ones first.
    pub levels: Vec<Level>,
    /// Radial orbitals `φ_{ℓ,k}` of the occupied levels, normalized so that
    /// `∫φ² = 1` in three dimensions; same order as the occupied `levels`.
    pub orbitals: Vec<RadialProfile>,
    pub density: RadialProfile,
    pub energy: f64,
    pub kinetic: f64,
    pub nonlinear: f64,
    pub iterations: usize,
    pub history: Vec<ScfRecord>,
    /// `μ_1 ≥ μ_2 ≥ …`, one entry per state (shells expanded), at least `N + 1` long.
    pub mu: Vec<f64>,
    /// `μ_N − μ_{N+1}`.
    pub gap: f64,
    /// Every shell is either full or empty.
    pub integral_occupations: bool,
    /// Levels within `1e-10` of the Fermi level in another channel.
    pub fermi_ties: bool,
}

struct Channel {
    l: usize,
    /// `(eigenvalue, kinetic, φ on nodes 0..n)`.
    pairs: Vec<(f64, f64, Vec<f64>)>,
}

/// Levels of `−Δ + ℓ(ℓ+1)/r² + V` with Dirichlet data at `r_max` (and at the
/// origin for `ℓ ≥ 1`), on the finite-volume discretization of the grid.
fn solve_channel(g: &RadialGrid, pot: &[f64], l: usize, count: usize) -> Channel {
    let m = g.n;
    let start = usize::from(l > 0);
    let cent = (l * (l + 1)) as f64;
    let idx: Vec<usize> = (start..m).collect();
    let diag: Vec<f64> = idx
        .iter()
        .map(|&i| {
            let w = g.weights[i];
            let k = g.kmid[i] + if i > 0 { g.kmid[i - 1] } else { 0.0 };
            let c = if l > 0 { cent / (g.nodes[i] * g.nodes[i]) } else { 0.0 };
            k / w + pot[i] + c
        })
        .collect();
    let off: Vec<f64> = idx[..idx.len() - 1].iter().map(|&i| -g.kmid[i] / (g.weights[i] * g.weights[i + 1]).sqrt()).collect();
    let pairs = linalg::lowest_eigenpairs(&diag, &off, count)
        .into_iter()
        .map(|(e, psi)| {
            let mut phi = vec![0.0; g.len()];
            for (j, &i) in idx.iter().enumerate() {
                phi[i] = psi[j] / g.weights[i].sqrt();
            }
            let vexp: f64 = idx.iter().map(|&i| g.weights[i] * pot[i] * phi[i] * phi[i]).sum();
            (e, e - vexp, phi)
        })
        .collect();
    Channel { l, pairs }
}

/// Aufbau filling of the channels; returns `(levels, orbitals, ρ, T)`.
fn fill(g: &RadialGrid, channels: &[Channel], n: usize) -> (Vec<Level>, Vec<Vec<f64>>, Vec<f64>, f64) {
    let mut all: Vec<(f64, usize, usize)> = Vec::new();
    for (c, ch) in channels.iter().enumerate() {
        for k in 0..ch.pairs.len() {
            all.push((ch.pairs[k].0, c, k));
        }
    }
    // Ties go to the lower channel.
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(channels[a.1].l.cmp(&channels[b.1].l)));
    let mut left = n as f64;
    let mut levels = Vec::new();
    let mut orbitals = Vec::new();
    let mut rho = vec![0.0; g.len()];
    let mut kinetic = 0.0;
    for &(e, c, k) in &all {
        let ch = &channels[c];
        let cap = (2 * ch.l + 1) as f64;
        let occ = left.min(cap);
        left -= occ;
        let (_, t, phi) = &ch.pairs[k];
        if occ > 0.0 {
            for (r, p) in rho.iter_mut().zip(phi) {
                *r += occ * p * p;
            }
            kinetic += occ * t;
            orbitals.push(phi.clone());
        }
        levels.push(Level { l: ch.l, k, eigenvalue: e, occupation: occ, capacity: cap, kinetic: *t });
    }
    (levels, orbitals, rho, kinetic)
}

struct Scf<'a> {
    p1: ModelParams,
    beta: f64,
    grid: &'a RadialGrid,
    n: usize,
    opts: &'a ScfOptions,
}

struct Fixed {
    levels: Vec<Level>,
    orbitals: Vec<Vec<f64>>,
    rho: Vec<f64>,
    kinetic: f64,
    energy: f64,
    iterations: usize,
    history: Vec<ScfRecord>,
}

impl Scf<'_> {
    fn nonlinear(&self, rho: &[f64]) -> f64 {
        self.beta * self.grid.quad(&rho.iter().map(|&x| model::fa(&self.p1, x)).collect::<Vec<_>>())
    }

    fn step(&self, rho: &[f64]) -> (Vec<Level>, Vec<Vec<f64>>, Vec<f64>, f64) {
        let pot: Vec<f64> = rho.iter().map(|&x| self.beta * model::fa_prime(&self.p1, x)).collect();
        let ls: Vec<usize> = (0..=self.opts.l_max).collect();
        let channels = exec::map(self.opts.exec, &ls, |&l| {
            // Enough levels per channel to place N + 1 states.
            let count = (self.n + 1).div_ceil(2 * l + 1);
            solve_channel(self.grid, &pot, l, count)
        });
        fill(self.grid, &channels, self.n)
    }

    fn run(&self, rho0: Vec<f64>) -> Result<Fixed> {
        let g = self.grid;
        // The starting density only provides the first potential; the
        // iteration starts from the Aufbau state it produces, so that the
        // tracked kinetic energy always belongs to the tracked density.
        let (_, _, mut rho, mut kinetic) = self.step(&rho0);
        let mut energy = kinetic + self.nonlinear(&rho);
        let theta = self.opts.theta;
        let mut history = Vec::new();
        for it in 0..self.opts.max_iter {
            let (levels, orbitals, rho_new, t_new) = self.step(&rho);
            let residual: f64 = (0..g.len()).map(|i| g.weights[i] * (rho_new[i] - rho[i]).abs()).sum();
            if residual <= self.opts.tol {
                let e_new = t_new + self.nonlinear(&rho_new);
                history.push(ScfRecord { energy: e_new, residual, theta: 0.0 });
                return Ok(Fixed { levels, orbitals, rho: rho_new, kinetic: t_new, energy: e_new, iterations: it, history });
            }
            let noise = 1e-13 * (energy.abs() + t_new.abs() + 1.0);
            let mut th = theta;
            loop {
                let rt: Vec<f64> = (0..g.len()).map(|i| (1.0 - th) * rho[i] + th * rho_new[i]).collect();
                let tt = (1.0 - th) * kinetic + th * t_new;
                let et = tt + self.nonlinear(&rt);
                if et <= energy + noise || th < 1e-12 {
                    rho = rt;
                    kinetic = tt;
                    energy = et;
                    break;
                }
                th *= 0.5;
            }
            history.push(ScfRecord { energy, residual, theta: th });
        }
        Err(Error::MaxIter(format!("SCF did not reach tolerance in {} iterations", self.opts.max_iter)))
    }
}

/// Self-consistent field for `N` fermions in `d = 3`, restricted to radial
/// densities with `m`-averaged shells. Its energy is an upper bound for `I_α(N)`.
pub fn scf(p: &ModelParams, n: usize, opts: &ScfOptions) -> Result<ScfState> {
    if p.d != 3 {
        return Err(Error::InvalidParams(format!("the SCF is implemented for d = 3 only, got d = {}", p.d)));
    }
    if n == 0 {
        return Err(Error::InvalidParams("N must be at least 1".into()));
    }
    if opts.start_peaks.is_empty() || !(opts.theta > 0.0 && opts.theta <= 1.0) {
        return Err(Error::InvalidParams("need start peaks and 0 < theta <= 1".into()));
    }
    let p1 = p.with_alpha(1.0)?;
    let beta = model::rescale_alpha_to_beta(p).beta;
    let grid = RadialGrid::new(3, opts.r_max, opts.n)?;
    let solver = Scf { p1, beta, grid: &grid, n, opts };
    let mut best: Option<Fixed> = None;
    let mut last_err = None;
    for &peak in &opts.start_peaks {
        let sigma = (n as f64 / (peak * std::f64::consts::PI.powf(1.5))).cbrt();
        let rho0: Vec<f64> = grid.nodes.iter().map(|r| peak * (-(r * r) / (sigma * sigma)).exp()).collect();
        match solver.run(rho0) {
            Ok(f) => {
                if best.as_ref().is_none_or(|b| f.energy < b.energy) {
                    best = Some(f);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let Some(fx) = best else {
        return Err(last_err.unwrap_or_else(|| Error::MaxIter("SCF failed".into())));
    };
    finish(p, n, &grid, fx)
}

fn finish(p: &ModelParams, n: usize, grid: &RadialGrid, fx: Fixed) -> Result<ScfState> {
    let e_unit = p.alpha.powf(2.0 / 3.0);
    let len = p.alpha.powf(-1.0 / 3.0);
    let occupied: Vec<&Level> = fx.levels.iter().filter(|l| l.occupation > 0.0).collect();
    if let Some(top) = occupied.iter().find(|l| l.eigenvalue >= 0.0) {
        return Err(Error::NoBoundState(format!("occupied level l={} k={} has eigenvalue {:e} >= 0", top.l, top.k, top.eigenvalue)));
    }
    let mut mu = Vec::new();
    for l in &fx.levels {
        for _ in 0..l.capacity as usize {
            mu.push(-l.eigenvalue * e_unit);
        }
        if mu.len() > n {
            break;
        }
    }
    let gap = if mu.len() > n { mu[n - 1] - mu[n] } else { f64::NAN };
    let integral = fx.levels.iter().all(|l| l.occupation == 0.0 || l.occupation == l.capacity);
    let fermi = occupied.last().map_or(0.0, |l| l.eigenvalue);
    let fermi_ties = fx.levels.iter().any(|l| {
        l.occupation < l.capacity
            && (l.eigenvalue - fermi).abs() <= 1e-10 * fermi.abs().max(1.0)
            && !occupied.iter().any(|o| o.l == l.l && o.k == l.k)
    });
    let out_grid = RadialGrid::new(3, grid.r_max * len, grid.n)?;
    // ρ_α(x) = α ρ̃(α^{1/3} x); orbitals keep unit norm: φ_α(x) = α^{1/2} φ̃(α^{1/3} x).
    let density = RadialProfile::new(out_grid.clone(), fx.rho.iter().map(|x| x * p.alpha).collect())?;
    let orbitals = fx
        .orbitals
        .into_iter()
        .map(|v| RadialProfile::new(out_grid.clone(), v.into_iter().map(|x| x * p.alpha.sqrt()).collect()))
        .collect::<Result<Vec<_>>>()?;
    let levels = fx.levels.into_iter().map(|l| Level { eigenvalue: l.eigenvalue * e_unit, kinetic: l.kinetic * e_unit, ..l }).collect();
    let history = fx.history.into_iter().map(|h| ScfRecord { energy: h.energy * e_unit, ..h }).collect();
    Ok(ScfState {
        params: *p,
        n_particles: n,
        levels,
        orbitals,
        density,
        energy: fx.energy * e_unit,
        kinetic: fx.kinetic * e_unit,
        nonlinear: (fx.energy - fx.kinetic) * e_unit,
        iterations: fx.iterations,
        history,
        mu,
        gap,
        integral_occupations: integral,
        fermi_ties,
    })
}

/// A mass-one orbital at threshold `α`, held at threshold 1 as the ground
/// state `v` of mass `λ′`: `u(x) = λ′^{−1/2} s^{d/2} v(sx)`.
#[derive(Debug, Clone, Serialize)]
pub struct MassOneOrbital {
    pub params: ModelParams,
    /// `‖v‖₂² = λ′`.
    pub lambda_unit: f64,
    pub mu_unit: f64,
    /// `𝓕₁(v)`.
    pub energy_unit: f64,
    /// `E_f` with `𝓕_α(u) = E_f 𝓕₁(v)`.
    pub energy_factor: f64,
    /// `s`.
    pub length_factor: f64,
    /// Multiplier of `u`.
    pub mu: f64,
    /// `𝓕_α(u)`.
    pub energy: f64,
    /// `𝓕₁(v) − J₁(λ′)`: zero when `v` is taken as the minimizer, otherwise `𝓕₁(v) > 0`.
    pub excess: f64,
    #[serde(skip)]
    pub state: GroundState,
}

impl MassOneOrbital {
    fn build(p: &ModelParams, state: GroundState, excess: f64) -> Self {
        let map = model::bosonic_scaling_map(p, 1.0);
        let s = map.s_factor;
        MassOneOrbital {
            params: *p,
            lambda_unit: state.lambda_mass,
            mu_unit: state.mu,
            energy_unit: state.energy,
            energy_factor: map.energy_factor,
            length_factor: s,
            mu: s * s * state.mu,
            energy: map.energy_factor * state.energy,
            excess,
            state,
        }
    }

    /// `u(r)`.
    pub fn eval(&self, r: f64) -> f64 {
        let d = self.params.d as f64;
        let s = self.length_factor;
        s.powf(0.5 * d) / self.lambda_unit.sqrt() * self.state.eval(s * r)
    }
}

fn branch_point(p1: &ModelParams, mu: f64, opts: &ShootOptions) -> Result<GroundState> {
    shoot::solve_ground_state(p1, mu, opts)
}

/// Minimum of `Λ(μ)` over `μ ∈ [1e−2, 1e2]` by golden section in `log μ`.
fn lambda_minimum(p1: &ModelParams, opts: &ShootOptions) -> Result<(f64, f64)> {
    let lam = |x: f64| branch_point(p1, x.exp(), opts).map(|g| g.lambda_mass);
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (1e-2f64.ln(), 1e2f64.ln());
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    let (mut fc, mut fd) = (lam(c)?, lam(d)?);
    while b - a > 1e-5 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = lam(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = lam(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x.exp(), lam(x)?))
}

/// Bisection in `μ` on the increasing branch above `mu_min` for `h(u_μ) = 0`,
/// where `h` is positive at `mu_min` and negative for large `μ`.
fn upper_branch_root(p1: &ModelParams, mu_min: f64, opts: &ShootOptions, h: impl Fn(&GroundState) -> f64) -> Result<GroundState> {
    let mut lo = mu_min;
    let mut hi = 2.0 * mu_min;
    let mut top = branch_point(p1, hi, opts)?;
    while h(&top) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e8 {
            return Err(Error::NoBracket("no sign change on the upper branch".into()));
        }
        top = branch_point(p1, hi, opts)?;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-14 * hi {
            break;
        }
        let g = branch_point(p1, mid, opts)?;
        if h(&g) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
            top = g;
        }
    }
    Ok(top)
}

/// The upper branch of `Λ(μ)` for a family at threshold 1.
struct Branch {
    p1: ModelParams,
    mu_min: f64,
    lambda_min: f64,
    opts: ShootOptions,
}

impl Branch {
    fn new(p: &ModelParams, opts: &ShootOptions) -> Result<Self> {
        let p1 = p.with_alpha(1.0)?;
        let (mu_min, lambda_min) = lambda_minimum(&p1, opts)?;
        Ok(Branch { p1, mu_min, lambda_min, opts: *opts })
    }

    fn orbital(&self, p: &ModelParams) -> Result<MassOneOrbital> {
        let target = model::bosonic_scaling_map(p, 1.0).lambda_prime;
        if target < self.lambda_min {
            return Err(Error::NoBoundState(format!(
                "mass {target:e} at threshold 1 is below min Λ = {:e}: no critical point of mass one",
                self.lambda_min
            )));
        }
        let gs = upper_branch_root(&self.p1, self.mu_min, &self.opts, |g| target - g.lambda_mass)?;
        let excess = gs.energy.max(0.0);
        Ok(MassOneOrbital::build(p, gs, excess))
    }
}

/// The mass-one orbital at `p.alpha`: the critical point of mass `λ′` on the
/// upper branch of `Λ(μ)`, which is the minimizer whenever `𝓕₁ ≤ 0`.
/// `NoBoundState` when `λ′` lies below `min Λ` and no such point exists.
pub fn mass_one_orbital(p: &ModelParams, opts: &ShootOptions) -> Result<MassOneOrbital> {
    Branch::new(p, opts)?.orbital(p)
}

/// The orbital at `α = α_c^(1)`: the upper-branch point with `𝓕₁ = 0`. Its
/// mass gives `λ_c` and `α_c^(1) = λ_c^{1/ex}` with `ex = (d/2)(q − (d+2)/d)`;
/// the returned orbital carries that threshold in `params`.
pub fn critical_orbital(p_family: &ModelParams, opts: &ShootOptions) -> Result<MassOneOrbital> {
    let p1 = p_family.with_alpha(1.0)?;
    let (mu_min, _) = lambda_minimum(&p1, opts)?;
    let gs = upper_branch_root(&p1, mu_min, opts, |g| g.energy)?;
    let ex = 0.5 * p1.d as f64 * p1.q_excess();
    let alpha_c = gs.lambda_mass.powf(1.0 / ex);
    Ok(MassOneOrbital::build(&p1.with_alpha(alpha_c)?, gs, 0.0))
}

/// Quadrature for the two-center integrals, in units of the decay length `1/√μ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwoCenterOptions {
    /// Cell size within `core` of a centre.
    pub h_fine: f64,
    pub h_coarse: f64,
    pub core: f64,
    /// Extent of the grid beyond the centres.
    pub reach: f64,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for TwoCenterOptions {
    fn default() -> Self {
        TwoCenterOptions { h_fine: 0.025, h_coarse: 0.06, core: 12.0, reach: 45.0, exec: Execution::default() }
    }
}

/// Two translates `u_R^{(±)} = u(· ∓ R e₁/2)` of a mass-one orbital and the
/// rank-2 projector built from their Löwdin orthonormalization.
/// Energies are in the units of `α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoCenterState {
    pub separation: f64,
    /// `√μ R`.
    pub scaled_separation: f64,
    /// `ε_R = ⟨u^{(−)}, u^{(+)}⟩`.
    pub overlap: f64,
    pub gram: [[f64; 2]; 2],
    /// `S_R = G_R^{−1/2}`.
    pub lowdin: [[f64; 2]; 2],
    /// `max|S G S − 1|`.
    pub orthonormality_residual: f64,
    /// `Tr(−Δγ_R)`.
    pub kinetic: f64,
    /// `∫F_α(ρ_R)`.
    pub nonlinear: f64,
    /// `𝓔_α(γ_R)`.
    pub energy: f64,
    /// `Tr(−Δγ_R) − 2‖∇u‖²`.
    pub kinetic_excess: f64,
    /// `∫F_α(ρ_R) − 2∫F_α(u²)`.
    pub nonlinear_excess: f64,
    /// `∫[F_α(ρ^{(−)} + ρ^{(+)}) − F_α(ρ^{(−)}) − F_α(ρ^{(+)})]`.
    pub attraction: f64,
    /// `I_α(1)` used for the margin.
    pub i1: f64,
    /// `2I_α(1) − 𝓔_α(γ_R)`, evaluated from the excess terms.
    pub margin: f64,
}

/// Closed-form `G^{−1/2}` of `[[1, ε], [ε, 1]]` and the residual `max|SGS − 1|`.
pub fn lowdin(eps: f64) -> Result<([[f64; 2]; 2], f64)> {
    if !(eps.abs() < 1.0) {
        return Err(Error::NotPositiveDefinite(format!("overlap {eps} is not in (-1, 1)")));
    }
    let p = 1.0 / (1.0 + eps).sqrt();
    let m = 1.0 / (1.0 - eps).sqrt();
    // p − m without cancellation for small ε.
    let diff = -2.0 * eps * p * m / ((1.0 - eps).sqrt() + (1.0 + eps).sqrt());
    let (a, b) = (0.5 * (p + m), 0.5 * diff);
    let s = [[a, b], [b, a]];
    let g = [[1.0, eps], [eps, 1.0]];
    let mut res: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let mut v = 0.0;
            for k in 0..2 {
                for l in 0..2 {
                    v += s[i][k] * g[k][l] * s[l][j];
                }
            }
            res = res.max((v - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    Ok((s, res))
}

fn two_center_grid(kappa: f64, rv: f64, o: &TwoCenterOptions) -> Result<CylGrid> {
    let (hf, hc) = (o.h_fine / kappa, o.h_coarse / kappa);
    let core = o.core / kappa;
    let c = 0.5 * rv;
    let far = c + o.reach / kappa;
    let mut z = Vec::new();
    if c - core > 0.0 {
        z.push(CylGrid::edges(0.0, c - core, hc));
    }
    z.push(CylGrid::edges((c - core).max(0.0), c + core, hf));
    z.push(CylGrid::edges(c + core, far, hc));
    // The midplane overlap spreads over s ~ √(R/(qκ)).
    let s_far = (o.reach / kappa).max((40.0 * rv / kappa).sqrt()) + core;
    let s = vec![CylGrid::edges(0.0, core, hf), CylGrid::edges(core, s_far, hc)];
    CylGrid::from_edges(&CylGrid::join(&z), &CylGrid::join(&s))
}

/// Energy of the two-center state at separation `r` (units of `α`). Needs `d = 3`.
pub fn two_center_energy(orb: &MassOneOrbital, r: f64, opts: &TwoCenterOptions) -> Result<TwoCenterState> {
    let p = &orb.params;
    if p.d != 3 {
        return Err(Error::InvalidParams("the two-center state is implemented for d = 3".into()));
    }
    if !(r > 0.0) {
        return Err(Error::Domain(format!("separation must be positive, got {r}")));
    }
    let p1 = p.with_alpha(1.0)?;
    let gs = &orb.state;
    let lam = orb.lambda_unit;
    let kappa = orb.mu_unit.sqrt();
    let rv = orb.length_factor * r;
    let grid = two_center_grid(kappa, rv, opts)?;
    let c = 0.5 * rv;
    // Integrals over z ≥ 0, doubled; the integrands are even in z.
    let [overlap, cross_grad] = grid.integrate_many::<2>(opts.exec, |z, s, acc| {
        let (zm, zp) = (z + c, z - c);
        let (rm, rp) = ((zm * zm + s * s).sqrt(), (zp * zp + s * s).sqrt());
        let (vm, vp) = (gs.eval(rm), gs.eval(rp));
        acc[0] = vm * vp;
        acc[1] = gs.eval_slope(rm) * gs.eval_slope(rp) * (zm * zp + s * s) / (rm * rp);
    });
    let eps = 2.0 * overlap / lam;
    let kx = 2.0 * cross_grad;
    let (s_mat, residual) =
        lowdin(eps).map_err(|_| Error::NotPositiveDefinite(format!("overlap {eps} at separation {r}: refine the grid or increase R")))?;
    let one_m = 1.0 - eps * eps;
    let [nl_excess, attraction] = grid.integrate_many::<2>(opts.exec, |z, s, acc| {
        let (rm, rp) = (((z + c).powi(2) + s * s).sqrt(), ((z - c).powi(2) + s * s).sqrt());
        let (vm, vp) = (gs.eval(rm), gs.eval(rp));
        let (a, b) = if vm < vp { (vm, vp) } else { (vp, vm) };
        let fa2 = model::fa(&p1, a * a);
        // ρ_R − b² = (a − εb)²/(1 − ε²) for the normalized projector density.
        let da = a - eps * b;
        acc[0] = model::f_alpha_increment(&p1, b * b, da * da / one_m) - fa2;
        acc[1] = model::f_alpha_increment(&p1, b * b, a * a) - fa2;
    });
    let (nl_excess, attraction) = (2.0 * nl_excess, 2.0 * attraction);
    let kv = gs.grad_sq;
    let kin_excess = (2.0 * kv * eps * eps - 2.0 * eps * kx) / one_m;
    let ef = orb.energy_factor;
    let i1 = ef * (gs.energy - orb.excess);
    let kinetic = ef * (2.0 * kv + kin_excess);
    let nonlinear = ef * (2.0 * (gs.energy - kv) + nl_excess);
    Ok(TwoCenterState {
        separation: r,
        scaled_separation: kappa * rv,
        overlap: eps,
        gram: [[1.0, eps], [eps, 1.0]],
        lowdin: s_mat,
        orthonormality_residual: residual,
        kinetic,
        nonlinear,
        energy: kinetic + nonlinear,
        kinetic_excess: ef * kin_excess,
        nonlinear_excess: ef * nl_excess,
        attraction: ef * attraction,
        i1,
        margin: -ef * (2.0 * orb.excess + kin_excess + nl_excess),
    })
}

/// Two-center states over a list of separations with decay fits
/// `ε_R ≈ A R^{−p} e^{−bR}` and `|attraction| ≈ A R^{−p} e^{−bR}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoCenterScan {
    /// Multiplier of the orbital, so `b` compares with `√μ` and `q√μ`.
    pub mu: f64,
    pub states: Vec<TwoCenterState>,
    pub overlap_fit: Option<TailFit>,
    pub attraction_fit: Option<TailFit>,
}

pub fn two_center_scan(orb: &MassOneOrbital, separations: &[f64], opts: &TwoCenterOptions) -> Result<TwoCenterScan> {
    let states = separations.iter().map(|&r| two_center_energy(orb, r, opts)).collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = states.iter().map(|s| s.separation).collect();
    let eps: Vec<f64> = states.iter().map(|s| s.overlap).collect();
    let att: Vec<f64> = states.iter().map(|s| -s.attraction).collect();
    Ok(TwoCenterScan { mu: orb.mu, overlap_fit: fit_exp_power(&xs, &eps).ok(), attraction_fit: fit_exp_power(&xs, &att).ok(), states })
}

/// Settings shared by the `I_α(N)` estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimateOptions {
    pub scf: ScfOptions,
    pub shoot: ShootOptions,
    pub two_center: TwoCenterOptions,
    /// Separations `√μ R` tried for the two-center state at `N = 2`.
    pub scaled_separations: Vec<f64>,
    /// Run the SCF even when the two-center state already binds.
    pub always_scf: bool,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            scf: ScfOptions::default(),
            shoot: ShootOptions::default(),
            two_center: TwoCenterOptions::default(),
            scaled_separations: vec![5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 12.0],
            always_scf: true,
        }
    }
}

/// An upper bound for `I_α(N)` and where it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub n: usize,
    pub energy: f64,
    /// `"orbital"`, `"scf"`, `"two_center"`, or `"none"` when nothing binds.
    pub source: String,
    /// SCF energy, `None` when the SCF reports no bound state or was skipped.
    pub scf_energy: Option<f64>,
    /// Lowest two-center energy over the separations (`N = 2`).
    pub two_center_energy: Option<f64>,
    /// Separation attaining it, units of `α`.
    pub two_center_separation: Option<f64>,
}

struct Estimator<'a> {
    branch: Branch,
    opts: &'a EstimateOptions,
}

impl<'a> Estimator<'a> {
    fn new(p: &ModelParams, opts: &'a EstimateOptions) -> Result<Self> {
        Ok(Estimator { branch: Branch::new(p, &opts.shoot)?, opts })
    }

    fn orbital(&self, p: &ModelParams) -> Result<Option<MassOneOrbital>> {
        match self.branch.orbital(p) {
            Ok(o) => Ok(Some(o)),
            Err(Error::NoBoundState(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn estimate(&self, p: &ModelParams, n: usize) -> Result<EnergyEstimate> {
        let mut est = EnergyEstimate {
            n,
            energy: 0.0,
            source: "none".into(),
            scf_energy: None,
            two_center_energy: None,
            two_center_separation: None,
        };
        if n == 1 {
            if let Some(o) = self.orbital(p)? {
                est.energy = o.energy_factor * (o.energy_unit - o.excess);
                if est.energy < 0.0 {
                    est.source = "orbital".into();
                }
            }
            return Ok(est);
        }
        if n == 2 {
            if let Some(o) = self.orbital(p)? {
                let k = o.mu.sqrt();
                for &x in &self.opts.scaled_separations {
                    match two_center_energy(&o, x / k, &self.opts.two_center) {
                        Ok(st) => {
                            if est.two_center_energy.is_none_or(|e| st.energy < e) {
                                est.two_center_energy = Some(st.energy);
                                est.two_center_separation = Some(st.separation);
                            }
                        }
                        Err(Error::NotPositiveDefinite(_)) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
            if let Some(e) = est.two_center_energy.filter(|&e| e < 0.0) {
                est.energy = e;
                est.source = "two_center".into();
            }
        }
        if est.energy < 0.0 && !self.opts.always_scf {
            return Ok(est);
        }
        match scf(p, n, &self.opts.scf) {
            Ok(s) => {
                est.scf_energy = Some(s.energy);
                if s.energy < est.energy {
                    est.energy = s.energy;
                    est.source = "scf".into();
                }
            }
            Err(Error::NoBoundState(_)) => {}
            Err(e) => return Err(e),
        }
        Ok(est)
    }
}

/// Upper bound for `I_α(N)`: the mass-one orbital for `N = 1`, otherwise the
/// lower of the SCF and (for `N = 2`) the two-center states; zero when none binds.
pub fn energy_estimate(p: &ModelParams, n: usize, opts: &EstimateOptions) -> Result<EnergyEstimate> {
    if n == 0 {
        return Err(Error::InvalidParams("N must be at least 1".into()));
    }
    Estimator::new(p, opts)?.estimate(p, n)
}

/// `I(N) < I(N−K) + I(K)` on computed values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub margin: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongBindingReport {
    pub params: ModelParams,
    pub n: usize,
    /// Estimates for `1..=N`.
    pub estimates: Vec<EnergyEstimate>,
    /// One entry per `K = 1..N−1`.
    pub inequalities: Vec<Inequality>,
    /// `I(N) < 2I(N/2)` for even `N`.
    pub doubling: Option<Inequality>,
    pub binding_evidence: bool,
    pub verdict: String,
    pub note: String,
}

/// Checks the strong binding inequalities for `N ≥ 2`.
pub fn binding_report(p: &ModelParams, n: usize, opts: &EstimateOptions) -> Result<StrongBindingReport> {
    if n < 2 {
        return Err(Error::InvalidParams("binding needs N >= 2".into()));
    }
    let est = Estimator::new(p, opts)?;
    let estimates = (1..=n).map(|k| est.estimate(p, k)).collect::<Result<Vec<_>>>()?;
    let i = |k: usize| if k == 0 { 0.0 } else { estimates[k - 1].energy };
    let ineq = |k: usize| {
        let (lhs, rhs) = (i(n), i(n - k) + i(k));
        Inequality { k, lhs, rhs, margin: rhs - lhs, holds: lhs < rhs }
    };
    let inequalities: Vec<Inequality> = (1..n).map(ineq).collect();
    let doubling = n.is_multiple_of(2).then(|| ineq(n / 2));
    let binding_evidence = inequalities.iter().all(|q| q.holds);
    Ok(StrongBindingReport {
        params: *p,
        n,
        estimates,
        inequalities,
        doubling,
        binding_evidence,
        verdict: if binding_evidence { "binding evidence" } else { "no binding evidence" }.into(),
        note: "energies are upper bounds for I(k); a strict inequality is evidence, not proof".into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaRecord {
    pub alpha: f64,
    pub energy: f64,
    pub source: String,
}

/// Bisection in `α` for the onset of `I_α(N) < 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaScan {
    pub n: usize,
    pub bracket: [f64; 2],
    pub tol: f64,
    pub iterations: usize,
    pub estimate: f64,
    pub records: Vec<AlphaRecord>,
    /// `N = 1`: `λ_c^{1/ex}` with `λ_c` the mass at which the upper branch has `𝓕₁ = 0`.
    pub exact_relation: Option<f64>,
}

/// Bisection on the sign of the estimate of `I_α(N)` over `bracket`
/// (no binding at `lo`, binding at `hi`), until the bracket is shorter than `tol`.
pub fn find_alpha_c(p_family: &ModelParams, n: usize, bracket: [f64; 2], tol: f64, opts: &EstimateOptions) -> Result<AlphaScan> {
    let [mut lo, mut hi] = bracket;
    if n == 0 || !(lo > 0.0 && hi > lo && tol > 0.0) {
        return Err(Error::InvalidParams(format!("need N >= 1, 0 < lo < hi and tol > 0, got N={n} [{lo}, {hi}], {tol}")));
    }
    let est = Estimator::new(p_family, opts)?;
    let mut records = Vec::new();
    let mut eval = |alpha: f64| -> Result<f64> {
        let e = est.estimate(&p_family.with_alpha(alpha)?, n)?;
        records.push(AlphaRecord { alpha, energy: e.energy, source: e.source });
        Ok(e.energy)
    };
    if eval(lo)? < 0.0 {
        return Err(Error::BracketError(format!("N={n} already binds at alpha = {lo:e}")));
    }
    if eval(hi)? >= 0.0 {
        return Err(Error::BracketError(format!("N={n} does not bind at alpha = {hi:e}")));
    }
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if eval(mid)? < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    let exact_relation = if n == 1 {
        let p1 = p_family.with_alpha(1.0)?;
        let gs = upper_branch_root(&p1, est.branch.mu_min, &opts.shoot, |g| g.energy)?;
        Some(model::alpha_critical(&p1, gs.lambda_mass, 1.0))
    } else {
        None
    };
    Ok(AlphaScan { n, bracket, tol, iterations, estimate: 0.5 * (lo + hi), records, exact_relation })
}

/// `𝓔_α((1−t)γ_a + tγ_b)` for two SCF states on the same grid.
pub fn mixed_energy(a: &ScfState, b: &ScfState, t: f64) -> Result<f64> {
    if a.params != b.params || a.density.grid != b.density.grid {
        return Err(Error::InvalidParams("mixed states need the same parameters and grid".into()));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("t must lie in [0, 1], got {t}")));
    }
    let g = &a.density.grid;
    let f: Vec<f64> = a.density.values.iter().zip(&b.density.values).map(|(x, y)| model::fa(&a.params, (1.0 - t) * x + t * y)).collect();
    Ok((1.0 - t) * a.kinetic + t * b.kinetic + g.quad(&f))
}

/// The Yukawa kernel `e^{−mr}/(4πr)` in `d = 3`.
pub fn yukawa(d: usize, m: f64, r: f64) -> Result<f64> {
    if d != 3 {
        return Err(Error::InvalidParams(format!("the Yukawa kernel is implemented for d = 3, got {d}")));
    }
    if !(m > 0.0) {
        return Err(Error::Domain(format!("rate must be positive, got {m}")));
    }
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    Ok((-m * r).exp() / (4.0 * std::f64::consts::PI * r))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionSample {
    pub r: f64,
    pub numeric: f64,
    pub closed_form: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YukawaReport {
    pub a: f64,
    pub b: f64,
    /// `Y_a * Y_b` against `(Y_a − Y_b)/(b² − a²)`.
    pub samples: Vec<ConvolutionSample>,
    pub max_rel_err: f64,
    /// `Y_a * Y_a` against `r Y_a(r)/(2a)`.
    pub self_samples: Vec<ConvolutionSample>,
    pub self_max_rel_err: f64,
}

fn panels(a: f64, b: f64, width: f64) -> impl Iterator<Item = (f64, f64)> {
    let n = ((b - a) / width).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    (0..n).map(move |k| (a + k as f64 * h, a + (k + 1) as f64 * h))
}

/// `(f * g)(R)` for radial `f, g` in `d = 3`:
/// `2π/R ∫₀^∞ r f(r) ∫_{|R−r|}^{R+r} s g(s) ds dr`. The outer integral is cut at `r_far`.
fn radial_convolution(f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64, big_r: f64, r_far: f64) -> f64 {
    let rule = GaussLegendre::new(NonZeroUsize::new(16).unwrap());
    let inner = |r: f64| {
        let (lo, hi) = ((big_r - r).abs(), big_r + r);
        panels(lo, hi, 0.5).map(|(x, y)| rule.integrate(x, y, |s| s * g(s))).sum::<f64>()
    };
    // The inner limits have a kink at r = R.
    let outer = |x: f64, y: f64| panels(x, y, 0.25).map(|(u, v)| rule.integrate(u, v, |r| r * f(r) * inner(r))).sum::<f64>();
    2.0 * std::f64::consts::PI / big_r * (outer(0.0, big_r) + outer(big_r, big_r + r_far))
}

/// Compares the numerical convolution `Y_a * Y_b` with `(Y_a − Y_b)/(b² − a²)`
/// on 40 radii in `[0.5, 10]`, and `Y_a * Y_a` with `r Y_a/(2a)`.
pub fn yukawa_conv_identity_check(a: f64, b: f64) -> Result<YukawaReport> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!("rates must be positive, got {a}, {b}")));
    }
    if a == b {
        return Err(Error::InvalidParams("the identity needs a != b".into()));
    }
    let ya = |r: f64| (-a * r).exp() / (4.0 * std::f64::consts::PI * r);
    let yb = |r: f64| (-b * r).exp() / (4.0 * std::f64::consts::PI * r);
    let r_far = 60.0 / a.min(b);
    let radii: Vec<f64> = (0..40).map(|k| 0.5 + 9.5 * k as f64 / 39.0).collect();
    let sample = |r: f64, numeric: f64, closed_form: f64| ConvolutionSample {
        r,
        numeric,
        closed_form,
        rel_err: ((numeric - closed_form) / closed_form).abs(),
    };
    let samples: Vec<ConvolutionSample> =
        radii.iter().map(|&r| sample(r, radial_convolution(ya, yb, r, r_far), (ya(r) - yb(r)) / (b * b - a * a))).collect();
    let self_samples: Vec<ConvolutionSample> =
        radii.iter().map(|&r| sample(r, radial_convolution(ya, ya, r, 60.0 / a), r * ya(r) / (2.0 * a))).collect();
    let worst = |v: &[ConvolutionSample]| v.iter().map(|s| s.rel_err).fold(0.0, f64::max);
    Ok(YukawaReport { a, b, max_rel_err: worst(&samples), self_max_rel_err: worst(&self_samples), samples, self_samples })
}
