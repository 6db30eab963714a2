//! Radial ground states by shooting on the central height.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::grid::{fit_exp_power, sphere_area, RadialGrid, RadialProfile, TailFit};
use crate::model::{self, ModelParams};
use crate::ode::{State, Stepper, Tolerance};

/// The radial equation `−Δu = g(u)` with `g(t) = −t(F′(t²) + μ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Equation {
    /// The model nonlinearity `F_α` of `params`.
    Model { params: ModelParams, mu: f64 },
    /// Pure power `F(ρ) = −kρ^e` in dimension `d`.
    Power { d: usize, k: f64, e: f64, mu: f64 },
}

impl Equation {
    pub fn d(&self) -> usize {
        match self {
            Equation::Model { params, .. } => params.d,
            Equation::Power { d, .. } => *d,
        }
    }

    pub fn mu(&self) -> f64 {
        match self {
            Equation::Model { mu, .. } | Equation::Power { mu, .. } => *mu,
        }
    }

    /// `F(ρ)`.
    pub fn f(&self, rho: f64) -> f64 {
        match self {
            Equation::Model { params, .. } => model::fa(params, rho),
            Equation::Power { k, e, .. } => -k * rho.powf(*e),
        }
    }

    /// `F′(ρ)`.
    pub fn f_prime(&self, rho: f64) -> f64 {
        match self {
            Equation::Model { params, .. } => model::fa_prime(params, rho),
            Equation::Power { k, e, .. } => -k * e * rho.powf(e - 1.0),
        }
    }

    pub fn g(&self, t: f64) -> f64 {
        -t * (self.f_prime(t * t) + self.mu())
    }

    /// `G(t) = −½F(t²) − ½μt²`.
    pub fn big_g(&self, t: f64) -> f64 {
        -0.5 * self.f(t * t) - 0.5 * self.mu() * t * t
    }

    /// Height `T` at which `g` changes sign; `g < 0` on `(0,T)`, `g > 0` above.
    pub fn threshold(&self) -> f64 {
        let mu = self.mu();
        if mu <= 0.0 {
            return 0.0;
        }
        match self {
            Equation::Model { params: p, .. } => {
                let m = mu / p.alpha.powf(p.q - 1.0);
                let s = if m <= p.q {
                    (m / p.q).powf(1.0 / (p.q - 1.0))
                } else {
                    ((p.b_const + m) / (p.c_const * p.r)).powf(1.0 / (p.r - 1.0))
                };
                (p.alpha * s).sqrt()
            }
            Equation::Power { k, e, .. } => (mu / (k * e)).powf(1.0 / (2.0 * e - 2.0)),
        }
    }

    /// Height where `g` switches branch, if any.
    pub fn kink(&self) -> Option<f64> {
        match self {
            Equation::Model { params, .. } => Some(params.alpha.sqrt()),
            Equation::Power { .. } => None,
        }
    }

    /// Exponent `q` of the small-amplitude power `g(t) ≈ c t^{2q−1}`.
    fn small_power(&self) -> f64 {
        match self {
            Equation::Model { params, .. } => params.q,
            Equation::Power { e, .. } => *e,
        }
    }

    fn rhs(&self, r: f64, y: &State) -> State {
        let d = self.d() as f64;
        let g = self.g(y[0]);
        if r <= 0.0 {
            [y[1], -g / d]
        } else {
            [y[1], -g - (d - 1.0) / r * y[1]]
        }
    }
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShootOptions {
    /// Number of grid intervals.
    pub n: usize,
    /// Overrides the default outer radius.
    pub r_max: Option<f64>,
    pub rtol: f64,
    pub max_bisect: usize,
    /// Relative gap between the bracketing trajectories at which the shot
    /// profile is handed over to the tail.
    pub split_tol: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions { n: 4000, r_max: None, rtol: 1e-11, max_bisect: 200, split_tol: 1e-5 }
    }
}

/// Asymptotic form used beyond the shooting horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tail {
    /// Matching radius.
    pub r_match: f64,
    pub amplitude: f64,
    /// Exponential rate (`√μ`, zero for the algebraic tail).
    pub rate: f64,
    pub d: usize,
}

impl Tail {
    /// Decaying solution of `y″ + (d−1)/r y′ = rate² y` normalized to the
    /// large-`r` form `r^{−(d−1)/2} e^{−rate·r}`, and its derivative.
    /// For `rate = 0` this is `r^{2−d}`.
    pub fn shape(d: usize, rate: f64, r: f64) -> (f64, f64) {
        let df = d as f64;
        if rate == 0.0 {
            return (r.powf(2.0 - df), (2.0 - df) * r.powf(1.0 - df));
        }
        // Asymptotic series of r^{1−d/2} K_ν(rate·r), ν = d/2 − 1. Terminates for odd d.
        let nu = 0.5 * df - 1.0;
        let z = rate * r;
        let mut sum = 1.0;
        let mut dsum = 0.0;
        let mut term = 1.0;
        for k in 1..40 {
            let kf = k as f64;
            let factor = (4.0 * nu * nu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * z);
            let next = term * factor;
            if next == 0.0 || next.abs() > term.abs() {
                break;
            }
            term = next;
            sum += term;
            dsum += -kf * term / r;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        let base = r.powf(-0.5 * (df - 1.0)) * (-z).exp();
        let dbase = base * (-0.5 * (df - 1.0) / r - rate);
        (base * sum, dbase * sum + base * dsum)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.amplitude * Tail::shape(self.d, self.rate, r).0
    }

    pub fn slope(&self, r: f64) -> f64 {
        self.amplitude * Tail::shape(self.d, self.rate, r).1
    }
}

/// A positive radial decreasing solution together with derived quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    pub equation: Equation,
    pub profile: RadialProfile,
    /// `u′` at the grid nodes.
    pub slope: Vec<f64>,
    pub mu: f64,
    /// `‖u‖₂²`.
    pub lambda_mass: f64,
    /// `‖∇u‖₂² + ∫F(u²)`, with the exact derivative and trapezoid quadrature.
    pub energy: f64,
    /// The same energy on the discrete midpoint-gradient quadrature used by
    /// the minimizer.
    pub energy_discrete: f64,
    /// `‖∇u‖₂²` from the exact derivative.
    pub grad_sq: f64,
    /// `((d−2)/d‖∇u‖² − 2∫G(u)) / ‖∇u‖²`.
    pub pohozaev_residual: f64,
    /// Max-norm residual of the radial equation on the shot region,
    /// relative to `max|g(u)|`.
    pub pde_residual: f64,
    pub decay: TailFit,
    pub shoot_height: f64,
    pub bisection_steps: usize,
    pub tail: Tail,
}

impl GroundState {
    /// `u(r)` anywhere, using Hermite interpolation on the grid and the tail beyond.
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        let g = &self.profile.grid;
        if r >= g.r_max {
            return self.tail.value(r);
        }
        let x = r / g.h;
        let i = (x.floor() as usize).min(g.n - 1);
        let t = x - i as f64;
        let (y0, y1) = (self.profile.values[i], self.profile.values[i + 1]);
        let (m0, m1) = (self.slope[i] * g.h, self.slope[i + 1] * g.h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1
    }

    /// `u′(r)` anywhere.
    pub fn eval_slope(&self, r: f64) -> f64 {
        let g = &self.profile.grid;
        if r >= g.r_max {
            return self.tail.slope(r);
        }
        let x = r / g.h;
        let i = (x.floor() as usize).min(g.n - 1);
        let t = x - i as f64;
        let (y0, y1) = (self.profile.values[i], self.profile.values[i + 1]);
        let (m0, m1) = (self.slope[i] * g.h, self.slope[i + 1] * g.h);
        let t2 = t * t;
        ((6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (-6.0 * t2 + 6.0 * t) * y1 + (3.0 * t2 - 2.0 * t) * m1) / g.h
    }

    /// `v₀(0)`-style central value.
    pub fn center(&self) -> f64 {
        self.profile.values[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Outcome {
    /// Crossed zero: the height was too large.
    Over,
    /// Turned back up (or decays too slowly): the height was too small.
    Under,
    Undecided,
}

struct Trajectory {
    u: Vec<f64>,
    up: Vec<f64>,
    outcome: Outcome,
}

fn integrate(eq: &Equation, height: f64, grid: &RadialGrid, opts: &ShootOptions, classify: bool) -> Trajectory {
    let tol = Tolerance { rtol: opts.rtol, atol: 1e-3 * opts.rtol * height.abs().max(1e-300) };
    let mut st = Stepper::new(|r, y: &State| eq.rhs(r, y), 0.0, [height, 0.0], grid.h * 0.1, tol);
    let mut u = vec![height];
    let mut up = vec![0.0];
    let zero_mass = eq.mu() <= 0.0;
    let d = eq.d() as f64;
    // Slow-decay value of r u′/u + (d−2) for the zero-mass problem.
    let p_slow = d - 2.0 - 1.0 / (eq.small_power() - 1.0);
    let mut p_min = f64::INFINITY;
    let check = |r: f64, y: &State, p_min: &mut f64| -> Outcome {
        if y[0] <= 0.0 {
            return Outcome::Over;
        }
        if zero_mass {
            if r <= 0.0 {
                return Outcome::Undecided;
            }
            let p = d - 2.0 + r * y[1] / y[0];
            if p < 0.0 {
                return Outcome::Over;
            }
            *p_min = p_min.min(p);
            if p > 0.5 * p_slow && p > *p_min + 0.02 {
                return Outcome::Under;
            }
        } else if y[1] > 0.0 {
            return Outcome::Under;
        }
        Outcome::Undecided
    };
    for i in 1..=grid.n {
        if !st.advance_to(grid.nodes[i], grid.h) {
            return Trajectory { u, up, outcome: Outcome::Over };
        }
        u.push(st.y[0]);
        up.push(st.y[1]);
        if classify {
            let o = check(st.t, &st.y, &mut p_min);
            if o != Outcome::Undecided {
                return Trajectory { u, up, outcome: o };
            }
        }
    }
    let mut outcome = Outcome::Undecided;
    if classify {
        // Keep going past the grid until the trajectory declares itself.
        let mut r = grid.r_max;
        let r_end = if zero_mass { 1e6 * grid.r_max } else { 40.0 * grid.r_max };
        while r < r_end {
            let next = r * 1.02;
            if !st.advance_to(next, next - r) {
                outcome = Outcome::Over;
                break;
            }
            r = next;
            let o = check(st.t, &st.y, &mut p_min);
            if o != Outcome::Undecided {
                outcome = o;
                break;
            }
        }
        if outcome == Outcome::Undecided && zero_mass {
            let p = d - 2.0 + st.t * st.y[1] / st.y[0];
            outcome = if p > 0.5 * p_slow { Outcome::Under } else { Outcome::Over };
        }
    }
    Trajectory { u, up, outcome }
}

fn make_grid(eq: &Equation, opts: &ShootOptions) -> Result<RadialGrid> {
    let r_max = opts.r_max.unwrap_or_else(|| RadialGrid::default_r_max(eq.mu()));
    RadialGrid::new(eq.d(), r_max, opts.n)
}

fn classify(eq: &Equation, h: f64, grid: &RadialGrid, opts: &ShootOptions) -> Outcome {
    integrate(eq, h, grid, opts, true).outcome
}

/// Solves `−Δu = g(u)`, `u′(0)=0`, `u → 0`, by bisection on `u(0)`.
pub fn solve_equation(eq: &Equation, opts: &ShootOptions) -> Result<GroundState> {
    let grid = make_grid(eq, opts)?;
    let thr = eq.threshold();
    let (mut lo, mut hi) =
        if eq.mu() > 0.0 { (thr * (1.0 + 1e-6), thr * 2.0) } else { (eq.kink().unwrap_or(1.0), 2.0 * eq.kink().unwrap_or(1.0)) };
    if classify(eq, lo, &grid, opts) != Outcome::Under {
        return Err(Error::NoBracket(format!("lower height {lo} does not undershoot")));
    }
    let mut found = false;
    for _ in 0..80 {
        match classify(eq, hi, &grid, opts) {
            Outcome::Over => {
                found = true;
                break;
            }
            _ => {
                lo = hi;
                hi *= 2.0;
            }
        }
    }
    if !found {
        return Err(Error::NoBracket(format!("no overshoot below height {hi}")));
    }
    let mut steps = 0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if steps >= opts.max_bisect {
            return Err(Error::MaxIter(format!("height bisection after {steps} steps")));
        }
        steps += 1;
        match classify(eq, mid, &grid, opts) {
            Outcome::Over => hi = mid,
            _ => lo = mid,
        }
    }
    assemble(eq, grid, lo, hi, steps, opts)
}

/// Integrates from a prescribed height without bisection (the critical
/// zero-mass problem, where every height below the kink is a solution).
pub fn integrate_from(eq: &Equation, height: f64, opts: &ShootOptions) -> Result<GroundState> {
    let grid = make_grid(eq, opts)?;
    let tr = integrate(eq, height, &grid, opts, false);
    if tr.u.len() != grid.len() {
        return Err(Error::Diverged("integration stopped before r_max".into()));
    }
    finish(eq, grid, tr.u, tr.up, grid_end_tail(eq, None), height, 0)
}

fn grid_end_tail(eq: &Equation, _r: Option<f64>) -> Tail {
    Tail { r_match: f64::INFINITY, amplitude: 0.0, rate: eq.mu().max(0.0).sqrt(), d: eq.d() }
}

fn assemble(eq: &Equation, grid: RadialGrid, lo: f64, hi: f64, steps: usize, opts: &ShootOptions) -> Result<GroundState> {
    let a = integrate(eq, lo, &grid, opts, false);
    let b = integrate(eq, hi, &grid, opts, false);
    let m = a.u.len().min(b.u.len());
    let mut horizon = m;
    for i in 1..m {
        let gap = (a.u[i] - b.u[i]).abs();
        if gap > opts.split_tol * a.u[i].abs().max(b.u[i].abs()) || a.u[i] <= 0.0 || b.u[i] <= 0.0 || a.up[i] > 0.0 || b.up[i] > 0.0 {
            horizon = i;
            break;
        }
    }
    if horizon < 8 {
        return Err(Error::NoBracket("bracketing trajectories separate immediately".into()));
    }
    let k = horizon - 1;
    let mut u: Vec<f64> = (0..horizon).map(|i| 0.5 * (a.u[i] + b.u[i])).collect();
    let mut up: Vec<f64> = (0..horizon).map(|i| 0.5 * (a.up[i] + b.up[i])).collect();
    let rate = eq.mu().max(0.0).sqrt();
    let rk = grid.nodes[k];
    let (y, _) = Tail::shape(eq.d(), rate, rk);
    let tail = Tail { r_match: rk, amplitude: u[k] / y, rate, d: eq.d() };
    for i in horizon..grid.len() {
        let r = grid.nodes[i];
        u.push(tail.value(r));
        up.push(tail.slope(r));
    }
    let mut gs = finish(eq, grid, u, up, tail, 0.5 * (lo + hi), steps)?;
    gs.tail = tail;
    Ok(gs)
}

fn finish(eq: &Equation, grid: RadialGrid, u: Vec<f64>, up: Vec<f64>, tail: Tail, height: f64, steps: usize) -> Result<GroundState> {
    let d = eq.d();
    let df = d as f64;
    // Trapezoid weights: origin weight zero for d ≥ 2.
    let mut tw = grid.weights.clone();
    if d >= 2 {
        tw[0] = 0.0;
    }
    let dot = |f: &dyn Fn(usize) -> f64| -> f64 { (0..grid.len()).map(|i| tw[i] * f(i)).sum() };
    let mut lambda_mass = dot(&|i| u[i] * u[i]);
    let mut grad_sq = dot(&|i| up[i] * up[i]);
    let mut int_f = dot(&|i| eq.f(u[i] * u[i]));
    let mut int_g = dot(&|i| eq.big_g(u[i]));
    if eq.mu() <= 0.0 && d >= 3 && tail.amplitude == 0.0 {
        // Algebraic tail beyond r_max, u ≈ L r^{2−d}.
        let r = grid.r_max;
        let l = u[grid.n] * r.powf(df - 2.0);
        let s = sphere_area(d);
        grad_sq += s * l * l * (df - 2.0) * r.powf(2.0 - df);
        let e = eq.small_power();
        let pw = 2.0 * e * (2.0 - df) + df;
        int_g += 0.5 * s * l.powf(2.0 * e) * r.powf(pw) / (-pw);
        int_f -= s * l.powf(2.0 * e) * r.powf(pw) / (-pw);
        if df > 4.0 {
            lambda_mass += s * l * l * r.powf(4.0 - df) / (df - 4.0);
        } else {
            lambda_mass = f64::INFINITY;
        }
    } else if eq.mu() <= 0.0 && d >= 3 {
        let r = grid.r_max;
        let l = u[grid.n] * r.powf(df - 2.0);
        let s = sphere_area(d);
        grad_sq += s * l * l * (df - 2.0) * r.powf(2.0 - df);
        let e = eq.small_power();
        let pw = 2.0 * e * (2.0 - df) + df;
        int_g += 0.5 * s * l.powf(2.0 * e) * r.powf(pw) / (-pw);
        int_f -= s * l.powf(2.0 * e) * r.powf(pw) / (-pw);
        lambda_mass = if df > 4.0 { lambda_mass + s * l * l * r.powf(4.0 - df) / (df - 4.0) } else { f64::INFINITY };
    }
    let energy = grad_sq + int_f;
    let profile = RadialProfile::new(grid.clone(), u.clone())?;
    let energy_discrete = profile.grad_l2_sq() + profile.integrate(|x| eq.f(x * x));
    let pohozaev_residual = ((df - 2.0) / df * grad_sq - 2.0 * int_g) / grad_sq;

    // Residual of u″ + (d−1)/r u′ + g(u) with u″ from sixth-order differences of u′.
    let h = grid.h;
    let shot_end = if tail.r_match.is_finite() { (tail.r_match / h).round() as usize } else { grid.n };
    let gmax = u.iter().map(|&x| eq.g(x).abs()).fold(0.0, f64::max).max(1e-300);
    let kink = eq.kink();
    let mut res: f64 = 0.0;
    for i in 3..shot_end.min(grid.n).saturating_sub(3) {
        if let Some(kv) = kink {
            if u[i + 3] <= kv && kv <= u[i - 3] {
                continue;
            }
        }
        let upp = (up[i + 3] - 9.0 * up[i + 2] + 45.0 * up[i + 1] - 45.0 * up[i - 1] + 9.0 * up[i - 2] - up[i - 3]) / (60.0 * h);
        let r = grid.nodes[i];
        res = res.max((upp + (df - 1.0) / r * up[i] + eq.g(u[i])).abs());
    }
    let pde_residual = res / gmax;

    let fit_hi = if tail.r_match.is_finite() { tail.r_match } else { grid.r_max };
    let decay = profile
        .fit_exponential_tail(0.5 * fit_hi, fit_hi)
        .or_else(|_| fit_exp_power(&grid.nodes[1..], &u[1..]))
        .unwrap_or(TailFit { rate: f64::NAN, power: f64::NAN, amplitude: f64::NAN });
    Ok(GroundState {
        equation: *eq,
        profile,
        slope: up,
        mu: eq.mu(),
        lambda_mass,
        energy,
        energy_discrete,
        grad_sq,
        pohozaev_residual,
        pde_residual,
        decay,
        shoot_height: height,
        bisection_steps: steps,
        tail,
    })
}

fn require_alpha_one(p: &ModelParams) -> Result<()> {
    if (p.alpha - 1.0).abs() > 1e-14 {
        return Err(Error::InvalidParams("this solver expects alpha = 1".into()));
    }
    Ok(())
}

/// Ground state `u_μ` of `−Δu = g_μ(u)`.
pub fn solve_ground_state(p: &ModelParams, mu: f64, opts: &ShootOptions) -> Result<GroundState> {
    if !(mu > 0.0) {
        return Err(Error::InvalidParams(format!("mu must be positive, got {mu}")));
    }
    solve_equation(&Equation::Model { params: *p, mu }, opts)
}

/// Ground state `v₀` of `−Δv = −v + q v^{2q−1}`.
pub fn solve_v0(p: &ModelParams, opts: &ShootOptions) -> Result<GroundState> {
    if p.q >= p.q_sobolev() {
        return Err(Error::InvalidParams("v0 needs q < d/(d-2)".into()));
    }
    solve_equation(&Equation::Power { d: p.d, k: 1.0, e: p.q, mu: 1.0 }, opts)
}

/// `μ_c = v₀(0)^{−2(q−1)}`.
pub fn mu_c(p: &ModelParams, v0: &GroundState) -> f64 {
    v0.center().powf(-2.0 * (p.q - 1.0))
}

/// Ground state `Q` of `−Δw = −w + 𝔠 r w^{2r−1}`.
pub fn solve_q_profile(p: &ModelParams, opts: &ShootOptions) -> Result<GroundState> {
    if p.r >= p.q_sobolev() {
        return Err(Error::InvalidParams("Q needs r < d/(d-2)".into()));
    }
    solve_equation(&Equation::Power { d: p.d, k: p.c_const, e: p.r, mu: 1.0 }, opts)
}

/// Zero-mass solution `u_*` of `−Δu = g_*(u)`. In the critical case
/// `q = d/(d−2)` every height up to 1 is a solution and `height` selects it
/// (default 1); otherwise the height is found by bisection.
pub fn solve_zero_mass(p: &ModelParams, height: Option<f64>, opts: &ShootOptions) -> Result<GroundState> {
    require_alpha_one(p)?;
    if p.d < 3 || p.q < p.q_sobolev() - 1e-12 {
        return Err(Error::InvalidParams("zero-mass problem needs d >= 3 and q >= d/(d-2)".into()));
    }
    let eq = Equation::Model { params: *p, mu: 0.0 };
    if (p.q - p.q_sobolev()).abs() <= 1e-12 {
        integrate_from(&eq, height.unwrap_or(1.0), opts)
    } else {
        solve_equation(&eq, opts)
    }
}

/// Values at the dual problem `M(G_μ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualValue {
    pub m_of_g: f64,
    pub theta: f64,
    /// `‖v_μ‖₂²` of the dilated profile.
    pub v_mass: f64,
}

/// Dilates `u_μ` to `v(y) = u(θ^{1/2}y)` with `‖∇v‖₂ = 1` and evaluates `∫G_μ(v)`.
pub fn dual_max_functional(gs: &GroundState) -> Result<DualValue> {
    let d = gs.equation.d();
    if d < 3 {
        return Err(Error::InvalidParams("dual problem needs d >= 3".into()));
    }
    if !(gs.grad_sq > 0.0) {
        return Err(Error::Domain("gradient norm is zero".into()));
    }
    let df = d as f64;
    let theta = gs.grad_sq.powf(2.0 / (df - 2.0));
    let mut tw = gs.profile.grid.weights.clone();
    tw[0] = 0.0;
    let int_g: f64 = tw.iter().zip(&gs.profile.values).map(|(w, &u)| w * gs.equation.big_g(u)).sum();
    let int_g = int_g + if gs.mu <= 0.0 { gs.pohozaev_tail_g() } else { 0.0 };
    let scale = theta.powf(-0.5 * df);
    Ok(DualValue { m_of_g: scale * int_g, theta, v_mass: scale * gs.lambda_mass })
}

impl GroundState {
    fn pohozaev_tail_g(&self) -> f64 {
        let d = self.equation.d();
        let df = d as f64;
        let g = &self.profile.grid;
        let l = self.profile.values[g.n] * g.r_max.powf(df - 2.0);
        let e = self.equation.small_power();
        let pw = 2.0 * e * (2.0 - df) + df;
        0.5 * sphere_area(d) * l.powf(2.0 * e) * g.r_max.powf(pw) / (-pw)
    }
}

/// One row of a `Λ(μ)` scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub mu: f64,
    pub lambda_mass: Option<f64>,
    pub energy: Option<f64>,
    pub error: Option<String>,
}

/// Solves for each `μ` (in parallel when enabled) and tabulates `Λ(μ)`, `𝓕₁(u_μ)`.
pub fn lambda_of_mu_curve(p: &ModelParams, mus: &[f64], opts: &ShootOptions, exec: Execution) -> Vec<CurveRow> {
    exec::map(exec, mus, |&mu| match solve_ground_state(p, mu, opts) {
        Ok(gs) => CurveRow { mu, lambda_mass: Some(gs.lambda_mass), energy: Some(gs.energy), error: None },
        Err(e) => CurveRow { mu, lambda_mass: None, energy: None, error: Some(e.to_string()) },
    })
}

/// Counts sign changes of the shooting classifier on `samples` heights in
/// `[lo, hi]`. A ground-state problem with a unique solution gives exactly one.
pub fn count_brackets(eq: &Equation, lo: f64, hi: f64, samples: usize, opts: &ShootOptions) -> Result<usize> {
    let grid = make_grid(eq, opts)?;
    let mut last = None;
    let mut changes = 0;
    for k in 0..samples {
        let h = lo + (hi - lo) * k as f64 / (samples - 1) as f64;
        let o = classify(eq, h, &grid, opts) == Outcome::Over;
        if let Some(prev) = last {
            if prev != o {
                changes += 1;
            }
        }
        last = Some(o);
    }
    Ok(changes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_shape_in_3d_is_yukawa() {
        let (y, dy) = Tail::shape(3, 2.0, 1.5);
        assert!((y - (-3.0f64).exp() / 1.5).abs() < 1e-15);
        assert!((dy - (-(-3.0f64).exp() / 1.5 * (2.0 + 1.0 / 1.5))).abs() < 1e-14);
    }

    #[test]
    fn threshold_separates_signs() {
        let p = ModelParams::new(3, 2.0, 4.0 / 3.0, 1.0).unwrap();
        for &mu in &[0.05, 1.0, 3.0, 50.0] {
            let eq = Equation::Model { params: p, mu };
            let t = eq.threshold();
            assert!(eq.g(t * 0.999) < 0.0 && eq.g(t * 1.001) > 0.0, "mu={mu}");
        }
    }
}
