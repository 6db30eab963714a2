//! Verification suites: shooting and minimization results checked against
//! closed-form limits, exact scalings and identities. Each check records the
//! expected and measured values with its tolerance.

use serde::{Deserialize, Serialize};

use crate::bosonic::{self, MinimizeOptions};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::grid::{fit_exp_power, least_squares_line, RadialGrid};
use crate::model::{self, ModelParams};
use crate::shoot::{self, GroundState, ShootOptions};

/// Names accepted by [`run_suite`].
pub const SUITES: [&str; 5] = ["subcritical", "supercritical", "critical", "mu-infinity", "scaling"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// The identity or limit being tested.
    pub anchor: String,
    pub expected: f64,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub params: ModelParams,
    pub records: Vec<CheckRecord>,
    pub pass: bool,
}

impl SuiteReport {
    fn new(suite: &str, p: &ModelParams) -> Self {
        SuiteReport { suite: suite.into(), params: *p, records: Vec::new(), pass: true }
    }

    fn push(&mut self, name: &str, anchor: &str, expected: f64, measured: f64, tolerance: f64, pass: bool) {
        self.pass &= pass;
        self.records.push(CheckRecord { name: name.into(), anchor: anchor.into(), expected, measured, tolerance, pass });
    }

    /// `|measured − expected| ≤ tol·|expected|`.
    fn close(&mut self, name: &str, anchor: &str, expected: f64, measured: f64, tol: f64) {
        let ok = (measured - expected).abs() <= tol * expected.abs();
        self.push(name, anchor, expected, measured, tol, ok);
    }

    /// `measured ≤ bound`.
    fn at_most(&mut self, name: &str, anchor: &str, measured: f64, bound: f64) {
        self.push(name, anchor, 0.0, measured, bound, measured <= bound);
    }

    /// A yes/no property, recorded as 1 or 0.
    fn holds(&mut self, name: &str, anchor: &str, ok: bool) {
        self.push(name, anchor, 1.0, if ok { 1.0 } else { 0.0 }, 0.0, ok);
    }

    /// Human-readable table.
    pub fn table(&self) -> String {
        let mut s = format!("suite {}: {}\n", self.suite, if self.pass { "PASS" } else { "FAIL" });
        for r in &self.records {
            s.push_str(&format!(
                "  [{}] {:<44} expected {:<13.6e} measured {:<13.6e} tol {:.1e}  ({})\n",
                if r.pass { "ok" } else { "XX" },
                r.name,
                r.expected,
                r.measured,
                r.tolerance,
                r.anchor
            ));
        }
        s
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteOptions {
    pub shoot: ShootOptions,
    pub bosonic: MinimizeOptions,
    #[serde(skip)]
    pub exec: Execution,
}

/// Runs a suite by name.
pub fn run_suite(name: &str, p: &ModelParams, opts: &SuiteOptions) -> Result<SuiteReport> {
    match name {
        "subcritical" => run_subcritical_suite(p, opts),
        "supercritical" => run_supercritical_suite(p, opts),
        "critical" => run_critical_suite(p, opts),
        "mu-infinity" => run_mu_infinity_suite(p, opts),
        "scaling" => run_scaling_suite(p, opts),
        _ => Err(Error::InvalidParams(format!("unknown suite {name:?}; expected one of {SUITES:?}"))),
    }
}

fn solve_many(p: &ModelParams, mus: &[f64], opts: &SuiteOptions) -> Result<Vec<GroundState>> {
    exec::map(opts.exec, mus, |&mu| shoot::solve_ground_state(p, mu, &opts.shoot)).into_iter().collect()
}

fn slope(x0: f64, y0: f64, x1: f64, y1: f64) -> f64 {
    (y1.ln() - y0.ln()) / (x1.ln() - x0.ln())
}

fn log_log_fit(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    least_squares_line(&lx, &ly).0
}

/// `‖∇(a − b)‖₂` on a uniform grid over `[0, r_max]` with the midpoint gradient.
pub fn h1_distance(d: usize, r_max: f64, n: usize, a: impl Fn(f64) -> f64, b: impl Fn(f64) -> f64) -> Result<f64> {
    let g = RadialGrid::new(d, r_max, n)?;
    let diff: Vec<f64> = g.nodes.iter().map(|&r| a(r) - b(r)).collect();
    Ok(g.grad_sq(&diff).sqrt())
}

/// Exact power-branch rescaling, mass and energy power laws below `μ_c`.
pub fn run_subcritical_suite(p: &ModelParams, opts: &SuiteOptions) -> Result<SuiteReport> {
    let p = p.with_alpha(1.0)?;
    if p.q >= p.q_sobolev() {
        return Err(Error::InvalidParams("the subcritical suite needs q < d/(d-2)".into()));
    }
    let mut rep = SuiteReport::new("subcritical", &p);
    let (d, q) = (p.d as f64, p.q);
    let v0 = shoot::solve_v0(&p, &opts.shoot)?;
    let mu_c = shoot::mu_c(&p, &v0);
    let anchor = "u_mu(x) = mu^(1/(2(q-1))) v0(sqrt(mu) x) for mu < mu_c";
    let mus = [0.01 * mu_c, 0.3 * mu_c, 0.6 * mu_c, 0.95 * mu_c];
    let states = solve_many(&p, &mus, opts)?;
    for (mu, u) in mus.iter().zip(&states) {
        let amp = mu.powf(0.5 / (q - 1.0));
        let err =
            u.profile.grid.nodes.iter().zip(&u.profile.values).map(|(&r, &x)| (x - amp * v0.eval(mu.sqrt() * r)).abs()).fold(0.0, f64::max);
        rep.at_most(&format!("rescaling sup error at mu/mu_c = {:.2}", mu / mu_c), anchor, err, 1e-5);
    }
    let above = shoot::solve_ground_state(&p, 1.2 * mu_c, &opts.shoot)?;
    rep.holds("peak exceeds the branch point above mu_c", "v0 <= mu^(-1/(2(q-1))) fails above mu_c", above.center() > 1.0);

    let ex = -(d / (2.0 * (q - 1.0))) * (q - (d + 2.0) / d);
    let n = mus.len();
    let lam: Vec<f64> = states.iter().map(|s| s.lambda_mass).collect();
    let anchor = "Lambda(mu) = mu^(-(d/(2(q-1)))(q-(d+2)/d)) |v0|^2";
    rep.close("mass exponent, two-point", anchor, ex, slope(mus[0], lam[0], mus[n - 1], lam[n - 1]), 0.02);
    rep.close("mass exponent, least squares", anchor, ex, log_log_fit(&mus, &lam), 0.02);

    let anchor = "F1(u_mu) = mu^(q/(q-1)-d/2) F1(v0) > 0";
    for (mu, u) in mus.iter().zip(&states) {
        let expected = mu.powf(q / (q - 1.0) - 0.5 * d) * v0.energy;
        rep.close(&format!("energy scaling at mu/mu_c = {:.2}", mu / mu_c), anchor, expected, u.energy, 1e-5);
    }
    rep.holds("energy positive below mu_c", anchor, states.iter().all(|s| s.energy > 0.0));
    rep.close(
        "F1(v0) from Pohozaev",
        "F1(v0) = |grad v0|^2 (q-(d+2)/d)/(q-1)",
        v0.grad_sq * (q - (d + 2.0) / d) / (q - 1.0),
        v0.energy,
        1e-6,
    );
    Ok(rep)
}

/// Small-`μ` convergence to the zero-mass solution for `q > d/(d−2)`.
pub fn run_supercritical_suite(p: &ModelParams, opts: &SuiteOptions) -> Result<SuiteReport> {
    let p = p.with_alpha(1.0)?;
    if p.d < 3 || p.q <= p.q_sobolev() + 1e-12 {
        return Err(Error::InvalidParams("the supercritical suite needs d >= 3 and q > d/(d-2)".into()));
    }
    let mut rep = SuiteReport::new("supercritical", &p);
    let df = p.d as f64;
    let mus = [1.0, 0.1, 0.01];
    let states = solve_many(&p, &mus, opts)?;
    let star = shoot::solve_zero_mass(&p, None, &opts.shoot)?;
    // u_* decays like |x|^(2-d), so the window reaches far out.
    let (reach, n) = (200.0, 40_000);
    let dist: Vec<f64> = states.iter().map(|u| h1_distance(p.d, reach, n, |r| u.eval(r), |r| star.eval(r))).collect::<Result<_>>()?;
    let anchor = "u_mu -> u_* strongly in the homogeneous H1 norm";
    rep.holds("distance to u_* decreases (mu = 1, 0.1)", anchor, dist[1] < dist[0]);
    rep.holds("distance to u_* decreases (mu = 0.1, 0.01)", anchor, dist[2] < dist[1]);
    rep.at_most("distance at mu = 0.01 relative to mu = 1", anchor, dist[2] / dist[0], 0.25);

    rep.close("tail power of u_*", "|x|^(d-2) u_*(x) has a limit", df - 2.0, star.decay.power, 0.05);
    let e: Vec<f64> = states.iter().map(|s| s.energy).collect();
    let anchor = "F1(u_mu) stays positive and converges as mu -> 0";
    rep.holds("energy positive", anchor, e.iter().all(|&x| x > 0.0));
    rep.holds("energy increments shrink", anchor, (e[2] - e[1]).abs() < (e[1] - e[0]).abs());

    let duals = states.iter().map(shoot::dual_max_functional).collect::<Result<Vec<_>>>()?;
    let dual_star = shoot::dual_max_functional(&star)?;
    let anchor = "M(G_mu) increases to M(G_*)";
    rep.holds("M(G_mu) increasing as mu decreases", anchor, duals.windows(2).all(|w| w[1].m_of_g > w[0].m_of_g));
    rep.holds("M(G_mu) below M(G_*)", anchor, duals.iter().all(|v| v.m_of_g <= dual_star.m_of_g * (1.0 + 1e-6)));
    let ident = 0.5 * (df - 2.0) / df;
    for (mu, v) in mus.iter().zip(&duals) {
        rep.close(&format!("theta M(G) at mu = {mu}"), "theta_mu M(G_mu) = (d-2)/(2d)", ident, v.theta * v.m_of_g, 1e-5);
    }
    let ml: Vec<f64> = mus.iter().zip(&duals).map(|(mu, v)| mu * v.v_mass).collect();
    rep.holds("mu |v_mu|^2 decreasing to 0", "mu |v_mu|^2 -> 0", ml.windows(2).all(|w| w[1] < w[0]));
    Ok(rep)
}

/// `λ^{(d−2)/2} u(λ·)` closest to `S` in the homogeneous H¹ norm: a log grid
/// over `λ ∈ [1e−2, 1e2]` refined by golden section. Returns `(λ*, distance)`.
pub fn best_dilation(d: usize, u: &GroundState, s: impl Fn(f64) -> f64 + Copy) -> Result<(f64, f64)> {
    let e = 0.5 * (d as f64 - 2.0);
    let reach = 60.0;
    let dist = |x: f64| {
        let l = x.exp();
        h1_distance(d, reach, 4000, |r| l.powf(e) * u.eval(l * r), s)
    };
    let (lo, hi) = (1e-2f64.ln(), 1e2f64.ln());
    let mut best = (lo, f64::INFINITY);
    for k in 0..200 {
        let x = lo + (hi - lo) * k as f64 / 199.0;
        let v = dist(x)?;
        if v < best.1 {
            best = (x, v);
        }
    }
    let step = (hi - lo) / 199.0;
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (best.0 - step, best.0 + step);
    let mut c = b - gr * (b - a);
    let mut dd = a + gr * (b - a);
    let (mut fc, mut fd) = (dist(c)?, dist(dd)?);
    for _ in 0..60 {
        if fc < fd {
            b = dd;
            dd = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = dist(c)?;
        } else {
            a = c;
            c = dd;
            fc = fd;
            dd = a + gr * (b - a);
            fd = dist(dd)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x.exp(), dist(x)?))
}

/// Small-`μ` behaviour at `q = d/(d−2)`: concentration on the Sobolev optimizer.
pub fn run_critical_suite(p: &ModelParams, opts: &SuiteOptions) -> Result<SuiteReport> {
    let p = p.with_alpha(1.0)?;
    if p.d < 3 || (p.q - p.q_sobolev()).abs() > 1e-12 {
        return Err(Error::InvalidParams("the critical suite needs d >= 3 and q = d/(d-2)".into()));
    }
    let mut rep = SuiteReport::new("critical", &p);
    let df = p.d as f64;
    let s = move |r: f64| (1.0 + r * r / ((df - 2.0) * (df - 2.0))).powf(-0.5 * (df - 2.0));
    // S from the zero-mass equation at height 1, and the Emden–Fowler residual at two resolutions.
    let at = shoot::solve_zero_mass(&p, Some(1.0), &ShootOptions { n: 40000, r_max: Some(20.0), ..opts.shoot })?;
    let err = at.profile.grid.nodes.iter().zip(&at.profile.values).map(|(&r, &u)| (u - s(r)).abs()).fold(0.0, f64::max);
    rep.at_most("shot profile vs S on [0, 20]", "S(x) = (1+|x|^2/(d-2)^2)^(-(d-2)/2)", err, 1e-5);
    rep.close("S(0)", "S(0) = 1", 1.0, at.center(), 1e-12);
    // Pointwise central differences of u'' + (d-1)/r u', with d·u''(0) at the origin.
    let ef = |n: usize| {
        let h = 10.0 / n as f64;
        let u = |i: usize| s(i as f64 * h);
        let res = |lap: f64, i: usize| (-lap - df / (df - 2.0) * u(i).powf((df + 2.0) / (df - 2.0))).abs();
        let mut worst = res(2.0 * df * (u(1) - u(0)) / (h * h), 0);
        for i in 1..n {
            let r = i as f64 * h;
            let lap = (u(i + 1) - 2.0 * u(i) + u(i - 1)) / (h * h) + (df - 1.0) / r * (u(i + 1) - u(i - 1)) / (2.0 * h);
            worst = worst.max(res(lap, i));
        }
        worst
    };
    let (r1, r2) = (ef(500), ef(1000));
    rep.close("Emden-Fowler residual ratio under halving h", "-Delta S = d/(d-2) S^((d+2)/(d-2)), O(h^2)", 4.0, r1 / r2, 0.1);

    let mus = [1e-1, 1e-2, 1e-3];
    let states = solve_many(&p, &mus, opts)?;
    let fits = exec::map(opts.exec, &states, |u| best_dilation(p.d, u, s)).into_iter().collect::<Result<Vec<_>>>()?;
    let anchor = "best dilations of u_mu approach S";
    rep.holds("best-fit distance decreases (mu = 0.1, 0.01)", anchor, fits[1].1 < fits[0].1);
    rep.holds("best-fit distance decreases (mu = 0.01, 0.001)", anchor, fits[2].1 < fits[1].1);
    let duals = states.iter().map(shoot::dual_max_functional).collect::<Result<Vec<_>>>()?;
    let ml: Vec<f64> = mus.iter().zip(&duals).map(|(mu, v)| mu * v.v_mass).collect();
    rep.holds("mu |v_mu|^2 decreasing to 0", "mu |v_mu|^2 -> 0", ml.windows(2).all(|w| w[1] < w[0]));
    Ok(rep)
}

/// Large-`μ` limit: rescaled profiles approach `Q`, the mass power law, and
/// the bounds on the correction term `E(α, t)`.
pub fn run_mu_infinity_suite(p: &ModelParams, opts: &SuiteOptions) -> Result<SuiteReport> {
    let p = p.with_alpha(1.0)?;
    let mut rep = SuiteReport::new("mu-infinity", &p);
    let (d, r, b) = (p.d as f64, p.r, p.b_const);
    let q_prof = shoot::solve_q_profile(&p, &opts.shoot)?;
    let mus = [10.0, 1e2, 1e3, 1e4];
    let states = solve_many(&p, &mus, opts)?;
    let scale = |mu: f64| mu + b;
    let reach = 40.0;
    let dist: Vec<f64> = mus
        .iter()
        .zip(&states)
        .map(|(&mu, u)| {
            let (k, a) = (scale(mu).sqrt(), scale(mu).powf(-0.5 / (r - 1.0)));
            h1_distance(p.d, reach, 8000, |x| a * u.eval(x / k), |x| q_prof.eval(x))
        })
        .collect::<Result<_>>()?;
    let anchor = "(mu+b)^(-1/(2(r-1))) u_mu(x/sqrt(mu+b)) -> Q";
    for (w, m) in dist.windows(2).zip(mus.windows(2)) {
        rep.holds(&format!("distance to Q decreases (mu = {:e}, {:e})", m[0], m[1]), anchor, w[1] < w[0]);
    }
    let ex = (d / (2.0 * (r - 1.0))) * ((d + 2.0) / d - r);
    let n = mus.len();
    let lam: Vec<f64> = states.iter().map(|s| s.lambda_mass).collect();
    let anchor = "Lambda(mu) ~ (mu+b)^((d/(2(r-1)))((d+2)/d-r)) |Q|^2";
    rep.close("mass exponent on [1e2, 1e4], two-point", anchor, ex, slope(mus[1], lam[1], mus[n - 1], lam[n - 1]), 0.05);
    rep.close("mass exponent on [1e2, 1e4], least squares", anchor, ex, log_log_fit(&mus[1..], &lam[1..]), 0.05);
    let ratio: Vec<f64> = mus.iter().zip(&lam).map(|(&mu, l)| l / (scale(mu).powf(ex) * q_prof.lambda_mass)).collect();
    rep.holds("mass ratio approaches 1", anchor, (ratio[n - 1] - 1.0).abs() < (ratio[1] - 1.0).abs());

    let c1 = p.b_const + p.q;
    let c2 = p.b_const + p.q * (2.0 * p.q - 1.0) + p.c_const * r;
    let (mut worst_lo, mut worst_hi, mut worst_dt) = (f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &mu in &mus {
        let alpha = scale(mu).powf(-0.5 / (r - 1.0));
        let bound = alpha.powf(2.0 * (r - 1.0));
        for k in 1..=1000 {
            let t = alpha * k as f64 / 1001.0;
            let e = model::e_alpha_correction(&p, alpha, t);
            worst_lo = worst_lo.min(e / (bound * t));
            worst_hi = worst_hi.max(e / (c1 * bound * t));
            worst_dt = worst_dt.max(model::e_alpha_correction_dt(&p, alpha, t).abs() / (c2 * bound));
        }
    }
    let anchor = "0 <= E(alpha,t) <= (b+q) alpha^(2(r-1)) t, |E_t| <= (b+q(2q-1)+cr) alpha^(2(r-1))";
    rep.holds("E(alpha, t) >= 0", anchor, worst_lo >= 0.0);
    rep.at_most("E(alpha, t) / upper bound", anchor, worst_hi, 1.0);
    rep.at_most("|dE/dt| / bound", anchor, worst_dt, 1.0);
    Ok(rep)
}

/// `(α, λ)` points used for the three-route comparison.
pub const SCALING_POINTS: [(f64, f64); 3] = [(4.0, 20.0), (0.5, 60.0), (2.0, 25.0)];

/// `J_α(λ)` by three routes, monotonicity in `α` and `λ`, concavity in `λ`.
pub fn run_scaling_suite(p: &ModelParams, opts: &SuiteOptions) -> Result<SuiteReport> {
    let p = p.with_alpha(1.0)?;
    let mut rep = SuiteReport::new("scaling", &p);
    let o = &opts.bosonic;
    let anchor = "J_alpha(lambda) = alpha^(q(1-d/2)+d/2) J_1(lambda') = alpha^(2/d) J~_beta(lambda)";
    let rows = exec::map(opts.exec, &SCALING_POINTS, |&(a, l)| -> Result<(f64, f64, f64)> {
        let pa = p.with_alpha(a)?;
        let o = MinimizeOptions { exec: Execution::Sequential, ..o.clone() };
        let mapped = bosonic::j_alpha(&pa, l, &o)?;
        let coupled = bosonic::j_alpha_coupled(&pa, l, &o)?;
        let od = MinimizeOptions { n: 5000, r_max: 20.0 / a.sqrt(), ..o.clone() };
        let direct = bosonic::minimize(&pa, l, &od)?.energy;
        Ok((mapped, coupled, direct))
    });
    for (&(a, l), row) in SCALING_POINTS.iter().zip(rows) {
        let (mapped, coupled, direct) = row?;
        rep.holds(&format!("J negative at alpha = {a}, lambda = {l}"), anchor, mapped < 0.0);
        rep.close(&format!("coupled vs mapped at alpha = {a}, lambda = {l}"), anchor, mapped, coupled, 1e-3);
        rep.close(&format!("direct vs mapped at alpha = {a}, lambda = {l}"), anchor, mapped, direct, 1e-3);
    }
    let l = SCALING_POINTS[0].1;
    let alphas = [0.5, 1.0, 2.0, 4.0, 8.0];
    let ja: Vec<f64> = exec::map(opts.exec, &alphas, |&a| {
        bosonic::j_alpha(&p.with_alpha(a)?, l, &MinimizeOptions { exec: Execution::Sequential, ..o.clone() })
    })
    .into_iter()
    .collect::<Result<_>>()?;
    rep.holds(
        "J_alpha(lambda) non-increasing in alpha",
        "alpha -> J_alpha(lambda) is non-increasing",
        ja.windows(2).all(|w| w[1] <= w[0] + bosonic::ENERGY_EPS),
    );
    let lambdas: Vec<f64> = (0..13).map(|k| 16.0 + 2.0 * k as f64).collect();
    let js: Vec<f64> = bosonic::scan(&p, &lambdas, o)?.iter().map(|r| r.energy).collect();
    rep.holds(
        "J_1 non-increasing in lambda",
        "lambda -> J_1(lambda) is non-increasing",
        js.windows(2).all(|w| w[1] <= w[0] + bosonic::ENERGY_EPS),
    );
    let second = js.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).fold(f64::NEG_INFINITY, f64::max);
    rep.at_most("largest second difference of J_1", "lambda -> J_1(lambda) is concave", second, 1e-6);
    Ok(rep)
}

/// Exponential tail check for a shot profile: fitted rate against `√μ`.
pub fn decay_rate(u: &GroundState, window: [f64; 2]) -> Result<f64> {
    let g = &u.profile.grid;
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        g.nodes.iter().zip(&u.profile.values).filter(|(r, _)| **r >= window[0] && **r <= window[1]).map(|(r, v)| (*r, *v)).unzip();
    Ok(fit_exp_power(&xs, &ys)?.rate)
}
