//! The ten acceptance criteria, each a function returning a [`Verdict`].
//!
//! Solver errors inside a criterion count as a failure, with the error as the detail.

use std::time::{Duration, Instant};

use concnls::asymptotics::{self, SuiteOptions, SuiteReport};
use concnls::bosonic::{self, MinimizeOptions, ENERGY_EPS};
use concnls::exec::{self, Execution};
use concnls::fermionic::{self, EstimateOptions, ScfOptions, TwoCenterOptions};
use concnls::model::{self, ModelParams};
use concnls::shoot::{self, ShootOptions};
use concnls::Result;

/// Regression value of `λ_c` for `d = 3`, `q = 2`, `r = 4/3`, `α = 1` on the
/// default minimizer grid.
pub const LAMBDA_C: f64 = 21.8958;

#[derive(Debug, Clone)]
pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Verdict { pass, detail }
    }
}

pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    /// Wall-clock budget; reported, not enforced.
    pub budget: Duration,
    pub run: fn() -> Result<Verdict>,
}

pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl Criterion {
    pub fn evaluate(&self) -> Outcome {
        let t = Instant::now();
        let (pass, detail) = match (self.run)() {
            Ok(v) => (v.pass, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        Outcome { id: self.id, name: self.name, pass, detail, elapsed: t.elapsed(), budget: self.budget }
    }
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {} ({:.1} s of {} s): {}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.detail
        )
    }
}

const fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

pub const CRITERIA: [Criterion; 10] = [
    Criterion { id: 1, name: "branch identities", budget: secs(1), run: branch_identities },
    Criterion { id: 2, name: "Aubin-Talenti oracle", budget: secs(10), run: aubin_talenti },
    Criterion { id: 3, name: "Pohozaev residual across a mu scan", budget: secs(60), run: pohozaev_scan },
    Criterion { id: 4, name: "subcritical exactness", budget: secs(60), run: subcritical },
    Criterion { id: 5, name: "mu to infinity", budget: secs(120), run: mu_infinity },
    Criterion { id: 6, name: "scaling laws", budget: secs(120), run: scaling },
    Criterion { id: 7, name: "critical mass bisection", budget: secs(300), run: critical_mass },
    Criterion { id: 8, name: "fermionic binding", budget: secs(600), run: fermionic_binding },
    Criterion { id: 9, name: "SCF structure", budget: secs(300), run: scf_structure },
    Criterion { id: 10, name: "Yukawa convolution identity", budget: secs(10), run: yukawa },
];

fn base() -> ModelParams {
    ModelParams::new(3, 2.0, 4.0 / 3.0, 1.0).expect("valid parameters")
}

fn fermi_family() -> ModelParams {
    ModelParams::new(3, 1.8, 1.4, 1.0).expect("valid parameters")
}

fn record<'a>(rep: &'a SuiteReport, prefix: &str) -> Option<&'a asymptotics::CheckRecord> {
    rep.records.iter().find(|r| r.name.starts_with(prefix))
}

fn failed(rep: &SuiteReport) -> Vec<&str> {
    rep.records.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect()
}

/// `F`, `F′`, `F″` agree across `t = 1`, and the constants satisfy the
/// matching conditions.
pub fn branch_identities() -> Result<Verdict> {
    let p = base();
    let below = 1.0 - 1e-15;
    let jumps = [
        (model::f_alpha(&p, below)? - model::f_alpha(&p, 1.0)?).abs(),
        (model::f_alpha_prime(&p, below)? - model::f_alpha_prime(&p, 1.0)?).abs(),
        (model::f_alpha_second(&p, below)? - model::f_alpha_second(&p, 1.0)?).abs(),
        (-p.a_const + p.b_const - p.c_const + 1.0).abs(),
        (p.b_const - p.c_const * p.r + p.q).abs(),
        (p.c_const * p.r * (p.r - 1.0) - p.q * (p.q - 1.0)).abs(),
    ];
    let worst = jumps.iter().copied().fold(0.0, f64::max);
    Ok(Verdict::new(worst <= 1e-12, format!("largest mismatch {worst:.2e} (tol 1e-12)")))
}

/// Critical zero-mass shot from height 1 against `(1+r²)^{-1/2}`.
pub fn aubin_talenti() -> Result<Verdict> {
    let p = ModelParams::new(3, 3.0, 1.4, 1.0)?;
    let o = ShootOptions { n: 40000, r_max: Some(20.0), ..Default::default() };
    let s = shoot::solve_zero_mass(&p, Some(1.0), &o)?;
    let err = s.profile.grid.nodes.iter().zip(&s.profile.values).map(|(&r, &u)| (u - 1.0 / (1.0 + r * r).sqrt()).abs()).fold(0.0, f64::max);
    Ok(Verdict::new(err <= 1e-5, format!("sup error {err:.2e} on [0, 20] (tol 1e-5)")))
}

/// 20 multipliers log-spaced over `[1e-2, 1e4]`.
pub fn pohozaev_scan() -> Result<Verdict> {
    let mus: Vec<f64> = (0..20).map(|k| 10f64.powf(-2.0 + 6.0 * k as f64 / 19.0)).collect();
    let o = ShootOptions::default();
    let states = exec::map(Execution::Parallel, &mus, |&mu| shoot::solve_ground_state(&base(), mu, &o));
    let mut worst: f64 = 0.0;
    for s in states {
        worst = worst.max(s?.pohozaev_residual.abs());
    }
    Ok(Verdict::new(worst <= 1e-6, format!("largest relative residual {worst:.2e} over 20 states (tol 1e-6)")))
}

pub fn subcritical() -> Result<Verdict> {
    let rep = asymptotics::run_subcritical_suite(&base(), &SuiteOptions::default())?;
    let worst = rep.records.iter().filter(|r| r.name.starts_with("rescaling sup error")).map(|r| r.measured).fold(0.0, f64::max);
    let n = rep.records.iter().filter(|r| r.name.starts_with("rescaling sup error")).count();
    let slope = record(&rep, "mass exponent, two-point").map_or(f64::NAN, |r| r.measured);
    let pass = rep.pass && n >= 3 && worst <= 1e-5 && (slope + 0.5).abs() <= 0.01;
    Ok(Verdict::new(
        pass,
        format!("rescaling sup {worst:.2e} at {n} multipliers, mass exponent {slope:.5}, failed checks {:?}", failed(&rep)),
    ))
}

pub fn mu_infinity() -> Result<Verdict> {
    let rep = asymptotics::run_mu_infinity_suite(&base(), &SuiteOptions::default())?;
    let slope = record(&rep, "mass exponent on [1e2, 1e4], two-point").map_or(f64::NAN, |r| r.measured);
    let dists: Vec<bool> = rep.records.iter().filter(|r| r.name.starts_with("distance to Q decreases")).map(|r| r.pass).collect();
    let pass = rep.pass && (slope - 1.5).abs() <= 0.075 && dists.len() >= 3 && dists.iter().all(|&x| x);
    Ok(Verdict::new(
        pass,
        format!("mass exponent {slope:.5}, {} decade steps of the distance to Q, failed checks {:?}", dists.len(), failed(&rep)),
    ))
}

pub fn scaling() -> Result<Verdict> {
    let rep = asymptotics::run_scaling_suite(&base(), &SuiteOptions::default())?;
    let worst =
        rep.records.iter().filter(|r| r.tolerance == 1e-3).map(|r| (r.measured - r.expected).abs() / r.expected.abs()).fold(0.0, f64::max);
    Ok(Verdict::new(rep.pass, format!("largest relative route disagreement {worst:.2e}, failed checks {:?}", failed(&rep))))
}

/// Bisection to 1e-3, regression against [`LAMBDA_C`], concavity of `J₁`
/// along the scan and stability under doubling the grid.
pub fn critical_mass() -> Result<Verdict> {
    let p = base();
    let o = MinimizeOptions::default();
    let scan = bosonic::find_lambda_c(&p, [10.0, 40.0], 1e-3, &o)?;
    let width = scan.bracket[1] - scan.bracket[0];
    let drift = (scan.estimate - LAMBDA_C).abs();
    let lambdas: Vec<f64> = (0..14).map(|k| 14.0 + 2.0 * k as f64).collect();
    let rs = bosonic::scan(&p, &lambdas, &o)?;
    let second = rs.windows(3).map(|w| w[0].energy - 2.0 * w[1].energy + w[2].energy).fold(f64::NEG_INFINITY, f64::max);
    let monotone = rs.windows(2).all(|w| w[1].energy <= w[0].energy + ENERGY_EPS);
    let fine = MinimizeOptions { n: 2 * o.n, ..o.clone() };
    let refined = bosonic::find_lambda_c(&p, [10.0, 40.0], 1e-3, &fine)?;
    let rel = (refined.estimate - scan.estimate).abs() / scan.estimate;
    let pass = width <= 1e-3 && drift <= 1e-3 && second <= 1e-6 && monotone && rel <= 5e-3;
    Ok(Verdict::new(
        pass,
        format!(
            "lambda_c {:.5} (fixture {LAMBDA_C}), bracket {width:.1e}, max second difference {second:.2e}, \
             n = {} gives {:.5} ({:.2e} relative)",
            scan.estimate, fine.n, refined.estimate, rel
        ),
    ))
}

/// Two-center margin and attraction decay at `α_c⁽¹⁾`, then the `N = 2`
/// threshold bisection just below it.
pub fn fermionic_binding() -> Result<Verdict> {
    let fam = fermi_family();
    let orb = fermionic::critical_orbital(&fam, &ShootOptions::default())?;
    let alpha_c1 = orb.params.alpha;
    // The same relation with λ_c from the finite-volume minimizer.
    let lc = bosonic::find_lambda_c(&fam, [20.0, 35.0], 1e-3, &MinimizeOptions::default())?.estimate;
    let alpha_fv = model::alpha_critical(&fam, lc, 1.0);
    let fv_err = ((alpha_fv - alpha_c1) / alpha_c1).abs();
    let k = orb.mu.sqrt();
    let rs: Vec<f64> = [60.0, 80.0, 100.0, 120.0, 140.0, 160.0].iter().map(|x| x / k).collect();
    let scan = fermionic::two_center_scan(&orb, &rs, &TwoCenterOptions::default())?;
    let best = scan.states.iter().map(|s| s.margin).fold(f64::NEG_INFINITY, f64::max);
    let rate = scan.attraction_fit.as_ref().map_or(f64::NAN, |f| f.rate);
    let rate_err = (rate / (fam.q * k) - 1.0).abs();

    let tol = 1e-10 * alpha_c1;
    let opts = EstimateOptions { always_scf: false, ..Default::default() };
    let bis = fermionic::find_alpha_c(&fam, 2, [alpha_c1 * (1.0 - 1e-5), alpha_c1], tol, &opts)?;
    let gap = alpha_c1 - bis.estimate;
    let pass = fv_err <= 1e-3 && best > 0.0 && rate_err <= 0.10 && gap > tol;
    Ok(Verdict::new(
        pass,
        format!(
            "alpha_c1 {alpha_c1:.10e} (minimizer route {fv_err:.1e} relative), best margin {best:.3e}, attraction rate {rate:.5} vs q sqrt(mu) {:.5}, \
             alpha_c2 {:.10e} ({:.3e} below, tol {tol:.1e})",
            fam.q * k,
            bis.estimate,
            gap / alpha_c1
        ),
    ))
}

/// `N = 2` SCF in the binding regime: integral occupations and a positive
/// Fermi gap; `N = 1` SCF against the bosonic minimizer at mass one.
pub fn scf_structure() -> Result<Verdict> {
    let fam = fermi_family();
    let alpha_c1 = fermionic::critical_orbital(&fam, &ShootOptions::default())?.params.alpha;
    let p = fam.with_alpha(20.0 * alpha_c1)?;
    let opts = ScfOptions { n: 2000, r_max: 20.0, ..Default::default() };
    let two = fermionic::scf(&p, 2, &opts)?;
    let one = fermionic::scf(&p, 1, &opts)?;
    let pair = model::rescale_alpha_to_beta(&p);
    let mo = MinimizeOptions { n: opts.n, r_max: opts.r_max, beta: pair.beta, ..Default::default() };
    let jb = pair.energy_factor * bosonic::minimize(&p.with_alpha(1.0)?, 1.0, &mo)?.energy;
    let rel = ((one.energy - jb) / jb).abs();
    let occ: Vec<String> = two.levels.iter().filter(|l| l.occupation > 0.0).map(|l| format!("l={} {:.4}", l.l, l.occupation)).collect();
    let pass = two.integral_occupations && two.gap > 0.0 && rel <= 1e-4;
    Ok(Verdict::new(
        pass,
        format!(
            "N=2 occupations [{}], integral {}, gap {:.3e}; N=1 vs bosonic {rel:.2e} (tol 1e-4)",
            occ.join(", "),
            two.integral_occupations,
            two.gap
        ),
    ))
}

pub fn yukawa() -> Result<Verdict> {
    let rep = fermionic::yukawa_conv_identity_check(1.0, 3.0)?;
    Ok(Verdict::new(
        rep.max_rel_err <= 1e-3,
        format!("largest relative error {:.2e} over {} radii in [0.5, 10] (tol 1e-3)", rep.max_rel_err, rep.samples.len()),
    ))
}
