use concnls::bosonic::{self, MinimizeOptions};
use concnls::fermionic::{self, EstimateOptions, ScfOptions, TwoCenterOptions};
use concnls::model::{self, ModelParams};
use concnls::shoot::ShootOptions;
use concnls::Error;

/// `λ_c⁵` with `λ_c = 27.57004` from the shooting branch (`𝓕₁ = 0`) at the
/// default shooting grid; the finite-volume bisection gives 27.5699 at
/// n = 3000 and 27.570006 at n = 6000.
const ALPHA_C1: f64 = 1.5928944e7;

fn family() -> ModelParams {
    ModelParams::new(3, 1.8, 1.4, 1.0).unwrap()
}

fn light_scf() -> ScfOptions {
    ScfOptions { n: 1500, r_max: 15.0, start_peaks: vec![4.0, 16.0], ..Default::default() }
}

#[test]
fn single_particle_scf_matches_bosonic_minimizer() {
    let p = family().with_alpha(20.0 * ALPHA_C1).unwrap();
    let opts = ScfOptions { n: 2000, r_max: 20.0, ..Default::default() };
    let s = fermionic::scf(&p, 1, &opts).unwrap();
    // Same grid at threshold 1 with coupling β.
    let pair = model::rescale_alpha_to_beta(&p);
    let mo = MinimizeOptions { n: 2000, r_max: 20.0, beta: pair.beta, ..Default::default() };
    let b = bosonic::minimize(&p.with_alpha(1.0).unwrap(), 1.0, &mo).unwrap();
    let jb = pair.energy_factor * b.energy;
    assert!(jb < 0.0);
    assert!(((s.energy - jb) / jb).abs() <= 1e-4, "scf {} bosonic {jb}", s.energy);
}

#[test]
fn scf_state_invariants() {
    let p = family().with_alpha(20.0 * ALPHA_C1).unwrap();
    let s = fermionic::scf(&p, 2, &light_scf()).unwrap();
    let total: f64 = s.levels.iter().map(|l| l.occupation).sum();
    assert!((total - 2.0).abs() < 1e-12);
    for l in &s.levels {
        assert!(l.occupation >= 0.0 && l.occupation <= (2 * l.l + 1) as f64);
    }
    assert!(s.density.values.iter().all(|&x| x >= 0.0));
    assert!(s.density.l2_sq() > 0.0);
    let n_int = s.density.integrate(|x| x);
    assert!((n_int - 2.0).abs() < 1e-8, "{n_int}");
    // Damped steps never raise the energy.
    for w in s.history.windows(2) {
        assert!(w[1].energy <= w[0].energy + 1e-12 * w[0].energy.abs(), "{:?}", w);
    }
    assert!(s.mu.len() > 2 && s.mu.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn small_alpha_has_no_bound_state() {
    let p = family().with_alpha(1e6).unwrap();
    match fermionic::scf(&p, 2, &light_scf()) {
        Err(Error::NoBoundState(_)) => {}
        other => panic!("expected NoBoundState, got {other:?}"),
    }
    let opts = EstimateOptions { scf: light_scf(), ..Default::default() };
    let e = fermionic::energy_estimate(&p, 2, &opts).unwrap();
    assert_eq!(e.energy, 0.0);
    assert_eq!(e.source, "none");
    let r = fermionic::binding_report(&p, 2, &opts).unwrap();
    assert!(!r.binding_evidence);
    assert_eq!(r.verdict, "no binding evidence");
    assert!(r.inequalities.iter().all(|q| q.lhs == 0.0 && q.rhs == 0.0));
}

#[test]
fn scf_rejects_other_dimensions() {
    let p = ModelParams::new(4, 1.8, 1.4, 1.0).unwrap();
    assert!(matches!(fermionic::scf(&p, 1, &ScfOptions::default()), Err(Error::InvalidParams(_))));
    let p = family();
    assert!(matches!(fermionic::scf(&p, 0, &ScfOptions::default()), Err(Error::InvalidParams(_))));
}

#[test]
fn mixed_states_lie_above_the_chord() {
    let p = family().with_alpha(20.0 * ALPHA_C1).unwrap();
    let a = fermionic::scf(&p, 1, &light_scf()).unwrap();
    let b = fermionic::scf(&p, 2, &light_scf()).unwrap();
    let ea = fermionic::mixed_energy(&a, &b, 0.0).unwrap();
    assert!((ea - a.energy).abs() <= 1e-10 * a.energy.abs());
    for t in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let e = fermionic::mixed_energy(&a, &b, t).unwrap();
        let chord = (1.0 - t) * a.energy + t * b.energy;
        assert!(e >= chord - 1e-12 * chord.abs(), "t={t}: {e} < {chord}");
    }
}

#[test]
fn energy_non_increasing_in_alpha() {
    let mut last = f64::INFINITY;
    for m in [5.0, 10.0, 20.0, 40.0] {
        let p = family().with_alpha(m * ALPHA_C1).unwrap();
        let e = fermionic::scf(&p, 1, &light_scf()).unwrap().energy;
        assert!(e <= last, "alpha = {m} alpha_c: {e} > {last}");
        last = e;
    }
}

#[test]
fn lowdin_orthonormalizes() {
    for eps in [0.0, 1e-300, 1e-20, 1e-8, 0.01, 0.3, 0.9, 0.999, -0.5] {
        let (s, res) = fermionic::lowdin(eps).unwrap();
        assert!(res <= 1e-12, "eps={eps}: {res}");
        assert_eq!(s[0][0], s[1][1]);
        assert_eq!(s[0][1], s[1][0]);
    }
    assert!(matches!(fermionic::lowdin(1.0), Err(Error::NotPositiveDefinite(_))));
}

#[test]
fn two_center_decay_and_margin() {
    let orb = fermionic::critical_orbital(&family(), &ShootOptions::default()).unwrap();
    assert!(((orb.params.alpha - ALPHA_C1) / ALPHA_C1).abs() < 1e-6, "{}", orb.params.alpha);
    assert_eq!(orb.excess, 0.0);
    let k = orb.mu.sqrt();
    let rs: Vec<f64> = [60.0, 80.0, 100.0, 120.0, 140.0, 160.0].iter().map(|x| x / k).collect();
    let scan = fermionic::two_center_scan(&orb, &rs, &TwoCenterOptions::default()).unwrap();
    for w in scan.states.windows(2) {
        assert!(w[1].overlap < w[0].overlap);
        assert!(w[1].margin < w[0].margin);
    }
    for s in &scan.states {
        assert!(s.overlap > 0.0 && s.overlap < 1.0);
        assert!(s.orthonormality_residual <= 1e-12);
        assert!(s.attraction < 0.0);
        assert!(s.margin > 0.0, "R={}: {}", s.separation, s.margin);
    }
    let b = scan.overlap_fit.unwrap().rate;
    assert!((b / k - 1.0).abs() <= 0.05, "overlap rate {b} vs {k}");
    let b = scan.attraction_fit.unwrap().rate;
    assert!((b / (1.8 * k) - 1.0).abs() <= 0.10, "attraction rate {b} vs {}", 1.8 * k);
}

#[test]
fn two_center_rejects_bad_input() {
    let p = ModelParams::new(3, 1.8, 1.4, 2e7).unwrap();
    let orb = fermionic::mass_one_orbital(&p, &ShootOptions::default()).unwrap();
    assert!(orb.energy < 0.0 && orb.excess == 0.0);
    assert!(matches!(fermionic::two_center_energy(&orb, -1.0, &TwoCenterOptions::default()), Err(Error::Domain(_))));
    // Below the bottom of the branch there is no mass-one critical point.
    let low = family().with_alpha(1e6).unwrap();
    assert!(matches!(fermionic::mass_one_orbital(&low, &ShootOptions::default()), Err(Error::NoBoundState(_))));
}

#[test]
fn orbital_energy_matches_minimizer() {
    let p = ModelParams::new(3, 1.8, 1.4, 2e7).unwrap();
    let orb = fermionic::mass_one_orbital(&p, &ShootOptions::default()).unwrap();
    let j = bosonic::j_alpha(&p, 1.0, &MinimizeOptions::default()).unwrap();
    assert!(((orb.energy - j) / j).abs() < 1e-3, "{} vs {j}", orb.energy);
    let g = concnls::grid::RadialGrid::new(3, 40.0 / orb.mu.sqrt(), 20000).unwrap();
    let u = g.sample(|r| orb.eval(r));
    assert!((u.l2_sq() - 1.0).abs() < 1e-6, "{}", u.l2_sq());
}

#[test]
fn two_particles_bind_just_below_the_single_threshold() {
    let orb = fermionic::critical_orbital(&family(), &ShootOptions::default()).unwrap();
    let p = family().with_alpha(orb.params.alpha * (1.0 - 1e-6)).unwrap();
    let opts = EstimateOptions { scf: light_scf(), ..Default::default() };
    let r = fermionic::binding_report(&p, 2, &opts).unwrap();
    assert_eq!(r.estimates[0].energy, 0.0);
    assert!(r.estimates[1].energy < 0.0);
    assert_eq!(r.estimates[1].source, "two_center");
    assert!(r.binding_evidence, "{r:?}");
    assert!(r.doubling.as_ref().unwrap().holds);
}

#[test]
fn doubling_in_the_binding_regime() {
    let p = family().with_alpha(20.0 * ALPHA_C1).unwrap();
    let opts = EstimateOptions { scf: light_scf(), ..Default::default() };
    let r = fermionic::binding_report(&p, 4, &opts).unwrap();
    let d = r.doubling.unwrap();
    assert_eq!(d.k, 2);
    assert!(d.holds, "{d:?}");
}

#[test]
fn single_particle_threshold_agrees_with_exact_relation() {
    let tol = 1e-4 * ALPHA_C1;
    let scan = fermionic::find_alpha_c(&family(), 1, [0.9 * ALPHA_C1, 1.1 * ALPHA_C1], tol, &EstimateOptions::default()).unwrap();
    let exact = scan.exact_relation.unwrap();
    assert!((scan.estimate - exact).abs() <= tol, "{} vs {exact}", scan.estimate);
    assert!(matches!(
        fermionic::find_alpha_c(&family(), 1, [1.1 * ALPHA_C1, 1.2 * ALPHA_C1], tol, &EstimateOptions::default()),
        Err(Error::BracketError(_))
    ));
}

#[test]
fn yukawa_kernel() {
    let mut last = f64::INFINITY;
    for k in 1..50 {
        let y = fermionic::yukawa(3, 1.3, 0.2 * k as f64).unwrap();
        assert!(y > 0.0 && y < last);
        last = y;
    }
    assert!(matches!(fermionic::yukawa(3, 1.0, 0.0), Err(Error::Domain(_))));
    assert!(matches!(fermionic::yukawa(3, 1.0, -1.0), Err(Error::Domain(_))));
    assert!(matches!(fermionic::yukawa(2, 1.0, 1.0), Err(Error::InvalidParams(_))));
}

#[test]
fn yukawa_convolution_identities() {
    let rep = fermionic::yukawa_conv_identity_check(1.0, 3.0).unwrap();
    assert!(rep.max_rel_err <= 1e-3, "{}", rep.max_rel_err);
    assert!(rep.self_max_rel_err <= 1e-3, "{}", rep.self_max_rel_err);
    assert_eq!(rep.samples.len(), 40);
    assert!(fermionic::yukawa_conv_identity_check(2.0, 2.0).is_err());
}
