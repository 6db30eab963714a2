use concnls::bosonic::{self, Diagnostic, MinimizeOptions, ENERGY_EPS};
use concnls::grid::{RadialGrid, RadialProfile};
use concnls::model::{self, ModelParams};
use concnls::shoot::{self, ShootOptions};

/// Regression value at the default grid (n = 3000, r_max = 30), found by
/// bisection to 1e-4 and confirmed on n = 6000 and r_max = 40.
const LAMBDA_C: f64 = 21.8958;

fn params() -> ModelParams {
    ModelParams::new(3, 2.0, 4.0 / 3.0, 1.0).unwrap()
}

#[test]
fn energy_of_zero_is_zero() {
    let g = RadialGrid::new(3, 20.0, 500).unwrap();
    assert_eq!(bosonic::energy(&params(), &g.sample(|_| 0.0)), 0.0);
}

#[test]
fn energy_matches_ground_state_quadrature() {
    let p = params();
    let gs = shoot::solve_ground_state(&p, 2.0, &ShootOptions::default()).unwrap();
    let e = bosonic::energy(&p, &gs.profile);
    assert!((e - gs.energy_discrete).abs() <= 1e-10 * e.abs(), "{e} vs {}", gs.energy_discrete);
}

#[test]
fn energy_dilation_identity() {
    let p = params();
    let (l, s) = (2.5_f64, 1.7_f64);
    let v = |r: f64| 3.0 * (-r * r / 2.0).exp() / (1.0 + r * r);
    let n = 4000;
    let gv = RadialGrid::new(3, 20.0, n).unwrap();
    // Same node count on [0, 20/s] so that s·r hits the nodes of gv.
    let gu = RadialGrid::new(3, 20.0 / s, n).unwrap();
    let u = gu.sample(|r| l.sqrt() * s.powf(1.5) * v(s * r));
    let vp = gv.sample(v);
    let lhs = bosonic::energy(&p, &u);
    let rhs = l * s * s * vp.grad_l2_sq() + s.powi(-3) * vp.integrate(|x| model::f_alpha(&p, l * s.powi(3) * x * x).unwrap());
    assert!((lhs - rhs).abs() <= 1e-8 * lhs.abs(), "{lhs} vs {rhs}");
}

#[test]
fn minimizer_above_critical_mass_solves_euler_lagrange() {
    let p = params();
    let opts = MinimizeOptions { n: 12000, r_max: 15.0, ..Default::default() };
    let r = bosonic::minimize(&p, 30.0, &opts).unwrap();
    assert_eq!(r.diagnostic, Diagnostic::Converged);
    assert!(r.energy < 0.0);
    assert!(r.gradient_residual <= 1e-6);
    assert!(r.mu >= -1e-8);
    assert!((r.profile.l2_sq() - 30.0).abs() <= 1e-10 * 30.0);
    let gs = shoot::solve_ground_state(&p, r.mu, &ShootOptions::default()).unwrap();
    let sup = r.profile.grid.nodes.iter().zip(&r.profile.values).map(|(&x, &u)| (gs.eval(x) - u).abs()).fold(0.0, f64::max);
    assert!(sup <= 1e-4, "sup {sup:e}");
}

#[test]
fn small_mass_vanishes() {
    let r = bosonic::minimize(&params(), 5.0, &MinimizeOptions::default()).unwrap();
    assert_eq!(r.diagnostic, Diagnostic::Vanishing);
    assert!(!r.converged);
    assert!(r.energy.abs() <= 1e-8);
}

#[test]
fn flow_energy_never_increases() {
    for lambda in [5.0, 25.0, 40.0] {
        let r = bosonic::minimize(&params(), lambda, &MinimizeOptions::default()).unwrap();
        for w in r.energy_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0), "lambda {lambda}: {} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn critical_mass_regression_and_concavity() {
    let p = params();
    let opts = MinimizeOptions::default();
    let scan = bosonic::find_lambda_c(&p, [10.0, 40.0], 1e-3, &opts).unwrap();
    assert!(scan.estimate > 0.0);
    assert!(scan.bracket[1] - scan.bracket[0] <= 1e-3);
    assert!((scan.estimate - LAMBDA_C).abs() <= 1e-3, "{}", scan.estimate);
    for rec in &scan.records {
        let below = rec.lambda <= scan.bracket[0];
        assert_eq!(below, rec.energy >= -ENERGY_EPS, "{rec:?}");
    }
    let lambdas: Vec<f64> = (0..14).map(|k| 14.0 + 2.0 * k as f64).collect();
    let rs = bosonic::scan(&p, &lambdas, &opts).unwrap();
    for w in rs.windows(3) {
        let second = w[0].energy - 2.0 * w[1].energy + w[2].energy;
        assert!(second <= 1e-6, "second difference {second} at {}", w[1].lambda);
        assert!(w[2].energy <= w[1].energy + ENERGY_EPS);
    }
}

#[test]
fn bracket_is_validated() {
    let p = params();
    let e = bosonic::find_lambda_c(&p, [5.0, 10.0], 1e-3, &MinimizeOptions::default()).unwrap_err();
    assert_eq!(e.kind(), "BracketError");
}

#[test]
fn j_alpha_at_unit_threshold_is_minimize() {
    let p = params();
    let o = MinimizeOptions::default();
    assert_eq!(bosonic::j_alpha(&p, 30.0, &o).unwrap(), bosonic::minimize(&p, 30.0, &o).unwrap().energy);
}

#[test]
fn three_routes_to_j_alpha_agree() {
    let p = params();
    let o = MinimizeOptions::default();
    for (a, l) in [(4.0_f64, 20.0), (0.5, 60.0), (2.0, 25.0)] {
        let pa = p.with_alpha(a).unwrap();
        let mapped = bosonic::j_alpha(&pa, l, &o).unwrap();
        let coupled = bosonic::j_alpha_coupled(&pa, l, &o).unwrap();
        // A grid that is not the image of the default one under the dilation.
        let od = MinimizeOptions { n: 5000, r_max: 20.0 / a.sqrt(), ..o.clone() };
        let direct = bosonic::minimize(&pa, l, &od).unwrap().energy;
        assert!(mapped < 0.0);
        for other in [coupled, direct] {
            assert!((other - mapped).abs() <= 1e-3 * mapped.abs(), "alpha {a}: {mapped} vs {other}");
        }
    }
}

#[test]
fn critical_threshold_from_bisection_in_alpha() {
    let p = params();
    let o = MinimizeOptions::default();
    let lambda = 30.0;
    let predicted = model::alpha_critical(&p, LAMBDA_C, lambda);
    let (mut lo, mut hi) = (0.3, 1.0);
    while hi - lo > 1e-3 * predicted {
        let mid = 0.5 * (lo + hi);
        let j = bosonic::j_alpha_coupled(&p.with_alpha(mid).unwrap(), lambda, &o).unwrap();
        if j < -ENERGY_EPS {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let found = 0.5 * (lo + hi);
    assert!((found - predicted).abs() <= 3e-3 * predicted, "{found} vs {predicted}");
}

#[test]
fn weak_binding() {
    let p = params();
    let o = MinimizeOptions::default();
    let below = bosonic::weak_binding_check(&p, 8.0, 8.0, &o).unwrap();
    assert!(below.pass);
    assert_eq!((below.j1, below.j2), (0.0, 0.0));
    let above = bosonic::weak_binding_check(&p, 30.0, 30.0, &o).unwrap();
    assert!(above.pass && above.margin > 1.0, "{above:?}");
}

#[test]
fn gagliardo_nirenberg_floor() {
    let p = params();
    let c = bosonic::gn_constant(&p, &ShootOptions::default()).unwrap();
    // A Gaussian trial can only undershoot the optimal constant.
    let g = RadialGrid::new(3, 20.0, 4000).unwrap();
    let gauss: RadialProfile = g.sample(|r| (-r * r / 2.0).exp());
    let (a, b) = (3.0 * (p.r - 1.0), 2.0 * p.r - 3.0 * (p.r - 1.0));
    let trial = gauss.lp(2.0 * p.r) / (gauss.grad_l2_sq().powf(0.5 * a) * gauss.l2_sq().powf(0.5 * b));
    assert!(trial < c);
    let lambdas = [25.0, 40.0, 80.0];
    let rs = bosonic::scan(&p, &lambdas, &MinimizeOptions::default()).unwrap();
    for r in rs {
        assert!(r.energy >= bosonic::gn_floor(&p, r.lambda, c), "{} {}", r.lambda, r.energy);
    }
}
