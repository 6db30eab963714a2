use std::f64::consts::PI;

use concnls::exec::Execution;
use concnls::grid::{self, CylGrid, RadialGrid, RadialProfile};
use proptest::prelude::*;

fn ball_volume(d: usize, r: f64) -> f64 {
    grid::sphere_area(d) * r.powi(d as i32) / d as f64
}

#[test]
fn gaussian_integrals() {
    let g = RadialGrid::new(3, 30.0, 3000).unwrap();
    let u = g.sample(|r| (-r * r).exp());
    let i = u.integrate(|x| x);
    assert!((i / PI.powf(1.5) - 1.0).abs() <= 1e-4, "{i}");
    let v = g.sample(|r| (-0.5 * r * r).exp());
    assert!((v.l2_sq() / PI.powf(1.5) - 1.0).abs() <= 1e-4);
    assert_eq!(u.integrate(|_| 0.0), 0.0);
}

#[test]
fn quadrature_error_is_second_order() {
    // Gaussian e^{-r^2} on [0, 8]: halving h cuts the error at least fourfold.
    let err = |n: usize| {
        let g = RadialGrid::new(3, 8.0, n).unwrap();
        (g.sample(|r| (-r * r).exp()).integrate(|x| x) - PI.powf(1.5)).abs()
    };
    let ratio = err(100) / err(200);
    assert!(ratio >= 3.8, "{ratio}");
}

#[test]
fn ball_volumes() {
    for d in 1..=5 {
        let g = RadialGrid::new(d, 3.0, 3000).unwrap();
        let v = g.sample(|_| 1.0).integrate(|x| x);
        assert!((v / ball_volume(d, 3.0) - 1.0).abs() <= 1e-4, "d={d}: {v}");
    }
}

#[test]
fn laplacian_of_polynomials() {
    let g = RadialGrid::new(3, 5.0, 500).unwrap();
    let ones = g.sample(|_| 1.0).radial_laplacian();
    assert!(ones.values.iter().all(|&x| x == 0.0));
    // The flux form is off by h^2/(2r^2) at r > 0, exact at the origin.
    let err = |n: usize| {
        let g = RadialGrid::new(3, 5.0, n).unwrap();
        let sq = g.sample(|r| r * r).radial_laplacian();
        assert!((sq.values[0] - 6.0).abs() < 1e-12);
        (0..n).filter(|&i| g.nodes[i] >= 1.0).map(|i| (sq.values[i] - 6.0).abs()).fold(0.0, f64::max)
    };
    let (e1, e2) = (err(500), err(1000));
    assert!(e1 <= 0.5 * 0.01f64.powi(2) + 1e-9, "{e1}");
    assert!((e1 / e2 - 4.0).abs() < 0.05, "{}", e1 / e2);
}

#[test]
fn emden_fowler_residual_of_the_sobolev_profile() {
    let res = |n: usize| {
        let g = RadialGrid::new(3, 10.0, n).unwrap();
        let s = g.sample(|r| 1.0 / (1.0 + r * r).sqrt());
        let lap = s.radial_laplacian();
        (0..n).filter(|&i| g.nodes[i] >= 1.0).map(|i| (lap.values[i] + 3.0 * s.values[i].powi(5)).abs()).fold(0.0, f64::max)
    };
    let (e1, e2) = (res(500), res(1000));
    assert!((e1 / e2 - 4.0).abs() < 0.1, "{e1} {e2}");
}

#[test]
fn summation_by_parts() {
    let g = RadialGrid::new(3, 30.0, 3000).unwrap();
    let u = g.sample(|r| (-r * r / 2.0).exp());
    let lap = u.radial_laplacian();
    let pairing: f64 = g.weights.iter().zip(&u.values).zip(&lap.values).map(|((w, a), b)| w * a * b).sum();
    assert!((pairing + u.grad_l2_sq()).abs() <= 1e-10 * u.grad_l2_sq(), "{pairing} {}", u.grad_l2_sq());
}

#[test]
fn tail_fits() {
    let g = RadialGrid::new(3, 12.0, 1200).unwrap();
    let f = g.sample(|r| (-2.0 * r).exp() / r.max(1e-3)).fit_exponential_tail(5.0, 10.0).unwrap();
    assert!((f.rate - 2.0).abs() <= 0.02 && (f.power - 1.0).abs() <= 0.01, "{f:?}");
    let f = g.sample(|r| 3.0 * (-0.7 * r).exp()).fit_exponential_tail(5.0, 10.0).unwrap();
    assert!(f.power.abs() < 1e-8 && (f.amplitude - 3.0).abs() < 1e-8);
    let bad = g.sample(|r| 5.0 - r);
    assert!(bad.fit_exponential_tail(4.0, 6.0).is_err());
}

#[test]
fn csv_export() {
    let g = RadialGrid::new(3, 1.0, 4).unwrap();
    let mut out = Vec::new();
    g.sample(|r| 1.0 - r).write_csv_to(&mut out).unwrap();
    let s = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "r,u");
    assert_eq!(lines.len(), 6);
    let info = serde_json::to_value(g.info()).unwrap();
    assert_eq!(info["scheme"], "uniform");
    assert_eq!(info["n"], 4);
}

#[test]
fn profile_validation() {
    let g = RadialGrid::new(3, 1.0, 4).unwrap();
    assert!(RadialProfile::new(g.clone(), vec![0.0; 3]).is_err());
    assert!(RadialProfile::new(g.clone(), vec![f64::NAN; 5]).is_err());
    assert!(RadialGrid::new(3, 1.0, 2).is_err());
    assert!(RadialGrid::new(3, -1.0, 10).is_err());
}

#[test]
fn cylindrical_gaussian() {
    let c = CylGrid::new(-8.0, 8.0, 800, 8.0, 400).unwrap();
    for exec in [Execution::Sequential, Execution::Parallel] {
        let v = c.integrate(exec, |z, s| (-(z * z + s * s)).exp());
        assert!((v / PI.powf(1.5) - 1.0).abs() <= 1e-4, "{v}");
    }
    let [a, b] = c.integrate_many(Execution::Parallel, |z, s, out: &mut [f64; 2]| {
        out[0] = (-(z * z + s * s)).exp();
        out[1] = 1.0;
    });
    assert!((a / PI.powf(1.5) - 1.0).abs() <= 1e-4);
    assert!((b / (PI * 64.0 * 16.0) - 1.0).abs() <= 1e-12);
    assert!(CylGrid::from_edges(&[0.0, 1.0], &[0.5, 1.0]).is_err());
    let e = CylGrid::join(&[CylGrid::edges(0.0, 1.0, 0.3), CylGrid::edges(1.0, 2.0, 0.5)]);
    assert_eq!(e.len(), 7);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weights_nonnegative_and_nodes_increasing(d in 1usize..=6, r_max in 0.1f64..100.0, n in 3usize..400) {
        let g = RadialGrid::new(d, r_max, n).unwrap();
        prop_assert!(g.weights.iter().all(|&w| w >= 0.0));
        prop_assert!(g.nodes.windows(2).all(|w| w[1] > w[0]));
        prop_assert_eq!(g.nodes[0], 0.0);
        prop_assert!((g.nodes[n] - r_max).abs() <= 1e-12 * r_max);
    }

    #[test]
    fn dilation_preserves_mass(d in 1usize..=4, s in 0.5f64..2.0) {
        let g = RadialGrid::new(d, 40.0, 4000).unwrap();
        let u = g.sample(|r| (-r * r / 2.0).exp());
        let us = g.sample(|r| s.powf(0.5 * d as f64) * (-(s * r).powi(2) / 2.0).exp());
        prop_assert!((us.l2_sq() / u.l2_sq() - 1.0).abs() <= 1e-4);
        prop_assert!((us.grad_l2_sq() / (s * s * u.grad_l2_sq()) - 1.0).abs() <= 1e-4);
    }

    #[test]
    fn norms_nonnegative(vals in prop::collection::vec(-5.0f64..5.0, 10)) {
        let g = RadialGrid::new(3, 2.0, 9).unwrap();
        let u = RadialProfile::new(g, vals.clone()).unwrap();
        let n = u.norms();
        prop_assert!(n.l2_sq >= 0.0 && n.grad_l2_sq >= 0.0 && u.lp(3.0) >= 0.0);
        prop_assert_eq!(n.l2_sq == 0.0, vals.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn interpolation_is_exact_on_cubics(a in -2.0f64..2.0, b in -2.0f64..2.0, r in 0.0f64..4.0) {
        // Even cubic-free polynomials survive the mirror about the origin.
        let g = RadialGrid::new(3, 5.0, 50).unwrap();
        let u = g.sample(|x| a + b * x * x);
        prop_assert!((u.interp(r) - (a + b * r * r)).abs() <= 1e-10);
    }

    #[test]
    fn tail_fit_recovers_parameters(rate in 0.1f64..3.0, power in -1.0f64..2.0, amp in 0.1f64..10.0) {
        let xs: Vec<f64> = (0..50).map(|i| 5.0 + 0.1 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| amp * x.powf(-power) * (-rate * x).exp()).collect();
        let f = grid::fit_exp_power(&xs, &ys).unwrap();
        prop_assert!((f.rate - rate).abs() <= 1e-8 && (f.power - power).abs() <= 1e-7);
    }
}
