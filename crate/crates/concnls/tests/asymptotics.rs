use concnls::asymptotics::{self, SuiteOptions, SuiteReport, SUITES};
use concnls::{Error, ModelParams};

fn base() -> ModelParams {
    ModelParams::new(3, 2.0, 4.0 / 3.0, 1.0).unwrap()
}

fn check(rep: &SuiteReport) {
    assert!(!rep.records.is_empty());
    assert_eq!(rep.pass, rep.records.iter().all(|r| r.pass));
    assert!(rep.records.iter().all(|r| !r.anchor.is_empty()));
    assert!(rep.pass, "{}", rep.table());
}

#[test]
fn subcritical_suite_passes() {
    let rep = asymptotics::run_subcritical_suite(&base(), &SuiteOptions::default()).unwrap();
    check(&rep);
    let r = rep.records.iter().find(|r| r.name == "mass exponent, two-point").unwrap();
    assert!((r.measured + 0.5).abs() <= 0.01, "{}", r.measured);
}

#[test]
fn supercritical_suite_passes() {
    let p = ModelParams::new(3, 3.5, 1.4, 1.0).unwrap();
    check(&asymptotics::run_supercritical_suite(&p, &SuiteOptions::default()).unwrap());
}

#[test]
fn critical_suite_passes() {
    let p = ModelParams::new(3, 3.0, 1.4, 1.0).unwrap();
    check(&asymptotics::run_critical_suite(&p, &SuiteOptions::default()).unwrap());
}

#[test]
fn mu_infinity_suite_passes() {
    let rep = asymptotics::run_mu_infinity_suite(&base(), &SuiteOptions::default()).unwrap();
    check(&rep);
    let r = rep.records.iter().find(|r| r.name.starts_with("mass exponent on [1e2, 1e4], two-point")).unwrap();
    assert!((r.measured - 1.5).abs() <= 0.075, "{}", r.measured);
}

#[test]
fn scaling_suite_passes() {
    check(&asymptotics::run_scaling_suite(&base(), &SuiteOptions::default()).unwrap());
}

#[test]
fn suites_reject_the_wrong_regime() {
    let o = SuiteOptions::default();
    let sup = ModelParams::new(3, 3.5, 1.4, 1.0).unwrap();
    assert!(matches!(asymptotics::run_subcritical_suite(&sup, &o), Err(Error::InvalidParams(_))));
    assert!(matches!(asymptotics::run_supercritical_suite(&base(), &o), Err(Error::InvalidParams(_))));
    assert!(matches!(asymptotics::run_critical_suite(&sup, &o), Err(Error::InvalidParams(_))));
    assert!(matches!(asymptotics::run_suite("nope", &base(), &o), Err(Error::InvalidParams(_))));
}

#[test]
fn dispatch_is_deterministic() {
    let o = SuiteOptions::default();
    assert!(SUITES.contains(&"subcritical"));
    let a = asymptotics::run_suite("subcritical", &base(), &o).unwrap();
    let b = asymptotics::run_suite("subcritical", &base(), &o).unwrap();
    assert_eq!(a, b);
    let json = serde_json::to_string(&a).unwrap();
    let back: SuiteReport = serde_json::from_str(&json).unwrap();
    assert_eq!(a, back);
}

#[test]
fn h1_distance_of_a_dilation() {
    // |grad (e^{-r} - e^{-2r})|^2 over R^3 = 4 pi (1/4 - 8/27 + 1/8) in closed form.
    let d = asymptotics::h1_distance(3, 40.0, 40_000, |r| (-r).exp(), |r| (-2.0 * r).exp()).unwrap();
    let exact = (4.0 * std::f64::consts::PI * (0.25 - 8.0 / 27.0 + 0.125)).sqrt();
    assert!((d - exact).abs() <= 1e-5 * exact, "{d} vs {exact}");
}
