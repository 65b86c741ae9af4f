use varinf::verify::{
    compare_covariances, default_prm_battery, prm_moment_check, run_clt_experiment, run_lln_experiment,
    sampling_grid, PrmConfig,
};
use varinf_core::prm::{Rect, StepFunction};
use varinf_core::simulator::{InitMode, Scenario};
use varinf_core::stats::Covariance;
use varinf_core::{DurationLaw, Grid, InfectivityModel, InitialFractions, ModelSet, Variant};

fn sir(beta: f64) -> Scenario {
    let models = if beta > 0.0 {
        ModelSet::from_model(InfectivityModel::constant_markov(beta, 0.2).unwrap()).unwrap()
    } else {
        let silent = InfectivityModel::piecewise_indicator(0.0, DurationLaw::Zero, DurationLaw::Exponential { rate: 0.2 }).unwrap();
        ModelSet::from_model(silent).unwrap()
    };
    Scenario {
        variant: Variant::Sir,
        population: 1000,
        horizon: 10.0,
        delta: 0.02,
        init: InitialFractions { e0: 0.0, i0: if beta > 0.0 { 0.01 } else { 0.0 }, r0: 0.0 },
        models,
        seed: 1,
        replications: 1,
        init_mode: InitMode::Deterministic,
    }
}

fn stat<'a>(r: &'a varinf::report::McReport, name: &str) -> &'a varinf::report::Statistic {
    r.statistics.iter().find(|s| s.name == name).unwrap_or_else(|| panic!("no {name}"))
}

#[test]
fn lln_errors_vanish_without_infection() {
    let r = run_lln_experiment(&sir(0.0), &[100, 400], 10, 3).unwrap();
    assert!(r.pass);
    for s in r.statistics.iter().filter(|s| s.name.starts_with("sup_error")) {
        assert_eq!(s.value, 0.0, "{}", s.name);
    }
}

#[test]
fn lln_errors_decay_like_root_n() {
    // Sup-norm errors are heavy-tailed; 300 replications keep the ratios
    // well inside the band for any seed.
    let r = run_lln_experiment(&sir(0.5), &[1000, 4000, 16000], 300, 11).unwrap();
    assert!(r.pass, "{}", r.to_text());
    let lo = stat(&r, "ratio[I][1000->4000]");
    assert!((1.4..=2.8).contains(&lo.value));
}

#[test]
fn lln_standard_error_shrinks_with_reps() {
    // Four times the replications halves the standard error.
    let a = run_lln_experiment(&sir(0.5), &[2000], 40, 5).unwrap();
    let b = run_lln_experiment(&sir(0.5), &[2000], 160, 5).unwrap();
    let (sa, sb) = (stat(&a, "sup_error[I][N=2000]").se, stat(&b, "sup_error[I][N=2000]").se);
    assert!((sa / sb / 2.0 - 1.0).abs() < 0.3, "{sa} {sb}");
}

#[test]
fn lln_preconditions() {
    assert!(run_lln_experiment(&sir(0.5), &[1000, 4000], 5, 0).is_err());
    assert!(run_lln_experiment(&sir(0.5), &[4000, 1000], 20, 0).is_err());
}

#[test]
fn clt_markov_sir_variances_match() {
    let r = run_clt_experiment(&sir(0.5), 10_000, 2000, &[2.0, 5.0, 10.0], 17).unwrap();
    for t in ["2", "5", "10"] {
        let s = stat(&r, &format!("var[I({t})]"));
        let rel = (s.value - s.reference.unwrap()).abs() / s.reference.unwrap();
        assert!(rel <= 0.15, "I({t}): {} vs {}", s.value, s.reference.unwrap());
    }
    assert_eq!(stat(&r, "prelimit_sum_max_abs").value, 0.0);
    assert!(r.pass, "{}", r.to_text());
}

#[test]
fn clt_preconditions() {
    assert!(run_clt_experiment(&sir(0.5), 1000, 2000, &[2.0], 0).is_err());
    assert!(run_clt_experiment(&sir(0.5), 10_000, 100, &[2.0], 0).is_err());
    assert!(run_clt_experiment(&sir(0.5), 10_000, 2000, &[0.5], 0).is_err());
    assert!(run_clt_experiment(&sir(0.5), 10_000, 2000, &[11.0], 0).is_err());
}

#[test]
fn sampling_grid_coarsens_by_whole_factors() {
    let g = sampling_grid(&Grid::new(0.01, 10.0).unwrap()).unwrap();
    assert_eq!((g.steps(), g.dt()), (500, 0.02));
    let same = Grid::new(0.02, 10.0).unwrap();
    assert_eq!(sampling_grid(&same).unwrap(), same);
    assert!(sampling_grid(&Grid::with_steps(0.01, 1601).unwrap()).is_err());
}

#[test]
fn prm_battery_passes() {
    let r = prm_moment_check(&default_prm_battery(), 100_000, 1).unwrap();
    assert!(r.pass, "{}", r.to_text());
    assert_eq!(stat(&r, "moment[unit]").reference, Some(4.0));
    assert_eq!(stat(&r, "moment[disjoint]").reference, Some(1.0));
}

#[test]
fn prm_zero_integrand_and_draw_floor() {
    let unit = StepFunction::constant(Rect::interval(0.0, 1.0).unwrap(), 1.0);
    let cfg = [PrmConfig { name: "zero".into(), f: unit, g: StepFunction::zero() }];
    let r = prm_moment_check(&cfg, 10_000, 2).unwrap();
    assert_eq!(stat(&r, "moment[zero]").value, 0.0);
    assert!(r.pass);
    assert!(prm_moment_check(&cfg, 999, 2).is_err());
}

fn cov(values: Vec<f64>, se: Vec<f64>) -> Covariance {
    let dim = (values.len() as f64).sqrt() as usize;
    Covariance { dim, mean: vec![0.0; dim], cov: values, se }
}

#[test]
fn covariance_comparison() {
    let a = cov(vec![2.0, 0.5, 0.5, 1.0], vec![0.1; 4]);
    assert_eq!(compare_covariances(&a, &a).unwrap().max_abs_z, 0.0);
    let mut b = a.clone();
    b.cov[3] += 10.0 * 0.1;
    let c = compare_covariances(&a, &b).unwrap();
    assert!((c.max_abs_z - 7.0710678).abs() < 1e-6);
    let mut sym = a.clone();
    sym.cov[1] += 0.3;
    sym.cov[2] += 0.3;
    let z = compare_covariances(&a, &sym).unwrap().z;
    assert_eq!(z[1], z[2]);
    assert!(compare_covariances(&a, &cov(vec![1.0], vec![0.1])).is_err());
}
