use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use varinf_core::infectivity::{
    compute_sojourn_table, cov_infectivity, eval_path, joint_indicator_moment, make_aged_initial_model,
    mean_infectivity, path_durations, sample_path,
};
use varinf_core::stats::mean_se;
use varinf_core::{AgeCondition, DurationLaw, Grid, InfectivityModel, ModelSet, Region, RoleTag};

fn markov() -> InfectivityModel {
    InfectivityModel::constant_markov(0.5, 0.2).unwrap()
}

fn exp_pi() -> InfectivityModel {
    InfectivityModel::piecewise_indicator(
        1.0,
        DurationLaw::Exponential { rate: 0.5 },
        DurationLaw::Exponential { rate: 0.2 },
    )
    .unwrap()
}

/// Monte Carlo mean of `h(path)` over `n` independent paths.
fn mc(model: &InfectivityModel, n: u64, h: impl Fn(&varinf_core::InfectivityPath) -> f64) -> (f64, f64) {
    let xs: Vec<f64> = (0..n).map(|s| h(&sample_path(model, s).unwrap())).collect();
    let e = mean_se(&xs);
    (e.value, e.se)
}

#[test]
fn markov_path_starts_at_beta() {
    let p = sample_path(&markov(), 7).unwrap();
    let (zeta, eta, chi) = path_durations(&p);
    assert_eq!(zeta, 0.0);
    assert!(eta > 0.0 && chi == eta);
    assert_eq!(eval_path(&p, 0.0), 0.5);
    assert_eq!(eval_path(&p, chi), 0.0);
}

#[test]
fn same_seed_same_path() {
    for m in [markov(), exp_pi()] {
        assert_eq!(sample_path(&m, 99).unwrap(), sample_path(&m, 99).unwrap());
    }
}

#[test]
fn exposed_mean_matches_exponential() {
    let (mean, se) = mc(&exp_pi(), 1_000_000, |p| p.zeta);
    assert!((mean - 2.0).abs() <= 3.0 * se, "mean {mean} se {se}");
}

#[test]
fn indicator_path_is_right_continuous_at_onset() {
    let m = exp_pi();
    let p = (0..).map(|s| sample_path(&m, s).unwrap()).find(|p| p.zeta > 0.5).unwrap();
    assert!(eval_path(&p, p.zeta) > 0.0);
    assert_eq!(eval_path(&p, p.zeta - 1e-9), 0.0);
    assert_abs_diff_eq!(p.chi, p.zeta + p.eta, epsilon = 1e-12);
}

#[test]
fn bump_peaks_mid_support() {
    let m = InfectivityModel::continuous_bump(1.0, DurationLaw::Deterministic { value: 2.0 }).unwrap();
    let p = sample_path(&m, 1).unwrap();
    assert_eq!(path_durations(&p), (0.0, 2.0, 2.0));
    assert_abs_diff_eq!(eval_path(&p, 1.0), 1.0, epsilon = 1e-12);
    assert_eq!(eval_path(&p, 2.0), 0.0);
}

#[test]
fn markov_mean_and_covariance_closed_forms() {
    let m = markov();
    assert_eq!(mean_infectivity(&m, 0.0).unwrap().value, 0.5);
    let exact = 0.5 * (-1.0f64).exp();
    assert_abs_diff_eq!(mean_infectivity(&m, 5.0).unwrap().value, exact, epsilon = 1e-12);
    let (v, se) = mc(&m, 200_000, |p| eval_path(p, 5.0));
    assert!((v - exact).abs() <= 4.0 * se);

    let c = 0.25 * ((-0.6f64).exp() - (-1.0f64).exp());
    assert_abs_diff_eq!(cov_infectivity(&m, 2.0, 3.0).unwrap().value, c, epsilon = 1e-12);
    assert_abs_diff_eq!(cov_infectivity(&m, 3.0, 2.0).unwrap().value, c, epsilon = 1e-12);
    let (l2, l3) = (mean_infectivity(&m, 2.0).unwrap().value, mean_infectivity(&m, 3.0).unwrap().value);
    let (v, se) = mc(&m, 200_000, |p| eval_path(p, 2.0) * eval_path(p, 3.0) - l2 * l3);
    assert!((v - c).abs() <= 4.0 * se);
}

#[test]
fn variance_is_nonnegative_and_covariance_symmetric() {
    for m in [markov(), exp_pi()] {
        for &(t, u) in &[(0.5, 1.5), (2.0, 7.0), (4.0, 4.0)] {
            assert!(cov_infectivity(&m, t, t).unwrap().value >= 0.0);
            let a = cov_infectivity(&m, t, u).unwrap().value;
            let b = cov_infectivity(&m, u, t).unwrap().value;
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }
}

#[test]
fn joint_moments_partition_and_infectious_closed_form() {
    for m in [markov(), exp_pi()] {
        let sum: f64 = [Region::Exposed, Region::Infectious, Region::Recovered]
            .iter()
            .map(|&r| joint_indicator_moment(&m, 1.0, 1.0, r).unwrap().value)
            .sum();
        assert_abs_diff_eq!(sum, mean_infectivity(&m, 1.0).unwrap().value, epsilon = 1e-12);
        assert!(joint_indicator_moment(&m, 1.0, 500.0, Region::Exposed).unwrap().value.abs() < 1e-12);
    }
    let v = joint_indicator_moment(&markov(), 1.0, 4.0, Region::Infectious).unwrap().value;
    assert_abs_diff_eq!(v, 0.5 * (-0.8f64).exp(), epsilon = 1e-12);
}

#[test]
fn hypoexponential_sojourn_table() {
    let m = exp_pi();
    let models = ModelSet::from_model(m.clone()).unwrap();
    let grid = Grid::new(0.1, 60.0).unwrap();
    let tab = compute_sojourn_table(&models.model, &models.model0, &models.model0i, &grid).unwrap();
    for (k, t) in grid.times().enumerate() {
        let phi = 1.0 - (0.5 * (-0.2 * t).exp() - 0.2 * (-0.5 * t).exp()) / 0.3;
        assert_abs_diff_eq!(tab.phi[k], phi, epsilon = 1e-10);
        assert_abs_diff_eq!(tab.g[k], tab.phi[k] + tab.psi[k], epsilon = 1e-12);
    }
    assert_eq!(tab.psi[0], 0.0);
    assert!((tab.g.last().unwrap() - 1.0).abs() < 1e-10);
    // Empirical CDF of the infected period at a few ages.
    let chis: Vec<f64> = (0..200_000).map(|s| sample_path(&m, s).unwrap().chi).collect();
    for &t in &[1.0, 5.0, 12.0] {
        let k = grid.index_of(t);
        let p = chis.iter().filter(|&&c| c <= t).count() as f64 / chis.len() as f64;
        let se = (p * (1.0 - p) / chis.len() as f64).sqrt();
        assert!((p - tab.phi[k]).abs() <= 4.0 * se);
    }
}

#[test]
fn sojourn_tables_are_monotone_cdfs() {
    let m = InfectivityModel::piecewise_indicator(
        0.7,
        DurationLaw::Gamma { shape: 2.0, rate: 1.0 },
        DurationLaw::LogNormal { mu: 0.5, sigma: 0.4 },
    )
    .unwrap();
    let models = ModelSet::from_model(m).unwrap();
    let grid = Grid::new(0.05, 15.0).unwrap();
    let tab = compute_sojourn_table(&models.model, &models.model0, &models.model0i, &grid).unwrap();
    for arr in [&tab.g, &tab.phi, &tab.g0, &tab.phi0, &tab.f0i] {
        assert!(arr[0] >= 0.0);
        assert!(arr.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!(arr.iter().all(|&x| (0.0..=1.0 + 1e-12).contains(&x)));
    }
}

#[test]
fn aged_law_with_tiny_ages_matches_base() {
    let m = markov();
    let aged = make_aged_initial_model(&m, DurationLaw::Uniform { lo: 0.0, hi: 1e-3 }, AgeCondition::Infectious).unwrap();
    assert_eq!(aged.role(), RoleTag::InitiallyInfectious);
    for &t in &[0.0, 1.0, 4.0] {
        let e = mean_infectivity(&aged, t).unwrap();
        assert!((e.value - 0.5 * (-0.2 * t).exp()).abs() <= 4.0 * e.se + 1e-3);
    }
    for s in 0..100 {
        assert_eq!(sample_path(&aged, s).unwrap().zeta, 0.0);
    }
}

#[test]
fn aged_exposed_with_zero_age_keeps_base_law() {
    let m = exp_pi();
    let aged = make_aged_initial_model(&m, DurationLaw::Zero, AgeCondition::Exposed).unwrap();
    let (mean, se) = mc(&aged, 100_000, |p| p.zeta);
    assert!((mean - 2.0).abs() <= 4.0 * se);
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(InfectivityModel::constant_markov(-1.0, 0.2).is_err());
    assert!(InfectivityModel::constant_markov(0.5, 0.0).is_err());
    assert!(InfectivityModel::piecewise_indicator(1.0, DurationLaw::Exponential { rate: -1.0 }, DurationLaw::Zero).is_err());
    assert!(make_aged_initial_model(&markov(), DurationLaw::Zero, AgeCondition::Exposed).is_err());
}

#[test]
fn regularity_descriptors_are_admissible() {
    for m in [markov(), exp_pi(), InfectivityModel::continuous_bump(2.0, DurationLaw::Gamma { shape: 4.0, rate: 2.0 }).unwrap()] {
        let r = m.regularity();
        assert!(r.alpha > 0.5 && r.rho > 0.0 && r.holder_const > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn paths_are_bounded_and_vanish_off_support(seed in any::<u64>(), t in 0.0f64..40.0, which in 0usize..3) {
        let m = match which {
            0 => markov(),
            1 => exp_pi(),
            _ => InfectivityModel::continuous_bump(1.5, DurationLaw::Gamma { shape: 3.0, rate: 1.0 }).unwrap(),
        };
        let p = sample_path(&m, seed).unwrap();
        let v = eval_path(&p, t);
        prop_assert!((0.0..=m.lambda_star()).contains(&v));
        prop_assert!(p.chi.is_finite() && p.zeta >= 0.0 && p.zeta < p.chi);
        if t < p.zeta || t >= p.chi {
            prop_assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn initially_infectious_paths_start_infectious(seed in any::<u64>()) {
        let models = ModelSet::from_model(exp_pi()).unwrap();
        prop_assert_eq!(sample_path(&models.model0i, seed).unwrap().zeta, 0.0);
    }
}
