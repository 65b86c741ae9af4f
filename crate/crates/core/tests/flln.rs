use varinf_core::flln::{evaluate_compartments, solve_flln, CoreCurves, FllnSolution, FllnSystem, MAX_STEP};
use varinf_core::{DurationLaw, Grid, InfectivityModel, InitialFractions, ModelSet, SojournTable, Variant};

/// RK4 with `sub` substeps per grid step.
fn rk4<const D: usize>(f: impl Fn(&[f64; D]) -> [f64; D], y0: [f64; D], dt: f64, steps: usize, sub: usize) -> Vec<[f64; D]> {
    let h = dt / sub as f64;
    let mut y = y0;
    let mut out = vec![y];
    let step = |y: &[f64; D], k: &[f64; D], s: f64| core::array::from_fn::<f64, D, _>(|i| y[i] + s * k[i]);
    for _ in 0..steps {
        for _ in 0..sub {
            let k1 = f(&y);
            let k2 = f(&step(&y, &k1, h / 2.0));
            let k3 = f(&step(&y, &k2, h / 2.0));
            let k4 = f(&step(&y, &k3, h));
            y = core::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        }
        out.push(y);
    }
    out
}

fn sup<const D: usize>(a: &[f64], ode: &[[f64; D]], c: usize) -> f64 {
    a.iter().zip(ode).map(|(x, y)| (x - y[c]).abs()).fold(0.0, f64::max)
}

fn exp_seir() -> ModelSet {
    let m = InfectivityModel::piecewise_indicator(
        0.8,
        DurationLaw::Exponential { rate: 0.5 },
        DurationLaw::Exponential { rate: 0.25 },
    )
    .unwrap();
    ModelSet::from_model(m).unwrap()
}

fn check_common(sol: &FllnSolution, lambda_star: f64, tol: f64) {
    for i in 0..sol.grid.len() {
        for x in [sol.s_bar[i], sol.e_bar[i], sol.i_bar[i], sol.r_bar[i]] {
            assert!((-1e-12..=1.0 + 1e-12).contains(&x));
        }
        let total = sol.s_bar[i] + sol.e_bar[i] + sol.i_bar[i] + sol.r_bar[i];
        assert!((total - 1.0).abs() <= tol, "sum {total} at {i}");
        assert!(sol.foi_bar[i] >= 0.0 && sol.foi_bar[i] <= lambda_star * (1.0 + 1e-9));
        assert!((sol.upsilon_bar[i] - sol.s_bar[i] * sol.foi_bar[i]).abs() <= 1e-14);
    }
}

#[test]
fn markov_seir_matches_ode() {
    let (beta, sigma, gamma) = (0.8, 0.5, 0.25);
    let grid = Grid::new(0.005, 40.0).unwrap();
    let init = InitialFractions { e0: 0.01, i0: 0.005, r0: 0.02 };
    let sol = solve_flln(&exp_seir(), &init, &grid, Variant::Seir).unwrap();
    let ode = rk4(
        |y: &[f64; 4]| {
            let inf = beta * y[0] * y[2];
            [-inf, inf - sigma * y[1], sigma * y[1] - gamma * y[2], gamma * y[2]]
        },
        [init.s0(), init.e0, init.i0, init.r0],
        grid.dt(),
        grid.steps(),
        4,
    );
    for (c, arr) in [&sol.s_bar, &sol.e_bar, &sol.i_bar, &sol.r_bar].into_iter().enumerate() {
        assert!(sup(arr, &ode, c) < 1e-5, "compartment {c}: {}", sup(arr, &ode, c));
    }
    check_common(&sol, 0.8, 1e-6);
    assert!(sol.s_bar.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn markov_sirs_matches_ode() {
    let (beta, gamma, omega) = (0.6, 0.2, 0.1);
    let models = ModelSet::from_model(InfectivityModel::constant_markov(beta, gamma).unwrap())
        .unwrap()
        .with_immunity(DurationLaw::Exponential { rate: omega }, None)
        .unwrap();
    let grid = Grid::new(0.005, 60.0).unwrap();
    let init = InitialFractions { e0: 0.0, i0: 0.01, r0: 0.1 };
    let sol = solve_flln(&models, &init, &grid, Variant::Sirs).unwrap();
    let ode = rk4(
        |y: &[f64; 3]| {
            let inf = beta * y[0] * y[1];
            [-inf + omega * y[2], inf - gamma * y[1], gamma * y[1] - omega * y[2]]
        },
        [init.s0(), init.i0, init.r0],
        grid.dt(),
        grid.steps(),
        4,
    );
    assert!(sup(&sol.s_bar, &ode, 0) < 1e-5);
    assert!(sup(&sol.i_bar, &ode, 1) < 1e-5);
    assert!(sup(&sol.r_bar, &ode, 2) < 1e-5);
    check_common(&sol, beta, 1e-8);
}

#[test]
fn constant_markov_under_seir_conserves_mass() {
    let models = ModelSet::from_model(InfectivityModel::constant_markov(0.5, 0.2).unwrap()).unwrap();
    let grid = Grid::new(0.005, 20.0).unwrap();
    let init = InitialFractions { e0: 0.01, i0: 0.01, r0: 0.0 };
    let sol = solve_flln(&models, &init, &grid, Variant::Seir).unwrap();
    check_common(&sol, 0.5, 1e-6);
}

#[test]
fn no_infected_means_nothing_moves() {
    let init = InitialFractions { e0: 0.0, i0: 0.0, r0: 0.3 };
    let sol = solve_flln(&exp_seir(), &init, &Grid::new(0.05, 10.0).unwrap(), Variant::Seir).unwrap();
    assert!(sol.foi_bar.iter().all(|&x| x == 0.0));
    assert!(sol.s_bar.iter().all(|&x| (x - 0.7).abs() < 1e-15));
    assert!(sol.e_bar.iter().chain(&sol.i_bar).all(|&x| x == 0.0));
    assert!(sol.r_bar.iter().all(|&x| (x - 0.3).abs() < 1e-15));
}

#[test]
fn non_markov_laws_satisfy_invariants() {
    let bump = InfectivityModel::continuous_bump(1.2, DurationLaw::Gamma { shape: 4.0, rate: 0.8 }).unwrap();
    let gamma_pi = InfectivityModel::piecewise_indicator(
        0.6,
        DurationLaw::Gamma { shape: 2.0, rate: 1.0 },
        DurationLaw::Uniform { lo: 1.0, hi: 5.0 },
    )
    .unwrap();
    let grid = Grid::new(0.02, 30.0).unwrap();
    for (m, variant, init) in [
        (bump.clone(), Variant::Sir, InitialFractions { e0: 0.0, i0: 0.01, r0: 0.0 }),
        (bump, Variant::Sis, InitialFractions { e0: 0.0, i0: 0.01, r0: 0.0 }),
        (gamma_pi, Variant::Seir, InitialFractions { e0: 0.01, i0: 0.01, r0: 0.0 }),
    ] {
        let ls = m.lambda_star();
        let sys = FllnSystem::new(&ModelSet::from_model(m).unwrap(), &grid, variant).unwrap();
        let sol = sys.solve(&init).unwrap();
        check_common(&sol, ls, 1e-6);
        assert!(sys.residual(&sol) < 1e-9, "{variant}: residual {}", sys.residual(&sol));
    }
}

#[test]
fn compartments_from_core_curves() {
    let models = exp_seir();
    let grid = Grid::new(0.01, 20.0).unwrap();
    let tab = SojournTable::for_variant(&models, &grid, Variant::Seir).unwrap();
    let init = InitialFractions { e0: 0.02, i0: 0.03, r0: 0.0 };
    let zeros = vec![0.0; grid.len()];
    let s = vec![init.s0(); grid.len()];
    let core = CoreCurves { s_bar: &s, foi_bar: &zeros, upsilon_bar: &zeros };
    let c = evaluate_compartments(core, &tab, &init, Variant::Seir).unwrap();
    assert_eq!((c.e_bar[0], c.i_bar[0], c.r_bar[0]), (0.02, 0.03, 0.0));
    for k in 0..grid.len() {
        assert!((c.e_bar[k] - 0.02 * (1.0 - tab.g0[k])).abs() < 1e-15);
    }
    let short = vec![0.0; 3];
    let bad = CoreCurves { s_bar: &short, foi_bar: &short, upsilon_bar: &short };
    assert!(evaluate_compartments(bad, &tab, &init, Variant::Seir).is_err());
}

#[test]
fn solver_evaluates_compartments_consistently() {
    let models = exp_seir();
    let grid = Grid::new(0.01, 20.0).unwrap();
    let init = InitialFractions { e0: 0.01, i0: 0.01, r0: 0.0 };
    let sys = FllnSystem::new(&models, &grid, Variant::Seir).unwrap();
    let sol = sys.solve(&init).unwrap();
    let core = CoreCurves { s_bar: &sol.s_bar, foi_bar: &sol.foi_bar, upsilon_bar: &sol.upsilon_bar };
    let c = evaluate_compartments(core, &sys.sojourn, &init, Variant::Seir).unwrap();
    let d = c.i_bar.iter().zip(&sol.i_bar).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(d < 1e-5, "{d}");
}

#[test]
fn bad_inputs_are_rejected() {
    let init = InitialFractions { e0: 0.01, i0: 0.01, r0: 0.0 };
    assert!(solve_flln(&exp_seir(), &init, &Grid::new(MAX_STEP * 2.0, 10.0).unwrap(), Variant::Seir).is_err());
    assert!(solve_flln(&exp_seir(), &init, &Grid::new(0.01, 10.0).unwrap(), Variant::Sir).is_err());
    let sirs_without_immunity = ModelSet::from_model(InfectivityModel::constant_markov(0.5, 0.2).unwrap()).unwrap();
    let init = InitialFractions { e0: 0.0, i0: 0.01, r0: 0.0 };
    assert!(solve_flln(&sirs_without_immunity, &init, &Grid::new(0.01, 10.0).unwrap(), Variant::Sirs).is_err());
}
