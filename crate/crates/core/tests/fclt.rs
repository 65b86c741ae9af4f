use varinf_core::fclt::{
    build_covariance_kernels, gaussian_initial_draws, limit_covariance_estimate, sample_gaussian_drivers,
    solve_fclt_paths, CovKernelSet, DriverEnsemble, FcltEnsemble, InitialFluctuation, Output, Process,
};
use varinf_core::flln::{FllnSolution, FllnSystem};
use varinf_core::stats::{mean_se, sample_covariance};
use varinf_core::{DurationLaw, Grid, InfectivityModel, InitialFractions, ModelSet, SojournTable, Variant};

struct Setup {
    grid: Grid,
    variant: Variant,
    sol: FllnSolution,
    sojourn: SojournTable,
    kernels: CovKernelSet,
}

fn setup(variant: Variant, delta: f64, horizon: f64) -> Setup {
    let (models, init) = match variant {
        Variant::Seir => (
            InfectivityModel::piecewise_indicator(
                0.7,
                DurationLaw::Gamma { shape: 2.0, rate: 1.0 },
                DurationLaw::Gamma { shape: 3.0, rate: 1.0 },
            )
            .unwrap(),
            InitialFractions { e0: 0.01, i0: 0.01, r0: 0.0 },
        ),
        _ => (
            InfectivityModel::constant_markov(0.6, 0.25).unwrap(),
            InitialFractions { e0: 0.0, i0: 0.02, r0: 0.0 },
        ),
    };
    let models = ModelSet::from_model(models).unwrap();
    let grid = Grid::new(delta, horizon).unwrap();
    let sys = FllnSystem::new(&models, &grid, variant).unwrap();
    let sol = sys.solve(&init).unwrap();
    let kernels = build_covariance_kernels(&models, &sol, &sys.sojourn, &grid, variant).unwrap();
    Setup { grid, variant, sol, sojourn: sys.sojourn, kernels }
}

fn solve(s: &Setup, d: DriverEnsemble, init: &[InitialFluctuation]) -> FcltEnsemble {
    solve_fclt_paths(d, init, &s.sol, &s.sojourn, &s.grid, s.variant).unwrap()
}

#[test]
fn kernel_signs_and_origin() {
    let s = setup(Variant::Seir, 0.05, 10.0);
    let k = &s.kernels;
    let n1 = s.grid.len();
    for &a in &k.processes {
        for &b in &k.processes {
            assert!(k.get(a, b, 0, 0).abs() < 1e-14, "{a:?},{b:?}");
        }
    }
    for i in 0..n1 {
        for j in 0..n1 {
            assert!(k.get(Process::S, Process::E, i, j) <= 1e-15);
        }
        let v = k.get(Process::S, Process::S, i, i);
        assert!((v - (s.sol.s_bar[0] - s.sol.s_bar[i])).abs() < 1e-6);
    }
}

#[test]
fn drivers_are_centered_with_kernel_variance() {
    let s = setup(Variant::Seir, 0.05, 8.0);
    let d = sample_gaussian_drivers(&s.kernels, 21, 5000).unwrap();
    let n = s.grid.steps();
    for &p in &[Process::S, Process::Foi, Process::I] {
        for i in (0..=n).step_by(20) {
            let xs: Vec<f64> = (0..d.len()).map(|r| d.path(r, p).unwrap()[i]).collect();
            let e = mean_se(&xs);
            assert!(e.value.abs() <= 4.0 * e.se + 1e-15, "{p:?} mean at {i}");
        }
    }
    let xs: Vec<f64> = (0..d.len()).map(|r| d.path(r, Process::S).unwrap()[n]).collect();
    let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
    let v = mean_se(&sq);
    let target = s.kernels.get(Process::S, Process::S, n, n);
    assert!((v.value - target).abs() <= 5.0 * v.se, "{} vs {target}", v.value);

    let again = sample_gaussian_drivers(&s.kernels, 21, 5000).unwrap();
    assert_eq!(d, again);
}

#[test]
fn driver_covariance_recovers_kernel_entries() {
    let s = setup(Variant::Sir, 0.05, 8.0);
    let d = sample_gaussian_drivers(&s.kernels, 5, 4000).unwrap();
    let idx = [40, 100, 160];
    let ps = [Process::S, Process::Foi, Process::I];
    let rows: Vec<Vec<f64>> = (0..d.len())
        .map(|r| ps.iter().flat_map(|&p| idx.iter().map(move |&i| (p, i))).map(|(p, i)| d.path(r, p).unwrap()[i]).collect())
        .collect();
    let c = sample_covariance(&rows);
    for (x, (pa, ia)) in ps.iter().flat_map(|&p| idx.iter().map(move |&i| (p, i))).enumerate() {
        for (y, (pb, ib)) in ps.iter().flat_map(|&p| idx.iter().map(move |&i| (p, i))).enumerate() {
            let k = s.kernels.get(pa, pb, ia, ib);
            assert!((c.get(x, y) - k).abs() <= 5.0 * c.se_of(x, y) + 1e-12, "{pa:?}{ia} {pb:?}{ib}");
            assert_eq!(c.get(x, y), c.get(y, x));
        }
    }
}

#[test]
fn zero_input_gives_zero_paths() {
    let s = setup(Variant::Seir, 0.05, 8.0);
    let d = sample_gaussian_drivers(&s.kernels, 1, 3).unwrap().scaled(0.0);
    let e = solve(&s, d, &[]);
    for p in &e.paths {
        for o in Output::ALL {
            assert!(p.get(o).iter().all(|&x| x == 0.0));
        }
    }
    let c = limit_covariance_estimate(&e, &[Output::S, Output::I], &[2.0, 4.0]);
    assert!(c.cov.iter().all(|&x| x == 0.0));
}

#[test]
fn rate_is_linearized_product_and_paths_sum_to_zero() {
    for variant in [Variant::Seir, Variant::Sir, Variant::Sis] {
        let s = setup(variant, 0.05, 10.0);
        let d = sample_gaussian_drivers(&s.kernels, 3, 50).unwrap();
        let e = solve(&s, d, &[]);
        for p in &e.paths {
            for i in 0..s.grid.len() {
                let lin = p.s[i] * s.sol.foi_bar[i] + s.sol.s_bar[i] * p.foi[i];
                assert!((p.upsilon[i] - lin).abs() < 1e-12);
                assert!((p.s[i] + p.e[i] + p.i[i] + p.r[i]).abs() < 1e-8, "{variant}");
            }
        }
    }
}

#[test]
fn scaling_drivers_and_initial_draws_scales_paths() {
    let s = setup(Variant::Seir, 0.05, 8.0);
    let cov = [[0.01, 0.0, 0.0], [0.0, 0.01, -0.002], [0.0, -0.002, 0.005]];
    let init = gaussian_initial_draws(cov, 20, 4).unwrap();
    let d = sample_gaussian_drivers(&s.kernels, 9, 20).unwrap();
    let c = 3.0;
    let scaled_init: Vec<InitialFluctuation> = init
        .iter()
        .map(|x| InitialFluctuation { e0: c * x.e0, i0: c * x.i0, r0: c * x.r0 })
        .collect();
    let a = solve(&s, d.clone(), &init);
    let b = solve(&s, d.scaled(c), &scaled_init);
    for (p, q) in a.paths.iter().zip(&b.paths) {
        for o in Output::ALL {
            for (x, y) in p.get(o).iter().zip(q.get(o)) {
                assert!((c * x - y).abs() <= 1e-12 * (1.0 + y.abs()));
            }
        }
        assert!((p.e[0] + p.i[0] + p.r[0] + p.s[0]).abs() < 1e-12);
    }
}

#[test]
fn covariance_estimate_is_symmetric() {
    let s = setup(Variant::Sir, 0.05, 10.0);
    let d = sample_gaussian_drivers(&s.kernels, 2, 200).unwrap();
    let e = solve(&s, d, &[]);
    let c = limit_covariance_estimate(&e, &[Output::S, Output::Foi, Output::I, Output::R], &[2.0, 5.0, 10.0]);
    assert_eq!(c.dim, 12);
    for x in 0..c.dim {
        for y in 0..c.dim {
            assert_eq!(c.get(x, y), c.get(y, x));
        }
    }
}

#[test]
fn fine_grids_are_refused_for_sampling() {
    let s = setup(Variant::Sir, 0.01, 9.0);
    assert!(sample_gaussian_drivers(&s.kernels, 0, 1).is_err());
}
