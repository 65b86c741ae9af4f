//! Monte Carlo checks of the limit theorems against the simulator.

use std::time::Instant;

use anyhow::{bail, ensure, Result};
use rayon::prelude::*;
use serde_json::json;
use varinf_core::fclt::{
    build_covariance_kernels, limit_covariance_estimate, sample_gaussian_drivers, solve_fclt_paths, Output,
    MAX_SAMPLING_STEPS,
};
use varinf_core::flln::{FllnSolution, FllnSystem};
use varinf_core::prm::{closed_form, sample_moment, Rect, StepFunction};
use varinf_core::rng::split;
use varinf_core::simulator::{simulate_epidemic, Scenario, SimulationTrajectory};
use varinf_core::stats::{mean_se, sample_covariance, Covariance};
use varinf_core::{Grid, Variant};

use crate::report::{McReport, Statistic};

pub const LLN_RATIO_BAND: (f64, f64) = (1.4, 2.8);
pub const CLT_VARIANCE_REL: f64 = 0.15;
pub const CLT_VARIANCE_SE: f64 = 4.0;
pub const CLT_CORRELATION_ABS: f64 = 0.1;
pub const PRM_SE: f64 = 3.0;
/// Earliest comparison time; variances vanish near zero.
pub const CLT_MIN_TIME: f64 = 1.0;

/// Outputs compared for a variant.
pub fn outputs(variant: Variant) -> Vec<Output> {
    let mut v = vec![Output::S, Output::Foi];
    if variant.has_exposed() {
        v.push(Output::E);
    }
    v.push(Output::I);
    if variant.has_recovered() {
        v.push(Output::R);
    }
    v
}

/// `X^N(t_k) / N`.
fn scaled(tr: &SimulationTrajectory, o: Output, k: usize) -> f64 {
    let n = tr.population as f64;
    let c = &tr.counts;
    match o {
        Output::S => c.s[k] as f64 / n,
        Output::Foi => tr.foi[k] / n,
        Output::E => c.e[k] as f64 / n,
        Output::I => c.i[k] as f64 / n,
        Output::R => c.r[k] as f64 / n,
        Output::Upsilon => tr.upsilon[k] / n,
    }
}

fn limit(sol: &FllnSolution, o: Output) -> &[f64] {
    match o {
        Output::S => &sol.s_bar,
        Output::Foi => &sol.foi_bar,
        Output::E => &sol.e_bar,
        Output::I => &sol.i_bar,
        Output::R => &sol.r_bar,
        Output::Upsilon => &sol.upsilon_bar,
    }
}

fn with_population(sc: &Scenario, n: usize) -> Scenario {
    Scenario {
        population: n,
        ..sc.clone()
    }
}

/// Sup-norm distance between scaled simulations and the deterministic limit
/// for increasing population sizes.
pub fn run_lln_experiment(sc: &Scenario, ns: &[usize], reps: usize, seed: u64) -> Result<McReport> {
    let start = Instant::now();
    ensure!(reps >= 10, "need at least 10 replications to resolve the error ratios");
    ensure!(!ns.is_empty(), "need at least one population size");
    ensure!(ns.windows(2).all(|w| w[0] < w[1]), "population sizes must increase");
    sc.validate()?;
    let grid = sc.grid()?;
    let sol = FllnSystem::new(&sc.models, &grid, sc.variant)?.solve(&sc.init)?;
    let outs = outputs(sc.variant);
    let mut report = McReport::new(
        "lln",
        seed,
        json!({"variant": sc.variant.name(), "ns": ns, "reps": reps, "delta": sc.delta, "horizon": sc.horizon}),
    );
    report.tolerances.insert("ratio_lo".into(), LLN_RATIO_BAND.0);
    report.tolerances.insert("ratio_hi".into(), LLN_RATIO_BAND.1);

    // errors[o][n] = (mean, se)
    let mut errors = vec![Vec::new(); outs.len()];
    for (ni, &n) in ns.iter().enumerate() {
        let scn = with_population(sc, n);
        let base = split(seed, ni as u64);
        let per_rep: Vec<Vec<f64>> = (0..reps)
            .into_par_iter()
            .map(|r| -> Result<Vec<f64>> {
                let tr = simulate_epidemic(&scn, split(base, r as u64))?;
                Ok(outs
                    .iter()
                    .map(|&o| {
                        let bar = limit(&sol, o);
                        (0..grid.len()).map(|k| (scaled(&tr, o, k) - bar[k]).abs()).fold(0.0, f64::max)
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        for (x, &o) in outs.iter().enumerate() {
            let col: Vec<f64> = per_rep.iter().map(|v| v[x]).collect();
            let e = mean_se(&col);
            report.push(Statistic::info(format!("sup_error[{}][N={n}]", o.name()), e.value, e.se));
            errors[x].push(e);
        }
    }
    for (x, &o) in outs.iter().enumerate() {
        for k in 1..ns.len() {
            let (a, b) = (errors[x][k - 1], errors[x][k]);
            let name = format!("ratio[{}][{}->{}]", o.name(), ns[k - 1], ns[k]);
            if a.value == 0.0 && b.value == 0.0 {
                report.push(Statistic::checked(name, 0.0, 0.0, true));
                continue;
            }
            let ratio = a.value / b.value;
            let se = ratio * ((a.se / a.value).powi(2) + (b.se / b.value).powi(2)).sqrt();
            // Expected decay sqrt(N'/N); the band is stated for a 4x step.
            let scale = ((ns[k] as f64 / ns[k - 1] as f64).sqrt()) / 2.0;
            let (lo, hi) = (LLN_RATIO_BAND.0 * scale, LLN_RATIO_BAND.1 * scale);
            report.push(Statistic::checked(name, ratio, se, ratio >= lo && ratio <= hi && b.value < a.value));
        }
    }
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// The coarsest subdivision of `grid` with at most `MAX_SAMPLING_STEPS`
/// steps.
pub fn sampling_grid(grid: &Grid) -> Result<Grid> {
    let n = grid.steps();
    let m = n.div_ceil(MAX_SAMPLING_STEPS).max(1);
    if n % m != 0 {
        bail!("grid with {n} steps cannot be coarsened to at most {MAX_SAMPLING_STEPS} steps; choose another delta");
    }
    Ok(Grid::with_steps(grid.dt() * m as f64, n / m)?)
}

/// Empirical fluctuation covariance against the limit ensemble.
pub fn run_clt_experiment(sc: &Scenario, n: usize, reps: usize, times: &[f64], seed: u64) -> Result<McReport> {
    let start = Instant::now();
    ensure!(n >= 5000, "population must be at least 5000");
    ensure!(reps >= 1000, "need at least 1000 replications");
    ensure!(!times.is_empty(), "need at least one comparison time");
    for &t in times {
        ensure!(
            t >= CLT_MIN_TIME && t <= sc.horizon + 1e-12,
            "comparison time {t} outside [{CLT_MIN_TIME}, {}]",
            sc.horizon
        );
    }
    let scn = with_population(sc, n);
    scn.validate()?;
    let sim_grid = scn.grid()?;
    let grid = sampling_grid(&sim_grid)?;
    let sys = FllnSystem::new(&sc.models, &grid, sc.variant)?;
    let sol = sys.solve(&sc.init)?;
    let outs = outputs(sc.variant);

    // Prelimit fluctuations.
    let sq = (n as f64).sqrt();
    let sim_idx: Vec<usize> = times.iter().map(|&t| sim_grid.index_of(t)).collect();
    let lim_idx: Vec<usize> = times.iter().map(|&t| grid.index_of(t)).collect();
    let per_rep: Vec<(Vec<f64>, f64)> = (0..reps)
        .into_par_iter()
        .map(|r| -> Result<(Vec<f64>, f64)> {
            let tr = simulate_epidemic(&scn, split(seed, r as u64))?;
            let mut v = Vec::with_capacity(outs.len() * times.len());
            for &o in &outs {
                let bar = limit(&sol, o);
                for (&ks, &kl) in sim_idx.iter().zip(&lim_idx) {
                    v.push(sq * (scaled(&tr, o, ks) - bar[kl]));
                }
            }
            // sqrt(N) (S + E + I + R - N) / N from the integer counts.
            let c = &tr.counts;
            let worst = sim_idx
                .iter()
                .map(|&k| {
                    let total = c.s[k] as i64 + c.e[k] as i64 + c.i[k] as i64 + c.r[k] as i64;
                    (sq * (total - n as i64) as f64 / n as f64).abs()
                })
                .fold(0.0, f64::max);
            Ok((v, worst))
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<f64>> = per_rep.iter().map(|(v, _)| v.clone()).collect();
    let prelimit_sum = per_rep.iter().map(|(_, w)| *w).fold(0.0, f64::max);
    let emp = sample_covariance(&rows);

    // Limit ensemble of equal size.
    let kernels = build_covariance_kernels(&sc.models, &sol, &sys.sojourn, &grid, sc.variant)?;
    let drivers = sample_gaussian_drivers(&kernels, split(seed, u64::MAX), reps)?;
    let ens = solve_fclt_paths(drivers, &[], &sol, &sys.sojourn, &grid, sc.variant)?;
    let lim = limit_covariance_estimate(&ens, &outs, times);

    let mut report = McReport::new(
        "clt",
        seed,
        json!({"variant": sc.variant.name(), "N": n, "reps": reps, "times": times, "delta": grid.dt(), "horizon": sc.horizon}),
    );
    report.tolerances.insert("variance_relative".into(), CLT_VARIANCE_REL);
    report.tolerances.insert("variance_se".into(), CLT_VARIANCE_SE);
    report.tolerances.insert("correlation_absolute".into(), CLT_CORRELATION_ABS);
    let label = |x: usize| format!("{}({})", outs[x / times.len()].name(), times[x % times.len()]);
    let d = outs.len() * times.len();
    for x in 0..d {
        let (ve, vl) = (emp.get(x, x), lim.get(x, x));
        let (se, sl) = (emp.se_of(x, x), lim.se_of(x, x));
        let tol = (CLT_VARIANCE_REL * vl.abs()).max(CLT_VARIANCE_SE * (se * se + sl * sl).sqrt());
        report.push(Statistic::against(format!("var[{}]", label(x)), ve, se, vl, sl, tol));
    }
    for x in 0..d {
        for y in x + 1..d {
            report.push(Statistic::against(
                format!("corr[{},{}]", label(x), label(y)),
                emp.corr(x, y),
                0.0,
                lim.corr(x, y),
                0.0,
                CLT_CORRELATION_ABS,
            ));
        }
    }
    report.push(Statistic::checked("prelimit_sum_max_abs", prelimit_sum, 0.0, prelimit_sum <= 1e-8));
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// A named pair of step functions.
#[derive(Debug, Clone, PartialEq)]
pub struct PrmConfig {
    pub name: String,
    pub f: StepFunction,
    pub g: StepFunction,
}

/// Five pairs with equal, disjoint, overlapping and nested supports.
pub fn default_prm_battery() -> Vec<PrmConfig> {
    let r = |x0, x1, y0, y1| Rect::new(x0, x1, y0, y1).expect("valid rectangle");
    let unit = r(0.0, 1.0, 0.0, 1.0);
    let c = |name: &str, f, g| PrmConfig { name: name.into(), f, g };
    vec![
        c("unit", StepFunction::constant(unit, 1.0), StepFunction::constant(unit, 1.0)),
        c(
            "disjoint",
            StepFunction::constant(unit, 1.0),
            StepFunction::constant(r(1.0, 2.0, 0.0, 1.0), 1.0),
        ),
        c(
            "overlap",
            StepFunction::constant(unit, 1.0),
            StepFunction::constant(r(0.5, 1.5, 0.0, 1.0), 2.0),
        ),
        c(
            "signed",
            StepFunction::constant(r(0.0, 0.5, 0.0, 1.0), 1.0).plus(r(0.5, 1.0, 0.0, 1.0), -1.0),
            StepFunction::constant(r(0.25, 0.75, 0.0, 0.5), 0.5),
        ),
        c(
            "nested",
            StepFunction::constant(unit, 1.0),
            StepFunction::constant(unit, 1.0).plus(r(0.0, 0.5, 0.0, 0.5), 1.0),
        ),
    ]
}

/// Monte Carlo fourth mixed moments against their closed form.
pub fn prm_moment_check(configs: &[PrmConfig], draws: usize, seed: u64) -> Result<McReport> {
    let start = Instant::now();
    ensure!(draws >= 10_000, "need at least 10000 draws");
    let mut report = McReport::new(
        "prm",
        seed,
        json!({"draws": draws, "configs": configs.iter().map(|c| c.name.clone()).collect::<Vec<_>>()}),
    );
    report.tolerances.insert("se_multiple".into(), PRM_SE);
    let results: Vec<_> = configs
        .par_iter()
        .enumerate()
        .map(|(k, c)| sample_moment(&c.f, &c.g, draws, split(seed, k as u64)).map(|e| (e, closed_form(&c.f, &c.g))))
        .collect::<Result<_, _>>()?;
    for (c, (est, exact)) in configs.iter().zip(results) {
        report.push(Statistic::against(
            format!("moment[{}]", c.name),
            est.value,
            est.se,
            exact,
            0.0,
            PRM_SE * est.se,
        ));
    }
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Entrywise z-scores of two covariance estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct CovComparison {
    pub dim: usize,
    pub z: Vec<f64>,
    pub max_abs_z: f64,
}

pub fn compare_covariances(a: &Covariance, b: &Covariance) -> Result<CovComparison> {
    ensure!(a.dim == b.dim, "shape mismatch: {} vs {}", a.dim, b.dim);
    let d = a.dim;
    let mut z = vec![0.0; d * d];
    let mut max = 0.0f64;
    for k in 0..d * d {
        let diff = a.cov[k] - b.cov[k];
        let s = (a.se[k] * a.se[k] + b.se[k] * b.se[k]).sqrt();
        z[k] = if diff == 0.0 {
            0.0
        } else if s > 0.0 {
            diff / s
        } else {
            f64::INFINITY.copysign(diff)
        };
        max = max.max(z[k].abs());
    }
    Ok(CovComparison { dim: d, z, max_abs_z: max })
}
