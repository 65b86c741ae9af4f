//! Deterministic limit: the coupled `(S, foi)` Volterra equations and the
//! compartment convolution formulas, for all four variants.
//!
//! All convolutions use trapezoidal product integration on a uniform grid
//! (midpoint on steep kernel cells). The implicit right endpoint is resolved
//! by Picard iteration on the force of infection at each step.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::grid::Grid;
use crate::infectivity::SojournTable;
use crate::setup::{InitialFractions, ModelSet};
use crate::volterra::{coarse, steep_cells, union, Conv};
use crate::{Error, Result, Variant};

/// Largest grid step accepted by the solver.
pub const MAX_STEP: f64 = 0.05;
const PICARD_TOL: f64 = 1e-12;
const PICARD_MAX: usize = 100;
const RANGE_TOL: f64 = 1e-9;
const SUM_TOL: f64 = 1e-8;

/// Compartment of the limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Compartment {
    E,
    I,
    R,
}

/// Initial group an initial-condition term belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitGroup {
    Exposed,
    Infectious,
    Recovered,
}

impl InitGroup {
    pub(crate) fn fraction(self, f: &InitialFractions) -> f64 {
        match self {
            InitGroup::Exposed => f.e0,
            InitGroup::Infectious => f.i0,
            InitGroup::Recovered => f.r0,
        }
    }
}

/// Initial-group curves, each weighted by that group's fraction.
pub(crate) type InitTerms = Vec<(InitGroup, Vec<f64>)>;

#[derive(Debug, Clone)]
pub(crate) struct CompartmentKernel {
    pub which: Compartment,
    pub conv: Conv,
    /// Initial-condition curves, scaled by the matching initial quantity.
    pub init: InitTerms,
}

/// Everything about the limit equations that does not depend on the initial
/// fractions: kernels, their quadrature weights and the sojourn table.
#[derive(Debug, Clone)]
pub struct FllnSystem {
    pub grid: Grid,
    pub variant: Variant,
    pub sojourn: SojournTable,
    pub lambda_bar: Vec<f64>,
    pub lambda0_bar: Vec<f64>,
    pub lambda0i_bar: Vec<f64>,
    pub lambda_star: f64,
    pub(crate) lambda_conv: Conv,
    pub(crate) compartments: Vec<CompartmentKernel>,
}

/// Grid solution of the deterministic limit.
#[derive(Debug, Clone, PartialEq)]
pub struct FllnSolution {
    pub grid: Grid,
    pub variant: Variant,
    pub init: InitialFractions,
    pub s_bar: Vec<f64>,
    pub foi_bar: Vec<f64>,
    pub e_bar: Vec<f64>,
    pub i_bar: Vec<f64>,
    pub r_bar: Vec<f64>,
    pub upsilon_bar: Vec<f64>,
    pub lambda_bar: Vec<f64>,
    pub lambda0_bar: Vec<f64>,
    pub lambda0i_bar: Vec<f64>,
}

/// `(S, foi, Upsilon)` arrays.
#[derive(Debug, Clone, Copy)]
pub struct CoreCurves<'a> {
    pub s_bar: &'a [f64],
    pub foi_bar: &'a [f64],
    pub upsilon_bar: &'a [f64],
}

/// `(E, I, R)` arrays; absent compartments are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CompartmentCurves {
    pub e_bar: Vec<f64>,
    pub i_bar: Vec<f64>,
    pub r_bar: Vec<f64>,
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn one_minus(a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| 1.0 - x).collect()
}

/// New-infection kernels and initial-condition curves of `variant`, from a
/// sojourn table (grid or half-step grid).
pub(crate) fn kernel_layout(
    tab: &SojournTable,
    variant: Variant,
) -> Vec<(Compartment, Vec<f64>, InitTerms)> {
    let ones = vec![1.0; tab.len()];
    match variant {
        Variant::Seir => vec![
            (Compartment::E, one_minus(&tab.g), vec![(InitGroup::Exposed, one_minus(&tab.g0))]),
            (
                Compartment::I,
                tab.psi.clone(),
                vec![
                    (InitGroup::Infectious, one_minus(&tab.f0i)),
                    (InitGroup::Exposed, tab.psi0.clone()),
                ],
            ),
            (
                Compartment::R,
                tab.phi.clone(),
                vec![
                    (InitGroup::Infectious, tab.f0i.clone()),
                    (InitGroup::Exposed, tab.phi0.clone()),
                    (InitGroup::Recovered, ones),
                ],
            ),
        ],
        Variant::Sir => vec![
            (Compartment::I, one_minus(&tab.phi), vec![(InitGroup::Infectious, one_minus(&tab.f0i))]),
            (
                Compartment::R,
                tab.phi.clone(),
                vec![(InitGroup::Infectious, tab.f0i.clone()), (InitGroup::Recovered, ones)],
            ),
        ],
        Variant::Sis => vec![(
            Compartment::I,
            one_minus(&tab.phi),
            vec![(InitGroup::Infectious, one_minus(&tab.f0i))],
        )],
        Variant::Sirs => vec![
            (Compartment::I, one_minus(&tab.g), vec![(InitGroup::Infectious, one_minus(&tab.g0))]),
            (
                Compartment::R,
                sub(&tab.g, &tab.phi),
                vec![
                    (InitGroup::Infectious, tab.psi0.clone()),
                    (InitGroup::Recovered, one_minus(&tab.f0i)),
                ],
            ),
        ],
    }
}

impl FllnSystem {
    /// Tabulate kernels for `variant` on `grid`.
    pub fn new(models: &ModelSet, grid: &Grid, variant: Variant) -> Result<Self> {
        if grid.dt() > MAX_STEP + 1e-15 {
            return Err(Error::param("dt", format!("grid step must be at most {MAX_STEP}")));
        }
        models.validate(variant)?;
        let half = grid.refined();
        let tab_half = SojournTable::for_variant(models, &half, variant)?;
        let dt = grid.dt();

        let lam_half = models.model.clock(crate::infectivity::Mapping::Seir)?.tables(&half).mean;
        let lambda_conv = Conv::from_half(&lam_half, &steep_cells(&lam_half), dt);

        let layout = kernel_layout(&tab_half, variant);
        let flags: Vec<Vec<bool>> = layout.iter().map(|(_, k, _)| steep_cells(k)).collect();
        let shared = union(&flags, grid.steps());
        let compartments = layout
            .into_iter()
            .map(|(which, k, init)| CompartmentKernel {
                which,
                conv: Conv::from_half(&k, &shared, dt),
                init: init.into_iter().map(|(g, c)| (g, coarse(&c))).collect(),
            })
            .collect();

        let mean_on = |m: &crate::InfectivityModel| -> Result<Vec<f64>> {
            Ok(m.clock(crate::infectivity::Mapping::Seir)?.tables(grid).mean)
        };
        let sojourn = coarse_table(&tab_half, grid);
        Ok(FllnSystem {
            grid: *grid,
            variant,
            sojourn,
            lambda_bar: coarse(&lam_half),
            lambda0_bar: mean_on(&models.model0)?,
            lambda0i_bar: mean_on(&models.model0i)?,
            lambda_star: models
                .model
                .lambda_star()
                .max(models.model0.lambda_star())
                .max(models.model0i.lambda_star()),
            lambda_conv,
            compartments,
        })
    }

    fn forcing(&self, init: &InitialFractions, i: usize) -> f64 {
        init.e0 * self.lambda0_bar[i] + init.i0 * self.lambda0i_bar[i]
    }

    fn explicit_s(&self) -> bool {
        matches!(self.variant, Variant::Seir | Variant::Sir)
    }

    /// Solve for the given initial fractions.
    pub fn solve(&self, init: &InitialFractions) -> Result<FllnSolution> {
        init.validate(self.variant)?;
        let n = self.grid.steps();
        let dt = self.grid.dt();
        let mut s = vec![0.0; n + 1];
        let mut f = vec![0.0; n + 1];
        let mut y = vec![0.0; n + 1];
        let mut comp: Vec<Vec<f64>> = vec![vec![0.0; n + 1]; self.compartments.len()];
        let s0 = init.s0();
        let mut ysum = 0.0; // dt * (y_0 / 2 + y_1 + ... + y_{i-1})
        for i in 0..=n {
            // S_i = a - sc * Y_i and F_i = b + fc * Y_i.
            let (a, sc) = if self.explicit_s() {
                if i == 0 {
                    (s0, 0.0)
                } else {
                    (s0 - ysum, 0.5 * dt)
                }
            } else {
                let mut a = 1.0;
                let mut sc = 0.0;
                for (c, k) in self.compartments.iter().enumerate() {
                    let base = init_term(&k.init, init, i) + k.conv.partial(&y, i);
                    comp[c][i] = base;
                    a -= base;
                    if i > 0 {
                        sc += k.conv.head();
                    }
                }
                (a, sc)
            };
            let b = self.forcing(init, i) + self.lambda_conv.partial(&y, i);
            let fc = if i == 0 { 0.0 } else { self.lambda_conv.head() };
            let mut fi = if i == 0 { b } else { f[i - 1] };
            let mut converged = false;
            for _ in 0..PICARD_MAX {
                let next = b + fc * a * fi / (1.0 + sc * fi);
                let done = (next - fi).abs() <= PICARD_TOL * fi.abs().max(1.0);
                fi = next;
                if done {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NoConvergence { step: i });
            }
            let si = a / (1.0 + sc * fi);
            f[i] = fi;
            s[i] = si;
            y[i] = si * fi;
            if !self.explicit_s() && i > 0 {
                for (c, k) in self.compartments.iter().enumerate() {
                    comp[c][i] += k.conv.head() * y[i];
                }
            }
            ysum += if i == 0 { 0.5 * dt * y[0] } else { dt * y[i] };
        }
        if self.explicit_s() {
            for (c, k) in self.compartments.iter().enumerate() {
                for i in 0..=n {
                    comp[c][i] = init_term(&k.init, init, i) + k.conv.at(&y, i);
                }
            }
        }
        let mut out = FllnSolution {
            grid: self.grid,
            variant: self.variant,
            init: *init,
            s_bar: s,
            foi_bar: f,
            e_bar: vec![0.0; n + 1],
            i_bar: vec![0.0; n + 1],
            r_bar: vec![0.0; n + 1],
            upsilon_bar: y,
            lambda_bar: self.lambda_bar.clone(),
            lambda0_bar: self.lambda0_bar.clone(),
            lambda0i_bar: self.lambda0i_bar.clone(),
        };
        for (k, c) in self.compartments.iter().zip(comp) {
            match k.which {
                Compartment::E => out.e_bar = c,
                Compartment::I => out.i_bar = c,
                Compartment::R => out.r_bar = c,
            }
        }
        check_invariants(&out, self.lambda_star)?;
        Ok(out)
    }

    /// Largest discrepancy when the solved curves are substituted back into
    /// the discretized right-hand sides.
    pub fn residual(&self, sol: &FllnSolution) -> f64 {
        let n = self.grid.steps();
        let dt = self.grid.dt();
        let y = &sol.upsilon_bar;
        let mut worst = 0.0f64;
        let mut ysum = 0.0;
        for i in 0..=n {
            let f = self.forcing(&sol.init, i) + self.lambda_conv.at(y, i);
            worst = worst.max((f - sol.foi_bar[i]).abs());
            let s = if self.explicit_s() {
                sol.init.s0() - if i == 0 { 0.0 } else { ysum + 0.5 * dt * y[i] }
            } else {
                1.0 - self
                    .compartments
                    .iter()
                    .map(|k| init_term(&k.init, &sol.init, i) + k.conv.at(y, i))
                    .sum::<f64>()
            };
            worst = worst.max((s - sol.s_bar[i]).abs());
            worst = worst.max((sol.s_bar[i] * sol.foi_bar[i] - y[i]).abs());
            ysum += if i == 0 { 0.5 * dt * y[0] } else { dt * y[i] };
        }
        worst
    }
}

pub(crate) fn init_term(terms: &[(InitGroup, Vec<f64>)], init: &InitialFractions, i: usize) -> f64 {
    terms.iter().map(|(g, c)| g.fraction(init) * c[i]).sum()
}

fn coarse_table(half: &SojournTable, grid: &Grid) -> SojournTable {
    SojournTable {
        grid: *grid,
        g: coarse(&half.g),
        phi: coarse(&half.phi),
        psi: coarse(&half.psi),
        g0: coarse(&half.g0),
        phi0: coarse(&half.phi0),
        psi0: coarse(&half.psi0),
        f0i: coarse(&half.f0i),
        fcond: None,
        max_se: half.max_se,
    }
}

fn check_invariants(sol: &FllnSolution, lambda_star: f64) -> Result<()> {
    let n = sol.grid.steps();
    let bad = |what, index, value| Err(Error::InvariantViolation { what, index, value });
    for i in 0..=n {
        for (what, x) in [
            ("0 <= S <= 1", sol.s_bar[i]),
            ("0 <= E <= 1", sol.e_bar[i]),
            ("0 <= I <= 1", sol.i_bar[i]),
            ("0 <= R <= 1", sol.r_bar[i]),
        ] {
            if !(x >= -RANGE_TOL && x <= 1.0 + RANGE_TOL) {
                return bad(what, i, x);
            }
        }
        let total = sol.s_bar[i] + sol.e_bar[i] + sol.i_bar[i] + sol.r_bar[i];
        if (total - 1.0).abs() > SUM_TOL {
            return bad("S + E + I + R = 1", i, total);
        }
        let f = sol.foi_bar[i];
        if !(f >= -RANGE_TOL && f <= lambda_star * (1.0 + RANGE_TOL) + RANGE_TOL) {
            return bad("0 <= foi <= lambda*", i, f);
        }
        if matches!(sol.variant, Variant::Seir | Variant::Sir) && i > 0 && sol.s_bar[i] > sol.s_bar[i - 1] + 1e-12 {
            return bad("S nonincreasing", i, sol.s_bar[i]);
        }
    }
    Ok(())
}

/// Solve the deterministic limit of `variant` on `grid`.
pub fn solve_flln(models: &ModelSet, init: &InitialFractions, grid: &Grid, variant: Variant) -> Result<FllnSolution> {
    FllnSystem::new(models, grid, variant)?.solve(init)
}

/// Compartment curves from solved `(S, foi, Upsilon)` by trapezoidal
/// convolution against the sojourn table.
pub fn evaluate_compartments(
    core: CoreCurves<'_>,
    sojourn: &SojournTable,
    init: &InitialFractions,
    variant: Variant,
) -> Result<CompartmentCurves> {
    let n = sojourn.grid.steps();
    let y = core.upsilon_bar;
    if y.len() != n + 1 || core.s_bar.len() != n + 1 || core.foi_bar.len() != n + 1 {
        return Err(Error::GridMismatch("core curves and sojourn table differ in length".into()));
    }
    let mut out = CompartmentCurves {
        e_bar: vec![0.0; n + 1],
        i_bar: vec![0.0; n + 1],
        r_bar: vec![0.0; n + 1],
    };
    for (which, k, terms) in kernel_layout(sojourn, variant) {
        let conv = Conv::trapezoid(&k, sojourn.grid.dt());
        let curve: Vec<f64> = (0..=n).map(|i| init_term(&terms, init, i) + conv.at(y, i)).collect();
        match which {
            Compartment::E => out.e_bar = curve,
            Compartment::I => out.i_bar = curve,
            Compartment::R => out.r_bar = curve,
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::InfectivityModel;

    fn markov(beta: f64, gamma: f64) -> ModelSet {
        ModelSet::from_model(InfectivityModel::constant_markov(beta, gamma).unwrap()).unwrap()
    }

    // Classical SIR ODE by RK4 with a fine step.
    fn sir_ode(beta: f64, gamma: f64, i0: f64, t: f64) -> (f64, f64) {
        let h = 1e-4;
        let f = |s: f64, i: f64| (-beta * s * i, beta * s * i - gamma * i);
        let (mut s, mut i) = (1.0 - i0, i0);
        for _ in 0..(t / h).round() as usize {
            let k1 = f(s, i);
            let k2 = f(s + 0.5 * h * k1.0, i + 0.5 * h * k1.1);
            let k3 = f(s + 0.5 * h * k2.0, i + 0.5 * h * k2.1);
            let k4 = f(s + h * k3.0, i + h * k3.1);
            s += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            i += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        }
        (s, i)
    }

    #[test]
    fn markov_sir_matches_ode() {
        let grid = Grid::new(0.01, 10.0).unwrap();
        let init = InitialFractions { e0: 0.0, i0: 0.01, r0: 0.0 };
        let sol = solve_flln(&markov(2.0, 1.0), &init, &grid, Variant::Sir).unwrap();
        let (s, i) = sir_ode(2.0, 1.0, 0.01, 10.0);
        let n = grid.steps();
        assert!((sol.s_bar[n] - s).abs() < 2e-4, "{} vs {}", sol.s_bar[n], s);
        assert!((sol.i_bar[n] - i).abs() < 2e-4);
    }

    #[test]
    fn sis_reaches_endemic_level() {
        let grid = Grid::new(0.02, 40.0).unwrap();
        let init = InitialFractions { e0: 0.0, i0: 0.05, r0: 0.0 };
        let sys = FllnSystem::new(&markov(2.0, 1.0), &grid, Variant::Sis).unwrap();
        let sol = sys.solve(&init).unwrap();
        assert!((sol.i_bar[grid.steps()] - 0.5).abs() < 1e-3);
        assert!(sys.residual(&sol) < 1e-9);
    }
}
