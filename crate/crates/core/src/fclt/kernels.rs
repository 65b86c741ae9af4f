//! Covariance kernels of the Gaussian drivers.
//!
//! Each infection at time `s` contributes its centered-free second moments
//! `E[Y_a(t - s) Y_b(t' - s)]` integrated against `Upsilon(s) ds` (the
//! compensated Poisson part), and each initial group contributes its
//! centered covariance weighted by the group's fraction. `Y_S` is minus the
//! sum of the compartment indicators, so the drivers of a partition sum to
//! zero by construction.

use alloc::vec;
use alloc::vec::Vec;

use super::Process;
use crate::duration::DurationLaw;
use crate::flln::FllnSolution;
use crate::grid::Grid;
use crate::infectivity::structure::{first_moment, mass, second_moment, ClockLaw, Profile, Support, TwoStage, WidthFrom};
use crate::infectivity::tables::{BinTable, Span};
use crate::infectivity::{Mapping, SojournTable};
use crate::setup::ModelSet;
use crate::{Error, Result, Variant};

/// One law read through its compartment clocks.
struct Law {
    tab: BinTable,
    support: Support,
}

impl Law {
    fn new(clock: &ClockLaw, grid: &Grid) -> Self {
        Law {
            tab: clock.bin_table(grid),
            support: clock.support(),
        }
    }

    fn region(&self, variant: Variant, p: Process, k: usize) -> (Span, Span) {
        let t = &self.tab;
        match p {
            Process::Foi => match self.support {
                Support::Between => (t.le(k), t.gt(k)),
                Support::BeforeFirst => (t.gt(k), t.all()),
            },
            Process::E => (t.gt(k), t.all()),
            Process::I => match variant {
                Variant::Seir => (t.le(k), t.gt(k)),
                Variant::Sir | Variant::Sis => (t.all(), t.gt(k)),
                Variant::Sirs => (t.gt(k), t.all()),
            },
            Process::R => match variant {
                Variant::Sirs => (t.le(k), t.gt(k)),
                _ => (t.all(), t.le(k)),
            },
            Process::S => unreachable!("S is not a clock region"),
        }
    }

    fn mean(&self, variant: Variant, p: Process, k: usize, t: f64) -> f64 {
        let (u, v) = self.region(variant, p, k);
        let w = self.tab.query(u, v);
        match p {
            Process::Foi => first_moment(&w, t),
            _ => mass(&w),
        }
    }

    /// `E[Y_a(t_k) Y_b(t_l)]` for non-S processes.
    fn moment(&self, variant: Variant, a: Process, k: usize, ta: f64, b: Process, l: usize, tb: f64) -> f64 {
        let (ua, va) = self.region(variant, a, k);
        let (ub, vb) = self.region(variant, b, l);
        let (u, v) = (ua.meet(ub), va.meet(vb));
        if u.is_empty() || v.is_empty() {
            return 0.0;
        }
        let w = self.tab.query(u, v);
        match (a, b) {
            (Process::Foi, Process::Foi) => second_moment(&w, ta, tb),
            (Process::Foi, _) => first_moment(&w, ta),
            (_, Process::Foi) => first_moment(&w, tb),
            _ => mass(&w),
        }
    }
}

/// Compartments whose indicators partition an infection, for the variants
/// that carry an `S` driver.
fn partition(variant: Variant) -> &'static [Process] {
    match variant {
        Variant::Seir => &[Process::E, Process::I, Process::R],
        Variant::Sir => &[Process::I, Process::R],
        Variant::Sis | Variant::Sirs => &[],
    }
}

/// Covariances `Cov(W_a(t_i), W_b(t_j))` of the driving Gaussian process on
/// the grid of the deterministic limit it linearizes around.
#[derive(Debug, Clone, PartialEq)]
pub struct CovKernelSet {
    pub grid: Grid,
    pub variant: Variant,
    pub processes: Vec<Process>,
    /// Upper-triangular list of blocks, each `(n+1) x (n+1)` row-major.
    blocks: Vec<Vec<f64>>,
    pub flln: FllnSolution,
}

impl CovKernelSet {
    fn slot(&self, a: usize, b: usize) -> usize {
        let m = self.processes.len();
        a * m - a * (a + 1) / 2 + b
    }

    fn index(&self, p: Process) -> Option<usize> {
        self.processes.iter().position(|&q| q == p)
    }

    /// `Cov(W_a(t_i), W_b(t_j))`; zero for processes the variant lacks.
    pub fn get(&self, a: Process, b: Process, i: usize, j: usize) -> f64 {
        let (Some(x), Some(y)) = (self.index(a), self.index(b)) else {
            return 0.0;
        };
        let n1 = self.grid.len();
        if x <= y {
            self.blocks[self.slot(x, y)][i * n1 + j]
        } else {
            self.blocks[self.slot(y, x)][j * n1 + i]
        }
    }

    /// Block `(a, b)` as a row-major `(n+1) x (n+1)` matrix.
    pub fn block(&self, a: Process, b: Process) -> Vec<f64> {
        let n1 = self.grid.len();
        let mut out = vec![0.0; n1 * n1];
        for i in 0..n1 {
            for j in 0..n1 {
                out[i * n1 + j] = self.get(a, b, i, j);
            }
        }
        out
    }

    /// Processes sampled jointly; the last compartment of a partition is
    /// recovered from the others.
    pub fn sampled_processes(&self) -> Vec<Process> {
        match self.variant {
            Variant::Seir | Variant::Sir => self.processes.iter().copied().filter(|&p| p != Process::R).collect(),
            _ => self.processes.clone(),
        }
    }

    /// The joint covariance of the sampled processes over all grid times,
    /// process-major, with its dimension.
    pub fn assemble(&self) -> (usize, Vec<f64>) {
        let ps = self.sampled_processes();
        let n1 = self.grid.len();
        let d = ps.len() * n1;
        let mut out = vec![0.0; d * d];
        for (x, &a) in ps.iter().enumerate() {
            for (y, &b) in ps.iter().enumerate() {
                for i in 0..n1 {
                    for j in 0..n1 {
                        out[(x * n1 + i) * d + y * n1 + j] = self.get(a, b, i, j);
                    }
                }
            }
        }
        (d, out)
    }

    /// Variance of `W_S + W_E + W_I + W_R` at `t_i`.
    pub fn partition_sum_variance(&self, i: usize) -> f64 {
        let mut ps: Vec<Process> = partition(self.variant).to_vec();
        ps.push(Process::S);
        let mut v = 0.0;
        for &a in &ps {
            for &b in &ps {
                v += self.get(a, b, i, i);
            }
        }
        v
    }
}

/// Trapezoid weights for `int_0^{t_m}` on the grid.
fn trap(m: usize, k: usize, dt: f64) -> f64 {
    if m == 0 {
        0.0
    } else if k == 0 || k == m {
        0.5 * dt
    } else {
        dt
    }
}

/// Assemble every driver covariance block for `variant`.
///
/// `sojourn` must share the grid of `flln`; it is used only for that check,
/// the kernels being read from the laws directly.
pub fn build_covariance_kernels(
    models: &ModelSet,
    flln: &FllnSolution,
    sojourn: &SojournTable,
    grid: &Grid,
    variant: Variant,
) -> Result<CovKernelSet> {
    if !flln.grid.same_as(grid) || !sojourn.grid.same_as(grid) {
        return Err(Error::GridMismatch("kernels, limit and sojourn table must share one grid".into()));
    }
    if flln.variant != variant {
        return Err(Error::GridMismatch("limit solved for another variant".into()));
    }
    models.validate(variant)?;
    let processes = super::processes(variant).to_vec();
    let n1 = grid.len();
    let dt = grid.dt();
    let mapping = models.mapping(variant);
    let fresh = Law::new(&models.model.clock(mapping)?, grid);

    let init = flln.init;
    let mut initial: Vec<(f64, Law)> = Vec::new();
    if init.e0 > 0.0 {
        initial.push((init.e0, Law::new(&models.model0.clock(Mapping::Seir)?, grid)));
    }
    if init.i0 > 0.0 {
        initial.push((init.i0, Law::new(&models.model0i.clock(mapping)?, grid)));
    }
    if variant == Variant::Sirs && init.r0 > 0.0 {
        let y0 = models
            .immunity0_law()
            .ok_or_else(|| Error::param("immunity", "required for SIRS"))?;
        let clock = ClockLaw::Two(TwoStage {
            x: DurationLaw::Zero,
            d: y0,
            profile: Profile::Constant(0.0),
            width: WidthFrom::First,
            support: Support::BeforeFirst,
        });
        initial.push((init.r0, Law::new(&clock, grid)));
    }

    let comps = partition(variant);
    // Extended moment including S = -sum of the partition.
    let moment = |law: &Law, a: Process, k: usize, b: Process, l: usize| -> f64 {
        let (ta, tb) = (grid.t(k), grid.t(l));
        match (a, b) {
            (Process::S, Process::S) => comps
                .iter()
                .map(|&c| comps.iter().map(|&d| law.moment(variant, c, k, ta, d, l, tb)).sum::<f64>())
                .sum(),
            (Process::S, _) => -comps.iter().map(|&c| law.moment(variant, c, k, ta, b, l, tb)).sum::<f64>(),
            (_, Process::S) => -comps.iter().map(|&c| law.moment(variant, a, k, ta, c, l, tb)).sum::<f64>(),
            _ => law.moment(variant, a, k, ta, b, l, tb),
        }
    };

    let y = &flln.upsilon_bar;
    let m = processes.len();
    let mut blocks = Vec::with_capacity(m * (m + 1) / 2);
    for x in 0..m {
        for z in x..m {
            let (a, b) = (processes[x], processes[z]);
            // Lagged moments of a fresh infection.
            let lag: Vec<f64> = crate::par::map(n1, |p| (0..n1).map(|q| moment(&fresh, a, p, b, q)).collect::<Vec<f64>>())
                .concat();
            let rows = crate::par::map(n1, |i| {
                let mut row = vec![0.0; n1];
                for (j, out) in row.iter_mut().enumerate() {
                    let top = i.min(j);
                    let mut acc = 0.0;
                    for k in 0..=top {
                        acc += trap(top, k, dt) * y[k] * lag[(i - k) * n1 + (j - k)];
                    }
                    for (w, law) in &initial {
                        if a == Process::S || b == Process::S {
                            continue;
                        }
                        let mi = law.mean(variant, a, i, grid.t(i));
                        let mj = law.mean(variant, b, j, grid.t(j));
                        acc += w * (law.moment(variant, a, i, grid.t(i), b, j, grid.t(j)) - mi * mj);
                    }
                    *out = acc;
                }
                row
            });
            let mut block = rows.concat();
            if x == z {
                // Mirror the upper triangle so the block is exactly symmetric.
                for i in 0..n1 {
                    for j in 0..i {
                        block[i * n1 + j] = block[j * n1 + i];
                    }
                }
            }
            blocks.push(block);
        }
    }
    Ok(CovKernelSet {
        grid: *grid,
        variant,
        processes,
        blocks,
        flln: flln.clone(),
    })
}
