use alloc::vec;
use alloc::vec::Vec;

use super::{DriverEnsemble, FcltEnsemble, FcltPath, InitialFluctuation, Process};
use crate::flln::{init_term, kernel_layout, Compartment, FllnSolution, InitTerms};
use crate::grid::Grid;
use crate::infectivity::SojournTable;
use crate::setup::InitialFractions;
use crate::volterra::Conv;
use crate::{Error, Result, Variant};

/// Per-path solver of the linear fluctuation equations around a fixed
/// deterministic limit, using trapezoidal convolutions.
#[derive(Debug, Clone)]
pub struct FcltSolver {
    grid: Grid,
    variant: Variant,
    s_bar: Vec<f64>,
    foi_bar: Vec<f64>,
    lambda0_bar: Vec<f64>,
    lambda0i_bar: Vec<f64>,
    lambda_conv: Conv,
    kernels: Vec<(Compartment, Conv, InitTerms)>,
}

impl FcltSolver {
    pub fn new(flln: &FllnSolution, sojourn: &SojournTable, grid: &Grid, variant: Variant) -> Result<Self> {
        if !flln.grid.same_as(grid) || !sojourn.grid.same_as(grid) {
            return Err(Error::GridMismatch("limit, sojourn table and grid differ".into()));
        }
        if flln.variant != variant {
            return Err(Error::GridMismatch("limit solved for another variant".into()));
        }
        let dt = grid.dt();
        let kernels = kernel_layout(sojourn, variant)
            .into_iter()
            .map(|(c, k, init)| (c, Conv::trapezoid(&k, dt), init))
            .collect();
        Ok(FcltSolver {
            grid: *grid,
            variant,
            s_bar: flln.s_bar.clone(),
            foi_bar: flln.foi_bar.clone(),
            lambda0_bar: flln.lambda0_bar.clone(),
            lambda0i_bar: flln.lambda0i_bar.clone(),
            lambda_conv: Conv::trapezoid(&flln.lambda_bar, dt),
            kernels,
        })
    }

    fn explicit_s(&self) -> bool {
        matches!(self.variant, Variant::Seir | Variant::Sir)
    }

    /// Solve one path. `drivers[x]` is the driver of `processes(variant)[x]`.
    pub fn solve(&self, drivers: &[Vec<f64>], init: &InitialFluctuation) -> Result<FcltPath> {
        let procs = super::processes(self.variant);
        let n1 = self.grid.len();
        let dt = self.grid.dt();
        let zero = vec![0.0; n1];
        let w = |p: Process| -> &[f64] {
            match procs.iter().position(|&q| q == p) {
                Some(x) => &drivers[x],
                None => &zero,
            }
        };
        let fl = InitialFractions {
            e0: init.e0,
            i0: init.i0,
            r0: init.r0,
        };
        let mut s = vec![0.0; n1];
        let mut f = vec![0.0; n1];
        let mut y = vec![0.0; n1];
        let mut comp = vec![vec![0.0; n1]; self.kernels.len()];
        let mut ysum = 0.0;
        for i in 0..n1 {
            // S_i = a - sc * Y_i and F_i = b + fc * Y_i.
            let (a, sc) = if self.explicit_s() {
                let a = -(init.e0 + init.i0 + init.r0) + w(Process::S)[i] - ysum;
                (a, if i == 0 { 0.0 } else { 0.5 * dt })
            } else {
                let mut a = 0.0;
                let mut sc = 0.0;
                for (c, (which, conv, terms)) in self.kernels.iter().enumerate() {
                    let base = init_term(terms, &fl, i) + w(process_of(*which))[i] + conv.partial(&y, i);
                    comp[c][i] = base;
                    a -= base;
                    if i > 0 {
                        sc += conv.head();
                    }
                }
                (a, sc)
            };
            let b = init.e0 * self.lambda0_bar[i]
                + init.i0 * self.lambda0i_bar[i]
                + w(Process::Foi)[i]
                + self.lambda_conv.partial(&y, i);
            let fc = if i == 0 { 0.0 } else { self.lambda_conv.head() };
            let den = 1.0 + sc * self.foi_bar[i] - fc * self.s_bar[i];
            if !(den.abs() > 1e-12) {
                return Err(Error::SingularStep { step: i });
            }
            y[i] = (a * self.foi_bar[i] + self.s_bar[i] * b) / den;
            s[i] = a - sc * y[i];
            f[i] = b + fc * y[i];
            if !self.explicit_s() && i > 0 {
                for (c, (_, conv, _)) in self.kernels.iter().enumerate() {
                    comp[c][i] += conv.head() * y[i];
                }
            }
            ysum += if i == 0 { 0.5 * dt * y[0] } else { dt * y[i] };
        }
        if self.explicit_s() {
            // Compartments follow explicitly once Upsilon is known.
            for (c, (which, conv, terms)) in self.kernels.iter().enumerate() {
                let wc = w(process_of(*which));
                for i in 0..n1 {
                    comp[c][i] = init_term(terms, &fl, i) + wc[i] + conv.at(&y, i);
                }
            }
        }
        let mut out = FcltPath {
            s,
            foi: f,
            e: vec![0.0; n1],
            i: vec![0.0; n1],
            r: vec![0.0; n1],
            upsilon: y,
        };
        for ((which, _, _), c) in self.kernels.iter().zip(comp) {
            match which {
                Compartment::E => out.e = c,
                Compartment::I => out.i = c,
                Compartment::R => out.r = c,
            }
        }
        Ok(out)
    }

    /// Largest discrepancy between a solved path and the discretized
    /// right-hand sides evaluated on it.
    pub fn residual(&self, drivers: &[Vec<f64>], init: &InitialFluctuation, path: &FcltPath) -> f64 {
        let procs = super::processes(self.variant);
        let n1 = self.grid.len();
        let dt = self.grid.dt();
        let zero = vec![0.0; n1];
        let w = |p: Process| -> &[f64] {
            match procs.iter().position(|&q| q == p) {
                Some(x) => &drivers[x],
                None => &zero,
            }
        };
        let y = &path.upsilon;
        let mut worst = 0.0f64;
        let mut trap = 0.0;
        for i in 0..n1 {
            let f = init.e0 * self.lambda0_bar[i]
                + init.i0 * self.lambda0i_bar[i]
                + w(Process::Foi)[i]
                + self.lambda_conv.at(y, i);
            worst = worst.max((f - path.foi[i]).abs());
            if i > 0 {
                trap += 0.5 * dt * (y[i - 1] + y[i]);
            }
            if self.explicit_s() {
                let s = -(init.e0 + init.i0 + init.r0) + w(Process::S)[i] - trap;
                worst = worst.max((s - path.s[i]).abs());
            }
            let ups = path.s[i] * self.foi_bar[i] + self.s_bar[i] * path.foi[i];
            worst = worst.max((ups - y[i]).abs());
        }
        worst
    }
}

fn process_of(c: Compartment) -> Process {
    match c {
        Compartment::E => Process::E,
        Compartment::I => Process::I,
        Compartment::R => Process::R,
    }
}

/// Solve every driver path. `init` is either empty (all initial
/// fluctuations zero) or has one entry per path.
pub fn solve_fclt_paths(
    drivers: DriverEnsemble,
    init: &[InitialFluctuation],
    flln: &FllnSolution,
    sojourn: &SojournTable,
    grid: &Grid,
    variant: Variant,
) -> Result<FcltEnsemble> {
    if !drivers.grid.same_as(grid) || drivers.variant != variant {
        return Err(Error::GridMismatch("drivers were sampled for another grid or variant".into()));
    }
    if !init.is_empty() && init.len() != drivers.len() {
        return Err(Error::param("init", "need one initial fluctuation per driver path"));
    }
    let solver = FcltSolver::new(flln, sojourn, grid, variant)?;
    let init: Vec<InitialFluctuation> = if init.is_empty() {
        vec![InitialFluctuation::default(); drivers.len()]
    } else {
        init.to_vec()
    };
    let solved = crate::par::map(drivers.len(), |r| solver.solve(&drivers.paths[r], &init[r]));
    let paths = solved.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(FcltEnsemble {
        grid: *grid,
        variant,
        paths,
        drivers,
        init,
    })
}
