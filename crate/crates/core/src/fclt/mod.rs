//! Fluctuation limit: driver covariance kernels, Gaussian driver sampling
//! and the linear stochastic Volterra equations.
//!
//! Fluctuations are `sqrt(N) (X^N - X)`. With that sign, the susceptible
//! fluctuation satisfies
//! `S(t) = -(E(0) + I(0) + R(0)) + W_S(t) - int_0^t Upsilon`, where `W_S` is
//! minus the compensated infection count.

mod kernels;
mod linalg;
mod solve;

use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use crate::grid::Grid;
use crate::rng::stream;
use crate::stats::{sample_covariance, Covariance};
use crate::{Error, Result, Variant};

pub use kernels::{build_covariance_kernels, CovKernelSet};
pub use linalg::{cholesky_with_jitter, Factor};
pub use solve::{solve_fclt_paths, FcltSolver};

/// Largest number of grid steps for which drivers are sampled.
pub const MAX_SAMPLING_STEPS: usize = 800;

/// Driver and output processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Process {
    S,
    Foi,
    E,
    I,
    R,
}

impl Process {
    pub fn name(self) -> &'static str {
        match self {
            Process::S => "S",
            Process::Foi => "FoI",
            Process::E => "E",
            Process::I => "I",
            Process::R => "R",
        }
    }
}

/// Driver processes of a variant.
pub fn processes(variant: Variant) -> &'static [Process] {
    match variant {
        Variant::Seir => &[Process::S, Process::Foi, Process::E, Process::I, Process::R],
        Variant::Sir => &[Process::S, Process::Foi, Process::I, Process::R],
        Variant::Sis => &[Process::Foi, Process::I],
        Variant::Sirs => &[Process::Foi, Process::I, Process::R],
    }
}

/// Sampled driver paths. `paths[r][x][i]` is `W_x(t_i)` on path `r` for
/// `x` indexing `processes`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriverEnsemble {
    pub grid: Grid,
    pub variant: Variant,
    pub processes: Vec<Process>,
    pub paths: Vec<Vec<Vec<f64>>>,
}

impl DriverEnsemble {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// `W_p` on path `r`, or `None` if the variant has no such driver.
    pub fn path(&self, r: usize, p: Process) -> Option<&[f64]> {
        let x = self.processes.iter().position(|&q| q == p)?;
        Some(&self.paths[r][x])
    }

    /// Every path multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for path in out.paths.iter_mut() {
            for w in path.iter_mut() {
                for v in w.iter_mut() {
                    *v *= c;
                }
            }
        }
        out
    }
}

/// Factor the kernels and draw `count` driver paths.
pub fn sample_gaussian_drivers(kernels: &CovKernelSet, seed: u64, count: usize) -> Result<DriverEnsemble> {
    if kernels.grid.steps() > MAX_SAMPLING_STEPS {
        return Err(Error::param(
            "grid",
            alloc::format!("driver sampling supports at most {MAX_SAMPLING_STEPS} steps"),
        ));
    }
    let (d, cov) = kernels.assemble();
    let factor = cholesky_with_jitter(&cov, d)?;
    Ok(sample_with_factor(kernels, &factor, seed, count))
}

/// Draw `count` driver paths from a factor of `kernels.assemble()`.
pub fn sample_with_factor(kernels: &CovKernelSet, factor: &Factor, seed: u64, count: usize) -> DriverEnsemble {
    let sampled = kernels.sampled_processes();
    let n1 = kernels.grid.len();
    let d = factor.dim;
    let paths = crate::par::map(count, |r| {
        let mut rng = stream(seed, r as u64);
        let z: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut x = alloc::vec![0.0; d];
        factor.apply(&z, &mut x);
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(kernels.processes.len());
        for &p in &kernels.processes {
            match sampled.iter().position(|&q| q == p) {
                Some(k) => out.push(x[k * n1..(k + 1) * n1].to_vec()),
                None => out.push(alloc::vec![0.0; n1]),
            }
        }
        // The last compartment of the partition closes the sum to zero.
        if let Some(rx) = kernels.processes.iter().position(|&p| p == Process::R) {
            if !sampled.contains(&Process::R) {
                for i in 0..n1 {
                    let mut s = 0.0;
                    for (k, &p) in kernels.processes.iter().enumerate() {
                        if matches!(p, Process::S | Process::E | Process::I) {
                            s += out[k][i];
                        }
                    }
                    out[rx][i] = -s;
                }
            }
        }
        out
    });
    DriverEnsemble {
        grid: kernels.grid,
        variant: kernels.variant,
        processes: kernels.processes.clone(),
        paths,
    }
}

/// Initial fluctuations `(E(0), I(0), R(0))` of one path.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InitialFluctuation {
    pub e0: f64,
    pub i0: f64,
    pub r0: f64,
}

/// `count` Gaussian initial fluctuations with covariance `cov` over
/// `(E(0), I(0), R(0))`.
pub fn gaussian_initial_draws(cov: [[f64; 3]; 3], count: usize, seed: u64) -> Result<Vec<InitialFluctuation>> {
    let flat: Vec<f64> = cov.iter().flatten().copied().collect();
    let all_zero = flat.iter().all(|&v| v == 0.0);
    if all_zero {
        return Ok(alloc::vec![InitialFluctuation::default(); count]);
    }
    for a in 0..3 {
        for b in 0..3 {
            if (cov[a][b] - cov[b][a]).abs() > 1e-12 * (1.0 + cov[a][b].abs()) {
                return Err(Error::param("initial covariance", "must be symmetric"));
            }
        }
    }
    let f = cholesky_with_jitter(&flat, 3)?;
    Ok((0..count)
        .map(|r| {
            let mut rng = stream(seed, r as u64);
            let z: Vec<f64> = (0..3).map(|_| StandardNormal.sample(&mut rng)).collect();
            let mut x = [0.0; 3];
            f.apply(&z, &mut x);
            InitialFluctuation {
                e0: x[0],
                i0: x[1],
                r0: x[2],
            }
        })
        .collect())
}

/// One solved fluctuation path.
#[derive(Debug, Clone, PartialEq)]
pub struct FcltPath {
    pub s: Vec<f64>,
    pub foi: Vec<f64>,
    pub e: Vec<f64>,
    pub i: Vec<f64>,
    pub r: Vec<f64>,
    pub upsilon: Vec<f64>,
}

/// Output process of the fluctuation limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Output {
    S,
    Foi,
    E,
    I,
    R,
    Upsilon,
}

impl Output {
    pub const ALL: [Output; 6] = [Output::S, Output::Foi, Output::E, Output::I, Output::R, Output::Upsilon];

    pub fn name(self) -> &'static str {
        match self {
            Output::S => "S",
            Output::Foi => "FoI",
            Output::E => "E",
            Output::I => "I",
            Output::R => "R",
            Output::Upsilon => "Upsilon",
        }
    }
}

impl FcltPath {
    pub fn get(&self, o: Output) -> &[f64] {
        match o {
            Output::S => &self.s,
            Output::Foi => &self.foi,
            Output::E => &self.e,
            Output::I => &self.i,
            Output::R => &self.r,
            Output::Upsilon => &self.upsilon,
        }
    }
}

/// Solved fluctuation paths with the drivers and initial draws that
/// produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct FcltEnsemble {
    pub grid: Grid,
    pub variant: Variant,
    pub paths: Vec<FcltPath>,
    pub drivers: DriverEnsemble,
    pub init: Vec<InitialFluctuation>,
}

/// Sample covariance of `outputs` at `times` across the ensemble, with
/// jackknife standard errors. Variables are ordered output-major:
/// `(outputs[0] at times[0], outputs[0] at times[1], ...)`.
pub fn limit_covariance_estimate(ensemble: &FcltEnsemble, outputs: &[Output], times: &[f64]) -> Covariance {
    let idx: Vec<usize> = times.iter().map(|&t| ensemble.grid.index_of(t)).collect();
    let rows: Vec<Vec<f64>> = ensemble
        .paths
        .iter()
        .map(|p| {
            outputs
                .iter()
                .flat_map(|&o| idx.iter().map(move |&k| p.get(o)[k]))
                .collect()
        })
        .collect();
    sample_covariance(&rows)
}
