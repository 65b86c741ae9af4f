//! Exact simulation of the `N`-individual epidemic.
//!
//! Infections are generated by thinning: between structural events the rate
//! `(S/N) * sum of infectivity bounds of infectious agents` dominates the true
//! infection rate, candidates are proposed from that clock and accepted with
//! the ratio of true to dominating rate, the true rate being re-evaluated at
//! the candidate time.

mod counts;
mod engine;

use alloc::vec::Vec;

use crate::grid::Grid;
use crate::infectivity::InfectivityPath;
use crate::setup::{InitialFractions, ModelSet};
use crate::{Error, Result, Variant};

pub use counts::{count_processes, GridCounts};
pub use engine::simulate_epidemic;

/// How the initial compartment sizes are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitMode {
    /// `round(N * fraction)`.
    #[default]
    Deterministic,
    /// Multinomial with the given fractions.
    Binomial,
}

/// Everything needed to run the stochastic epidemic.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub variant: Variant,
    pub population: usize,
    pub horizon: f64,
    pub delta: f64,
    pub init: InitialFractions,
    pub models: ModelSet,
    pub seed: u64,
    pub replications: usize,
    pub init_mode: InitMode,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.population == 0 {
            return Err(Error::param("N", "population must be at least 1"));
        }
        if self.population > u32::MAX as usize {
            return Err(Error::param("N", "population too large"));
        }
        if self.replications == 0 {
            return Err(Error::param("replications", "must be at least 1"));
        }
        self.grid()?;
        self.init.validate(self.variant)?;
        self.models.validate(self.variant)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.delta, self.horizon)
    }

    /// Seed of replication `r`.
    pub fn replication_seed(&self, r: u64) -> u64 {
        crate::rng::split(self.seed, r)
    }
}

/// Which initial group an individual belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitialGroup {
    Exposed,
    Infectious,
    Recovered,
}

/// One infection during the run.
///
/// `zeta` and `eta` are the compartment durations: exposed and infectious
/// periods for SIR/SEIR/SIS, and infectious and immune periods for SIRS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfectionRecord {
    pub tau: f64,
    pub zeta: f64,
    pub eta: f64,
    pub agent: u32,
}

/// An individual that is not susceptible at time zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialRecord {
    pub agent: u32,
    pub group: InitialGroup,
    /// Remaining infectivity; `None` for the initially recovered.
    pub path: Option<InfectivityPath>,
    /// Same meaning as in [`InfectionRecord`], measured from time zero.
    pub zeta: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrajectory {
    pub variant: Variant,
    pub population: usize,
    pub grid: Grid,
    pub events: Vec<InfectionRecord>,
    pub initial_records: Vec<InitialRecord>,
    pub counts: GridCounts,
    /// Aggregate force of infection on the grid.
    pub foi: Vec<f64>,
    /// `(S / N) * foi` on the grid.
    pub upsilon: Vec<f64>,
}

impl SimulationTrajectory {
    /// Cumulative number of infections at each grid time.
    pub fn cumulative_infections(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.grid.len());
        let mut j = 0;
        for t in self.grid.times() {
            while j < self.events.len() && self.events[j].tau <= t {
                j += 1;
            }
            out.push(j as u64);
        }
        out
    }
}

/// Exact aggregate infectivity at time `t` of agents infected at `tau` with
/// the given paths.
pub fn aggregate_infectivity<'a, I>(agents: I, t: f64) -> f64
where
    I: IntoIterator<Item = (f64, &'a InfectivityPath)>,
{
    agents
        .into_iter()
        .filter(|(tau, _)| t >= *tau)
        .map(|(tau, p)| p.eval(t - tau))
        .sum()
}
