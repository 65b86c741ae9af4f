use alloc::vec::Vec;

use super::model::{Family, InfectivityModel, Mapping};
use crate::grid::Grid;
use crate::setup::ModelSet;
use crate::{Result, Variant};

/// Sojourn distributions on a grid.
///
/// For new infections: `g` is the law of the first clock (end of the exposed
/// period), `phi` the law of the second clock (end of the infected period) and
/// `psi = g - phi` the probability of sitting between them. The `*0` arrays
/// are the same quantities for the initially exposed, and `f0i` is the law of
/// the remaining infected period of the initially infectious.
///
/// Under SIRS the clocks are read as (end of infection, end of immunity); the
/// `*0` arrays then describe the initially infectious and `f0i` the remaining
/// immunity of the initially recovered.
#[derive(Debug, Clone, PartialEq)]
pub struct SojournTable {
    pub grid: Grid,
    pub g: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub g0: Vec<f64>,
    pub phi0: Vec<f64>,
    pub psi0: Vec<f64>,
    pub f0i: Vec<f64>,
    /// `fcond[i * len + j] = F(t_j | t_i)`, the infectious-period CDF given the
    /// exposed duration. Present for independent laws on modest grids.
    pub fcond: Option<Vec<f64>>,
    /// Largest Monte Carlo standard error among the entries (0 when exact).
    pub max_se: f64,
}

const FCOND_MAX_CELLS: usize = 4_000_000;

/// Sojourn table for the SEIR reading of the three laws.
pub fn compute_sojourn_table(
    model: &InfectivityModel,
    model0: &InfectivityModel,
    model0i: &InfectivityModel,
    grid: &Grid,
) -> Result<SojournTable> {
    let new = model.clock(Mapping::Seir)?.tables(grid);
    let init = model0.clock(Mapping::Seir)?.tables(grid);
    let inf = model0i.clock(Mapping::Seir)?.tables(grid);
    let fcond = conditional(model, grid);
    Ok(assemble(grid, &new, &init, inf.p_second.clone(), inf.se, fcond))
}

impl SojournTable {
    /// Table in the reading used by `variant`.
    pub fn for_variant(models: &ModelSet, grid: &Grid, variant: Variant) -> Result<Self> {
        models.validate(variant)?;
        match models.mapping(variant) {
            Mapping::Seir => compute_sojourn_table(&models.model, &models.model0, &models.model0i, grid),
            m @ Mapping::Sirs(_) => {
                let new = models.model.clock(m)?.tables(grid);
                let init = models.model0i.clock(m)?.tables(grid);
                let y0 = models.immunity0_law().expect("validated");
                let f0 = grid.times().map(|t| y0.cdf(t)).collect();
                Ok(assemble(grid, &new, &init, f0, 0.0, None))
            }
        }
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }
}

fn assemble(
    grid: &Grid,
    new: &super::tables::Tables1d,
    init: &super::tables::Tables1d,
    f0i: Vec<f64>,
    f0i_se: f64,
    fcond: Option<Vec<f64>>,
) -> SojournTable {
    let psi = new.p_first.iter().zip(&new.p_second).map(|(a, b)| a - b).collect();
    let psi0 = init.p_first.iter().zip(&init.p_second).map(|(a, b)| a - b).collect();
    SojournTable {
        grid: *grid,
        g: new.p_first.clone(),
        phi: new.p_second.clone(),
        psi,
        g0: init.p_first.clone(),
        phi0: init.p_second.clone(),
        psi0,
        f0i,
        fcond,
        max_se: new.se.max(init.se).max(f0i_se),
    }
}

fn conditional(model: &InfectivityModel, grid: &Grid) -> Option<Vec<f64>> {
    let n = grid.len();
    if n * n > FCOND_MAX_CELLS {
        return None;
    }
    let law = match model.family() {
        Family::ConstantMarkov { gamma, .. } => crate::DurationLaw::Exponential { rate: *gamma },
        Family::PiecewiseIndicator { infectious, .. } => *infectious,
        Family::ContinuousBump { infected, .. } => *infected,
        Family::AgedInitial { .. } => return None,
    };
    let row: Vec<f64> = grid.times().map(|t| law.cdf(t)).collect();
    let mut out = Vec::with_capacity(n * n);
    for _ in 0..n {
        out.extend_from_slice(&row);
    }
    Some(out)
}
