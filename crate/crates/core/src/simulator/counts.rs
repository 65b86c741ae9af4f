use alloc::vec;
use alloc::vec::Vec;

use super::{InitialGroup, SimulationTrajectory};
use crate::grid::Grid;
use crate::Variant;

/// Compartment counts on a grid.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GridCounts {
    pub s: Vec<u32>,
    pub e: Vec<u32>,
    pub i: Vec<u32>,
    pub r: Vec<u32>,
}

impl GridCounts {
    pub(crate) fn with_capacity(n: usize) -> Self {
        GridCounts {
            s: Vec::with_capacity(n),
            e: Vec::with_capacity(n),
            i: Vec::with_capacity(n),
            r: Vec::with_capacity(n),
        }
    }

    pub(crate) fn push(&mut self, s: u32, e: u32, i: u32, r: u32) {
        self.s.push(s);
        self.e.push(e);
        self.i.push(i);
        self.r.push(r);
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
}

/// Recount compartments from the event log by indicator sums.
pub fn count_processes(traj: &SimulationTrajectory, grid: &Grid) -> GridCounts {
    let n = grid.steps();
    let mut de = vec![0i64; n + 2];
    let mut di = vec![0i64; n + 2];
    let mut dr = vec![0i64; n + 2];
    // Add one on grid times in [a, b).
    let add = |d: &mut Vec<i64>, a: f64, b: f64| {
        let lo = grid.bin(a);
        let hi = if b == f64::INFINITY { n + 1 } else { grid.bin(b) };
        if lo < hi && lo <= n {
            d[lo] += 1;
            d[hi.min(n + 1)] -= 1;
        }
    };
    let variant = traj.variant;
    let place = |de: &mut Vec<i64>, di: &mut Vec<i64>, dr: &mut Vec<i64>, tau: f64, zeta: f64, eta: f64| {
        let first = tau + zeta;
        let second = first + eta;
        match variant {
            Variant::Seir => {
                add(de, tau, first);
                add(di, first, second);
                add(dr, second, f64::INFINITY);
            }
            Variant::Sir => {
                add(di, tau, second);
                add(dr, second, f64::INFINITY);
            }
            Variant::Sis => add(di, tau, second),
            Variant::Sirs => {
                add(di, tau, first);
                add(dr, first, second);
            }
        }
    };
    for rec in &traj.initial_records {
        match rec.group {
            InitialGroup::Recovered => match variant {
                Variant::Sirs => add(&mut dr, 0.0, rec.eta),
                _ => add(&mut dr, 0.0, f64::INFINITY),
            },
            _ => place(&mut de, &mut di, &mut dr, 0.0, rec.zeta, rec.eta),
        }
    }
    for ev in &traj.events {
        place(&mut de, &mut di, &mut dr, ev.tau, ev.zeta, ev.eta);
    }
    let mut out = GridCounts::with_capacity(n + 1);
    let (mut e, mut i, mut r) = (0i64, 0i64, 0i64);
    for k in 0..=n {
        e += de[k];
        i += di[k];
        r += dr[k];
        let s = traj.population as i64 - e - i - r;
        out.push(s as u32, e as u32, i as u32, r as u32);
    }
    out
}
