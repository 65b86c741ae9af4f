//! Grid tabulations of clock laws.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::structure::{axpy, first_moment, weights, ClockLaw, Iv, Row, Support, TwoStage, W10, ZERO10};
use crate::grid::Grid;

/// `P(U <= t_m)`, `P(V <= t_m)` and `E[lambda(t_m)]` on a grid.
#[derive(Debug, Clone)]
pub(crate) struct Tables1d {
    pub p_first: Vec<f64>,
    pub p_second: Vec<f64>,
    pub mean: Vec<f64>,
    /// Largest Monte Carlo standard error among the CDF entries.
    pub se: f64,
}

impl ClockLaw {
    pub fn tables(&self, grid: &Grid) -> Tables1d {
        match self {
            ClockLaw::Two(two) => two_tables(two, grid),
            ClockLaw::Sampled(s) => sampled_tables(&s.rows, s.support, grid),
        }
    }

    pub fn bin_table(&self, grid: &Grid) -> BinTable {
        match self {
            ClockLaw::Two(two) => two_bins(two, grid),
            ClockLaw::Sampled(s) => sampled_bins(&s.rows, grid),
        }
    }
}

fn two_tables(two: &TwoStage, grid: &Grid) -> Tables1d {
    let n = grid.len();
    let mut p_first = Vec::with_capacity(n);
    let mut p_second = Vec::with_capacity(n);
    for t in grid.times() {
        p_first.push(two.p_first(t));
        p_second.push(two.p_second(t));
    }
    let mean = match two.profile {
        super::structure::Profile::Constant(b) => (0..n)
            .map(|m| match two.support {
                Support::Between => b * (p_first[m] - p_second[m]),
                Support::BeforeFirst => b * (1.0 - p_first[m]),
            })
            .collect(),
        super::structure::Profile::Bump(_) => grid
            .times()
            .map(|t| {
                let (u, v) = two.support.at(t);
                first_moment(&two.rect(u, v), t)
            })
            .collect(),
    };
    Tables1d {
        p_first,
        p_second,
        mean,
        se: 0.0,
    }
}

fn sampled_tables(rows: &[Row], support: Support, grid: &Grid) -> Tables1d {
    let n = grid.steps();
    let m = rows.len() as f64;
    let mut cu = vec![0.0; n + 2];
    let mut cv = vec![0.0; n + 2];
    // Difference arrays for each coefficient over the grid indices where
    // the realization is active.
    let mut d = vec![[0.0f64; 3]; n + 2];
    for r in rows {
        let ku = grid.bin(r.u);
        let kv = grid.bin(r.v);
        cu[ku] += 1.0;
        cv[kv] += 1.0;
        let (lo, hi) = match support {
            Support::Between => (ku, kv),
            Support::BeforeFirst => (0, ku),
        };
        if lo < hi && lo <= n {
            for k in 0..3 {
                d[lo][k] += r.c[k];
                d[hi.min(n + 1)][k] -= r.c[k];
            }
        }
    }
    let mut p_first = Vec::with_capacity(n + 1);
    let mut p_second = Vec::with_capacity(n + 1);
    let mut mean = Vec::with_capacity(n + 1);
    let (mut su, mut sv) = (0.0, 0.0);
    let mut acc = [0.0f64; 3];
    let mut se = 0.0f64;
    for k in 0..=n {
        su += cu[k];
        sv += cv[k];
        for j in 0..3 {
            acc[j] += d[k][j];
        }
        let t = grid.t(k);
        let (pu, pv) = (su / m, sv / m);
        se = se.max((pu * (1.0 - pu) / m).sqrt()).max((pv * (1.0 - pv) / m).sqrt());
        p_first.push(pu);
        p_second.push(pv);
        mean.push((acc[0] + t * (acc[1] + t * acc[2])) / m);
    }
    Tables1d {
        p_first,
        p_second,
        mean,
        se,
    }
}

/// Half-open bin range `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Span {
    pub lo: usize,
    pub hi: usize,
}

impl Span {
    pub fn meet(self, o: Span) -> Span {
        Span {
            lo: self.lo.max(o.lo),
            hi: self.hi.min(o.hi),
        }
    }
    pub fn is_empty(self) -> bool {
        self.lo >= self.hi
    }
}

/// Joint histogram of `(bin(U), bin(V))` with 2-D prefix sums, for O(1)
/// rectangle moments.
#[derive(Debug, Clone)]
pub(crate) struct BinTable {
    nb: usize,
    /// Either 1 (mass only, constant level) or 10.
    width: usize,
    level: f64,
    pre: Vec<f64>,
}

impl BinTable {
    fn from_cells(nb: usize, width: usize, level: f64, cells: &[f64]) -> Self {
        let s = nb + 1;
        let mut pre = vec![0.0; s * s * width];
        for a in 0..nb {
            for b in 0..nb {
                for k in 0..width {
                    let c = cells[(a * nb + b) * width + k];
                    pre[((a + 1) * s + b + 1) * width + k] = c + pre[(a * s + b + 1) * width + k]
                        + pre[((a + 1) * s + b) * width + k]
                        - pre[(a * s + b) * width + k];
                }
            }
        }
        BinTable { nb, width, level, pre }
    }

    /// Everything: `[0, nb)`.
    pub fn all(&self) -> Span {
        Span { lo: 0, hi: self.nb }
    }

    /// Clock at most `t_p`.
    pub fn le(&self, p: usize) -> Span {
        Span { lo: 0, hi: p + 1 }
    }

    /// Clock beyond `t_p`.
    pub fn gt(&self, p: usize) -> Span {
        Span { lo: p + 1, hi: self.nb }
    }

    pub fn query(&self, u: Span, v: Span) -> W10 {
        if u.is_empty() || v.is_empty() {
            return ZERO10;
        }
        let s = self.nb + 1;
        let w = self.width;
        let at = |a: usize, b: usize, k: usize| self.pre[(a * s + b) * w + k];
        let mut out = ZERO10;
        for k in 0..w {
            out[k] = at(u.hi, v.hi, k) - at(u.lo, v.hi, k) - at(u.hi, v.lo, k) + at(u.lo, v.lo, k);
        }
        if w == 1 {
            let m = out[0];
            out = weights([self.level, 0.0, 0.0]);
            for x in out.iter_mut() {
                *x *= m;
            }
        }
        out
    }

    /// Mass only.
    #[cfg(test)]
    pub fn mass(&self, u: Span, v: Span) -> f64 {
        if u.is_empty() || v.is_empty() {
            return 0.0;
        }
        let s = self.nb + 1;
        let w = self.width;
        let at = |a: usize, b: usize| self.pre[(a * s + b) * w];
        at(u.hi, v.hi) - at(u.lo, v.hi) - at(u.hi, v.lo) + at(u.lo, v.lo)
    }
}

fn bin_iv(grid: &Grid, k: usize) -> Iv {
    let n = grid.steps();
    match k {
        0 => Iv::le(0.0),
        k if k <= n => Iv {
            lo: grid.t(k - 1),
            hi: grid.t(k),
        },
        _ => Iv::gt(grid.t(n)),
    }
}

fn two_bins(two: &TwoStage, grid: &Grid) -> BinTable {
    let nb = grid.steps() + 2;
    let level = match two.profile {
        super::structure::Profile::Constant(b) => Some(b),
        super::structure::Profile::Bump(_) => None,
    };
    let width = if level.is_some() { 1 } else { 10 };
    let mut cells = vec![0.0; nb * nb * width];
    let rows: Vec<usize> = match two.x.atom() {
        Some(x0) => vec![grid.bin(x0)],
        None => (0..nb).collect(),
    };
    let fill = |a: usize| -> Vec<f64> {
        let mut row = vec![0.0; nb * width];
        let u = bin_iv(grid, a);
        // V >= U, so cells below the diagonal are empty.
        for b in a..nb {
            let w = two.rect(u, bin_iv(grid, b));
            row[b * width..(b + 1) * width].copy_from_slice(&w[..width]);
        }
        row
    };
    #[cfg(feature = "parallel")]
    let filled: Vec<(usize, Vec<f64>)> = {
        use rayon::prelude::*;
        rows.par_iter().map(|&a| (a, fill(a))).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let filled: Vec<(usize, Vec<f64>)> = rows.iter().map(|&a| (a, fill(a))).collect();
    for (a, row) in filled {
        cells[a * nb * width..(a + 1) * nb * width].copy_from_slice(&row);
    }
    BinTable::from_cells(nb, width, level.unwrap_or(0.0), &cells)
}

fn sampled_bins(rows: &[Row], grid: &Grid) -> BinTable {
    let nb = grid.steps() + 2;
    let mut cells = vec![0.0; nb * nb * 10];
    let inv = 1.0 / rows.len() as f64;
    for r in rows {
        let (a, b) = (grid.bin(r.u), grid.bin(r.v));
        let cell: &mut W10 = (&mut cells[(a * nb + b) * 10..(a * nb + b + 1) * 10])
            .try_into()
            .expect("ten wide");
        axpy(cell, inv, &weights(r.c));
    }
    BinTable::from_cells(nb, 10, 0.0, &cells)
}
