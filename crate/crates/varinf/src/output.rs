//! CSV and JSON writers. CSV files use LF line endings, a header row and
//! shortest round-trip decimal formatting.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use varinf_core::fclt::{CovKernelSet, FcltEnsemble, Output};
use varinf_core::flln::FllnSolution;
use varinf_core::simulator::SimulationTrajectory;
use varinf_core::{Grid, SojournTable};

/// Write `text` to `dir/name`, creating `dir` if needed.
pub fn write_file(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn table(header: &[&str], columns: &[&[f64]]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    let rows = columns.first().map_or(0, |c| c.len());
    for r in 0..rows {
        for (k, c) in columns.iter().enumerate() {
            if k > 0 {
                s.push(',');
            }
            write!(s, "{}", c[r]).unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn flln_csv(sol: &FllnSolution) -> String {
    let t: Vec<f64> = sol.grid.times().collect();
    table(
        &["t", "S", "FoI", "E", "I", "R", "Upsilon"],
        &[&t, &sol.s_bar, &sol.foi_bar, &sol.e_bar, &sol.i_bar, &sol.r_bar, &sol.upsilon_bar],
    )
}

pub fn sojourn_csv(tab: &SojournTable) -> String {
    let t: Vec<f64> = tab.grid.times().collect();
    table(
        &["t", "G", "Phi", "Psi", "G0", "Phi0", "Psi0", "F0I"],
        &[&t, &tab.g, &tab.phi, &tab.psi, &tab.g0, &tab.phi0, &tab.psi0, &tab.f0i],
    )
}

/// Grid counts of several replications in long format.
pub fn trajectories_csv(trajs: &[SimulationTrajectory]) -> String {
    let mut s = String::from("rep,t,S,E,I,R,FoI,Upsilon\n");
    for (r, tr) in trajs.iter().enumerate() {
        let c = &tr.counts;
        for (k, t) in tr.grid.times().enumerate() {
            writeln!(s, "{r},{t},{},{},{},{},{},{}", c.s[k], c.e[k], c.i[k], c.r[k], tr.foi[k], tr.upsilon[k]).unwrap();
        }
    }
    s
}

pub fn events_csv(trajs: &[SimulationTrajectory]) -> String {
    let mut s = String::from("rep,tau,zeta,eta,agent\n");
    for (r, tr) in trajs.iter().enumerate() {
        for e in &tr.events {
            writeln!(s, "{r},{},{},{},{}", e.tau, e.zeta, e.eta, e.agent).unwrap();
        }
    }
    s
}

/// A square block, row-major, with the grid times as header row and
/// first column.
pub fn kernel_block_csv(grid: &Grid, block: &[f64]) -> String {
    let n1 = grid.len();
    let mut s = String::from("t");
    for t in grid.times() {
        write!(s, ",{t}").unwrap();
    }
    s.push('\n');
    for (i, t) in grid.times().enumerate() {
        write!(s, "{t}").unwrap();
        for v in &block[i * n1..(i + 1) * n1] {
            write!(s, ",{v}").unwrap();
        }
        s.push('\n');
    }
    s
}

/// Write every kernel block as `kernel_<a>_<b>.csv`.
pub fn write_kernels(dir: &Path, k: &CovKernelSet) -> Result<()> {
    for (x, &a) in k.processes.iter().enumerate() {
        for &b in &k.processes[x..] {
            let name = format!("kernel_{}_{}.csv", a.name(), b.name());
            write_file(dir, &name, &kernel_block_csv(&k.grid, &k.block(a, b)))?;
        }
    }
    Ok(())
}

/// One output process across all paths: columns `t,path_0,...`.
pub fn ensemble_csv(e: &FcltEnsemble, o: Output) -> String {
    let mut s = String::from("t");
    for r in 0..e.paths.len() {
        write!(s, ",path_{r}").unwrap();
    }
    s.push('\n');
    for (k, t) in e.grid.times().enumerate() {
        write!(s, "{t}").unwrap();
        for p in &e.paths {
            write!(s, ",{}", p.get(o)[k]).unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn write_ensemble(dir: &Path, e: &FcltEnsemble) -> Result<()> {
    for o in Output::ALL {
        write_file(dir, &format!("ensemble_{}.csv", o.name()), &ensemble_csv(e, o))?;
    }
    Ok(())
}
