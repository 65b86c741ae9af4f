//! Subcommand dispatch.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use varinf_core::fclt::{build_covariance_kernels, sample_gaussian_drivers, solve_fclt_paths};
use varinf_core::flln::FllnSystem;
use varinf_core::simulator::{simulate_epidemic, Scenario};

use crate::config::{ConfigDocument, ExperimentSection};
use crate::output::{events_csv, flln_csv, sojourn_csv, trajectories_csv, write_ensemble, write_file, write_kernels};
use crate::report::McReport;
use crate::verify::{
    default_prm_battery, prm_moment_check, run_clt_experiment, run_lln_experiment, sampling_grid,
};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "VARINF_OUT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

const DEFAULT_PATHS: usize = 100;
const DEFAULT_LLN_NS: [usize; 3] = [1000, 4000, 16000];
const DEFAULT_LLN_REPS: usize = 30;
const DEFAULT_CLT_REPS: usize = 2000;
const DEFAULT_CLT_TIMES: [f64; 3] = [2.0, 5.0, 10.0];
const DEFAULT_PRM_DRAWS: usize = 100_000;

#[derive(Debug, Parser)]
#[command(name = "varinf", version, about = "Epidemic models with variable infectivity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the stochastic epidemic.
    Simulate(Common),
    /// Solve the deterministic limit.
    Flln(Common),
    /// Sample Gaussian limit fluctuations.
    Fclt(Common),
    /// Check the decay of the law-of-large-numbers error.
    VerifyLln(Common),
    /// Compare fluctuation covariances with the Gaussian limit.
    VerifyClt(Common),
    /// Check the Poisson mixed-moment identity.
    VerifyPrm(Prm),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Debug, Args)]
struct Prm {
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Debug, Args)]
struct RunFlags {
    /// Output directory; defaults to $VARINF_OUT, then `out`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long, value_name = "K")]
    reps: Option<usize>,
    #[arg(long, value_name = "R")]
    paths: Option<usize>,
}

impl RunFlags {
    fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}

/// Run the command line `argv` (program name first) and return the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match run(cli.command) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILED,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INVALID
        }
    }
}

struct Loaded {
    doc: ConfigDocument,
    scenario: Scenario,
}

fn load(path: &Path, flags: &RunFlags) -> Result<Loaded> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc = ConfigDocument::parse(&text)?;
    let mut scenario = doc.scenario()?;
    if let Some(s) = flags.seed {
        scenario.seed = s;
    }
    if let Some(r) = flags.reps {
        anyhow::ensure!(r > 0, "--reps must be at least 1");
        scenario.replications = r;
    }
    Ok(Loaded { doc, scenario })
}

/// Echo the resolved configuration next to the outputs.
fn write_resolved(dir: &Path, l: &Loaded) -> Result<()> {
    let doc = ConfigDocument::from_scenario(&l.scenario, l.doc.experiment.clone());
    write_file(dir, "config.toml", &doc.to_toml())
}

fn finish(dir: &Path, name: &str, report: &McReport) -> Result<bool> {
    write_file(dir, &format!("{name}.json"), &report.to_json())?;
    write_file(dir, &format!("{name}.txt"), &report.to_text())?;
    print!("{}", report.to_text());
    Ok(report.pass)
}

fn run(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Simulate(c) => {
            let l = load(&c.config, &c.run)?;
            let dir = c.run.out_dir();
            let sc = &l.scenario;
            let trajs = (0..sc.replications)
                .into_par_iter()
                .map(|r| simulate_epidemic(sc, sc.replication_seed(r as u64)))
                .collect::<Result<Vec<_>, _>>()?;
            write_resolved(&dir, &l)?;
            write_file(&dir, "trajectories.csv", &trajectories_csv(&trajs))?;
            write_file(&dir, "events.csv", &events_csv(&trajs))?;
            Ok(true)
        }
        Command::Flln(c) => {
            let l = load(&c.config, &c.run)?;
            let dir = c.run.out_dir();
            let sc = &l.scenario;
            let sys = FllnSystem::new(&sc.models, &sc.grid()?, sc.variant)?;
            let sol = sys.solve(&sc.init)?;
            write_resolved(&dir, &l)?;
            write_file(&dir, "flln.csv", &flln_csv(&sol))?;
            write_file(&dir, "sojourn.csv", &sojourn_csv(&sys.sojourn))?;
            Ok(true)
        }
        Command::Fclt(c) => {
            let l = load(&c.config, &c.run)?;
            let dir = c.run.out_dir();
            let sc = &l.scenario;
            let paths = c.run.paths.or(l.doc.experiment.paths).unwrap_or(DEFAULT_PATHS);
            anyhow::ensure!(paths > 0, "--paths must be at least 1");
            let grid = sampling_grid(&sc.grid()?)?;
            let sys = FllnSystem::new(&sc.models, &grid, sc.variant)?;
            let sol = sys.solve(&sc.init)?;
            let kernels = build_covariance_kernels(&sc.models, &sol, &sys.sojourn, &grid, sc.variant)?;
            let drivers = sample_gaussian_drivers(&kernels, sc.seed, paths)?;
            let ens = solve_fclt_paths(drivers, &[], &sol, &sys.sojourn, &grid, sc.variant)?;
            write_resolved(&dir, &l)?;
            write_file(&dir, "flln.csv", &flln_csv(&sol))?;
            write_kernels(&dir, &kernels)?;
            write_ensemble(&dir, &ens)?;
            Ok(true)
        }
        Command::VerifyLln(c) => {
            let l = load(&c.config, &c.run)?;
            let dir = c.run.out_dir();
            let ex = &l.doc.experiment;
            let ns = ex.ns.clone().unwrap_or_else(|| DEFAULT_LLN_NS.to_vec());
            let reps = c.run.reps.or(ex.reps).unwrap_or(DEFAULT_LLN_REPS);
            let report = run_lln_experiment(&l.scenario, &ns, reps, l.scenario.seed)?;
            write_resolved(&dir, &l)?;
            finish(&dir, "lln_report", &report)
        }
        Command::VerifyClt(c) => {
            let l = load(&c.config, &c.run)?;
            let dir = c.run.out_dir();
            let ex = &l.doc.experiment;
            let reps = c.run.reps.or(ex.reps).unwrap_or(DEFAULT_CLT_REPS);
            let times = ex.times.clone().unwrap_or_else(|| DEFAULT_CLT_TIMES.to_vec());
            let sc = &l.scenario;
            let report = run_clt_experiment(sc, sc.population, reps, &times, sc.seed)?;
            write_resolved(&dir, &l)?;
            finish(&dir, "clt_report", &report)
        }
        Command::VerifyPrm(p) => {
            let experiment = match &p.config {
                Some(path) => {
                    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    ConfigDocument::parse(&text)?.experiment
                }
                None => ExperimentSection::default(),
            };
            let draws = p.run.reps.or(experiment.draws).unwrap_or(DEFAULT_PRM_DRAWS);
            let report = prm_moment_check(&default_prm_battery(), draws, p.run.seed.unwrap_or(0))?;
            finish(&p.run.out_dir(), "prm_report", &report)
        }
    }
}
