use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng as _;
use rand::SeedableRng;
use rand_distr::{Binomial, Distribution, Exp1};

use super::counts::GridCounts;
use super::{InfectionRecord, InitMode, InitialGroup, InitialRecord, Scenario, SimulationTrajectory};
use crate::duration::DurationLaw;
use crate::infectivity::{InfectivityModel, InfectivityPath};
use crate::rng::{mix, Rng};
use crate::{Error, Result, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    /// End of the exposed period.
    Onset,
    /// End of the infected period.
    End,
    /// End of immunity (SIRS).
    Return,
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    seq: u64,
    agent: u32,
    kind: Kind,
}

impl PartialEq for Event {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Event {
    /// Reversed so that the max-heap pops the earliest event; ties in
    /// insertion order.
    fn cmp(&self, o: &Self) -> Ordering {
        o.time.total_cmp(&self.time).then(o.seq.cmp(&self.seq))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Susceptible,
    Exposed,
    Infectious,
    Recovered,
}

/// Removable set of `u32` with O(1) insert, remove and uniform choice.
struct IndexSet {
    items: Vec<u32>,
    pos: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl IndexSet {
    fn new(capacity: usize) -> Self {
        IndexSet {
            items: Vec::new(),
            pos: vec![ABSENT; capacity],
        }
    }
    fn insert(&mut self, a: u32) {
        debug_assert_eq!(self.pos[a as usize], ABSENT);
        self.pos[a as usize] = self.items.len() as u32;
        self.items.push(a);
    }
    fn remove(&mut self, a: u32) {
        let p = self.pos[a as usize];
        debug_assert_ne!(p, ABSENT);
        let last = *self.items.last().expect("nonempty");
        self.items.swap_remove(p as usize);
        if last != a {
            self.pos[last as usize] = p;
        }
        self.pos[a as usize] = ABSENT;
    }
    fn len(&self) -> usize {
        self.items.len()
    }
}

struct Engine<'a> {
    sc: &'a Scenario,
    grid: crate::grid::Grid,
    rng: Rng,
    n: usize,
    t: f64,
    seq: u64,
    heap: BinaryHeap<Event>,
    phase: Vec<Phase>,
    /// Infection time and path of each agent's current infection.
    tau: Vec<f64>,
    path: Vec<InfectivityPath>,
    lstar: Vec<f64>,
    susceptible: IndexSet,
    /// Agents whose infection has not ended.
    infected: IndexSet,
    /// Infectious agents with a non-constant profile.
    curved: IndexSet,
    flat_sum: f64,
    flat_count: usize,
    flat_updates: usize,
    curved_star: f64,
    counts: [u32; 4],
    processed: usize,
    limit: usize,
    events: Vec<InfectionRecord>,
    out_counts: GridCounts,
    foi: Vec<f64>,
    upsilon: Vec<f64>,
    next_grid: usize,
}

const RECOMPUTE_EVERY: usize = 512;

impl<'a> Engine<'a> {
    fn push(&mut self, time: f64, agent: u32, kind: Kind) {
        self.seq += 1;
        self.heap.push(Event {
            time,
            seq: self.seq,
            agent,
            kind,
        });
    }

    fn set_phase(&mut self, a: u32, p: Phase) {
        let old = self.phase[a as usize];
        self.counts[old as usize] -= 1;
        self.counts[p as usize] += 1;
        self.phase[a as usize] = p;
    }

    fn start_infectivity(&mut self, a: u32) {
        let p = &self.path[a as usize];
        if p.is_flat() {
            self.flat_sum += p.coeffs[0];
            self.flat_count += 1;
            self.bump_flat();
        } else {
            self.curved.insert(a);
            self.curved_star += self.lstar[a as usize];
        }
    }

    fn stop_infectivity(&mut self, a: u32) {
        let p = &self.path[a as usize];
        if p.is_flat() {
            self.flat_sum -= p.coeffs[0];
            self.flat_count -= 1;
            self.bump_flat();
        } else {
            self.curved.remove(a);
            self.curved_star -= self.lstar[a as usize];
            if self.curved.len() == 0 {
                self.curved_star = 0.0;
            }
        }
    }

    /// Keep the running sum of constant infectivities free of drift.
    fn bump_flat(&mut self) {
        self.flat_updates += 1;
        if self.flat_count == 0 {
            self.flat_sum = 0.0;
        } else if self.flat_updates % RECOMPUTE_EVERY == 0 {
            let mut s = 0.0;
            for &a in &self.infected.items {
                let p = &self.path[a as usize];
                if p.is_flat() && self.phase[a as usize] == Phase::Infectious {
                    s += p.coeffs[0];
                }
            }
            self.flat_sum = s;
        }
    }

    fn curved_foi(&self, t: f64) -> f64 {
        self.curved
            .items
            .iter()
            .map(|&a| self.path[a as usize].eval(t - self.tau[a as usize]))
            .sum()
    }

    fn total_foi(&self, t: f64) -> f64 {
        self.infected
            .items
            .iter()
            .map(|&a| self.path[a as usize].eval(t - self.tau[a as usize]))
            .sum()
    }

    fn s_frac(&self) -> f64 {
        self.counts[Phase::Susceptible as usize] as f64 / self.n as f64
    }

    /// Record grid times strictly before `until`.
    fn record_until(&mut self, until: f64) {
        let grid = self.grid;
        while self.next_grid <= grid.steps() && grid.t(self.next_grid) < until {
            let t = grid.t(self.next_grid);
            let [s, e, i, r] = self.counts;
            let (e, i) = match self.sc.variant {
                Variant::Seir => (e, i),
                _ => (0, e + i),
            };
            self.out_counts.push(s, e, i, r);
            let f = self.total_foi(t);
            self.foi.push(f);
            self.upsilon.push(self.s_frac() * f);
            self.next_grid += 1;
        }
    }

    fn tick(&mut self) -> Result<()> {
        self.processed += 1;
        if self.processed > self.limit {
            return Err(Error::EventOverflow { limit: self.limit });
        }
        Ok(())
    }

    /// Infect agent `a` at the current time with a path from `model`,
    /// or place an initial agent.
    fn infect(&mut self, a: u32, path: InfectivityPath, lstar: f64) -> (f64, f64) {
        let t = self.t;
        self.tau[a as usize] = t;
        self.path[a as usize] = path;
        self.lstar[a as usize] = lstar;
        self.infected.insert(a);
        if path.zeta > 0.0 {
            self.set_phase(a, Phase::Exposed);
            self.push(t + path.zeta, a, Kind::Onset);
        } else {
            self.set_phase(a, Phase::Infectious);
            self.start_infectivity(a);
        }
        self.push(t + path.chi, a, Kind::End);
        match self.sc.variant {
            Variant::Sirs => {
                let y = self.sc.models.immunity.expect("validated").sample(&mut self.rng);
                self.push(t + path.chi + y, a, Kind::Return);
                (path.chi, y)
            }
            _ => (path.zeta, path.eta),
        }
    }

    fn handle(&mut self, ev: Event) {
        let a = ev.agent;
        match ev.kind {
            Kind::Onset => {
                self.set_phase(a, Phase::Infectious);
                self.start_infectivity(a);
            }
            Kind::End => {
                if self.phase[a as usize] == Phase::Infectious {
                    self.stop_infectivity(a);
                }
                self.infected.remove(a);
                if self.sc.variant == Variant::Sis {
                    self.set_phase(a, Phase::Susceptible);
                    self.susceptible.insert(a);
                } else {
                    self.set_phase(a, Phase::Recovered);
                }
            }
            Kind::Return => {
                self.set_phase(a, Phase::Susceptible);
                self.susceptible.insert(a);
            }
        }
    }
}

fn initial_sizes(sc: &Scenario, rng: &mut Rng) -> (usize, usize, usize) {
    let n = sc.population;
    let f = sc.init;
    match sc.init_mode {
        InitMode::Deterministic => {
            let round = |x: f64| libm::round(n as f64 * x) as usize;
            let e0 = round(f.e0).min(n);
            let i0 = round(f.i0).min(n - e0);
            let r0 = round(f.r0).min(n - e0 - i0);
            (e0, i0, r0)
        }
        InitMode::Binomial => {
            let mut left = n as u64;
            let mut rest = 1.0;
            let mut draw = |p: f64, left: &mut u64, rest: &mut f64| -> usize {
                if *left == 0 || p <= 0.0 {
                    return 0;
                }
                let q = (p / *rest).clamp(0.0, 1.0);
                let k = Binomial::new(*left, q).expect("probability in range").sample(rng);
                *left -= k;
                *rest -= p;
                k as usize
            };
            let e0 = draw(f.e0, &mut left, &mut rest);
            let i0 = draw(f.i0, &mut left, &mut rest);
            let r0 = draw(f.r0, &mut left, &mut rest);
            (e0, i0, r0)
        }
    }
}

/// Simulate one realization. Deterministic given `(scenario, seed)`.
pub fn simulate_epidemic(sc: &Scenario, seed: u64) -> Result<SimulationTrajectory> {
    sc.validate()?;
    let grid = sc.grid()?;
    let n = sc.population;
    let mut rng = Rng::seed_from_u64(mix(seed));
    let (e0, i0, r0) = initial_sizes(sc, &mut rng);
    let empty = InfectivityPath {
        zeta: 0.0,
        eta: 0.0,
        chi: 0.0,
        coeffs: [0.0; 3],
        onset_jump: false,
        end_jump: false,
    };
    let mut eng = Engine {
        sc,
        grid,
        rng,
        n,
        t: 0.0,
        seq: 0,
        heap: BinaryHeap::new(),
        phase: vec![Phase::Susceptible; n],
        tau: vec![0.0; n],
        path: vec![empty; n],
        lstar: vec![0.0; n],
        susceptible: IndexSet::new(n),
        infected: IndexSet::new(n),
        curved: IndexSet::new(n),
        flat_sum: 0.0,
        flat_count: 0,
        flat_updates: 0,
        curved_star: 0.0,
        counts: [n as u32, 0, 0, 0],
        processed: 0,
        limit: 100 * n,
        events: Vec::new(),
        out_counts: GridCounts::with_capacity(grid.len()),
        foi: Vec::with_capacity(grid.len()),
        upsilon: Vec::with_capacity(grid.len()),
        next_grid: 0,
    };
    let mut initial_records = Vec::with_capacity(e0 + i0 + r0);
    let groups: [(usize, InitialGroup, Option<&InfectivityModel>); 3] = [
        (e0, InitialGroup::Exposed, Some(&sc.models.model0)),
        (i0, InitialGroup::Infectious, Some(&sc.models.model0i)),
        (r0, InitialGroup::Recovered, None),
    ];
    let mut next = 0u32;
    for (count, group, model) in groups {
        for _ in 0..count {
            let a = next;
            next += 1;
            match model {
                Some(m) => {
                    let p = m.sample_with(&mut eng.rng)?;
                    let (z, e) = eng.infect(a, p, m.lambda_star());
                    initial_records.push(InitialRecord {
                        agent: a,
                        group,
                        path: Some(p),
                        zeta: z,
                        eta: e,
                    });
                }
                None => {
                    eng.set_phase(a, Phase::Recovered);
                    let y = match sc.variant {
                        Variant::Sirs => {
                            let law: DurationLaw = sc.models.immunity0_law().expect("validated");
                            let y = law.sample(&mut eng.rng);
                            eng.push(y, a, Kind::Return);
                            y
                        }
                        _ => f64::INFINITY,
                    };
                    initial_records.push(InitialRecord {
                        agent: a,
                        group,
                        path: None,
                        zeta: 0.0,
                        eta: y,
                    });
                }
            }
        }
    }
    for a in next..n as u32 {
        eng.susceptible.insert(a);
    }
    let horizon = grid.horizon();
    let model = &sc.models.model;
    let lstar = model.lambda_star();
    loop {
        let next_event = eng.heap.peek().map_or(f64::INFINITY, |e| e.time);
        let s = eng.s_frac();
        let bound = s * (eng.flat_sum.max(0.0) + eng.curved_star);
        let candidate = if bound > 0.0 && eng.susceptible.len() > 0 {
            let x: f64 = Exp1.sample(&mut eng.rng);
            eng.t + x / bound
        } else {
            f64::INFINITY
        };
        if candidate < next_event {
            if candidate > horizon {
                break;
            }
            eng.t = candidate;
            let level = eng.flat_sum.max(0.0);
            let u: f64 = eng.rng.random();
            let accept = if eng.curved.len() == 0 {
                true
            } else {
                u * (level + eng.curved_star) < level + eng.curved_foi(candidate)
            };
            if accept {
                eng.tick()?;
                eng.record_until(candidate);
                let k = eng.rng.random_range(0..eng.susceptible.len());
                let a = eng.susceptible.items[k];
                eng.susceptible.remove(a);
                let p = model.sample_with(&mut eng.rng)?;
                let (z, e) = eng.infect(a, p, lstar);
                eng.events.push(InfectionRecord {
                    tau: candidate,
                    zeta: z,
                    eta: e,
                    agent: a,
                });
            }
        } else {
            if next_event > horizon {
                break;
            }
            let ev = eng.heap.pop().expect("peeked");
            eng.tick()?;
            eng.record_until(ev.time);
            eng.t = ev.time;
            eng.handle(ev);
        }
    }
    eng.record_until(f64::INFINITY);
    Ok(SimulationTrajectory {
        variant: sc.variant,
        population: n,
        grid,
        events: eng.events,
        initial_records,
        counts: eng.out_counts,
        foi: eng.foi,
        upsilon: eng.upsilon,
    })
}
