use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::stride::{build_stride_instance, solve_stride, StrideSolution};
use super::SimConfig;
use crate::domain::{Cell, OneShotInstance, Path, SlotRef, Time};
use crate::error::Result;

/// A plan in absolute time; `slot` is an absolute slot index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub path: Path,
    pub slot: SlotRef,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    /// On the grid. Without a plan the agent is parked and does not block
    /// anyone.
    OnGrid { cell: Cell, plan: Option<Plan> },
    /// Reached its station early and waits off the grid for `slot`.
    Queued { slot: SlotRef },
    /// Away delivering; comes back at `cell` at `return_time`, following
    /// `plan` if the current stride already planned for it.
    Delivering {
        return_time: Time,
        cell: Cell,
        plan: Option<Plan>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Spawn,
    Admit,
    Depart,
    Respawn,
    Demote,
}

impl EventKind {
    fn name(self) -> &'static str {
        match self {
            EventKind::Spawn => "spawn",
            EventKind::Admit => "admit",
            EventKind::Depart => "depart",
            EventKind::Respawn => "respawn",
            EventKind::Demote => "demote",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub t: Time,
    pub kind: EventKind,
    pub agent: usize,
    pub station: Option<usize>,
    /// Absolute slot index.
    pub slot: Option<u32>,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
        write!(
            f,
            "t={} event={} agent={} station={} slot={}",
            self.t,
            self.kind.name(),
            self.agent,
            opt(self.station.map(|s| s.to_string())),
            opt(self.slot.map(|s| s.to_string()))
        )
    }
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub clock: Time,
    pub agents: Vec<Status>,
    /// Absolute slots that are admitted or promised to a queued agent.
    pub committed: BTreeSet<SlotRef>,
    rng: ChaCha8Rng,
}

impl SimState {
    /// Places `config.agents` agents on random bins (distinct while bins
    /// last) at time 0.
    pub fn new(config: &SimConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut bins = config.map.bins().to_vec();
        bins.shuffle(&mut rng);
        let agents = (0..config.agents)
            .map(|i| {
                let cell = if i < bins.len() {
                    bins[i]
                } else {
                    bins[rng.random_range(0..bins.len())]
                };
                Status::OnGrid { cell, plan: None }
            })
            .collect();
        SimState {
            clock: 0,
            agents,
            committed: BTreeSet::new(),
            rng,
        }
    }

    /// A snapshot with explicit statuses, e.g. for building a stride
    /// instance by hand.
    pub fn from_parts(clock: Time, agents: Vec<Status>, committed: BTreeSet<SlotRef>, seed: u64) -> Self {
        SimState {
            clock,
            agents,
            committed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Cells of agents whose plans are being executed.
    fn active_positions(&self) -> HashMap<usize, Cell> {
        self.agents
            .iter()
            .enumerate()
            .filter_map(|(i, s)| match s {
                Status::OnGrid { cell, plan: Some(_) } => Some((i, *cell)),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Metrics {
    pub total_idle_time: u64,
    pub parcels: u64,
    /// Cumulative parcels at `t = 0, W, 2W, ..., horizon`; a parcel taken
    /// at `kT` counts from `kT + 1`.
    pub timeline: Vec<(Time, u64)>,
    /// Wall-clock time of every stride solve.
    pub stride_solve_ms: Vec<f64>,
    /// Fraction of station time spent occupied.
    pub workload: f64,
    /// Working slots inside the horizon, over all stations.
    pub total_slots: u64,
    /// Vertex or edge collisions seen between executing agents.
    pub collisions: usize,
    pub demotions: usize,
}

impl Metrics {
    pub fn avg_solve_ms(&self) -> f64 {
        if self.stride_solve_ms.is_empty() {
            0.0
        } else {
            self.stride_solve_ms.iter().sum::<f64>() / self.stride_solve_ms.len() as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub metrics: Metrics,
    pub events: Vec<Event>,
    /// Admission time of every parcel, in order.
    pub admissions: Vec<(Time, SlotRef)>,
}

/// What a stride observer sees after each solve.
pub struct StrideReport<'a> {
    pub t0: Time,
    pub instance: &'a OneShotInstance,
    pub outcome: &'a StrideSolution,
}

pub fn run(config: &SimConfig) -> Result<SimResult> {
    run_with_observer(config, |_| {})
}

/// Runs the simulation, calling `observe` after every stride solve.
pub fn run_with_observer(config: &SimConfig, mut observe: impl FnMut(&StrideReport)) -> Result<SimResult> {
    config.validate()?;
    let mut sim = Simulator {
        config,
        state: SimState::new(config),
        events: Vec::new(),
        admissions: Vec::new(),
        departures: VecDeque::new(),
        previous: HashMap::new(),
        metrics: Metrics::default(),
    };
    for (i, s) in sim.state.agents.iter().enumerate() {
        if let Status::OnGrid { cell, .. } = s {
            log::debug!("agent {i} spawns at cell {}", cell.index());
        }
        sim.events.push(Event {
            t: 0,
            kind: EventKind::Spawn,
            agent: i,
            station: None,
            slot: None,
        });
    }
    for t in 0..config.horizon {
        sim.step(t, &mut observe)?;
    }
    Ok(sim.finish())
}

struct Simulator<'c> {
    config: &'c SimConfig,
    state: SimState,
    events: Vec<Event>,
    admissions: Vec<(Time, SlotRef)>,
    departures: VecDeque<(Time, usize)>,
    previous: HashMap<usize, Cell>,
    metrics: Metrics,
}

impl Simulator<'_> {
    fn event(&mut self, t: Time, kind: EventKind, agent: usize, slot: Option<SlotRef>) {
        self.events.push(Event {
            t,
            kind,
            agent,
            station: slot.map(|s| s.station),
            slot: slot.map(|s| s.slot),
        });
    }

    fn step(&mut self, t: Time, observe: &mut impl FnMut(&StrideReport)) -> Result<()> {
        self.state.clock = t;
        while self.departures.front().is_some_and(|&(d, _)| d == t) {
            let (_, agent) = self.departures.pop_front().expect("checked");
            self.event(t, EventKind::Depart, agent, None);
        }
        self.advance(t);
        self.respawn(t);
        self.admit_queued(t);
        let mut leaving = self.admit_arrived(t);
        if t.is_multiple_of(self.config.stride) {
            self.replan(t, observe)?;
            leaving.extend(self.admit_arrived(t));
        }
        self.check_collisions(t, leaving);
        Ok(())
    }

    fn advance(&mut self, t: Time) {
        for s in &mut self.state.agents {
            if let Status::OnGrid { cell, plan: Some(p) } = s {
                *cell = p.path.cell_at(t).expect("executing plans cover the current step");
            }
        }
    }

    fn respawn(&mut self, t: Time) {
        let mut occupied: HashSet<Cell> = self
            .state
            .agents
            .iter()
            .filter_map(|s| match s {
                Status::OnGrid { cell, .. } => Some(*cell),
                _ => None,
            })
            .collect();
        let mut back = Vec::new();
        // planned returns first: their cells were reserved by the planner
        for planned in [true, false] {
            for (i, s) in self.state.agents.iter_mut().enumerate() {
                let Status::Delivering { return_time, cell, plan } = s else {
                    continue;
                };
                if *return_time > t || plan.is_some() != planned {
                    continue;
                }
                if !planned && occupied.contains(cell) {
                    // bin taken right now, try again next step
                    *return_time = t + 1;
                    continue;
                }
                occupied.insert(*cell);
                *s = Status::OnGrid {
                    cell: *cell,
                    plan: plan.take(),
                };
                back.push(i);
            }
        }
        back.sort_unstable();
        for i in back {
            self.event(t, EventKind::Respawn, i, None);
        }
    }

    /// Vertex and edge checks among executing agents, including those that
    /// reached their station at `t` and leave afterwards.
    fn check_collisions(&mut self, t: Time, leaving: Vec<(usize, Cell)>) {
        let mut now = self.state.active_positions();
        now.extend(leaving);
        let mut seen: HashMap<Cell, usize> = HashMap::new();
        let mut ids: Vec<usize> = now.keys().copied().collect();
        ids.sort_unstable();
        for &i in &ids {
            if let Some(j) = seen.insert(now[&i], i) {
                log::warn!("vertex collision of agents {j} and {i} at t={t}");
                self.metrics.collisions += 1;
            }
        }
        for &i in &ids {
            for &j in &ids {
                if i >= j {
                    continue;
                }
                let (Some(&pi), Some(&pj)) = (self.previous.get(&i), self.previous.get(&j)) else {
                    continue;
                };
                if pi != now[&i] && pi == now[&j] && pj == now[&i] {
                    log::warn!("edge collision of agents {i} and {j} at t={t}");
                    self.metrics.collisions += 1;
                }
            }
        }
        self.previous = now;
    }

    fn admit(&mut self, t: Time, agent: usize, slot: SlotRef) {
        let return_time = t + 1 + self.config.kappa;
        // random bin, avoiding bins another agent returns to at the same step
        let taken: HashSet<Cell> = self
            .state
            .agents
            .iter()
            .filter_map(|s| match s {
                Status::Delivering { return_time: r, cell, .. } if *r == return_time => Some(*cell),
                _ => None,
            })
            .collect();
        let bins = self.config.map.bins();
        let free: Vec<Cell> = bins.iter().copied().filter(|b| !taken.contains(b)).collect();
        let pool = if free.is_empty() { bins } else { &free[..] };
        let cell = pool[self.state.rng.random_range(0..pool.len())];
        self.state.committed.insert(slot);
        self.state.agents[agent] = Status::Delivering {
            return_time,
            cell,
            plan: None,
        };
        self.admissions.push((t, slot));
        self.event(t, EventKind::Admit, agent, Some(slot));
    }

    fn admit_queued(&mut self, t: Time) {
        let due: Vec<(usize, SlotRef)> = self
            .state
            .agents
            .iter()
            .enumerate()
            .filter_map(|(i, s)| match s {
                Status::Queued { slot } if slot.slot * self.config.processing_time == t => Some((i, *slot)),
                _ => None,
            })
            .collect();
        for (i, slot) in due {
            self.admit(t, i, slot);
        }
    }

    /// Agents at the end of their plan get admitted or start queueing.
    /// Returns where they were standing.
    fn admit_arrived(&mut self, t: Time) -> Vec<(usize, Cell)> {
        let arrived: Vec<(usize, SlotRef, Cell)> = self
            .state
            .agents
            .iter()
            .enumerate()
            .filter_map(|(i, s)| match s {
                Status::OnGrid { plan: Some(p), cell } if p.path.end() == t => Some((i, p.slot, *cell)),
                _ => None,
            })
            .collect();
        let mut leaving = Vec::with_capacity(arrived.len());
        for (i, slot, cell) in arrived {
            leaving.push((i, cell));
            if slot.slot * self.config.processing_time == t {
                self.admit(t, i, slot);
            } else {
                self.state.committed.insert(slot);
                self.state.agents[i] = Status::Queued { slot };
            }
            self.departures.push_back((t + 1, i));
        }
        leaving
    }

    fn replan(&mut self, t: Time, observe: &mut impl FnMut(&StrideReport)) -> Result<()> {
        let config = self.config;
        let instance = build_stride_instance(&self.state, config)?;
        let retry_seed = config.seed ^ (t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let started = Instant::now();
        let outcome = solve_stride(&instance, config.algorithm, config.effective_q(), retry_seed)?;
        self.metrics.stride_solve_ms.push(started.elapsed().as_secs_f64() * 1e3);
        observe(&StrideReport {
            t0: t,
            instance: &instance,
            outcome: &outcome,
        });

        let first_slot = t / config.processing_time;
        let solution = &outcome.solution;
        let mut paths: HashMap<usize, &Path> = solution.paths.iter().map(|p| (p.agent, p)).collect();
        for (idx, spec) in instance.agents.iter().enumerate() {
            let id = spec.id;
            let plan = solution.assignment.slots[idx].map(|s| {
                let local = paths.remove(&id).expect("assigned agents have paths");
                Plan {
                    path: Path::new(id, local.start + t, local.cells.clone()),
                    slot: SlotRef::new(s.station, s.slot + first_slot),
                }
            });
            match &mut self.state.agents[id] {
                Status::OnGrid { plan: p, .. } | Status::Delivering { plan: p, .. } => *p = plan,
                Status::Queued { .. } => unreachable!("queued agents are not part of stride instances"),
            }
        }
        for &idx in &solution.demoted {
            self.metrics.demotions += 1;
            self.event(t, EventKind::Demote, instance.agents[idx].id, None);
        }
        Ok(())
    }

    fn finish(mut self) -> SimResult {
        let config = self.config;
        let t = config.processing_time;
        let total_slots = config.map.station_count() as u64 * (config.horizon / t) as u64;
        let admitted = self.admissions.len() as u64;
        let mut timeline = Vec::new();
        let mut at = 0;
        while at <= config.horizon {
            let count = self.admissions.iter().filter(|(a, _)| *a < at).count() as u64;
            timeline.push((at, count));
            at += config.stride;
        }
        self.metrics.total_slots = total_slots;
        self.metrics.parcels = admitted;
        self.metrics.total_idle_time = t as u64 * (total_slots - admitted);
        self.metrics.workload = if total_slots == 0 {
            0.0
        } else {
            admitted as f64 / total_slots as f64
        };
        self.metrics.timeline = timeline;
        SimResult {
            metrics: self.metrics,
            events: self.events,
            admissions: self.admissions,
        }
    }
}
