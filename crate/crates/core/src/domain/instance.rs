use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use super::grid::{Cell, GridMap};
use crate::error::{Error, Result};

/// Discrete time step.
pub type Time = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AgentSpec {
    pub id: usize,
    pub start_cell: Cell,
    pub start_time: Time,
}

/// A working slot `[k*T, (k+1)*T)` of a station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlotRef {
    pub station: usize,
    pub slot: u32,
}

impl SlotRef {
    pub fn new(station: usize, slot: u32) -> Self {
        SlotRef { station, slot }
    }
}

/// One-shot problem over the window `[0, K*T)`.
#[derive(Debug, Clone)]
pub struct OneShotInstance {
    pub map: Arc<GridMap>,
    pub agents: Vec<AgentSpec>,
    /// Processing time `T` of one working slot.
    pub processing_time: Time,
    /// Number of working slots `K` per station.
    pub slots: u32,
    /// Slots already taken before this instance was built; no agent may be
    /// assigned to them and they do not count as idle.
    pub preoccupied: BTreeSet<SlotRef>,
}

impl OneShotInstance {
    pub fn new(
        map: Arc<GridMap>,
        agents: Vec<AgentSpec>,
        processing_time: Time,
        slots: u32,
    ) -> Result<Self> {
        let inst = OneShotInstance {
            map,
            agents,
            processing_time,
            slots,
            preoccupied: BTreeSet::new(),
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_preoccupied(mut self, preoccupied: BTreeSet<SlotRef>) -> Result<Self> {
        self.preoccupied = preoccupied;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.processing_time == 0 {
            return Err(Error::InvalidInstance("processing time T must be >= 1".into()));
        }
        if self.slots == 0 {
            return Err(Error::InvalidInstance("slot count K must be >= 1".into()));
        }
        let horizon = self.horizon();
        let mut ids = HashSet::new();
        for a in &self.agents {
            if !ids.insert(a.id) {
                return Err(Error::InvalidInstance(format!("duplicate agent id {}", a.id)));
            }
            if a.start_cell.index() >= self.map.cell_count() || !self.map.is_traversable(a.start_cell) {
                return Err(Error::InvalidInstance(format!(
                    "agent {} starts on a non-traversable cell",
                    a.id
                )));
            }
            if a.start_time >= horizon {
                return Err(Error::InvalidInstance(format!(
                    "agent {} starts at {} outside the window [0, {horizon})",
                    a.id, a.start_time
                )));
            }
        }
        for s in &self.preoccupied {
            if s.station >= self.station_count() || s.slot >= self.slots {
                return Err(Error::InvalidInstance(format!("preoccupied slot {s:?} out of range")));
            }
        }
        Ok(())
    }

    /// Window length `K*T`.
    pub fn horizon(&self) -> Time {
        self.processing_time * self.slots
    }

    /// Latest admission time `(K-1)*T`.
    pub fn last_admission(&self) -> Time {
        self.processing_time * (self.slots - 1)
    }

    pub fn station_count(&self) -> usize {
        self.map.station_count()
    }

    pub fn slot_time(&self, slot: u32) -> Time {
        slot * self.processing_time
    }

    pub fn is_preoccupied(&self, s: SlotRef) -> bool {
        self.preoccupied.contains(&s)
    }

    /// Smallest slot `k` with `arrival <= k*T`, if it lies inside the window.
    pub fn earliest_slot(&self, arrival: Time) -> Option<u32> {
        let k = arrival.div_ceil(self.processing_time);
        (k < self.slots).then_some(k)
    }
}

/// Station and working slot per agent, indexed like `OneShotInstance::agents`.
/// `None` is the NULL station.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment {
    pub slots: Vec<Option<SlotRef>>,
}

impl Assignment {
    pub fn unassigned(agents: usize) -> Self {
        Assignment {
            slots: vec![None; agents],
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn get(&self, agent: usize) -> Option<SlotRef> {
        self.slots[agent]
    }

    pub fn assigned_count(&self) -> usize {
        self.slots.iter().flatten().count()
    }

    pub fn occupied(&self) -> BTreeSet<SlotRef> {
        self.slots.iter().flatten().copied().collect()
    }

    /// Checks slot uniqueness and ranges.
    pub fn validate(&self, stations: usize, slots: u32) -> Result<()> {
        let mut seen = HashSet::new();
        for (agent, s) in self.slots.iter().enumerate() {
            let Some(s) = s else { continue };
            if s.station >= stations || s.slot >= slots {
                return Err(Error::InvalidAssignment(format!(
                    "agent {agent} assigned out-of-range slot {s:?}"
                )));
            }
            if !seen.insert(*s) {
                return Err(Error::InvalidAssignment(format!(
                    "slot {s:?} assigned to more than one agent"
                )));
            }
        }
        Ok(())
    }
}

/// Total idle time `T * (N*K - occupied)`. NULL assignments contribute
/// nothing.
pub fn total_idle_time(assignment: &Assignment, stations: usize, slots: u32, processing_time: Time) -> u64 {
    let total = stations as u64 * slots as u64;
    let occupied = assignment.occupied().len() as u64;
    processing_time as u64 * total.saturating_sub(occupied)
}

/// A timed path: `cells[i]` is the location at `start + i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub agent: usize,
    pub start: Time,
    pub cells: Vec<Cell>,
}

impl Path {
    pub fn new(agent: usize, start: Time, cells: Vec<Cell>) -> Self {
        Path { agent, start, cells }
    }

    /// Time of the last entry.
    pub fn end(&self) -> Time {
        self.start + self.cells.len() as Time - 1
    }

    pub fn last_cell(&self) -> Cell {
        *self.cells.last().expect("path has at least one entry")
    }

    pub fn cell_at(&self, t: Time) -> Option<Cell> {
        if t < self.start {
            return None;
        }
        self.cells.get((t - self.start) as usize).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (Time, Cell)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.start + i as Time, c))
    }

    /// Checks start, adjacency of consecutive cells, and that the path
    /// ends on `target` at a multiple of `processing_time`.
    pub fn validate(&self, map: &GridMap, spec: &AgentSpec, target: Cell, processing_time: Time) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInstance(format!("path of agent {}: {msg}", self.agent)));
        if self.cells.is_empty() {
            return bad("empty".into());
        }
        if self.start != spec.start_time || self.cells[0] != spec.start_cell {
            return bad("does not begin at the agent's start".into());
        }
        for w in self.cells.windows(2) {
            if w[0] != w[1] && !map.are_adjacent(w[0], w[1]) {
                return bad(format!("jumps from {:?} to {:?}", w[0], w[1]));
            }
            if !map.is_traversable(w[1]) {
                return bad(format!("enters obstacle {:?}", w[1]));
            }
        }
        if self.last_cell() != target {
            return bad("does not end on the assigned target".into());
        }
        if !self.end().is_multiple_of(processing_time) {
            return bad(format!("ends at {} which is not an admission time", self.end()));
        }
        Ok(())
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (t, c)) in self.entries().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}:{}", c.index())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Solution {
    pub assignment: Assignment,
    /// Paths of active agents only, ordered by agent index.
    pub paths: Vec<Path>,
    pub total_idle_time: u64,
    /// Agents (instance indices) that were given a slot but dropped to NULL
    /// because no path could be planned for them.
    pub demoted: Vec<usize>,
}

impl Solution {
    /// Builds a solution and computes idle time, counting preoccupied slots
    /// as occupied.
    pub fn new(instance: &OneShotInstance, assignment: Assignment, paths: Vec<Path>, demoted: Vec<usize>) -> Self {
        let mut occupied = assignment.occupied();
        occupied.extend(instance.preoccupied.iter().copied());
        let total = instance.station_count() as u64 * instance.slots as u64;
        let total_idle_time = instance.processing_time as u64 * (total - occupied.len() as u64);
        Solution {
            assignment,
            paths,
            total_idle_time,
            demoted,
        }
    }

    pub fn empty(instance: &OneShotInstance) -> Self {
        Self::new(instance, Assignment::unassigned(instance.agents.len()), Vec::new(), Vec::new())
    }

    pub fn path_of(&self, agent: usize) -> Option<&Path> {
        self.paths.iter().find(|p| p.agent == agent)
    }
}

/// Reads agents from lines `row col start_time`; blank lines and `#`
/// comments are skipped. Agents get ids `0, 1, ...` in file order.
pub fn parse_agents(text: &str, map: &GridMap) -> Result<Vec<AgentSpec>> {
    let mut agents = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line: n + 1, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [row, col, start] = fields[..] else {
            return Err(err(format!("expected 'row col start_time', found '{line}'")));
        };
        let num = |s: &str| s.parse::<usize>().map_err(|e| err(format!("bad number '{s}': {e}")));
        let (row, col, start) = (num(row)?, num(col)?, num(start)?);
        let cell = map
            .cell(row, col)
            .ok_or_else(|| err(format!("cell ({row}, {col}) is outside the map")))?;
        agents.push(AgentSpec {
            id: agents.len(),
            start_cell: cell,
            start_time: Time::try_from(start).map_err(|_| err(format!("start time {start} too large")))?,
        });
    }
    Ok(agents)
}
