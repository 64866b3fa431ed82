//! Prioritized path planning for agents with fixed working slots.
//!
//! Agents are planned one at a time with space-time A*; each planned path
//! is reserved so later agents route around it. An agent is reserved from
//! its start time until its admission time and disappears afterwards.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::{Assignment, Cell, GridMap, OneShotInstance, Path, Solution, Time};
use crate::error::{Error, Result};

const FREE: u32 = 0;
const NO_CELL: u32 = u32::MAX;

/// Seed of the randomized retry used by [`plan_prioritized`].
pub const DEFAULT_RETRY_SEED: u64 = 0x5eed;

/// Dense space-time reservations over `[0, horizon]`.
#[derive(Debug, Clone)]
pub struct ReservationTable {
    cells: usize,
    horizon: Time,
    /// Agent index + 1 occupying `(t, cell)`, or `FREE`.
    occupant: Vec<u32>,
    /// Cell the occupant of `(t, cell)` came from at `t - 1`.
    came_from: Vec<u32>,
    /// Cell blocked for everyone from this time on.
    permanent_from: Vec<Option<Time>>,
}

impl ReservationTable {
    pub fn new(cells: usize, horizon: Time) -> Self {
        let n = cells * (horizon as usize + 1);
        ReservationTable {
            cells,
            horizon,
            occupant: vec![FREE; n],
            came_from: vec![NO_CELL; n],
            permanent_from: vec![None; cells],
        }
    }

    pub fn horizon(&self) -> Time {
        self.horizon
    }

    fn slot(&self, cell: Cell, t: Time) -> usize {
        t as usize * self.cells + cell.index()
    }

    /// Whether `agent` may stand on `cell` at `t`.
    pub fn is_vertex_free(&self, cell: Cell, t: Time, agent: usize) -> bool {
        if t > self.horizon {
            return true;
        }
        if self.permanent_from[cell.index()].is_some_and(|p| t >= p) {
            return false;
        }
        let o = self.occupant[self.slot(cell, t)];
        o == FREE || o as usize == agent + 1
    }

    /// Whether moving `from -> to` between `t` and `t + 1` would swap with
    /// a reserved agent moving `to -> from`.
    pub fn is_move_free(&self, from: Cell, to: Cell, t: Time, agent: usize) -> bool {
        if from == to || t + 1 > self.horizon {
            return true;
        }
        let s = self.slot(from, t + 1);
        let o = self.occupant[s];
        o == FREE || o as usize == agent + 1 || self.came_from[s] != to.index() as u32
    }

    /// Holds `cell` at `t` for `agent` without a predecessor.
    pub fn claim(&mut self, cell: Cell, t: Time, agent: usize) {
        if t <= self.horizon {
            let s = self.slot(cell, t);
            self.occupant[s] = agent as u32 + 1;
            self.came_from[s] = NO_CELL;
        }
    }

    /// Releases a claim made by `agent`; other reservations are untouched.
    pub fn release(&mut self, cell: Cell, t: Time, agent: usize) {
        if t <= self.horizon {
            let s = self.slot(cell, t);
            if self.occupant[s] as usize == agent + 1 {
                self.occupant[s] = FREE;
                self.came_from[s] = NO_CELL;
            }
        }
    }

    /// Reserves every entry of `path` up to the horizon.
    pub fn reserve_path(&mut self, path: &Path, agent: usize) {
        let mut prev = NO_CELL;
        for (t, c) in path.entries() {
            if t > self.horizon {
                break;
            }
            let s = self.slot(c, t);
            self.occupant[s] = agent as u32 + 1;
            self.came_from[s] = prev;
            prev = c.index() as u32;
        }
    }

    pub fn block_from(&mut self, cell: Cell, t: Time) {
        self.permanent_from[cell.index()] = Some(t);
    }
}

/// Space-time A* from `(start, start_time)` to `(goal, deadline)` for
/// `agent`, with `to_goal` the BFS distance of every cell to `goal`.
///
/// Returns the cells at `start_time, ..., deadline`. Among feasible paths
/// the one reaching the goal earliest and then waiting there is preferred;
/// if the goal cannot be held that long the agent hovers nearby.
#[allow(clippy::too_many_arguments)]
pub fn spacetime_astar(
    map: &GridMap,
    start: Cell,
    start_time: Time,
    goal: Cell,
    deadline: Time,
    table: &ReservationTable,
    to_goal: &[Option<u32>],
    agent: usize,
) -> Option<Vec<Cell>> {
    let h = |c: Cell| to_goal[c.index()];
    if deadline < start_time
        || !table.is_vertex_free(start, start_time, agent)
        || h(start).is_none_or(|d| start_time + d > deadline)
    {
        return None;
    }
    let n = map.cell_count();
    let layers = (deadline - start_time) as usize + 1;
    let key = |c: Cell, t: Time| (t - start_time) as usize * n + c.index();
    let mut parent = vec![NO_CELL; layers * n];
    let mut closed = vec![false; layers * n];
    let mut open = BinaryHeap::new();
    let goal_holdable = |t: Time| (t..=deadline).all(|tau| table.is_vertex_free(goal, tau, agent));

    parent[key(start, start_time)] = start.index() as u32;
    open.push(Reverse((start_time + h(start)?, Reverse(start_time), start.index())));
    while let Some(Reverse((_, Reverse(t), c))) = open.pop() {
        let cell = Cell(c);
        let k = key(cell, t);
        if closed[k] {
            continue;
        }
        closed[k] = true;
        if cell == goal && goal_holdable(t) {
            let mut cells = vec![goal; (deadline - t) as usize];
            let (mut cur, mut tt) = (cell, t);
            loop {
                cells.push(cur);
                if tt == start_time {
                    break;
                }
                cur = Cell(parent[key(cur, tt)] as usize);
                tt -= 1;
            }
            cells.reverse();
            return Some(cells);
        }
        if t == deadline {
            continue;
        }
        let nt = t + 1;
        for next in std::iter::once(cell).chain(map.neighbors(cell)) {
            let Some(d) = h(next) else { continue };
            if nt + d > deadline {
                continue;
            }
            let nk = key(next, nt);
            if closed[nk] || parent[nk] != NO_CELL {
                continue;
            }
            if !table.is_vertex_free(next, nt, agent) || !table.is_move_free(cell, next, t, agent) {
                continue;
            }
            parent[nk] = c as u32;
            open.push(Reverse((nt + d, Reverse(nt), next.index())));
        }
    }
    None
}

fn check_assignment(instance: &OneShotInstance, assignment: &Assignment) -> Result<()> {
    if assignment.len() != instance.agents.len() {
        return Err(Error::InvalidAssignment(format!(
            "{} entries for {} agents",
            assignment.len(),
            instance.agents.len()
        )));
    }
    assignment.validate(instance.station_count(), instance.slots)?;
    if let Some(s) = assignment.slots.iter().flatten().find(|s| instance.is_preoccupied(**s)) {
        return Err(Error::InvalidAssignment(format!(
            "slot {} of station {} is already occupied",
            s.slot, s.station
        )));
    }
    Ok(())
}

struct Attempt {
    paths: Vec<Option<Path>>,
    failed: Vec<usize>,
}

fn plan_in_order(instance: &OneShotInstance, assignment: &Assignment, order: &[usize]) -> Attempt {
    let map = &instance.map;
    let mut table = ReservationTable::new(map.cell_count(), instance.horizon());
    let mut heuristics: HashMap<Cell, Vec<Option<u32>>> = HashMap::new();
    // every start is claimed up front so earlier agents keep clear of it
    for &i in order {
        let a = &instance.agents[i];
        table.claim(a.start_cell, a.start_time, i);
    }
    let mut paths = vec![None; instance.agents.len()];
    let mut failed = Vec::new();
    for &i in order {
        let a = &instance.agents[i];
        let slot = assignment.slots[i].expect("ordered agents have slots");
        let goal = map.target(slot.station);
        let deadline = instance.slot_time(slot.slot);
        let to_goal = heuristics.entry(goal).or_insert_with(|| map.distances_from(goal));
        match spacetime_astar(map, a.start_cell, a.start_time, goal, deadline, &table, to_goal, i) {
            Some(cells) => {
                let path = Path::new(a.id, a.start_time, cells);
                table.reserve_path(&path, i);
                paths[i] = Some(path);
            }
            None => {
                table.release(a.start_cell, a.start_time, i);
                failed.push(i);
            }
        }
    }
    Attempt { paths, failed }
}

/// Plans collision-free paths for every agent with a slot. Agents are taken
/// by admission time, then start time, then id. If some agent fails, one
/// retry with a shuffled order (seeded with `retry_seed`) is made and the
/// attempt with fewer failures kept; agents that still fail become NULL and
/// are listed in [`Solution::demoted`].
pub fn plan_prioritized_seeded(instance: &OneShotInstance, assignment: &Assignment, retry_seed: u64) -> Result<Solution> {
    instance.validate()?;
    check_assignment(instance, assignment)?;
    let mut order: Vec<usize> = (0..instance.agents.len()).filter(|&i| assignment.slots[i].is_some()).collect();
    order.sort_by_key(|&i| {
        let a = &instance.agents[i];
        (assignment.slots[i].map(|s| s.slot), a.start_time, a.id)
    });
    let mut best = plan_in_order(instance, assignment, &order);
    if !best.failed.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(retry_seed);
        order.shuffle(&mut rng);
        let retry = plan_in_order(instance, assignment, &order);
        if retry.failed.len() < best.failed.len() {
            best = retry;
        }
    }
    let mut slots = assignment.slots.clone();
    for &i in &best.failed {
        log::debug!("agent {} demoted: no path meets its deadline", instance.agents[i].id);
        slots[i] = None;
    }
    let mut demoted = best.failed;
    demoted.sort_unstable();
    let paths = best.paths.into_iter().flatten().collect();
    Ok(Solution::new(instance, Assignment { slots }, paths, demoted))
}

pub fn plan_prioritized(instance: &OneShotInstance, assignment: &Assignment) -> Result<Solution> {
    plan_prioritized_seeded(instance, assignment, DEFAULT_RETRY_SEED)
}
