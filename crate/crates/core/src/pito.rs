//! Joint assignment and path finding on a time-expanded network.
//!
//! Every traversable cell `u` and time `t <= (K-1)T` gets a location vertex
//! `u_t` and an auxiliary vertex `u_t'` joined by a unit edge, so at most one
//! agent occupies a cell per time step. Unit edges `u_t' -> v_{t+1}` model
//! moves and waits. The auxiliary vertex of a station target at an admission
//! time `kT` feeds working slot `k`, after which the slot layer is the same
//! as in [`crate::ito`]. A maximum flow therefore picks slots and
//! vertex-collision-free paths together. Edge collisions are removed
//! afterwards by [`repair_edge_collisions`].

use std::collections::HashMap;

use crate::domain::{edge_collision_count, first_edge_collision, Assignment, Cell, Collision, OneShotInstance, Path, SlotRef, Solution, Time};
use crate::error::{Error, Result};
use crate::flow::{min_cost_max_flow, EdgeId, FlowNetwork, FlowResult};
use crate::slots::{Penalty, SlotLayer};

const PRUNED: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct PitoNetworkIndex {
    /// Compact index of each traversable cell, `None` for obstacles.
    compact: Vec<Option<usize>>,
    cells: Vec<Cell>,
    last_time: Time,
    processing_time: Time,
    /// Vertex `u_t` per `(t, compact cell)`, `PRUNED` if no agent can use it.
    location: Vec<u32>,
    pub agent_vertex: Vec<usize>,
    /// Edge `a_i -> (start_i)_{t_i}` per agent; `None` if the agent cannot
    /// reach any target in time.
    pub entry_edge: Vec<Option<EdgeId>>,
    /// `u_t -> u_t'` edge per `(t, compact cell)`.
    node_edge: Vec<EdgeId>,
    /// Range into `moves` of the outgoing edges of `u_t'`.
    move_range: Vec<(u32, u8)>,
    /// Wait or move edge and the cell it leads to.
    moves: Vec<(EdgeId, Cell)>,
    /// `(g_j)_{kT}' -> s_{j,k}` edge at index `j * K + k`.
    pub target_edge: Vec<Option<EdgeId>>,
    pub slots: SlotLayer,
    /// Station whose target is this cell.
    station_at: HashMap<Cell, usize>,
}

impl PitoNetworkIndex {
    fn key(&self, compact: usize, t: Time) -> usize {
        t as usize * self.cells.len() + compact
    }

    /// Vertex `u_t`, unless `u` is an obstacle, `t` lies outside the
    /// expansion, or no agent could use it.
    pub fn location_vertex(&self, cell: Cell, t: Time) -> Option<usize> {
        let c = (*self.compact.get(cell.index())?)?;
        if t > self.last_time {
            return None;
        }
        let v = self.location[self.key(c, t)];
        (v != PRUNED).then_some(v as usize)
    }

    /// Vertex `u_t'`.
    pub fn auxiliary_vertex(&self, cell: Cell, t: Time) -> Option<usize> {
        self.location_vertex(cell, t).map(|v| v + 1)
    }

    pub fn penalty_vertex(&self) -> Option<usize> {
        self.slots.penalty_vertex
    }

    pub fn slot_vertex(&self, slot: SlotRef) -> usize {
        self.slots.vertex(slot)
    }

    /// Last expanded time step `(K-1)T`.
    pub fn last_time(&self) -> Time {
        self.last_time
    }
}

/// Builds the time-expanded network. Vertices `u_t` that no agent can reach
/// by `t`, or from which no target is reachable by `(K-1)T`, carry no flow
/// in any solution and are left out.
pub fn build_pito(instance: &OneShotInstance, penalty: Option<Penalty>) -> Result<(FlowNetwork, PitoNetworkIndex)> {
    instance.validate()?;
    let last_time = instance.last_admission();
    if let Some(a) = instance.agents.iter().find(|a| a.start_time > last_time) {
        return Err(Error::InvalidInstance(format!(
            "agent {} starts at {} after the last admission time {last_time}",
            a.id, a.start_time
        )));
    }
    let map = &instance.map;
    let cells: Vec<Cell> = map.traversable_cells().collect();
    let mut compact = vec![None; map.cell_count()];
    for (i, c) in cells.iter().enumerate() {
        compact[c.index()] = Some(i);
    }

    // earliest time any agent can be on a cell, and distance to the nearest target
    let mut earliest = vec![Time::MAX; map.cell_count()];
    let mut from_start: HashMap<Cell, Vec<Option<u32>>> = HashMap::new();
    for a in &instance.agents {
        let d = from_start.entry(a.start_cell).or_insert_with(|| map.distances_from(a.start_cell));
        for (e, d) in earliest.iter_mut().zip(d.iter()) {
            if let Some(d) = d {
                *e = (*e).min(a.start_time + d);
            }
        }
    }
    let mut to_target = vec![u32::MAX; map.cell_count()];
    for d in map.station_distances() {
        for (b, d) in to_target.iter_mut().zip(d) {
            if let Some(d) = d {
                *b = (*b).min(d);
            }
        }
    }
    let useful = |cell: Cell, t: Time| {
        let i = cell.index();
        earliest[i] <= t && to_target[i] != u32::MAX && t + to_target[i] <= last_time
    };

    let layers = last_time as usize + 1;
    let mut net = FlowNetwork::new(2, 0, 1)?;
    let agent_vertex: Vec<usize> = instance.agents.iter().map(|_| net.add_vertex()).collect();
    let mut location = vec![PRUNED; layers * cells.len()];
    for t in 0..layers {
        for (c, &cell) in cells.iter().enumerate() {
            if useful(cell, t as Time) {
                location[t * cells.len() + c] = net.add_vertex() as u32;
                net.add_vertex();
            }
        }
    }
    let loc = |c: usize, t: usize| location[t * cells.len() + c];

    let mut node_edge = vec![usize::MAX; layers * cells.len()];
    let mut move_range = vec![(0u32, 0u8); layers * cells.len()];
    let mut moves = Vec::new();
    for t in 0..layers {
        for c in 0..cells.len() {
            let v = loc(c, t);
            if v != PRUNED {
                node_edge[t * cells.len() + c] = net.add_edge(v as usize, v as usize + 1, 1, 0);
            }
        }
        for (c, &cell) in cells.iter().enumerate() {
            let v = loc(c, t);
            if v == PRUNED || t + 1 >= layers {
                continue;
            }
            let first = moves.len() as u32;
            for next in std::iter::once(cell).chain(map.neighbors(cell)) {
                let w = loc(compact[next.index()].expect("neighbors are traversable"), t + 1);
                if w != PRUNED {
                    moves.push((net.add_edge(v as usize + 1, w as usize, 1, 0), next));
                }
            }
            move_range[t * cells.len() + c] = (first, (moves.len() as u32 - first) as u8);
        }
    }

    let mut entry_edge = Vec::with_capacity(instance.agents.len());
    for (a, &v) in instance.agents.iter().zip(&agent_vertex) {
        let c = compact[a.start_cell.index()].expect("validated start cell");
        let w = loc(c, a.start_time as usize);
        if w == PRUNED {
            entry_edge.push(None);
            continue;
        }
        net.add_edge(net.source(), v, 1, 0);
        entry_edge.push(Some(net.add_edge(v, w as usize, 1, 0)));
    }

    let slots = SlotLayer::build(&mut net, instance, penalty);
    let mut target_edge = Vec::new();
    let mut station_at = HashMap::new();
    for (j, &g) in map.stations().iter().enumerate() {
        station_at.insert(g, j);
        let c = compact[g.index()].expect("targets are traversable");
        for k in 0..instance.slots {
            let w = loc(c, instance.slot_time(k) as usize);
            target_edge.push(
                (w != PRUNED).then(|| net.add_edge(w as usize + 1, slots.vertex(SlotRef::new(j, k)), 1, 0)),
            );
        }
    }

    Ok((
        net,
        PitoNetworkIndex {
            compact,
            cells,
            last_time,
            processing_time: instance.processing_time,
            location,
            agent_vertex,
            entry_edge,
            node_edge,
            move_range,
            moves,
            target_edge,
            slots,
            station_at,
        },
    ))
}

/// Decomposes a solved PITO flow into per-agent paths and slots. Paths end
/// on the target at the admission time where the unit left the grid; the
/// slot may be later if the agent queues. Edge collisions are not removed.
pub fn extract_solution(flow: &FlowResult, index: &PitoNetworkIndex, instance: &OneShotInstance) -> Result<Solution> {
    let m = instance.agents.len();
    let k_count = instance.slots as usize;
    let mut entries = vec![Vec::new(); index.slots.slot_vertex.len()];
    let mut raw_paths: Vec<Option<Path>> = vec![None; m];
    for (i, a) in instance.agents.iter().enumerate() {
        if index.entry_edge[i].is_none_or(|e| flow.flow[e] == 0) {
            continue;
        }
        let mut cells = vec![a.start_cell];
        let mut cell = a.start_cell;
        let mut t = a.start_time;
        loop {
            let c = index.compact[cell.index()].expect("paths stay on traversable cells");
            let key = index.key(c, t);
            if flow.flow[index.node_edge[key]] != 1 {
                return Err(Error::Internal(format!("agent {} unit lost at cell {} time {t}", a.id, cell.index())));
            }
            if let Some(&j) = index.station_at.get(&cell) {
                if t % index.processing_time == 0 {
                    let k = (t / index.processing_time) as usize;
                    if k < k_count && index.target_edge[j * k_count + k].is_some_and(|e| flow.flow[e] == 1) {
                        entries[j * k_count + k].push(i);
                        break;
                    }
                }
            }
            let (first, count) = index.move_range[key];
            let out = &index.moves[first as usize..first as usize + count as usize];
            let Some(&(_, next)) = out.iter().find(|(e, _)| flow.flow[*e] == 1) else {
                return Err(Error::Internal(format!(
                    "agent {} unit cannot be traced beyond cell {} time {t}",
                    a.id,
                    cell.index()
                )));
            };
            cell = next;
            t += 1;
            cells.push(cell);
        }
        raw_paths[i] = Some(Path::new(a.id, a.start_time, cells));
    }
    let slots = index.slots.trace(flow, &entries, m)?;
    let mut paths = Vec::new();
    for (i, p) in raw_paths.into_iter().enumerate() {
        match (p, slots[i]) {
            (Some(p), Some(_)) => paths.push(p),
            (None, None) => {}
            _ => return Err(Error::Internal(format!("agent {i} has a path but no slot or vice versa"))),
        }
    }
    Ok(Solution::new(instance, Assignment { slots }, paths, Vec::new()))
}

/// Removes edge collisions by swapping path suffixes: when agents swap
/// cells `u` and `v` between `t` and `t + 1`, each instead waits on its own
/// cell at `t + 1` and continues along the other's remaining path. The cells
/// occupied at every time step are unchanged, so no vertex collision or
/// delay is introduced and the set of reached targets is preserved.
pub fn repair_edge_collisions(mut paths: Vec<Path>) -> Result<Vec<Path>> {
    let bound = edge_collision_count(&paths);
    let mut rounds = 0;
    while let Some(Collision::Edge { agents, time, .. }) = first_edge_collision(&paths) {
        if rounds >= bound {
            return Err(Error::Internal("edge-collision repair did not terminate".into()));
        }
        rounds += 1;
        let i = paths.iter().position(|p| p.agent == agents.0).expect("agent in paths");
        let j = paths.iter().position(|p| p.agent == agents.1).expect("agent in paths");
        let cut_i = (time + 1 - paths[i].start) as usize;
        let cut_j = (time + 1 - paths[j].start) as usize;
        let tail_i = paths[i].cells.split_off(cut_i);
        let tail_j = paths[j].cells.split_off(cut_j);
        paths[i].cells.extend(tail_j);
        paths[j].cells.extend(tail_i);
    }
    Ok(paths)
}

/// Build, solve, extract and repair. Slots follow the repaired paths.
pub fn solve_pito(instance: &OneShotInstance, penalty: Option<Penalty>) -> Result<Solution> {
    let (net, index) = build_pito(instance, penalty)?;
    let flow = min_cost_max_flow(&net);
    let raw = extract_solution(&flow, &index, instance)?;
    finish_repair(instance, raw)
}

/// Applies [`repair_edge_collisions`] to a raw solution and re-attaches each
/// slot to whichever agent now owns the path that reaches it.
pub fn finish_repair(instance: &OneShotInstance, raw: Solution) -> Result<Solution> {
    let index_of: HashMap<usize, usize> = instance.agents.iter().enumerate().map(|(i, a)| (a.id, i)).collect();
    let mut slot_by_end: HashMap<(Cell, Time), SlotRef> = HashMap::new();
    for p in &raw.paths {
        let slot = raw.assignment.slots[index_of[&p.agent]].expect("path implies slot");
        slot_by_end.insert((p.last_cell(), p.end()), slot);
    }
    let paths = repair_edge_collisions(raw.paths)?;
    let mut slots = vec![None; instance.agents.len()];
    for p in &paths {
        slots[index_of[&p.agent]] = Some(slot_by_end[&(p.last_cell(), p.end())]);
    }
    Ok(Solution::new(instance, Assignment { slots }, paths, Vec::new()))
}
