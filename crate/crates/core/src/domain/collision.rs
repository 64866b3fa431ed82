use std::collections::HashMap;
use std::fmt;

use super::grid::Cell;
use super::instance::{Path, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Collision {
    /// Two agents on `cell` at time `time`.
    Vertex {
        agents: (usize, usize),
        cell: Cell,
        time: Time,
    },
    /// Agents swap `from` and `to` between `time` and `time + 1`; the first
    /// agent moves `from -> to`.
    Edge {
        agents: (usize, usize),
        from: Cell,
        to: Cell,
        time: Time,
    },
}

impl Collision {
    pub fn time(&self) -> Time {
        match *self {
            Collision::Vertex { time, .. } | Collision::Edge { time, .. } => time,
        }
    }
}

impl fmt::Display for Collision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Collision::Vertex { agents, cell, time } => write!(
                f,
                "vertex collision between agents {} and {} at cell {} time {}",
                agents.0,
                agents.1,
                cell.index(),
                time
            ),
            Collision::Edge {
                agents,
                from,
                to,
                time,
            } => write!(
                f,
                "edge collision between agents {} and {} swapping cells {} and {} at time {}->{}",
                agents.0,
                agents.1,
                from.index(),
                to.index(),
                time,
                time + 1
            ),
        }
    }
}

/// Earliest vertex or edge collision among `paths` (vertex collisions win
/// ties at equal time). Agents exist only between their first and last entry.
pub fn first_collision(paths: &[Path]) -> Option<Collision> {
    let occupancy = occupancy(paths);
    let mut best: Option<Collision> = None;
    let consider = |c: Collision, best: &mut Option<Collision>| {
        let better = match best {
            None => true,
            Some(b) => rank(&c) < rank(b),
        };
        if better {
            *best = Some(c);
        }
    };
    for (&(t, cell), holders) in &occupancy {
        if holders.len() > 1 {
            let mut ids: Vec<usize> = holders.iter().map(|&i| paths[i].agent).collect();
            ids.sort_unstable();
            consider(
                Collision::Vertex {
                    agents: (ids[0], ids[1]),
                    cell,
                    time: t,
                },
                &mut best,
            );
        }
    }
    if let Some(c) = first_edge_collision_with(paths, &occupancy) {
        consider(c, &mut best);
    }
    best
}

/// Earliest edge collision, ignoring vertex collisions.
pub fn first_edge_collision(paths: &[Path]) -> Option<Collision> {
    first_edge_collision_with(paths, &occupancy(paths))
}

/// Number of distinct edge collisions (unordered agent pairs per time step).
pub fn edge_collision_count(paths: &[Path]) -> usize {
    let occ = occupancy(paths);
    let mut count = 0;
    for (i, p) in paths.iter().enumerate() {
        for (t, w) in p.cells.windows(2).enumerate() {
            let t = p.start + t as Time;
            if let Some(j) = swapper(paths, &occ, i, w[0], w[1], t) {
                if i < j {
                    count += 1;
                }
            }
        }
    }
    count
}

pub fn is_collision_free(paths: &[Path]) -> bool {
    first_collision(paths).is_none()
}

fn rank(c: &Collision) -> (Time, u8, usize, usize) {
    match *c {
        Collision::Vertex { agents, time, .. } => (time, 0, agents.0, agents.1),
        Collision::Edge { agents, time, .. } => (time, 1, agents.0, agents.1),
    }
}

type Occupancy = HashMap<(Time, Cell), Vec<usize>>;

fn occupancy(paths: &[Path]) -> Occupancy {
    let mut occ: Occupancy = HashMap::new();
    for (i, p) in paths.iter().enumerate() {
        for (t, c) in p.entries() {
            occ.entry((t, c)).or_default().push(i);
        }
    }
    occ
}

fn swapper(paths: &[Path], occ: &Occupancy, i: usize, from: Cell, to: Cell, t: Time) -> Option<usize> {
    if from == to {
        return None;
    }
    let holders = occ.get(&(t, to))?;
    holders
        .iter()
        .copied()
        .find(|&j| j != i && paths[j].cell_at(t + 1) == Some(from))
}

fn first_edge_collision_with(paths: &[Path], occ: &Occupancy) -> Option<Collision> {
    let mut best: Option<(Time, usize, usize, Collision)> = None;
    for (i, p) in paths.iter().enumerate() {
        for (k, w) in p.cells.windows(2).enumerate() {
            let t = p.start + k as Time;
            if best.as_ref().is_some_and(|b| b.0 <= t) {
                break;
            }
            if let Some(j) = swapper(paths, occ, i, w[0], w[1], t) {
                let (a, b) = (paths[i].agent, paths[j].agent);
                let c = if a < b {
                    Collision::Edge {
                        agents: (a, b),
                        from: w[0],
                        to: w[1],
                        time: t,
                    }
                } else {
                    Collision::Edge {
                        agents: (b, a),
                        from: w[1],
                        to: w[0],
                        time: t,
                    }
                };
                let key = (t, a.min(b), a.max(b));
                if best.as_ref().is_none_or(|cur| (key.0, key.1, key.2) < (cur.0, cur.1, cur.2)) {
                    best = Some((key.0, key.1, key.2, c));
                }
                break;
            }
        }
    }
    best.map(|b| b.3)
}
