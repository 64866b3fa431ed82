//! Independent reference implementations used by the integration tests.
//! Everything here is brute force and only meant for tiny inputs.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::Rng;
use sortflow::domain::{AgentSpec, Cell, GridMap, OneShotInstance, SlotRef, Time};
use sortflow::flow::FlowNetwork;
use sortflow::hungarian::CostMatrix;

/// Random network with at most `max_vertices` vertices and `max_edges`
/// edges; capacities in `1..=4`, costs in `0..=5`, no self-loops.
pub fn random_network(rng: &mut impl Rng, max_vertices: usize, max_edges: usize) -> FlowNetwork {
    let n = rng.random_range(2..=max_vertices);
    let mut net = FlowNetwork::new(n, 0, n - 1).unwrap();
    let m = rng.random_range(1..=max_edges);
    for _ in 0..m {
        let u = rng.random_range(0..n);
        let mut v = rng.random_range(0..n - 1);
        if v >= u {
            v += 1;
        }
        net.add_edge(u, v, rng.random_range(1..=4), rng.random_range(0..=5));
    }
    net
}

/// Maximum flow value and the least cost among maximum flows, found by
/// trying every integral edge-flow vector that conserves flow.
pub fn brute_force_flow(net: &FlowNetwork) -> (i64, i64) {
    let edges = net.edges();
    let n = net.vertex_count();
    let (s, t) = (net.source(), net.sink());
    // edges ordered so each vertex closes as early as possible
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by_key(|&e| edges[e].from.max(edges[e].to));
    let mut closes_at: Vec<Vec<usize>> = vec![Vec::new(); edges.len()];
    for v in 0..n {
        if v == s || v == t {
            continue;
        }
        if let Some(pos) = order.iter().rposition(|&e| edges[e].from == v || edges[e].to == v) {
            closes_at[pos].push(v);
        }
    }

    struct Search<'a> {
        net: &'a FlowNetwork,
        order: Vec<usize>,
        closes_at: Vec<Vec<usize>>,
        balance: Vec<i64>,
        best: (i64, i64),
    }

    impl Search<'_> {
        fn go(&mut self, pos: usize, cost: i64) {
            if pos == self.order.len() {
                let value = -self.balance[self.net.source()];
                if value > self.best.0 || (value == self.best.0 && cost < self.best.1) {
                    self.best = (value, cost);
                }
                return;
            }
            let e = self.net.edges()[self.order[pos]];
            for f in 0..=e.capacity {
                self.balance[e.from] -= f;
                self.balance[e.to] += f;
                if self.closes_at[pos].iter().all(|&v| self.balance[v] == 0) {
                    self.go(pos + 1, cost + f * e.cost);
                }
                self.balance[e.from] += f;
                self.balance[e.to] -= f;
            }
        }
    }

    let mut search = Search {
        net,
        order,
        closes_at,
        balance: vec![0; n],
        best: (i64::MIN, i64::MAX),
    };
    search.go(0, 0);
    search.best
}

/// Largest number of slots an assignment can fill when agent `i` may take
/// slot `(j, k)` only if `eta[i][j] <= k*T`, slots are distinct and not
/// preoccupied.
pub fn brute_force_ito(
    eta: &[Vec<Option<Time>>],
    stations: usize,
    slots: u32,
    t: Time,
    preoccupied: &BTreeSet<SlotRef>,
) -> usize {
    fn go(
        i: usize,
        eta: &[Vec<Option<Time>>],
        stations: usize,
        slots: u32,
        t: Time,
        used: &mut BTreeSet<SlotRef>,
    ) -> usize {
        if i == eta.len() {
            return 0;
        }
        let mut best = go(i + 1, eta, stations, slots, t, used);
        for j in 0..stations {
            let Some(e) = eta[i][j] else { continue };
            for k in 0..slots {
                let s = SlotRef::new(j, k);
                if e <= k * t && used.insert(s) {
                    best = best.max(1 + go(i + 1, eta, stations, slots, t, used));
                    used.remove(&s);
                }
            }
        }
        best
    }
    let mut used = preoccupied.clone();
    go(0, eta, stations, slots, t, &mut used)
}

/// Random instance on at most 3x3 cells with up to 3 agents, 2 stations,
/// `K <= 3` and `T <= 2`; some slots are preoccupied.
pub fn random_small_instance(rng: &mut impl Rng) -> OneShotInstance {
    loop {
        let h = rng.random_range(1..=3);
        let w = rng.random_range(if h == 1 { 2 } else { 1 }..=3);
        let mut chars = vec!['.'; h * w];
        for c in chars.iter_mut() {
            if rng.random_bool(0.2) {
                *c = '@';
            }
        }
        let free: Vec<usize> = (0..h * w).filter(|&i| chars[i] == '.').collect();
        if free.is_empty() {
            continue;
        }
        let n = rng.random_range(1..=2usize.min(free.len()));
        for &i in free.choose_multiple(rng, n) {
            chars[i] = 'T';
        }
        let text: String = chars
            .chunks(w)
            .map(|r| r.iter().collect::<String>() + "\n")
            .collect();
        let Ok(map) = GridMap::parse(&text) else { continue };
        let t = rng.random_range(1..=2);
        let k = rng.random_range(1..=3);
        let last = t * (k - 1);
        let cells: Vec<Cell> = map.traversable_cells().collect();
        let m = rng.random_range(1..=3);
        let agents = (0..m)
            .map(|id| AgentSpec {
                id,
                start_cell: *cells.choose(rng).unwrap(),
                start_time: rng.random_range(0..=last),
            })
            .collect();
        let mut preoccupied = BTreeSet::new();
        for j in 0..n {
            for slot in 0..k {
                if rng.random_bool(0.1) {
                    preoccupied.insert(SlotRef::new(j, slot));
                }
            }
        }
        return OneShotInstance::new(Arc::new(map), agents, t, k)
            .unwrap()
            .with_preoccupied(preoccupied)
            .unwrap();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Agent {
    Pending,
    Out,
    At(Cell),
}

/// Most working slots that agents can fill with collision-free timed paths,
/// by exhaustive search over joint states. An agent appears at its start
/// cell at its start time or stays out for good, moves or waits each step,
/// and fills slot `(j, k)` by standing on target `j` at `kT`, after which it
/// leaves the grid.
pub fn joint_search_optimum(instance: &OneShotInstance) -> usize {
    let map = &instance.map;
    let t_proc = instance.processing_time;
    let last = instance.last_admission();
    let agents = &instance.agents;
    let m = agents.len();
    let slot_bit = |s: SlotRef| 1u64 << (s.station * instance.slots as usize + s.slot as usize);
    let mut blocked = 0u64;
    for s in &instance.preoccupied {
        blocked |= slot_bit(*s);
    }

    let vertex_ok = |state: &[Agent]| {
        let mut seen = HashSet::new();
        state.iter().all(|a| match a {
            Agent::At(c) => seen.insert(*c),
            _ => true,
        })
    };

    // entries at time 0
    let mut layer: HashSet<(Vec<Agent>, u64)> = HashSet::new();
    for choice in 0..1u32 << m {
        let state: Vec<Agent> = (0..m)
            .map(|i| match agents[i].start_time {
                0 if choice >> i & 1 == 1 => Agent::At(agents[i].start_cell),
                0 => Agent::Out,
                _ => Agent::Pending,
            })
            .collect();
        if vertex_ok(&state) {
            layer.insert((state, 0));
        }
    }

    let mut best = 0;
    for t in 0..=last {
        // agents on a target at a slot boundary may fill that slot
        if t % t_proc == 0 {
            let k = t / t_proc;
            let mut finished = HashSet::new();
            for (state, used) in &layer {
                let options: Vec<(usize, u64)> = state
                    .iter()
                    .enumerate()
                    .filter_map(|(i, a)| match a {
                        Agent::At(c) => map
                            .stations()
                            .iter()
                            .position(|g| g == c)
                            .map(|j| (i, slot_bit(SlotRef::new(j, k)))),
                        _ => None,
                    })
                    .filter(|&(_, bit)| (used | blocked) & bit == 0)
                    .collect();
                for choice in 0..1u32 << options.len() {
                    let mut s = state.clone();
                    let mut u = *used;
                    for (b, &(i, bit)) in options.iter().enumerate() {
                        if choice >> b & 1 == 1 {
                            s[i] = Agent::Out;
                            u |= bit;
                        }
                    }
                    finished.insert((s, u));
                }
            }
            layer = finished;
        }
        if t == last {
            break;
        }
        let mut next = HashSet::new();
        for (state, used) in &layer {
            let per_agent: Vec<Vec<Agent>> = (0..m)
                .map(|i| match state[i] {
                    Agent::At(c) => std::iter::once(c).chain(map.neighbors(c)).map(Agent::At).collect(),
                    Agent::Pending if agents[i].start_time == t + 1 => {
                        vec![Agent::At(agents[i].start_cell), Agent::Out]
                    }
                    other => vec![other],
                })
                .collect();
            let mut idx = vec![0usize; m];
            loop {
                let cand: Vec<Agent> = (0..m).map(|i| per_agent[i][idx[i]]).collect();
                let swap_free = (0..m).all(|a| {
                    (a + 1..m).all(|b| match (state[a], state[b], cand[a], cand[b]) {
                        (Agent::At(pa), Agent::At(pb), Agent::At(na), Agent::At(nb)) => !(pa == nb && pb == na),
                        _ => true,
                    })
                });
                if swap_free && vertex_ok(&cand) {
                    next.insert((cand, *used));
                }
                let mut i = 0;
                while i < m {
                    idx[i] += 1;
                    if idx[i] < per_agent[i].len() {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
                if i == m {
                    break;
                }
            }
        }
        layer = next;
    }
    for (_, used) in &layer {
        best = best.max(used.count_ones() as usize);
    }
    best
}

/// Minimum total of a matching of size `min(rows, cols)`, or `None` if no
/// such matching avoids every forbidden entry.
pub fn brute_force_matching(m: &CostMatrix) -> Option<i64> {
    let transpose = m.rows() > m.cols();
    let (rows, cols) = if transpose { (m.cols(), m.rows()) } else { (m.rows(), m.cols()) };
    let get = |r: usize, c: usize| if transpose { m.get(c, r) } else { m.get(r, c) };
    fn go(r: usize, rows: usize, cols: usize, used: &mut Vec<bool>, get: &dyn Fn(usize, usize) -> Option<i64>) -> Option<i64> {
        if r == rows {
            return Some(0);
        }
        let mut best: Option<i64> = None;
        for c in 0..cols {
            if used[c] {
                continue;
            }
            let Some(cost) = get(r, c) else { continue };
            used[c] = true;
            if let Some(rest) = go(r + 1, rows, cols, used, get) {
                best = Some(best.map_or(cost + rest, |b| b.min(cost + rest)));
            }
            used[c] = false;
        }
        best
    }
    go(0, rows, cols, &mut vec![false; cols], &get)
}

/// Whether a delivering agent returning at `return_time` belongs to the
/// stride starting at `t0`: it must be back by the last admission time.
pub fn joins_stride(return_time: Time, t0: Time, t: Time, k: u32) -> bool {
    return_time <= t0 + t * (k - 1)
}
