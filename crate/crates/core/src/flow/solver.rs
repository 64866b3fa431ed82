use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use super::network::{FlowNetwork, FlowResult};

const UNREACHED: u32 = u32::MAX;
const INF: i64 = i64::MAX / 4;

/// Residual graph in CSR form. Arc `2e` is edge `e`, arc `2e + 1` its
/// reverse. Adjacency lists follow edge insertion order.
struct Residual {
    start: Vec<usize>,
    adj: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<i64>,
    cost: Vec<i64>,
}

impl Residual {
    fn new(net: &FlowNetwork) -> Self {
        let n = net.vertex_count();
        let m = net.edges().len();
        let mut degree = vec![0usize; n + 1];
        for e in net.edges() {
            degree[e.from] += 1;
            degree[e.to] += 1;
        }
        let mut start = vec![0usize; n + 1];
        for v in 0..n {
            start[v + 1] = start[v] + degree[v];
        }
        let mut fill = start.clone();
        let mut adj = vec![0usize; 2 * m];
        let mut to = vec![0usize; 2 * m];
        let mut cap = vec![0i64; 2 * m];
        let mut cost = vec![0i64; 2 * m];
        for (id, e) in net.edges().iter().enumerate() {
            let (fwd, rev) = (2 * id, 2 * id + 1);
            to[fwd] = e.to;
            to[rev] = e.from;
            cap[fwd] = e.capacity;
            cost[fwd] = e.cost;
            cost[rev] = -e.cost;
            adj[fill[e.from]] = fwd;
            fill[e.from] += 1;
            adj[fill[e.to]] = rev;
            fill[e.to] += 1;
        }
        Residual {
            start,
            adj,
            to,
            cap,
            cost,
        }
    }

    fn vertex_count(&self) -> usize {
        self.start.len() - 1
    }

    #[inline]
    fn tail(&self, arc: usize) -> usize {
        self.to[arc ^ 1]
    }

    fn push(&mut self, arc: usize, amount: i64) {
        self.cap[arc] -= amount;
        self.cap[arc ^ 1] += amount;
    }

    /// BFS hop levels from `s` over residual arcs accepted by `admissible`.
    /// Returns whether `t` was reached.
    fn levels(&self, s: usize, t: usize, level: &mut [u32], admissible: &impl Fn(&Self, usize) -> bool) -> bool {
        level.fill(UNREACHED);
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            if level[t] != UNREACHED && level[v] >= level[t] {
                break;
            }
            for &a in &self.adj[self.start[v]..self.start[v + 1]] {
                let w = self.to[a];
                if self.cap[a] > 0 && level[w] == UNREACHED && admissible(self, a) {
                    level[w] = level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        level[t] != UNREACHED
    }

    /// Blocking flow on the level graph (iterative DFS with current-arc
    /// pointers).
    fn blocking_flow(&mut self, s: usize, t: usize, level: &mut [u32], admissible: &impl Fn(&Self, usize) -> bool) -> i64 {
        let mut next = self.start[..self.vertex_count()].to_vec();
        let mut stack: Vec<usize> = Vec::new();
        let mut total = 0;
        let mut v = s;
        loop {
            if v == t {
                let f = stack.iter().map(|&a| self.cap[a]).min().unwrap_or(0);
                for &a in &stack {
                    self.push(a, f);
                }
                total += f;
                let cut = stack.iter().position(|&a| self.cap[a] == 0).unwrap_or(0);
                v = self.tail(stack[cut]);
                stack.truncate(cut);
                continue;
            }
            let end = self.start[v + 1];
            let mut advanced = false;
            while next[v] < end {
                let a = self.adj[next[v]];
                let w = self.to[a];
                if self.cap[a] > 0 && level[w] == level[v] + 1 && admissible(self, a) {
                    stack.push(a);
                    v = w;
                    advanced = true;
                    break;
                }
                next[v] += 1;
            }
            if !advanced {
                if v == s {
                    break;
                }
                level[v] = UNREACHED;
                let a = stack.pop().expect("non-source vertex has an entry arc");
                v = self.tail(a);
                next[v] += 1;
            }
        }
        total
    }

    fn result(&self, net: &FlowNetwork) -> FlowResult {
        let flow: Vec<i64> = net
            .edges()
            .iter()
            .enumerate()
            .map(|(id, e)| e.capacity - self.cap[2 * id])
            .collect();
        let mut value = 0;
        let mut cost = 0;
        for (e, &f) in net.edges().iter().zip(&flow) {
            if e.from == net.source() {
                value += f;
            }
            if e.to == net.source() {
                value -= f;
            }
            cost += f * e.cost;
        }
        FlowResult { flow, value, cost }
    }
}

/// Integral maximum flow (Dinic). Costs are ignored for optimisation but
/// the reported `cost` is that of the returned flow.
pub fn max_flow(net: &FlowNetwork) -> FlowResult {
    let mut res = Residual::new(net);
    let (s, t) = (net.source(), net.sink());
    let mut level = vec![UNREACHED; net.vertex_count()];
    while res.levels(s, t, &mut level, &|_, _| true) {
        if res.blocking_flow(s, t, &mut level, &|_, _| true) == 0 {
            break;
        }
    }
    res.result(net)
}

/// Integral maximum flow of minimum cost among all maximum flows.
///
/// Primal-dual: Dijkstra on reduced costs updates vertex potentials, then a
/// Dinic max-flow on the zero-reduced-cost subgraph saturates every
/// shortest augmenting path of the current length before the next round.
/// Requires non-negative costs, so no initial potentials are needed.
pub fn min_cost_max_flow(net: &FlowNetwork) -> FlowResult {
    let mut res = Residual::new(net);
    let n = net.vertex_count();
    let (s, t) = (net.source(), net.sink());
    let mut potential = vec![0i64; n];
    let mut dist = vec![INF; n];
    let mut level = vec![UNREACHED; n];
    let mut heap = BinaryHeap::new();

    // with zero potentials and non-negative costs the zero-cost arcs are
    // already admissible, so the first round needs no Dijkstra
    let mut first = true;
    loop {
        if !first {
            dist.fill(INF);
            dist[s] = 0;
            heap.push(Reverse((0i64, s)));
            while let Some(Reverse((d, v))) = heap.pop() {
                if d > dist[v] {
                    continue;
                }
                // everything not yet settled ends up capped at dist[t] anyway
                if d > dist[t] {
                    break;
                }
                for &a in &res.adj[res.start[v]..res.start[v + 1]] {
                    if res.cap[a] <= 0 {
                        continue;
                    }
                    let w = res.to[a];
                    let nd = d + res.cost[a] + potential[v] - potential[w];
                    if nd < dist[w] {
                        dist[w] = nd;
                        heap.push(Reverse((nd, w)));
                    }
                }
            }
            heap.clear();
            if dist[t] >= INF {
                break;
            }
            let cap_dist = dist[t];
            for v in 0..n {
                potential[v] += dist[v].min(cap_dist);
            }
        }
        first = false;
        let reduced_zero = |r: &Residual, a: usize| r.cost[a] + potential[r.tail(a)] - potential[r.to[a]] == 0;
        loop {
            if !res.levels(s, t, &mut level, &reduced_zero) {
                break;
            }
            if res.blocking_flow(s, t, &mut level, &reduced_zero) == 0 {
                break;
            }
        }
    }
    res.result(net)
}
