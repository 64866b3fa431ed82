//! Assignment baselines built on the Hungarian method.

use crate::domain::{Assignment, OneShotInstance, SlotRef};
use crate::error::{Error, Result};
use crate::ito::ArrivalEstimate;

/// Rectangular cost matrix; `None` marks an impossible pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Option<i64>>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        CostMatrix {
            rows,
            cols,
            data: vec![None; rows * cols],
        }
    }

    /// Panics on ragged input or negative costs.
    pub fn from_rows(rows: Vec<Vec<Option<i64>>>) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged cost matrix");
        assert!(rows.iter().flatten().flatten().all(|&c| c >= 0), "negative cost");
        CostMatrix {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_finite(rows: &[Vec<i64>]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&c| Some(c)).collect()).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Option<i64> {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, cost: Option<i64>) {
        assert!(cost.is_none_or(|c| c >= 0), "negative cost");
        self.data[r * self.cols + c] = cost;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    /// `(row, col)` pairs sorted by row.
    pub pairs: Vec<(usize, usize)>,
    pub total: i64,
}

/// Core O(n^2 m) shortest-augmenting-path Hungarian method on the
/// sub-matrix `rows x cols` with `rows.len() <= cols.len()`. Impossible pairs
/// cost `big`. Returns the column position matched to each row position.
fn solve_dense(cost: &dyn Fn(usize, usize) -> i64, n: usize, m: usize) -> Vec<usize> {
    debug_assert!(n <= m);
    const INF: i64 = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![usize::MAX; n];
    for j in 1..=m {
        if p[j] != 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Min-cost matching saturating the smaller side of the sub-matrix given by
/// `rows` and `cols`, where impossible pairs cost more than any finite
/// matching. Returns all pairs (some possibly impossible).
fn saturating_pairs(m: &CostMatrix, rows: &[usize], cols: &[usize]) -> Vec<(usize, usize)> {
    if rows.is_empty() || cols.is_empty() {
        return Vec::new();
    }
    let max_finite = m.data.iter().flatten().copied().max().unwrap_or(0);
    let big = max_finite.saturating_mul(rows.len().min(cols.len()) as i64 + 1).saturating_add(1);
    let entry = |r: usize, c: usize| m.get(r, c).unwrap_or(big);
    if rows.len() <= cols.len() {
        let a = solve_dense(&|i, j| entry(rows[i], cols[j]), rows.len(), cols.len());
        a.iter().enumerate().map(|(i, &j)| (rows[i], cols[j])).collect()
    } else {
        let a = solve_dense(&|i, j| entry(rows[j], cols[i]), cols.len(), rows.len());
        let mut pairs: Vec<_> = a.iter().enumerate().map(|(i, &j)| (rows[j], cols[i])).collect();
        pairs.sort_unstable();
        pairs
    }
}

fn optimum(m: &CostMatrix, rows: &[usize], cols: &[usize]) -> Option<i64> {
    saturating_pairs(m, rows, cols)
        .into_iter()
        .map(|(r, c)| m.get(r, c))
        .sum::<Option<i64>>()
}

/// Minimum-cost matching that saturates the smaller side, avoiding
/// impossible pairs. Among optimal matchings the one whose row-sorted pair
/// list is lexicographically smallest is returned.
pub fn hungarian_min_cost_matching(m: &CostMatrix) -> Result<Matching> {
    let all_rows: Vec<usize> = (0..m.rows).collect();
    let all_cols: Vec<usize> = (0..m.cols).collect();
    let need = m.rows.min(m.cols);
    let Some(target) = optimum(m, &all_rows, &all_cols) else {
        let unmatched_rows = saturating_pairs(m, &all_rows, &all_cols)
            .into_iter()
            .filter(|&(r, c)| m.get(r, c).is_none())
            .map(|(r, _)| r)
            .collect();
        return Err(Error::InfeasibleMatching { unmatched_rows });
    };

    let mut pairs = Vec::with_capacity(need);
    let mut used = vec![false; m.cols];
    let mut spent = 0i64;
    for r in 0..m.rows {
        if pairs.len() == need {
            break;
        }
        let still_needed = need - pairs.len() - 1;
        let rest_rows: Vec<usize> = (r + 1..m.rows).collect();
        for c in 0..m.cols {
            let Some(cost) = m.get(r, c).filter(|_| !used[c]) else {
                continue;
            };
            let rest_cols: Vec<usize> = (0..m.cols).filter(|&x| !used[x] && x != c).collect();
            let feasible = if still_needed == 0 {
                spent + cost == target
            } else if rest_rows.len().min(rest_cols.len()) != still_needed {
                false
            } else {
                optimum(m, &rest_rows, &rest_cols).is_some_and(|rest| spent + cost + rest == target)
            };
            if feasible {
                pairs.push((r, c));
                used[c] = true;
                spent += cost;
                break;
            }
        }
    }
    debug_assert_eq!(spent, target);
    Ok(Matching { pairs, total: target })
}

/// Station per agent (`None` is NULL) before slots are resolved.
pub type StationAssignment = Vec<Option<usize>>;

/// Each agent takes the station with the smallest estimated arrival time
/// (ties to the lowest station id). Equivalent in total cost to one
/// Hungarian solve with `M` copies of every station.
pub fn assign_h_inf(eta: &ArrivalEstimate) -> StationAssignment {
    eta.eta
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter_map(|(j, e)| e.map(|e| (e, j)))
                .min()
                .map(|(_, j)| j)
        })
        .collect()
}

/// Per-round instrumentation of [`assign_h_q`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HqReport {
    /// Agents given to each station, one entry per Hungarian round.
    pub rounds: Vec<Vec<usize>>,
}

/// Repeated Hungarian rounds with `q` copies of every station per round,
/// each round matching as many still unassigned agents as possible at
/// minimum total estimated arrival time. Agents that cannot reach any
/// station get NULL.
pub fn assign_h_q(eta: &ArrivalEstimate, q: usize) -> (StationAssignment, HqReport) {
    assert!(q >= 1, "Q must be at least 1");
    let mut out: StationAssignment = vec![None; eta.agents()];
    let mut report = HqReport::default();
    let stations = eta.eta.first().map_or(0, |r| r.len());
    if stations == 0 {
        return (out, report);
    }
    let mut remaining: Vec<usize> = (0..eta.agents())
        .filter(|&i| eta.eta[i].iter().any(|e| e.is_some()))
        .collect();
    let cols = stations * q;
    while !remaining.is_empty() {
        let mut matrix = CostMatrix::new(remaining.len(), cols);
        for (r, &i) in remaining.iter().enumerate() {
            for j in 0..stations {
                let cost = eta.eta[i][j].map(i64::from);
                for copy in 0..q {
                    matrix.set(r, j * q + copy, cost);
                }
            }
        }
        let all_rows: Vec<usize> = (0..remaining.len()).collect();
        let all_cols: Vec<usize> = (0..cols).collect();
        let mut per_station = vec![0usize; stations];
        let mut matched = vec![false; remaining.len()];
        for (r, c) in saturating_pairs(&matrix, &all_rows, &all_cols) {
            if matrix.get(r, c).is_some() {
                out[remaining[r]] = Some(c / q);
                per_station[c / q] += 1;
                matched[r] = true;
            }
        }
        if per_station.iter().all(|&n| n == 0) {
            break;
        }
        report.rounds.push(per_station);
        remaining = remaining
            .iter()
            .zip(&matched)
            .filter(|(_, &m)| !m)
            .map(|(&i, _)| i)
            .collect();
    }
    (out, report)
}

/// Number of Hungarian rounds H(Q) needs when every agent can reach every
/// station: `ceil(M / (N * Q))`.
pub fn expected_rounds(agents: usize, stations: usize, q: usize) -> usize {
    agents.div_ceil(stations * q)
}

/// Turns a station-only assignment into working slots: per station, agents
/// in order of estimated arrival (ties by index) take the earliest free slot
/// they can reach. Agents left without a slot become NULL.
pub fn slotify(stations: &StationAssignment, eta: &ArrivalEstimate, instance: &OneShotInstance) -> Assignment {
    let mut out = Assignment::unassigned(stations.len());
    for j in 0..instance.station_count() {
        let mut queue: Vec<(u32, usize)> = stations
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == Some(j))
            .filter_map(|(i, _)| eta.get(i, j).map(|e| (e, i)))
            .collect();
        queue.sort_unstable();
        let mut taken: Vec<bool> = (0..instance.slots)
            .map(|k| instance.is_preoccupied(SlotRef::new(j, k)))
            .collect();
        for (arrival, i) in queue {
            let Some(first) = instance.earliest_slot(arrival) else {
                continue;
            };
            if let Some(k) = (first..instance.slots).find(|&k| !taken[k as usize]) {
                taken[k as usize] = true;
                out.slots[i] = Some(SlotRef::new(j, k));
            }
        }
    }
    out
}
