//! Working-slot layer shared by the ITO and PITO networks: one chain of
//! slot vertices per station, unit edges to the sink, and the optional
//! idle-time penalty vertex.

use std::collections::VecDeque;

use crate::domain::{OneShotInstance, SlotRef};
use crate::error::{Error, Result};
use crate::flow::{EdgeId, FlowNetwork, FlowResult};

/// Cost of leaving slot `k` unoccupied, charged on the edge from the
/// penalty vertex to that slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Penalty {
    /// `p(k) = K - k`.
    Linear,
    /// `N^{-k}` scaled to integers as `N^{K-1-k}`. Saturates at `i64::MAX / 2^20`
    /// for very large `N` and `K`.
    Exponential,
}

impl Penalty {
    pub fn cost(self, slot: u32, slots: u32, stations: usize) -> i64 {
        match self {
            Penalty::Linear => (slots - slot) as i64,
            Penalty::Exponential => {
                const CAP: i64 = i64::MAX >> 20;
                let base = stations.max(1) as i64;
                let mut v: i64 = 1;
                for _ in 0..(slots - 1 - slot) {
                    v = v.saturating_mul(base).min(CAP);
                }
                v
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SlotLayer {
    stations: usize,
    slots: u32,
    /// Vertex of slot `(j, k)` at index `j * K + k`.
    pub slot_vertex: Vec<usize>,
    /// Edge `s_{j,k-1} -> s_{j,k}` stored at index `j * K + k` (none for `k = 0`).
    pub chain_edge: Vec<Option<EdgeId>>,
    /// Edge `s_{j,k} -> sink`; absent for preoccupied slots.
    pub sink_edge: Vec<Option<EdgeId>>,
    pub penalty_vertex: Option<usize>,
    pub penalty_edge: Vec<Option<EdgeId>>,
}

impl SlotLayer {
    /// Adds slot vertices, chains, sink edges and (if `penalty` is given) the
    /// penalty vertex to `net`.
    pub fn build(net: &mut FlowNetwork, instance: &OneShotInstance, penalty: Option<Penalty>) -> Self {
        let stations = instance.station_count();
        let slots = instance.slots;
        let count = stations * slots as usize;
        let slot_vertex: Vec<usize> = (0..count).map(|_| net.add_vertex()).collect();
        let mut chain_edge = vec![None; count];
        let mut sink_edge = vec![None; count];
        for j in 0..stations {
            for k in 0..slots {
                let idx = j * slots as usize + k as usize;
                if k > 0 {
                    chain_edge[idx] = Some(net.add_edge(slot_vertex[idx - 1], slot_vertex[idx], slots as i64, 0));
                }
                if !instance.is_preoccupied(SlotRef::new(j, k)) {
                    sink_edge[idx] = Some(net.add_edge(slot_vertex[idx], net.sink(), 1, 0));
                }
            }
        }
        let mut penalty_edge = vec![None; count];
        let penalty_vertex = penalty.map(|p| {
            let pv = net.add_vertex();
            net.add_edge(net.source(), pv, count as i64, 0);
            for j in 0..stations {
                for k in 0..slots {
                    let idx = j * slots as usize + k as usize;
                    if sink_edge[idx].is_some() {
                        penalty_edge[idx] = Some(net.add_edge(pv, slot_vertex[idx], 1, p.cost(k, slots, stations)));
                    }
                }
            }
            pv
        });
        SlotLayer {
            stations,
            slots,
            slot_vertex,
            chain_edge,
            sink_edge,
            penalty_vertex,
            penalty_edge,
        }
    }

    pub fn index(&self, slot: SlotRef) -> usize {
        slot.station * self.slots as usize + slot.slot as usize
    }

    pub fn vertex(&self, slot: SlotRef) -> usize {
        self.slot_vertex[self.index(slot)]
    }

    pub fn is_weighted(&self) -> bool {
        self.penalty_vertex.is_some()
    }

    /// Follows agent flow units through the slot chains.
    ///
    /// `entries[(j, k)]` lists agents whose unit enters the chain of station
    /// `j` at slot `k`, in priority order. Within a station, a slot whose
    /// sink edge carries flow goes to the longest-waiting agent unit; penalty
    /// units only take slots no agent unit can. Since units on a chain are
    /// interchangeable this is a valid decomposition of the flow and gives
    /// each agent the earliest slot it can hold.
    pub fn trace(&self, flow: &FlowResult, entries: &[Vec<usize>], agents: usize) -> Result<Vec<Option<SlotRef>>> {
        let f = |e: Option<EdgeId>| e.map_or(0, |e| flow.flow[e]);
        let mut out = vec![None; agents];
        for j in 0..self.stations {
            let mut waiting: VecDeque<usize> = VecDeque::new();
            let mut penalty_units: i64 = 0;
            for k in 0..self.slots {
                let idx = j * self.slots as usize + k as usize;
                waiting.extend(entries[idx].iter().copied());
                penalty_units += f(self.penalty_edge[idx]);
                let leaving = f(self.sink_edge[idx]);
                let forward = if k + 1 < self.slots { f(self.chain_edge[idx + 1]) } else { 0 };
                let present = waiting.len() as i64 + penalty_units;
                if present != leaving + forward {
                    return Err(Error::Internal(format!(
                        "slot chain of station {j} unbalanced at slot {k}: {present} units present, {leaving} + {forward} leave"
                    )));
                }
                if leaving == 1 {
                    match waiting.pop_front() {
                        Some(agent) => out[agent] = Some(SlotRef::new(j, k)),
                        None => penalty_units -= 1,
                    }
                }
            }
        }
        Ok(out)
    }
}
