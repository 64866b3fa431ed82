//! Idle-time optimisation network over estimated arrival times.
//!
//! Each agent gets one unit edge per station, into the earliest working slot
//! it can reach according to its arrival estimate. Slot chains let the unit
//! drift to later slots of the same station; each slot passes at most one
//! unit to the sink. A maximum flow therefore occupies as many slots as any
//! assignment consistent with the estimates.

use crate::domain::{Assignment, OneShotInstance, SlotRef, Time};
use crate::error::{Error, Result};
use crate::flow::{min_cost_max_flow, EdgeId, FlowNetwork, FlowResult};
use crate::slots::{Penalty, SlotLayer};

/// `eta[i][j]`: earliest time agent `i` can be on the target of station `j`
/// ignoring other agents; `None` if unreachable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrivalEstimate {
    pub eta: Vec<Vec<Option<Time>>>,
}

impl ArrivalEstimate {
    pub fn get(&self, agent: usize, station: usize) -> Option<Time> {
        self.eta[agent][station]
    }

    pub fn agents(&self) -> usize {
        self.eta.len()
    }
}

/// Start time plus BFS distance to every station target (one backward BFS
/// per station).
pub fn estimate_arrivals(instance: &OneShotInstance) -> ArrivalEstimate {
    let tables = instance.map.station_distances();
    let eta = instance
        .agents
        .iter()
        .map(|a| {
            tables
                .iter()
                .map(|d| d[a.start_cell.index()].map(|d| a.start_time + d))
                .collect()
        })
        .collect();
    ArrivalEstimate { eta }
}

#[derive(Debug, Clone)]
pub struct ItoNetworkIndex {
    pub agent_vertex: Vec<usize>,
    /// Per agent: `(edge, slot)` for each agent-to-slot edge.
    pub agent_edges: Vec<Vec<(EdgeId, SlotRef)>>,
    pub slots: SlotLayer,
}

impl ItoNetworkIndex {
    pub fn penalty_vertex(&self) -> Option<usize> {
        self.slots.penalty_vertex
    }

    pub fn slot_vertex(&self, slot: SlotRef) -> usize {
        self.slots.vertex(slot)
    }
}

/// Builds the (weighted if `penalty` is given) network. Agents without any
/// reachable slot get no source edge.
pub fn build_ito(
    instance: &OneShotInstance,
    eta: &ArrivalEstimate,
    penalty: Option<Penalty>,
) -> Result<(FlowNetwork, ItoNetworkIndex)> {
    if eta.agents() != instance.agents.len() || eta.eta.iter().any(|r| r.len() != instance.station_count()) {
        return Err(Error::InvalidInstance("arrival estimate does not match instance".into()));
    }
    let m = instance.agents.len();
    let mut net = FlowNetwork::new(2, 0, 1)?;
    let agent_vertex: Vec<usize> = (0..m).map(|_| net.add_vertex()).collect();
    let slots = SlotLayer::build(&mut net, instance, penalty);
    let mut agent_edges = vec![Vec::new(); m];
    for (i, row) in eta.eta.iter().enumerate() {
        let targets: Vec<SlotRef> = row
            .iter()
            .enumerate()
            .filter_map(|(j, e)| e.and_then(|t| instance.earliest_slot(t)).map(|k| SlotRef::new(j, k)))
            .collect();
        if targets.is_empty() {
            continue;
        }
        net.add_edge(net.source(), agent_vertex[i], 1, 0);
        for s in targets {
            let e = net.add_edge(agent_vertex[i], slots.vertex(s), 1, 0);
            agent_edges[i].push((e, s));
        }
    }
    Ok((
        net,
        ItoNetworkIndex {
            agent_vertex,
            agent_edges,
            slots,
        },
    ))
}

/// Reads the slot of every agent off a solved ITO network. Agents carrying
/// no flow get NULL; penalty units are skipped.
pub fn extract_assignment(flow: &FlowResult, index: &ItoNetworkIndex) -> Result<Assignment> {
    let m = index.agent_vertex.len();
    let mut entries = vec![Vec::new(); index.slots.slot_vertex.len()];
    for (i, edges) in index.agent_edges.iter().enumerate() {
        let used: Vec<SlotRef> = edges.iter().filter(|(e, _)| flow.flow[*e] > 0).map(|&(_, s)| s).collect();
        match used[..] {
            [] => {}
            [s] => entries[index.slots.index(s)].push(i),
            _ => return Err(Error::Internal(format!("agent {i} sends flow to several stations"))),
        }
    }
    Ok(Assignment {
        slots: index.slots.trace(flow, &entries, m)?,
    })
}

#[derive(Debug, Clone)]
pub struct ItoOutcome {
    pub eta: ArrivalEstimate,
    pub assignment: Assignment,
}

/// Estimate arrivals, build, solve and extract in one call.
pub fn solve_ito(instance: &OneShotInstance, penalty: Option<Penalty>) -> Result<ItoOutcome> {
    let eta = estimate_arrivals(instance);
    let (net, index) = build_ito(instance, &eta, penalty)?;
    let flow = min_cost_max_flow(&net);
    let assignment = extract_assignment(&flow, &index)?;
    Ok(ItoOutcome { eta, assignment })
}
