use std::collections::BTreeSet;

use super::sim::{SimState, Status};
use super::{Algorithm, SimConfig};
use crate::domain::{AgentSpec, Assignment, OneShotInstance, SlotRef, Solution};
use crate::error::Result;
use crate::hungarian::{assign_h_inf, assign_h_q, slotify, HqReport};
use crate::ito::{estimate_arrivals, solve_ito, ArrivalEstimate};
use crate::mapf::plan_prioritized_seeded;
use crate::pito::solve_pito;

/// One-shot instance for the window `[t0, t0 + K*T)` in local time.
///
/// On-grid agents start where they are at local time 0. Delivering agents
/// are included if they are back no later than the last admission time of
/// the window. Queued agents are left out; their slots, and every slot
/// already taken inside the window, are marked preoccupied. Agent ids are
/// the simulator's agent indices.
pub fn build_stride_instance(state: &SimState, config: &SimConfig) -> Result<OneShotInstance> {
    let t0 = state.clock;
    let (t, k) = (config.processing_time, config.slots);
    let last = t * (k - 1);
    let mut agents = Vec::new();
    for (id, status) in state.agents.iter().enumerate() {
        match *status {
            Status::OnGrid { cell, .. } => agents.push(AgentSpec {
                id,
                start_cell: cell,
                start_time: 0,
            }),
            Status::Delivering { return_time, cell, .. } if return_time.saturating_sub(t0) <= last => agents.push(AgentSpec {
                id,
                start_cell: cell,
                start_time: return_time.saturating_sub(t0),
            }),
            _ => {}
        }
    }
    let first_slot = t0 / t;
    let preoccupied: BTreeSet<SlotRef> = state
        .committed
        .iter()
        .filter(|s| s.slot >= first_slot && s.slot < first_slot + k)
        .map(|s| SlotRef::new(s.station, s.slot - first_slot))
        .collect();
    OneShotInstance::new(config.map.clone(), agents, t, k)?.with_preoccupied(preoccupied)
}

/// Result of solving one stride.
#[derive(Debug, Clone)]
pub struct StrideSolution {
    pub solution: Solution,
    /// Slots read off the ITO network before path planning.
    pub ito_assignment: Option<Assignment>,
    pub eta: Option<ArrivalEstimate>,
    pub hq_rounds: Option<HqReport>,
}

/// Solves a stride instance with `algorithm`. `q` is only used by H(Q) and
/// `retry_seed` only by prioritized planning.
pub fn solve_stride(instance: &OneShotInstance, algorithm: Algorithm, q: usize, retry_seed: u64) -> Result<StrideSolution> {
    if instance.agents.is_empty() {
        return Ok(StrideSolution {
            solution: Solution::empty(instance),
            ito_assignment: None,
            eta: None,
            hq_rounds: None,
        });
    }
    match algorithm {
        Algorithm::Ito(penalty) => {
            let out = solve_ito(instance, penalty)?;
            let solution = plan_prioritized_seeded(instance, &out.assignment, retry_seed)?;
            Ok(StrideSolution {
                solution,
                ito_assignment: Some(out.assignment),
                eta: Some(out.eta),
                hq_rounds: None,
            })
        }
        Algorithm::Pito(penalty) => Ok(StrideSolution {
            solution: solve_pito(instance, penalty)?,
            ito_assignment: None,
            eta: None,
            hq_rounds: None,
        }),
        Algorithm::HInf | Algorithm::HQ | Algorithm::H1 => {
            let eta = estimate_arrivals(instance);
            let (stations, rounds) = match algorithm {
                Algorithm::HInf => (assign_h_inf(&eta), None),
                Algorithm::HQ => {
                    let (s, r) = assign_h_q(&eta, q);
                    (s, Some(r))
                }
                _ => {
                    let (s, r) = assign_h_q(&eta, 1);
                    (s, Some(r))
                }
            };
            let assignment = slotify(&stations, &eta, instance);
            let solution = plan_prioritized_seeded(instance, &assignment, retry_seed)?;
            Ok(StrideSolution {
                solution,
                ito_assignment: None,
                eta: Some(eta),
                hq_rounds: rounds,
            })
        }
    }
}
