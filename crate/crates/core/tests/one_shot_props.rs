mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sortflow::domain::{is_collision_free, AgentSpec, Cell, GridMap, OneShotInstance, Path, Solution};
use sortflow::flow::{max_flow, min_cost_max_flow, FlowNetwork};
use sortflow::ito::{build_ito, estimate_arrivals, extract_assignment, solve_ito};
use sortflow::mapf::plan_prioritized;
use sortflow::pito::{build_pito, extract_solution, repair_edge_collisions, solve_pito};
use sortflow::slots::Penalty;

const OPEN: &str = "T...\n....\n...T\n";

/// Random instance on `map` with up to `max_agents` agents at distinct
/// cells, all starting at time 0 unless `staggered`.
fn instance_on(map: &str, max_agents: usize, staggered: bool) -> impl Strategy<Value = OneShotInstance> {
    let map = Arc::new(GridMap::parse(map).unwrap());
    let cells: Vec<Cell> = map.traversable_cells().collect();
    let n = cells.len();
    (
        Just(map),
        prop::sample::subsequence(cells, 1..=max_agents.min(n)).prop_shuffle(),
        prop::collection::vec(0u32..4, max_agents),
        1u32..3,
        2u32..4,
    )
        .prop_map(move |(map, starts, times, t, k)| {
            let agents = starts
                .into_iter()
                .enumerate()
                .map(|(id, start_cell)| AgentSpec {
                    id,
                    start_cell,
                    start_time: if staggered { times[id].min(t * (k - 1)) } else { 0 },
                })
                .collect();
            OneShotInstance::new(map, agents, t, k).unwrap()
        })
}

fn check_solution(instance: &OneShotInstance, s: &Solution) -> Result<(), TestCaseError> {
    prop_assert!(is_collision_free(&s.paths));
    prop_assert_eq!(s.assignment.occupied().len(), s.assignment.assigned_count());
    prop_assert_eq!(s.paths.len(), s.assignment.assigned_count());
    for (i, a) in instance.agents.iter().enumerate() {
        match s.assignment.get(i) {
            Some(slot) => {
                prop_assert!(!instance.is_preoccupied(slot));
                let p = s.path_of(a.id).unwrap();
                prop_assert!(p.validate(&instance.map, a, instance.map.target(slot.station), instance.processing_time).is_ok());
                prop_assert!(p.end() <= instance.slot_time(slot.slot));
            }
            None => prop_assert!(s.path_of(a.id).is_none()),
        }
    }
    Ok(())
}

/// `(cell, time)` occupancy counted over all paths.
fn occupancy(paths: &[Path]) -> BTreeMap<(Cell, u32), usize> {
    let mut out = BTreeMap::new();
    for p in paths {
        for (t, c) in p.entries() {
            *out.entry((c, t)).or_insert(0) += 1;
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn min_cost_flow_matches_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = common::random_network(&mut rng, 8, 8);
        let r = min_cost_max_flow(&net);
        prop_assert!(r.check(&net).is_ok());
        prop_assert_eq!((r.value, r.cost), common::brute_force_flow(&net));
        prop_assert_eq!(max_flow(&net).value, r.value);
    }

    #[test]
    fn edge_list_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = common::random_network(&mut rng, 12, 20);
        let mut buf = Vec::new();
        net.write_edge_list(&mut buf).unwrap();
        let back = FlowNetwork::parse_edge_list(std::str::from_utf8(&buf).unwrap()).unwrap();
        prop_assert_eq!(back.edges(), net.edges());
        prop_assert_eq!(min_cost_max_flow(&back).cost, min_cost_max_flow(&net).cost);
    }

    #[test]
    fn ito_penalty_keeps_flow_value(inst in instance_on(OPEN, 6, true)) {
        let eta = estimate_arrivals(&inst);
        let plain = {
            let (net, idx) = build_ito(&inst, &eta, None).unwrap();
            extract_assignment(&min_cost_max_flow(&net), &idx).unwrap()
        };
        for p in [Penalty::Linear, Penalty::Exponential] {
            let (net, idx) = build_ito(&inst, &eta, Some(p)).unwrap();
            let weighted = extract_assignment(&min_cost_max_flow(&net), &idx).unwrap();
            prop_assert_eq!(weighted.assigned_count(), plain.assigned_count());
            for (i, s) in weighted.slots.iter().enumerate() {
                if let Some(s) = s {
                    let e = eta.get(i, s.station).unwrap();
                    prop_assert!(e <= inst.slot_time(s.slot));
                }
            }
        }
        let expected = common::brute_force_ito(&eta.eta, inst.station_count(), inst.slots, inst.processing_time, &inst.preoccupied);
        prop_assert_eq!(solve_ito(&inst, None).unwrap().assignment.assigned_count(), expected);
    }

    #[test]
    fn ito_then_prioritized_planning_is_sound(inst in instance_on(OPEN, 6, true)) {
        let out = solve_ito(&inst, Some(Penalty::Linear)).unwrap();
        let s = plan_prioritized(&inst, &out.assignment).unwrap();
        check_solution(&inst, &s)?;
        for i in 0..inst.agents.len() {
            if let Some(slot) = s.assignment.get(i) {
                prop_assert_eq!(out.assignment.get(i), Some(slot));
            } else {
                prop_assert!(out.assignment.get(i).is_none() || s.demoted.contains(&i));
            }
        }
    }

    #[test]
    fn pito_is_sound_and_penalty_keeps_value(inst in instance_on(OPEN, 6, true)) {
        let plain = solve_pito(&inst, None).unwrap();
        let weighted = solve_pito(&inst, Some(Penalty::Linear)).unwrap();
        check_solution(&inst, &plain)?;
        check_solution(&inst, &weighted)?;
        prop_assert_eq!(plain.assignment.assigned_count(), weighted.assignment.assigned_count());
    }

    #[test]
    fn repair_preserves_occupancy(inst in instance_on("....\n.T..\n..T.\n....\n", 8, false)) {
        let (net, idx) = build_pito(&inst, None).unwrap();
        let raw = extract_solution(&min_cost_max_flow(&net), &idx, &inst).unwrap();
        let before = occupancy(&raw.paths);
        let mut ends: Vec<(Cell, u32)> = raw.paths.iter().map(|p| (p.last_cell(), p.end())).collect();
        let mut starts: Vec<(usize, Cell, u32)> = raw.paths.iter().map(|p| (p.agent, p.cells[0], p.start)).collect();
        let repaired = repair_edge_collisions(raw.paths).unwrap();
        prop_assert!(is_collision_free(&repaired));
        prop_assert_eq!(occupancy(&repaired), before);
        let mut ends2: Vec<(Cell, u32)> = repaired.iter().map(|p| (p.last_cell(), p.end())).collect();
        let mut starts2: Vec<(usize, Cell, u32)> = repaired.iter().map(|p| (p.agent, p.cells[0], p.start)).collect();
        ends.sort();
        ends2.sort();
        starts.sort();
        starts2.sort();
        prop_assert_eq!(ends, ends2);
        prop_assert_eq!(starts, starts2);
        for p in &repaired {
            prop_assert!(p.cells.windows(2).all(|w| w[0] == w[1] || inst.map.are_adjacent(w[0], w[1])));
        }
    }
}

#[test]
fn pito_matches_joint_search_on_fixed_seeds() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..20 {
        let inst = common::random_small_instance(&mut rng);
        let s = solve_pito(&inst, Some(Penalty::Linear)).unwrap();
        assert_eq!(s.assignment.assigned_count(), common::joint_search_optimum(&inst), "{inst:?}");
    }
}
