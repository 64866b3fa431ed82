//! Maps, one-shot instances, paths, assignments and idle-time accounting.

mod collision;
mod grid;
mod instance;

pub use collision::{edge_collision_count, first_collision, first_edge_collision, is_collision_free, Collision};
pub use grid::{Cell, CellKind, GridMap};
pub use instance::{parse_agents, total_idle_time, AgentSpec, Assignment, OneShotInstance, Path, SlotRef, Solution, Time};
