//! Station assignment and path finding for grid-based sortation centers.
//!
//! Agents queue at sorting stations for parcels; each station serves one
//! agent per working slot of `T` time steps. The one-shot solvers assign
//! agents to working slots so that the number of unoccupied slots (the
//! total idle time) within a window of `K` slots is minimal:
//!
//! * [`ito`] builds a flow network from estimated arrival times and
//!   [`mapf`] plans collision-free paths for the resulting assignment;
//! * [`pito`] fuses a time-expanded path network with the slot network so
//!   one flow yields the assignment and the paths together;
//! * [`hungarian`] provides the assignment baselines.
//!
//! [`lifelong`] repeatedly solves one-shot instances in a rolling horizon
//! and [`report`] writes the resulting metrics.

pub mod domain;
pub mod error;
pub mod flow;
pub mod hungarian;
pub mod ito;
pub mod lifelong;
pub mod mapf;
pub mod pito;
pub mod report;
pub mod slots;

pub use error::{Error, Result};
