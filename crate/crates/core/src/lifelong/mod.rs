//! Rolling-horizon simulation: a one-shot instance is solved every `W`
//! steps, agents follow their plans, get admitted at their slots, deliver
//! their parcels for `kappa` steps and come back at a random bin.

mod sim;
mod stride;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::domain::{GridMap, Time};
use crate::error::{Error, Result};
use crate::slots::Penalty;

pub use sim::{run, run_with_observer, Event, EventKind, Metrics, Plan, SimResult, SimState, Status, StrideReport};
pub use stride::{build_stride_instance, solve_stride, StrideSolution};

/// Solver used for every stride.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Flow over estimated arrival times, then prioritized planning.
    Ito(Option<Penalty>),
    /// Time-expanded flow giving slots and paths together.
    Pito(Option<Penalty>),
    /// Nearest station per agent.
    HInf,
    /// Repeated Hungarian rounds with `Q` copies per station.
    HQ,
    /// Repeated one-to-one Hungarian rounds.
    H1,
}

impl Algorithm {
    pub const ITO_L: Algorithm = Algorithm::Ito(Some(Penalty::Linear));
    pub const PITO_L: Algorithm = Algorithm::Pito(Some(Penalty::Linear));

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ito(None) => "ito",
            Algorithm::Ito(Some(Penalty::Linear)) => "ito-l",
            Algorithm::Ito(Some(Penalty::Exponential)) => "ito-exp",
            Algorithm::Pito(None) => "pito",
            Algorithm::Pito(Some(Penalty::Linear)) => "pito-l",
            Algorithm::Pito(Some(Penalty::Exponential)) => "pito-exp",
            Algorithm::HInf => "h-inf-l",
            Algorithm::HQ => "h-q-l",
            Algorithm::H1 => "h-1-l",
        }
    }

    pub fn uses_q(self) -> bool {
        self == Algorithm::HQ
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Ok(match s.as_str() {
            "ito" => Algorithm::Ito(None),
            "ito-l" => Algorithm::ITO_L,
            "ito-exp" => Algorithm::Ito(Some(Penalty::Exponential)),
            "pito" => Algorithm::Pito(None),
            "pito-l" => Algorithm::PITO_L,
            "pito-exp" => Algorithm::Pito(Some(Penalty::Exponential)),
            "h-inf" | "h-inf-l" => Algorithm::HInf,
            "h-q" | "h-q-l" => Algorithm::HQ,
            "h-1" | "h-1-l" => Algorithm::H1,
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "unknown algorithm '{s}' (expected ito, ito-l, pito, pito-l, h-inf-l, h-q-l or h-1-l)"
                )))
            }
        })
    }
}

/// `Q = ceil(M / N) + 5`.
pub fn default_q(agents: usize, stations: usize) -> usize {
    agents.div_ceil(stations.max(1)) + 5
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub map: Arc<GridMap>,
    pub agents: usize,
    pub algorithm: Algorithm,
    /// Stride `W` between solves.
    pub stride: Time,
    pub horizon: Time,
    pub processing_time: Time,
    pub slots: u32,
    /// Delivery time between admission and respawn.
    pub kappa: Time,
    /// H(Q) copies per station; defaults to [`default_q`].
    pub q: Option<usize>,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        let (t, k, w) = (self.processing_time, self.slots, self.stride);
        if t == 0 || k == 0 || w == 0 {
            return bad("T, K and W must all be >= 1".into());
        }
        if self.map.station_count() == 0 {
            return bad("map has no stations".into());
        }
        if self.agents > 0 && self.map.bins().is_empty() {
            return bad("map has no bin cells to spawn agents on".into());
        }
        if w % t != 0 {
            return bad(format!("stride W={w} must be a multiple of T={t}"));
        }
        if w > t * k {
            return bad(format!("stride W={w} exceeds the window K*T={}", t * k));
        }
        if self.horizon < w || !self.horizon.is_multiple_of(w) {
            return bad(format!("horizon {} must be a positive multiple of W={w}", self.horizon));
        }
        if self.q == Some(0) {
            return bad("Q must be >= 1".into());
        }
        Ok(())
    }

    pub fn effective_q(&self) -> usize {
        self.q.unwrap_or_else(|| default_q(self.agents, self.map.station_count()))
    }
}
