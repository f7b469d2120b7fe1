//! File formats, configuration and experiment plumbing around
//! `llmsched-core`.

pub mod config;
pub mod experiment;
pub mod io;

use std::time::Instant;

use llmsched_core::sim::Clock;

/// Monotonic wall clock for scheduler overhead.
pub struct WallClock(Instant);

impl Default for WallClock {
    fn default() -> Self {
        WallClock(Instant::now())
    }
}

impl Clock for WallClock {
    fn now_ns(&mut self) -> u64 {
        self.0.elapsed().as_nanos() as u64
    }
}
