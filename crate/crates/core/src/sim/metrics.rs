use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub job_id: u64,
    pub app_id: usize,
    pub arrival: f64,
    pub completion: f64,
    pub jct: f64,
}

/// Deterministic outcome of a run. Wall-clock measurements live in
/// [`Timing`] so that identical runs produce identical metrics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub jobs: Vec<JobRecord>,
    pub average_jct: f64,
    pub makespan: f64,
    /// Busy fraction of regular executors.
    pub regular_utilization: f64,
    /// Fraction of time LLM executors run at least one task.
    pub llm_utilization: f64,
    /// Occupied fraction of all LLM batch slots.
    pub llm_slot_utilization: f64,
    pub events: u64,
    pub invocations: u64,
}

/// Scheduler wall-clock overhead.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub invocations: u64,
    pub total_ns: u64,
    pub max_ns: u64,
}

impl Timing {
    pub fn record(&mut self, ns: u64) {
        self.invocations += 1;
        self.total_ns += ns;
        self.max_ns = self.max_ns.max(ns);
    }

    pub fn mean_ms(&self) -> f64 {
        if self.invocations == 0 {
            0.0
        } else {
            self.total_ns as f64 / self.invocations as f64 / 1e6
        }
    }
}

/// Counts of runtime invariant breaches; all zero in a correct run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violations {
    pub capacity: u64,
    pub dependency: u64,
    pub work_conservation: u64,
    pub jct_lower_bound: u64,
    /// Decision entries that were duplicated, stale or of the wrong kind.
    pub invalid_decision: u64,
}

impl Violations {
    pub fn total(&self) -> u64 {
        self.capacity + self.dependency + self.work_conservation + self.jct_lower_bound + self.invalid_decision
    }
}
