//! Uncertainty-aware scheduling for compound LLM applications.
//!
//! Jobs are DAGs of regular, LLM and dynamic stages whose durations and
//! shapes are only partially known when they arrive. This crate holds the
//! whole algorithmic side of the system and needs nothing beyond `alloc`:
//!
//! * [`model`]: application templates, duration distributions and job
//!   instances that keep the realized ground truth apart from what a
//!   scheduler is allowed to see.
//! * [`bayesnet`]: a small discrete Bayesian network engine (CPT fitting,
//!   BIC structure search, variable elimination) plus entropy and mutual
//!   information.
//! * [`profiler`]: per-application profiles built from traces, batch-size
//!   calibration and posterior remaining-duration estimates.
//! * [`uncertainty`]: the uncertainty reduction score of a stage.
//! * [`sched`]: the uncertainty-aware epsilon-greedy scheduler and the
//!   FCFS, Fair, SJF, SRTF and Argus baselines.
//! * [`sim`]: a deterministic discrete-event cluster simulator with batched
//!   LLM executors.
//! * [`workload`]: synthetic application families, Poisson job streams and
//!   trace records.
//!
//! File formats, configuration and the command line live in the
//! `llmsched-cli` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod bayesnet;
pub mod error;
pub mod model;
pub mod profiler;
pub mod sched;
pub mod sim;
pub mod uncertainty;
pub mod workload;

mod math;

pub use error::{Error, Result};
pub use model::{
    AppId, AppTemplate, DurationDistribution, DynamicStageSpec, Interval, JobInstance, JobView,
    StageId, StageKind, StageState, StageTemplate,
};
pub use profiler::{ApplicationProfile, CalibrationProfile, ProfileSet};
pub use sched::{Policy, ScheduleDecision, SchedulerConfig};
pub use sim::{ClusterConfig, RunMetrics, Simulation};
