#![allow(dead_code)]

use llmsched_core::bayesnet::StructureSearch;
use llmsched_core::model::{AppId, AppTemplate, JobInstance};
use llmsched_core::profiler::{CalibrationProfile, ProfileSet};
use llmsched_core::sched::{JobSnapshot, Snapshot};
use llmsched_core::sim::{ClusterConfig, Simulation};
use llmsched_core::workload::{collect_trace, default_catalog, generate_workload, Catalog, Preset, WorkloadSpec};

pub struct Fixture {
    pub catalog: Catalog,
    pub templates: Vec<AppTemplate>,
    pub profiles: ProfileSet,
    pub cluster: ClusterConfig,
}

impl Fixture {
    pub fn new() -> Self {
        let catalog = default_catalog();
        let templates = catalog.templates().unwrap();
        let names = catalog.names();
        let mut traces = Vec::new();
        for a in 0..catalog.apps.len() {
            let spec = WorkloadSpec { mix: vec![(AppId(a), 1.0)], lambda: 1.0, num_jobs: 150, seed: 1000 + a as u64 };
            traces.extend(collect_trace(&generate_workload(&catalog, &templates, &spec).unwrap(), &names));
        }
        let calibration = CalibrationProfile::linear(20.0, 2.5, 8).unwrap();
        let profiles =
            ProfileSet::train(&templates, &traces, calibration.clone(), &StructureSearch::default()).unwrap();
        let cluster = ClusterConfig {
            num_regular_executors: 4,
            num_llm_executors: 3,
            max_batch_size: 4,
            calibration,
        };
        Fixture { catalog, templates, profiles, cluster }
    }

    pub fn jobs(&self, preset: Preset, lambda: f64, n: usize, seed: u64) -> Vec<JobInstance> {
        let spec = WorkloadSpec { mix: preset.mix(&self.catalog), lambda, num_jobs: n, seed };
        generate_workload(&self.catalog, &self.templates, &spec).unwrap()
    }
}

/// Scheduler input for the current state of a paused simulation.
pub fn with_snapshot<R>(sim: &Simulation<'_>, f: impl FnOnce(&Snapshot<'_>) -> R, fx: &Fixture) -> R {
    let active = sim.active();
    let jobs: Vec<JobSnapshot<'_>> = active
        .iter()
        .map(|&j| JobSnapshot { view: sim.jobs()[j].view(), evidence: sim.evidence(j) })
        .collect();
    let snap = Snapshot {
        jobs: &jobs,
        templates: &fx.templates,
        profiles: &fx.profiles,
        batch: sim.batch_context(),
        now: sim.now(),
    };
    f(&snap)
}
