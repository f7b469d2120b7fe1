mod common;

use std::sync::OnceLock;

use common::Fixture;
use llmsched_core::model::{AppId, AppTemplate, DurationDistribution, Family, JobInstance, JobTruth, StageKind, StageTemplate};
use llmsched_core::profiler::{ApplicationProfile, CalibrationProfile, ProfileSet};
use llmsched_core::sched::{Policy, SchedulerConfig};
use llmsched_core::sim::{run, ClusterConfig};
use llmsched_core::workload::Preset;
use proptest::prelude::*;

fn fixture() -> &'static Fixture {
    static FX: OnceLock<Fixture> = OnceLock::new();
    FX.get_or_init(Fixture::new)
}

const POLICIES: [Policy; 6] = [Policy::Fcfs, Policy::Fair, Policy::Sjf, Policy::Srtf, Policy::Argus, Policy::LlmSched];

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn runs_hold_every_invariant(
        seed in 0u64..1_000_000,
        policy in 0usize..6,
        preset in 0usize..4,
        regular in 1usize..5,
        llm in 1usize..4,
        batch in 1usize..9,
        lambda in 0.2f64..3.0,
    ) {
        let fx = fixture();
        let cluster = ClusterConfig {
            num_regular_executors: regular,
            num_llm_executors: llm,
            max_batch_size: batch,
            calibration: fx.cluster.calibration.clone(),
        };
        let jobs = fx.jobs(Preset::ALL[preset], lambda, 25, seed);
        let cfg = SchedulerConfig { seed, ..SchedulerConfig::new(POLICIES[policy]) };
        let out = run(&cluster, &fx.templates, &fx.profiles, jobs.clone(), cfg).unwrap();
        prop_assert_eq!(out.violations.total(), 0, "{:?}", out.violations);
        prop_assert_eq!(out.metrics.jobs.len(), 25);
        for (r, j) in out.metrics.jobs.iter().zip(&out.jobs) {
            prop_assert!(j.view().is_done());
            prop_assert!(r.jct >= j.realized_critical_path().unwrap() - 1e-9);
            prop_assert!((r.completion - r.arrival - r.jct).abs() < 1e-12);
        }
        prop_assert!(out.metrics.regular_utilization <= 1.0 + 1e-9);
        prop_assert!(out.metrics.llm_slot_utilization <= out.metrics.llm_utilization + 1e-9);

        let again = run(&cluster, &fx.templates, &fx.profiles, jobs, cfg).unwrap();
        prop_assert_eq!(format!("{:?}", out.metrics), format!("{:?}", again.metrics));
    }
}

#[test]
fn a_lone_job_finishes_on_its_critical_path() {
    let fx = fixture();
    let cluster = ClusterConfig {
        num_regular_executors: 64,
        num_llm_executors: 64,
        max_batch_size: 1,
        calibration: CalibrationProfile::constant(20.0, 1).unwrap(),
    };
    for (a, t) in fx.templates.iter().enumerate() {
        let spec = llmsched_core::workload::WorkloadSpec { mix: vec![(AppId(a), 1.0)], lambda: 1.0, num_jobs: 8, seed: 3 };
        for job in llmsched_core::workload::generate_workload(&fx.catalog, &fx.templates, &spec).unwrap() {
            let out = run(&cluster, &fx.templates, &fx.profiles, vec![job], SchedulerConfig::new(Policy::LlmSched)).unwrap();
            let jct = out.metrics.jobs[0].jct;
            // candidate edges exist only once the dynamic stage is revealed
            let cp = out.jobs[0].realized_critical_path().unwrap();
            assert!((jct - cp).abs() < 1e-9, "{}: jct {jct} vs critical path {cp}", t.name);
        }
    }
}

fn one_stage_app() -> (Vec<AppTemplate>, ProfileSet) {
    let t = AppTemplate {
        name: "answer".into(),
        family: Family::Predefined,
        stages: vec![StageTemplate {
            id: 0,
            name: "answer".into(),
            kind: StageKind::Llm,
            num_tasks: 1,
            predecessors: vec![],
            dynamic: None,
            chain: None,
        }],
    };
    let profile = ApplicationProfile {
        app: "answer".into(),
        stage_dists: vec![Some(DurationDistribution::point(10.0))],
        dynamic: vec![],
        network: None,
        uncertainty_reducing: vec![false],
        mean_job_duration: 10.0,
    };
    let calibration = CalibrationProfile::new(vec![20.0, 30.0]).unwrap();
    (vec![t.clone()], ProfileSet { apps: vec![profile], calibration })
}

fn job(id: u64, arrival: f64, d: f64, t: &AppTemplate) -> JobInstance {
    let truth = JobTruth { durations: vec![vec![d]], executed: vec![true], realized: vec![], chain_len: None };
    JobInstance::new(id, AppId(0), arrival, t, truth).unwrap()
}

#[test]
fn batching_stretches_in_flight_tasks() {
    let (templates, profiles) = one_stage_app();
    let cluster = ClusterConfig {
        num_regular_executors: 1,
        num_llm_executors: 1,
        max_batch_size: 2,
        calibration: profiles.calibration.clone(),
    };
    let jobs = vec![job(0, 0.0, 10.0, &templates[0]), job(1, 5.0, 10.0, &templates[0])];
    let out = run(&cluster, &templates, &profiles, jobs, SchedulerConfig::new(Policy::Fcfs)).unwrap();
    // 5 s left of the first task stretch to 7.5 s at batch 2; the second
    // task has done 5 s of work by then and runs its last 5 s alone
    let done: Vec<f64> = out.metrics.jobs.iter().map(|j| j.completion).collect();
    assert!((done[0] - 12.5).abs() < 1e-9, "{done:?}");
    assert!((done[1] - 17.5).abs() < 1e-9, "{done:?}");
    assert_eq!(out.violations.total(), 0);
}

#[test]
fn full_batches_queue_further_tasks() {
    let (templates, profiles) = one_stage_app();
    let cluster = ClusterConfig {
        num_regular_executors: 1,
        num_llm_executors: 1,
        max_batch_size: 1,
        calibration: profiles.calibration.clone(),
    };
    let jobs = vec![job(0, 0.0, 4.0, &templates[0]), job(1, 1.0, 3.0, &templates[0])];
    let out = run(&cluster, &templates, &profiles, jobs, SchedulerConfig::new(Policy::Fcfs)).unwrap();
    let jct: Vec<f64> = out.metrics.jobs.iter().map(|j| j.jct).collect();
    assert_eq!(jct, vec![4.0, 6.0]);
}

#[test]
fn bad_inputs_are_rejected() {
    let (templates, profiles) = one_stage_app();
    let mut cluster = ClusterConfig {
        num_regular_executors: 1,
        num_llm_executors: 1,
        max_batch_size: 4,
        calibration: profiles.calibration.clone(),
    };
    let jobs = vec![job(0, 0.0, 1.0, &templates[0])];
    assert!(run(&cluster, &templates, &profiles, jobs.clone(), SchedulerConfig::new(Policy::Fcfs)).is_err());
    cluster.max_batch_size = 2;
    assert!(run(&cluster, &templates, &profiles, vec![], SchedulerConfig::new(Policy::Fcfs)).is_err());
    let bad = SchedulerConfig::llmsched(1.5, 0.2, 0);
    assert!(run(&cluster, &templates, &profiles, jobs, bad).is_err());
}
