//! The two-job motivating example: a task automation job whose tool is
//! chosen by its planner, and a two-step code generation job, sharing one
//! regular executor and one unbatched LLM executor.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;
use crate::model::{
    AppId, AppTemplate, CandidateStage, DurationDistribution, DynamicStageSpec, Family, Interval, JobInstance,
    JobTruth, RealizedSubgraph, StageKind, StageTemplate,
};
use crate::profiler::{ApplicationProfile, CalibrationProfile, DynamicProfile, ProfileSet};
use crate::sim::ClusterConfig;

pub struct Example {
    pub templates: Vec<AppTemplate>,
    pub profiles: ProfileSet,
    pub jobs: Vec<JobInstance>,
    pub cluster: ClusterConfig,
}

fn stage(id: usize, name: &str, kind: StageKind, preds: Vec<usize>) -> StageTemplate {
    StageTemplate {
        id,
        name: name.into(),
        kind,
        num_tasks: usize::from(kind.is_executable()),
        predecessors: preds,
        dynamic: None,
        chain: None,
    }
}

fn dist(edges: &[(f64, f64)], probs: &[f64]) -> DurationDistribution {
    DurationDistribution::new(edges.iter().map(|&(a, b)| Interval::new(a, b)).collect(), probs.to_vec())
        .expect("valid example distribution")
}

/// Job 1: planner (LLM, 2 s) then one realized tool (regular, 1 s).
/// Job 2: two sequential LLM stages of 2 s and 3 s. Both arrive at 0.
/// Historical mean durations are 15 s and 9 s, so shortest-job-first runs
/// job 2 first.
pub fn two_job_example() -> Result<Example> {
    let tool = CandidateStage { name: "tool".into(), kind: StageKind::Regular, num_tasks: 1 };
    let spec = DynamicStageSpec {
        candidates: vec![tool],
        edges: vec![],
        node_probs: vec![0.5],
        edge_probs: vec![],
        prior_range: 2.0,
    };
    let mut plan = stage(1, "plan", StageKind::Dynamic, vec![0]);
    plan.dynamic = Some(spec.clone());
    let ta = AppTemplate {
        name: "task-automation".into(),
        family: Family::Planning,
        stages: vec![stage(0, "TA-1", StageKind::Llm, vec![]), plan],
    };
    let cg = AppTemplate {
        name: "code-generation".into(),
        family: Family::Chain,
        stages: vec![stage(0, "CG-1", StageKind::Llm, vec![]), stage(1, "CG-2", StageKind::Llm, vec![0])],
    };
    ta.validate()?;
    cg.validate()?;

    let ta_profile = ApplicationProfile {
        app: ta.name.clone(),
        stage_dists: vec![Some(dist(&[(1.0, 3.0), (3.0, 25.0)], &[0.5, 0.5])), Some(dist(&[(0.0, 0.0), (0.5, 1.5)], &[0.5, 0.5]))],
        dynamic: vec![DynamicProfile { stage: 1, spec, candidate_dists: vec![dist(&[(0.5, 1.5)], &[1.0])] }],
        network: None,
        uncertainty_reducing: vec![false, false],
        mean_job_duration: 15.0,
    };
    let cg_profile = ApplicationProfile {
        app: cg.name.clone(),
        stage_dists: vec![Some(dist(&[(1.0, 3.0)], &[1.0])), Some(dist(&[(2.0, 4.0)], &[1.0]))],
        dynamic: vec![],
        network: None,
        uncertainty_reducing: vec![false, false],
        mean_job_duration: 9.0,
    };
    let calibration = CalibrationProfile::new(vec![20.0])?;
    let profiles = ProfileSet { apps: vec![ta_profile, cg_profile], calibration: calibration.clone() };

    let job1 = JobInstance::new(
        0,
        AppId(0),
        0.0,
        &ta,
        JobTruth {
            durations: vec![vec![2.0], vec![], vec![1.0]],
            executed: vec![true, false, true],
            realized: vec![(1, RealizedSubgraph { nodes: vec![0], edges: vec![] })],
            chain_len: None,
        },
    )?;
    let job2 = JobInstance::new(
        1,
        AppId(1),
        0.0,
        &cg,
        JobTruth { durations: vec![vec![2.0], vec![3.0]], executed: vec![true, true], realized: vec![], chain_len: None },
    )?;
    let cluster = ClusterConfig { num_regular_executors: 1, num_llm_executors: 1, max_batch_size: 1, calibration };
    Ok(Example { templates: vec![ta, cg], profiles, jobs: vec![job1, job2], cluster })
}
