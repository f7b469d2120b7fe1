use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AppId, AppTemplate, JobInstance, JobTruth, RealizedSubgraph, StageId};

/// One job-level stage of a recorded job. Durations are normalized to
/// batch size 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    pub executed: bool,
    /// Mean per-task duration, 0 when the stage did not run.
    pub duration: f64,
    pub tasks: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicRecord {
    pub stage: StageId,
    pub nodes: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

/// Everything the profiler needs to know about one finished job.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub job_id: u64,
    pub app: String,
    pub arrival: f64,
    pub stages: Vec<StageRecord>,
    pub realized: Vec<DynamicRecord>,
    pub chain_len: Option<usize>,
}

impl TraceRecord {
    pub fn from_job(job: &JobInstance, app_name: &str) -> Self {
        let truth = job.truth();
        let stages = (0..truth.durations.len())
            .map(|i| StageRecord {
                stage: i,
                executed: truth.executed[i],
                duration: truth.stage_duration(i),
                tasks: truth.durations[i].clone(),
            })
            .collect();
        TraceRecord {
            job_id: job.view().job_id,
            app: app_name.into(),
            arrival: job.view().arrival,
            stages,
            realized: truth
                .realized
                .iter()
                .map(|(s, r)| DynamicRecord { stage: *s, nodes: r.nodes.clone(), edges: r.edges.clone() })
                .collect(),
            chain_len: truth.chain_len,
        }
    }

    pub fn truth(&self) -> JobTruth {
        JobTruth {
            durations: self.stages.iter().map(|s| s.tasks.clone()).collect(),
            executed: self.stages.iter().map(|s| s.executed).collect(),
            realized: self
                .realized
                .iter()
                .map(|d| (d.stage, RealizedSubgraph { nodes: d.nodes.clone(), edges: d.edges.clone() }))
                .collect(),
            chain_len: self.chain_len,
        }
    }

    /// Rebuilds a replayable job against `template`.
    pub fn to_job(&self, app: AppId, template: &AppTemplate) -> Result<JobInstance> {
        if self.app != template.name {
            return Err(Error::Config(alloc::format!(
                "trace for {} replayed against template {}",
                self.app, template.name
            )));
        }
        JobInstance::new(self.job_id, app, self.arrival, template, self.truth())
    }

    pub fn realized_for(&self, stage: StageId) -> Option<&DynamicRecord> {
        self.realized.iter().find(|d| d.stage == stage)
    }
}

/// One record per job, from the jobs' ground truth. `names` maps each
/// job's app index to its name.
pub fn collect_trace<'a>(jobs: impl IntoIterator<Item = &'a JobInstance>, names: &[String]) -> Vec<TraceRecord> {
    jobs.into_iter().map(|j| TraceRecord::from_job(j, &names[j.view().app.0])).collect()
}
