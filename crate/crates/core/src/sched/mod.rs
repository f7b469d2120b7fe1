//! Scheduling policies. Each invocation turns a snapshot of the active
//! jobs into ordered preference lists of pending tasks.

mod baselines;
mod llmsched;

pub use llmsched::non_overlapping_sets;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bayesnet::Evidence;
use crate::error::{Error, Result};
use crate::model::{AppTemplate, JobView, StageKind, TaskState};
use crate::profiler::{BatchContext, EstimateMode, InferenceCache, ProfileSet};
use crate::uncertainty::UncertaintyScore;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaskRef {
    pub job: u64,
    pub stage: usize,
    pub task: usize,
}

/// Preference lists for regular executors and LLM batch slots.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleDecision {
    pub regular: Vec<TaskRef>,
    pub llm: Vec<TaskRef>,
}

impl ScheduleDecision {
    pub fn len(&self) -> usize {
        self.regular.len() + self.llm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Fcfs,
    Fair,
    Sjf,
    Srtf,
    Argus,
    #[serde(rename = "llmsched")]
    LlmSched,
}

impl Policy {
    pub const ALL: [Policy; 6] = [Policy::Fcfs, Policy::Fair, Policy::Sjf, Policy::Srtf, Policy::Argus, Policy::LlmSched];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Fcfs => "fcfs",
            Policy::Fair => "fair",
            Policy::Sjf => "sjf",
            Policy::Srtf => "srtf",
            Policy::Argus => "argus",
            Policy::LlmSched => "llmsched",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(alloc::format!("unknown scheduler {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchedulerConfig {
    pub policy: Policy,
    /// Exploration probability.
    pub epsilon: f64,
    /// Fraction of a stage's tasks launched when exploring it.
    pub ratio: f64,
    pub seed: u64,
    /// Source of duration estimates for SRTF and LLMSched.
    #[serde(skip)]
    pub mode: EstimateMode,
}

impl SchedulerConfig {
    pub fn new(policy: Policy) -> Self {
        SchedulerConfig { policy, epsilon: 0.2, ratio: 0.2, seed: 0, mode: EstimateMode::Posterior }
    }

    pub fn llmsched(epsilon: f64, ratio: f64, seed: u64) -> Self {
        SchedulerConfig { epsilon, ratio, seed, ..Self::new(Policy::LlmSched) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Config(alloc::format!("epsilon {} outside [0, 1]", self.epsilon)));
        }
        if !(self.ratio > 0.0 && self.ratio <= 1.0) {
            return Err(Error::Config(alloc::format!("ratio {} outside (0, 1]", self.ratio)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct JobSnapshot<'a> {
    pub view: &'a JobView,
    pub evidence: &'a Evidence,
}

/// Everything a policy may look at.
#[derive(Clone, Copy, Debug)]
pub struct Snapshot<'a> {
    pub jobs: &'a [JobSnapshot<'a>],
    pub templates: &'a [AppTemplate],
    pub profiles: &'a ProfileSet,
    pub batch: BatchContext,
    pub now: f64,
}

impl<'a> Snapshot<'a> {
    fn template(&self, job: &JobView) -> Result<&'a AppTemplate> {
        self.templates
            .get(job.app.0)
            .ok_or_else(|| Error::Config(alloc::format!("no template for application {}", job.app.0)))
    }

    fn profile(&self, job: &JobView) -> Result<&'a crate::profiler::ApplicationProfile> {
        self.profiles
            .get(job.app)
            .ok_or_else(|| Error::Config(alloc::format!("no profile for application {}", job.app.0)))
    }
}

/// One scored stage, recorded when score logging is on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub time: f64,
    pub job: u64,
    pub app: String,
    pub score: UncertaintyScore,
    pub remaining: f64,
}

pub struct Scheduler {
    config: SchedulerConfig,
    rng: ChaCha8Rng,
    cache: InferenceCache,
    scores: Option<Vec<ScoreRow>>,
}

impl Scheduler {
    pub fn new(config: SchedulerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Scheduler {
            config,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            cache: InferenceCache::new(),
            scores: None,
        })
    }

    pub fn config(&self) -> &SchedulerConfig {
        &self.config
    }

    /// Starts recording every computed uncertainty score.
    pub fn log_scores(&mut self) {
        self.scores.get_or_insert_with(Vec::new);
    }

    pub fn take_scores(&mut self) -> Vec<ScoreRow> {
        self.scores.as_mut().map(core::mem::take).unwrap_or_default()
    }

    pub fn cache(&self) -> &InferenceCache {
        &self.cache
    }

    pub fn schedule(&mut self, snap: &Snapshot<'_>) -> Result<ScheduleDecision> {
        match self.config.policy {
            Policy::Fcfs => baselines::fcfs(snap),
            Policy::Fair => baselines::fair(snap),
            Policy::Sjf => baselines::sjf(snap),
            Policy::Argus => baselines::argus(snap),
            Policy::Srtf => {
                let est = llmsched::estimates(snap, self.config.mode, &mut self.cache)?;
                let mut b = DecisionBuilder::default();
                for (j, s) in llmsched::srtf_order(snap, &est)? {
                    b.push(snap.jobs[j].view, s, None);
                }
                Ok(b.finish())
            }
            Policy::LlmSched => llmsched::schedule(
                snap,
                &self.config,
                &mut self.rng,
                &mut self.cache,
                self.scores.as_mut(),
            ),
        }
    }
}

/// Accumulates pending tasks without repeating any.
#[derive(Default)]
pub(crate) struct DecisionBuilder {
    out: ScheduleDecision,
    seen: BTreeSet<TaskRef>,
}

impl DecisionBuilder {
    /// Appends up to `limit` pending tasks of a stage, lowest index first.
    pub(crate) fn push(&mut self, job: &JobView, stage: usize, limit: Option<usize>) {
        let s = &job.stages[stage];
        let list = match s.kind {
            StageKind::Llm => &mut self.out.llm,
            StageKind::Regular => &mut self.out.regular,
            StageKind::Dynamic => return,
        };
        let mut taken = 0;
        for (task, t) in s.tasks.iter().enumerate() {
            if limit.is_some_and(|l| taken >= l) {
                break;
            }
            if t.state != TaskState::Pending {
                continue;
            }
            let r = TaskRef { job: job.job_id, stage, task };
            if self.seen.insert(r) {
                list.push(r);
                taken += 1;
            }
        }
    }

    pub(crate) fn finish(self) -> ScheduleDecision {
        self.out
    }
}

/// Picks an LLM executor with a free batch slot: the one running the
/// fewest tasks, lowest id on ties. `None` when every batch is full.
pub fn assign_llm_task(loads: &[usize], max_batch: usize) -> Option<usize> {
    loads
        .iter()
        .enumerate()
        .filter(|(_, &l)| l < max_batch)
        .min_by_key(|&(i, &l)| (l, i))
        .map(|(i, _)| i)
}
