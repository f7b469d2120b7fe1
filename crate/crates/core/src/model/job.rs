use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use serde::{Deserialize, Serialize};

use super::template::{AppId, AppTemplate, StageId, StageKind};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StageState {
    Blocked,
    Ready,
    Running,
    Done,
    Skipped,
}

impl StageState {
    pub fn is_finished(self) -> bool {
        matches!(self, StageState::Done | StageState::Skipped)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskState {
    Pending,
    Running,
    Done,
    Skipped,
}

/// Where a job-level stage comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StageOrigin {
    Template(StageId),
    Candidate { dynamic: StageId, index: usize },
}

#[derive(Clone, Debug)]
pub struct TaskView {
    pub state: TaskState,
    pub started: f64,
    /// Work completed so far, in seconds at batch size 1. Refreshed by the
    /// simulator before each scheduler invocation.
    pub progress: f64,
}

/// Scheduler-visible state of one job-level stage.
#[derive(Clone, Debug)]
pub struct StageView {
    pub origin: StageOrigin,
    pub kind: StageKind,
    pub preds: Vec<usize>,
    pub state: StageState,
    /// Candidate of a dynamic stage that has not been revealed yet, or was
    /// not selected.
    pub hidden: bool,
    pub tasks: Vec<TaskView>,
    pub launched: usize,
    pub finished: usize,
    /// Sum of completed task durations normalized to batch size 1.
    pub observed_total: f64,
}

impl StageView {
    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn unlaunched(&self) -> usize {
        self.tasks.len() - self.launched
    }

    /// Mean batch-1 duration of the tasks completed so far.
    pub fn observed_mean(&self) -> Option<f64> {
        (self.finished > 0).then(|| self.observed_total / self.finished as f64)
    }

    /// Ready, or running with tasks still waiting for an executor.
    pub fn is_schedulable(&self) -> bool {
        match self.state {
            StageState::Ready => true,
            StageState::Running => self.launched < self.tasks.len(),
            _ => false,
        }
    }

    pub fn template_id(&self) -> Option<StageId> {
        match self.origin {
            StageOrigin::Template(id) => Some(id),
            StageOrigin::Candidate { .. } => None,
        }
    }
}

/// The realized shape of one dynamic stage, as candidate indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizedSubgraph {
    pub nodes: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

/// Ground truth of a job, fixed at generation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobTruth {
    /// Per job-level stage, per task duration at batch size 1. Stages that
    /// never execute hold zeros.
    pub durations: Vec<Vec<f64>>,
    pub executed: Vec<bool>,
    /// One entry per dynamic stage of the template.
    pub realized: Vec<(StageId, RealizedSubgraph)>,
    pub chain_len: Option<usize>,
}

impl JobTruth {
    pub fn realized_for(&self, dynamic: StageId) -> Option<&RealizedSubgraph> {
        self.realized.iter().find(|(d, _)| *d == dynamic).map(|(_, r)| r)
    }

    /// Per-task mean duration of a stage (0 when it never runs).
    pub fn stage_duration(&self, stage: usize) -> f64 {
        let d = &self.durations[stage];
        if d.is_empty() || !self.executed[stage] {
            0.0
        } else {
            d.iter().sum::<f64>() / d.len() as f64
        }
    }
}

/// What schedulers see of a job.
#[derive(Clone, Debug)]
pub struct JobView {
    pub job_id: u64,
    pub app: AppId,
    pub arrival: f64,
    pub stages: Vec<StageView>,
    pub completion: Option<f64>,
}

impl JobView {
    pub fn new(job_id: u64, app: AppId, arrival: f64, template: &AppTemplate) -> Self {
        let mut stages = Vec::with_capacity(template.expanded_len());
        for s in &template.stages {
            let n = if s.kind.is_executable() { s.num_tasks } else { 0 };
            stages.push(StageView {
                origin: StageOrigin::Template(s.id),
                kind: s.kind,
                preds: s.predecessors.clone(),
                state: StageState::Blocked,
                hidden: false,
                tasks: fresh_tasks(n),
                launched: 0,
                finished: 0,
                observed_total: 0.0,
            });
        }
        for s in &template.stages {
            if let Some(spec) = &s.dynamic {
                for (index, c) in spec.candidates.iter().enumerate() {
                    stages.push(StageView {
                        origin: StageOrigin::Candidate { dynamic: s.id, index },
                        kind: c.kind,
                        preds: Vec::new(),
                        state: StageState::Blocked,
                        hidden: true,
                        tasks: fresh_tasks(c.num_tasks),
                        launched: 0,
                        finished: 0,
                        observed_total: 0.0,
                    });
                }
            }
        }
        JobView { job_id, app, arrival, stages, completion: None }
    }

    pub fn is_done(&self) -> bool {
        self.completion.is_some()
    }

    /// Revealed stages in dependency order; ties go to the lower index.
    pub fn topological_stages(&self) -> Result<Vec<usize>> {
        let n = self.stages.len();
        let mut indeg = vec![0usize; n];
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, s) in self.stages.iter().enumerate() {
            if s.hidden {
                continue;
            }
            for &p in &s.preds {
                if self.stages[p].hidden {
                    return Err(Error::Structural(alloc::format!(
                        "stage {i} depends on unrevealed stage {p}"
                    )));
                }
                indeg[i] += 1;
                succ[p].push(i);
            }
        }
        let mut heap: BinaryHeap<Reverse<usize>> = (0..n)
            .filter(|&i| !self.stages[i].hidden && indeg[i] == 0)
            .map(Reverse)
            .collect();
        let visible = self.stages.iter().filter(|s| !s.hidden).count();
        let mut order = Vec::with_capacity(visible);
        while let Some(Reverse(i)) = heap.pop() {
            order.push(i);
            for &j in &succ[i] {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    heap.push(Reverse(j));
                }
            }
        }
        if order.len() != visible {
            return Err(Error::Structural(alloc::format!("job {} has a cycle", self.job_id)));
        }
        Ok(order)
    }

    /// Stages whose dependencies are all satisfied and that have not started.
    pub fn ready_stages(&self) -> Vec<usize> {
        (0..self.stages.len()).filter(|&i| self.stages[i].state == StageState::Ready).collect()
    }

    /// Ready stages plus running stages that still have unlaunched tasks.
    pub fn schedulable_stages(&self) -> Vec<usize> {
        (0..self.stages.len()).filter(|&i| self.stages[i].is_schedulable()).collect()
    }

    /// Promotes blocked stages whose non-skipped predecessors are done.
    /// Dynamic placeholders are expanded, never made ready.
    pub fn refresh_ready(&mut self) -> Vec<usize> {
        let mut newly = Vec::new();
        for i in 0..self.stages.len() {
            let s = &self.stages[i];
            if s.hidden || s.state != StageState::Blocked || !s.kind.is_executable() {
                continue;
            }
            if s.preds.iter().all(|&p| self.stages[p].state.is_finished()) {
                self.stages[i].state = StageState::Ready;
                newly.push(i);
            }
        }
        newly
    }

    /// Replaces dynamic stage `dynamic` by its realized subgraph.
    ///
    /// Selected candidates depend on the planning stage and on realized
    /// edges; unselected ones are skipped; successors of the placeholder now
    /// wait for every realized stage.
    pub fn expand_dynamic(
        &mut self,
        template: &AppTemplate,
        dynamic: StageId,
        realized: &RealizedSubgraph,
    ) -> Result<()> {
        let st = template
            .stages
            .get(dynamic)
            .filter(|s| s.kind == StageKind::Dynamic)
            .ok_or_else(|| Error::Structural(alloc::format!("stage {dynamic} is not dynamic")))?;
        let spec = st.dynamic.as_ref().expect("validated template");
        if self.stages[dynamic].state.is_finished() {
            return Err(Error::Structural(alloc::format!("dynamic stage {dynamic} already expanded")));
        }
        check_realized(spec.candidates.len(), &spec.edges, realized)?;
        let planner = st.predecessors[0];
        let base = template.candidate_base(dynamic);
        for (index, _) in spec.candidates.iter().enumerate() {
            let s = &mut self.stages[base + index];
            if realized.nodes.contains(&index) {
                s.hidden = false;
                s.preds = vec![planner];
                s.preds.extend(
                    realized.edges.iter().filter(|&&(_, b)| b == index).map(|&(a, _)| base + a),
                );
            } else {
                s.state = StageState::Skipped;
                for t in &mut s.tasks {
                    t.state = TaskState::Skipped;
                }
            }
        }
        self.stages[dynamic].state = StageState::Skipped;
        if !realized.nodes.is_empty() {
            let members: Vec<usize> = realized.nodes.iter().map(|&i| base + i).collect();
            for s in self.stages.iter_mut() {
                if let Some(pos) = s.preds.iter().position(|&p| p == dynamic) {
                    s.preds.remove(pos);
                    s.preds.extend(members.iter().copied());
                }
            }
        }
        Ok(())
    }

    pub(crate) fn skip_stage(&mut self, stage: usize) {
        let s = &mut self.stages[stage];
        s.state = StageState::Skipped;
        for t in &mut s.tasks {
            t.state = TaskState::Skipped;
        }
    }

    pub(crate) fn start_task(&mut self, stage: usize, task: usize, now: f64) {
        let s = &mut self.stages[stage];
        debug_assert_eq!(s.tasks[task].state, TaskState::Pending);
        s.tasks[task] = TaskView { state: TaskState::Running, started: now, progress: 0.0 };
        s.launched += 1;
        s.state = StageState::Running;
    }

    /// Records a finished task; returns true when it was the stage's last.
    pub(crate) fn finish_task(&mut self, stage: usize, task: usize, observed: f64) -> bool {
        let s = &mut self.stages[stage];
        s.tasks[task].state = TaskState::Done;
        s.tasks[task].progress = observed;
        s.finished += 1;
        s.observed_total += observed;
        if s.finished == s.tasks.len() {
            s.state = StageState::Done;
            true
        } else {
            false
        }
    }

    pub fn all_finished(&self) -> bool {
        self.stages.iter().all(|s| s.state.is_finished())
    }
}

fn fresh_tasks(n: usize) -> Vec<TaskView> {
    vec![TaskView { state: TaskState::Pending, started: 0.0, progress: 0.0 }; n]
}

fn check_realized(m: usize, edges: &[(usize, usize)], r: &RealizedSubgraph) -> Result<()> {
    let mut seen = vec![false; m];
    for &n in &r.nodes {
        if n >= m || seen[n] {
            return Err(Error::Structural(alloc::format!("realized node {n} not a unique candidate")));
        }
        seen[n] = true;
    }
    for e in &r.edges {
        if !edges.contains(e) || !seen[e.0] || !seen[e.1] {
            return Err(Error::Structural(alloc::format!(
                "realized edge {:?} not among the candidate edges of selected nodes",
                e
            )));
        }
    }
    // Kahn over the realized nodes
    let mut indeg = vec![0usize; m];
    for &(_, b) in &r.edges {
        indeg[b] += 1;
    }
    let mut stack: Vec<usize> = r.nodes.iter().copied().filter(|&n| indeg[n] == 0).collect();
    let mut visited = 0;
    while let Some(n) = stack.pop() {
        visited += 1;
        for &(a, b) in &r.edges {
            if a == n {
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    stack.push(b);
                }
            }
        }
    }
    if visited != r.nodes.len() {
        return Err(Error::Structural("realized subgraph has a cycle".into()));
    }
    Ok(())
}

/// A job: hidden truth plus the revealed view. Only the simulator reads
/// the truth; schedulers get [`JobView`]s.
#[derive(Clone, Debug)]
pub struct JobInstance {
    view: JobView,
    truth: JobTruth,
}

impl JobInstance {
    pub fn new(
        job_id: u64,
        app: AppId,
        arrival: f64,
        template: &AppTemplate,
        truth: JobTruth,
    ) -> Result<Self> {
        template.validate()?;
        let view = JobView::new(job_id, app, arrival, template);
        let n = view.stages.len();
        if truth.durations.len() != n || truth.executed.len() != n {
            return Err(Error::Structural(alloc::format!(
                "job {job_id}: truth covers {} stages, template expands to {n}",
                truth.durations.len()
            )));
        }
        for (i, s) in view.stages.iter().enumerate() {
            let d = &truth.durations[i];
            if d.len() != s.tasks.len() {
                return Err(Error::Structural(alloc::format!(
                    "job {job_id}: stage {i} has {} task durations, expected {}",
                    d.len(),
                    s.tasks.len()
                )));
            }
            if truth.executed[i] && d.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                return Err(Error::Structural(alloc::format!(
                    "job {job_id}: executed stage {i} has a non-positive duration"
                )));
            }
            if !truth.executed[i] && d.iter().any(|&x| x != 0.0) {
                return Err(Error::Structural(alloc::format!(
                    "job {job_id}: skipped stage {i} must have zero durations"
                )));
            }
        }
        for st in &template.stages {
            if let Some(spec) = &st.dynamic {
                let r = truth.realized_for(st.id).ok_or_else(|| {
                    Error::Structural(alloc::format!("job {job_id}: no realization for stage {}", st.id))
                })?;
                check_realized(spec.candidates.len(), &spec.edges, r)?;
                let base = template.candidate_base(st.id);
                for i in 0..spec.candidates.len() {
                    if truth.executed[base + i] != r.nodes.contains(&i) {
                        return Err(Error::Structural(alloc::format!(
                            "job {job_id}: candidate {i} of stage {} executed flag disagrees with realization",
                            st.id
                        )));
                    }
                }
                if truth.executed[st.id] {
                    return Err(Error::Structural("dynamic placeholders never execute".into()));
                }
            }
        }
        Ok(JobInstance { view, truth })
    }

    pub fn view(&self) -> &JobView {
        &self.view
    }

    pub fn truth(&self) -> &JobTruth {
        &self.truth
    }

    pub(crate) fn view_mut(&mut self) -> &mut JobView {
        &mut self.view
    }

    /// Makes newly unblocked stages ready, instantly skipping those the
    /// truth says never run (padded chain iterations past the realized
    /// length). A skipped planning stage collapses its dynamic stage.
    /// Returns every stage skipped on the way.
    pub fn settle(&mut self, template: &AppTemplate) -> Result<Vec<usize>> {
        let mut skipped = Vec::new();
        loop {
            let newly = self.view.refresh_ready();
            let mut changed = false;
            for s in newly {
                if !self.truth.executed[s] {
                    self.view.skip_stage(s);
                    skipped.push(s);
                    changed = true;
                    if let Some(id) = self.view.stages[s].template_id() {
                        if let Some(d) = template.dynamic_successor(id) {
                            if !self.view.stages[d].state.is_finished() {
                                self.view.expand_dynamic(template, d, &RealizedSubgraph::default())?;
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        Ok(skipped)
    }

    /// Expands the dynamic successor of a just-finished planning stage with
    /// its realized subgraph.
    pub fn reveal_after(&mut self, template: &AppTemplate, stage: usize) -> Result<Option<StageId>> {
        let Some(id) = self.view.stages[stage].template_id() else {
            return Ok(None);
        };
        let Some(d) = template.dynamic_successor(id) else {
            return Ok(None);
        };
        let realized = self
            .truth
            .realized_for(d)
            .ok_or_else(|| Error::Structural(alloc::format!("no realization for stage {d}")))?
            .clone();
        self.view.expand_dynamic(template, d, &realized)?;
        Ok(Some(d))
    }

    /// Longest path of true batch-1 durations through the realized DAG,
    /// taking each stage's slowest task. Needs the view fully revealed.
    pub fn realized_critical_path(&self) -> Result<f64> {
        let order = self.view.topological_stages()?;
        let mut finish = vec![0.0f64; self.view.stages.len()];
        for i in order {
            let s = &self.view.stages[i];
            let start = s.preds.iter().map(|&p| finish[p]).fold(0.0, f64::max);
            let own = if self.truth.executed[i] {
                self.truth.durations[i].iter().copied().fold(0.0, f64::max)
            } else {
                0.0
            };
            finish[i] = start + own;
        }
        Ok(finish.into_iter().fold(0.0, f64::max))
    }
}
