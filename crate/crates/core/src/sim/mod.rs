//! Discrete-event cluster simulator.

mod executor;
mod metrics;

pub use executor::{rescale_remaining, LlmExecutor, LlmSlot};
pub use metrics::{JobRecord, RunMetrics, Timing, Violations};

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use serde::{Deserialize, Serialize};

use crate::bayesnet::Evidence;
use crate::error::{Error, Result};
use crate::model::{AppTemplate, JobInstance, StageKind, TaskState};
use crate::profiler::{update_evidence, BatchContext, CalibrationProfile, ProfileSet};
use crate::sched::{assign_llm_task, JobSnapshot, ScheduleDecision, Scheduler, SchedulerConfig, ScoreRow, Snapshot, TaskRef};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub num_regular_executors: usize,
    pub num_llm_executors: usize,
    pub max_batch_size: usize,
    pub calibration: CalibrationProfile,
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_regular_executors == 0 || self.num_llm_executors == 0 || self.max_batch_size == 0 {
            return Err(Error::Config("executor counts and batch size must be at least 1".into()));
        }
        if self.calibration.max_batch() < self.max_batch_size {
            return Err(Error::Config(alloc::format!(
                "calibration covers batches up to {}, cluster allows {}",
                self.calibration.max_batch(),
                self.max_batch_size
            )));
        }
        Ok(())
    }
}

/// Source of wall-clock time for overhead measurement.
pub trait Clock {
    fn now_ns(&mut self) -> u64;
}

/// Reports zero elapsed time.
#[derive(Clone, Copy, Debug, Default)]
pub struct NullClock;

impl Clock for NullClock {
    fn now_ns(&mut self) -> u64 {
        0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Exec {
    Regular(usize),
    Llm(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Payload {
    Completion { task: TaskRef, exec: Exec, version: u64 },
    Arrival(usize),
    Epoch,
}

impl Payload {
    fn priority(&self) -> u8 {
        match self {
            Payload::Completion { .. } => 0,
            Payload::Arrival(_) => 1,
            Payload::Epoch => 2,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Event {
    time: f64,
    seq: u64,
    payload: Payload,
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.payload.priority().cmp(&other.payload.priority()))
            .then(self.seq.cmp(&other.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

/// Everything a finished run produced.
pub struct RunOutcome {
    pub metrics: RunMetrics,
    pub timing: Timing,
    pub violations: Violations,
    /// Final job states, truth included, in workload order.
    pub jobs: Vec<JobInstance>,
    pub scores: Vec<ScoreRow>,
}

/// One simulation over a fixed workload.
pub struct Simulation<'a> {
    cluster: &'a ClusterConfig,
    templates: &'a [AppTemplate],
    profiles: &'a ProfileSet,
    jobs: Vec<JobInstance>,
    evidence: Vec<Evidence>,
    index: BTreeMap<u64, usize>,
    active: BTreeSet<usize>,
    regular: Vec<Option<(TaskRef, f64)>>,
    llm: Vec<LlmExecutor>,
    events: BinaryHeap<Reverse<Event>>,
    seq: u64,
    epoch_at: Option<f64>,
    now: f64,
    scheduler: Scheduler,
    clock: Box<dyn Clock>,
    timing: Timing,
    violations: Violations,
    processed: u64,
    regular_busy: f64,
    llm_busy: f64,
    slot_busy: f64,
}

impl<'a> Simulation<'a> {
    pub fn new(
        cluster: &'a ClusterConfig,
        templates: &'a [AppTemplate],
        profiles: &'a ProfileSet,
        jobs: Vec<JobInstance>,
        config: SchedulerConfig,
    ) -> Result<Self> {
        cluster.validate()?;
        if jobs.is_empty() {
            return Err(Error::Config("empty workload".into()));
        }
        let mut index = BTreeMap::new();
        for (i, j) in jobs.iter().enumerate() {
            let app = j.view().app;
            let t = templates
                .get(app.0)
                .ok_or_else(|| Error::Config(alloc::format!("no template for application {}", app.0)))?;
            let p = profiles
                .get(app)
                .ok_or_else(|| Error::Config(alloc::format!("no profile for application {}", t.name)))?;
            if p.stage_dists.len() != t.stages.len() {
                return Err(Error::Config(alloc::format!("profile of {} does not match its template", t.name)));
            }
            if index.insert(j.view().job_id, i).is_some() {
                return Err(Error::Config(alloc::format!("duplicate job id {}", j.view().job_id)));
            }
        }
        let n = jobs.len();
        let mut sim = Simulation {
            cluster,
            templates,
            profiles,
            jobs,
            evidence: vec![Evidence::new(); n],
            index,
            active: BTreeSet::new(),
            regular: vec![None; cluster.num_regular_executors],
            llm: vec![LlmExecutor::default(); cluster.num_llm_executors],
            events: BinaryHeap::new(),
            seq: 0,
            epoch_at: None,
            now: 0.0,
            scheduler: Scheduler::new(config)?,
            clock: Box::new(NullClock),
            timing: Timing::default(),
            violations: Violations::default(),
            processed: 0,
            regular_busy: 0.0,
            llm_busy: 0.0,
            slot_busy: 0.0,
        };
        for i in 0..n {
            let t = sim.jobs[i].view().arrival;
            sim.push(t, Payload::Arrival(i));
        }
        Ok(sim)
    }

    pub fn with_clock(mut self, clock: Box<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn log_scores(mut self) -> Self {
        self.scheduler.log_scores();
        self
    }

    fn push(&mut self, time: f64, payload: Payload) -> u64 {
        self.seq += 1;
        self.events.push(Reverse(Event { time, seq: self.seq, payload }));
        self.seq
    }

    fn request_epoch(&mut self) {
        if self.epoch_at != Some(self.now) {
            self.epoch_at = Some(self.now);
            self.push(self.now, Payload::Epoch);
        }
    }

    pub fn run(mut self) -> Result<RunOutcome> {
        while self.step()? {}
        if let Some(j) = self.jobs.iter().find(|j| !j.view().is_done()) {
            return Err(Error::Structural(alloc::format!("job {} never finished", j.view().job_id)));
        }
        Ok(self.finish())
    }

    /// Processes the next event; false once none is left.
    pub fn step(&mut self) -> Result<bool> {
        let Some(Reverse(ev)) = self.events.pop() else {
            return Ok(false);
        };
        self.now = ev.time;
        match ev.payload {
            Payload::Arrival(j) => {
                self.processed += 1;
                self.arrive(j)?;
            }
            Payload::Completion { task, exec, version } => {
                if self.is_current(task, exec, version) {
                    self.processed += 1;
                    self.complete(task, exec)?;
                }
            }
            Payload::Epoch => {
                self.processed += 1;
                self.epoch()?;
            }
        }
        Ok(true)
    }

    /// Processes every event up to and including time `t`.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        while self.events.peek().is_some_and(|Reverse(e)| e.time <= t) {
            self.step()?;
        }
        Ok(())
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn jobs(&self) -> &[JobInstance] {
        &self.jobs
    }

    /// Evidence gathered so far for the job at workload position `j`.
    pub fn evidence(&self, j: usize) -> &Evidence {
        &self.evidence[j]
    }

    /// Workload positions of arrived, unfinished jobs.
    pub fn active(&self) -> Vec<usize> {
        self.active.iter().copied().collect()
    }

    /// Current LLM load as seen by the scheduler.
    pub fn batch_context(&self) -> BatchContext {
        let running: usize = self.llm.iter().map(LlmExecutor::batch).sum();
        let avg = (running as f64 / self.llm.len() as f64).max(1.0);
        BatchContext { slowdown: self.cluster.calibration.slowdown(avg) }
    }

    fn is_current(&self, task: TaskRef, exec: Exec, version: u64) -> bool {
        match exec {
            Exec::Regular(e) => self.regular[e].is_some_and(|(t, _)| t == task),
            Exec::Llm(e) => self.llm[e].running.iter().any(|s| s.task == task && s.version == version),
        }
    }

    fn template_of(&self, j: usize) -> &'a AppTemplate {
        &self.templates[self.jobs[j].view().app.0]
    }

    fn arrive(&mut self, j: usize) -> Result<()> {
        self.active.insert(j);
        self.settle(j)?;
        self.request_epoch();
        Ok(())
    }

    /// Applies instant skips, records them as evidence and retires the job
    /// once nothing is left.
    fn settle(&mut self, j: usize) -> Result<()> {
        let template = self.template_of(j);
        let skipped = self.jobs[j].settle(template)?;
        let profile = &self.profiles.apps[self.jobs[j].view().app.0];
        for s in skipped {
            if s < template.stages.len() {
                update_evidence(&mut self.evidence[j], profile, s, 0.0);
            }
        }
        if self.jobs[j].view().all_finished() {
            let now = self.now;
            self.jobs[j].view_mut().completion = Some(now);
            self.active.remove(&j);
            let jct = now - self.jobs[j].view().arrival;
            if jct + 1e-9 < self.jobs[j].realized_critical_path()? {
                self.violations.jct_lower_bound += 1;
            }
        }
        Ok(())
    }

    fn complete(&mut self, task: TaskRef, exec: Exec) -> Result<()> {
        let cal = &self.cluster.calibration;
        match exec {
            Exec::Regular(e) => {
                let (_, started) = self.regular[e].take().expect("checked current");
                self.regular_busy += self.now - started;
            }
            Exec::Llm(e) => {
                let ex = &mut self.llm[e];
                let pos = ex.running.iter().position(|s| s.task == task).expect("checked current");
                let slot = ex.running.remove(pos);
                self.slot_busy += self.now - slot.started;
                let b = ex.batch();
                if b == 0 {
                    if let Some(since) = ex.busy_since.take() {
                        self.llm_busy += self.now - since;
                    }
                } else {
                    let moved = ex.rescale(cal, b + 1, b, self.now)?;
                    self.rekey(e, moved);
                }
            }
        }
        let j = self.index[&task.job];
        let observed = self.jobs[j].truth().durations[task.stage][task.task];
        let done = self.jobs[j].view_mut().finish_task(task.stage, task.task, observed);
        let template = self.template_of(j);
        if task.stage < template.stages.len() {
            let profile = &self.profiles.apps[self.jobs[j].view().app.0];
            let mean = self.jobs[j].view().stages[task.stage].observed_mean().unwrap_or(observed);
            update_evidence(&mut self.evidence[j], profile, task.stage, mean);
        }
        if done && self.jobs[j].view().stages[task.stage].kind == StageKind::Llm {
            self.jobs[j].reveal_after(template, task.stage)?;
        }
        self.settle(j)?;
        self.request_epoch();
        Ok(())
    }

    fn rekey(&mut self, e: usize, moved: Vec<(usize, f64)>) {
        for (i, finish) in moved {
            self.push_llm_completion(e, i, finish);
        }
    }

    /// Schedules the completion of LLM slot `slot`, superseding earlier
    /// events for it. The version is the event's sequence number.
    fn push_llm_completion(&mut self, e: usize, slot: usize, finish: f64) {
        let task = self.llm[e].running[slot].task;
        let version = self.seq + 1;
        self.llm[e].running[slot].version = version;
        self.push(finish, Payload::Completion { task, exec: Exec::Llm(e), version });
    }

    fn refresh_progress(&mut self) -> Result<()> {
        let cal = &self.cluster.calibration;
        for e in 0..self.regular.len() {
            if let Some((t, started)) = self.regular[e] {
                let j = self.index[&t.job];
                self.jobs[j].view_mut().stages[t.stage].tasks[t.task].progress = self.now - started;
            }
        }
        for e in 0..self.llm.len() {
            for k in 0..self.llm[e].running.len() {
                let slot = &self.llm[e].running[k];
                let p = self.llm[e].progress(slot, cal, self.now)?;
                let t = slot.task;
                let j = self.index[&t.job];
                self.jobs[j].view_mut().stages[t.stage].tasks[t.task].progress = p;
            }
        }
        Ok(())
    }

    fn epoch(&mut self) -> Result<()> {
        if self.active.is_empty() {
            return Ok(());
        }
        self.refresh_progress()?;
        let batch = self.batch_context();
        let active: Vec<usize> = self.active.iter().copied().collect();
        let decision = {
            let snaps: Vec<JobSnapshot<'_>> = active
                .iter()
                .map(|&j| JobSnapshot { view: self.jobs[j].view(), evidence: &self.evidence[j] })
                .collect();
            let snap = Snapshot {
                jobs: &snaps,
                templates: self.templates,
                profiles: self.profiles,
                batch,
                now: self.now,
            };
            let t0 = self.clock.now_ns();
            let d = self.scheduler.schedule(&snap)?;
            let t1 = self.clock.now_ns();
            self.timing.record(t1.saturating_sub(t0));
            d
        };
        self.dispatch(decision)?;
        self.check_conservation(&active);
        Ok(())
    }

    fn valid_ref(&self, r: TaskRef, kind: StageKind) -> Option<usize> {
        let &j = self.index.get(&r.job)?;
        if !self.active.contains(&j) {
            return None;
        }
        let s = self.jobs[j].view().stages.get(r.stage)?;
        if s.kind != kind || !s.is_schedulable() || s.tasks.get(r.task)?.state != TaskState::Pending {
            return None;
        }
        Some(j)
    }

    fn dispatch(&mut self, d: ScheduleDecision) -> Result<()> {
        let b_max = self.cluster.max_batch_size;
        for (list, kind) in [(d.regular, StageKind::Regular), (d.llm, StageKind::Llm)] {
            for r in list {
                let exec = match kind {
                    StageKind::Regular => self.regular.iter().position(Option::is_none).map(Exec::Regular),
                    _ => {
                        let loads: Vec<usize> = self.llm.iter().map(LlmExecutor::batch).collect();
                        assign_llm_task(&loads, b_max).map(Exec::Llm)
                    }
                };
                let Some(exec) = exec else { break };
                let Some(j) = self.valid_ref(r, kind) else {
                    self.violations.invalid_decision += 1;
                    continue;
                };
                let view = self.jobs[j].view();
                if view.stages[r.stage].preds.iter().any(|&p| !view.stages[p].state.is_finished()) {
                    self.violations.dependency += 1;
                    continue;
                }
                self.start(j, r, exec)?;
            }
        }
        if self.llm.iter().any(|e| e.batch() > b_max) {
            self.violations.capacity += 1;
        }
        Ok(())
    }

    fn start(&mut self, j: usize, r: TaskRef, exec: Exec) -> Result<()> {
        let now = self.now;
        self.jobs[j].view_mut().start_task(r.stage, r.task, now);
        let work = self.jobs[j].truth().durations[r.stage][r.task];
        match exec {
            Exec::Regular(e) => {
                self.regular[e] = Some((r, now));
                self.push(now + work, Payload::Completion { task: r, exec, version: 0 });
            }
            Exec::Llm(e) => {
                let cal = &self.cluster.calibration;
                let b = self.llm[e].batch();
                if b > 0 {
                    let moved = self.llm[e].rescale(cal, b, b + 1, now)?;
                    self.rekey(e, moved);
                } else {
                    self.llm[e].busy_since = Some(now);
                }
                let finish = now + cal.calibrate(work, 1, b + 1)?;
                self.llm[e].running.push(LlmSlot { task: r, started: now, work, finish, version: 0 });
                self.push_llm_completion(e, b, finish);
            }
        }
        Ok(())
    }

    /// Idle capacity next to a pending task of a compatible kind breaks
    /// work conservation.
    fn check_conservation(&mut self, active: &[usize]) {
        let free_regular = self.regular.iter().any(Option::is_none);
        let loads: Vec<usize> = self.llm.iter().map(LlmExecutor::batch).collect();
        let free_llm = assign_llm_task(&loads, self.cluster.max_batch_size).is_some();
        if !free_regular && !free_llm {
            return;
        }
        for &j in active {
            for s in &self.jobs[j].view().stages {
                if s.is_schedulable() && s.unlaunched() > 0 {
                    let idle = match s.kind {
                        StageKind::Regular => free_regular,
                        StageKind::Llm => free_llm,
                        StageKind::Dynamic => false,
                    };
                    if idle {
                        self.violations.work_conservation += 1;
                        return;
                    }
                }
            }
        }
    }

    fn finish(mut self) -> RunOutcome {
        let jobs: Vec<JobRecord> = self
            .jobs
            .iter()
            .map(|j| {
                let v = j.view();
                let completion = v.completion.unwrap_or(v.arrival);
                JobRecord { job_id: v.job_id, app_id: v.app.0, arrival: v.arrival, completion, jct: completion - v.arrival }
            })
            .collect();
        let start = jobs.iter().map(|r| r.arrival).fold(f64::INFINITY, f64::min);
        let end = jobs.iter().map(|r| r.completion).fold(0.0, f64::max);
        let span = (end - start).max(f64::MIN_POSITIVE);
        let c = self.cluster;
        let metrics = RunMetrics {
            average_jct: jobs.iter().map(|r| r.jct).sum::<f64>() / jobs.len() as f64,
            makespan: end - start,
            regular_utilization: self.regular_busy / (span * c.num_regular_executors as f64),
            llm_utilization: self.llm_busy / (span * c.num_llm_executors as f64),
            llm_slot_utilization: self.slot_busy / (span * (c.num_llm_executors * c.max_batch_size) as f64),
            events: self.processed,
            invocations: self.timing.invocations,
            jobs,
        };
        RunOutcome {
            metrics,
            timing: self.timing,
            violations: self.violations,
            scores: self.scheduler.take_scores(),
            jobs: self.jobs,
        }
    }
}

/// Runs `jobs` to completion under `config`.
pub fn run(
    cluster: &ClusterConfig,
    templates: &[AppTemplate],
    profiles: &ProfileSet,
    jobs: Vec<JobInstance>,
    config: SchedulerConfig,
) -> Result<RunOutcome> {
    Simulation::new(cluster, templates, profiles, jobs, config)?.run()
}
