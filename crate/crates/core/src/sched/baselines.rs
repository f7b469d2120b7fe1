use alloc::vec;
use alloc::vec::Vec;

use super::{DecisionBuilder, ScheduleDecision, Snapshot};
use crate::error::Result;
use crate::model::JobView;

/// Schedulable stages of a job in dependency order.
pub(crate) fn schedulable_in_order(job: &JobView) -> Result<Vec<usize>> {
    Ok(job.topological_stages()?.into_iter().filter(|&i| job.stages[i].is_schedulable()).collect())
}

fn by_job_key(snap: &Snapshot<'_>, key: impl Fn(&JobView) -> Result<f64>) -> Result<ScheduleDecision> {
    let mut order: Vec<(f64, f64, u64, usize)> = Vec::with_capacity(snap.jobs.len());
    for (j, js) in snap.jobs.iter().enumerate() {
        order.push((key(js.view)?, js.view.arrival, js.view.job_id, j));
    }
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut b = DecisionBuilder::default();
    for (_, _, _, j) in order {
        let view = snap.jobs[j].view;
        for s in schedulable_in_order(view)? {
            b.push(view, s, None);
        }
    }
    Ok(b.finish())
}

pub(crate) fn fcfs(snap: &Snapshot<'_>) -> Result<ScheduleDecision> {
    by_job_key(snap, |_| Ok(0.0))
}

pub(crate) fn sjf(snap: &Snapshot<'_>) -> Result<ScheduleDecision> {
    by_job_key(snap, |v| Ok(snap.profile(v)?.mean_job_duration))
}

/// Round robin over jobs in arrival order, one stage per job per round.
pub(crate) fn fair(snap: &Snapshot<'_>) -> Result<ScheduleDecision> {
    let mut jobs: Vec<usize> = (0..snap.jobs.len()).collect();
    jobs.sort_by(|&a, &b| {
        let (x, y) = (snap.jobs[a].view, snap.jobs[b].view);
        x.arrival.total_cmp(&y.arrival).then(x.job_id.cmp(&y.job_id))
    });
    let lists = jobs
        .iter()
        .map(|&j| schedulable_in_order(snap.jobs[j].view))
        .collect::<Result<Vec<_>>>()?;
    let rounds = lists.iter().map(Vec::len).max().unwrap_or(0);
    let mut b = DecisionBuilder::default();
    for r in 0..rounds {
        for (k, &j) in jobs.iter().enumerate() {
            if let Some(&s) = lists[k].get(r) {
                b.push(snap.jobs[j].view, s, None);
            }
        }
    }
    Ok(b.finish())
}

/// Depth ascending, then children and task count descending.
pub(crate) fn argus(snap: &Snapshot<'_>) -> Result<ScheduleDecision> {
    let mut keyed = Vec::new();
    for (j, js) in snap.jobs.iter().enumerate() {
        let v = js.view;
        let n = v.stages.len();
        let mut depth = vec![0usize; n];
        let mut children = vec![0usize; n];
        for i in v.topological_stages()? {
            for &p in &v.stages[i].preds {
                depth[i] = depth[i].max(depth[p] + 1);
                children[p] += 1;
            }
        }
        for i in 0..n {
            if v.stages[i].is_schedulable() {
                let key = (depth[i], usize::MAX - children[i], usize::MAX - v.stages[i].num_tasks(), v.job_id, i);
                keyed.push((key, j));
            }
        }
    }
    keyed.sort_unstable();
    let mut b = DecisionBuilder::default();
    for ((.., stage), j) in keyed {
        b.push(snap.jobs[j].view, stage, None);
    }
    Ok(b.finish())
}
