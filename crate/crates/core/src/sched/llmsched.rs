use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::baselines::schedulable_in_order;
use super::{DecisionBuilder, ScheduleDecision, SchedulerConfig, ScoreRow, Snapshot};
use crate::error::Result;
use crate::math::ceil;
use crate::profiler::{estimated_remaining_duration, EstimateMode, InferenceCache, RemainingEstimate};
use crate::uncertainty::uncertainty_reduction;

pub(crate) fn estimates(
    snap: &Snapshot<'_>,
    mode: EstimateMode,
    cache: &mut InferenceCache,
) -> Result<Vec<RemainingEstimate>> {
    snap.jobs
        .iter()
        .map(|js| {
            let v = js.view;
            estimated_remaining_duration(v, snap.template(v)?, snap.profile(v)?, js.evidence, &snap.batch, mode, cache)
        })
        .collect()
}

/// Schedulable stages, jobs by ascending estimated remaining time (ties by
/// arrival, then id), each job's stages in dependency order.
pub(crate) fn srtf_order(snap: &Snapshot<'_>, est: &[RemainingEstimate]) -> Result<Vec<(usize, usize)>> {
    let mut jobs: Vec<usize> = (0..snap.jobs.len()).collect();
    jobs.sort_by(|&a, &b| {
        let (x, y) = (snap.jobs[a].view, snap.jobs[b].view);
        est[a]
            .mean
            .total_cmp(&est[b].mean)
            .then(x.arrival.total_cmp(&y.arrival))
            .then(x.job_id.cmp(&y.job_id))
    });
    let mut out = Vec::new();
    for j in jobs {
        for s in schedulable_in_order(snap.jobs[j].view)? {
            out.push((j, s));
        }
    }
    Ok(out)
}

/// Groups intervals into connected components of the overlap graph
/// (touching counts as overlapping), ordered by lower bound. Members of a
/// component are listed by lower bound, then index.
pub fn non_overlapping_sets(intervals: &[(f64, f64)]) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..intervals.len()).collect();
    idx.sort_by(|&a, &b| intervals[a].0.total_cmp(&intervals[b].0).then(a.cmp(&b)));
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut reach = f64::NEG_INFINITY;
    for i in idx {
        let (lo, hi) = intervals[i];
        match out.last_mut() {
            Some(set) if lo <= reach => set.push(i),
            _ => out.push(alloc::vec![i]),
        }
        reach = reach.max(hi);
    }
    out
}

pub(crate) fn schedule(
    snap: &Snapshot<'_>,
    config: &SchedulerConfig,
    rng: &mut ChaCha8Rng,
    cache: &mut InferenceCache,
    mut log: Option<&mut Vec<ScoreRow>>,
) -> Result<ScheduleDecision> {
    let est = estimates(snap, config.mode, cache)?;
    let s_t = srtf_order(snap, &est)?;
    let rank: alloc::collections::BTreeMap<(usize, usize), usize> =
        s_t.iter().enumerate().map(|(k, &js)| (js, k)).collect();

    let intervals: Vec<(f64, f64)> =
        est.iter().map(|e| (e.lo.min(e.mean), e.hi.max(e.mean))).collect();
    let mut s_u: Vec<(usize, usize)> = Vec::with_capacity(s_t.len());
    for set in non_overlapping_sets(&intervals) {
        let members: BTreeSet<usize> = set.into_iter().collect();
        let mut scored = Vec::new();
        for &(j, s) in s_t.iter().filter(|(j, _)| members.contains(j)) {
            let js = &snap.jobs[j];
            let v = js.view;
            let score = uncertainty_reduction(v, snap.template(v)?, snap.profile(v)?, js.evidence, s, cache)?;
            if let Some(log) = log.as_deref_mut() {
                log.push(ScoreRow {
                    time: snap.now,
                    job: v.job_id,
                    app: snap.template(v)?.name.clone(),
                    score,
                    remaining: est[j].mean,
                });
            }
            scored.push((score.reduction, rank[&(j, s)], (j, s)));
        }
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        s_u.extend(scored.into_iter().map(|x| x.2));
    }

    let mut b = DecisionBuilder::default();
    let mut chosen = BTreeSet::new();
    for (&exploit, &explore) in s_t.iter().zip(&s_u) {
        let p = 1.0 - rng.random::<f64>();
        let ((j, s), limit) = if p <= config.epsilon {
            let v = snap.jobs[explore.0].view;
            let pending = v.stages[explore.1].unlaunched();
            (explore, Some((ceil(config.ratio * pending as f64) as usize).max(1)))
        } else {
            (exploit, None)
        };
        if chosen.insert((j, s)) {
            b.push(snap.jobs[j].view, s, limit);
        }
    }
    for &(j, s) in s_t.iter().chain(&s_u) {
        b.push(snap.jobs[j].view, s, None);
    }
    Ok(b.finish())
}
