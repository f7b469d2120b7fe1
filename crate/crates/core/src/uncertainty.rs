//! Uncertainty reduction of scheduling a stage.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bayesnet::{entropy, Evidence};
use crate::error::Result;
use crate::model::{AppTemplate, DurationDistribution, DynamicStageSpec, JobView, StageState};
use crate::profiler::{ApplicationProfile, InferenceCache};

/// Largest joint table built for one mutual information query. Targets
/// beyond it (farthest first) still count towards the range sum.
pub const MAX_JOINT_CELLS: usize = 4096;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyScore {
    pub stage_id: usize,
    /// Bits.
    pub mutual_information: f64,
    /// Seconds.
    pub range_sum: f64,
    pub dynamic_bonus: f64,
    pub reduction: f64,
}

/// Support width of `dist` under the state probabilities `probs`.
pub fn stage_range(dist: &DurationDistribution, probs: &[f64]) -> f64 {
    dist.range_under(probs)
}

fn binary_entropy(p: f64) -> f64 {
    entropy(&[p, 1.0 - p])
}

/// Structural entropy of a dynamic stage: one independent bit per
/// candidate node and per candidate edge.
pub fn dynamic_stage_entropy(spec: &DynamicStageSpec) -> f64 {
    spec.node_probs.iter().chain(&spec.edge_probs).map(|&p| binary_entropy(p)).sum()
}

/// Scores job-level stage `stage` of `job`.
///
/// The targets are the stages reachable from `stage` in the network that
/// have no launched task and no evidence yet. A stage feeding a still
/// unexpanded dynamic stage also earns the structural entropy of that
/// stage times its duration range.
pub fn uncertainty_reduction(
    job: &JobView,
    template: &AppTemplate,
    profile: &ApplicationProfile,
    evidence: &Evidence,
    stage: usize,
    cache: &mut InferenceCache,
) -> Result<UncertaintyScore> {
    let mut score = UncertaintyScore { stage_id: stage, ..Default::default() };
    if stage >= template.stages.len() {
        return Ok(score);
    }
    if let Some(d) = template.dynamic_successor(stage) {
        if job.stages[d].state == StageState::Blocked {
            let spec = profile
                .dynamic_profile(d)
                .map(|dp| &dp.spec)
                .or(template.stages[d].dynamic.as_ref());
            if let Some(spec) = spec {
                let range = match &profile.stage_dists[d] {
                    Some(dist) => dist.range(),
                    None => spec.prior_range,
                };
                score.dynamic_bonus = dynamic_stage_entropy(spec) * range;
            }
        }
    }
    if let Some(nw) = &profile.network {
        if let Some(x) = nw.var_of(stage) {
            if !evidence.contains(x) {
                let cards = nw.net.cards();
                let targets: Vec<usize> = nw
                    .net
                    .correlated_set(x)
                    .into_iter()
                    .filter(|&y| {
                        let s = &job.stages[nw.stages[y]];
                        !evidence.contains(y) && s.launched == 0 && !s.state.is_finished()
                    })
                    .collect();
                if !targets.is_empty() {
                    let posts = cache.posteriors(job.app, nw, evidence)?;
                    for &y in &targets {
                        if let Some(dist) = &profile.stage_dists[nw.stages[y]] {
                            score.range_sum += stage_range(dist, &posts[y]);
                        }
                    }
                    let mut by_distance = targets.clone();
                    by_distance.sort_by_key(|&y| (nw.stages[y].abs_diff(stage), y));
                    let mut cells = cards[x];
                    let mut kept = Vec::new();
                    for y in by_distance {
                        if cells * cards[y] <= MAX_JOINT_CELLS {
                            cells *= cards[y];
                            kept.push(y);
                        }
                    }
                    kept.sort_unstable();
                    if !kept.is_empty() && score.range_sum > 0.0 {
                        score.mutual_information =
                            cache.mutual_information(job.app, nw, &kept, x, evidence)?;
                    }
                }
            }
        }
    }
    score.reduction = score.mutual_information * score.range_sum + score.dynamic_bonus;
    Ok(score)
}
