//! Per-application profiles and runtime duration estimation.

mod calibration;
mod discretize;
mod estimate;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bayesnet::{learn_structure, DiscreteBayesNet, Evidence, StructureSearch};
use crate::error::{Error, Result};
use crate::model::{AppTemplate, DurationDistribution, DynamicStageSpec, StageId, StageKind};
use crate::workload::TraceRecord;

pub use calibration::CalibrationProfile;
pub use discretize::discretize;
pub use estimate::{
    estimated_remaining_duration, BatchContext, EstimateMode, InferenceCache, RemainingEstimate,
};

/// Profiled stages are discretized into at most this many positive bins.
pub const MAX_BINS: usize = 6;

/// A trained network plus the template stage behind each variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageNetwork {
    pub net: DiscreteBayesNet,
    pub stages: Vec<StageId>,
}

impl StageNetwork {
    pub fn var_of(&self, stage: StageId) -> Option<usize> {
        self.stages.iter().position(|&s| s == stage)
    }
}

/// Empirical behaviour of one dynamic stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicProfile {
    pub stage: StageId,
    /// Candidate set with empirical node and edge existence frequencies.
    pub spec: DynamicStageSpec,
    /// Per-task duration law of each candidate when it runs.
    pub candidate_dists: Vec<DurationDistribution>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApplicationProfile {
    pub app: String,
    /// Per template stage. Regular and LLM stages hold their per-task
    /// duration law; dynamic stages hold the law of their realized
    /// subgraph's longest path.
    pub stage_dists: Vec<Option<DurationDistribution>>,
    pub dynamic: Vec<DynamicProfile>,
    pub network: Option<StageNetwork>,
    /// Stages correlated with at least one other stage in the network.
    pub uncertainty_reducing: Vec<bool>,
    /// Mean critical-path duration of the recorded jobs at batch size 1.
    pub mean_job_duration: f64,
}

impl ApplicationProfile {
    /// Trains a profile from recorded jobs of this application.
    pub fn train(template: &AppTemplate, records: &[&TraceRecord], search: &StructureSearch) -> Result<Self> {
        template.validate()?;
        let name = &template.name;
        if records.is_empty() {
            return Err(Error::Training(alloc::format!("no traces for {name}")));
        }
        let n_exp = template.expanded_len();
        for r in records {
            if r.app != *name || r.stages.len() != n_exp {
                return Err(Error::Training(alloc::format!(
                    "trace of job {} does not match application {name}",
                    r.job_id
                )));
            }
        }

        let mut stage_dists = vec![None; template.stages.len()];
        let mut dynamic = Vec::new();
        for st in &template.stages {
            match st.kind {
                StageKind::Regular | StageKind::Llm => {
                    let samples: Vec<f64> = records.iter().map(|r| r.stages[st.id].duration).collect();
                    stage_dists[st.id] = Some(discretize(&samples, MAX_BINS));
                }
                StageKind::Dynamic => {
                    let spec = st.dynamic.as_ref().expect("validated");
                    let base = template.candidate_base(st.id);
                    let mut candidate_dists = Vec::with_capacity(spec.candidates.len());
                    for (i, c) in spec.candidates.iter().enumerate() {
                        let samples: Vec<f64> = records
                            .iter()
                            .filter(|r| r.stages[base + i].executed)
                            .map(|r| r.stages[base + i].duration)
                            .collect();
                        if samples.is_empty() {
                            return Err(Error::Training(alloc::format!(
                                "{name}: candidate {} of stage {} never ran in the traces",
                                c.name, st.id
                            )));
                        }
                        candidate_dists.push(discretize(&samples, MAX_BINS));
                    }
                    let total = records.len() as f64;
                    let mut node_probs: Vec<f64> = vec![0.0; spec.candidates.len()];
                    let mut edge_probs: Vec<f64> = vec![0.0; spec.edges.len()];
                    let mut lengths = Vec::with_capacity(records.len());
                    for r in records {
                        let d = r.realized_for(st.id).ok_or_else(|| {
                            Error::Training(alloc::format!("job {} lacks stage {} realization", r.job_id, st.id))
                        })?;
                        for &n in &d.nodes {
                            node_probs[n] += 1.0 / total;
                        }
                        for e in &d.edges {
                            if let Some(k) = spec.edges.iter().position(|x| x == e) {
                                edge_probs[k] += 1.0 / total;
                            }
                        }
                        let w: Vec<f64> = (0..spec.candidates.len())
                            .map(|i| if d.nodes.contains(&i) { r.stages[base + i].duration } else { 0.0 })
                            .collect();
                        lengths.push(longest_path(&d.nodes, &d.edges, &w));
                    }
                    stage_dists[st.id] = Some(discretize(&lengths, MAX_BINS));
                    let spec = DynamicStageSpec {
                        node_probs: node_probs.iter().map(|p| p.min(1.0)).collect(),
                        edge_probs: edge_probs.iter().map(|p| p.min(1.0)).collect(),
                        ..spec.clone()
                    };
                    dynamic.push(DynamicProfile { stage: st.id, spec, candidate_dists });
                }
            }
        }

        // network over the executable stages that carry any variation
        let profiled: Vec<StageId> = template
            .stages
            .iter()
            .filter(|s| s.kind.is_executable())
            .filter(|s| stage_dists[s.id].as_ref().is_some_and(|d| d.len() >= 2))
            .map(|s| s.id)
            .collect();
        let network = if profiled.len() >= 2 {
            let cards: Vec<usize> = profiled.iter().map(|&s| stage_dists[s].as_ref().unwrap().len()).collect();
            let samples: Vec<Vec<usize>> = records
                .iter()
                .map(|r| {
                    profiled
                        .iter()
                        .map(|&s| stage_dists[s].as_ref().unwrap().state_of(r.stages[s].duration))
                        .collect()
                })
                .collect();
            let order: Vec<usize> = (0..profiled.len()).collect();
            let parents = learn_structure(&cards, &samples, &order, search);
            let net = DiscreteBayesNet::fit_cpts(cards, parents, &samples)?;
            Some(StageNetwork { net, stages: profiled })
        } else {
            None
        };

        let mut uncertainty_reducing = vec![false; template.stages.len()];
        if let Some(nw) = &network {
            for (v, &s) in nw.stages.iter().enumerate() {
                uncertainty_reducing[s] = !nw.net.correlated_set(v).is_empty();
            }
        }

        let mean_job_duration =
            records.iter().map(|r| record_critical_path(template, r)).sum::<f64>() / records.len() as f64;

        Ok(ApplicationProfile {
            app: name.clone(),
            stage_dists,
            dynamic,
            network,
            uncertainty_reducing,
            mean_job_duration,
        })
    }

    pub fn dynamic_profile(&self, stage: StageId) -> Option<&DynamicProfile> {
        self.dynamic.iter().find(|d| d.stage == stage)
    }

    /// Per-task duration law of a job-level stage: template stages first,
    /// then the candidates of each dynamic stage in order.
    pub fn job_stage_dist(&self, template: &AppTemplate, stage: usize) -> Option<&DurationDistribution> {
        if stage < template.stages.len() {
            return self.stage_dists[stage].as_ref();
        }
        let mut base = template.stages.len();
        for d in &self.dynamic {
            let m = d.candidate_dists.len();
            if stage < base + m {
                return Some(&d.candidate_dists[stage - base]);
            }
            base += m;
        }
        None
    }
}

/// Inserts the state of a finished (or partially observed) stage into a
/// job's evidence. `observed` is already normalized to batch size 1; a
/// skipped stage is observed as 0. Returns the recorded state, or `None`
/// when the stage is not a network variable.
pub fn update_evidence(
    evidence: &mut Evidence,
    profile: &ApplicationProfile,
    stage: StageId,
    observed: f64,
) -> Option<usize> {
    let nw = profile.network.as_ref()?;
    let var = nw.var_of(stage)?;
    let state = profile.stage_dists[stage].as_ref()?.state_of(observed);
    evidence.insert(var, state);
    Some(state)
}

/// Profiles for every application of a catalog, indexed by `AppId`, plus
/// the cluster-wide decoding latency table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSet {
    pub apps: Vec<ApplicationProfile>,
    pub calibration: CalibrationProfile,
}

impl ProfileSet {
    /// Trains one profile per template from `records`, matched by name.
    pub fn train(
        templates: &[AppTemplate],
        records: &[TraceRecord],
        calibration: CalibrationProfile,
        search: &StructureSearch,
    ) -> Result<Self> {
        let apps = templates
            .iter()
            .map(|t| {
                let mine: Vec<&TraceRecord> = records.iter().filter(|r| r.app == t.name).collect();
                ApplicationProfile::train(t, &mine, search)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ProfileSet { apps, calibration })
    }

    pub fn get(&self, app: crate::model::AppId) -> Option<&ApplicationProfile> {
        self.apps.get(app.0)
    }
}

/// Longest path through a node subset with per-node weights. Nodes are
/// candidate indices and edges point from lower to higher indices or at
/// least form a DAG.
pub(crate) fn longest_path(nodes: &[usize], edges: &[(usize, usize)], weight: &[f64]) -> f64 {
    let m = weight.len();
    let mut finish = vec![f64::NAN; m];
    let mut remaining: Vec<usize> = nodes.to_vec();
    let mut best = 0.0f64;
    // nodes are few; relax until every node has all predecessors settled
    while !remaining.is_empty() {
        let before = remaining.len();
        remaining.retain(|&n| {
            let preds: Vec<usize> =
                edges.iter().filter(|&&(a, b)| b == n && nodes.contains(&a)).map(|&(a, _)| a).collect();
            if preds.iter().any(|&p| finish[p].is_nan()) {
                return true;
            }
            let start = preds.iter().map(|&p| finish[p]).fold(0.0, f64::max);
            finish[n] = start + weight[n];
            best = best.max(finish[n]);
            false
        });
        if remaining.len() == before {
            break;
        }
    }
    best
}

/// Critical path of a recorded job at batch size 1, using per-task mean
/// durations.
pub(crate) fn record_critical_path(template: &AppTemplate, r: &TraceRecord) -> f64 {
    let n = template.stages.len();
    let mut finish = vec![0.0f64; n];
    for st in &template.stages {
        let start = st.predecessors.iter().map(|&p| finish[p]).fold(0.0, f64::max);
        let own = match st.kind {
            StageKind::Dynamic => {
                let spec = st.dynamic.as_ref().expect("validated");
                let base = template.candidate_base(st.id);
                let w: Vec<f64> =
                    (0..spec.candidates.len()).map(|i| r.stages[base + i].duration).collect();
                r.realized_for(st.id).map_or(0.0, |d| longest_path(&d.nodes, &d.edges, &w))
            }
            _ => r.stages[st.id].duration,
        };
        finish[st.id] = start + own;
    }
    finish.into_iter().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn longest_path_over_subset() {
        let w = [1.0, 2.0, 3.0, 10.0];
        assert_eq!(longest_path(&[0, 1, 2], &[(0, 1), (1, 2)], &w), 6.0);
        assert_eq!(longest_path(&[0, 2], &[(0, 1), (1, 2)], &w), 3.0);
        assert_eq!(longest_path(&[], &[], &w), 0.0);
    }
}
