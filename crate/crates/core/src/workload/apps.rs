//! Generative models of the synthetic application families.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::exp;
use crate::model::{
    AppTemplate, CandidateStage, ChainSlot, DynamicStageSpec, Family, JobTruth, RealizedSubgraph,
    StageKind, StageTemplate,
};

/// Duration model of one stage. Each job draws a stage value
/// `base * z^latent * exp(N(0, noise))`, where `z` is the job's shared
/// latent size factor; each task then draws `value * exp(N(0, task_jitter))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageParams {
    pub name: String,
    pub kind: StageKind,
    #[serde(default = "one")]
    pub tasks: usize,
    pub base: f64,
    #[serde(default)]
    pub latent: f64,
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub task_jitter: f64,
    /// Predecessors by index (predefined applications only).
    #[serde(default)]
    pub preds: Vec<usize>,
    /// Relative lengthening per realized tool (planning applications).
    #[serde(default)]
    pub per_tool: f64,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToolEdge {
    pub from: usize,
    pub to: usize,
    /// Probability of the edge given both tools are selected.
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToolParams {
    pub stage: StageParams,
    /// Probability the planner selects this tool.
    pub select: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum AppModel {
    /// Fixed DAG.
    Predefined { stages: Vec<StageParams> },
    /// Prefix followed by a repeated pattern, padded to `max_iterations`.
    /// After each iteration the chain continues with probability
    /// `continue_prob * z^complexity`, capped at 0.95.
    Chain {
        prefix: Vec<StageParams>,
        pattern: Vec<StageParams>,
        max_iterations: usize,
        continue_prob: f64,
        complexity: f64,
    },
    /// LLM planner, a dynamic stage over `tools`, then an optional suffix
    /// chain that waits for the generated plan.
    Planning { planner: StageParams, tools: Vec<ToolParams>, edges: Vec<ToolEdge>, suffix: Vec<StageParams> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppParams {
    pub name: String,
    /// Standard deviation of `ln z`.
    pub latent_sigma: f64,
    pub model: AppModel,
}

impl AppParams {
    pub fn family(&self) -> Family {
        match self.model {
            AppModel::Predefined { .. } => Family::Predefined,
            AppModel::Chain { .. } => Family::Chain,
            AppModel::Planning { .. } => Family::Planning,
        }
    }

    pub fn template(&self) -> Result<AppTemplate> {
        let mk = |id: usize, p: &StageParams, preds: Vec<usize>, chain: Option<ChainSlot>| StageTemplate {
            id,
            name: p.name.clone(),
            kind: p.kind,
            num_tasks: p.tasks,
            predecessors: preds,
            dynamic: None,
            chain,
        };
        let stages = match &self.model {
            AppModel::Predefined { stages } => {
                stages.iter().enumerate().map(|(i, p)| mk(i, p, p.preds.clone(), None)).collect()
            }
            AppModel::Chain { prefix, pattern, max_iterations, .. } => {
                let mut out: Vec<StageTemplate> = Vec::new();
                for p in prefix {
                    let id = out.len();
                    out.push(mk(id, p, id.checked_sub(1).into_iter().collect(), None));
                }
                for it in 0..*max_iterations {
                    for (off, p) in pattern.iter().enumerate() {
                        let id = out.len();
                        let mut s = mk(id, p, id.checked_sub(1).into_iter().collect(), Some(ChainSlot {
                            iteration: it,
                            offset: off,
                        }));
                        s.name = alloc::format!("{}-{}", p.name, it + 1);
                        out.push(s);
                    }
                }
                out
            }
            AppModel::Planning { planner, tools, edges, suffix } => {
                let mut out = vec![mk(0, planner, vec![], None)];
                let spec = DynamicStageSpec {
                    candidates: tools
                        .iter()
                        .map(|t| CandidateStage { name: t.stage.name.clone(), kind: t.stage.kind, num_tasks: t.stage.tasks })
                        .collect(),
                    edges: edges.iter().map(|e| (e.from, e.to)).collect(),
                    node_probs: tools.iter().map(|t| t.select).collect(),
                    edge_probs: edges
                        .iter()
                        .map(|e| e.prob * tools[e.from].select * tools[e.to].select)
                        .collect(),
                    prior_range: tools.iter().map(|t| 2.0 * t.stage.base).sum(),
                };
                out.push(StageTemplate {
                    id: 1,
                    name: "plan".into(),
                    kind: StageKind::Dynamic,
                    num_tasks: 0,
                    predecessors: vec![0],
                    dynamic: Some(spec),
                    chain: None,
                });
                for p in suffix {
                    let id = out.len();
                    out.push(mk(id, p, vec![id - 1], None));
                }
                out
            }
        };
        let t = AppTemplate { name: self.name.clone(), family: self.family(), stages };
        t.validate()?;
        Ok(t)
    }

    /// Draws a job's ground truth. `template` must come from
    /// [`Self::template`].
    pub fn sample_truth<R: Rng + ?Sized>(&self, template: &AppTemplate, rng: &mut R) -> Result<JobTruth> {
        let n = template.expanded_len();
        let std = Normal::new(0.0, 1.0).map_err(|_| Error::Config("normal".into()))?;
        let gauss = |rng: &mut R| -> f64 { std.sample(rng) };
        let z = exp(self.latent_sigma * gauss(rng));
        let mut durations: Vec<Vec<f64>> = template
            .stages
            .iter()
            .map(|s| vec![0.0; if s.kind.is_executable() { s.num_tasks } else { 0 }])
            .collect();
        let mut executed = vec![false; template.stages.len()];
        let mut realized = Vec::new();
        let mut chain_len = None;

        let draw = |p: &StageParams, extra: f64, rng: &mut R| -> Vec<f64> {
            let value = p.base * libm::pow(z, p.latent) * exp(p.noise * gauss(rng)) * extra;
            (0..p.tasks).map(|_| (value * exp(p.task_jitter * gauss(rng))).max(1e-3)).collect()
        };

        match &self.model {
            AppModel::Predefined { stages } => {
                for (i, p) in stages.iter().enumerate() {
                    durations[i] = draw(p, 1.0, rng);
                    executed[i] = true;
                }
            }
            AppModel::Chain { prefix, pattern, max_iterations, continue_prob, complexity } => {
                let q = (continue_prob * libm::pow(z, *complexity)).clamp(0.0, 0.95);
                let mut len = 1;
                while len < *max_iterations && rng.random::<f64>() < q {
                    len += 1;
                }
                chain_len = Some(len);
                for (i, p) in prefix.iter().enumerate() {
                    durations[i] = draw(p, 1.0, rng);
                    executed[i] = true;
                }
                for it in 0..len {
                    for (off, p) in pattern.iter().enumerate() {
                        let id = prefix.len() + it * pattern.len() + off;
                        durations[id] = draw(p, 1.0, rng);
                        executed[id] = true;
                    }
                }
            }
            AppModel::Planning { planner, tools, edges, suffix } => {
                let nodes: Vec<usize> =
                    (0..tools.len()).filter(|&i| rng.random::<f64>() < tools[i].select).collect();
                let real_edges: Vec<(usize, usize)> = edges
                    .iter()
                    .filter(|e| nodes.contains(&e.from) && nodes.contains(&e.to))
                    .filter(|e| rng.random::<f64>() < e.prob)
                    .map(|e| (e.from, e.to))
                    .collect();
                let k = nodes.len() as f64;
                durations[0] = draw(planner, 1.0 + planner.per_tool * k, rng);
                executed[0] = true;
                for (j, p) in suffix.iter().enumerate() {
                    durations[2 + j] = draw(p, 1.0 + p.per_tool * k, rng);
                    executed[2 + j] = true;
                }
                let base = template.candidate_base(1);
                durations.resize(n, Vec::new());
                executed.resize(n, false);
                for (i, t) in tools.iter().enumerate() {
                    if nodes.contains(&i) {
                        durations[base + i] = draw(&t.stage, 1.0, rng);
                        executed[base + i] = true;
                    } else {
                        durations[base + i] = vec![0.0; t.stage.tasks];
                    }
                }
                realized.push((1, RealizedSubgraph { nodes, edges: real_edges }));
            }
        }
        durations.resize(n, Vec::new());
        executed.resize(n, false);
        Ok(JobTruth { durations, executed, realized, chain_len })
    }
}
