use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense per-application stage index, assigned in topological order.
pub type StageId = usize;

/// Index of an application in the catalog a simulation runs against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AppId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageKind {
    Regular,
    Llm,
    /// Placeholder for stages the preceding LLM stage generates at runtime.
    Dynamic,
}

impl StageKind {
    pub fn is_executable(self) -> bool {
        !matches!(self, StageKind::Dynamic)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Predefined,
    Chain,
    Planning,
}

/// Position of a padded chain stage: iteration (0-based) and offset in the
/// per-iteration pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSlot {
    pub iteration: usize,
    pub offset: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateStage {
    pub name: String,
    pub kind: StageKind,
    pub num_tasks: usize,
}

/// Candidate set `C`, possible edges `E` over it, and the existence
/// probability of every node and edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicStageSpec {
    pub candidates: Vec<CandidateStage>,
    pub edges: Vec<(usize, usize)>,
    pub node_probs: Vec<f64>,
    pub edge_probs: Vec<f64>,
    /// Duration range (seconds) assumed for the whole placeholder when no
    /// profile provides one.
    pub prior_range: f64,
}

impl DynamicStageSpec {
    pub fn validate(&self) -> Result<()> {
        let m = self.candidates.len();
        if self.node_probs.len() != m || self.edge_probs.len() != self.edges.len() {
            return Err(Error::Structural("dynamic spec probability count mismatch".into()));
        }
        for &(a, b) in &self.edges {
            if a >= m || b >= m || a == b {
                return Err(Error::Structural(alloc::format!(
                    "edge ({a}, {b}) does not connect two distinct candidates"
                )));
            }
        }
        if self.node_probs.iter().chain(&self.edge_probs).any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Structural("existence probability outside [0, 1]".into()));
        }
        for c in &self.candidates {
            if !c.kind.is_executable() || c.num_tasks == 0 {
                return Err(Error::Structural(alloc::format!(
                    "candidate {} must be a regular or LLM stage with tasks",
                    c.name
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTemplate {
    pub id: StageId,
    pub name: String,
    pub kind: StageKind,
    pub num_tasks: usize,
    pub predecessors: Vec<StageId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamic: Option<DynamicStageSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainSlot>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppTemplate {
    pub name: String,
    pub family: Family,
    pub stages: Vec<StageTemplate>,
}

impl AppTemplate {
    /// Checks dense topological ids, dynamic-stage wiring and candidate specs.
    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::Structural(alloc::format!("{} has no stages", self.name)));
        }
        for (i, s) in self.stages.iter().enumerate() {
            if s.id != i {
                return Err(Error::Structural(alloc::format!(
                    "{}: stage ids must be dense, found {} at {i}",
                    self.name, s.id
                )));
            }
            if s.predecessors.iter().any(|&p| p >= i) {
                return Err(Error::Structural(alloc::format!(
                    "{}: stage {i} has a predecessor that is not earlier in topological order",
                    self.name
                )));
            }
            match s.kind {
                StageKind::Dynamic => {
                    let spec = s.dynamic.as_ref().ok_or_else(|| {
                        Error::Structural(alloc::format!("{}: stage {i} lacks a dynamic spec", self.name))
                    })?;
                    spec.validate()?;
                    let ok = s.predecessors.len() == 1
                        && self.stages[s.predecessors[0]].kind == StageKind::Llm;
                    if !ok {
                        return Err(Error::Structural(alloc::format!(
                            "{}: dynamic stage {i} needs exactly one LLM predecessor",
                            self.name
                        )));
                    }
                }
                _ => {
                    if s.num_tasks == 0 {
                        return Err(Error::Structural(alloc::format!(
                            "{}: stage {i} has no tasks",
                            self.name
                        )));
                    }
                    if s.dynamic.is_some() {
                        return Err(Error::Structural(alloc::format!(
                            "{}: stage {i} carries a dynamic spec but is not dynamic",
                            self.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn successors(&self, id: StageId) -> impl Iterator<Item = StageId> + '_ {
        self.stages.iter().filter(move |s| s.predecessors.contains(&id)).map(|s| s.id)
    }

    /// The dynamic stage fed by `id`, if any.
    pub fn dynamic_successor(&self, id: StageId) -> Option<StageId> {
        self.successors(id).find(|&s| self.stages[s].kind == StageKind::Dynamic)
    }

    /// Total number of job-level stages: template stages followed by every
    /// dynamic stage's candidates.
    pub fn expanded_len(&self) -> usize {
        self.stages.len()
            + self
                .stages
                .iter()
                .filter_map(|s| s.dynamic.as_ref())
                .map(|d| d.candidates.len())
                .sum::<usize>()
    }

    /// Job-level index of the first candidate of dynamic stage `id`.
    pub fn candidate_base(&self, id: StageId) -> usize {
        let mut base = self.stages.len();
        for s in &self.stages[..id] {
            if let Some(d) = &s.dynamic {
                base += d.candidates.len();
            }
        }
        base
    }

    pub fn max_iterations(&self) -> Option<usize> {
        self.stages.iter().filter_map(|s| s.chain).map(|c| c.iteration + 1).max()
    }
}
