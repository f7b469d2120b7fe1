//! Synthetic workloads: application catalog, Poisson arrivals, traces.

mod apps;
mod catalog;
mod example;
mod trace;

pub use apps::{AppModel, AppParams, StageParams, ToolEdge, ToolParams};
pub use catalog::default_catalog;
pub use example::{two_job_example, Example};
pub use trace::{collect_trace, DynamicRecord, StageRecord, TraceRecord};

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AppId, AppTemplate, JobInstance};

/// A set of applications with their generative parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub version: u32,
    pub apps: Vec<AppParams>,
}

impl Catalog {
    pub fn templates(&self) -> Result<Vec<AppTemplate>> {
        self.apps.iter().map(AppParams::template).collect()
    }

    pub fn names(&self) -> Vec<String> {
        self.apps.iter().map(|a| a.name.clone()).collect()
    }

    pub fn find(&self, name: &str) -> Option<AppId> {
        self.apps.iter().position(|a| a.name == name).map(AppId)
    }
}

/// Named application mixes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Mixed,
    Predefined,
    Chainlike,
    Planning,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Mixed, Preset::Predefined, Preset::Chainlike, Preset::Planning];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Mixed => "mixed",
            Preset::Predefined => "predefined",
            Preset::Chainlike => "chainlike",
            Preset::Planning => "planning",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }

    /// Uniform weights over the catalog apps of the preset's family.
    pub fn mix(self, catalog: &Catalog) -> Vec<(AppId, f64)> {
        use crate::model::Family;
        catalog
            .apps
            .iter()
            .enumerate()
            .filter(|(_, a)| match self {
                Preset::Mixed => true,
                Preset::Predefined => a.family() == Family::Predefined,
                Preset::Chainlike => a.family() == Family::Chain,
                Preset::Planning => a.family() == Family::Planning,
            })
            .map(|(i, _)| (AppId(i), 1.0))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorkloadSpec {
    pub mix: Vec<(AppId, f64)>,
    /// Poisson arrival rate, jobs per second.
    pub lambda: f64,
    pub num_jobs: usize,
    pub seed: u64,
}

/// Generates `num_jobs` jobs with exponential inter-arrival times.
/// Deterministic in `spec.seed`.
pub fn generate_workload(catalog: &Catalog, templates: &[AppTemplate], spec: &WorkloadSpec) -> Result<Vec<JobInstance>> {
    if !(spec.lambda > 0.0 && spec.lambda.is_finite()) {
        return Err(Error::Config(alloc::format!("arrival rate must be positive, got {}", spec.lambda)));
    }
    let total: f64 = spec.mix.iter().map(|m| m.1).sum();
    if spec.mix.is_empty() || !(total > 0.0) || spec.mix.iter().any(|m| m.1 < 0.0) {
        return Err(Error::Config("application mix needs positive weights".into()));
    }
    for &(app, _) in &spec.mix {
        if app.0 >= catalog.apps.len() || app.0 >= templates.len() {
            return Err(Error::Config(alloc::format!("unknown application {}", app.0)));
        }
    }
    let gap = Exp::new(spec.lambda).map_err(|_| Error::Config("arrival rate".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut t = 0.0;
    let mut jobs = Vec::with_capacity(spec.num_jobs);
    for id in 0..spec.num_jobs {
        t += gap.sample(&mut rng);
        let mut pick = rng.random::<f64>() * total;
        let mut app = spec.mix[spec.mix.len() - 1].0;
        for &(a, w) in &spec.mix {
            if pick < w {
                app = a;
                break;
            }
            pick -= w;
        }
        let template = &templates[app.0];
        let truth = catalog.apps[app.0].sample_truth(template, &mut rng)?;
        jobs.push(JobInstance::new(id as u64, app, t, template, truth)?);
    }
    Ok(jobs)
}
