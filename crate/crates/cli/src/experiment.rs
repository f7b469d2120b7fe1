//! Profile training, single runs, sweeps and ablations.

use anyhow::{bail, Result};
use llmsched_core::bayesnet::StructureSearch;
use llmsched_core::model::{AppId, AppTemplate, JobInstance};
use llmsched_core::profiler::{CalibrationProfile, EstimateMode, ProfileSet};
use llmsched_core::sched::{Policy, SchedulerConfig};
use llmsched_core::sim::{ClusterConfig, RunOutcome, Simulation};
use llmsched_core::workload::{collect_trace, generate_workload, Catalog, Preset, TraceRecord, WorkloadSpec};
use rayon::prelude::*;

use crate::WallClock;

/// Historical jobs recorded per application when no trace is supplied.
pub const HISTORY_JOBS_PER_APP: usize = 300;
/// Seed of the synthetic history; disjoint from run seeds in practice.
pub const HISTORY_SEED: u64 = 0x5eed_0000_1157;

/// Ground-truth traces of `per_app` jobs of every catalog application.
pub fn history(catalog: &Catalog, templates: &[AppTemplate], per_app: usize, seed: u64) -> Result<Vec<TraceRecord>> {
    let names = catalog.names();
    let mut out = Vec::new();
    for a in 0..catalog.apps.len() {
        let spec = WorkloadSpec { mix: vec![(AppId(a), 1.0)], lambda: 1.0, num_jobs: per_app, seed: seed ^ a as u64 };
        let jobs = generate_workload(catalog, templates, &spec)?;
        out.extend(collect_trace(&jobs, &names));
    }
    Ok(out)
}

/// Catalog, templates and trained profiles shared by every run.
pub struct Lab {
    pub catalog: Catalog,
    pub templates: Vec<AppTemplate>,
    pub profiles: ProfileSet,
}

impl Lab {
    pub fn new(catalog: Catalog, profiles: ProfileSet) -> Result<Self> {
        let templates = catalog.templates()?;
        if profiles.apps.len() != templates.len() {
            bail!("profiles cover {} applications, catalog has {}", profiles.apps.len(), templates.len());
        }
        for (p, t) in profiles.apps.iter().zip(&templates) {
            if p.app != t.name {
                bail!("profile {} does not match application {}", p.app, t.name);
            }
        }
        Ok(Lab { catalog, templates, profiles })
    }

    /// Trains profiles on a synthetic history.
    pub fn trained(catalog: Catalog, calibration: CalibrationProfile) -> Result<Self> {
        let templates = catalog.templates()?;
        let traces = history(&catalog, &templates, HISTORY_JOBS_PER_APP, HISTORY_SEED)?;
        let profiles = ProfileSet::train(&templates, &traces, calibration, &StructureSearch::default())?;
        Ok(Lab { catalog, templates, profiles })
    }

    pub fn workload(&self, preset: Preset, lambda: f64, num_jobs: usize, seed: u64) -> Result<Vec<JobInstance>> {
        let spec = WorkloadSpec { mix: preset.mix(&self.catalog), lambda, num_jobs, seed };
        Ok(generate_workload(&self.catalog, &self.templates, &spec)?)
    }

    /// Runs one cell with workload and scheduler both seeded by `seed`.
    pub fn run(&self, cell: &Cell, seed: u64) -> Result<RunOutcome> {
        let jobs = self.workload(cell.preset, cell.lambda, cell.num_jobs, seed)?;
        let sched = SchedulerConfig { seed, ..cell.scheduler };
        let mut sim = Simulation::new(&cell.cluster, &self.templates, &self.profiles, jobs, sched)?
            .with_clock(Box::new(WallClock::default()));
        if cell.dump_scores {
            sim = sim.log_scores();
        }
        Ok(sim.run()?)
    }

    /// Average JCT of each seed, in seed order.
    pub fn mean_jcts(&self, cell: &Cell, seeds: &[u64]) -> Result<Vec<f64>> {
        seeds.par_iter().map(|&s| Ok(self.run(cell, s)?.metrics.average_jct)).collect()
    }
}

/// One experiment configuration.
#[derive(Clone, Debug)]
pub struct Cell {
    pub preset: Preset,
    pub scheduler: SchedulerConfig,
    pub cluster: ClusterConfig,
    pub lambda: f64,
    pub num_jobs: usize,
    pub dump_scores: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    Epsilon,
    Ratio,
    Lambda,
}

impl SweepParam {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "epsilon" => SweepParam::Epsilon,
            "ratio" => SweepParam::Ratio,
            "lambda" => SweepParam::Lambda,
            _ => bail!("unknown sweep parameter {s:?}; expected epsilon, ratio or lambda"),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Epsilon => "epsilon",
            SweepParam::Ratio => "ratio",
            SweepParam::Lambda => "lambda",
        }
    }

    fn apply(self, cell: &Cell, v: f64) -> Cell {
        let mut c = cell.clone();
        match self {
            SweepParam::Epsilon => c.scheduler.epsilon = v,
            SweepParam::Ratio => c.scheduler.ratio = v,
            SweepParam::Lambda => c.lambda = v,
        }
        c
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub mean_jct: f64,
    /// Mean over seeds of JCT divided by the best cell's mean JCT.
    pub normalized: f64,
    pub stddev: f64,
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (m, var.sqrt())
}

pub fn sweep(lab: &Lab, base: &Cell, param: SweepParam, values: &[f64], seeds: &[u64]) -> Result<Vec<SweepRow>> {
    if values.is_empty() || seeds.is_empty() {
        bail!("a sweep needs at least one value and one seed");
    }
    let runs = values
        .iter()
        .map(|&v| lab.mean_jcts(&param.apply(base, v), seeds))
        .collect::<Result<Vec<_>>>()?;
    let best = runs.iter().map(|r| mean_std(r).0).fold(f64::INFINITY, f64::min);
    Ok(values
        .iter()
        .zip(&runs)
        .map(|(&value, r)| {
            let norm: Vec<f64> = r.iter().map(|x| x / best).collect();
            let (normalized, stddev) = mean_std(&norm);
            SweepRow { value, mean_jct: mean_std(r).0, normalized, stddev }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct AblationRow {
    pub variant: &'static str,
    pub mean_jct: f64,
    pub normalized: f64,
}

/// Full LLMSched against static estimates and against pure exploitation.
pub fn ablation_cells(base: &Cell) -> [(&'static str, Cell); 3] {
    let mut full = base.clone();
    full.scheduler.policy = Policy::LlmSched;
    full.scheduler.mode = EstimateMode::Posterior;
    let mut no_bn = full.clone();
    no_bn.scheduler.mode = EstimateMode::Prior;
    let mut no_unc = full.clone();
    no_unc.scheduler.epsilon = 0.0;
    [("llmsched", full), ("without-bn", no_bn), ("without-uncertainty", no_unc)]
}

pub fn ablate(lab: &Lab, base: &Cell, seeds: &[u64]) -> Result<Vec<AblationRow>> {
    let cells = ablation_cells(base);
    let means = cells
        .iter()
        .map(|(_, c)| Ok(mean_std(&lab.mean_jcts(c, seeds)?).0))
        .collect::<Result<Vec<_>>>()?;
    Ok(cells
        .iter()
        .zip(&means)
        .map(|((name, _), &m)| AblationRow { variant: name, mean_jct: m, normalized: m / means[0] })
        .collect())
}
