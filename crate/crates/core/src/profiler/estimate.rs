use alloc::collections::BTreeMap;
use alloc::rc::Rc;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{longest_path, ApplicationProfile, DynamicProfile, StageNetwork};
use crate::bayesnet::{mutual_information, Evidence};
use crate::error::Result;
use crate::model::{AppId, AppTemplate, JobView, StageKind, StageState, TaskState};

/// Monte Carlo draws used to estimate an unexpanded dynamic stage.
pub const DYNAMIC_DRAWS: usize = 256;

/// Where stage duration estimates come from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EstimateMode {
    /// Network posteriors given the job's evidence.
    #[default]
    Posterior,
    /// Historical per-stage means, ignoring correlations.
    Prior,
}

/// Current LLM load, as the slowdown `l(b) / l(1)` at the cluster's
/// average batch size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BatchContext {
    pub slowdown: f64,
}

impl Default for BatchContext {
    fn default() -> Self {
        BatchContext { slowdown: 1.0 }
    }
}

/// Expected remaining time of a job and an interval bracketing it.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RemainingEstimate {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

type Posteriors = Rc<Vec<Vec<f64>>>;
type MiTable = BTreeMap<(usize, Vec<usize>), f64>;

/// Lookup tables for network queries and dynamic-stage expectations,
/// shared by every job of one simulation. Profiles are immutable during a
/// run, so entries never go stale.
#[derive(Debug, Default)]
pub struct InferenceCache {
    posteriors: BTreeMap<AppId, BTreeMap<Evidence, Posteriors>>,
    mutual_info: BTreeMap<AppId, BTreeMap<Evidence, MiTable>>,
    dynamic: BTreeMap<(AppId, usize, u64), (f64, f64)>,
    pub hits: u64,
    pub misses: u64,
}

impl InferenceCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Posterior marginal of every network variable; observed variables
    /// get a point mass on their observed state.
    pub fn posteriors(&mut self, app: AppId, nw: &StageNetwork, evidence: &Evidence) -> Result<Rc<Vec<Vec<f64>>>> {
        let per_app = self.posteriors.entry(app).or_default();
        if let Some(p) = per_app.get(evidence) {
            self.hits += 1;
            return Ok(p.clone());
        }
        self.misses += 1;
        let cards = nw.net.cards();
        let mut out = Vec::with_capacity(cards.len());
        for v in 0..cards.len() {
            match evidence.get(v) {
                Some(s) => {
                    let mut p = vec![0.0; cards[v]];
                    p[s] = 1.0;
                    out.push(p);
                }
                None => out.push(nw.net.marginal(v, evidence)?),
            }
        }
        let out = Rc::new(out);
        per_app.insert(evidence.clone(), out.clone());
        Ok(out)
    }

    pub fn mutual_information(
        &mut self,
        app: AppId,
        nw: &StageNetwork,
        targets: &[usize],
        source: usize,
        evidence: &Evidence,
    ) -> Result<f64> {
        let per_ev = self.mutual_info.entry(app).or_default();
        let key = (source, targets.to_vec());
        if let Some(m) = per_ev.get(evidence).and_then(|t| t.get(&key)) {
            self.hits += 1;
            return Ok(*m);
        }
        self.misses += 1;
        let mi = mutual_information(&nw.net, targets, source, evidence)?;
        per_ev.entry(evidence.clone()).or_default().insert(key, mi);
        Ok(mi)
    }

    /// Expected longest path through an unexpanded dynamic stage and the
    /// longest path with every candidate present at its upper edge.
    pub fn dynamic_expectation(&mut self, app: AppId, dp: &DynamicProfile, slowdown: f64) -> (f64, f64) {
        let key = (app, dp.stage, slowdown.to_bits());
        if let Some(&v) = self.dynamic.get(&key) {
            self.hits += 1;
            return v;
        }
        self.misses += 1;
        let v = dynamic_monte_carlo(app, dp, slowdown);
        self.dynamic.insert(key, v);
        v
    }

    pub fn clear(&mut self) {
        *self = Self::default();
    }
}

fn dynamic_monte_carlo(app: AppId, dp: &DynamicProfile, slowdown: f64) -> (f64, f64) {
    let spec = &dp.spec;
    let m = spec.candidates.len();
    let scale = |i: usize| if spec.candidates[i].kind == StageKind::Llm { slowdown } else { 1.0 };
    let means: Vec<f64> = (0..m).map(|i| dp.candidate_dists[i].mean() * scale(i)).collect();
    let highs: Vec<f64> = (0..m).map(|i| dp.candidate_dists[i].support().1 * scale(i)).collect();
    // edge existence conditional on both endpoints existing
    let cond: Vec<f64> = spec
        .edges
        .iter()
        .zip(&spec.edge_probs)
        .map(|(&(a, b), &p)| {
            let both = spec.node_probs[a] * spec.node_probs[b];
            if both > 0.0 { (p / both).min(1.0) } else { 0.0 }
        })
        .collect();
    let seed = ((app.0 as u64) << 32) ^ dp.stage as u64 ^ 0x9e37_79b9_7f4a_7c15;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    let mut nodes = Vec::with_capacity(m);
    let mut edges = Vec::with_capacity(spec.edges.len());
    for _ in 0..DYNAMIC_DRAWS {
        nodes.clear();
        edges.clear();
        for i in 0..m {
            if rng.random::<f64>() < spec.node_probs[i] {
                nodes.push(i);
            }
        }
        for (k, &(a, b)) in spec.edges.iter().enumerate() {
            if nodes.contains(&a) && nodes.contains(&b) && rng.random::<f64>() < cond[k] {
                edges.push((a, b));
            }
        }
        total += longest_path(&nodes, &edges, &means);
    }
    let all: Vec<usize> = (0..m).collect();
    (total / DYNAMIC_DRAWS as f64, longest_path(&all, &spec.edges, &highs))
}

/// Expected critical path over the job's unfinished revealed stages.
///
/// Each stage contributes its per-task mean (posterior given `evidence`
/// in [`EstimateMode::Posterior`], historical otherwise; the observed mean
/// once some of its tasks finished). LLM stages are scaled by the current
/// batch slowdown, fully launched stages subtract the progress of their
/// least advanced task, and unexpanded dynamic stages contribute their
/// Monte Carlo expectation. `lo` and `hi` run the same longest-path pass
/// over the support edges.
pub fn estimated_remaining_duration(
    job: &JobView,
    template: &AppTemplate,
    profile: &ApplicationProfile,
    evidence: &Evidence,
    batch: &BatchContext,
    mode: EstimateMode,
    cache: &mut InferenceCache,
) -> Result<RemainingEstimate> {
    if job.is_done() || job.all_finished() {
        return Ok(RemainingEstimate::default());
    }
    let posts = match (mode, &profile.network) {
        (EstimateMode::Posterior, Some(nw)) => Some((nw, cache.posteriors(job.app, nw, evidence)?)),
        _ => None,
    };
    let order = job.topological_stages()?;
    let n = job.stages.len();
    let mut fm = vec![0.0f64; n];
    let mut fl = vec![0.0f64; n];
    let mut fh = vec![0.0f64; n];
    let mut best = RemainingEstimate::default();
    for i in order {
        let s = &job.stages[i];
        let (m, lo, hi) = if s.state.is_finished() {
            (0.0, 0.0, 0.0)
        } else if s.kind == StageKind::Dynamic {
            let id = s.template_id().expect("dynamic stages come from the template");
            match profile.dynamic_profile(id) {
                Some(dp) => {
                    let (mean, high) = cache.dynamic_expectation(job.app, dp, batch.slowdown);
                    (mean, 0.0, high)
                }
                None => (0.0, 0.0, 0.0),
            }
        } else {
            let (mut m, mut lo, mut hi) = if let Some(o) = s.observed_mean() {
                (o, o, o)
            } else {
                let dist = profile.job_stage_dist(template, i);
                let var = posts.as_ref().and_then(|(nw, p)| {
                    s.template_id().and_then(|t| nw.var_of(t)).map(|v| (v, p.clone()))
                });
                match (dist, var) {
                    (Some(d), Some((v, p))) => {
                        let (a, b) = d.support_under(&p[v]);
                        (d.mean_under(&p[v]), a, b)
                    }
                    (Some(d), None) => {
                        let (a, b) = d.support();
                        (d.mean(), a, b)
                    }
                    (None, _) => (0.0, 0.0, 0.0),
                }
            };
            if s.state == StageState::Running && s.unlaunched() == 0 {
                let least = s
                    .tasks
                    .iter()
                    .filter(|t| t.state == TaskState::Running)
                    .map(|t| t.progress)
                    .fold(f64::INFINITY, f64::min);
                if least.is_finite() {
                    m = (m - least).max(0.0);
                    lo = (lo - least).max(0.0);
                    hi = (hi - least).max(0.0);
                }
            }
            let k = if s.kind == StageKind::Llm { batch.slowdown } else { 1.0 };
            (m * k, lo * k, hi * k)
        };
        let (mut sm, mut sl, mut sh) = (0.0f64, 0.0f64, 0.0f64);
        for &p in &s.preds {
            sm = sm.max(fm[p]);
            sl = sl.max(fl[p]);
            sh = sh.max(fh[p]);
        }
        fm[i] = sm + m;
        fl[i] = sl + lo;
        fh[i] = sh + hi;
        best.mean = best.mean.max(fm[i]);
        best.lo = best.lo.max(fl[i]);
        best.hi = best.hi.max(fh[i]);
    }
    Ok(best)
}
