//! Discrete Bayesian networks over stage-duration variables.
//!
//! Variables are plain indices `0..n`; the profiler binds them to stages.
//! Exact inference is by variable elimination after pruning variables that
//! are not ancestors of the query or the evidence.

mod factor;
mod info;
mod learn;

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use factor::Factor;

pub use info::{entropy, mutual_information, mutual_information_from_joint};
pub use learn::{bic_score, learn_structure, StructureSearch};

/// Additive smoothing applied to every CPT row.
pub const LAPLACE_ALPHA: f64 = 1.0;

/// Observed state per variable.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Evidence(BTreeMap<usize, usize>);

impl Evidence {
    pub fn new() -> Self {
        Evidence(BTreeMap::new())
    }

    pub fn insert(&mut self, var: usize, state: usize) -> Option<usize> {
        self.0.insert(var, state)
    }

    pub fn remove(&mut self, var: usize) -> Option<usize> {
        self.0.remove(&var)
    }

    pub fn get(&self, var: usize) -> Option<usize> {
        self.0.get(&var).copied()
    }

    pub fn contains(&self, var: usize) -> bool {
        self.0.contains_key(&var)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().map(|(&k, &v)| (k, v))
    }
}

impl FromIterator<(usize, usize)> for Evidence {
    fn from_iter<I: IntoIterator<Item = (usize, usize)>>(iter: I) -> Self {
        Evidence(iter.into_iter().collect())
    }
}

/// Joint distribution over `vars`, row-major with the first variable
/// varying slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct Joint {
    pub vars: Vec<usize>,
    pub cards: Vec<usize>,
    pub probs: Vec<f64>,
}

impl Joint {
    /// Marginal over the variables at the given positions of `self.vars`,
    /// in that order.
    pub fn marginal(&self, positions: &[usize]) -> Joint {
        let cards: Vec<usize> = positions.iter().map(|&p| self.cards[p]).collect();
        let total: usize = cards.iter().product();
        let mut probs = vec![0.0; total];
        let mut idx = vec![0usize; self.vars.len()];
        for &p in &self.probs {
            let mut o = 0usize;
            for &pos in positions {
                o = o * self.cards[pos] + idx[pos];
            }
            probs[o] += p;
            for d in (0..idx.len()).rev() {
                idx[d] += 1;
                if idx[d] < self.cards[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        Joint { vars: positions.iter().map(|&p| self.vars[p]).collect(), cards, probs }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteBayesNet {
    cards: Vec<usize>,
    parents: Vec<Vec<usize>>,
    /// Per variable: rows indexed by parent configuration (last parent
    /// fastest), `card` entries per row.
    cpts: Vec<Vec<f64>>,
}

impl DiscreteBayesNet {
    pub fn new(cards: Vec<usize>, parents: Vec<Vec<usize>>, cpts: Vec<Vec<f64>>) -> Result<Self> {
        let n = cards.len();
        if parents.len() != n || cpts.len() != n {
            return Err(Error::Structural("network arrays disagree in length".into()));
        }
        if cards.contains(&0) {
            return Err(Error::Structural("variable with no states".into()));
        }
        for (v, ps) in parents.iter().enumerate() {
            if ps.iter().any(|&p| p >= n || p == v) {
                return Err(Error::Structural(alloc::format!("bad parent list for variable {v}")));
            }
            let rows: usize = ps.iter().map(|&p| cards[p]).product();
            if cpts[v].len() != rows * cards[v] {
                return Err(Error::Structural(alloc::format!("CPT of variable {v} has wrong size")));
            }
            for row in cpts[v].chunks(cards[v]) {
                let s: f64 = row.iter().sum();
                if row.iter().any(|&p| !(p >= 0.0)) || (s - 1.0).abs() > 1e-9 {
                    return Err(Error::Structural(alloc::format!(
                        "CPT row of variable {v} is not a distribution"
                    )));
                }
            }
        }
        if topological_order(&parents).is_none() {
            return Err(Error::Structural("parent graph has a cycle".into()));
        }
        Ok(DiscreteBayesNet { cards, parents, cpts })
    }

    /// Maximum-likelihood CPTs with Laplace smoothing for a fixed structure.
    pub fn fit_cpts(cards: Vec<usize>, parents: Vec<Vec<usize>>, samples: &[Vec<usize>]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Training("no samples to fit".into()));
        }
        let n = cards.len();
        for s in samples {
            if s.len() != n {
                return Err(Error::Training("sample width differs from variable count".into()));
            }
            if s.iter().zip(&cards).any(|(&x, &c)| x >= c) {
                return Err(Error::Training("sample state outside variable domain".into()));
            }
        }
        let mut cpts = Vec::with_capacity(n);
        for v in 0..n {
            let ps = &parents[v];
            let rows: usize = ps.iter().map(|&p| cards[p]).product();
            let mut counts = vec![0.0f64; rows * cards[v]];
            for s in samples {
                let mut row = 0usize;
                for &p in ps {
                    row = row * cards[p] + s[p];
                }
                counts[row * cards[v] + s[v]] += 1.0;
            }
            for row in counts.chunks_mut(cards[v]) {
                let total: f64 = row.iter().sum::<f64>() + LAPLACE_ALPHA * cards[v] as f64;
                for c in row.iter_mut() {
                    *c = (*c + LAPLACE_ALPHA) / total;
                }
            }
            cpts.push(counts);
        }
        DiscreteBayesNet::new(cards, parents, cpts)
    }

    pub fn len(&self) -> usize {
        self.cards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cards.is_empty()
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn cpt(&self, v: usize) -> &[f64] {
        &self.cpts[v]
    }

    /// `P(v = state | parents = config)` with parent states in parent order.
    pub fn conditional(&self, v: usize, parent_states: &[usize], state: usize) -> f64 {
        let mut row = 0usize;
        for (&p, &s) in self.parents[v].iter().zip(parent_states) {
            row = row * self.cards[p] + s;
        }
        self.cpts[v][row * self.cards[v] + state]
    }

    fn children(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&c| self.parents[c].contains(&v))
    }

    /// Every variable reachable from `u` along directed edges.
    pub fn correlated_set(&self, u: usize) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![u];
        while let Some(x) = stack.pop() {
            for c in self.children(x) {
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        seen[u] = false;
        (0..self.len()).filter(|&v| seen[v]).collect()
    }

    /// Exact posterior joint of `targets` given `evidence`.
    pub fn joint_query(&self, targets: &[usize], evidence: &Evidence) -> Result<Joint> {
        if targets.is_empty() {
            return Err(Error::InconsistentEvidence("empty query".into()));
        }
        for (i, &t) in targets.iter().enumerate() {
            if t >= self.len() || targets[..i].contains(&t) {
                return Err(Error::InconsistentEvidence(alloc::format!("bad target {t}")));
            }
            if evidence.contains(t) {
                return Err(Error::InconsistentEvidence(alloc::format!(
                    "variable {t} is both target and evidence"
                )));
            }
        }
        for (v, s) in evidence.iter() {
            if v >= self.len() || s >= self.cards[v] {
                return Err(Error::InconsistentEvidence(alloc::format!("bad observation {v}={s}")));
            }
        }
        // only ancestors of the query and the evidence matter
        let mut relevant = vec![false; self.len()];
        let mut stack: Vec<usize> = targets.iter().copied().chain(evidence.iter().map(|(v, _)| v)).collect();
        while let Some(x) = stack.pop() {
            if !relevant[x] {
                relevant[x] = true;
                stack.extend(self.parents[x].iter().copied());
            }
        }
        let mut factors = Vec::new();
        for v in (0..self.len()).filter(|&v| relevant[v]) {
            let mut vars = self.parents[v].clone();
            vars.push(v);
            let cards = vars.iter().map(|&x| self.cards[x]).collect();
            let mut f = Factor { vars, cards, values: self.cpts[v].clone() };
            for (ev, es) in evidence.iter() {
                if f.vars.contains(&ev) {
                    f = f.reduce(ev, es);
                }
            }
            factors.push(f);
        }
        let joint = factor::eliminate(factors, targets, &self.cards).permute(targets);
        let z: f64 = joint.values.iter().sum();
        if !(z > 0.0) {
            return Err(Error::InconsistentEvidence("evidence has zero probability".into()));
        }
        Ok(Joint {
            vars: joint.vars,
            cards: joint.cards,
            probs: joint.values.into_iter().map(|p| p / z).collect(),
        })
    }

    /// Posterior marginal of a single variable.
    pub fn marginal(&self, v: usize, evidence: &Evidence) -> Result<Vec<f64>> {
        Ok(self.joint_query(&[v], evidence)?.probs)
    }
}

/// Kahn order of a parent graph, `None` on a cycle.
pub(crate) fn topological_order(parents: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = parents.len();
    let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut order = Vec::with_capacity(n);
    let mut ready: Vec<usize> = (0..n).rev().filter(|&v| indeg[v] == 0).collect();
    while let Some(v) = ready.pop() {
        order.push(v);
        for c in 0..n {
            if parents[c].contains(&v) {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.push(c);
                }
            }
        }
    }
    (order.len() == n).then_some(order)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn copy_net(states: usize) -> DiscreteBayesNet {
        let prior = vec![1.0 / states as f64; states];
        let mut copy = vec![0.0; states * states];
        for i in 0..states {
            copy[i * states + i] = 1.0;
        }
        DiscreteBayesNet::new(vec![states, states], vec![vec![], vec![0]], vec![prior, copy]).unwrap()
    }

    #[test]
    fn laplace_smoothing_on_constant_samples() {
        let n = 50;
        let samples = vec![vec![0, 0]; n];
        let bn = DiscreteBayesNet::fit_cpts(vec![2, 2], vec![vec![], vec![0]], &samples).unwrap();
        let expect = (n as f64 + 1.0) / (n as f64 + 2.0);
        assert!((bn.conditional(1, &[0], 0) - expect).abs() < 1e-12);
        // unseen parent row stays uniform
        assert_eq!(bn.conditional(1, &[1], 0), 0.5);
    }

    #[test]
    fn fitting_needs_samples() {
        assert!(matches!(
            DiscreteBayesNet::fit_cpts(vec![2], vec![vec![]], &[]),
            Err(Error::Training(_))
        ));
    }

    #[test]
    fn rejects_cycles() {
        let r = DiscreteBayesNet::new(
            vec![2, 2],
            vec![vec![1], vec![0]],
            vec![vec![0.5; 4], vec![0.5; 4]],
        );
        assert!(r.is_err());
    }

    #[test]
    fn prior_of_root_and_copy_evidence() {
        let bn = copy_net(3);
        let p = bn.marginal(0, &Evidence::new()).unwrap();
        assert!(p.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-12));
        let ev: Evidence = [(0, 2)].into_iter().collect();
        assert_eq!(bn.marginal(1, &ev).unwrap(), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn zero_probability_evidence_is_inconsistent() {
        let bn = copy_net(2);
        let ev: Evidence = [(0, 0)].into_iter().collect();
        let mut ev2 = ev.clone();
        ev2.insert(1, 1);
        assert!(bn.joint_query(&[0], &[(1, 1)].into_iter().collect()).is_ok());
        assert!(bn.joint_query(&[1], &ev).is_ok());
        // target 0 is in the evidence
        assert!(bn.joint_query(&[0], &ev2).is_err());
        let bad: Evidence = [(0, 0), (1, 1)].into_iter().collect();
        let three = DiscreteBayesNet::new(
            vec![2, 2, 2],
            vec![vec![], vec![0], vec![]],
            vec![vec![0.5, 0.5], vec![1.0, 0.0, 0.0, 1.0], vec![0.5, 0.5]],
        )
        .unwrap();
        assert!(matches!(three.joint_query(&[2], &bad), Err(Error::InconsistentEvidence(_))));
    }

    #[test]
    fn reachability_defines_correlation() {
        let bn = DiscreteBayesNet::new(
            vec![2, 2, 2, 2],
            vec![vec![], vec![0], vec![1], vec![]],
            vec![vec![0.5; 2], vec![0.5; 4], vec![0.5; 4], vec![0.5; 2]],
        )
        .unwrap();
        assert_eq!(bn.correlated_set(0), vec![1, 2]);
        assert_eq!(bn.correlated_set(2), Vec::<usize>::new());
        assert!(bn.correlated_set(3).is_empty());
    }

    #[test]
    fn joint_marginalization() {
        let j = Joint { vars: vec![4, 7], cards: vec![2, 3], probs: vec![0.1, 0.2, 0.1, 0.3, 0.2, 0.1] };
        let m = j.marginal(&[1]);
        assert_eq!(m.vars, vec![7]);
        for (a, b) in m.probs.iter().zip([0.4, 0.4, 0.2]) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
