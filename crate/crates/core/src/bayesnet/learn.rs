//! Score-based structure search.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::ln;

/// Greedy BIC hill climbing from the empty graph. Edges may only point
/// forward in `order` (the application's topological order), so edge
/// reversals are never admissible and only additions and removals are
/// explored.
#[derive(Clone, Debug)]
pub struct StructureSearch {
    pub max_parents: usize,
    pub max_steps: usize,
}

impl Default for StructureSearch {
    fn default() -> Self {
        StructureSearch { max_parents: 3, max_steps: 200 }
    }
}

/// BIC of one family: log-likelihood of `v` given `parents` minus
/// `ln(N)/2` per free parameter.
pub fn bic_score(v: usize, parents: &[usize], cards: &[usize], samples: &[Vec<usize>]) -> f64 {
    let rows: usize = parents.iter().map(|&p| cards[p]).product();
    let mut counts = vec![0u32; rows * cards[v]];
    for s in samples {
        let mut row = 0usize;
        for &p in parents {
            row = row * cards[p] + s[p];
        }
        counts[row * cards[v] + s[v]] += 1;
    }
    let mut ll = 0.0;
    for row in counts.chunks(cards[v]) {
        let total: u32 = row.iter().sum();
        if total == 0 {
            continue;
        }
        let t = total as f64;
        for &c in row.iter().filter(|&&c| c > 0) {
            let c = c as f64;
            ll += c * ln(c / t);
        }
    }
    let params = (rows * (cards[v] - 1)) as f64;
    ll - 0.5 * ln(samples.len().max(1) as f64) * params
}

/// Learns a parent graph over `cards.len()` variables. Deterministic given
/// samples and order.
pub fn learn_structure(
    cards: &[usize],
    samples: &[Vec<usize>],
    order: &[usize],
    search: &StructureSearch,
) -> Vec<Vec<usize>> {
    let n = cards.len();
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    if n < 2 || samples.is_empty() {
        return parents;
    }
    let mut rank = vec![0usize; n];
    for (i, &v) in order.iter().enumerate() {
        rank[v] = i;
    }
    let mut cache: BTreeMap<(usize, Vec<usize>), f64> = BTreeMap::new();
    let mut family = |v: usize, ps: &[usize]| -> f64 {
        let mut key = ps.to_vec();
        key.sort_unstable();
        *cache.entry((v, key)).or_insert_with(|| bic_score(v, ps, cards, samples))
    };
    let mut current: Vec<f64> = (0..n).map(|v| family(v, &[])).collect();
    for _ in 0..search.max_steps {
        let mut best: Option<(f64, usize, Vec<usize>)> = None;
        for v in 0..n {
            for u in 0..n {
                if u == v || rank[u] >= rank[v] {
                    continue;
                }
                let mut ps = parents[v].clone();
                if let Some(pos) = ps.iter().position(|&p| p == u) {
                    ps.remove(pos);
                } else if ps.len() < search.max_parents {
                    ps.push(u);
                    ps.sort_unstable();
                } else {
                    continue;
                }
                let delta = family(v, &ps) - current[v];
                if delta > 1e-9 && best.as_ref().is_none_or(|b| delta > b.0) {
                    best = Some((delta, v, ps));
                }
            }
        }
        let Some((_, v, ps)) = best else { break };
        current[v] = family(v, &ps);
        parents[v] = ps;
    }
    parents
}
