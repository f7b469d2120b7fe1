use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probabilities below this are treated as absent when measuring support.
pub const SUPPORT_EPS: f64 = 1e-12;

/// Closed interval of durations in seconds. `[0, 0]` is the "not executed"
/// state of a stage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const NOT_EXECUTED: Interval = Interval { lo: 0.0, hi: 0.0 };

    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn is_not_executed(&self) -> bool {
        self.lo == 0.0 && self.hi == 0.0
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// A discretized duration law: `k` ordered intervals with one probability
/// and one representative value each.
///
/// Adjacent intervals may share a boundary (`[a, b]`, `[b, c]`); membership
/// is half-open on the right except for the last interval and for point
/// intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DurationDistribution {
    intervals: Vec<Interval>,
    probs: Vec<f64>,
    representative: Vec<f64>,
}

impl DurationDistribution {
    /// Builds a distribution with midpoint representatives.
    pub fn new(intervals: Vec<Interval>, probs: Vec<f64>) -> Result<Self> {
        let representative = intervals.iter().map(Interval::midpoint).collect();
        Self::with_representatives(intervals, probs, representative)
    }

    pub fn with_representatives(
        intervals: Vec<Interval>,
        probs: Vec<f64>,
        representative: Vec<f64>,
    ) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::Distribution("no intervals".into()));
        }
        if intervals.len() != probs.len() || intervals.len() != representative.len() {
            return Err(Error::Distribution("length mismatch".into()));
        }
        for iv in &intervals {
            if !(iv.lo.is_finite() && iv.hi.is_finite()) || iv.lo < 0.0 || iv.lo > iv.hi {
                return Err(Error::Distribution(alloc::format!("bad interval {iv}")));
            }
        }
        for w in intervals.windows(2) {
            let (a, b) = (w[0], w[1]);
            // strictly increasing lower edges, no overlap beyond a shared edge
            if !(a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi)) || a.hi > b.lo {
                return Err(Error::Distribution(alloc::format!(
                    "intervals {a} and {b} are not increasing"
                )));
            }
        }
        let mut total = 0.0;
        for &p in &probs {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::Distribution("negative probability".into()));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Distribution(alloc::format!("probabilities sum to {total}")));
        }
        Ok(DurationDistribution { intervals, probs, representative })
    }

    pub fn point(v: f64) -> Self {
        DurationDistribution {
            intervals: alloc::vec![Interval::point(v)],
            probs: alloc::vec![1.0],
            representative: alloc::vec![v],
        }
    }

    pub fn not_executed() -> Self {
        Self::point(0.0)
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn representatives(&self) -> &[f64] {
        &self.representative
    }

    pub fn has_not_executed_state(&self) -> bool {
        self.intervals[0].is_not_executed()
    }

    pub fn mean(&self) -> f64 {
        self.mean_under(&self.probs)
    }

    /// Mean of the representatives weighted by an alternative probability
    /// vector over the same states (e.g. a posterior).
    pub fn mean_under(&self, probs: &[f64]) -> f64 {
        debug_assert_eq!(probs.len(), self.len());
        probs.iter().zip(&self.representative).map(|(p, r)| p * r).sum()
    }

    /// Lowest and highest edges among states with non-negligible mass.
    pub fn support_under(&self, probs: &[f64]) -> (f64, f64) {
        let first = probs.iter().position(|&p| p > SUPPORT_EPS);
        let last = probs.iter().rposition(|&p| p > SUPPORT_EPS);
        match (first, last) {
            (Some(a), Some(b)) => (self.intervals[a].lo, self.intervals[b].hi),
            _ => (0.0, 0.0),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        self.support_under(&self.probs)
    }

    /// Width of the support, see [`Self::support_under`].
    pub fn range_under(&self, probs: &[f64]) -> f64 {
        let (lo, hi) = self.support_under(probs);
        hi - lo
    }

    pub fn range(&self) -> f64 {
        self.range_under(&self.probs)
    }

    /// Index of the state an observed duration falls into. Values outside
    /// every interval clamp to the nearest one; a positive duration never
    /// maps to the not-executed state unless that is the only state.
    pub fn state_of(&self, x: f64) -> usize {
        let n = self.intervals.len();
        if x <= 0.0 && self.has_not_executed_state() {
            return 0;
        }
        let start = if self.has_not_executed_state() && n > 1 { 1 } else { 0 };
        for i in start..n {
            let iv = self.intervals[i];
            let last = i + 1 == n;
            if x >= iv.lo && (x < iv.hi || ((last || iv.lo == iv.hi) && x <= iv.hi)) {
                return i;
            }
        }
        let mut best = start;
        let mut best_d = f64::INFINITY;
        for i in start..n {
            let iv = self.intervals[i];
            let d = if x < iv.lo { iv.lo - x } else { x - iv.hi };
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}
