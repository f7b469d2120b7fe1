use alloc::vec::Vec;

use crate::model::{DurationDistribution, Interval};

/// Equal-frequency discretization into at most `max_bins` intervals of the
/// positive samples, plus a `[0, 0]` state when some samples are zero
/// (stages that did not run).
///
/// Bin `i` starts at the sample of rank `i * n / k`; when ties make a start
/// repeat, the bin starts at the next distinct value instead, and bins are
/// dropped once no distinct value is left. Probabilities
/// are the empirical frequencies of the final bins.
pub fn discretize(samples: &[f64], max_bins: usize) -> DurationDistribution {
    assert!(!samples.is_empty(), "discretize needs at least one sample");
    let max_bins = max_bins.max(1);
    let zeros = samples.iter().filter(|&&x| x <= 0.0).count();
    let mut pos: Vec<f64> = samples.iter().copied().filter(|&x| x > 0.0).collect();
    pos.sort_by(f64::total_cmp);

    let mut intervals = Vec::new();
    if zeros > 0 {
        intervals.push(Interval::NOT_EXECUTED);
    }
    if !pos.is_empty() {
        let n = pos.len();
        let k = max_bins.min(n);
        let mut starts: Vec<f64> = Vec::with_capacity(k);
        for i in 0..k {
            let mut v = pos[i * n / k];
            if let Some(&last) = starts.last() {
                if v <= last {
                    // tied rank: start at the next distinct value instead
                    match pos.iter().find(|&&x| x > last) {
                        Some(&x) => v = x,
                        None => break,
                    }
                }
            }
            starts.push(v);
        }
        let max = pos[n - 1];
        for (i, &lo) in starts.iter().enumerate() {
            let hi = starts.get(i + 1).copied().unwrap_or(max);
            intervals.push(Interval::new(lo, hi));
        }
    }

    let template =
        DurationDistribution::new(intervals.clone(), uniform(intervals.len())).expect("valid bins");
    let mut counts = alloc::vec![0usize; intervals.len()];
    for &x in samples {
        counts[template.state_of(x)] += 1;
    }
    // a point bin that only received its shared edge can end up empty
    let mut kept_iv = Vec::new();
    let mut kept_c = Vec::new();
    for (iv, c) in intervals.into_iter().zip(counts) {
        if c > 0 {
            kept_iv.push(iv);
            kept_c.push(c);
        }
    }
    let total = samples.len() as f64;
    let probs = kept_c.iter().map(|&c| c as f64 / total).collect();
    DurationDistribution::new(kept_iv, probs).expect("frequencies form a distribution")
}

fn uniform(n: usize) -> Vec<f64> {
    alloc::vec![1.0 / n as f64; n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn identical_samples_collapse_to_one_bin() {
        let d = discretize(&[4.0; 10], 6);
        assert_eq!(d.intervals(), &[Interval::point(4.0)]);
        assert_eq!(d.probs(), &[1.0]);
    }

    #[test]
    fn six_equal_frequency_bins() {
        let s: Vec<f64> = (1..=600).map(f64::from).collect();
        let d = discretize(&s, 6);
        assert_eq!(d.len(), 6);
        // quantile oracle: bin i holds ranks i*100 .. i*100+99
        for (i, iv) in d.intervals().iter().enumerate() {
            assert_eq!(iv.lo, (i * 100 + 1) as f64);
            let members = s.iter().filter(|&&x| d.state_of(x) == i).count();
            assert_eq!(members, 100);
        }
        assert!(d.probs().iter().all(|&p| (p - 1.0 / 6.0).abs() < 1e-12));
    }

    #[test]
    fn zero_samples_get_not_executed_state() {
        let d = discretize(&[0.0, 0.0, 5.0, 5.0], 6);
        assert_eq!(d.intervals(), &[Interval::NOT_EXECUTED, Interval::point(5.0)]);
        assert_eq!(d.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn heavy_ties_merge_bins() {
        let mut s = vec![1.0; 90];
        s.extend((0..10).map(|i| 2.0 + i as f64));
        let d = discretize(&s, 6);
        assert!(d.len() <= 6);
        let total: f64 = d.probs().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(d.probs()[0], 0.9);
    }
}
