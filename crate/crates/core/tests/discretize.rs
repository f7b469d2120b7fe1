use llmsched_core::profiler::{discretize, MAX_BINS};
use proptest::prelude::*;

proptest! {
    #[test]
    fn bins_cover_every_sample(
        mut xs in prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..50.0, Just(3.0)], 1..200),
    ) {
        let d = discretize(&xs, MAX_BINS);
        let zeros = xs.contains(&0.0);
        prop_assert!(d.len() <= MAX_BINS + usize::from(zeros));
        prop_assert_eq!(d.has_not_executed_state(), zeros);
        prop_assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(d.probs().iter().all(|&p| p > 0.0));
        for &x in &xs {
            let iv = d.intervals()[d.state_of(x)];
            prop_assert!(iv.lo <= x && x <= iv.hi, "{x} outside {iv:?}");
        }
        xs.sort_by(f64::total_cmp);
        let (lo, hi) = d.support();
        prop_assert_eq!(lo, xs[0]);
        prop_assert_eq!(hi, xs[xs.len() - 1]);
    }
}

#[test]
fn equal_frequency_bins() {
    let xs: Vec<f64> = (1..=12).map(f64::from).collect();
    let d = discretize(&xs, 3);
    assert_eq!(d.len(), 3);
    for p in d.probs() {
        assert!((p - 1.0 / 3.0).abs() < 1e-12);
    }
}
