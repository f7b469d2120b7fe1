use llmsched_core::profiler::CalibrationProfile;
use llmsched_core::sim::rescale_remaining;
use proptest::prelude::*;

fn table() -> impl Strategy<Value = CalibrationProfile> {
    (1.0f64..100.0, prop::collection::vec(0.0f64..10.0, 0..15)).prop_map(|(base, steps)| {
        let mut l = vec![base];
        for s in steps {
            l.push(l.last().unwrap() + s);
        }
        CalibrationProfile::new(l).unwrap()
    })
}

proptest! {
    #[test]
    fn calibration_round_trips(cal in table(), d in 0.0f64..1e4, a in 0usize..16, b in 0usize..16) {
        let m = cal.max_batch();
        let (a, b) = (a % m + 1, b % m + 1);
        let there = cal.calibrate(d, a, b).unwrap();
        let back = cal.calibrate(there, b, a).unwrap();
        prop_assert!((back - d).abs() <= 1e-9 * d.max(1.0));
        if b >= a {
            prop_assert!(there >= d * (1.0 - 1e-12));
        }
    }

    #[test]
    fn rescaling_composes(cal in table(), r in 0.0f64..1e3, a in 0usize..16, b in 0usize..16, c in 0usize..16) {
        let m = cal.max_batch();
        let (a, b, c) = (a % m + 1, b % m + 1, c % m + 1);
        let direct = rescale_remaining(&cal, r, a, c).unwrap();
        let hop = rescale_remaining(&cal, rescale_remaining(&cal, r, a, b).unwrap(), b, c).unwrap();
        prop_assert!((direct - hop).abs() <= 1e-9 * r.max(1.0));
    }
}

#[test]
fn batch_four_takes_half_again_as_long() {
    let cal = CalibrationProfile::new(vec![20.0, 23.0, 27.0, 30.0]).unwrap();
    assert_eq!(cal.calibrate(10.0, 1, 4).unwrap(), 15.0);
}

#[test]
fn out_of_range_batches_are_errors() {
    let cal = CalibrationProfile::linear(20.0, 1.0, 4).unwrap();
    assert!(cal.calibrate(1.0, 0, 1).is_err());
    assert!(cal.calibrate(1.0, 1, 5).is_err());
    assert!(CalibrationProfile::new(vec![20.0, 10.0]).is_err());
    assert!(CalibrationProfile::new(vec![]).is_err());
}
