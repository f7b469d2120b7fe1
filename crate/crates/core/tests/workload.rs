use llmsched_core::bayesnet::StructureSearch;
use llmsched_core::model::{AppId, Family};
use llmsched_core::profiler::ApplicationProfile;
use llmsched_core::workload::{collect_trace, default_catalog, generate_workload, AppModel, Preset, WorkloadSpec};
use llmsched_core::Error;

fn spec(mix: Vec<(AppId, f64)>, lambda: f64, n: usize, seed: u64) -> WorkloadSpec {
    WorkloadSpec { mix, lambda, num_jobs: n, seed }
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[test]
fn same_seed_same_workload() {
    let c = default_catalog();
    let t = c.templates().unwrap();
    let s = spec(Preset::Mixed.mix(&c), 0.9, 200, 11);
    let a = generate_workload(&c, &t, &s).unwrap();
    let b = generate_workload(&c, &t, &s).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.view().arrival, y.view().arrival);
        assert_eq!(x.truth(), y.truth());
    }
    let other = generate_workload(&c, &t, &WorkloadSpec { seed: 12, ..s }).unwrap();
    assert_ne!(a[0].view().arrival, other[0].view().arrival);
}

#[test]
fn arrivals_are_poisson() {
    let c = default_catalog();
    let t = c.templates().unwrap();
    let lambda = 0.9;
    let jobs = generate_workload(&c, &t, &spec(Preset::Mixed.mix(&c), lambda, 4000, 5)).unwrap();
    let mut gaps: Vec<f64> = Vec::new();
    let mut prev = 0.0;
    for j in &jobs {
        assert!(j.view().arrival >= prev);
        gaps.push(j.view().arrival - prev);
        prev = j.view().arrival;
    }
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    assert!((mean - 1.0 / lambda).abs() < 0.05 / lambda, "mean gap {mean}");
    // Kolmogorov-Smirnov distance to Exp(lambda), 1% critical value
    gaps.sort_by(f64::total_cmp);
    let n = gaps.len() as f64;
    let d = gaps
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            let f = 1.0 - (-lambda * g).exp();
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    assert!(d < 1.63 / n.sqrt(), "KS distance {d}");
}

#[test]
fn mixes_follow_their_weights() {
    let c = default_catalog();
    let t = c.templates().unwrap();
    let jobs = generate_workload(&c, &t, &spec(vec![(AppId(0), 3.0), (AppId(2), 1.0)], 1.0, 4000, 9)).unwrap();
    let first = jobs.iter().filter(|j| j.view().app == AppId(0)).count() as f64 / 4000.0;
    assert!((first - 0.75).abs() < 0.03, "{first}");
    assert!(jobs.iter().all(|j| j.view().app == AppId(0) || j.view().app == AppId(2)));
    for p in Preset::ALL {
        assert!(!p.mix(&c).is_empty(), "{}", p.name());
    }
}

#[test]
fn llm_stages_of_predefined_apps_are_strongly_correlated() {
    let c = default_catalog();
    let t = c.templates().unwrap();
    for (a, app) in c.apps.iter().enumerate().filter(|(_, a)| a.family() == Family::Predefined) {
        let jobs = generate_workload(&c, &t, &spec(vec![(AppId(a), 1.0)], 1.0, 2000, 21)).unwrap();
        let llm: Vec<usize> = t[a].stages.iter().filter(|s| s.kind == llmsched_core::model::StageKind::Llm).map(|s| s.id).collect();
        let col = |s: usize| jobs.iter().map(|j| j.truth().stage_duration(s).ln()).collect::<Vec<_>>();
        for w in llm.windows(2) {
            let r = pearson(&col(w[0]), &col(w[1]));
            assert!(r >= 0.7, "{}: stages {} and {} correlate at {r}", app.name, w[0], w[1]);
        }
    }
}

#[test]
fn chains_stay_within_their_bounds() {
    let c = default_catalog();
    let t = c.templates().unwrap();
    for (a, app) in c.apps.iter().enumerate() {
        let AppModel::Chain { max_iterations, prefix, pattern, .. } = &app.model else { continue };
        let jobs = generate_workload(&c, &t, &spec(vec![(AppId(a), 1.0)], 1.0, 1000, 4)).unwrap();
        let mut seen = vec![0usize; max_iterations + 1];
        for j in &jobs {
            let len = j.truth().chain_len.unwrap();
            assert!((1..=*max_iterations).contains(&len));
            seen[len] += 1;
            let executed = j.truth().executed.iter().filter(|&&e| e).count();
            assert_eq!(executed, prefix.len() + len * pattern.len());
        }
        assert!(seen[1..].iter().all(|&k| k > 0), "{}: lengths {seen:?}", app.name);
    }
}

#[test]
fn planners_only_pick_listed_tools() {
    let c = default_catalog();
    let t = c.templates().unwrap();
    for (a, app) in c.apps.iter().enumerate().filter(|(_, a)| a.family() == Family::Planning) {
        let jobs = generate_workload(&c, &t, &spec(vec![(AppId(a), 1.0)], 1.0, 500, 8)).unwrap();
        let d = t[a].stages.iter().find(|s| s.dynamic.is_some()).unwrap();
        let dspec = d.dynamic.as_ref().unwrap();
        let mut sizes = std::collections::BTreeSet::new();
        for j in &jobs {
            let r = j.truth().realized_for(d.id).unwrap();
            sizes.insert(r.nodes.len());
            for e in &r.edges {
                assert!(dspec.edges.contains(e));
                assert!(r.nodes.contains(&e.0) && r.nodes.contains(&e.1));
            }
        }
        assert!(sizes.len() >= 3, "{}: tool counts {sizes:?}", app.name);
    }
}

#[test]
fn a_planner_with_tools_trains_without_a_network() {
    let c = default_catalog();
    let t = c.templates().unwrap();
    let a = c.find("taskauto").unwrap();
    let jobs = generate_workload(&c, &t, &spec(vec![(a, 1.0)], 1.0, 200, 2)).unwrap();
    let trace = collect_trace(&jobs, &c.names());
    let refs: Vec<_> = trace.iter().collect();
    let p = ApplicationProfile::train(&t[a.0], &refs, &StructureSearch::default()).unwrap();
    assert!(p.network.is_none());
    assert_eq!(p.dynamic.len(), 1);
    let dp = &p.dynamic[0];
    for (i, prob) in dp.spec.node_probs.iter().enumerate() {
        let freq = jobs
            .iter()
            .filter(|j| j.truth().realized_for(dp.stage).unwrap().nodes.contains(&i))
            .count() as f64
            / 200.0;
        assert!((prob - freq).abs() < 1e-12);
    }

    assert!(matches!(ApplicationProfile::train(&t[a.0], &[], &StructureSearch::default()), Err(Error::Training(_))));
}

#[test]
fn predefined_profiles_learn_dependencies() {
    let c = default_catalog();
    let t = c.templates().unwrap();
    let a = c.find("seqsort").unwrap();
    let jobs = generate_workload(&c, &t, &spec(vec![(a, 1.0)], 1.0, 300, 2)).unwrap();
    let trace = collect_trace(&jobs, &c.names());
    let refs: Vec<_> = trace.iter().collect();
    let p = ApplicationProfile::train(&t[a.0], &refs, &StructureSearch::default()).unwrap();
    let nw = p.network.as_ref().unwrap();
    let first = nw.var_of(0).unwrap();
    assert!(!nw.net.correlated_set(first).is_empty());
    assert!(p.uncertainty_reducing[0]);
    for d in p.stage_dists.iter().flatten() {
        assert!(d.len() <= 6);
        assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
