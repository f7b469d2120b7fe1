use llmsched_core::bayesnet::{
    entropy, learn_structure, mutual_information, mutual_information_from_joint, DiscreteBayesNet, Evidence,
    Joint, StructureSearch,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_net(rng: &mut ChaCha8Rng, max_nodes: usize, max_states: usize) -> DiscreteBayesNet {
    let n = rng.random_range(1..=max_nodes);
    let cards: Vec<usize> = (0..n).map(|_| rng.random_range(1..=max_states)).collect();
    let mut parents = Vec::with_capacity(n);
    let mut cpts = Vec::with_capacity(n);
    for v in 0..n {
        let ps: Vec<usize> = (0..v).filter(|_| rng.random_bool(0.4)).take(3).collect();
        let rows: usize = ps.iter().map(|&p| cards[p]).product();
        let mut cpt = Vec::with_capacity(rows * cards[v]);
        for _ in 0..rows {
            let w: Vec<f64> = (0..cards[v]).map(|_| rng.random::<f64>() + 1e-3).collect();
            let s: f64 = w.iter().sum();
            cpt.extend(w.iter().map(|x| x / s));
        }
        parents.push(ps);
        cpts.push(cpt);
    }
    DiscreteBayesNet::new(cards, parents, cpts).unwrap()
}

/// Posterior of `targets` by enumerating every full assignment.
fn brute_force(bn: &DiscreteBayesNet, targets: &[usize], ev: &Evidence) -> Vec<f64> {
    let cards = bn.cards();
    let n = cards.len();
    let cells: usize = targets.iter().map(|&t| cards[t]).product();
    let mut out = vec![0.0; cells];
    let mut x = vec![0usize; n];
    loop {
        if ev.iter().all(|(v, s)| x[v] == s) {
            let mut p = 1.0;
            for v in 0..n {
                let ps: Vec<usize> = bn.parents(v).iter().map(|&q| x[q]).collect();
                p *= bn.conditional(v, &ps, x[v]);
            }
            let mut o = 0;
            for &t in targets {
                o = o * cards[t] + x[t];
            }
            out[o] += p;
        }
        let mut d = n;
        loop {
            if d == 0 {
                let z: f64 = out.iter().sum();
                return out.into_iter().map(|p| p / z).collect();
            }
            d -= 1;
            x[d] += 1;
            if x[d] < cards[d] {
                break;
            }
            x[d] = 0;
        }
    }
}

fn random_query(rng: &mut ChaCha8Rng, n: usize) -> (Vec<usize>, Evidence) {
    let mut vars: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        vars.swap(i, rng.random_range(0..=i));
    }
    let k = rng.random_range(1..=n);
    let targets = vars[..k].to_vec();
    let ev = vars[k..].iter().filter(|_| rng.random_bool(0.5)).map(|&v| (v, 0)).collect::<Vec<_>>();
    (targets, ev.into_iter().collect())
}

proptest! {
    #[test]
    fn joint_query_matches_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bn = random_net(&mut rng, 5, 4);
        let (targets, mut ev) = random_query(&mut rng, bn.len());
        // random evidence states, not only 0
        let obs: Vec<(usize, usize)> = ev.iter().collect();
        for (v, _) in obs {
            ev.insert(v, rng.random_range(0..bn.cards()[v]));
        }
        let got = bn.joint_query(&targets, &ev).unwrap();
        let want = brute_force(&bn, &targets, &ev);
        prop_assert_eq!(got.vars, targets);
        for (a, b) in got.probs.iter().zip(&want) {
            prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn mutual_information_is_nonnegative_and_bounded(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bn = random_net(&mut rng, 4, 4);
        prop_assume!(bn.len() >= 2);
        let x = bn.len() - 1;
        let targets: Vec<usize> = (0..x).collect();
        let mi = mutual_information(&bn, &targets, x, &Evidence::new()).unwrap();
        let hx = entropy(&bn.marginal(x, &Evidence::new()).unwrap());
        prop_assert!(mi >= 0.0);
        prop_assert!(mi <= hx + 1e-9);
    }

    #[test]
    fn self_information_is_entropy(w in prop::collection::vec(0.0f64..1.0, 1..7)) {
        let s: f64 = w.iter().sum();
        prop_assume!(s > 0.0);
        let p: Vec<f64> = w.iter().map(|x| x / s).collect();
        let n = p.len();
        let mut cells = vec![0.0; n * n];
        for i in 0..n {
            cells[i * n + i] = p[i];
        }
        let j = Joint { vars: vec![0, 1], cards: vec![n, n], probs: cells };
        prop_assert!((mutual_information_from_joint(&j) - entropy(&p)).abs() < 1e-9);
    }

    #[test]
    fn product_joints_carry_no_information(
        a in prop::collection::vec(0.01f64..1.0, 1..6),
        b in prop::collection::vec(0.01f64..1.0, 1..6),
    ) {
        let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
        let probs: Vec<f64> = a.iter().flat_map(|x| b.iter().map(move |y| x / sa * y / sb)).collect();
        let j = Joint { vars: vec![0, 1], cards: vec![a.len(), b.len()], probs };
        prop_assert!(mutual_information_from_joint(&j) <= 1e-9);
    }

    #[test]
    fn learned_structures_respect_the_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cards = vec![3, 2, 3, 2];
        let samples: Vec<Vec<usize>> = (0..80)
            .map(|_| {
                let a = rng.random_range(0..3);
                vec![a, (a + rng.random_range(0..2)) % 2, rng.random_range(0..3), a % 2]
            })
            .collect();
        let order = vec![2, 0, 3, 1];
        let search = StructureSearch::default();
        let parents = learn_structure(&cards, &samples, &order, &search);
        for (v, ps) in parents.iter().enumerate() {
            let pos = order.iter().position(|&x| x == v).unwrap();
            prop_assert!(ps.len() <= search.max_parents);
            for p in ps {
                prop_assert!(order.iter().position(|x| x == p).unwrap() < pos);
            }
        }
        let bn = DiscreteBayesNet::fit_cpts(cards, parents, &samples).unwrap();
        for v in 0..bn.len() {
            for row in bn.cpt(v).chunks(bn.cards()[v]) {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                prop_assert!(row.iter().all(|&p| p > 0.0));
            }
        }
    }
}

#[test]
fn uniform_and_point_entropies() {
    for n in 1..=16usize {
        assert!((entropy(&vec![1.0 / n as f64; n]) - (n as f64).log2()).abs() < 1e-12);
    }
    assert_eq!(entropy(&[0.0, 1.0, 0.0]), 0.0);
}

#[test]
fn correlated_set_is_the_descendants() {
    // 0 -> 1 -> 2, 3 isolated
    let bn = DiscreteBayesNet::new(
        vec![2, 2, 2, 2],
        vec![vec![], vec![0], vec![1], vec![]],
        vec![vec![0.5, 0.5], vec![0.9, 0.1, 0.1, 0.9], vec![0.8, 0.2, 0.3, 0.7], vec![0.5, 0.5]],
    )
    .unwrap();
    assert_eq!(bn.correlated_set(0), vec![1, 2]);
    assert_eq!(bn.correlated_set(1), vec![2]);
    assert!(bn.correlated_set(3).is_empty());
}

#[test]
fn zero_probability_evidence_is_reported() {
    let bn = DiscreteBayesNet::new(vec![2, 2], vec![vec![], vec![0]], vec![vec![1.0, 0.0], vec![0.5, 0.5, 0.5, 0.5]])
        .unwrap();
    let ev: Evidence = [(0, 1)].into_iter().collect();
    assert!(bn.joint_query(&[1], &ev).is_err());
    assert!(bn.joint_query(&[0], &ev).is_err());
}
