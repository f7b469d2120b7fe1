//! Entropy and mutual information in bits.

use alloc::vec;

use super::{DiscreteBayesNet, Evidence, Joint};
use crate::error::Result;
use crate::math::log2;

/// Shannon entropy `-Σ p log2 p`, with `0 log 0 = 0`.
pub fn entropy(dist: &[f64]) -> f64 {
    let h: f64 = dist.iter().filter(|&&p| p > 0.0).map(|&p| -p * log2(p)).sum();
    // -0.0 and rounding noise for point masses
    if h < 0.0 { 0.0 } else { h }
}

/// `I(Y; X)` from a joint whose last variable is `X` and whose leading
/// variables form `Y`, computed as `H(Y) - Σ_x P(x) H(Y | x)` and clamped
/// at zero.
pub fn mutual_information_from_joint(joint: &Joint) -> f64 {
    let n = joint.vars.len();
    assert!(n >= 2, "need at least one target and the source");
    let xs = joint.cards[n - 1];
    let ys = joint.probs.len() / xs;
    let mut py = vec![0.0; ys];
    let mut px = vec![0.0; xs];
    for y in 0..ys {
        for x in 0..xs {
            let p = joint.probs[y * xs + x];
            py[y] += p;
            px[x] += p;
        }
    }
    let mut conditional = 0.0;
    let mut column = vec![0.0; ys];
    for x in 0..xs {
        if px[x] <= 0.0 {
            continue;
        }
        for y in 0..ys {
            column[y] = joint.probs[y * xs + x] / px[x];
        }
        conditional += px[x] * entropy(&column);
    }
    let mi = entropy(&py) - conditional;
    if mi < 0.0 { 0.0 } else { mi }
}

/// `I(Y_1, ..., Y_M; X | E)` from one exact posterior query.
pub fn mutual_information(
    bn: &DiscreteBayesNet,
    targets: &[usize],
    source: usize,
    evidence: &Evidence,
) -> Result<f64> {
    let mut vars = targets.to_vec();
    vars.push(source);
    let joint = bn.joint_query(&vars, evidence)?;
    Ok(mutual_information_from_joint(&joint))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayesnet::tests::copy_net;
    use alloc::vec::Vec;

    #[test]
    fn entropy_reference_values() {
        assert!((entropy(&[0.25; 4]) - 2.0).abs() < 1e-12);
        assert_eq!(entropy(&[1.0, 0.0]), 0.0);
        assert!((entropy(&[0.5, 0.25, 0.25]) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn four_cell_joint() {
        // oracle: Σ p log2(p / (px py)) over the four cells, px = py = 0.5
        let cells = [0.4, 0.1, 0.1, 0.4];
        let oracle: f64 = cells.iter().map(|&p: &f64| p * (p / 0.25).log2()).sum();
        let j = Joint { vars: vec![0, 1], cards: vec![2, 2], probs: cells.to_vec() };
        let mi = mutual_information_from_joint(&j);
        assert!((mi - oracle).abs() < 1e-12);
        assert!((mi - 0.278).abs() < 1e-3);
    }

    #[test]
    fn copy_gives_source_entropy() {
        let bn = copy_net(4);
        let mi = mutual_information(&bn, &[1], 0, &Evidence::new()).unwrap();
        assert!((mi - 2.0).abs() < 1e-9);
    }

    #[test]
    fn independence_gives_zero() {
        let bn = DiscreteBayesNet::new(
            vec![3, 2],
            vec![Vec::new(), Vec::new()],
            vec![vec![0.2, 0.3, 0.5], vec![0.6, 0.4]],
        )
        .unwrap();
        assert!(mutual_information(&bn, &[1], 0, &Evidence::new()).unwrap() <= 1e-9);
    }
}
