//! Dense factors over discrete variables and variable elimination.

use alloc::vec;
use alloc::vec::Vec;

/// Table over `vars` in row-major order: the first variable varies slowest.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Factor {
    pub vars: Vec<usize>,
    pub cards: Vec<usize>,
    pub values: Vec<f64>,
}

fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * cards[i + 1];
    }
    s
}

impl Factor {
    pub fn scalar(v: f64) -> Self {
        Factor { vars: Vec::new(), cards: Vec::new(), values: vec![v] }
    }

    /// Fixes `var` to `state`, dropping it from the scope.
    pub fn reduce(&self, var: usize, state: usize) -> Factor {
        let Some(pos) = self.vars.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let st = strides(&self.cards);
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        let outer: usize = self.cards[..pos].iter().product();
        let inner = st[pos];
        let mut values = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let base = o * self.cards[pos] * inner + state * inner;
            values.extend_from_slice(&self.values[base..base + inner]);
        }
        Factor { vars, cards, values }
    }

    pub fn product(&self, other: &Factor) -> Factor {
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        for (i, &v) in other.vars.iter().enumerate() {
            if !vars.contains(&v) {
                vars.push(v);
                cards.push(other.cards[i]);
            }
        }
        // stride of each output variable inside each operand (0 if absent)
        let sa = strides(&self.cards);
        let sb = strides(&other.cards);
        let map = |f: &Factor, s: &[usize]| -> Vec<usize> {
            vars.iter()
                .map(|v| f.vars.iter().position(|x| x == v).map_or(0, |p| s[p]))
                .collect()
        };
        let ma = map(self, &sa);
        let mb = map(other, &sb);
        let total: usize = cards.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut idx = vec![0usize; vars.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..total {
            values.push(self.values[ia] * other.values[ib]);
            // odometer increment, last variable fastest
            for d in (0..vars.len()).rev() {
                idx[d] += 1;
                ia += ma[d];
                ib += mb[d];
                if idx[d] < cards[d] {
                    break;
                }
                ia -= ma[d] * cards[d];
                ib -= mb[d] * cards[d];
                idx[d] = 0;
            }
        }
        Factor { vars, cards, values }
    }

    pub fn sum_out(&self, var: usize) -> Factor {
        let Some(pos) = self.vars.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let st = strides(&self.cards);
        let outer: usize = self.cards[..pos].iter().product();
        let inner = st[pos];
        let card = self.cards[pos];
        let mut values = vec![0.0; outer * inner];
        for o in 0..outer {
            for c in 0..card {
                let base = (o * card + c) * inner;
                let out = o * inner;
                for i in 0..inner {
                    values[out + i] += self.values[base + i];
                }
            }
        }
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        Factor { vars, cards, values }
    }

    /// Reorders the scope to `order`, which must be a permutation of `vars`.
    pub fn permute(&self, order: &[usize]) -> Factor {
        debug_assert_eq!(order.len(), self.vars.len());
        if order == self.vars.as_slice() {
            return self.clone();
        }
        let st = strides(&self.cards);
        let cards: Vec<usize> = order
            .iter()
            .map(|v| self.cards[self.vars.iter().position(|x| x == v).unwrap()])
            .collect();
        let src: Vec<usize> = order
            .iter()
            .map(|v| st[self.vars.iter().position(|x| x == v).unwrap()])
            .collect();
        let total = self.values.len();
        let mut values = Vec::with_capacity(total);
        let mut idx = vec![0usize; order.len()];
        let mut i = 0usize;
        for _ in 0..total {
            values.push(self.values[i]);
            for d in (0..order.len()).rev() {
                idx[d] += 1;
                i += src[d];
                if idx[d] < cards[d] {
                    break;
                }
                i -= src[d] * cards[d];
                idx[d] = 0;
            }
        }
        Factor { vars: order.to_vec(), cards, values }
    }
}

/// Sums every variable outside `keep` out of the product of `factors`,
/// choosing at each step the variable whose elimination creates the
/// smallest intermediate table.
pub(crate) fn eliminate(mut factors: Vec<Factor>, keep: &[usize], card_of: &[usize]) -> Factor {
    loop {
        let mut candidates: Vec<usize> = Vec::new();
        for f in &factors {
            for &v in &f.vars {
                if !keep.contains(&v) && !candidates.contains(&v) {
                    candidates.push(v);
                }
            }
        }
        if candidates.is_empty() {
            break;
        }
        candidates.sort_unstable();
        let mut best = candidates[0];
        let mut best_cost = usize::MAX;
        for &v in &candidates {
            let mut scope: Vec<usize> = Vec::new();
            for f in factors.iter().filter(|f| f.vars.contains(&v)) {
                for &u in &f.vars {
                    if !scope.contains(&u) {
                        scope.push(u);
                    }
                }
            }
            let cost: usize = scope.iter().map(|&u| card_of[u]).product();
            if cost < best_cost {
                best_cost = cost;
                best = v;
            }
        }
        let (with, without): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.vars.contains(&best));
        let merged = with.iter().skip(1).fold(with[0].clone(), |acc, f| acc.product(f));
        factors = without;
        factors.push(merged.sum_out(best));
    }
    factors.iter().fold(Factor::scalar(1.0), |acc, f| acc.product(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(vars: Vec<usize>, cards: Vec<usize>, values: Vec<f64>) -> Factor {
        Factor { vars, cards, values }
    }

    #[test]
    fn product_and_sum_out() {
        let a = f(vec![0], vec![2], vec![0.3, 0.7]);
        let b = f(vec![0, 1], vec![2, 2], vec![0.9, 0.1, 0.2, 0.8]);
        let p = a.product(&b);
        assert_eq!(p.vars, vec![0, 1]);
        let expect = [0.27, 0.03, 0.14, 0.56];
        for (x, y) in p.values.iter().zip(expect) {
            assert!((x - y).abs() < 1e-12);
        }
        let m = p.sum_out(0);
        assert!((m.values[0] - 0.41).abs() < 1e-12);
        assert!((m.values[1] - 0.59).abs() < 1e-12);
    }

    #[test]
    fn reduce_and_permute() {
        let b = f(vec![0, 1], vec![2, 3], vec![1., 2., 3., 4., 5., 6.]);
        assert_eq!(b.reduce(0, 1).values, vec![4., 5., 6.]);
        assert_eq!(b.reduce(1, 2).values, vec![3., 6.]);
        let t = b.permute(&[1, 0]);
        assert_eq!(t.values, vec![1., 4., 2., 5., 3., 6.]);
        assert_eq!(t.cards, vec![3, 2]);
    }
}
