use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tree::{DecisionTree, Node, SplitRule};
use crate::num::Scalar;

/// Everything the grower needs about one training set.
pub(crate) struct TrainingData<'a, T> {
    pub rows: &'a [Vec<T>],
    pub labels: &'a [bool],
    /// Number of levels for categorical variables, `None` for numeric ones.
    pub levels: &'a [Option<usize>],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct GrowParams {
    pub mtry: usize,
    pub min_node: usize,
    pub max_depth: Option<usize>,
}

/// A candidate split with its exact Gini score.
///
/// Minimising the size-weighted child Gini impurity is the same as maximising
/// `S = (p_l² + q_l²)/n_l + (p_r² + q_r²)/n_r`, p/q being class counts. `S` is
/// kept as the fraction `num / den` so that comparisons are exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Candidate<T> {
    pub var: usize,
    pub rule: SplitRule<T>,
    num: u128,
    den: u128,
}

impl<T> Candidate<T> {
    fn new(var: usize, rule: SplitRule<T>, left: (u64, u64), right: (u64, u64)) -> Self {
        let (pl, nl) = left;
        let (pr, nr) = right;
        let sq = |p: u64, n: u64| -> u128 {
            let q = n - p;
            u128::from(p) * u128::from(p) + u128::from(q) * u128::from(q)
        };
        let nl_ = u128::from(nl);
        let nr_ = u128::from(nr);
        Self {
            var,
            rule,
            num: sq(pl, nl) * nr_ + sq(pr, nr) * nl_,
            den: nl_ * nr_,
        }
    }

    fn better_than(&self, other: &Self) -> bool {
        self.num * other.den > other.num * self.den
    }
}

/// Best split over `vars` (visited in ascending index order) for the rows in
/// `idx`. Ties keep the earlier candidate: lowest variable index, then lowest
/// threshold or level code. Children must each hold at least `min_node` rows.
pub(crate) fn best_split<T: Scalar>(
    data: &TrainingData<'_, T>,
    idx: &[usize],
    vars: &[usize],
    min_node: usize,
) -> Option<Candidate<T>> {
    let n = idx.len() as u64;
    let total_pos = idx.iter().filter(|&&i| data.labels[i]).count() as u64;
    let min_node = min_node.max(1) as u64;
    let mut best: Option<Candidate<T>> = None;
    let offer = |c: Candidate<T>, best: &mut Option<Candidate<T>>| {
        if best.as_ref().is_none_or(|b| c.better_than(b)) {
            *best = Some(c);
        }
    };

    let mut sorted: Vec<(T, bool)> = Vec::with_capacity(idx.len());
    for &var in vars {
        match data.levels[var] {
            Some(k) => {
                let mut pos = vec![0u64; k];
                let mut cnt = vec![0u64; k];
                for &i in idx {
                    let code = data.rows[i][var].to_usize().expect("level code");
                    cnt[code] += 1;
                    pos[code] += u64::from(data.labels[i]);
                }
                for level in 0..k {
                    let (nl, pl) = (cnt[level], pos[level]);
                    if nl < min_node || n - nl < min_node {
                        continue;
                    }
                    let rule = SplitRule::IsLevel(level as u32);
                    offer(
                        Candidate::new(var, rule, (pl, nl), (total_pos - pl, n - nl)),
                        &mut best,
                    );
                }
            }
            None => {
                sorted.clear();
                sorted.extend(idx.iter().map(|&i| (data.rows[i][var], data.labels[i])));
                sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
                let mut pl = 0u64;
                for k in 0..sorted.len() - 1 {
                    pl += u64::from(sorted[k].1);
                    let (lo, hi) = (sorted[k].0, sorted[k + 1].0);
                    if lo == hi {
                        continue;
                    }
                    let nl = k as u64 + 1;
                    if nl < min_node || n - nl < min_node {
                        continue;
                    }
                    let rule = SplitRule::LessEq(midpoint(lo, hi));
                    offer(
                        Candidate::new(var, rule, (pl, nl), (total_pos - pl, n - nl)),
                        &mut best,
                    );
                }
            }
        }
    }
    best
}

/// Midpoint that is guaranteed to separate `lo < hi`.
fn midpoint<T: Scalar>(lo: T, hi: T) -> T {
    let m = lo + (hi - lo) * T::half();
    if m >= hi {
        lo
    } else {
        m
    }
}

fn is_constant<T: Scalar>(data: &TrainingData<'_, T>, idx: &[usize], var: usize) -> bool {
    let first = data.rows[idx[0]][var];
    idx.iter().all(|&i| data.rows[i][var] == first)
}

/// Grows one tree on a bootstrap sample drawn from `rng`.
pub(crate) fn grow_tree<T: Scalar>(
    data: &TrainingData<'_, T>,
    params: GrowParams,
    rng: &mut ChaCha8Rng,
) -> DecisionTree<T> {
    let n = data.rows.len();
    let mut idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    let mut nodes = Vec::new();
    grow_node(data, params, rng, &mut idx, 0, &mut nodes);
    DecisionTree::from_nodes(nodes)
}

/// Grows a tree on exactly the given rows, no resampling.
pub(crate) fn grow_tree_on<T: Scalar>(
    data: &TrainingData<'_, T>,
    params: GrowParams,
    seed: u64,
) -> DecisionTree<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..data.rows.len()).collect();
    let mut nodes = Vec::new();
    grow_node(data, params, &mut rng, &mut idx, 0, &mut nodes);
    DecisionTree::from_nodes(nodes)
}

fn grow_node<T: Scalar>(
    data: &TrainingData<'_, T>,
    params: GrowParams,
    rng: &mut ChaCha8Rng,
    idx: &mut [usize],
    depth: usize,
    nodes: &mut Vec<Node<T>>,
) {
    let n = idx.len();
    let positives = idx.iter().filter(|&&i| data.labels[i]).count();
    let leaf = Node::leaf(positives as u32, n as u32);
    let pure = positives == 0 || positives == n;
    let capped = params.max_depth.is_some_and(|d| depth >= d);
    if pure || capped || n < 2 * params.min_node.max(1) {
        nodes.push(leaf);
        return;
    }

    // Variables are drawn in random order; constant ones are skipped until
    // `mtry` usable variables are found or the pool runs out.
    let mut order: Vec<usize> = (0..data.levels.len()).collect();
    order.shuffle(rng);
    let mut vars: Vec<usize> = order
        .into_iter()
        .filter(|&v| !is_constant(data, idx, v))
        .take(params.mtry)
        .collect();
    vars.sort_unstable();

    let Some(split) = best_split(data, idx, &vars, params.min_node) else {
        nodes.push(leaf);
        return;
    };

    // Partition in place: left rows first.
    let mut boundary = 0;
    for k in 0..n {
        if split.rule.goes_left(data.rows[idx[k]][split.var]) {
            idx.swap(k, boundary);
            boundary += 1;
        }
    }
    let here = nodes.len();
    nodes.push(Node::Split {
        var: split.var,
        rule: split.rule,
        right: usize::MAX,
    });
    let (left, right) = idx.split_at_mut(boundary);
    grow_node(data, params, rng, left, depth + 1, nodes);
    let right_at = nodes.len();
    if let Node::Split { right, .. } = &mut nodes[here] {
        *right = right_at;
    }
    grow_node(data, params, rng, right, depth + 1, nodes);
}
