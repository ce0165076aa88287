use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Binary decision tree stored as a flat node list (root at 0).
/// A sample goes left when `x[feature] <= threshold`; NaN goes right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    Leaf {
        value: Vec<f64>,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

impl Tree {
    pub fn leaf(&self, x: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match &t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
            }
        }
        go(self, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

/// Split objective. The gain of a split is
/// `score(left) + score(right) - score(parent) - penalty`.
pub(crate) trait Criterion {
    type Acc: Clone;
    fn empty(&self) -> Self::Acc;
    fn add(&self, acc: &mut Self::Acc, row: usize);
    fn remove(&self, acc: &mut Self::Acc, row: usize);
    /// Whether a child with these statistics may exist.
    fn admissible(&self, acc: &Self::Acc) -> bool;
    fn score(&self, acc: &Self::Acc) -> f64;
    fn penalty(&self) -> f64 {
        0.0
    }
    fn is_pure(&self, _acc: &Self::Acc) -> bool {
        false
    }
    fn leaf(&self, acc: &Self::Acc) -> Vec<f64>;
}

pub(crate) struct GrowParams {
    pub max_depth: Option<usize>,
    /// Features examined per node; equal to the feature count for exhaustive search.
    pub features_per_split: usize,
}

const MIN_GAIN: f64 = 1e-12;

struct Grower<'a, C: Criterion, R: Rng> {
    crit: &'a C,
    cols: &'a [Vec<f64>],
    params: &'a GrowParams,
    rng: &'a mut R,
    gains: &'a mut [f64],
    nodes: Vec<Node>,
}

/// Exact greedy growth. Candidate thresholds are observed values: the lower
/// of each adjacent pair of distinct sorted values, so any strictly
/// increasing transform of a column reproduces the same partitions.
/// Ties in gain go to the lowest feature index, then the lowest threshold.
pub(crate) fn grow<C: Criterion, R: Rng>(
    crit: &C,
    cols: &[Vec<f64>],
    rows: &[usize],
    params: &GrowParams,
    rng: &mut R,
    gains: &mut [f64],
) -> Tree {
    let sorted: Vec<Vec<usize>> = cols
        .iter()
        .map(|c| {
            let mut r = rows.to_vec();
            r.sort_by(|&a, &b| c[a].total_cmp(&c[b]).then(a.cmp(&b)));
            r
        })
        .collect();
    let mut g = Grower {
        crit,
        cols,
        params,
        rng,
        gains,
        nodes: Vec::new(),
    };
    g.node(sorted, 0);
    Tree { nodes: g.nodes }
}

impl<C: Criterion, R: Rng> Grower<'_, C, R> {
    fn node(&mut self, sorted: Vec<Vec<usize>>, depth: usize) -> usize {
        let crit = self.crit;
        let mut acc = crit.empty();
        for &r in &sorted[0] {
            crit.add(&mut acc, r);
        }
        let idx = self.nodes.len();
        self.nodes.push(Node::Leaf {
            value: crit.leaf(&acc),
        });
        let at_limit = self.params.max_depth.is_some_and(|d| depth >= d);
        if at_limit || sorted[0].len() < 2 || crit.is_pure(&acc) {
            return idx;
        }

        let d = self.cols.len();
        let mut feats: Vec<usize> = if self.params.features_per_split >= d {
            (0..d).collect()
        } else {
            sample(self.rng, d, self.params.features_per_split).into_vec()
        };
        feats.sort_unstable();

        let parent = crit.score(&acc);
        let mut best: Option<(f64, usize, f64)> = None;
        for &f in &feats {
            let col = &self.cols[f];
            let list = &sorted[f];
            let mut left = crit.empty();
            let mut right = acc.clone();
            for k in 0..list.len() - 1 {
                let r = list[k];
                crit.add(&mut left, r);
                crit.remove(&mut right, r);
                let v = col[r];
                if v == col[list[k + 1]] {
                    continue;
                }
                if !crit.admissible(&left) || !crit.admissible(&right) {
                    continue;
                }
                let gain = crit.score(&left) + crit.score(&right) - parent;
                if best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, f, v));
                }
            }
        }
        let Some((gain, feature, threshold)) = best else {
            return idx;
        };
        if gain - crit.penalty() <= MIN_GAIN {
            return idx;
        }
        self.gains[feature] += gain;

        let col = &self.cols[feature];
        let (ls, rs): (Vec<Vec<usize>>, Vec<Vec<usize>>) = sorted
            .into_iter()
            .map(|list| list.into_iter().partition(|&r| col[r] <= threshold))
            .unzip();
        let left = self.node(ls, depth + 1);
        let right = self.node(rs, depth + 1);
        self.nodes[idx] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        idx
    }
}

/// Weighted Gini impurity over class labels.
pub(crate) struct Gini<'a> {
    pub labels: &'a [usize],
    pub weights: &'a [f64],
    pub n_classes: usize,
    pub min_leaf: f64,
}

impl Criterion for Gini<'_> {
    /// Class weights followed by their total.
    type Acc = Vec<f64>;

    fn empty(&self) -> Vec<f64> {
        vec![0.0; self.n_classes + 1]
    }

    fn add(&self, acc: &mut Vec<f64>, row: usize) {
        let w = self.weights[row];
        acc[self.labels[row]] += w;
        acc[self.n_classes] += w;
    }

    fn remove(&self, acc: &mut Vec<f64>, row: usize) {
        let w = self.weights[row];
        acc[self.labels[row]] -= w;
        acc[self.n_classes] -= w;
    }

    fn admissible(&self, acc: &Vec<f64>) -> bool {
        acc[self.n_classes] >= self.min_leaf
    }

    fn score(&self, acc: &Vec<f64>) -> f64 {
        let n = acc[self.n_classes];
        if n <= 0.0 {
            return 0.0;
        }
        acc[..self.n_classes].iter().map(|c| c * c).sum::<f64>() / n
    }

    fn is_pure(&self, acc: &Vec<f64>) -> bool {
        let n = acc[self.n_classes];
        acc[..self.n_classes].contains(&n)
    }

    fn leaf(&self, acc: &Vec<f64>) -> Vec<f64> {
        let n = acc[self.n_classes];
        acc[..self.n_classes].iter().map(|c| c / n).collect()
    }
}

/// Second-order boosting objective with L2 leaf penalty `lambda` and split
/// cost `gamma`.
pub(crate) struct SecondOrder<'a> {
    pub grad: &'a [f64],
    pub hess: &'a [f64],
    pub lambda: f64,
    pub gamma: f64,
    pub min_child_weight: f64,
    pub learning_rate: f64,
}

impl Criterion for SecondOrder<'_> {
    type Acc = (f64, f64);

    fn empty(&self) -> (f64, f64) {
        (0.0, 0.0)
    }

    fn add(&self, acc: &mut (f64, f64), row: usize) {
        acc.0 += self.grad[row];
        acc.1 += self.hess[row];
    }

    fn remove(&self, acc: &mut (f64, f64), row: usize) {
        acc.0 -= self.grad[row];
        acc.1 -= self.hess[row];
    }

    fn admissible(&self, acc: &(f64, f64)) -> bool {
        acc.1 >= self.min_child_weight
    }

    fn score(&self, acc: &(f64, f64)) -> f64 {
        0.5 * acc.0 * acc.0 / (acc.1 + self.lambda)
    }

    fn penalty(&self) -> f64 {
        self.gamma
    }

    fn leaf(&self, acc: &(f64, f64)) -> Vec<f64> {
        vec![-acc.0 / (acc.1 + self.lambda) * self.learning_rate]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn grow_gini(cols: &[Vec<f64>], labels: &[usize], max_depth: Option<usize>) -> (Tree, Vec<f64>) {
        let n = labels.len();
        let w = vec![1.0; n];
        let crit = Gini {
            labels,
            weights: &w,
            n_classes: 2,
            min_leaf: 1.0,
        };
        let rows: Vec<usize> = (0..n).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let mut gains = vec![0.0; cols.len()];
        let params = GrowParams {
            max_depth,
            features_per_split: cols.len(),
        };
        let t = grow(&crit, cols, &rows, &params, &mut rng, &mut gains);
        (t, gains)
    }

    #[test]
    fn separable_threshold_is_an_observed_value() {
        let x = vec![vec![0.5, 1.0, 2.0, 7.0, 8.0, 9.5]];
        let y = [0, 0, 0, 1, 1, 1];
        let (t, gains) = grow_gini(&x, &y, None);
        assert_eq!(t.depth(), 1);
        match &t.nodes[0] {
            Node::Split { threshold, .. } => assert_eq!(*threshold, 2.0),
            n => panic!("{n:?}"),
        }
        assert!((gains[0] - 3.0).abs() < 1e-12);
        assert_eq!(t.leaf(&[2.0]), &[1.0, 0.0]);
        assert_eq!(t.leaf(&[2.5]), &[0.0, 1.0]);
        assert_eq!(t.leaf(&[f64::NAN]), &[0.0, 1.0]);
    }

    #[test]
    fn depth_limit_respected() {
        let x = vec![(0..40).map(|i| i as f64).collect::<Vec<_>>()];
        let y: Vec<usize> = (0..40).map(|i| (i / 3) % 2).collect();
        let (t, _) = grow_gini(&x, &y, Some(3));
        assert!(t.depth() <= 3);
        let (full, _) = grow_gini(&x, &y, None);
        assert!(full.depth() > 3);
        for i in 0..40 {
            let p = full.leaf(&[i as f64]);
            assert_eq!(p[y[i]], 1.0);
        }
    }

    #[test]
    fn constant_feature_gives_single_leaf() {
        let (t, _) = grow_gini(&[vec![1.0; 6]], &[0, 1, 0, 1, 0, 1], None);
        assert_eq!(t.nodes.len(), 1);
    }
}
