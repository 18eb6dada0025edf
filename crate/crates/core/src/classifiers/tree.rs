//! CART classification tree with Gini impurity, grown best-first.
//!
//! Split quality is compared with exact integer arithmetic on class counts,
//! so the grown tree does not depend on how labels are numbered.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        label: u8,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    pub n_splits: usize,
}

/// Σ c² / n as an exact fraction (numerator, denominator).
#[derive(Debug, Clone, Copy)]
struct Purity {
    num: u128,
    den: u128,
}

impl Purity {
    fn of(counts: &[u64]) -> Purity {
        let n: u64 = counts.iter().sum();
        Purity {
            num: counts.iter().map(|&c| u128::from(c) * u128::from(c)).sum(),
            den: u128::from(n.max(1)),
        }
    }

    /// Σ cl²/nl + Σ cr²/nr.
    fn pair(l_sq: u128, nl: u64, r_sq: u128, nr: u64) -> Purity {
        let (nl, nr) = (u128::from(nl), u128::from(nr));
        Purity {
            num: l_sq * nr + r_sq * nl,
            den: nl * nr,
        }
    }

    fn cmp(&self, other: &Purity) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }

    fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    gain: f64,
    node: usize,
    feature: usize,
    threshold: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    // largest gain first, then the earliest node
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.node.cmp(&self.node))
    }
}

struct Grower<'a> {
    x: ArrayView2<'a, f64>,
    /// class index of every row
    yk: Vec<usize>,
    classes: &'a [u8],
}

impl Grower<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<u64> {
        let mut c = vec![0u64; self.classes.len()];
        for &i in idx {
            c[self.yk[i]] += 1;
        }
        c
    }

    fn majority(&self, idx: &[usize]) -> u8 {
        let c = self.counts(idx);
        let mut best = 0;
        for (k, &v) in c.iter().enumerate() {
            if v > c[best] {
                best = k;
            }
        }
        self.classes[best]
    }

    fn best_split(&self, node: usize, idx: &[usize]) -> Option<Candidate> {
        let parent_counts = self.counts(idx);
        if parent_counts.iter().filter(|&&c| c > 0).count() < 2 {
            return None;
        }
        let parent = Purity::of(&parent_counts);
        let n = idx.len() as u64;
        let mut best: Option<(Purity, usize, f64)> = None;
        let mut order = idx.to_vec();
        for f in 0..self.x.ncols() {
            order.sort_by(|&a, &b| self.x[[a, f]].total_cmp(&self.x[[b, f]]));
            let mut left = vec![0u64; self.classes.len()];
            let mut l_sq: u128 = 0;
            let mut r_sq: u128 = parent.num;
            let mut right = parent_counts.clone();
            for pos in 0..order.len() - 1 {
                let k = self.yk[order[pos]];
                // move one sample of class k from right to left
                l_sq += 2 * u128::from(left[k]) + 1;
                left[k] += 1;
                r_sq -= 2 * u128::from(right[k]) - 1;
                right[k] -= 1;
                let v = self.x[[order[pos], f]];
                let next = self.x[[order[pos + 1], f]];
                if v == next {
                    continue;
                }
                let nl = pos as u64 + 1;
                let score = Purity::pair(l_sq, nl, r_sq, n - nl);
                let better = match &best {
                    None => true,
                    Some((b, _, _)) => score.cmp(b) == Ordering::Greater,
                };
                if better {
                    let mid = v + (next - v) / 2.0;
                    best = Some((score, f, if mid < next { mid } else { v }));
                }
            }
        }
        let (score, feature, threshold) = best?;
        if score.cmp(&parent) != Ordering::Greater {
            return None;
        }
        let (left, right): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.x[[i, feature]] <= threshold);
        Some(Candidate {
            gain: score.value() - parent.value(),
            node,
            feature,
            threshold,
            left,
            right,
        })
    }
}

impl DecisionTree {
    /// Grows a tree on the rows listed in `samples` (repeats allowed).
    /// `classes` must be the sorted, deduplicated label set.
    pub fn fit(
        x: ArrayView2<f64>,
        y: &[u8],
        samples: &[usize],
        classes: &[u8],
        max_splits: usize,
    ) -> DecisionTree {
        let yk = y
            .iter()
            .map(|l| classes.binary_search(l).expect("label in class set"))
            .collect();
        let g = Grower { x, yk, classes };
        let mut nodes = vec![Node::Leaf {
            label: g.majority(samples),
        }];
        let mut heap = BinaryHeap::new();
        if let Some(c) = g.best_split(0, samples) {
            heap.push(c);
        }
        let mut n_splits = 0;
        while n_splits < max_splits {
            let Some(c) = heap.pop() else { break };
            let left = nodes.len();
            let right = left + 1;
            nodes.push(Node::Leaf {
                label: g.majority(&c.left),
            });
            nodes.push(Node::Leaf {
                label: g.majority(&c.right),
            });
            nodes[c.node] = Node::Split {
                feature: c.feature,
                threshold: c.threshold,
                left,
                right,
            };
            n_splits += 1;
            if let Some(l) = g.best_split(left, &c.left) {
                heap.push(l);
            }
            if let Some(r) = g.best_split(right, &c.right) {
                heap.push(r);
            }
        }
        DecisionTree { nodes, n_splits }
    }

    pub fn predict_row(&self, row: &[f64]) -> u8 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { label } => return *label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}
