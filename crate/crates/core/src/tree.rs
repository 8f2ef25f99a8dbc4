//! Greedy CART regression trees on the 1-D train split.
//!
//! The abscissae are sorted, so every node is a contiguous index range and
//! node SSE comes from prefix sums in O(1). Split candidates are midpoints
//! between consecutive distinct x values; the split minimizing the summed
//! child SSE wins, with ties going to the lowest threshold. Growth stops at
//! the depth cap, at single-point nodes, or when the best split yields zero
//! SSE improvement.

use crate::dataset::Dataset;
use crate::space::{Family, ModelPoint};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

/// A fitted tree; `x ≤ threshold` descends left.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    root: Node,
}

struct Prefix {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl Prefix {
    fn new(ys: &[f64]) -> Self {
        let mut sum = Vec::with_capacity(ys.len() + 1);
        let mut sum_sq = Vec::with_capacity(ys.len() + 1);
        sum.push(0.0);
        sum_sq.push(0.0);
        for &y in ys {
            sum.push(sum.last().unwrap() + y);
            sum_sq.push(sum_sq.last().unwrap() + y * y);
        }
        Prefix { sum, sum_sq }
    }

    fn mean(&self, lo: usize, hi: usize) -> f64 {
        (self.sum[hi] - self.sum[lo]) / (hi - lo) as f64
    }

    fn sse(&self, lo: usize, hi: usize) -> f64 {
        let s = self.sum[hi] - self.sum[lo];
        let raw = (self.sum_sq[hi] - self.sum_sq[lo]) - s * s / (hi - lo) as f64;
        raw.max(0.0) // cancellation can leave a tiny negative on constant nodes
    }
}

fn grow(xs: &[f64], prefix: &Prefix, lo: usize, hi: usize, depth_left: u32) -> Node {
    let leaf = Node::Leaf {
        value: prefix.mean(lo, hi),
    };
    if depth_left == 0 || hi - lo == 1 {
        return leaf;
    }

    let node_sse = prefix.sse(lo, hi);
    let mut best: Option<(f64, usize)> = None;
    for p in lo + 1..hi {
        if xs[p - 1] < xs[p] {
            let cost = prefix.sse(lo, p) + prefix.sse(p, hi);
            if best.is_none_or(|(best_cost, _)| cost < best_cost) {
                best = Some((cost, p));
            }
        }
    }
    match best {
        Some((cost, p)) if cost < node_sse => Node::Split {
            threshold: (xs[p - 1] + xs[p]) / 2.0,
            left: Box::new(grow(xs, prefix, lo, p, depth_left - 1)),
            right: Box::new(grow(xs, prefix, p, hi, depth_left - 1)),
        },
        _ => leaf,
    }
}

impl Tree {
    /// Grows a tree of depth at most `max_depth` on `(xs, ys)`; `xs` must be
    /// sorted ascending (the dataset invariant).
    pub fn fit(xs: &[f64], ys: &[f64], max_depth: u32) -> Tree {
        debug_assert_eq!(xs.len(), ys.len());
        debug_assert!(xs.windows(2).all(|w| w[0] <= w[1]));
        let prefix = Prefix::new(ys);
        Tree {
            root: grow(xs, &prefix, 0, xs.len(), max_depth),
        }
    }

    pub fn predict(&self, x: f64) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { value } => return *value,
                Node::Split {
                    threshold,
                    left,
                    right,
                } => node = if x <= *threshold { left } else { right },
            }
        }
    }
}

fn sse_against(tree: &Tree, xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter().zip(ys).fold(0.0, |acc, (&x, &y)| {
        let r = y - tree.predict(x);
        acc + r * r
    })
}

/// Depth-capped greedy tree regressor; complexity is the depth parameter
/// itself.
pub fn fit_tree(dataset: &Dataset, depth: u32) -> Result<ModelPoint> {
    let tree = Tree::fit(&dataset.xs, &dataset.ys_train, depth);
    let train = sse_against(&tree, &dataset.xs, &dataset.ys_train);
    let clean = sse_against(&tree, &dataset.xs_test, &dataset.ys_test_clean);
    let noisy = sse_against(&tree, &dataset.xs_test, &dataset.ys_test_noisy);
    ModelPoint::new(Family::Tree, depth, train, clean, noisy)
}
