//! Binary CART trees with Gini impurity.
//!
//! Nodes are stored in pre-order: a split at index `i` has its left child at
//! `i + 1` and its right child at `right`.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum Node {
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf { positive: usize, total: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    /// Features examined per split; `None` examines every feature in order.
    pub max_features: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_features: None,
            max_depth: None,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    /// Weighted child impurity `(n_l * gini_l + n_r * gini_r) / n`.
    pub impurity: f64,
}

pub(crate) fn gini(positive: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = positive as f64 / total as f64;
    let q = 1.0 - p;
    1.0 - (p * p + q * q)
}

pub(crate) fn weighted_gini(left_pos: usize, left_n: usize, right_pos: usize, right_n: usize) -> f64 {
    let n = (left_n + right_n) as f64;
    (left_n as f64 * gini(left_pos, left_n) + right_n as f64 * gini(right_pos, right_n)) / n
}

/// Midpoint between two consecutive distinct values. Falls back to `lo`
/// when the midpoint rounds up to `hi`.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid >= hi {
        lo
    } else {
        mid
    }
}

struct Builder<'a, R> {
    x: &'a [Vec<f64>],
    y: &'a [u8],
    /// Row index for every sample slot (rows repeat under bootstrap).
    rows: Vec<usize>,
    /// Per feature, the slots sorted by that feature.
    order: Vec<Vec<u32>>,
    goes_left: Vec<bool>,
    scratch: Vec<u32>,
    params: TreeParams,
    rng: &'a mut R,
    nodes: Vec<Node>,
}

impl<R: Rng> Builder<'_, R> {
    fn value(&self, slot: u32, feature: usize) -> f64 {
        self.x[self.rows[slot as usize]][feature]
    }

    fn label(&self, slot: u32) -> u8 {
        self.y[self.rows[slot as usize]]
    }

    fn scan(&self, feature: usize, lo: usize, hi: usize, positives: usize) -> Option<Split> {
        let slots = &self.order[feature][lo..hi];
        let n = slots.len();
        let mut best: Option<Split> = None;
        let mut left_pos = 0;
        for k in 0..n - 1 {
            left_pos += self.label(slots[k]) as usize;
            let a = self.value(slots[k], feature);
            let b = self.value(slots[k + 1], feature);
            if a == b {
                continue;
            }
            let left_n = k + 1;
            let impurity = weighted_gini(left_pos, left_n, positives - left_pos, n - left_n);
            if best.is_none_or(|s| impurity < s.impurity) {
                best = Some(Split {
                    feature,
                    threshold: midpoint(a, b),
                    impurity,
                });
            }
        }
        best
    }

    fn find_split(&mut self, lo: usize, hi: usize, positives: usize) -> Option<Split> {
        let d = self.order.len();
        let candidates: Vec<usize> = match self.params.max_features {
            None => (0..d).collect(),
            Some(_) => {
                let mut all: Vec<usize> = (0..d).collect();
                all.shuffle(self.rng);
                all
            }
        };
        let want = self.params.max_features.unwrap_or(d).clamp(1, d);
        let mut best: Option<Split> = None;
        for (examined, &f) in candidates.iter().enumerate() {
            // Keep drawing past `want` until at least one valid split exists.
            if examined >= want && best.is_some() {
                break;
            }
            if let Some(s) = self.scan(f, lo, hi, positives) {
                if best.is_none_or(|b| s.impurity < b.impurity) {
                    best = Some(s);
                }
            }
        }
        best
    }

    fn partition(&mut self, lo: usize, hi: usize, split: Split) -> usize {
        let Split {
            feature, threshold, ..
        } = split;
        for k in lo..hi {
            let slot = self.order[feature][k];
            self.goes_left[slot as usize] = self.value(slot, feature) <= threshold;
        }
        let mut left_n = 0;
        for f in 0..self.order.len() {
            self.scratch.clear();
            let range = &mut self.order[f][lo..hi];
            let mut write = 0;
            for k in 0..range.len() {
                let slot = range[k];
                if self.goes_left[slot as usize] {
                    range[write] = slot;
                    write += 1;
                } else {
                    self.scratch.push(slot);
                }
            }
            range[write..].copy_from_slice(&self.scratch);
            left_n = write;
        }
        lo + left_n
    }

    fn grow(&mut self, lo: usize, hi: usize, depth: usize) {
        let total = hi - lo;
        let positives: usize = self.order[0][lo..hi]
            .iter()
            .map(|&s| self.label(s) as usize)
            .sum();
        let pure = positives == 0 || positives == total;
        let depth_capped = self.params.max_depth.is_some_and(|m| depth >= m);
        let split = if pure || depth_capped || total < self.params.min_samples_split.max(2) {
            None
        } else {
            self.find_split(lo, hi, positives)
        };
        let Some(split) = split else {
            self.nodes.push(Node::Leaf { positive: positives, total });
            return;
        };
        let me = self.nodes.len();
        self.nodes.push(Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: me + 1,
            right: 0,
        });
        let mid = self.partition(lo, hi, split);
        self.grow(lo, mid, depth + 1);
        let right_index = self.nodes.len();
        if let Node::Split { right, .. } = &mut self.nodes[me] {
            *right = right_index;
        }
        self.grow(mid, hi, depth + 1);
    }
}

impl DecisionTree {
    /// Grows a tree on the given rows of `x`/`y`. `rows` may repeat.
    pub fn fit<R: Rng>(
        x: &[Vec<f64>],
        y: &[u8],
        rows: Vec<usize>,
        params: TreeParams,
        rng: &mut R,
    ) -> DecisionTree {
        let d = x.first().map_or(0, Vec::len);
        if rows.is_empty() || d == 0 {
            let positive = rows.iter().map(|&r| y[r] as usize).sum();
            return DecisionTree {
                nodes: vec![Node::Leaf {
                    positive,
                    total: rows.len(),
                }],
            };
        }
        let m = rows.len();
        let order = (0..d)
            .map(|f| {
                let mut slots: Vec<u32> = (0..m as u32).collect();
                slots.sort_by(|&a, &b| x[rows[a as usize]][f].total_cmp(&x[rows[b as usize]][f]));
                slots
            })
            .collect();
        let mut builder = Builder {
            x,
            y,
            rows,
            order,
            goes_left: vec![false; m],
            scratch: Vec::with_capacity(m),
            params,
            rng,
            nodes: Vec::new(),
        };
        builder.grow(0, m, 0);
        DecisionTree {
            nodes: builder.nodes,
        }
    }

    /// Fraction of positive training samples in the reached leaf.
    pub fn probability(&self, features: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if features[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
                Node::Leaf { positive, total } => {
                    return if *total == 0 {
                        0.0
                    } else {
                        *positive as f64 / *total as f64
                    };
                }
            }
        }
    }

    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes.first()? {
            Node::Split {
                feature, threshold, ..
            } => Some((*feature, *threshold)),
            Node::Leaf { .. } => None,
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }
}
