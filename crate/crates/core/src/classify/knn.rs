//! k-nearest neighbours over stored examples, Euclidean distance.
//!
//! Neighbours are ordered by `(distance, example index)`, so equal distances
//! resolve to the earlier example. A KD-tree accelerates the search; it
//! only prunes subtrees whose lower bound is strictly worse than the current
//! k-th neighbour, which keeps results identical to a linear scan.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "KnnData", into = "KnnData")]
pub struct KNearest {
    pub k: usize,
    points: Vec<Vec<f64>>,
    labels: Vec<u8>,
    index: KdTree,
}

#[derive(Serialize, Deserialize)]
struct KnnData {
    k: usize,
    points: Vec<Vec<f64>>,
    labels: Vec<u8>,
}

impl From<KnnData> for KNearest {
    fn from(d: KnnData) -> Self {
        KNearest::fit(d.points, d.labels, d.k)
    }
}

impl From<KNearest> for KnnData {
    fn from(m: KNearest) -> Self {
        KnnData {
            k: m.k,
            points: m.points,
            labels: m.labels,
        }
    }
}

impl PartialEq for KNearest {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.points == other.points && self.labels == other.labels
    }
}

#[derive(Debug, Clone, Default)]
struct KdTree {
    nodes: Vec<KdNode>,
    /// Example indices, grouped so that every leaf owns a contiguous range.
    perm: Vec<usize>,
}

#[derive(Debug, Clone)]
enum KdNode {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        dim: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

impl KdTree {
    fn build(points: &[Vec<f64>]) -> KdTree {
        let mut tree = KdTree {
            nodes: Vec::new(),
            perm: (0..points.len()).collect(),
        };
        if !points.is_empty() {
            tree.build_range(points, 0, points.len());
        }
        tree
    }

    fn build_range(&mut self, points: &[Vec<f64>], start: usize, end: usize) -> usize {
        let me = self.nodes.len();
        self.nodes.push(KdNode::Leaf { start, end });
        if end - start <= LEAF_SIZE {
            return me;
        }
        let d = points[self.perm[start]].len();
        let mut dim = 0;
        let mut widest = -1.0;
        for j in 0..d {
            let (lo, hi) = self.perm[start..end]
                .iter()
                .map(|&i| points[i][j])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            if hi - lo > widest {
                widest = hi - lo;
                dim = j;
            }
        }
        if widest <= 0.0 {
            return me;
        }
        let mid = start + (end - start) / 2;
        self.perm[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a][dim].total_cmp(&points[b][dim])
        });
        let mut value = points[self.perm[mid]][dim];
        // Everything < value to the left, >= value to the right. When the
        // median is also the minimum, split just above it instead.
        let mut split_at = self.partition(points, start, end, dim, value);
        if split_at == start {
            value = self.perm[start..end]
                .iter()
                .map(|&i| points[i][dim])
                .filter(|&v| v > value)
                .fold(f64::INFINITY, f64::min);
            split_at = self.partition(points, start, end, dim, value);
        }
        if split_at == start || split_at == end {
            return me;
        }
        let left = self.build_range(points, start, split_at);
        let right = self.build_range(points, split_at, end);
        self.nodes[me] = KdNode::Split {
            dim,
            value,
            left,
            right,
        };
        me
    }

    fn partition(&mut self, points: &[Vec<f64>], start: usize, end: usize, dim: usize, value: f64) -> usize {
        let slice = &mut self.perm[start..end];
        let mut write = 0;
        for k in 0..slice.len() {
            if points[slice[k]][dim] < value {
                slice.swap(write, k);
                write += 1;
            }
        }
        start + write
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    dist: f64,
    index: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl KNearest {
    pub fn fit(points: Vec<Vec<f64>>, labels: Vec<u8>, k: usize) -> KNearest {
        let index = KdTree::build(&points);
        KNearest {
            k,
            points,
            labels,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices of the k nearest stored examples, nearest first.
    pub fn neighbours(&self, query: &[f64]) -> Vec<usize> {
        let k = self.k.min(self.points.len());
        if k == 0 {
            return Vec::new();
        }
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
        let mut offsets = vec![0.0; query.len()];
        self.search(0, query, k, 0.0, &mut offsets, &mut heap);
        let mut out = heap.into_sorted_vec();
        out.truncate(k);
        out.into_iter().map(|c| c.index).collect()
    }

    fn offer(&self, heap: &mut BinaryHeap<Candidate>, k: usize, c: Candidate) {
        if heap.len() < k {
            heap.push(c);
        } else if c < *heap.peek().expect("heap is full") {
            heap.pop();
            heap.push(c);
        }
    }

    /// `cell_dist` is a lower bound on the squared distance from `query` to
    /// any point under `node`, built from the per-axis `offsets`.
    fn search(
        &self,
        node: usize,
        query: &[f64],
        k: usize,
        cell_dist: f64,
        offsets: &mut [f64],
        heap: &mut BinaryHeap<Candidate>,
    ) {
        match &self.index.nodes[node] {
            KdNode::Leaf { start, end } => {
                for &i in &self.index.perm[*start..*end] {
                    let dist = squared_distance(query, &self.points[i]);
                    self.offer(heap, k, Candidate { dist, index: i });
                }
            }
            KdNode::Split {
                dim,
                value,
                left,
                right,
            } => {
                let diff = query[*dim] - value;
                let (near, far) = if diff < 0.0 {
                    (*left, *right)
                } else {
                    (*right, *left)
                };
                self.search(near, query, k, cell_dist, offsets, heap);
                let old = offsets[*dim];
                let far_dist = cell_dist - old * old + diff * diff;
                // Ties must still be visited: an equally distant point with
                // a lower index wins. The slack absorbs rounding in the
                // incremental bound.
                let full = heap.len() == k;
                if !full || far_dist * (1.0 - 1e-9) <= heap.peek().expect("heap is full").dist {
                    offsets[*dim] = diff;
                    self.search(far, query, k, far_dist, offsets, heap);
                    offsets[*dim] = old;
                }
            }
        }
    }

    /// Fraction of the k nearest neighbours labelled positive.
    pub fn vote_fraction(&self, query: &[f64]) -> f64 {
        let nn = self.neighbours(query);
        let positives = nn.iter().filter(|&&i| self.labels[i] == 1).count();
        positives as f64 / nn.len() as f64
    }
}
