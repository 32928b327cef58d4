use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, TreeParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
}

/// One seed per tree, drawn up front from the master seed so trees can be
/// trained in any order.
pub(crate) fn tree_seeds(master: u64, n_trees: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    (0..n_trees).map(|_| rng.random()).collect()
}

impl RandomForest {
    pub fn fit(
        x: &[Vec<f64>],
        y: &[u8],
        n_trees: usize,
        bootstrap: bool,
        params: TreeParams,
        seed: u64,
    ) -> RandomForest {
        let n = x.len();
        let trees = tree_seeds(seed, n_trees)
            .into_par_iter()
            .map(|tree_seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
                let rows = if bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                DecisionTree::fit(x, y, rows, params, &mut rng)
            })
            .collect();
        RandomForest { trees }
    }

    /// Fraction of trees voting positive.
    pub fn vote_fraction(&self, features: &[f64]) -> f64 {
        let votes = self
            .trees
            .iter()
            .filter(|t| t.probability(features) >= 0.5)
            .count();
        votes as f64 / self.trees.len() as f64
    }
}
