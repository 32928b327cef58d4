use serde::{Deserialize, Serialize};

pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub prior: f64,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

/// Gaussian naive Bayes over two classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNaiveBayes {
    pub negative: ClassStats,
    pub positive: ClassStats,
}

fn stats(x: &[Vec<f64>], rows: &[usize], n_total: usize) -> ClassStats {
    let d = x[rows[0]].len();
    let n = rows.len() as f64;
    let mut means = vec![0.0; d];
    for &r in rows {
        for (m, v) in means.iter_mut().zip(&x[r]) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut variances = vec![0.0; d];
    for &r in rows {
        for ((s, v), m) in variances.iter_mut().zip(&x[r]).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    variances
        .iter_mut()
        .for_each(|s| *s = (*s / n).max(VARIANCE_FLOOR));
    ClassStats {
        prior: n / n_total as f64,
        means,
        variances,
    }
}

impl ClassStats {
    fn log_joint(&self, features: &[f64]) -> f64 {
        let mut ll = self.prior.ln();
        for ((x, m), v) in features.iter().zip(&self.means).zip(&self.variances) {
            ll -= 0.5 * (2.0 * std::f64::consts::PI * v).ln() + (x - m) * (x - m) / (2.0 * v);
        }
        ll
    }
}

impl GaussianNaiveBayes {
    /// Caller guarantees both classes are present.
    pub fn fit(x: &[Vec<f64>], y: &[u8]) -> GaussianNaiveBayes {
        let (pos, neg): (Vec<usize>, Vec<usize>) = (0..x.len()).partition(|&i| y[i] == 1);
        GaussianNaiveBayes {
            negative: stats(x, &neg, x.len()),
            positive: stats(x, &pos, x.len()),
        }
    }

    /// Posterior probability of the positive class.
    pub fn posterior(&self, features: &[f64]) -> f64 {
        let l0 = self.negative.log_joint(features);
        let l1 = self.positive.log_joint(features);
        1.0 / (1.0 + (l0 - l1).exp())
    }
}
