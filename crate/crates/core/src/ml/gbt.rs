use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{canonical_order, grow, Accum, GradAccum, GradCtx, Tree, TreeParams};
use super::{argmax, check_labels, check_matrix, MODEL_FORMAT_VERSION};
use crate::error::{Error, Result};

const HESS_EPS: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    SoftmaxMulticlass,
    LogisticBinary,
    SquaredErrorRegression,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbtConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub objective: Objective,
    /// Used by the classification objectives.
    pub n_classes: usize,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    /// Minimum hessian sum per child.
    pub min_child_weight: f64,
    pub seed: u64,
}

impl Default for GbtConfig {
    fn default() -> Self {
        GbtConfig {
            n_trees: 500,
            max_depth: 6,
            learning_rate: 0.1,
            objective: Objective::SoftmaxMulticlass,
            n_classes: 3,
            lambda: 1.0,
            min_child_weight: 1.0,
            seed: 42,
        }
    }
}

impl GbtConfig {
    pub fn regression() -> Self {
        GbtConfig { objective: Objective::SquaredErrorRegression, n_classes: 1, ..Default::default() }
    }

    pub fn classifier(n_classes: usize) -> Self {
        let objective = if n_classes == 2 { Objective::LogisticBinary } else { Objective::SoftmaxMulticlass };
        GbtConfig { objective, n_classes, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidConfig(format!("learning_rate {} outside (0, 1]", self.learning_rate)));
        }
        if self.n_trees == 0 || self.max_depth == 0 {
            return Err(Error::InvalidConfig("n_trees and max_depth must be >= 1".into()));
        }
        if !(self.lambda >= 0.0) || !(self.min_child_weight >= 0.0) {
            return Err(Error::InvalidConfig("lambda and min_child_weight must be >= 0".into()));
        }
        match self.objective {
            Objective::SoftmaxMulticlass if self.n_classes < 2 => {
                Err(Error::InvalidConfig(format!("softmax needs n_classes >= 2, got {}", self.n_classes)))
            }
            Objective::LogisticBinary if self.n_classes != 2 => {
                Err(Error::InvalidConfig(format!("logistic needs n_classes = 2, got {}", self.n_classes)))
            }
            _ => Ok(()),
        }
    }

    fn n_outputs(&self) -> usize {
        match self.objective {
            Objective::SoftmaxMulticlass => self.n_classes,
            _ => 1,
        }
    }
}

/// Boosted trees: `trees[round][output]` added to `base_margin[output]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub format_version: u32,
    pub config: GbtConfig,
    pub n_features: usize,
    pub base_margin: Vec<f64>,
    pub trees: Vec<Vec<Tree>>,
    /// Training loss after each round.
    pub train_loss: Vec<f64>,
}

fn softmax(m: &[f64]) -> Vec<f64> {
    let mx = m.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = m.iter().map(|v| (v - mx).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

impl GbtModel {
    pub fn fit_classifier(x: &[Vec<f64>], y: &[usize], cfg: &GbtConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.objective == Objective::SquaredErrorRegression {
            return Err(Error::InvalidConfig("regression objective given to classifier".into()));
        }
        check_matrix(x)?;
        check_labels(y, x.len(), cfg.n_classes)?;
        let t: Vec<f64> = y.iter().map(|&c| c as f64).collect();
        Self::fit_impl(x, &t, cfg)
    }

    pub fn fit_regression(x: &[Vec<f64>], y: &[f64], cfg: &GbtConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.objective != Objective::SquaredErrorRegression {
            return Err(Error::InvalidConfig("classification objective given to regressor".into()));
        }
        check_matrix(x)?;
        if y.len() != x.len() {
            return Err(Error::LengthMismatch(x.len(), y.len()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NanFeatures);
        }
        Self::fit_impl(x, y, cfg)
    }

    fn fit_impl(x: &[Vec<f64>], y: &[f64], cfg: &GbtConfig) -> Result<Self> {
        let p = x[0].len();
        let order = canonical_order(x, y);
        let xs: Vec<Vec<f64>> = order.iter().map(|&i| x[i].clone()).collect();
        let ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
        let n = xs.len();
        let k = cfg.n_outputs();
        let base_margin = match cfg.objective {
            Objective::SoftmaxMulticlass => vec![0.0; k],
            Objective::LogisticBinary => {
                let pos = ys.iter().filter(|&&v| v == 1.0).count() as f64 / n as f64;
                let pos = pos.clamp(1e-6, 1.0 - 1e-6);
                vec![(pos / (1.0 - pos)).ln()]
            }
            Objective::SquaredErrorRegression => vec![ys.iter().sum::<f64>() / n as f64],
        };
        let mut margin: Vec<Vec<f64>> = vec![base_margin.clone(); n];
        let params = TreeParams { max_depth: cfg.max_depth, min_samples_split: 2, min_samples_leaf: 1 };
        let all: Vec<usize> = (0..p).collect();
        let mut trees = Vec::with_capacity(cfg.n_trees);
        let mut train_loss = Vec::with_capacity(cfg.n_trees);
        let mut g = vec![vec![0.0; n]; k];
        let mut h = vec![vec![0.0; n]; k];
        for _ in 0..cfg.n_trees {
            for i in 0..n {
                match cfg.objective {
                    Objective::SoftmaxMulticlass => {
                        let pr = softmax(&margin[i]);
                        for c in 0..k {
                            let yc = if ys[i] as usize == c { 1.0 } else { 0.0 };
                            g[c][i] = pr[c] - yc;
                            h[c][i] = (2.0 * pr[c] * (1.0 - pr[c])).max(HESS_EPS);
                        }
                    }
                    Objective::LogisticBinary => {
                        let pr = sigmoid(margin[i][0]);
                        g[0][i] = pr - ys[i];
                        h[0][i] = (pr * (1.0 - pr)).max(HESS_EPS);
                    }
                    Objective::SquaredErrorRegression => {
                        g[0][i] = margin[i][0] - ys[i];
                        h[0][i] = 1.0;
                    }
                }
            }
            let round: Vec<Tree> = (0..k)
                .map(|c| {
                    let ctx = GradCtx {
                        g: &g[c],
                        h: &h[c],
                        lambda: cfg.lambda,
                        min_child_weight: cfg.min_child_weight,
                        learning_rate: cfg.learning_rate,
                    };
                    let mut root = GradAccum { g: 0.0, h: 0.0 };
                    for i in 0..n {
                        root.add(&ctx, i);
                    }
                    grow(&xs, (0..n).collect(), root, &ctx, &params, || all.clone())
                })
                .collect();
            for (i, m) in margin.iter_mut().enumerate() {
                for (c, t) in round.iter().enumerate() {
                    m[c] += t.leaf(&xs[i])[0];
                }
            }
            train_loss.push(loss(cfg.objective, &margin, &ys));
            trees.push(round);
        }
        Ok(GbtModel {
            format_version: MODEL_FORMAT_VERSION,
            config: *cfg,
            n_features: p,
            base_margin,
            trees,
            train_loss,
        })
    }

    pub fn margin_row(&self, row: &[f64]) -> Vec<f64> {
        let mut m = self.base_margin.clone();
        for round in &self.trees {
            for (c, t) in round.iter().enumerate() {
                m[c] += t.leaf(row)[0];
            }
        }
        m
    }

    pub fn predict_proba_row(&self, row: &[f64]) -> Vec<f64> {
        let m = self.margin_row(row);
        match self.config.objective {
            Objective::SoftmaxMulticlass => softmax(&m),
            Objective::LogisticBinary => {
                let p = sigmoid(m[0]);
                vec![1.0 - p, p]
            }
            Objective::SquaredErrorRegression => m,
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        argmax(&self.predict_proba_row(row))
    }

    fn check_width(&self, x: &[Vec<f64>]) -> Result<()> {
        match x.iter().find(|r| r.len() != self.n_features) {
            Some(r) => Err(Error::LengthMismatch(self.n_features, r.len())),
            None => Ok(()),
        }
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<usize>> {
        self.check_width(x)?;
        Ok(x.par_iter().map(|r| self.predict_row(r)).collect())
    }

    pub fn predict_values(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.check_width(x)?;
        Ok(x.par_iter().map(|r| self.margin_row(r)[0]).collect())
    }
}

fn loss(obj: Objective, margin: &[Vec<f64>], y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let total: f64 = margin
        .iter()
        .zip(y)
        .map(|(m, &t)| match obj {
            Objective::SoftmaxMulticlass => -softmax(m)[t as usize].max(1e-300).ln(),
            Objective::LogisticBinary => {
                let p = sigmoid(m[0]).clamp(1e-300, 1.0 - 1e-16);
                -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
            }
            Objective::SquaredErrorRegression => (m[0] - t) * (m[0] - t),
        })
        .sum();
    total / n
}

/// One independent regressor per output column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiGbtRegressor {
    pub format_version: u32,
    pub models: Vec<GbtModel>,
}

impl MultiGbtRegressor {
    /// `y[row][output]`.
    pub fn fit(x: &[Vec<f64>], y: &[Vec<f64>], cfg: &GbtConfig) -> Result<Self> {
        if y.len() != x.len() {
            return Err(Error::LengthMismatch(x.len(), y.len()));
        }
        let q = y.first().map_or(0, |r| r.len());
        if q == 0 || y.iter().any(|r| r.len() != q) {
            return Err(Error::InvalidConfig("regression targets must be a non-empty rectangular matrix".into()));
        }
        let models = (0..q)
            .into_par_iter()
            .map(|j| {
                let col: Vec<f64> = y.iter().map(|r| r[j]).collect();
                GbtModel::fit_regression(x, &col, cfg)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiGbtRegressor { format_version: MODEL_FORMAT_VERSION, models })
    }

    pub fn n_outputs(&self) -> usize {
        self.models.len()
    }

    pub fn predict_row(&self, row: &[f64]) -> Vec<f64> {
        self.models.iter().map(|m| m.margin_row(row)[0]).collect()
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if let Some(m) = self.models.first() {
            m.check_width(x)?;
        }
        Ok(x.par_iter().map(|r| self.predict_row(r)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::testutil::{blobs, linear};

    #[test]
    fn blobs_softmax() {
        let (xtr, ytr) = blobs(20, 5.0, 1);
        let (xte, yte) = blobs(50, 5.0, 2);
        let cfg = GbtConfig { n_trees: 100, ..Default::default() };
        let m = GbtModel::fit_classifier(&xtr, &ytr, &cfg).unwrap();
        let te = m.predict(&xte).unwrap();
        let acc = te.iter().zip(&yte).filter(|(a, b)| a == b).count() as f64 / yte.len() as f64;
        assert!(acc >= 0.95, "{acc}");
        for w in m.train_loss.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{w:?}");
        }
    }

    #[test]
    fn logistic_binary() {
        let (x, y) = blobs(20, 5.0, 4);
        let keep: Vec<usize> = (0..y.len()).filter(|&i| y[i] < 2).collect();
        let x: Vec<_> = keep.iter().map(|&i| x[i].clone()).collect();
        let y: Vec<_> = keep.iter().map(|&i| y[i]).collect();
        let m = GbtModel::fit_classifier(&x, &y, &GbtConfig { n_trees: 50, ..GbtConfig::classifier(2) }).unwrap();
        assert_eq!(m.predict(&x).unwrap(), y);
    }

    #[test]
    fn regression_r2() {
        let (xtr, ytr) = linear(500, 1);
        let (xte, yte) = linear(200, 2);
        let m = GbtModel::fit_regression(&xtr, &ytr, &GbtConfig::regression()).unwrap();
        let pred = m.predict_values(&xte).unwrap();
        let mean = yte.iter().sum::<f64>() / yte.len() as f64;
        let ss_res: f64 = pred.iter().zip(&yte).map(|(p, t)| (p - t) * (p - t)).sum();
        let ss_tot: f64 = yte.iter().map(|t| (t - mean) * (t - mean)).sum();
        assert!(1.0 - ss_res / ss_tot >= 0.99);
    }

    #[test]
    fn softmax_needs_two_classes() {
        let cfg = GbtConfig { n_classes: 1, ..Default::default() };
        let x = vec![vec![0.0], vec![1.0]];
        assert!(matches!(GbtModel::fit_classifier(&x, &[0, 0], &cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn learning_rate_range() {
        let cfg = GbtConfig { learning_rate: 1.5, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = GbtConfig { learning_rate: 0.0, ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn multi_output() {
        let (x, y) = linear(200, 3);
        let ys: Vec<Vec<f64>> = y.iter().zip(&x).map(|(v, r)| vec![*v, -r[1]]).collect();
        let cfg = GbtConfig { n_trees: 100, ..GbtConfig::regression() };
        let m = MultiGbtRegressor::fit(&x, &ys, &cfg).unwrap();
        assert_eq!(m.n_outputs(), 2);
        let p = m.predict(&x[..3]).unwrap();
        assert!(p.iter().flatten().all(|v| v.is_finite()));
    }
    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(16))]
        #[test]
        fn row_order_invariant(seed in 0u64..1000, perm_seed in proptest::prelude::any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let (x, y) = blobs(12, 2.0, seed);
            let mut idx: Vec<usize> = (0..x.len()).collect();
            idx.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed));
            let xp: Vec<Vec<f64>> = idx.iter().map(|&i| x[i].clone()).collect();
            let yp: Vec<usize> = idx.iter().map(|&i| y[i]).collect();
            let a = GbtModel::fit_classifier(&x, &y, &GbtConfig { n_trees: 10, ..Default::default() }).unwrap();
            let b = GbtModel::fit_classifier(&xp, &yp, &GbtConfig { n_trees: 10, ..Default::default() }).unwrap();
            proptest::prop_assert_eq!(a, b);
        }
    }
}
