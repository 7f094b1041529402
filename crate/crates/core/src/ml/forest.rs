use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{canonical_order, grow, GiniAccum, GiniCtx, Tree, TreeParams};
use super::{argmax, check_labels, check_matrix, MODEL_FORMAT_VERSION};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    Sqrt,
    All,
    Count(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub max_features: MaxFeatures,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    pub bootstrap: bool,
    pub balanced: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 500,
            max_depth: 10,
            max_features: MaxFeatures::Sqrt,
            min_samples_leaf: 2,
            min_samples_split: 10,
            bootstrap: false,
            balanced: true,
            seed: 42,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 || self.max_depth == 0 || self.min_samples_leaf == 0 || self.min_samples_split == 0 {
            return Err(Error::InvalidConfig("forest counts must be positive and depth >= 1".into()));
        }
        if self.max_features == MaxFeatures::Count(0) {
            return Err(Error::InvalidConfig("max_features must be >= 1".into()));
        }
        Ok(())
    }

    fn mtry(&self, p: usize) -> usize {
        match self.max_features {
            MaxFeatures::Sqrt => ((p as f64).sqrt() as usize).max(1),
            MaxFeatures::All => p,
            MaxFeatures::Count(k) => k.min(p),
        }
    }
}

/// `total / (n_classes · count)` per class, 0 for absent classes.
pub fn balanced_weights(y: &[usize], n_classes: usize) -> Vec<f64> {
    let mut counts = vec![0usize; n_classes];
    for &c in y {
        counts[c] += 1;
    }
    let present = counts.iter().filter(|&&c| c > 0).count().max(1);
    counts.iter().map(|&c| if c == 0 { 0.0 } else { y.len() as f64 / (present as f64 * c as f64) }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub format_version: u32,
    pub config: ForestConfig,
    pub n_classes: usize,
    pub n_features: usize,
    pub trees: Vec<Tree>,
}

impl ForestModel {
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, cfg: &ForestConfig) -> Result<Self> {
        cfg.validate()?;
        let p = check_matrix(x)?;
        check_labels(y, x.len(), n_classes)?;
        let order = canonical_order(x, y);
        let xs: Vec<Vec<f64>> = order.iter().map(|&i| x[i].clone()).collect();
        let ys: Vec<usize> = order.iter().map(|&i| y[i]).collect();
        let cw = if cfg.balanced { balanced_weights(&ys, n_classes) } else { vec![1.0; n_classes] };
        let base_w: Vec<f64> = ys.iter().map(|&c| cw[c]).collect();
        let params = TreeParams {
            max_depth: cfg.max_depth,
            min_samples_split: cfg.min_samples_split,
            min_samples_leaf: cfg.min_samples_leaf,
        };
        let mtry = cfg.mtry(p);
        let trees = (0..cfg.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(t as u64);
                let mut w = base_w.clone();
                if cfg.bootstrap {
                    let mut counts = vec![0.0; xs.len()];
                    for _ in 0..xs.len() {
                        counts[rand::Rng::random_range(&mut rng, 0..xs.len())] += 1.0;
                    }
                    for (wi, c) in w.iter_mut().zip(counts) {
                        *wi *= c;
                    }
                }
                let rows: Vec<usize> = (0..xs.len()).filter(|&i| w[i] > 0.0).collect();
                let ctx = GiniCtx { y: &ys, weight: &w };
                let mut root = GiniAccum::new(n_classes);
                for &i in &rows {
                    use super::tree::Accum;
                    root.add(&ctx, i);
                }
                grow(&xs, rows, root, &ctx, &params, || {
                    let mut f = sample(&mut rng, p, mtry).into_vec();
                    f.sort_unstable();
                    f
                })
            })
            .collect();
        Ok(ForestModel { format_version: MODEL_FORMAT_VERSION, config: *cfg, n_classes, n_features: p, trees })
    }

    /// Mean of the trees' leaf class distributions.
    pub fn predict_proba_row(&self, row: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.n_classes];
        for t in &self.trees {
            for (a, v) in acc.iter_mut().zip(t.leaf(row)) {
                *a += v;
            }
        }
        let n = self.trees.len() as f64;
        acc.iter().map(|v| v / n).collect()
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        argmax(&self.predict_proba_row(row))
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<usize>> {
        if let Some(r) = x.iter().find(|r| r.len() != self.n_features) {
            return Err(Error::LengthMismatch(self.n_features, r.len()));
        }
        Ok(x.par_iter().map(|r| self.predict_row(r)).collect())
    }

    pub fn feature_gains(&self) -> Vec<f64> {
        let mut g = vec![0.0; self.n_features];
        for t in &self.trees {
            t.add_gains(&mut g);
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::testutil::blobs;

    #[test]
    fn blobs_fit_and_generalise() {
        let (xtr, ytr) = blobs(20, 5.0, 1);
        let (xte, yte) = blobs(50, 5.0, 2);
        let cfg = ForestConfig { n_trees: 100, ..Default::default() };
        let m = ForestModel::fit(&xtr, &ytr, 3, &cfg).unwrap();
        let tr = m.predict(&xtr).unwrap();
        assert_eq!(tr, ytr);
        let te = m.predict(&xte).unwrap();
        let acc = te.iter().zip(&yte).filter(|(a, b)| a == b).count() as f64 / yte.len() as f64;
        assert!(acc >= 0.95, "{acc}");
    }

    #[test]
    fn single_class_rejected() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0]];
        assert!(matches!(ForestModel::fit(&x, &[1, 1, 1], 3, &ForestConfig::default()), Err(Error::SingleClass)));
    }

    #[test]
    fn nan_rejected() {
        let x = vec![vec![0.0], vec![f64::NAN], vec![2.0], vec![3.0]];
        assert!(matches!(ForestModel::fit(&x, &[0, 1, 0, 1], 2, &ForestConfig::default()), Err(Error::NanFeatures)));
    }

    #[test]
    fn balanced_weight_formula() {
        let w = balanced_weights(&[0, 0, 0, 1], 2);
        assert_eq!(w, vec![4.0 / 6.0, 2.0]);
    }

    #[test]
    fn deterministic_given_seed() {
        let (x, y) = blobs(15, 2.0, 3);
        let cfg = ForestConfig { n_trees: 20, ..Default::default() };
        let a = ForestModel::fit(&x, &y, 3, &cfg).unwrap();
        let b = ForestModel::fit(&x, &y, 3, &cfg).unwrap();
        assert_eq!(a, b);
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
            let a = ForestModel::fit(&x, &y, 3, &ForestConfig { n_trees: 20, ..Default::default() }).unwrap();
            let b = ForestModel::fit(&xp, &yp, 3, &ForestConfig { n_trees: 20, ..Default::default() }).unwrap();
            proptest::prop_assert_eq!(a, b);
        }
    }
}
