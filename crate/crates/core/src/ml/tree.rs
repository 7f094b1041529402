//! CART engine shared by the forest (weighted Gini) and gradient boosting
//! (second-order gain). Exact greedy splits over sorted unique values.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        gain: f64,
    },
    Leaf {
        value: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(&self, row: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split { feature, threshold, left, right, .. } => {
                    i = if row[*feature] <= *threshold { *left } else { *right };
                }
                Node::Leaf { value } => return value,
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match &t.nodes[i] {
                Node::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        go(self, 0)
    }

    /// Total split gain per feature.
    pub fn add_gains(&self, out: &mut [f64]) {
        for n in &self.nodes {
            if let Node::Split { feature, gain, .. } = n {
                out[*feature] += gain;
            }
        }
    }
}

/// Sufficient statistics of a node, accumulated row by row.
pub(crate) trait Accum: Clone {
    type Ctx<'a>;
    fn add(&mut self, ctx: &Self::Ctx<'_>, i: usize);
    fn sub(&mut self, ctx: &Self::Ctx<'_>, i: usize);
    fn zero(&self) -> Self;
    /// Larger is better; split gain is `score(L) + score(R) - score(parent)`.
    fn score(&self, ctx: &Self::Ctx<'_>) -> f64;
    fn child_ok(&self, ctx: &Self::Ctx<'_>) -> bool;
    fn is_pure(&self) -> bool;
    fn leaf_value(&self, ctx: &Self::Ctx<'_>) -> Vec<f64>;
}

pub(crate) struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
}

/// Minimum gain for a split to count as an improvement.
const MIN_GAIN: f64 = 1e-12;

struct Best {
    feature: usize,
    threshold: f64,
    gain: f64,
    n_left: usize,
}

fn best_split<A: Accum>(
    x: &[Vec<f64>],
    idx: &mut [usize],
    feats: &[usize],
    parent: &A,
    ctx: &A::Ctx<'_>,
    min_leaf: usize,
) -> Option<Best> {
    let parent_score = parent.score(ctx);
    let n = idx.len();
    let mut best: Option<Best> = None;
    for &f in feats {
        idx.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        let mut left = parent.zero();
        let mut right = parent.clone();
        for k in 0..n - 1 {
            let i = idx[k];
            left.add(ctx, i);
            right.sub(ctx, i);
            let (a, b) = (x[i][f], x[idx[k + 1]][f]);
            if a == b || k + 1 < min_leaf || n - k - 1 < min_leaf {
                continue;
            }
            if !left.child_ok(ctx) || !right.child_ok(ctx) {
                continue;
            }
            let gain = left.score(ctx) + right.score(ctx) - parent_score;
            if gain > MIN_GAIN && best.as_ref().is_none_or(|bst| gain > bst.gain) {
                let mut threshold = 0.5 * (a + b);
                if threshold >= b {
                    threshold = a;
                }
                best = Some(Best { feature: f, threshold, gain, n_left: k + 1 });
            }
        }
    }
    best
}

/// Grows one tree over rows `idx`. `pick_features` returns the candidate
/// features for each node, in ascending order.
pub(crate) fn grow<A: Accum>(
    x: &[Vec<f64>],
    idx: Vec<usize>,
    root: A,
    ctx: &A::Ctx<'_>,
    params: &TreeParams,
    mut pick_features: impl FnMut() -> Vec<usize>,
) -> Tree {
    let mut nodes: Vec<Node> = Vec::new();
    // (slot, rows, stats, depth)
    let mut stack = vec![(0usize, idx, root, 0usize)];
    nodes.push(Node::Leaf { value: Vec::new() });
    while let Some((slot, mut rows, stats, depth)) = stack.pop() {
        let can_split = depth < params.max_depth && rows.len() >= params.min_samples_split && !stats.is_pure();
        let split = if can_split {
            let feats = pick_features();
            best_split(x, &mut rows, &feats, &stats, ctx, params.min_samples_leaf)
        } else {
            None
        };
        match split {
            None => nodes[slot] = Node::Leaf { value: stats.leaf_value(ctx) },
            Some(b) => {
                let (mut l, mut r) = (Vec::with_capacity(b.n_left), Vec::with_capacity(rows.len() - b.n_left));
                let (mut ls, mut rs) = (stats.zero(), stats.zero());
                for &i in &rows {
                    if x[i][b.feature] <= b.threshold {
                        l.push(i);
                        ls.add(ctx, i);
                    } else {
                        r.push(i);
                        rs.add(ctx, i);
                    }
                }
                let (li, ri) = (nodes.len(), nodes.len() + 1);
                nodes.push(Node::Leaf { value: Vec::new() });
                nodes.push(Node::Leaf { value: Vec::new() });
                nodes[slot] =
                    Node::Split { feature: b.feature, threshold: b.threshold, left: li, right: ri, gain: b.gain };
                // right pushed first so the left subtree is grown first
                stack.push((ri, r, rs, depth + 1));
                stack.push((li, l, ls, depth + 1));
            }
        }
    }
    Tree { nodes }
}

/// Weighted class counts for Gini impurity.
#[derive(Debug, Clone)]
pub(crate) struct GiniAccum {
    pub w: Vec<f64>,
    pub total: f64,
}

pub(crate) struct GiniCtx<'a> {
    pub y: &'a [usize],
    pub weight: &'a [f64],
}

impl GiniAccum {
    pub fn new(n_classes: usize) -> Self {
        GiniAccum { w: vec![0.0; n_classes], total: 0.0 }
    }
}

impl Accum for GiniAccum {
    type Ctx<'a> = GiniCtx<'a>;

    fn add(&mut self, ctx: &Self::Ctx<'_>, i: usize) {
        self.w[ctx.y[i]] += ctx.weight[i];
        self.total += ctx.weight[i];
    }

    fn sub(&mut self, ctx: &Self::Ctx<'_>, i: usize) {
        self.w[ctx.y[i]] -= ctx.weight[i];
        self.total -= ctx.weight[i];
    }

    fn zero(&self) -> Self {
        GiniAccum::new(self.w.len())
    }

    /// `-W · gini = Σ w_c² / W − W`.
    fn score(&self, _: &Self::Ctx<'_>) -> f64 {
        if self.total <= 0.0 {
            return 0.0;
        }
        self.w.iter().map(|v| v * v).sum::<f64>() / self.total - self.total
    }

    fn child_ok(&self, _: &Self::Ctx<'_>) -> bool {
        self.total > 0.0
    }

    fn is_pure(&self) -> bool {
        self.w.iter().filter(|&&v| v > 1e-12).count() <= 1
    }

    fn leaf_value(&self, _: &Self::Ctx<'_>) -> Vec<f64> {
        self.w.iter().map(|v| v / self.total).collect()
    }
}

/// Gradient and hessian sums for second-order boosting.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GradAccum {
    pub g: f64,
    pub h: f64,
}

pub(crate) struct GradCtx<'a> {
    pub g: &'a [f64],
    pub h: &'a [f64],
    pub lambda: f64,
    pub min_child_weight: f64,
    pub learning_rate: f64,
}

impl Accum for GradAccum {
    type Ctx<'a> = GradCtx<'a>;

    fn add(&mut self, ctx: &Self::Ctx<'_>, i: usize) {
        self.g += ctx.g[i];
        self.h += ctx.h[i];
    }

    fn sub(&mut self, ctx: &Self::Ctx<'_>, i: usize) {
        self.g -= ctx.g[i];
        self.h -= ctx.h[i];
    }

    fn zero(&self) -> Self {
        GradAccum { g: 0.0, h: 0.0 }
    }

    /// `½ G² / (H + λ)`.
    fn score(&self, ctx: &Self::Ctx<'_>) -> f64 {
        0.5 * self.g * self.g / (self.h + ctx.lambda)
    }

    fn child_ok(&self, ctx: &Self::Ctx<'_>) -> bool {
        self.h >= ctx.min_child_weight
    }

    fn is_pure(&self) -> bool {
        false
    }

    fn leaf_value(&self, ctx: &Self::Ctx<'_>) -> Vec<f64> {
        vec![-self.g / (self.h + ctx.lambda) * ctx.learning_rate]
    }
}

/// Row permutation sorting rows lexicographically by features then label,
/// so that fitting does not depend on input row order.
pub(crate) fn canonical_order<L: PartialOrd>(x: &[Vec<f64>], y: &[L]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| {
        for (va, vb) in x[a].iter().zip(&x[b]) {
            let c = va.total_cmp(vb);
            if c.is_ne() {
                return c;
            }
        }
        y[a].partial_cmp(&y[b]).unwrap_or(std::cmp::Ordering::Equal)
    });
    order
}
