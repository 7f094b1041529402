use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn folds_from_assignment(assign: &[usize], k: usize) -> Vec<Fold> {
    (0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..assign.len()).partition(|&i| assign[i] == f);
            Fold { train, test }
        })
        .collect()
}

/// Shuffles each class and deals its members round-robin across folds,
/// continuing from where the previous class stopped, so every fold holds
/// ⌊n_c/k⌋ or ⌈n_c/k⌉ rows of class c.
pub fn stratified_kfold(y: &[usize], n_classes: usize, k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("k-fold needs k >= 2, got {k}")));
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &c) in y.iter().enumerate() {
        if c >= n_classes {
            return Err(Error::UnknownLabel(c));
        }
        members[c].push(i);
    }
    if let Some((c, m)) = members.iter().enumerate().find(|(_, m)| !m.is_empty() && m.len() < k) {
        return Err(Error::ClassCountBelowK(format!("class {c} has {} rows for k = {k}", m.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assign = vec![0usize; y.len()];
    let mut next = 0;
    for m in members.iter_mut() {
        m.shuffle(&mut rng);
        for &i in m.iter() {
            assign[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(folds_from_assignment(&assign, k))
}

/// Folds that never split a group; groups go largest first to the
/// currently smallest fold (ties by name, then fold index).
pub fn group_kfold(groups: &[String], k: usize) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("k-fold needs k >= 2, got {k}")));
    }
    let mut by: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, g) in groups.iter().enumerate() {
        by.entry(g.as_str()).or_default().push(i);
    }
    if by.len() < k {
        return Err(Error::DegenerateGroups(format!("{} distinct groups for k = {k}", by.len())));
    }
    let mut order: Vec<(&str, Vec<usize>)> = by.into_iter().collect();
    order.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(b.0)));
    let mut sizes = vec![0usize; k];
    let mut assign = vec![0usize; groups.len()];
    for (_, rows) in order {
        let f = (0..k).min_by_key(|&f| (sizes[f], f)).unwrap_or(0);
        sizes[f] += rows.len();
        for i in rows {
            assign[i] = f;
        }
    }
    Ok(folds_from_assignment(&assign, k))
}
