use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Task;
use crate::data::FeatureTable;
use crate::error::{Error, Result};

pub const SMOTE_DEFAULT_K: usize = 5;

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `k` nearest same-class members of `members[i]`, by distance then index.
fn neighbours(x: &[Vec<f64>], members: &[usize], i: usize, k: usize) -> Vec<usize> {
    let me = members[i];
    let mut d: Vec<(f64, usize)> = members.iter().filter(|&&j| j != me).map(|&j| (dist2(&x[me], &x[j]), j)).collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.into_iter().take(k).map(|(_, j)| j).collect()
}

/// Synthetic rows that bring every present class up to the majority count.
/// Returns `(rows, labels, base_row)` to append; inputs are untouched.
pub fn smote_matrix(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    k: usize,
    seed: u64,
) -> Result<(Vec<Vec<f64>>, Vec<usize>, Vec<usize>)> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if k == 0 {
        return Err(Error::InvalidConfig("smote k must be >= 1".into()));
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &c) in y.iter().enumerate() {
        if c >= n_classes {
            return Err(Error::UnknownLabel(c));
        }
        members[c].push(i);
    }
    let majority = members.iter().map(Vec::len).max().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut rows, mut labels, mut bases) = (Vec::new(), Vec::new(), Vec::new());
    for (c, m) in members.iter().enumerate() {
        let n = m.len();
        if n == 0 || n == majority {
            continue;
        }
        if n == 1 {
            return Err(Error::MinorityTooSmall(format!("class {c} has a single row")));
        }
        if k > n - 1 {
            return Err(Error::KTooLarge(format!("k = {k} but class {c} has only {n} rows")));
        }
        let nn: Vec<Vec<usize>> = (0..n).map(|i| neighbours(x, m, i, k)).collect();
        for s in 0..majority - n {
            let i = s % n;
            let base = m[i];
            let nb = nn[i][rng.random_range(0..k)];
            let mut u: f64 = rng.random();
            while u == 0.0 {
                u = rng.random();
            }
            rows.push(x[base].iter().zip(&x[nb]).map(|(a, b)| a + u * (b - a)).collect());
            labels.push(c);
            bases.push(base);
        }
    }
    Ok((rows, labels, bases))
}

/// Appends synthetic rows so every class matches the majority. Synthetic
/// rows copy their base row's metadata with a negative `trial_index` and
/// carry the synthetic flag.
pub fn smote_oversample(table: &FeatureTable, task: Task, k: usize, seed: u64) -> Result<FeatureTable> {
    table.check()?;
    let y = task.encode_table(table);
    let (rows, _, bases) = smote_matrix(&table.rows, &y, task.n_classes(), k, seed)?;
    let mut out = table.clone();
    for (j, (r, b)) in rows.into_iter().zip(bases).enumerate() {
        let mut meta = table.labels[b].clone();
        meta.trial_index = -(j as i64) - 1;
        out.push(r, meta, true);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_class(na: usize, nb: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..na {
            x.push(vec![i as f64, (i * 7 % 5) as f64]);
            y.push(0);
        }
        for i in 0..nb {
            x.push(vec![100.0 + i as f64 * 3.0, -(i as f64)]);
            y.push(1);
        }
        (x, y)
    }

    #[test]
    fn balances_ten_four() {
        let (x, y) = two_class(10, 4);
        let (rows, labels, _) = smote_matrix(&x, &y, 2, 3, 1).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(labels.iter().all(|&c| c == 1));
        // inside the minority bounding box
        for r in &rows {
            assert!((100.0..=109.0).contains(&r[0]) && (-3.0..=0.0).contains(&r[1]), "{r:?}");
        }
    }

    #[test]
    fn minority_of_one() {
        let (x, y) = two_class(10, 1);
        assert!(matches!(smote_matrix(&x, &y, 2, 1, 1), Err(Error::MinorityTooSmall(_))));
    }

    #[test]
    fn k_too_large() {
        let (x, y) = two_class(10, 4);
        assert!(matches!(smote_matrix(&x, &y, 2, 4, 1), Err(Error::KTooLarge(_))));
    }

    #[test]
    fn synthetic_points_on_segments() {
        let (x, y) = two_class(9, 5);
        let (rows, _, bases) = smote_matrix(&x, &y, 2, 4, 7).unwrap();
        for (r, &b) in rows.iter().zip(&bases) {
            // some same-class neighbour makes r collinear with the base
            let ok = (9..14).filter(|&j| j != b).any(|j| {
                let d = [x[j][0] - x[b][0], x[j][1] - x[b][1]];
                let e = [r[0] - x[b][0], r[1] - x[b][1]];
                let cross = d[0] * e[1] - d[1] * e[0];
                let t = (e[0] * d[0] + e[1] * d[1]) / (d[0] * d[0] + d[1] * d[1]);
                cross.abs() < 1e-9 && t > 0.0 && t < 1.0
            });
            assert!(ok);
        }
    }

    proptest! {
        #[test]
        fn append_only(na in 6usize..20, nb in 2usize..6, seed in any::<u64>()) {
            use crate::data::{Condition, Subcondition, TrialMeta};
            let (x, y) = two_class(na, nb);
            let labels: Vec<TrialMeta> = y.iter().enumerate().map(|(i, &c)| {
                let cond = if c == 0 { Condition::JustListen } else { Condition::Memorize };
                TrialMeta::new("s1", cond, Subcondition::Five, i as i64)
            }).collect();
            let t = FeatureTable::new(vec!["a".into(), "b".into()], x, labels).unwrap();
            let out = smote_oversample(&t, Task::Binary, 1, seed).unwrap();
            prop_assert_eq!(out.n_rows(), 2 * na);
            for i in 0..t.n_rows() {
                let same = out.rows[i].iter().zip(&t.rows[i]).all(|(a, b)| a.to_bits() == b.to_bits());
                prop_assert!(same);
                prop_assert_eq!(&out.labels[i], &t.labels[i]);
                prop_assert!(!out.synthetic[i]);
            }
            prop_assert!(out.synthetic[t.n_rows()..].iter().all(|&s| s));
        }
    }
}
