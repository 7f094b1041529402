use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub f_stat: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub p_value: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn var(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
}

/// One-way ANOVA. With zero within-group variance, F is 0 when the group
/// means also agree and +∞ otherwise.
pub fn anova_oneway(groups: &[Vec<f64>]) -> Result<AnovaResult> {
    if groups.len() < 2 {
        return Err(Error::DegenerateGroups(format!("{} group(s), need >= 2", groups.len())));
    }
    if let Some((i, g)) = groups.iter().enumerate().find(|(_, g)| g.len() < 2) {
        return Err(Error::DegenerateGroups(format!("group {i} has {} value(s), need >= 2", g.len())));
    }
    if groups.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n: usize = groups.iter().map(Vec::len).sum();
    let grand = groups.iter().flatten().sum::<f64>() / n as f64;
    let ssb: f64 = groups.iter().map(|g| g.len() as f64 * (mean(g) - grand).powi(2)).sum();
    let ssw: f64 = groups
        .iter()
        .map(|g| {
            let m = mean(g);
            g.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
        })
        .sum();
    let dfb = groups.len() - 1;
    let dfw = n - groups.len();
    let msb = ssb / dfb as f64;
    let msw = ssw / dfw as f64;
    // relative floor so rounding noise in constant data reads as zero
    let scale = groups.iter().flatten().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
    let tiny = |s: f64| s <= 1e-24 * scale;
    let (f_stat, p_value) = if tiny(ssw) {
        if tiny(ssb) {
            (0.0, 1.0)
        } else {
            (f64::INFINITY, 0.0)
        }
    } else if tiny(ssb) {
        (0.0, 1.0)
    } else {
        let f = msb / msw;
        let dist = FisherSnedecor::new(dfb as f64, dfw as f64).map_err(|e| Error::DegenerateGroups(e.to_string()))?;
        (f, dist.sf(f).clamp(0.0, 1.0))
    };
    Ok(AnovaResult { f_stat, df_between: dfb, df_within: dfw, p_value })
}

/// Welch's unequal-variance t-test: `(t, df, two-sided p)`.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<(f64, f64, f64)> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::DegenerateGroups("welch test needs >= 2 values per group".into()));
    }
    let (va, vb) = (var(a) / a.len() as f64, var(b) / b.len() as f64);
    let diff = mean(a) - mean(b);
    let se2 = va + vb;
    if se2 == 0.0 {
        return Ok(if diff == 0.0 { (0.0, f64::NAN, 1.0) } else { (diff.signum() * f64::INFINITY, f64::NAN, 0.0) });
    }
    let t = diff / se2.sqrt();
    let df = se2 * se2 / (va * va / (a.len() as f64 - 1.0) + vb * vb / (b.len() as f64 - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::DegenerateGroups(e.to_string()))?;
    Ok((t, df, (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)))
}

/// Holm step-down adjusted p-values, in input order.
pub fn holm_adjust(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b)));
    let mut out = vec![0.0; m];
    let mut running: f64 = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        running = running.max(((m - rank) as f64 * p[i]).min(1.0));
        out[i] = running;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison {
    pub a: String,
    pub b: String,
    pub mean_diff: f64,
    pub t_stat: f64,
    pub df: f64,
    pub p_value: f64,
    pub p_holm: f64,
    pub reject_at_05: bool,
}

/// All pairwise Welch tests with Holm correction.
pub fn pairwise_welch(groups: &[Vec<f64>], names: &[String]) -> Result<Vec<PairwiseComparison>> {
    if groups.len() != names.len() {
        return Err(Error::LengthMismatch(groups.len(), names.len()));
    }
    let mut out = Vec::new();
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            let (t, df, p) = welch_t_test(&groups[i], &groups[j])?;
            out.push(PairwiseComparison {
                a: names[i].clone(),
                b: names[j].clone(),
                mean_diff: mean(&groups[i]) - mean(&groups[j]),
                t_stat: t,
                df,
                p_value: p,
                p_holm: 0.0,
                reject_at_05: false,
            });
        }
    }
    let adj = holm_adjust(&out.iter().map(|c| c.p_value).collect::<Vec<_>>());
    for (c, p) in out.iter_mut().zip(adj) {
        c.p_holm = p;
        c.reject_at_05 = p < 0.05;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fixture() -> Vec<Vec<f64>> {
        vec![
            vec![6.0, 8.0, 4.0, 5.0, 3.0, 4.0],
            vec![8.0, 12.0, 9.0, 11.0, 6.0, 8.0],
            vec![13.0, 9.0, 11.0, 8.0, 7.0, 12.0],
        ]
    }

    #[test]
    fn textbook_fixture() {
        let text = include_str!("../../tests/fixtures/anova_reference.csv");
        let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        let r = anova_oneway(&fixture()).unwrap();
        assert!((r.f_stat - row[0]).abs() <= 1e-12 * row[0]);
        assert_eq!(r.df_between, row[1] as usize);
        assert_eq!(r.df_within, row[2] as usize);
        assert!((r.p_value - row[3]).abs() <= 1e-9 * row[3], "{} vs {}", r.p_value, row[3]);
    }

    #[test]
    fn identical_groups() {
        let g = vec![vec![1.0, 2.0, 3.0]; 3];
        let r = anova_oneway(&g).unwrap();
        assert_eq!((r.f_stat, r.p_value), (0.0, 1.0));
    }

    #[test]
    fn constant_identical_groups() {
        let g = vec![vec![0.8, 0.8, 0.8]; 2];
        let r = anova_oneway(&g).unwrap();
        assert_eq!((r.f_stat, r.p_value), (0.0, 1.0));
        let g = vec![vec![0.8, 0.8], vec![0.9, 0.9]];
        assert_eq!(anova_oneway(&g).unwrap().f_stat, f64::INFINITY);
    }

    #[test]
    fn degenerate() {
        assert!(anova_oneway(&[vec![1.0, 2.0]]).is_err());
        assert!(anova_oneway(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn welch_reference() {
        // hand computation: means 5, 9; var/n 3.2/6, 4.8/6
        let g = fixture();
        let (t, df, p) = welch_t_test(&g[0], &g[1]).unwrap();
        let se = (3.2f64 / 6.0 + 4.8 / 6.0).sqrt();
        assert!((t - (-4.0 / se)).abs() < 1e-12);
        let df_hand = (8.0f64 / 6.0).powi(2) / ((3.2f64 / 6.0).powi(2) / 5.0 + (4.8f64 / 6.0).powi(2) / 5.0);
        assert!((df - df_hand).abs() < 1e-12);
        assert!(p > 0.0 && p < 0.01);
    }

    #[test]
    fn holm_small() {
        let adj = holm_adjust(&[0.01, 0.04, 0.03]);
        assert_eq!(adj, vec![0.03, 0.06, 0.06]);
    }

    proptest! {
        #[test]
        fn affine_invariance(a in prop::sample::select(vec![-3.0, -0.5, 0.25, 2.0, 7.5]), b in -100.0f64..100.0) {
            let g = fixture();
            let r0 = anova_oneway(&g).unwrap();
            let h: Vec<Vec<f64>> = g.iter().map(|v| v.iter().map(|x| a * x + b).collect()).collect();
            let r1 = anova_oneway(&h).unwrap();
            prop_assert!((r0.f_stat - r1.f_stat).abs() < 1e-9 * r0.f_stat);
            prop_assert!((r0.p_value - r1.p_value).abs() < 1e-9);
        }
    }
}
