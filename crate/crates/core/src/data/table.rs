use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use super::meta::{Condition, Subcondition, TrialKey, TrialMeta};
use crate::error::{Error, Result};

pub const KEY_COLUMNS: [&str; 4] = ["subject_id", "condition", "subcondition", "trial_index"];

/// Per-trial feature matrix with its labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<TrialMeta>,
    /// Marks rows produced by oversampling or by the synthetic generator.
    pub synthetic: Vec<bool>,
}

impl FeatureTable {
    pub fn new(feature_names: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<TrialMeta>) -> Result<Self> {
        let n = rows.len();
        let t = Self { feature_names, rows, labels, synthetic: vec![false; n] };
        t.check()?;
        Ok(t)
    }

    pub fn empty(feature_names: Vec<String>) -> Self {
        Self { feature_names, rows: Vec::new(), labels: Vec::new(), synthetic: Vec::new() }
    }

    pub fn check(&self) -> Result<()> {
        if self.rows.len() != self.labels.len() || self.rows.len() != self.synthetic.len() {
            return Err(Error::LengthMismatch(self.rows.len(), self.labels.len()));
        }
        let p = self.feature_names.len();
        if let Some((i, r)) = self.rows.iter().enumerate().find(|(_, r)| r.len() != p) {
            return Err(Error::InvalidTensor(format!("row {i} has {} values for {p} features", r.len())));
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, row: Vec<f64>, label: TrialMeta, synthetic: bool) {
        self.rows.push(row);
        self.labels.push(label);
        self.synthetic.push(synthetic);
    }

    /// Rows at the given positions, in that order.
    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            feature_names: self.feature_names.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i].clone()).collect(),
            synthetic: idx.iter().map(|&i| self.synthetic[i]).collect(),
        }
    }

    /// Rows whose label satisfies `pred`.
    pub fn filter(&self, pred: impl Fn(&TrialMeta) -> bool) -> Self {
        let idx: Vec<usize> = (0..self.n_rows()).filter(|&i| pred(&self.labels[i])).collect();
        self.subset(&idx)
    }

    /// Appends the rows of `other`; feature names must agree.
    pub fn extend(&mut self, other: &FeatureTable) -> Result<()> {
        if other.feature_names != self.feature_names {
            return Err(Error::NameMismatch { expected: self.feature_names.clone(), got: other.feature_names.clone() });
        }
        self.rows.extend(other.rows.iter().cloned());
        self.labels.extend(other.labels.iter().cloned());
        self.synthetic.extend(other.synthetic.iter().copied());
        Ok(())
    }

    /// Keeps only the named columns, in the given order.
    pub fn project(&self, names: &[&str]) -> Result<Self> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.feature_names.iter().position(|f| f == n).ok_or_else(|| Error::NameMismatch {
                    expected: names.iter().map(|s| s.to_string()).collect(),
                    got: self.feature_names.clone(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            feature_names: names.iter().map(|s| s.to_string()).collect(),
            rows: self.rows.iter().map(|r| idx.iter().map(|&j| r[j]).collect()).collect(),
            labels: self.labels.clone(),
            synthetic: self.synthetic.clone(),
        })
    }

    /// Position of each row key; errors on duplicates.
    pub fn key_index(&self) -> Result<HashMap<TrialKey, usize>> {
        let mut map = HashMap::with_capacity(self.n_rows());
        for (i, l) in self.labels.iter().enumerate() {
            if map.insert(l.key(), i).is_some() {
                return Err(Error::InvalidMeta(format!("duplicate row key {}", l.key())));
            }
        }
        Ok(map)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let header: Vec<&str> =
            KEY_COLUMNS.iter().copied().chain(self.feature_names.iter().map(String::as_str)).collect();
        wr.write_record(&header)?;
        for (row, l) in self.rows.iter().zip(&self.labels) {
            let mut rec = vec![
                l.subject_id.clone(),
                l.condition.to_string(),
                l.subcondition.to_string(),
                l.trial_index.to_string(),
            ];
            rec.extend(row.iter().map(|v| v.to_string()));
            wr.write_record(&rec)?;
        }
        wr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers()?.clone();
        let cols: Vec<&str> = header.iter().collect();
        if cols.len() < KEY_COLUMNS.len() || cols[..4] != KEY_COLUMNS {
            return Err(Error::InvalidMeta(format!(
                "feature table must start with {KEY_COLUMNS:?}, found {:?}",
                &cols[..cols.len().min(4)]
            )));
        }
        let names: Vec<String> = cols[4..].iter().map(|s| s.to_string()).collect();
        let mut t = FeatureTable::empty(names);
        for (line, rec) in rd.records().enumerate() {
            let rec = rec?;
            let bad = |what: &str| Error::InvalidMeta(format!("row {}: bad {what}", line + 1));
            let label = TrialMeta::new(
                rec.get(0).ok_or_else(|| bad("subject_id"))?,
                rec.get(1).ok_or_else(|| bad("condition"))?.parse::<Condition>()?,
                rec.get(2).ok_or_else(|| bad("subcondition"))?.parse::<Subcondition>()?,
                rec.get(3).and_then(|s| s.trim().parse::<i64>().ok()).ok_or_else(|| bad("trial_index"))?,
            );
            let row = rec
                .iter()
                .skip(4)
                .map(|s| s.trim().parse::<f64>().map_err(|_| bad("feature value")))
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != t.n_features() {
                return Err(bad("column count"));
            }
            t.push(row, label, false);
        }
        Ok(t)
    }

    pub fn write_csv_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let p = path.as_ref();
        let f = std::fs::File::create(p).map_err(|e| Error::io(p, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn read_csv_file(path: impl AsRef<Path>) -> Result<Self> {
        let p = path.as_ref();
        let f = std::fs::File::open(p).map_err(|e| Error::io(p, e))?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> FeatureTable {
        FeatureTable::new(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 0.1], vec![-2.5, 1e-17]],
            vec![
                TrialMeta::new("s1", Condition::Memorize, Subcondition::Nine, 3),
                TrialMeta::new("s2", Condition::JustListen, Subcondition::Five, 0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn csv_round_trip() {
        let t = table();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("subject_id,condition,subcondition,trial_index,a,b\n"));
        assert_eq!(FeatureTable::read_csv(&buf[..]).unwrap(), t);
    }

    #[test]
    fn projection_reorders() {
        let p = table().project(&["b", "a"]).unwrap();
        assert_eq!(p.rows[0], vec![0.1, 1.0]);
        assert!(table().project(&["c"]).is_err());
    }
}
