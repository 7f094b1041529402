use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub name: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    /// Set when the quantity had a zero denominator and was reported as 0.
    pub precision_undefined: bool,
    pub recall_undefined: bool,
    pub f1_undefined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub n: usize,
    pub classes: Vec<ClassMetrics>,
    pub macro_avg: Averages,
    pub weighted_avg: Averages,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
}

fn ratio(num: f64, den: f64) -> (f64, bool) {
    if den == 0.0 {
        (0.0, true)
    } else {
        (num / den, false)
    }
}

pub fn evaluate(y_true: &[usize], y_pred: &[usize], class_names: &[String]) -> Result<MetricsReport> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch(y_true.len(), y_pred.len()));
    }
    let k = class_names.len();
    if let Some(&c) = y_true.iter().chain(y_pred).find(|&&c| c >= k) {
        return Err(Error::UnknownLabel(c));
    }
    let mut confusion = vec![vec![0usize; k]; k];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        confusion[t][p] += 1;
    }
    let n = y_true.len();
    let trace: usize = (0..k).map(|c| confusion[c][c]).sum();
    let (accuracy, _) = ratio(trace as f64, n as f64);
    let classes: Vec<ClassMetrics> = (0..k)
        .map(|c| {
            let tp = confusion[c][c] as f64;
            let support: usize = confusion[c].iter().sum();
            let predicted: usize = (0..k).map(|r| confusion[r][c]).sum();
            let (precision, pu) = ratio(tp, predicted as f64);
            let (recall, ru) = ratio(tp, support as f64);
            let (f1, fu) = ratio(2.0 * precision * recall, precision + recall);
            ClassMetrics {
                name: class_names[c].clone(),
                precision,
                recall,
                f1,
                support,
                precision_undefined: pu,
                recall_undefined: ru,
                f1_undefined: fu,
            }
        })
        .collect();
    let kf = k as f64;
    let macro_avg = Averages {
        precision: classes.iter().map(|c| c.precision).sum::<f64>() / kf,
        recall: classes.iter().map(|c| c.recall).sum::<f64>() / kf,
        f1: classes.iter().map(|c| c.f1).sum::<f64>() / kf,
    };
    let w = |f: fn(&ClassMetrics) -> f64| {
        if n == 0 {
            0.0
        } else {
            classes.iter().map(|c| f(c) * c.support as f64).sum::<f64>() / n as f64
        }
    };
    let weighted_avg = Averages { precision: w(|c| c.precision), recall: w(|c| c.recall), f1: w(|c| c.f1) };
    Ok(MetricsReport { accuracy, n, classes, macro_avg, weighted_avg, confusion })
}

impl MetricsReport {
    pub fn class_names(&self) -> Vec<&str> {
        self.classes.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Header row `true\pred,<names>`, then one row per true class.
    pub fn write_confusion_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut head = vec!["true\\pred".to_string()];
        head.extend(self.classes.iter().map(|c| c.name.clone()));
        wr.write_record(&head)?;
        for (c, row) in self.classes.iter().zip(&self.confusion) {
            let mut rec = vec![c.name.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            wr.write_record(&rec)?;
        }
        wr.flush().map_err(|e| Error::io("<confusion>", e))?;
        Ok(())
    }

    /// Writes `metrics.json` and `confusion.csv` into `dir`.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let p = dir.join("metrics.json");
        std::fs::write(&p, self.to_json()? + "\n").map_err(|e| Error::io(&p, e))?;
        let p = dir.join("confusion.csv");
        let f = std::fs::File::create(&p).map_err(|e| Error::io(&p, e))?;
        self.write_confusion_csv(std::io::BufWriter::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn small_example() {
        let r = evaluate(&[0, 0, 1], &[0, 1, 1], &names(2)).unwrap();
        assert_eq!(r.accuracy, 2.0 / 3.0);
        assert_eq!(r.classes[0].precision, 1.0);
        assert_eq!(r.classes[0].recall, 0.5);
        assert_eq!(r.classes[1].precision, 0.5);
        assert_eq!(r.classes[1].recall, 1.0);
        assert_eq!(r.confusion, vec![vec![1, 1], vec![0, 1]]);
        // F1 of class 0: 2·1·0.5/1.5
        assert!((r.classes[0].f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn perfect() {
        let y = [0, 1, 2, 2, 1];
        let r = evaluate(&y, &y, &names(3)).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert!(r.classes.iter().all(|c| c.f1 == 1.0));
    }

    #[test]
    fn never_predicted_flags_zero_division() {
        let r = evaluate(&[0, 1, 2], &[0, 0, 2], &names(3)).unwrap();
        assert_eq!(r.classes[1].precision, 0.0);
        assert!(r.classes[1].precision_undefined);
        assert!(!r.classes[1].recall_undefined);
        assert!(r.classes[1].f1_undefined);
    }

    #[test]
    fn errors() {
        assert!(matches!(evaluate(&[0, 1], &[0], &names(2)), Err(Error::LengthMismatch(2, 1))));
        assert!(matches!(evaluate(&[0, 3], &[0, 1], &names(2)), Err(Error::UnknownLabel(3))));
    }

    #[test]
    fn confusion_csv_layout() {
        let r = evaluate(&[0, 0, 1], &[0, 1, 1], &names(2)).unwrap();
        let mut buf = Vec::new();
        r.write_confusion_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "true\\pred,c0,c1\nc0,1,1\nc1,0,1\n");
    }

    proptest! {
        #[test]
        fn accuracy_is_trace_over_total(pairs in prop::collection::vec((0usize..4, 0usize..4), 1..200)) {
            let (t, p): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
            let r = evaluate(&t, &p, &names(4)).unwrap();
            let trace: usize = (0..4).map(|c| r.confusion[c][c]).sum();
            prop_assert_eq!(r.accuracy, trace as f64 / t.len() as f64);
            for c in 0..4 {
                let s: usize = r.confusion[c].iter().sum();
                prop_assert_eq!(s, r.classes[c].support);
            }
        }
    }
}
