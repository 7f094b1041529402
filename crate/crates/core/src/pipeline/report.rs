use std::collections::BTreeSet;
use std::fmt::Write;

use crate::crossmodal::GridSummary;
use crate::ml::MetricsReport;

/// Markdown table: one row per feature set, one column per task/classifier,
/// cells `mean ± sd` of fold accuracy.
pub fn summary_table(s: &GridSummary) -> String {
    let cols: BTreeSet<&str> = s.rows.iter().flat_map(|r| r.cells.keys().map(String::as_str)).collect();
    let mut out = format!(
        "## Fold accuracy ({}-fold, {:?} split, seed {}{})\n\n| feature set | rows |",
        s.folds,
        s.split,
        s.seed,
        if s.permute_labels { ", labels permuted" } else { "" }
    );
    for c in &cols {
        let _ = write!(out, " {c} |");
    }
    out += "\n|---|---|";
    out += &"---|".repeat(cols.len());
    out.push('\n');
    for r in &s.rows {
        let _ = write!(out, "| {} | {} |", r.feature_set, r.n_rows);
        for c in &cols {
            match r.cells.get(*c) {
                Some(v) => {
                    let _ = write!(out, " {:.3} ± {:.3} |", v.mean_accuracy, v.sd_accuracy);
                }
                None => out += " |",
            }
        }
        out.push('\n');
    }
    out
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Row-normalised heat map; counts printed in each cell.
pub fn confusion_svg(r: &MetricsReport, title: &str) -> String {
    let k = r.classes.len();
    let (cell, left, top) = (60usize, 90usize, 50usize);
    let (w, h) = (left + k * cell + 20, top + k * cell + 40);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    let _ = writeln!(s, "<text x=\"{}\" y=\"18\" text-anchor=\"middle\">{}</text>", w / 2, esc(title));
    for (i, row) in r.confusion.iter().enumerate() {
        let total: usize = row.iter().sum();
        for (j, &v) in row.iter().enumerate() {
            let frac = if total == 0 { 0.0 } else { v as f64 / total as f64 };
            let shade = 255 - (frac * 200.0).round() as u8;
            let (x, y) = (left + j * cell, top + i * cell);
            let _ = writeln!(
                s,
                "<rect x=\"{x}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" fill=\"rgb({shade},{shade},255)\" stroke=\"#444\"/>"
            );
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{v}</text>",
                x + cell / 2,
                y + cell / 2 + 4
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
            left - 6,
            top + i * cell + cell / 2 + 4,
            esc(&r.classes[i].name)
        );
    }
    for (j, c) in r.classes.iter().enumerate() {
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            left + j * cell + cell / 2,
            top - 8,
            esc(&c.name)
        );
    }
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">predicted</text>", left + k * cell / 2, h - 12);
    s += "</svg>\n";
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::evaluate;

    #[test]
    fn svg_has_one_rect_per_cell() {
        let names: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        let r = evaluate(&[0, 1, 2, 2], &[0, 2, 2, 1], &names).unwrap();
        let s = confusion_svg(&r, "t<1>");
        assert_eq!(s.matches("<rect").count(), 9);
        assert!(s.contains("t&lt;1&gt;"));
    }
}
