use serde::{Deserialize, Serialize};

use super::config::Method;
use crate::encoding::EvaluationReport;

/// One row of an evaluation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub method: Method,
    #[serde(flatten)]
    pub report: EvaluationReport,
}

/// `v` with `digits` significant digits in positional notation.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{:.*}", digits.saturating_sub(1), v);
    }
    let magnitude = v.abs().log10().floor() as i64 + 1;
    let decimals = (digits as i64 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    // rounding can carry into a new leading digit, e.g. 9.9996 -> 10.000
    let shown = s.trim_start_matches('-').replace('.', "");
    let significant = shown.trim_start_matches('0').len();
    if decimals > 0 && significant > digits {
        format!("{v:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}

/// cRMSE in units of 1e-3, four significant digits.
pub fn format_crmse(v: f64) -> String {
    format_significant(v * 1e3, 4)
}

/// Aligned text table with columns method, k, |K|, split, cRMSE (x1e-3),
/// F, mean imaginary norm and mean real norm.
pub fn render_table(rows: &[EvalRow]) -> String {
    let header = ["method", "depth", "k", "|K|", "split", "cRMSE(1e-3)", "F", "I", "R"];
    let cells: Vec<[String; 9]> = rows
        .iter()
        .map(|r| {
            let e = &r.report;
            [
                r.method.to_string(),
                e.depth.to_string(),
                e.k.to_string(),
                e.kept.to_string(),
                e.split.clone(),
                format_crmse(e.mean_crmse),
                format!("{:.4}", e.mean_fidelity),
                format!("{:.3e}", e.mean_imag_norm),
                format!("{:.6}", e.mean_real_norm),
            ]
        })
        .collect();
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &cells {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let mut line = |fields: &[&str]| {
        let parts: Vec<String> = fields
            .iter()
            .zip(&width)
            .enumerate()
            .map(|(i, (f, w))| if i == 0 || i == 4 { format!("{f:<w$}") } else { format!("{f:>w$}") })
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(&header);
    for row in &cells {
        line(&row.iter().map(String::as_str).collect::<Vec<_>>());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::SelectionRule;

    #[test]
    fn significant_digits() {
        assert_eq!(format_crmse(1.036e-3), "1.036");
        assert_eq!(format_crmse(2.2834e-3), "2.283");
        assert_eq!(format_crmse(1.0357e-2), "10.36");
        assert_eq!(format_crmse(1.2345e-1), "123.5");
        assert_eq!(format_crmse(4.2e-7), "0.0004200");
        assert_eq!(format_significant(9.99996, 4), "10.00");
        assert_eq!(format_significant(12345.6, 4), "12346");
        assert_eq!(format_significant(0.0, 4), "0.000");
    }

    #[test]
    fn table_layout() {
        let row = EvalRow {
            method: Method::Aiqt,
            report: EvaluationReport {
                k: 384,
                rule: SelectionRule::PlainTopk,
                depth: 1,
                split: "validation".into(),
                mean_crmse: 1.036e-3,
                mean_fidelity: 0.9989,
                mean_imag_norm: 1.2e-5,
                mean_real_norm: 0.99999,
                n_samples: 10,
                kept: 384,
            },
        };
        let text = render_table(&[row.clone()]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].contains("1.036"));
        assert!(lines[1].contains("0.9989"));
        assert_eq!(lines[0].find("cRMSE").map(|i| i + "cRMSE(1e-3)".len()), lines[1].find("1.036").map(|i| i + 5));
        let v = serde_json::to_value(&row).unwrap();
        assert_eq!(v["method"], "aiqt");
        assert_eq!(v["mean_crmse"], 1.036e-3);
        let back: EvalRow = serde_json::from_value(v).unwrap();
        assert_eq!(back, row);
    }
}
