use std::collections::BTreeMap;
use std::path::Path;

use super::{qubits_for, Provenance, SampleSet, SampleTag, Split};
use crate::error::{invalid, Error, Result};

/// Prices of one instrument in timestamp order.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub instrument: String,
    pub values: Vec<f64>,
}

/// Reads a CSV with header `timestamp, instrument, <price columns...>` and
/// returns one series per instrument, instruments in name order, rows
/// sorted by timestamp. Timestamps sort numerically when every one parses
/// as a number and lexically otherwise, which orders ISO 8601 dates.
pub fn load_csv_series(path: &Path, column: &str) -> Result<Vec<Series>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = rdr.headers()?.clone();
    if headers.len() < 3 || &headers[0] != "timestamp" || &headers[1] != "instrument" {
        return Err(Error::Format(format!(
            "{}: header must start with timestamp,instrument and name at least one price column",
            path.display()
        )));
    }
    let col = headers
        .iter()
        .position(|h| h == column)
        .filter(|&c| c >= 2)
        .ok_or_else(|| Error::Format(format!("{}: no price column {column:?}", path.display())))?;

    let mut rows: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
    let mut bad = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let cell = rec.get(col).unwrap_or("");
        match cell.parse::<f64>() {
            Ok(v) if v.is_finite() => rows
                .entry(rec.get(1).unwrap_or("").to_string())
                .or_default()
                .push((rec.get(0).unwrap_or("").to_string(), v)),
            _ => bad.push(format!("row {line}: {cell:?}")),
        }
    }
    if !bad.is_empty() {
        let shown: Vec<_> = bad.iter().take(10).cloned().collect();
        return Err(Error::Format(format!(
            "{}: {} non-numeric cells in column {column:?}: {}",
            path.display(),
            bad.len(),
            shown.join(", ")
        )));
    }
    if rows.is_empty() {
        return Err(Error::Format(format!("{}: no data rows", path.display())));
    }
    let numeric = rows.values().flatten().all(|(t, _)| t.parse::<f64>().is_ok());
    Ok(rows
        .into_iter()
        .map(|(instrument, mut r)| {
            if numeric {
                r.sort_by(|a, b| a.0.parse::<f64>().unwrap_or(0.0).total_cmp(&b.0.parse::<f64>().unwrap_or(0.0)));
            } else {
                r.sort_by(|a, b| a.0.cmp(&b.0));
            }
            Series { instrument, values: r.into_iter().map(|(_, v)| v).collect() }
        })
        .collect())
}

/// Windows of one series and their chronological split.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Windows {
    pub train: Vec<Vec<f64>>,
    pub validation: Vec<Vec<f64>>,
    /// Windows between the last training window and the first validation
    /// window, dropped so the two ranges do not overlap.
    pub dropped: usize,
    /// Windows rejected for zero norm.
    pub rejected: usize,
}

impl Windows {
    pub fn total(&self) -> usize {
        self.train.len() + self.validation.len() + self.dropped + self.rejected
    }
}

/// Cuts `[i stride, i stride + len)` for every full window and splits them
/// chronologically at `cut = floor(0.8 L)`.
///
/// Windows ending after `cut` go to validation, including those that
/// straddle it. Training keeps the windows that end no later than the
/// first validation window starts, so no training sample shares a time
/// point with a validation sample. Returns `None` for series shorter than
/// `len`.
pub fn window_timeseries(series: &[f64], len: usize, stride: usize) -> Result<Option<Windows>> {
    qubits_for(len)?;
    if stride == 0 {
        return Err(invalid("stride must be at least 1"));
    }
    if series.len() < len {
        return Ok(None);
    }
    let count = (series.len() - len) / stride + 1;
    let cut = series.len() * 4 / 5;
    let first_val = (0..count).map(|i| i * stride).find(|s| s + len > cut);
    let mut out = Windows::default();
    for i in 0..count {
        let start = i * stride;
        let w = series[start..start + len].to_vec();
        let target = match first_val {
            Some(v) if start >= v => Some(Split::Validation),
            Some(v) if start + len > v => None,
            _ => Some(Split::Train),
        };
        match target {
            None => out.dropped += 1,
            Some(_) if w.iter().all(|v| *v == 0.0) => out.rejected += 1,
            Some(Split::Train) => out.train.push(w),
            Some(Split::Validation) => out.validation.push(w),
        }
    }
    Ok(Some(out))
}

/// Windows every series, splits each chronologically and pools the result.
pub fn timeseries_set(series: &[Series], len: usize, stride: usize, source: &str) -> Result<SampleSet> {
    let n = qubits_for(len)?;
    let mut set = SampleSet::new(
        n,
        Provenance { source: source.into(), kind: "timeseries".into(), stride: Some(stride), ..Default::default() },
    );
    for s in series {
        match window_timeseries(&s.values, len, stride)? {
            None => {
                let note = format!("series {} has {} points, fewer than {len}; skipped", s.instrument, s.values.len());
                log::warn!("{note}");
                set.provenance.notes.push(note);
            }
            Some(w) => {
                set.provenance.rejected_zero_norm += w.rejected;
                if w.dropped > 0 {
                    set.provenance
                        .notes
                        .push(format!("series {}: {} windows dropped at the split boundary", s.instrument, w.dropped));
                }
                for (x, split) in w
                    .train
                    .into_iter()
                    .map(|x| (x, Split::Train))
                    .chain(w.validation.into_iter().map(|x| (x, Split::Validation)))
                {
                    let record = set.len();
                    set.push_tagged(x, SampleTag { split, record, channel: None })?;
                }
            }
        }
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(len: usize) -> Vec<f64> {
        (0..len).map(|i| 1.0 + i as f64).collect()
    }

    #[test]
    fn window_count_formula() {
        let w = window_timeseries(&ramp(1280), 1024, 128).unwrap().unwrap();
        assert_eq!(w.total(), 3);
        for (l, n, s) in [(100, 16, 7), (64, 64, 1), (200, 32, 32), (1000, 8, 3)] {
            let w = window_timeseries(&ramp(l), n, s).unwrap().unwrap();
            assert_eq!(w.total(), (l - n) / s + 1);
        }
    }

    #[test]
    fn chronological_split_never_overlaps() {
        for (l, n, s) in [(1280, 1024, 128), (500, 32, 8), (300, 16, 16), (100, 8, 1)] {
            let series = ramp(l);
            let w = window_timeseries(&series, n, s).unwrap().unwrap();
            let last_train_end = w.train.iter().map(|x| x[n - 1]).fold(0.0, f64::max);
            let first_val_start = w.validation.iter().map(|x| x[0]).fold(f64::INFINITY, f64::min);
            assert!(last_train_end < first_val_start, "l={l} n={n} s={s}");
            assert!(!w.validation.is_empty());
        }
    }

    #[test]
    fn disjoint_windows_with_stride_n() {
        let w = window_timeseries(&ramp(64), 8, 8).unwrap().unwrap();
        let all: Vec<f64> = w.train.iter().chain(&w.validation).flatten().copied().collect();
        assert_eq!(all, ramp(64));
        assert_eq!(w.dropped, 0);
    }

    #[test]
    fn degenerate_cases() {
        let w = window_timeseries(&[0.0; 64], 8, 8).unwrap().unwrap();
        assert_eq!(w.rejected, 8);
        assert!(w.train.is_empty() && w.validation.is_empty());
        assert!(window_timeseries(&ramp(7), 8, 1).unwrap().is_none());
        assert!(window_timeseries(&ramp(70), 6, 1).is_err());
        assert!(window_timeseries(&ramp(70), 8, 0).is_err());
    }
}
