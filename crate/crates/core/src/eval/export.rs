//! CSV and plain-text grid emission.

use nalgebra::DMatrix;

use super::AggregateReport;
use crate::codebook::Method;
use crate::error::Result;
use crate::io::Provenance;

/// One matrix entry of a gain or leakage map; ray indices are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryRecord {
    pub source: usize,
    pub focus: usize,
    /// `None` for intended gains, the leak RIS otherwise.
    pub leak: Option<usize>,
    pub l2: usize,
    pub l1: usize,
    pub value: f64,
    pub method: Method,
    pub seed: u64,
}

impl EntryRecord {
    pub(crate) fn from_matrix(
        m: &DMatrix<f64>,
        source: usize,
        focus: usize,
        leak: Option<usize>,
        method: Method,
        seed: u64,
    ) -> Vec<Self> {
        let mut out = Vec::with_capacity(m.len());
        for l2 in 0..m.nrows() {
            for l1 in 0..m.ncols() {
                out.push(EntryRecord {
                    source,
                    focus,
                    leak,
                    l2: l2 + 1,
                    l1: l1 + 1,
                    value: m[(l2, l1)],
                    method,
                    seed,
                });
            }
        }
        out
    }
}

fn value(v: f64) -> String {
    format!("{v:.12e}")
}

fn with_header(provenance: Option<&Provenance>, body: Vec<u8>) -> String {
    let mut s = provenance.map(Provenance::comment_lines).unwrap_or_default();
    s.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
    s
}

/// Columns: `source,focus,leak_or_intended,l2,l1,value,method,seed`.
pub fn entries_csv(records: &[EntryRecord], provenance: Option<&Provenance>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["source", "focus", "leak_or_intended", "l2", "l1", "value", "method", "seed"])?;
    for r in records {
        w.write_record([
            r.source.to_string(),
            r.focus.to_string(),
            r.leak.map_or_else(|| "intended".to_string(), |k| k.to_string()),
            r.l2.to_string(),
            r.l1.to_string(),
            value(r.value),
            r.method.to_string(),
            r.seed.to_string(),
        ])?;
    }
    let body = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(with_header(provenance, body))
}

/// Whitespace-separated grid, one row per `l2`, preceded by a `# rows=l2 cols=l1` line.
pub fn grid_text(m: &DMatrix<f64>, label: &str, provenance: Option<&Provenance>) -> String {
    let mut s = provenance.map(Provenance::comment_lines).unwrap_or_default();
    s.push_str("# rows=l2 cols=l1");
    if !label.is_empty() {
        s.push(' ');
        s.push_str(label);
    }
    s.push('\n');
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| value(m[(r, c)])).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

pub fn aggregate_csv(report: &AggregateReport, provenance: Option<&Provenance>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "method",
        "delta_a_deg",
        "nx",
        "nz",
        "mean_intended_gain",
        "mean_leakage",
        "mean_min_gain",
        "mean_combined",
        "seed_count",
    ])?;
    for r in &report.rows {
        w.write_record([
            r.method.to_string(),
            format!("{}", crate::io::round_significant(r.spread.to_degrees(), 12)),
            r.nx.to_string(),
            r.nz.to_string(),
            value(r.mean_intended_gain),
            value(r.mean_leakage),
            value(r.mean_min_gain),
            value(r.mean_combined),
            r.seed_count.to_string(),
        ])?;
    }
    let body = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(with_header(provenance, body))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.25, 0.125]);
        let recs = EntryRecord::from_matrix(&m, 1, 3, Some(2), Method::Opt, 7);
        let text = entries_csv(&recs, Some(&Provenance::new("x", Some(7)))).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# tool:"));
        assert_eq!(lines[3], "source,focus,leak_or_intended,l2,l1,value,method,seed");
        assert_eq!(lines[4], "1,3,2,1,1,1.000000000000e0,opt,7");
        assert_eq!(lines[5], "1,3,2,1,2,5.000000000000e-1,opt,7");
        assert_eq!(lines.len(), 8);
        let intended = EntryRecord::from_matrix(&m, 1, 3, None, Method::Linear, 0);
        assert!(entries_csv(&intended, None).unwrap().lines().nth(1).unwrap().contains(",intended,"));
    }

    #[test]
    fn grid_layout() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.5, 0.25, 0.75, 1.0]);
        let text = grid_text(&m, "source=1 focus=3", None);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# rows=l2 cols=l1 source=1 focus=3");
        assert_eq!(lines[1].split_whitespace().count(), 3);
        assert_eq!(lines.len(), 3);
    }
}
