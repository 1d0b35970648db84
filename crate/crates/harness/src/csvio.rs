//! CSV serialization for run traces, plus file comparison.
//!
//! Format: UTF-8, `\n` line endings, header
//! `iter,outer,inner,wall_time_s,<metric columns>`. Floats are written with
//! shortest round-trip formatting; missing or undefined values are the
//! literal `NaN`. Files are written atomically (temp file + rename) so a
//! crashed run never leaves a truncated CSV behind.

use cvi_core::trace::SolverTrace;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

/// Shortest round-trip decimal for a float, scientific for extreme
/// magnitudes so columns stay readable. `parse::<f64>()` recovers the exact
/// bit pattern in every branch; NaN serializes as the literal `NaN`.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        return "NaN".to_string();
    }
    if v == 0.0 || (v.abs() >= 1e-4 && v.abs() < 1e16) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Render a trace as CSV text. Metric columns are the trace's own metric
/// names in canonical order; a record lacking one of them gets `NaN`.
pub fn trace_to_csv(trace: &SolverTrace) -> String {
    let metric_names = trace.metric_names();
    let mut out = String::new();
    out.push_str("iter,outer,inner,wall_time_s");
    for name in &metric_names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for record in &trace.records {
        let _ = write!(
            out,
            "{},{},{},{}",
            record.iter,
            record.outer,
            record.inner,
            format_float(record.wall_time_s)
        );
        for name in &metric_names {
            out.push(',');
            let v = record.metrics.get(name).copied().unwrap_or(f64::NAN);
            out.push_str(&format_float(v));
        }
        out.push('\n');
    }
    out
}

static WRITE_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Write text to `path` atomically: write a uniquely named temp file in the
/// same directory, then rename it into place. Creates parent directories.
pub fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)?;
    }
    let nonce = WRITE_COUNTER.fetch_add(1, Ordering::Relaxed);
    let file_name = path
        .file_name()
        .ok_or_else(|| std::io::Error::other(format!("{} has no file name", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(format!(".{}.{nonce}.tmp", std::process::id()));
    let tmp = match dir {
        Some(dir) => dir.join(&tmp_name),
        None => std::path::PathBuf::from(&tmp_name),
    };
    std::fs::write(&tmp, text)?;
    let renamed = std::fs::rename(&tmp, path);
    if renamed.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    renamed
}

/// A parsed CSV: header names plus rows of values. Non-numeric cells other
/// than `NaN` are parse errors.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        let header_line = lines.next().ok_or("empty CSV file")?;
        let header: Vec<String> = header_line.split(',').map(str::to_string).collect();
        if header.is_empty() || header[0] != "iter" {
            return Err(format!(
                "CSV header must start with `iter`, got `{header_line}`"
            ));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != header.len() {
                return Err(format!(
                    "row {} has {} cells, header has {}",
                    i + 2,
                    cells.len(),
                    header.len()
                ));
            }
            let mut row = Vec::with_capacity(cells.len());
            for cell in cells {
                let v = if cell == "NaN" {
                    f64::NAN
                } else {
                    cell.parse::<f64>()
                        .map_err(|_| format!("row {}: cannot parse `{cell}` as a number", i + 2))?
                };
                row.push(v);
            }
            rows.push(row);
        }
        Ok(CsvTable { header, rows })
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Per-column deviation statistics from a comparison.
#[derive(Debug, Clone)]
pub struct ColumnDiff {
    pub name: String,
    pub max_abs: f64,
    pub mean_abs: f64,
}

/// Outcome of comparing two run CSVs.
#[derive(Debug, Clone)]
pub struct CompareReport {
    pub columns: Vec<ColumnDiff>,
    pub rows_compared: usize,
    /// Iterations present in only one of the files.
    pub unmatched_iters: usize,
    /// Columns present in only one of the files (wall time excluded).
    pub unshared_columns: Vec<String>,
}

impl CompareReport {
    /// Largest per-column max deviation; infinite when the files failed to
    /// align structurally.
    pub fn max_deviation(&self) -> f64 {
        let structural = self.unmatched_iters > 0 || !self.unshared_columns.is_empty();
        let base = if structural { f64::INFINITY } else { 0.0 };
        self.columns.iter().fold(base, |m, c| m.max(c.max_abs))
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max_deviation() <= tol
    }
}

/// Compare two run CSVs aligned by the `iter` column. `wall_time_s` is
/// excluded (it is never deterministic); all other shared columns are
/// compared with NaN == NaN. Iterations or columns present in only one file
/// count as structural deviations.
pub fn compare_tables(a: &CsvTable, b: &CsvTable) -> Result<CompareReport, String> {
    let iter_a = a.column_index("iter").ok_or("first file has no iter column")?;
    let iter_b = b.column_index("iter").ok_or("second file has no iter column")?;

    let shared: Vec<String> = a
        .header
        .iter()
        .filter(|h| *h != "wall_time_s" && *h != "iter" && b.column_index(h).is_some())
        .cloned()
        .collect();
    let mut unshared: Vec<String> = a
        .header
        .iter()
        .filter(|h| *h != "wall_time_s" && b.column_index(h).is_none())
        .cloned()
        .collect();
    unshared.extend(
        b.header
            .iter()
            .filter(|h| *h != "wall_time_s" && a.column_index(h).is_none())
            .cloned(),
    );

    let key = |row: &[f64], idx: usize| row[idx] as i64;
    let mut b_by_iter = std::collections::BTreeMap::new();
    for row in &b.rows {
        b_by_iter.insert(key(row, iter_b), row);
    }

    let mut unmatched = 0usize;
    let mut matched = 0usize;
    let mut sums = vec![0.0f64; shared.len()];
    let mut maxes = vec![0.0f64; shared.len()];
    let mut b_seen = std::collections::BTreeSet::new();
    for row_a in &a.rows {
        let it = key(row_a, iter_a);
        let Some(row_b) = b_by_iter.get(&it) else {
            unmatched += 1;
            continue;
        };
        b_seen.insert(it);
        matched += 1;
        for (ci, name) in shared.iter().enumerate() {
            let va = row_a[a.column_index(name).unwrap()];
            let vb = row_b[b.column_index(name).unwrap()];
            let dev = if va.is_nan() && vb.is_nan() {
                0.0
            } else {
                (va - vb).abs()
            };
            sums[ci] += dev;
            maxes[ci] = maxes[ci].max(dev);
        }
    }
    unmatched += b.rows.len() - b_seen.len();

    let columns = shared
        .into_iter()
        .enumerate()
        .map(|(ci, name)| ColumnDiff {
            name,
            max_abs: maxes[ci],
            mean_abs: if matched > 0 { sums[ci] / matched as f64 } else { 0.0 },
        })
        .collect();

    Ok(CompareReport {
        columns,
        rows_compared: matched,
        unmatched_iters: unmatched,
        unshared_columns: unshared,
    })
}
