//! Report rendering: an aligned text table on stdout plus an optional CSV
//! with a versioned schema comment. Rows are sorted by case key before
//! emission, so identical configs reproduce identical bytes; wall-clock time
//! appears only in the table footer, never in the CSV.

use std::path::Path;
use std::time::Duration;

use anyhow::Result;

pub const CSV_SCHEMA: &str = "indiv-csv-v1";

#[derive(Debug, Clone)]
pub struct Row {
    pub case: String,
    pub detail: String,
    pub expected: String,
    pub actual: String,
    pub ok: bool,
    pub certificate: String,
}

#[derive(Debug)]
pub struct Report {
    pub experiment: String,
    pub header: Vec<(String, String)>,
    pub rows: Vec<Row>,
    pub elapsed: Duration,
    pub library_version: String,
}

impl Report {
    pub fn new(experiment: &str, header: Vec<(String, String)>) -> Self {
        Report {
            experiment: experiment.to_string(),
            header,
            rows: Vec::new(),
            elapsed: Duration::ZERO,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn finish(&mut self, elapsed: Duration) {
        self.rows.sort_by(|a, b| (&a.case, &a.detail).cmp(&(&b.case, &b.detail)));
        self.elapsed = elapsed;
    }

    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.ok)
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "== {} (indiv {}) ==\n",
            self.experiment, self.library_version
        ));
        for (k, v) in &self.header {
            out.push_str(&format!("  {k} = {v}\n"));
        }
        let headers = ["case", "detail", "expected", "actual", "status", "certificate"];
        let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
        let cells = |r: &Row| -> [String; 6] {
            [
                r.case.clone(),
                r.detail.clone(),
                r.expected.clone(),
                r.actual.clone(),
                if r.ok { "ok".into() } else { "MISMATCH".into() },
                r.certificate.clone(),
            ]
        };
        for r in &self.rows {
            for (w, c) in widths.iter_mut().zip(cells(r)) {
                *w = (*w).max(c.len());
            }
        }
        let rule = |widths: &[usize]| -> String {
            let mut s = String::from("  ");
            for w in widths {
                s.push_str(&"-".repeat(w + 2));
            }
            s.push('\n');
            s
        };
        out.push_str(&rule(&widths));
        let mut line = String::from("  ");
        for (h, w) in headers.iter().zip(&widths) {
            line.push_str(&format!("{h:<w$}  ", w = w));
        }
        out.push_str(line.trim_end());
        out.push('\n');
        out.push_str(&rule(&widths));
        for r in &self.rows {
            let mut line = String::from("  ");
            for (c, w) in cells(r).iter().zip(&widths) {
                line.push_str(&format!("{c:<w$}  ", w = w));
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out.push_str(&rule(&widths));
        let bad = self.rows.iter().filter(|r| !r.ok).count();
        out.push_str(&format!(
            "  {} rows, {} mismatches; wall clock {:.3}s\n",
            self.rows.len(),
            bad,
            self.elapsed.as_secs_f64()
        ));
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        let sanitize = |s: &str| s.replace(',', ";");
        let mut out = String::new();
        out.push_str(&format!(
            "# {CSV_SCHEMA} experiment={} library={}\n",
            self.experiment, self.library_version
        ));
        out.push_str("case,detail,expected,actual,status,certificate\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                sanitize(&r.case),
                sanitize(&r.detail),
                sanitize(&r.expected),
                sanitize(&r.actual),
                if r.ok { "ok" } else { "mismatch" },
                sanitize(&r.certificate),
            ));
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}
