//! Results of an experiment: assertions, tables and figures, and how they
//! are written to disk.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context as _;

/// One checked property. `name` is `module.property`, optionally with a
/// `[qualifier]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Assertion {
    /// `value < tol`.
    pub fn below(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            pass: value < tol,
            detail: format!("{} (tol {})", sci(value), sci(tol)),
        }
    }

    /// `value > floor`.
    pub fn above(name: impl Into<String>, value: f64, floor: f64) -> Self {
        Self {
            name: name.into(),
            pass: value > floor,
            detail: format!("{} (floor {})", sci(value), sci(floor)),
        }
    }

    /// `|value − target| ≤ tol`.
    pub fn near(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            pass: (value - target).abs() <= tol,
            detail: format!("{value:.4} (expected {target} ± {tol})"),
        }
    }

    pub fn check(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// A CSV table. Cells are pre-formatted; see [`num`].
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub assertions: Vec<Assertion>,
    pub tables: Vec<Table>,
    /// `(file stem, svg source)`.
    pub figures: Vec<(String, String)>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    pub fn summary(&self, experiment: &str, seed: u64) -> String {
        let mut s = format!("experiment: {experiment}\nseed: {seed}\n");
        for a in &self.assertions {
            s.push_str(&a.line());
            s.push('\n');
        }
        let passed = self.assertions.iter().filter(|a| a.pass).count();
        let _ = writeln!(
            s,
            "result: {} ({passed} of {} assertions)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.assertions.len()
        );
        s
    }

    /// Write every table, figure and `summary.txt` into `dir`.
    pub fn write(&self, dir: &Path, experiment: &str, seed: u64) -> anyhow::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut written = Vec::new();
        for t in &self.tables {
            let path = dir.join(format!("{}.csv", t.name));
            write_csv(&path, &t.header, &t.rows)?;
            written.push(path);
        }
        for (stem, svg) in &self.figures {
            let path = dir.join(format!("{stem}.svg"));
            fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
        }
        let path = dir.join("summary.txt");
        fs::write(&path, self.summary(experiment, seed)).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
        Ok(written)
    }
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> anyhow::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest round-trip decimal, in exponent form outside `[1e-4, 1e6)`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e6).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Two significant digits, for summaries.
pub fn sci(v: f64) -> String {
    format!("{v:.1e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, 1.0, -2.5, 1e-17, 3.7e-13, 123456.789, 1e20, 0.1 + 0.2, f64::MIN_POSITIVE] {
            assert_eq!(num(v).parse::<f64>().unwrap().to_bits(), v.to_bits(), "{v}");
        }
        assert_eq!(num(1e-17), "1e-17");
        assert_eq!(num(0.5), "0.5");
    }

    #[test]
    fn summary_lists_every_assertion() {
        let out = Outcome {
            assertions: vec![Assertion::below("m.small", 1e-12, 1e-9), Assertion::above("m.large", 0.1, 1.0)],
            ..Default::default()
        };
        let s = out.summary("x", 3);
        assert!(s.contains("PASS m.small: 1.0e-12 (tol 1.0e-9)"));
        assert!(s.contains("FAIL m.large"));
        assert!(s.ends_with("result: FAIL (1 of 2 assertions)\n"));
    }

    #[test]
    fn csv_quotes_and_uses_crlf() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(&path, &["a".into(), "b".into()], &[vec!["1,5".into(), "x\"y".into()]]).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "a,b\r\n\"1,5\",\"x\"\"y\"\r\n");
    }
}
