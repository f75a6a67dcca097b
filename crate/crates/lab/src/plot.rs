//! SVG figures from CSV files written by `run`.

use std::fmt;
use std::path::Path;

use crate::svg::{self, Axes, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PlotKind {
    /// `theta, vartheta, value` grids (phase portraits).
    Heatmap,
    /// Density sweeps and trajectory diagnostics.
    Line,
}

/// The CSV does not have a shape the requested plot understands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaError(pub String);

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for SchemaError {}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Values of a column; empty cells become `None`.
    fn values(&self, col: usize) -> Result<Vec<Option<f64>>, SchemaError> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let cell = r[col].trim();
                if cell.is_empty() {
                    return Ok(None);
                }
                cell.parse().map(Some).map_err(|_| {
                    SchemaError(format!("row {}: column {:?} is not a number: {cell:?}", i + 2, self.header[col]))
                })
            })
            .collect()
    }
}

fn read(path: &Path) -> anyhow::Result<Csv> {
    let mut r = csv::Reader::from_path(path).map_err(|e| SchemaError(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| SchemaError(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(SchemaError(format!("{}: empty CSV", path.display())).into());
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| SchemaError(format!("{}: {e}", path.display())))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    if rows.is_empty() {
        return Err(SchemaError(format!("{}: no data rows", path.display())).into());
    }
    Ok(Csv { header, rows })
}

fn require(csv: &Csv, names: &[&str]) -> Result<Vec<usize>, SchemaError> {
    names
        .iter()
        .map(|n| {
            csv.column(n)
                .ok_or_else(|| SchemaError(format!("missing column {n:?}; found {}", csv.header.join(","))))
        })
        .collect()
}

fn heatmap(csv: &Csv) -> anyhow::Result<String> {
    let cols = require(csv, &["theta", "vartheta", "value"])?;
    let t = csv.values(cols[0])?;
    let v = csv.values(cols[1])?;
    let values = csv.values(cols[2])?;
    let t: Vec<f64> = t.into_iter().collect::<Option<_>>().ok_or_else(|| SchemaError("empty theta cell".into()))?;
    let v: Vec<f64> = v.into_iter().collect::<Option<_>>().ok_or_else(|| SchemaError("empty vartheta cell".into()))?;
    // row-major in theta: the vartheta column repeats with period nv
    let nv = v.iter().skip(1).position(|x| *x == v[0]).map_or(v.len(), |p| p + 1);
    if nv < 2 || !t.len().is_multiple_of(nv) {
        return Err(SchemaError("theta/vartheta columns do not form a grid".into()).into());
    }
    let nt = t.len() / nv;
    let thetas: Vec<f64> = (0..nt).map(|i| t[i * nv]).collect();
    let varthetas = v[..nv].to_vec();
    for i in 0..nt {
        for j in 0..nv {
            if t[i * nv + j] != thetas[i] || v[i * nv + j] != varthetas[j] {
                return Err(SchemaError(format!("row {} breaks the grid layout", i * nv + j + 2)).into());
            }
        }
    }
    // contours at quartiles of the finite range
    let finite: Vec<f64> = values.iter().flatten().copied().collect();
    if finite.is_empty() {
        return Err(SchemaError("no finite values".into()).into());
    }
    let (lo, hi) = finite.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(*x), h.max(*x)));
    let levels: Vec<f64> = (1..8).map(|k| lo + (hi - lo) * k as f64 / 8.0).collect();
    Ok(svg::heatmap("level sets", ("Θ", "ϑ"), &thetas, &varthetas, &values, &levels))
}

fn line(csv: &Csv) -> anyhow::Result<String> {
    let points = |x: usize, y: usize| -> Result<Vec<(f64, f64)>, SchemaError> {
        let xs = csv.values(x)?;
        let ys = csv.values(y)?;
        Ok(xs.into_iter().zip(ys).filter_map(|(a, b)| Some((a?, b?))).collect())
    };
    if let (Some(g), Some(d)) = (csv.column("gamma"), csv.column("density")) {
        let mut series = vec![Series {
            name: "density".into(),
            points: points(g, d)?,
        }];
        if let (Some(lo), Some(hi)) = (csv.column("ci_low"), csv.column("ci_high")) {
            series.push(Series {
                name: "95% low".into(),
                points: points(g, lo)?,
            });
            series.push(Series {
                name: "95% high".into(),
                points: points(g, hi)?,
            });
        }
        for s in &mut series {
            s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        return Ok(svg::line_chart(
            "Diophantine density",
            ("first scale", "density"),
            &series,
            Axes { log_x: true, log_y: false },
        ));
    }
    if let (Some(t), Some(e)) = (csv.column("t"), csv.column("energy_error")) {
        let pts: Vec<(f64, f64)> = points(t, e)?.into_iter().map(|(t, e)| (t, e.abs())).collect();
        return Ok(svg::line_chart(
            "relative energy error",
            ("t", "|ΔH/H|"),
            &[Series {
                name: "energy".into(),
                points: pts,
            }],
            Axes { log_x: false, log_y: true },
        ));
    }
    Err(SchemaError(format!(
        "no line schema matches columns {}; expected gamma,density or t,energy_error",
        csv.header.join(",")
    ))
    .into())
}

/// Render `csv_path` and write the SVG to `out`. Nothing is written on
/// error.
pub fn plot(csv_path: &Path, kind: PlotKind, out: &Path) -> anyhow::Result<()> {
    let csv = read(csv_path)?;
    let svg = match kind {
        PlotKind::Heatmap => heatmap(&csv)?,
        PlotKind::Line => line(&csv)?,
    };
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(out, svg)?;
    Ok(())
}
