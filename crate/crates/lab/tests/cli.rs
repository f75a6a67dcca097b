use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_planetlab"));
    c.env_remove("PLANETLAB_OUT");
    c
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(format!("{name}.toml"))
}

fn run(cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg("run").arg(cfg).arg("--out").arg(out).args(extra).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn every_example_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    for entry in fs::read_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        let out = dir.path().join(&name);
        let o = run(&path, &out, &[]);
        assert_eq!(o.status.code(), Some(0), "{name}:\n{}{}", stdout(&o), stderr(&o));
        let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
        assert!(summary.starts_with(&format!("experiment: {name}\n")), "{summary}");
        assert!(summary.lines().last().unwrap().starts_with("result: PASS"), "{summary}");
        assert!(!summary.contains("FAIL"), "{summary}");
    }
}

#[test]
fn charts_roundtrip_reports_each_chart() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&config("charts-roundtrip"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for chart in ["delaunay", "poincare", "pstar"] {
        assert!(text.contains(&format!("PASS chart_atlas.round_trip[{chart}]")), "{text}");
    }
    let csv = fs::read_to_string(dir.path().join("round_trips.csv")).unwrap();
    assert!(csv.starts_with("chart,sample,attempts,state_error,coordinate_error\r\n"));
}

#[test]
fn reruns_are_byte_identical_for_any_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["charts-roundtrip", "resonances", "dio-measure"] {
        let a = dir.path().join(format!("{name}-a"));
        let b = dir.path().join(format!("{name}-b"));
        assert!(run(&config(name), &a, &["--jobs", "1"]).status.success());
        assert!(run(&config(name), &b, &["--jobs", "3"]).status.success());
        let mut files: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
        files.sort();
        assert!(files.len() >= 2);
        for f in files {
            assert_eq!(fs::read(a.join(&f)).unwrap(), fs::read(b.join(&f)).unwrap(), "{name}/{f:?}");
        }
    }
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(run(&config("charts-roundtrip"), &a, &["--seed", "99"]).status.success());
    assert!(run(&config("charts-roundtrip"), &b, &[]).status.success());
    let sa = fs::read_to_string(a.join("summary.txt")).unwrap();
    assert!(sa.contains("seed: 99\n"));
    assert_ne!(fs::read(a.join("round_trips.csv")).unwrap(), fs::read(b.join("round_trips.csv")).unwrap());
}

#[test]
fn output_directory_falls_back_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("run")
        .arg(config("kam-budget"))
        .env("PLANETLAB_OUT", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("kam_budget.csv").exists());
}

#[test]
fn resonance_residuals_stay_below_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&config("resonances"), dir.path(), &[]).status.success());
    let mut reader = csv::Reader::from_path(dir.path().join("resonances.csv")).unwrap();
    let header = reader.headers().unwrap().clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let (cn, cv, ct) = (col("n"), col("varsigma_relative"), col("trace_relative"));
    let mut seen = std::collections::BTreeSet::new();
    for rec in reader.records() {
        let rec = rec.unwrap();
        seen.insert(rec[cn].to_string());
        assert!(rec[cv].parse::<f64>().unwrap() < 1e-8);
        assert!(rec[ct].parse::<f64>().unwrap() < 1e-8);
    }
    assert_eq!(seen.into_iter().collect::<Vec<_>>(), ["2", "3", "4"]);
}

#[test]
fn dio_measure_writes_table_and_figure() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&config("dio-measure"), dir.path(), &[]).status.success());
    let csv = fs::read_to_string(dir.path().join("dio_measure.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let svg = fs::read_to_string(dir.path().join("dio_measure.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn unknown_key_exits_2_with_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "experiment = \"birkhoff\"\nseed = 1\n\n[system]\nn = 3\nbogus = 2\n").unwrap();
    let o = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.toml:6:1"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn semantic_error_exits_2_at_the_offending_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "experiment = \"birkhoff\"\n[system]\nratios = [0.5, 0.5]\n").unwrap();
    let o = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.toml:3:"), "{}", stderr(&o));
}

#[test]
fn missing_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&dir.path().join("absent.toml"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_assertion_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("kam.toml");
    // the default budget misses the smallness condition
    fs::write(&cfg, "experiment = \"kam-budget\"\n[kam]\nexpect = true\n").unwrap();
    let o = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let summary = fs::read_to_string(dir.path().join("out/summary.txt")).unwrap();
    assert!(summary.contains("FAIL diophantine.kam_condition"));
    assert!(summary.lines().last().unwrap().starts_with("result: FAIL"));
}

#[test]
fn plot_renders_a_phase_portrait_heatmap() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pp");
    assert!(run(&config("phase-portrait"), &out, &[]).status.success());
    let figs = dir.path().join("figs");
    let o = bin()
        .args(["plot", "--kind", "heatmap", "--out"])
        .arg(&figs)
        .arg(out.join("phase_portrait.csv"))
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = fs::read_to_string(figs.join("phase_portrait.svg")).unwrap();
    assert!(svg.contains("<rect") && svg.contains("<line"));
}

#[test]
fn plot_rejects_empty_csv_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    fs::write(&csv, "").unwrap();
    let o = bin().args(["plot", "--kind", "line"]).arg(&csv).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("empty.svg").exists());
}

#[test]
fn plot_rejects_unknown_schema() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("odd.csv");
    fs::write(&csv, "a,b\r\n1,2\r\n").unwrap();
    let o = bin().args(["plot", "--kind", "heatmap"]).arg(&csv).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("theta"));
    assert!(!dir.path().join("odd.svg").exists());
}

#[test]
fn density_sweep_plots_as_a_monotone_curve() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&config("dio-measure"), dir.path(), &[]).status.success());
    let mut reader = csv::Reader::from_path(dir.path().join("dio_measure.csv")).unwrap();
    let mut pts: Vec<(f64, f64)> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[3].parse().unwrap())
        })
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert!(pts.windows(2).all(|w| w[1].1 <= w[0].1));
    let o = bin()
        .args(["plot", "--kind", "line"])
        .arg(dir.path().join("dio_measure.csv"))
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("dio_measure.svg").exists());
}
