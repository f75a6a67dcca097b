//! Experiment configuration files.
//!
//! A config is TOML: top-level `experiment`, `seed` and `output` keys plus
//! optional `[system]`, `[sampling]`, `[quadrature]`, `[integrator]`,
//! `[birkhoff]`, `[portrait]`, `[diophantine]` and `[kam]` tables. Unknown
//! keys are rejected. Every error carries the line it refers to.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use planetlab_core::geometry::{e1, e3, rotate_about, rotate_k};
use planetlab_core::secular::QuadratureSpec;
use planetlab_core::{EllipseElements, SystemMasses, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    ChartsRoundtrip,
    Symplecticity,
    Dalembert,
    SecularIdentities,
    IntegrabilityProbe,
    PhasePortrait,
    Birkhoff,
    Resonances,
    DioMeasure,
    KamBudget,
    Integrate,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 11] = [
        ExperimentId::ChartsRoundtrip,
        ExperimentId::Symplecticity,
        ExperimentId::Dalembert,
        ExperimentId::SecularIdentities,
        ExperimentId::IntegrabilityProbe,
        ExperimentId::PhasePortrait,
        ExperimentId::Birkhoff,
        ExperimentId::Resonances,
        ExperimentId::DioMeasure,
        ExperimentId::KamBudget,
        ExperimentId::Integrate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::ChartsRoundtrip => "charts-roundtrip",
            ExperimentId::Symplecticity => "symplecticity",
            ExperimentId::Dalembert => "dalembert",
            ExperimentId::SecularIdentities => "secular-identities",
            ExperimentId::IntegrabilityProbe => "integrability-probe",
            ExperimentId::PhasePortrait => "phase-portrait",
            ExperimentId::Birkhoff => "birkhoff",
            ExperimentId::Resonances => "resonances",
            ExperimentId::DioMeasure => "dio-measure",
            ExperimentId::KamBudget => "kam-budget",
            ExperimentId::Integrate => "integrate",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    #[serde(default)]
    pub seed: u64,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub birkhoff: BirkhoffConfig,
    #[serde(default)]
    pub portrait: PortraitConfig,
    #[serde(default)]
    pub diophantine: DiophantineConfig,
    #[serde(default)]
    pub kam: KamConfig,
}

/// The planetary system. Either `elements` or the per-planet lists are used.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    /// Planet count; 3 unless `elements` fixes it.
    pub n: Option<usize>,
    pub m0: f64,
    pub mu: f64,
    /// Planet mass factors; all 1 when absent.
    pub masses: Option<Vec<f64>>,
    /// Semi-major axes.
    pub axes: Option<Vec<f64>>,
    /// Ratios `a_i / a_{i+1}`, with the innermost axis 1. Ignored when
    /// `axes` is given.
    pub ratios: Option<Vec<f64>>,
    pub eccentricities: Option<Vec<f64>>,
    /// Tilt of each orbit plane from the reference plane, radians.
    pub inclinations: Option<Vec<f64>>,
    /// Perihelion angles within each orbit plane, radians.
    pub perihelia: Option<Vec<f64>>,
    pub mean_anomalies: Option<Vec<f64>>,
    pub elements: Option<Vec<ElementConfig>>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            n: None,
            m0: 1.0,
            mu: 1e-3,
            masses: None,
            axes: None,
            ratios: None,
            eccentricities: None,
            inclinations: None,
            perihelia: None,
            mean_anomalies: None,
            elements: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementConfig {
    pub a: f64,
    pub e: f64,
    pub perihelion: [f64; 3],
    pub normal: [f64; 3],
    #[serde(default)]
    pub mean_anomaly: f64,
}

/// Random configurations drawn around the system's axes.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    pub count: usize,
    pub e_min: f64,
    pub e_max: f64,
    /// Largest angle between an orbit normal and the common direction.
    pub max_tilt: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            count: 1000,
            e_min: 0.02,
            e_max: 0.8,
            max_tilt: 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub nodes: usize,
    pub tol: f64,
    pub max_nodes: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            nodes: QuadratureSpec::default().nodes,
            tol: 1e-12,
            max_nodes: 4096,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub method: String,
    pub steps_per_period: f64,
    /// Span in periods of the innermost planet.
    pub periods: f64,
    pub stride: usize,
    pub energy_tol: f64,
    pub collision_radius: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: "gauss6".into(),
            steps_per_period: 100.0,
            periods: 1000.0,
            stride: 100,
            energy_tol: 1e-9,
            collision_radius: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BirkhoffConfig {
    pub step: f64,
    pub alpha_max: f64,
    /// Planet counts for the `resonances` table.
    pub n_values: Vec<usize>,
    /// Random systems per planet count.
    pub count: usize,
    /// Range of consecutive axis ratios for random systems.
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// Order of the lattice search for small combinations.
    pub order: u32,
}

impl Default for BirkhoffConfig {
    fn default() -> Self {
        Self {
            step: planetlab_core::birkhoff::DEFAULT_STEP,
            alpha_max: planetlab_core::birkhoff::DEFAULT_ALPHA_MAX,
            n_values: vec![2, 3, 4],
            count: 20,
            ratio_min: 0.05,
            ratio_max: 0.19,
            order: 2,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PortraitConfig {
    /// Half width of the `Θ` range as a fraction of the bound `min(χ)`.
    pub theta_fraction: f64,
    pub vartheta_half_width: f64,
    pub grid: [usize; 2],
    /// Level fractions between the centre value and the rim minimum.
    pub levels: Vec<f64>,
}

impl Default for PortraitConfig {
    fn default() -> Self {
        Self {
            theta_fraction: 0.75,
            vartheta_half_width: 0.35,
            grid: [64, 64],
            levels: vec![0.25, 0.5, 0.9],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiophantineConfig {
    pub nu_parts: Vec<usize>,
    pub gammas: Vec<f64>,
    pub tau: f64,
    pub cutoff: u32,
    pub samples: usize,
    /// Box the frequencies are drawn from, one `[lo, hi]` per entry.
    pub bounds: Vec<[f64; 2]>,
    /// Values of the first scale swept by `dio-measure`.
    pub sweep: Vec<f64>,
    /// Expected log-log slope of the complement measure in the scale.
    pub slope: f64,
    pub slope_tol: f64,
}

impl Default for DiophantineConfig {
    fn default() -> Self {
        Self {
            nu_parts: vec![2],
            gammas: vec![0.01],
            tau: 2.0,
            cutoff: 50,
            samples: 20_000,
            bounds: vec![[1.0, 2.0], [1.0, 2.0]],
            sweep: vec![0.04, 0.02, 0.01, 0.005],
            slope: 1.0,
            slope_tol: 0.3,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KamConfig {
    pub m_norm: f64,
    pub m_blocks: Vec<f64>,
    pub m_bar: f64,
    pub m_bar_blocks: Vec<f64>,
    pub e: f64,
    pub l: Option<f64>,
    pub s: f64,
    pub s_bar: f64,
    pub rho: f64,
    pub tau_star: f64,
    pub gammas: Vec<f64>,
    pub c_hat: f64,
    /// Scale guesses `(μ, E₀, L₀, K̄)` for the heuristic condition.
    pub heuristic: Option<[f64; 4]>,
    /// Expected outcome of the condition, checked when given.
    pub expect: Option<bool>,
}

impl Default for KamConfig {
    fn default() -> Self {
        Self {
            m_norm: 1.0,
            m_blocks: vec![1.0, 1e-2],
            m_bar: 1.0,
            m_bar_blocks: vec![1.0, 1e2],
            e: 1e-12,
            l: None,
            s: 0.05,
            s_bar: 0.5,
            rho: 0.1,
            tau_star: 2.0,
            gammas: vec![1e-2, 1e-4],
            c_hat: 1.0,
            heuristic: None,
            expect: None,
        }
    }
}

/// A config problem, anchored at a line of the source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: PathBuf,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}: {}", self.path.display(), self.line, self.column, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |p| before.len() - p - 1) + 1;
    (line, column)
}

/// Line of `key = …` inside `[section]` (top level when `section` is
/// empty), or of the section header, or 1.
pub(crate) fn locate(src: &str, section: &str, key: &str) -> (usize, usize) {
    let mut current = String::new();
    let mut header_line = None;
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            current = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            if current == section && header_line.is_none() {
                header_line = Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return (i + 1, raw.len() - raw.trim_start().len() + 1);
                }
            }
        }
    }
    (header_line.unwrap_or(1), 1)
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<(Self, String), ConfigError> {
        let src = std::fs::read_to_string(path).map_err(|e| ConfigError {
            path: path.to_path_buf(),
            line: 1,
            column: 1,
            message: format!("cannot read config: {e}"),
        })?;
        let cfg = Self::parse(&src, path)?;
        Ok((cfg, src))
    }

    pub fn parse(src: &str, path: &Path) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(src).map_err(|e| {
            let (line, column) = e.span().map_or((1, 1), |s| line_col(src, s.start));
            ConfigError {
                path: path.to_path_buf(),
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        cfg.validate().map_err(|(section, key, message)| {
            let (line, column) = locate(src, section, key);
            ConfigError {
                path: path.to_path_buf(),
                line,
                column,
                message,
            }
        })?;
        Ok(cfg)
    }

    /// Semantic checks; errors name `(section, key, message)`.
    fn validate(&self) -> Result<(), (&'static str, &'static str, String)> {
        let s = &self.system;
        let n = self.n();
        let err = |section, key, msg: String| Err((section, key, msg));
        if n == 0 || n > 4 {
            return err("system", "n", format!("n must be between 1 and 4, got {n}"));
        }
        if let (Some(k), Some(els)) = (s.n, &s.elements) {
            if k != els.len() {
                return err("system", "n", format!("n = {k} but {} elements given", els.len()));
            }
        }
        for (key, list) in [
            ("masses", &s.masses),
            ("eccentricities", &s.eccentricities),
            ("inclinations", &s.inclinations),
            ("perihelia", &s.perihelia),
            ("mean_anomalies", &s.mean_anomalies),
            ("axes", &s.axes),
        ] {
            if let Some(v) = list {
                if v.len() != n {
                    return err("system", key, format!("{key} needs {n} entries, got {}", v.len()));
                }
            }
        }
        if let Some(r) = &s.ratios {
            if r.len() + 1 != n {
                return err("system", "ratios", format!("ratios needs {} entries, got {}", n - 1, r.len()));
            }
            if r.iter().any(|x| !(*x > 0.0 && *x < 1.0)) {
                return err("system", "ratios", "ratios must lie in (0, 1)".into());
            }
        }
        if let Some(a) = &s.axes {
            if a.iter().any(|x| !(*x > 0.0)) || a.windows(2).any(|w| w[0] >= w[1]) {
                return err("system", "axes", "axes must be positive and increasing".into());
            }
        }
        if let Some(e) = &s.eccentricities {
            if e.iter().any(|x| !(0.0..1.0).contains(x)) {
                return err("system", "eccentricities", "eccentricities must lie in [0, 1)".into());
            }
        }
        if let Err(e) = self.masses() {
            return err("system", "masses", e.to_string());
        }
        if let Some(els) = &s.elements {
            for (i, el) in els.iter().enumerate() {
                if let Err(e) = element_from(el).validate() {
                    return err("system", "elements", format!("element {i}: {e}"));
                }
            }
        }
        let sm = &self.sampling;
        if sm.count == 0 {
            return err("sampling", "count", "count must be positive".into());
        }
        if !(0.0 <= sm.e_min && sm.e_min < sm.e_max && sm.e_max < 1.0) {
            return err("sampling", "e_min", "need 0 ≤ e_min < e_max < 1".into());
        }
        if !(0.0..=std::f64::consts::PI).contains(&sm.max_tilt) {
            return err("sampling", "max_tilt", "max_tilt must lie in [0, π]".into());
        }
        if let Err(e) = self.quadrature_spec() {
            return err("quadrature", "tol", e.to_string());
        }
        let it = &self.integrator;
        if planetlab_core::dynamics::Method::parse(&it.method).is_none() {
            return err("integrator", "method", format!("unknown method {:?} (gauss6, kepler-split)", it.method));
        }
        if !(it.steps_per_period >= 1.0) {
            return err("integrator", "steps_per_period", "steps_per_period must be at least 1".into());
        }
        if !(it.periods > 0.0) {
            return err("integrator", "periods", "periods must be positive".into());
        }
        if it.stride == 0 {
            return err("integrator", "stride", "stride must be positive".into());
        }
        let b = &self.birkhoff;
        if b.n_values.iter().any(|k| !(2..=4).contains(k)) {
            return err("birkhoff", "n_values", "planet counts must lie in 2..=4".into());
        }
        if !(0.0 < b.ratio_min && b.ratio_min < b.ratio_max && b.ratio_max <= b.alpha_max) {
            return err("birkhoff", "ratio_min", "need 0 < ratio_min < ratio_max ≤ alpha_max".into());
        }
        if !(1..=3).contains(&b.order) {
            return err("birkhoff", "order", "order must be 1, 2 or 3".into());
        }
        if !(b.step > 0.0) {
            return err("birkhoff", "step", "step must be positive".into());
        }
        let p = &self.portrait;
        if p.grid[0] < 3 || p.grid[1] < 3 {
            return err("portrait", "grid", "grid needs at least 3 × 3 points".into());
        }
        if !(p.theta_fraction > 0.0 && p.theta_fraction < 1.0) {
            return err("portrait", "theta_fraction", "theta_fraction must lie in (0, 1)".into());
        }
        if p.levels.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
            return err("portrait", "levels", "levels must lie in (0, 1)".into());
        }
        let d = &self.diophantine;
        if d.bounds.len() != d.nu_parts.iter().sum::<usize>() {
            return err("diophantine", "bounds", "one [lo, hi] pair per frequency is required".into());
        }
        if d.bounds.iter().any(|[lo, hi]| !(lo < hi)) {
            return err("diophantine", "bounds", "each bound needs lo < hi".into());
        }
        if let Err(e) = self.filtration() {
            return err("diophantine", "gammas", e.to_string());
        }
        if d.sweep.iter().any(|g| !(*g > 0.0)) {
            return err("diophantine", "sweep", "sweep values must be positive".into());
        }
        if d.samples == 0 {
            return err("diophantine", "samples", "samples must be positive".into());
        }
        Ok(())
    }

    pub fn masses(&self) -> planetlab_core::Result<SystemMasses> {
        let s = &self.system;
        let n = self.n();
        let m = s.masses.clone().unwrap_or_else(|| vec![1.0; n]);
        SystemMasses::new(s.m0, s.mu, m)
    }

    pub fn n(&self) -> usize {
        let s = &self.system;
        s.elements.as_ref().map_or(s.n.unwrap_or(3), Vec::len)
    }

    pub fn axes(&self) -> Vec<f64> {
        let s = &self.system;
        if let Some(els) = &s.elements {
            return els.iter().map(|e| e.a).collect();
        }
        if let Some(a) = &s.axes {
            return a.clone();
        }
        let default_ratios = [1.0 / 2.3, 2.3 / 5.1, 5.1 / 11.0];
        let ratios = s.ratios.clone().unwrap_or_else(|| default_ratios[..self.n() - 1].to_vec());
        let mut a = vec![1.0];
        for r in ratios {
            let last = *a.last().expect("non-empty");
            a.push(last / r);
        }
        a
    }

    /// The configured ellipses.
    pub fn elements(&self) -> Vec<EllipseElements> {
        let s = &self.system;
        if let Some(els) = &s.elements {
            return els.iter().map(element_from).collect();
        }
        let n = self.n();
        let axes = self.axes();
        let pick = |v: &Option<Vec<f64>>, f: &dyn Fn(usize) -> f64| -> Vec<f64> {
            v.clone().unwrap_or_else(|| (0..n).map(f).collect())
        };
        let ecc = pick(&s.eccentricities, &|_| 0.2);
        let inc = pick(&s.inclinations, &|i| 0.2 * i as f64);
        let peri = pick(&s.perihelia, &|i| 0.4 + 1.1 * i as f64);
        let mean = pick(&s.mean_anomalies, &|i| 0.3 + 2.1 * i as f64);
        let reference = reference_normal();
        (0..n)
            .map(|i| {
                // tilt about a hinge in the reference plane that turns with
                // the body index
                let hinge = rotate_about(&reference, 0.9 * i as f64, &reference.cross(&e1()).normalize());
                let normal = rotate_about(&hinge, inc[i], &reference);
                let node = hinge.cross(&normal).normalize();
                let perihelion = rotate_about(&normal, peri[i], &node);
                EllipseElements {
                    a: axes[i],
                    e: ecc[i],
                    perihelion,
                    normal,
                    mean_anomaly: mean[i],
                }
            })
            .collect()
    }

    pub fn quadrature_spec(&self) -> planetlab_core::Result<QuadratureSpec> {
        let q = &self.quadrature;
        QuadratureSpec::new(q.nodes, q.tol, q.max_nodes)
    }

    pub fn filtration(&self) -> planetlab_core::Result<planetlab_core::diophantine::DioFiltration> {
        let d = &self.diophantine;
        planetlab_core::diophantine::DioFiltration::new(d.nu_parts.clone(), d.gammas.clone(), d.tau, d.cutoff)
    }
}

/// Reference plane normal, tilted off the frame axis so that no node of the
/// reduced chart starts degenerate.
pub fn reference_normal() -> Vec3 {
    rotate_k(0.2, &rotate_about(&e1(), 0.3, &e3()))
}

fn element_from(el: &ElementConfig) -> EllipseElements {
    EllipseElements {
        a: el.a,
        e: el.e,
        perihelion: Vec3::from(el.perihelion),
        normal: Vec3::from(el.normal),
        mean_anomaly: el.mean_anomaly,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::parse(src, Path::new("test.toml"))
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = parse("experiment = \"charts-roundtrip\"\n").unwrap();
        assert_eq!(cfg.experiment, ExperimentId::ChartsRoundtrip);
        assert_eq!(cfg.n(), 3);
        assert_eq!(cfg.sampling.count, 1000);
        let els = cfg.elements();
        assert_eq!(els.len(), 3);
        for el in &els {
            el.validate().unwrap();
        }
    }

    #[test]
    fn unknown_key_is_rejected_at_its_line() {
        let err = parse("experiment = \"birkhoff\"\n[system]\nn = 2\nplanets = 3\n").unwrap_err();
        assert_eq!(err.line, 4, "{err}");
        assert!(err.message.contains("planets"), "{err}");
    }

    #[test]
    fn unknown_experiment_is_rejected() {
        let err = parse("seed = 1\nexperiment = \"orbits\"\n").unwrap_err();
        assert_eq!(err.line, 2, "{err}");
    }

    #[test]
    fn semantic_errors_point_at_the_key() {
        let err = parse("experiment = \"birkhoff\"\n[system]\nn = 2\n\neccentricities = [0.1]\n").unwrap_err();
        assert_eq!(err.line, 5, "{err}");
        let err = parse("experiment = \"integrate\"\n[integrator]\nmethod = \"leapfrog\"\n").unwrap_err();
        assert_eq!(err.line, 3, "{err}");
        let err = parse("experiment = \"dio-measure\"\n[diophantine]\ngammas = [0.1, 0.2]\n").unwrap_err();
        assert_eq!(err.line, 3, "{err}");
    }

    #[test]
    fn ratios_build_axes() {
        let cfg = parse("experiment = \"birkhoff\"\n[system]\nn = 3\nratios = [0.1, 0.2]\n").unwrap();
        let a = cfg.axes();
        assert!((a[1] - 10.0).abs() < 1e-12 && (a[2] - 50.0).abs() < 1e-12);
    }

    #[test]
    fn configured_inclinations_are_the_plane_tilts() {
        let cfg = parse("experiment = \"integrate\"\n[system]\nn = 2\ninclinations = [0.0, 0.35]\n").unwrap();
        let els = cfg.elements();
        let angle = els[0].normal.dot(&els[1].normal).clamp(-1.0, 1.0).acos();
        assert!((angle - 0.35).abs() < 1e-12);
        assert!(els.iter().all(|e| e.perihelion.dot(&e.normal).abs() < 1e-15));
    }
}
