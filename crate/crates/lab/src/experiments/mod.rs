//! The eleven experiments. Each returns an [`Outcome`]; the caller owns all
//! file writes.

use std::path::{Path, PathBuf};

use crate::config::{ConfigError, ExperimentConfig, ExperimentId};
use crate::report::Outcome;

mod charts;
mod diophantine;
mod dynamics;
mod perturbation;
mod spectrum;

/// A loaded config plus the effective seed.
pub struct Context<'a> {
    pub cfg: &'a ExperimentConfig,
    pub src: &'a str,
    pub path: &'a Path,
    pub seed: u64,
}

impl Context<'_> {
    /// A config error anchored at `key` of `[section]`.
    pub fn config_error(&self, section: &str, key: &str, message: impl Into<String>) -> anyhow::Error {
        let (line, column) = crate::config::locate(self.src, section, key);
        ConfigError {
            path: PathBuf::from(self.path),
            line,
            column,
            message: message.into(),
        }
        .into()
    }

    /// Key the system's axes were given by, for error anchors.
    pub fn axes_key(&self) -> &'static str {
        let s = &self.cfg.system;
        if s.elements.is_some() {
            "elements"
        } else if s.axes.is_some() {
            "axes"
        } else {
            "ratios"
        }
    }
}

pub fn run(ctx: &Context) -> anyhow::Result<Outcome> {
    match ctx.cfg.experiment {
        ExperimentId::ChartsRoundtrip => charts::round_trip(ctx),
        ExperimentId::Symplecticity => charts::symplecticity(ctx),
        ExperimentId::Dalembert => perturbation::dalembert(ctx),
        ExperimentId::SecularIdentities => perturbation::identities(ctx),
        ExperimentId::IntegrabilityProbe => perturbation::integrability(ctx),
        ExperimentId::PhasePortrait => perturbation::phase_portrait(ctx),
        ExperimentId::Birkhoff => spectrum::birkhoff(ctx),
        ExperimentId::Resonances => spectrum::resonances(ctx),
        ExperimentId::DioMeasure => diophantine::measure(ctx),
        ExperimentId::KamBudget => diophantine::kam(ctx),
        ExperimentId::Integrate => dynamics::integrate(ctx),
    }
}
