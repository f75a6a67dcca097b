use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("eccentricity {0} outside [0, 1)")]
    Eccentricity(f64),

    #[error("invalid masses: {0}")]
    Masses(&'static str),

    #[error("body {body}: unbound or rectilinear orbit")]
    Unbound { body: usize },

    #[error("collision between body {a} and {}: distance {distance:e} below guard {guard:e}", other_body(b))]
    Collision {
        a: usize,
        /// `None` means the sun.
        b: Option<usize>,
        distance: f64,
        guard: f64,
    },

    #[error("{chart} chart singular at body {body}: {reason}")]
    ChartSingular {
        chart: &'static str,
        body: usize,
        reason: &'static str,
    },

    #[error("vanishing node {node}: sin(angle) = {sine:e}")]
    VanishingNode { node: String, sine: f64 },

    #[error("quadrature did not converge: estimate {estimate}, last change {change:e} at {nodes} nodes")]
    Quadrature {
        estimate: f64,
        change: f64,
        nodes: usize,
    },

    #[error("implicit solve did not converge at step {step} (residual {residual:e})")]
    ImplicitSolve { step: usize, residual: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("domain: {0}")]
    Domain(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

fn other_body(b: &Option<usize>) -> String {
    match b {
        Some(j) => alloc::format!("body {j}"),
        None => "the central body".into(),
    }
}
