use thiserror::Error;

/// Failure modes shared by every solver in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point lies on the wire axis")]
    AxisDegenerate,

    #[error("{what} did not converge after {iterations} iterations (residuals {residuals:?})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("inward offset collapses: {0}")]
    OffsetCollapse(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("volume {eps:e} exceeds the admissible maximum {eps_max:e}")]
    VolumeTooLarge { eps: f64, eps_max: f64 },

    #[error("meridian turned vertical at r = {r:e} (psi = {psi})")]
    Blowup { r: f64, psi: f64 },

    #[error("step size underflow at r = {r:e}")]
    StepUnderflow { r: f64 },

    #[error("meshing failed: {0}")]
    MeshingFailed(String),

    #[error("volume constraint diverged (violation {violation:e}, penalty {penalty:e})")]
    VolumeInfeasible { violation: f64, penalty: f64 },

    #[error("mesh quality {quality:.4} fell below the floor")]
    MeshDegenerate { quality: f64 },

    #[error("surface has no boundary")]
    NoBoundary,

    #[error("chart map is singular at s = {s}, t = {t}")]
    ChartSingular { s: f64, t: f64 },

    #[error("surface is not a graph over the meridian circle at s = {s}, rho = {rho}")]
    NotAGraph { s: f64, rho: f64 },

    #[error("records are incompatible: {0}")]
    IncompatibleRecords(String),

    #[error("epsilon tail spans {decades:.2} decades, need at least 3")]
    InsufficientTail { decades: f64 },

    #[error("invalid wire: {0}")]
    InvalidWire(String),
}

impl Error {
    /// Stable upper-case code used in JSON reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::AxisDegenerate => "AXIS_DEGENERATE",
            Error::NoConvergence { .. } => "NO_CONVERGENCE",
            Error::OffsetCollapse(_) => "OFFSET_COLLAPSE",
            Error::Domain(_) => "DOMAIN",
            Error::VolumeTooLarge { .. } => "VOLUME_TOO_LARGE",
            Error::Blowup { .. } => "BLOWUP",
            Error::StepUnderflow { .. } => "STEP_UNDERFLOW",
            Error::MeshingFailed(_) => "MESHING_FAILED",
            Error::VolumeInfeasible { .. } => "VOLUME_INFEASIBLE",
            Error::MeshDegenerate { .. } => "MESH_DEGENERATE",
            Error::NoBoundary => "NO_BOUNDARY",
            Error::ChartSingular { .. } => "CHART_SINGULAR",
            Error::NotAGraph { .. } => "NOT_A_GRAPH",
            Error::IncompatibleRecords(_) => "INCOMPATIBLE_RECORDS",
            Error::InsufficientTail { .. } => "INSUFFICIENT_TAIL",
            Error::InvalidWire(_) => "INVALID_WIRE",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain_err(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
