use thiserror::Error;

/// Errors raised by the laboratory. Every variant names the module it comes from so that
/// CLI reports can surface it without extra context.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid: degenerate chart: {0}")]
    DegenerateChart(String),

    #[error("grid: chart mismatch: {0}")]
    ChartMismatch(String),

    #[error("geometry: rank deficiency at node ({i1}, {i2}): |d1 Phi ^ d2 Phi|^2 relative = {ratio:.3e}")]
    RankDeficient { i1: usize, i2: usize, ratio: f64 },

    #[error("geometry: chart is not conformal: residual {residual:.3e} exceeds gate {gate:.3e}")]
    NotConformal { residual: f64, gate: f64 },

    #[error("{module}: not isothermic in these coordinates: residual {residual:.3e} exceeds {gate:.3e}")]
    NotIsothermic {
        module: &'static str,
        residual: f64,
        gate: f64,
    },

    #[error("multivector: grade mismatch: {0}")]
    GradeMismatch(String),

    #[error("multivector: ambient dimension {0} outside 1..=6")]
    Dimension(usize),

    #[error("surface_zoo: unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("surface_zoo: invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("surface_zoo: invalid curve: {0}")]
    InvalidCurve(String),

    #[error("surface_zoo: re-parametrization failed: {0}")]
    Reparametrization(String),

    #[error("{module}: support violation: {msg}")]
    Support { module: &'static str, msg: String },

    #[error("entropy_laws: integrability residual {residual:.3e} exceeds {gate:.3e}")]
    Integrability { residual: f64, gate: f64 },

    #[error(
        "wente_cc: linear solve did not converge after {iterations} iterations (relative residual {residual:.3e})"
    )]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("wente_cc: kernel paths disagree: relative L2 {disagreement:.3e} > {tol:.3e}")]
    KernelDisagreement { disagreement: f64, tol: f64 },

    #[error("defect_lab: {0}")]
    Defect(String),

    #[error("io: schema violation at `{path}`: {msg}")]
    Schema { path: String, msg: String },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("cli_io: invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
