use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    #[error("curve is not regular: min sampled speed {min_speed:e} at t={at_t}")]
    IrregularCurve { min_speed: f64, at_t: f64 },

    #[error("curve polyline self-intersects (segments {seg_a} and {seg_b})")]
    SelfIntersectingCurve { seg_a: usize, seg_b: usize },

    #[error("arclength quadrature did not converge to relative {tol:e} after {refinements} refinements")]
    QuadratureFailure { tol: f64, refinements: usize },

    #[error("degenerate domain: {0} consecutive interior proposals rejected")]
    DegenerateDomain(usize),

    #[error("rejection budget exhausted while sampling {context}")]
    RejectionBudget { context: &'static str },

    #[error("density '{name}' exceeds its certified bound {bound:e} at probe value {observed:e}")]
    DensityBound {
        name: String,
        bound: f64,
        observed: f64,
    },

    #[error("density '{name}' is negative ({observed:e}) at a probe point")]
    NegativeDensity { name: String, observed: f64 },

    #[error("kernel radius must be nonnegative, got {0}")]
    NegativeRadius(f64),

    #[error("thin-plate Laplacian diverges at the center for nu=1")]
    CenterSingularity,

    #[error("kernel order nu must be >= 1, got {0}")]
    InvalidNu(u32),

    #[error("assembly requires nu >= 2 (the Kansa matrix diagonal is undefined for nu={0})")]
    UnsupportedKernel(u32),

    #[error("invalid collocation set: {0}")]
    InvalidSet(String),

    #[error("new point at distance {dist:e} from point {index} is below the distinctness threshold {threshold:e}")]
    DuplicatePoint {
        index: usize,
        dist: f64,
        threshold: f64,
    },

    #[error("right-hand side evaluation failed: {0}")]
    RhsEvaluation(String),

    #[error("matrix input must be square and finite: {0}")]
    MatrixInput(String),

    #[error("linear system is singular (exact zero pivot)")]
    SingularSystem,

    #[error(
        "collocation matrix numerically singular: sigma_min/sigma_max = {ratio:e} \
         (sigma_min={sigma_min:e}, sigma_max={sigma_max:e}, det sign {det_sign}, log|det| {log_abs_det})"
    )]
    NumericallySingular {
        det_sign: i8,
        log_abs_det: f64,
        sigma_min: f64,
        sigma_max: f64,
        ratio: f64,
    },

    #[error("error grid contains no interior points")]
    EmptyGrid,

    #[error("expression syntax error at byte {offset}: {message}")]
    ExprSyntax { offset: usize, message: String },

    #[error("unknown identifier '{name}' at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },

    #[error("expression domain error: {0}")]
    EvalDomain(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
