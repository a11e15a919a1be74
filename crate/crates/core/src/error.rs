use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("kappa equals 4 tau^2 (kappa={kappa}, tau={tau}): not a homogeneous space with 4-dimensional isometry group")]
    DegenerateModel { kappa: f64, tau: f64 },

    #[error("point ({x}, {y}, {z}) is outside the chart (x^2+y^2 must be < {bound})")]
    OutsideChart { x: f64, y: f64, z: f64, bound: f64 },

    #[error("vectors carry different basis tags")]
    MixedBasis,

    #[error("unknown catalog surface '{0}'")]
    UnknownSurface(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate induced metric at (u={u}, v={v}): det g = {det}")]
    DegenerateMetric { u: f64, v: f64, det: f64 },

    #[error("matrix is not orthogonal (deviation {0:e})")]
    NotOrthogonal(f64),

    #[error("anisotropy mismatch: kappa1-4tau1^2 = {source_aniso}, kappa2-4tau2^2 = {target_aniso}")]
    AnisotropyMismatch { source_aniso: f64, target_aniso: f64 },

    #[error("mean curvature is not constant (std dev {0:e})")]
    NonConstantMeanCurvature(f64),

    #[error("mean curvature {found} does not match the requested value {expected}")]
    MeanCurvatureMismatch { expected: f64, found: f64 },

    #[error("no real target mean curvature: tau1^2+H1^2-tau2^2 = {0} < 0")]
    NoRealMeanCurvature(f64),

    #[error("tau1^2+H1^2 = {source_norm} differs from tau2^2+H2^2 = {target_norm}")]
    PhaseNormMismatch { source_norm: f64, target_norm: f64 },

    #[error("source pair (tau, H) is zero")]
    ZeroPhaseSource,

    #[error("twin requires tau != 0 and H != 0")]
    TwinUndefined,

    #[error("initial frame does not have last row (T1, T2, nu): deviation {0:e}")]
    InitialFrame(f64),

    #[error("integration left the chart after gridpoint ({i}, {j})")]
    ChartExit { i: usize, j: usize },

    #[error("quadruple does not satisfy the compatibility equations (worst residual {worst:e} > tol {tol:e})")]
    Incompatible { worst: f64, tol: f64 },

    #[error("grid too small: need at least {needed} points per direction, got {nu}x{nv}")]
    GridTooSmall { nu: usize, nv: usize, needed: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
