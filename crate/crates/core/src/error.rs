use alloc::string::String;
use core::fmt;

/// Where a positivity violation was detected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Site {
    /// Solution (GLL) node.
    Node(usize),
    /// Volume quadrature point.
    Volume(usize),
    /// Facet quadrature point (local face, point on face).
    Facet(usize, usize),
    /// Element cell average.
    Average,
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Node(i) => write!(f, "solution node {i}"),
            Site::Volume(i) => write!(f, "volume point {i}"),
            Site::Facet(face, k) => write!(f, "face {face} point {k}"),
            Site::Average => f.write_str("cell average"),
        }
    }
}

/// Step/stage context attached to a positivity failure by the time integrator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StageContext {
    pub step: Option<usize>,
    pub stage: Option<u8>,
}

impl fmt::Display for StageContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.step, self.stage) {
            (Some(s), Some(k)) => write!(f, " (step {s}, stage {k})"),
            (Some(s), None) => write!(f, " (step {s})"),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("inadmissible state in element {element} at {site}: rho = {rho:e}, p = {pressure:e}{context}")]
    Positivity {
        element: usize,
        site: Site,
        rho: f64,
        pressure: f64,
        context: StageContext,
    },

    #[error("inadmissible state: rho = {rho:e}, p = {pressure:e}")]
    InadmissibleState { rho: f64, pressure: f64 },

    #[error("Roe average produced non-positive sound speed squared ({0:e})")]
    RoeAverage(f64),

    #[error("mesh is not conforming: {0}")]
    NonConforming(String),

    #[error("boundary face at ({x}, {y}) matched {matches} segments")]
    BoundaryPartition { x: f64, y: f64, matches: usize },

    #[error("step limit of {0} exceeded before reaching final time")]
    StepLimit(usize),

    #[error("singular system while building {0}")]
    Singular(&'static str),

    #[error("case `{0}` has no exact solution")]
    NoExactSolution(&'static str),

    #[error("point ({x}, {y}) lies outside the case domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("bisection bracket invalid: {0}")]
    Bracket(&'static str),

    #[error("Riemann solver: {0}")]
    Riemann(&'static str),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Attach step/stage information to a positivity failure.
    pub fn at_stage(self, step: usize, stage: u8) -> Self {
        match self {
            Error::Positivity { element, site, rho, pressure, .. } => Error::Positivity {
                element,
                site,
                rho,
                pressure,
                context: StageContext { step: Some(step), stage: Some(stage) },
            },
            other => other,
        }
    }

    /// True for failures caused by loss of positivity (the signal used by max-CFL searches).
    pub fn is_positivity(&self) -> bool {
        matches!(
            self,
            Error::Positivity { .. } | Error::InadmissibleState { .. } | Error::RoeAverage(_)
        )
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
