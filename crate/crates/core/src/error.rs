use thiserror::Error;

/// Errors raised by the moment-space transforms, measures, samplers and experiments.
///
/// Coordinate and moment indices in messages are 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MomentError {
    #[error("coordinate {index} = {value} is outside its domain")]
    Domain { index: usize, value: f64 },

    #[error("moment vector lies on the boundary of the moment space (coordinate {index})")]
    Boundary { index: usize },

    #[error("not the moment vector of a measure on {space}: coordinate {index} = {value}")]
    NotAMeasure {
        space: &'static str,
        index: usize,
        value: f64,
    },

    #[error("need at least {needed} {what}, got {got}")]
    Arity {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("order {order} exceeds the configured cap {cap}")]
    OrderCap { order: usize, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("potential does not give a normalizable density: {0}")]
    NonNormalizable(String),

    #[error("W has more than one local minimum (near {first} and {second})")]
    NonUniqueMinimizer { first: f64, second: f64 },

    #[error("flat minimum at {at}: W'' = {w2} is not positive")]
    FlatMinimum { at: f64, w2: f64 },

    #[error("Stieltjes inversion did not converge at x = {x} (spread {spread:e})")]
    InversionFailure { x: f64, spread: f64 },

    #[error("equilibrium field is only defined for atom-free measures: {0}")]
    UnsupportedField(String),

    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl MomentError {
    /// True for errors that mean "the input is not a valid point / parameter".
    /// A field without a unique non-degenerate minimizer counts as an invalid
    /// parameter.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            MomentError::Domain { .. }
                | MomentError::Boundary { .. }
                | MomentError::NotAMeasure { .. }
                | MomentError::InvalidParameter(_)
                | MomentError::NonNormalizable(_)
                | MomentError::OrderCap { .. }
                | MomentError::Arity { .. }
                | MomentError::UnsupportedField(_)
                | MomentError::NonUniqueMinimizer { .. }
                | MomentError::FlatMinimum { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, MomentError>;
