use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval ({a}, {b}): need a < b")]
    InvalidInterval { a: f64, b: f64 },

    #[error("invalid range: x = {x} > y = {y}")]
    InvalidRange { x: f64, y: f64 },

    #[error("point {x} lies outside the interval [{a}, {b}]")]
    OutOfInterval { x: f64, a: f64, b: f64 },

    #[error("invalid exponents: {0}")]
    InvalidExponents(String),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("degenerate weight: tail mass W* vanishes identically")]
    DegenerateWeight,

    #[error("sequence is not geometrically decreasing (sup of consecutive ratios = {ratio})")]
    NotGeometric { ratio: f64 },

    #[error("lemma hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("truncation-dominated sum for {name}: last term is {ratio} of the partial sum")]
    TruncationDominated { name: String, ratio: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}
