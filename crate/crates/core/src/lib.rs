//! Characterization constants, dyadic discretization and best-constant oracles for the
//! iterated weighted Hardy inequality
//!
//! ```text
//! (∫_a^b (∫_a^x (∫_a^t f)^q u(t) dt)^{r/q} w(x) dx)^{1/r} <= C (∫_a^b f^p v)^{1/p}.
//! ```
//!
//! Every routine is generic over [`Real`] (`f32` or `f64`); the `*64` aliases fix the scalar
//! to `f64`, which is what the test-suite and the command-line harness use.

pub mod characterization;
pub mod discretization;
pub mod error;
pub mod ext_real;
pub mod measure;
pub(crate) mod mesh;
pub mod oracle;
pub mod scalar;

pub use error::{Error, Result};
pub use ext_real::ExtReal;
pub use measure::{
    ess_sup, integrate, vp, wstar, Exponents, HardyExponents, Interval, Loc, MonotoneExponents, Quadrature,
    Weight,
};
pub use characterization::{
    classify, classify_monotone, continuous_constants, discrete_constants, local_hardy_constant, monotone_constants,
    ConditionReport, ConstantName, Regime, Resolution, TailDiagnostic,
};
pub use discretization::{build_discretizing_sequence, lemma_pair, DiscretizingSequence, LemmaInput, LemmaKind, LemmaPair};
pub use oracle::{
    best_constant_search, discrete_best_constant, evaluate, lhs_iterated, lhs_kernel_q1, monotone_pair_check, rhs_norm,
    OracleEstimate, SearchOptions, SequenceKind, TestFunction,
};
pub use scalar::Real;

pub type ExtReal64 = ExtReal<f64>;
pub type Interval64 = Interval<f64>;
pub type Weight64 = Weight<f64>;
pub type Exponents64 = Exponents<f64>;
pub type MonotoneExponents64 = MonotoneExponents<f64>;
pub type HardyExponents64 = HardyExponents<f64>;
pub type ConditionReport64 = ConditionReport<f64>;
pub type DiscretizingSequence64 = DiscretizingSequence<f64>;
pub type TestFunction64 = TestFunction<f64>;
pub type OracleEstimate64 = OracleEstimate<f64>;
