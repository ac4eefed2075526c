//! Regime classification and the characterization constants.

mod continuous;
mod discrete;
mod local;

use std::fmt;

use crate::ext_real::ExtReal;
use crate::measure::{Exponents, MonotoneExponents};
use crate::scalar::{lit, Real};

pub use continuous::{continuous_constants, continuous_constants_with, monotone_constants, monotone_constants_with};
pub use discrete::{discrete_constants, discrete_constants_with};
pub use local::{local_hardy_constant, local_hardy_constant_with};

pub(crate) use continuous::VProfile;
pub(crate) use local::local_on_mesh;
pub(crate) use discrete::Ladder;

/// The four exponent regimes. Ties `p = q` and `p = r` fall into the `<=` branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `p <= r` and `p <= q`
    I,
    /// `r < p <= q`
    II,
    /// `q < p <= r`
    III,
    /// `r < p` and `q < p`
    IV,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::I => "I",
            Regime::II => "II",
            Regime::III => "III",
            Regime::IV => "IV",
        };
        f.write_str(s)
    }
}

pub fn classify<T: Real>(e: &Exponents<T>) -> Regime {
    split(e.p, e.q, e.r)
}

/// Regime of the monotone inequality: the cases compare `p` with `q` and with `1`.
pub fn classify_monotone<T: Real>(e: &MonotoneExponents<T>) -> Regime {
    split(T::one(), e.p.recip(), e.q / e.p)
}

pub(crate) fn split<T: Real>(p: T, q: T, r: T) -> Regime {
    match (p <= q, p <= r) {
        (true, true) => Regime::I,
        (true, false) => Regime::II,
        (false, true) => Regime::III,
        (false, false) => Regime::IV,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstantName {
    C1,
    C2,
    C3,
    C4,
    C5,
    CalC1,
    CalC2,
    CalC3,
    CalC4,
    CalC5,
    A1,
    A2,
    A3,
    A4,
    B1,
    B2,
}

impl ConstantName {
    pub const ALL: [ConstantName; 16] = [
        ConstantName::C1,
        ConstantName::C2,
        ConstantName::C3,
        ConstantName::C4,
        ConstantName::C5,
        ConstantName::CalC1,
        ConstantName::CalC2,
        ConstantName::CalC3,
        ConstantName::CalC4,
        ConstantName::CalC5,
        ConstantName::A1,
        ConstantName::A2,
        ConstantName::A3,
        ConstantName::A4,
        ConstantName::B1,
        ConstantName::B2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConstantName::C1 => "C1",
            ConstantName::C2 => "C2",
            ConstantName::C3 => "C3",
            ConstantName::C4 => "C4",
            ConstantName::C5 => "C5",
            ConstantName::CalC1 => "calC1",
            ConstantName::CalC2 => "calC2",
            ConstantName::CalC3 => "calC3",
            ConstantName::CalC4 => "calC4",
            ConstantName::CalC5 => "calC5",
            ConstantName::A1 => "A1",
            ConstantName::A2 => "A2",
            ConstantName::A3 => "A3",
            ConstantName::A4 => "A4",
            ConstantName::B1 => "B1",
            ConstantName::B2 => "B2",
        }
    }

    /// Names required by each regime for the iterated inequality.
    pub fn iterated(regime: Regime) -> [ConstantName; 2] {
        use ConstantName::*;
        match regime {
            Regime::I => [C1, C1],
            Regime::II => [C2, C3],
            Regime::III => [C1, C4],
            Regime::IV => [C3, C5],
        }
    }
}

impl fmt::Display for ConstantName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Last-term to partial-sum (or partial-max) ratio of a truncated infinite sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailDiagnostic<T> {
    pub name: ConstantName,
    pub tail_ratio: T,
}

/// Computed constants for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport<T> {
    pub regime: Regime,
    pub constants: Vec<(ConstantName, ExtReal<T>)>,
    pub combined: ExtReal<T>,
    pub finite: bool,
    pub truncation: Vec<TailDiagnostic<T>>,
}

impl<T: Real> ConditionReport<T> {
    pub(crate) fn from_constants(regime: Regime, constants: Vec<(ConstantName, ExtReal<T>)>) -> Self {
        let combined = constants.iter().map(|(_, v)| *v).sum::<ExtReal<T>>();
        Self {
            regime,
            finite: combined.is_finite(),
            constants,
            combined,
            truncation: Vec::new(),
        }
    }

    pub fn get(&self, name: ConstantName) -> Option<ExtReal<T>> {
        self.constants.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }

    /// Largest tail ratio over every truncated sum in the report.
    pub fn worst_tail(&self) -> T {
        self.truncation.iter().map(|t| t.tail_ratio).fold(T::zero(), T::max)
    }
}

/// Grid and tolerance settings shared by the constant computations.
#[derive(Debug, Clone, Copy)]
pub struct Resolution<T> {
    /// Cells of the global grid.
    pub grid: usize,
    /// Cells of each local grid (one per discretization interval).
    pub local_grid: usize,
    /// Relative quadrature tolerance for weight moments.
    pub tol: T,
    /// Extra nodes placed on each side of a supremum's grid maximizer.
    pub refine: usize,
}

impl<T: Real> Default for Resolution<T> {
    fn default() -> Self {
        Self {
            grid: 4096,
            local_grid: 256,
            tol: lit(1e-8),
            refine: 64,
        }
    }
}
