//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("cutoff {given} is below the minimum {min} for this operation")]
    CutoffTooSmall { given: usize, min: usize },

    #[error("cutoff mismatch: {left} vs {right}")]
    CutoffMismatch { left: usize, right: usize },

    #[error("unknown operator kind tag `{0}`")]
    UnknownOperatorKind(String),

    #[error("invalid argument: {0}")]
    Domain(String),

    #[error("state is not normalized (norm deviation {deviation:.3e})")]
    Unnormalized { deviation: f64 },

    #[error("coefficient recursion overflowed at index {index}")]
    RecursionOverflow { index: usize },

    #[error("series did not converge within {terms} terms")]
    NonConvergence { terms: usize },

    #[error("window is invalid: {0}")]
    InvalidWindow(String),

    #[error("window contains zero entries; decay fit is undefined")]
    ZeroEntriesInWindow,

    #[error("a0(t) = {a0:.3e} at t = {t} is inside the singular band")]
    SingularTime { t: f64, a0: f64 },

    #[error("no admissible times remain after the singular-band filter")]
    EmptyTimeSet,

    #[error("no phase/sign combination meets the equivalence bound (best defect {best:.3e})")]
    PhaseEquivalenceFailed { best: f64 },

    #[error("finite-difference step-size check failed: {0}")]
    StepSize(String),

    #[error("the U-branch is not holomorphic at z = 0 and is not admissible in the z-representation")]
    NotHolomorphic,

    #[error("sigma must stay positive along the Ermakov flow (sigma = {sigma:.3e} at t = {t})")]
    NonPositiveSigma { t: f64, sigma: f64 },
}
