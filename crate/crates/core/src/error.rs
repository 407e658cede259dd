// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("value {value} is outside the base set 0..{k}")]
    ValueOutOfRange { value: usize, k: usize },

    #[error("expected arity {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("base set mismatch: {left} vs {right}")]
    BaseMismatch { left: usize, right: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot parse operation {text:?}: {reason}")]
    Parse { text: String, reason: String },

    #[error("operation does not preserve the subset: f{tuple:?} = {value}")]
    NotPreserved { tuple: Vec<u8>, value: u8 },

    #[error("{what} exceeds the cap of {cap}")]
    CapExceeded { what: String, cap: u64 },

    #[error("search space of {attempted} candidates exceeds the budget of {budget}")]
    BudgetExceeded { attempted: String, budget: u64 },

    #[error("unsupported clone: {0}")]
    UnsupportedClone(String),

    #[error("{sub} is not a subclone of {sup}")]
    NotSubclone { sub: String, sup: String },

    #[error(
        "breadth {r}: {needed} invariant classes but only {available} blocks in the target arity"
    )]
    CapacityViolated {
        r: usize,
        needed: usize,
        available: String,
    },

    #[error("internal consistency violation: {0}")]
    Consistency(String),
}

impl Error {
    /// Resource errors are the ones a larger cap or budget would avoid.
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            Error::CapExceeded { .. } | Error::BudgetExceeded { .. }
        )
    }
}
