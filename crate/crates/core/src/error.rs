use thiserror::Error;

/// Errors raised by the library. Arithmetic overflow panics instead.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vector is not in the rational span of the lattice generators")]
    NotInSpan,

    #[error("lattice generators are linearly dependent")]
    DependentGenerators,

    #[error("matrix is not invertible")]
    Singular,

    #[error("group too large: closure exceeded {limit} elements")]
    GroupTooLarge { limit: usize },

    #[error("grid too large: {size} candidate points exceeds the bound {limit}; use a coarser denominator schedule or a lower rank")]
    GridTooLarge { size: u128, limit: u128 },

    #[error("element set is not closed under multiplication")]
    NotClosed,

    #[error("subgroups belong to different parent groups")]
    ParentMismatch,

    #[error("point violates the hyperplane constraint of the action space")]
    ConstraintViolation,

    #[error("lattice is not invariant under the group")]
    LatticeNotInvariant,

    #[error("fine lattice is not contained in the coarse lattice")]
    LatticesNotNested,

    #[error("invalid denominator schedule: {0}")]
    InvalidSchedule(String),

    #[error("unsupported group type {family}{rank}: {reason}")]
    UnsupportedType {
        family: String,
        rank: usize,
        reason: String,
    },

    #[error("inconsistent stratum: {0}")]
    InconsistentStratum(String),

    #[error("isotropy subgroup at witness {witness} is not generated by its reflections (order {order}, reflection closure order {closure_order})")]
    ReflectionClosureViolated {
        witness: String,
        order: usize,
        closure_order: usize,
    },

    #[error("torus mode requires a lattice")]
    MissingLattice,

    #[error("type model check failed: {0}")]
    ModelCheck(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures caused by a configured size bound rather than bad input.
    pub fn is_resource_bound(&self) -> bool {
        matches!(
            self,
            Error::GroupTooLarge { .. } | Error::GridTooLarge { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
