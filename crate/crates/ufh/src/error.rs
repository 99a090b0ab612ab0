//! Error type shared by all modules.

use crate::group::Element;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// An element was used with a group model it does not belong to.
    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    /// Integer overflow while composing elements far from the window scale.
    #[error("coordinate overflow in {0}")]
    Overflow(&'static str),

    /// A quantity was requested outside the enumerated part of the group.
    /// The caller gets an error, never a silently wrong value.
    #[error("beyond window: {0}")]
    BeyondWindow(String),

    /// Enumeration hit the configured element cap.
    #[error("enumeration cap exceeded: {0}")]
    CapExceeded(String),

    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("empty set: {0}")]
    EmptySet(&'static str),

    #[error("invalid parameter: {0}")]
    Invalid(String),

    /// Følner family is incompatible with the group model.
    #[error("incompatible family: {0}")]
    IncompatibleFamily(String),

    /// The family carries no star radii, so the ringed construction cannot run.
    #[error("family has no star radii; the ringed sparse construction requires them")]
    MissingStarRadii,

    /// Condition (*) failed; the report says which inclusion broke first.
    #[error("star condition violated at j={j}: {which}")]
    StarViolation { j: u64, which: String },

    #[error("degree error: {0}")]
    Degree(String),

    /// A template that was supposed to be a cycle over the subgroup is not.
    #[error("template is not a cycle over H: boundary survives at {0:?}")]
    NotACycle(Element),

    /// A function that was supposed to be left-H-invariant is not.
    #[error("not H-invariant: phi(h*g) != phi(g) for h={h:?}, g={g:?}")]
    NotInvariant { h: Element, g: Element },

    #[error("subgroup is not marked normal; coset averaging requires a normal subgroup")]
    NotNormal,

    #[error("search budget exhausted after {candidates} candidates; window too small")]
    BudgetExhausted { candidates: u64 },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
