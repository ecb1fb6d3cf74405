use thiserror::Error;

/// Errors raised by query validation, classification and the evaluation engines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DcqError {
    #[error("atoms {first} and {second} are defined on the same attribute set")]
    DuplicateAttributeSet { first: String, second: String },
    #[error("head attribute `{0}` does not occur in any body atom")]
    HeadNotInBody(String),
    #[error("relation `{0}` is used more than once")]
    SelfJoin(String),
    #[error("atom `{0}` repeats an attribute or has none")]
    MalformedAtom(String),
    #[error("attribute `{0}` is missing from the source attribute list")]
    AttributeMissing(String),
    #[error("query is not alpha-acyclic")]
    NotAcyclic,
    #[error("operand heads differ: {0}")]
    HeadMismatch(String),
    #[error("query is not linear-reducible")]
    NotLinearReducible,
    #[error("relation `{0}` is not present in the database")]
    UnresolvedRelation(String),
    #[error("relation `{relation}` has arity {found}, atom expects {expected}")]
    ArityMismatch {
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("query is not free-connex")]
    NotFreeConnex,
    #[error("difference is not difference-linear: {0}")]
    NotDifferenceLinear(String),
    #[error("predicate does not refer to a single base relation: {0}")]
    PredicateNotOnBaseRelation(String),
    #[error("projection attributes are not a subset of the head")]
    NotSubsetOfHead,
    #[error("schema clash: {0}")]
    SchemaClash(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("relation `{0}` carries no annotation")]
    MissingAnnotation(String),
    #[error("an operand is not free-connex on the grouping attributes")]
    NotFreeConnexOnAggHead,
    #[error("no domain supplied for attribute `{0}`")]
    MissingDomain(String),
    #[error("preconditions not met: {0}")]
    ConditionsNotMet(String),
    #[error("oracle budget of {0} tuple combinations exceeded")]
    BudgetExceeded(u64),
    #[error("a difference needs at least two operands")]
    TooFewOperands,
}

pub type Result<T, E = DcqError> = std::result::Result<T, E>;
