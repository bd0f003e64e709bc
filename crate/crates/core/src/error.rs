use thiserror::Error;

/// Partial progress reported when an enumeration hits a resource cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetExceeded {
    pub what: String,
    pub limit: u64,
    /// Per-radius counts completed before the abort.
    pub partial_counts: Vec<u64>,
}

impl std::fmt::Display for BudgetExceeded {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} exceeded cap {} (completed radii: {:?})",
            self.what, self.limit, self.partial_counts
        )
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("elementary free product Z2*Z2 is excluded")]
    ElementaryFreeProduct,
    #[error("RAAG vertex `{0}` has a self-loop")]
    SelfLoop(String),
    #[error("invalid group spec: {0}")]
    InvalidSpec(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("operation requires a {expected} model, got {found}")]
    WrongModelKind {
        expected: &'static str,
        found: &'static str,
    },
    #[error("budget: {0}")]
    Budget(BudgetExceeded),
    #[error("element `{0}` has finite order")]
    Torsion(String),
    #[error("the identity cannot generate an axis")]
    IdentityAxis,
    #[error("empty point set")]
    EmptyPointSet,
    #[error("pairwise distinct sets required")]
    NotDistinct,
    #[error("malformed decomposition: {0}")]
    Malformed(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("geodesic endpoints do not match the path endpoints")]
    EndpointMismatch,
    #[error("duplicate letters in the extension alphabet")]
    DuplicateLetters,
    #[error("Y and Z must be distinct members")]
    SameMember,
    #[error("member {0} is disconnected even after 1-neighborhood thickening")]
    DisconnectedMember(usize),
    #[error("conjugacy length mismatch for `{element}`: cyclic reduction gives {reduced}, brute force finds {brute}")]
    ConjLengthMismatch {
        element: String,
        reduced: usize,
        brute: usize,
    },
    #[error("`{element}` is not a minimal conjugacy representative (length {length}, class length {class_length})")]
    NotMinimal {
        element: String,
        length: usize,
        class_length: usize,
    },
    #[error("predicate is not conjugation invariant: `{element}` and its conjugate `{conjugate}` disagree")]
    NonInvariantPredicate { element: String, conjugate: String },
    #[error("need at least {needed} usable rows, found {found}")]
    InsufficientRows { needed: usize, found: usize },
    #[error("uniform parameters (L, Delta) are missing")]
    MissingUniform,
}

pub type Result<T> = std::result::Result<T, Error>;
