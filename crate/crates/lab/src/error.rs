use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config: {0}")]
    Config(String),
    #[error("config: unknown experiment `{0}` (expected one of census, genericity, conjugacy, barriers, contraction, paths, bbf)")]
    UnknownExperiment(String),
    #[error("{0}")]
    Core(#[from] cgt_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl LabError {
    pub fn from_json(e: serde_json::Error) -> Self {
        LabError::Config(format!("line {} column {}: {e}", e.line(), e.column()))
    }

    /// Process exit code: 2 config, 3 budget abort, 4 invariant violation.
    pub fn exit_code(&self) -> i32 {
        use cgt_core::Error as E;
        match self {
            LabError::Config(_) | LabError::UnknownExperiment(_) => 2,
            LabError::Core(E::Budget(_)) => 3,
            LabError::Core(
                E::ConjLengthMismatch { .. } | E::NonInvariantPredicate { .. } | E::NotMinimal { .. },
            ) => 4,
            LabError::Core(
                E::ElementaryFreeProduct
                | E::SelfLoop(_)
                | E::InvalidSpec(_)
                | E::UnknownGenerator(_)
                | E::WrongModelKind { .. }
                | E::Torsion(_)
                | E::IdentityAxis
                | E::NotDistinct
                | E::DuplicateLetters,
            ) => 2,
            LabError::Core(_) | LabError::Io(_) => 1,
        }
    }
}
