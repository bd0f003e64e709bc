//! Computational toolkit for contracting elements in word-metric Cayley
//! graphs: exact group models, projections and contraction tests, admissible
//! paths, barriers, projection complexes and growth censuses.

pub mod barriers;
pub mod bbf;
pub mod census;
pub mod error;
pub mod geometry;
pub mod group;
pub mod paths;

pub use error::{BudgetExceeded, Error, Result};
pub use group::{Element, Gen, GroupModel, GroupSpec, Word};
