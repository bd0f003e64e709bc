//! Exact word-metric models of concrete groups.

pub mod ball;
pub mod classify;
pub mod conjugacy;
pub mod geodesics;
mod model;
mod spec;

pub use ball::{enumerate_ball, for_each_sphere, next_sphere, sphere_counts, Ball, Caps, Sphere};
pub use classify::{classify_free_product, classify_raag, FreeProductClass, RaagClass};
pub use conjugacy::{class_key, conj_length, cyclic_reduce, ConjClassKey};
pub use geodesics::{geodesics_between, is_geodesic, GeodesicIter, GeodesicStream};
pub use model::{shortlex, Element, Gen, Generator, GroupModel, ModelKind, Side, Word};
pub use spec::{GroupSpec, MAX_RAAG_VERTICES};
