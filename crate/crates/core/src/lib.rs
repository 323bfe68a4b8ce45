//! Partitions of unity, set-valued mappings and continuous selections at
//! desk scale, with machine-checkable certificates.
//!
//! The crate works over two kinds of ground spaces: finite topological
//! spaces given by minimal open neighbourhoods ([`space::FiniteSpace`]) and
//! finite metric samples ([`metric::MetricSampleSpace`]). All constructions
//! are generic over [`scalar::Scalar`], with an exact rational mode and a
//! floating point mode.

pub mod cli;
pub mod convex;
pub mod error;
pub mod json;
pub mod mather;
pub mod metric;
pub mod nerve;
pub mod pou;
pub mod random;
pub mod report;
pub mod scalar;
pub mod selection;
pub mod setmap;
pub mod space;
pub mod sparse;
pub mod verify;

pub use error::Error;
pub use scalar::{Mode, Rational, Scalar};
pub use sparse::{ExtendedUnitVec, IndexId, IndexSet, SparseVec, UnitSimplexPoint};
