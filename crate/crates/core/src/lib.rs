//! Numerical toolkit for orthoscalar (locally scalar) representations of
//! quivers over Hilbert spaces.
//!
//! Representations are stored as families of complex blocks, one per arrow.
//! On top of a small Jacobi-based dense kernel ([`linalg`]) the crate computes
//! intertwiner spaces in the plain and the `*`-category ([`morphism`]),
//! decides Schur-ness, splits `*`-representations into indecomposable
//! orthogonal summands, replays the rescaling-rigidity argument as a
//! certificate ([`rigidity`]), translates between star-quiver representations
//! and systems of orthogonal projections ([`subspace`]), and manufactures
//! orthoscalar representations for prescribed dimension and character data
//! ([`synthesis`]).
//!
//! The crate is `no_std` and only needs `alloc`.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod linalg;
pub mod morphism;
pub mod quiver;
pub mod random;
pub mod representation;
pub mod rigidity;
pub mod subspace;
pub mod synthesis;

pub use error::{Error, PreconditionFailure, Result};
pub use linalg::{ComplexMatrix, TolerancePolicy, C64};
pub use quiver::{star_quiver, Arrow, ArrowId, Character, DimensionVector, Parity, Quiver, Vertex, VertexId};
pub use representation::Representation;
