//! Generalized Aluthge transformations of complex matrices.
//!
//! For a square matrix `T = U|T|` with `|T| = Σ s_i P_i` and an operator mean
//! with perspective `P_f`, the transform is `Δ(T) = Σ_{i,j} P_f(s_i, s_j) P_i U P_j`.
//! The geometric mean of weight 1/2 gives the classical Aluthge transform
//! `|T|^{1/2} U |T|^{1/2}`; the arithmetic mean gives the mean transform
//! `(U|T| + |T|U)/2` for invertible `T`.
//!
//! Modules:
//! - [`linalg`]: complex matrices, eigen/singular value and polar decompositions.
//! - [`means`]: operator means, perspectives, representing measures, dominance.
//! - [`transform`]: the transform, closed forms, and the quadrature oracle.
//! - [`dynamics`]: iterated transforms and the arithmetic-mean limit.
//! - [`shiftlab`]: weighted-shift weight recursions.
//! - [`numrange`]: numerical range boundaries and inclusion tests.
//! - [`corpus`] and [`io`]: seeded random matrices and file formats.
//! - [`verify`]: batch property checks on seeded data.

pub mod corpus;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod linalg;
pub mod means;
pub mod numrange;
pub mod quadrature;
pub mod shiftlab;
pub mod transform;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, PolarParts, SpectralData, C64};
pub use means::{OperatorMean, RepresentingMeasure};
