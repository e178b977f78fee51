//! Exact computational machinery for the integer symplectic group `Sp(2p;Z)`:
//! root-labeled elementary generators and their relation table, coordinates on
//! unipotent radicals, logarithmic-length shortcut words, bounded-generation
//! decomposition of symplectic blocks, parabolic normal forms, Siegel-set and
//! short-vector checks, adaptive triangulations, and exact weight-zero
//! homology of the graded nilpotent Lie algebras attached to parabolic frames.
//!
//! Everything is exact: big integers and big rationals throughout, no
//! floating point on any accept/reject path.

pub mod error;
pub mod roots;
pub mod spmat;
pub mod unipotent;
pub mod words;
pub mod shortcuts;
pub mod boundedgen;
pub mod parabolic;
pub mod reduction;
pub mod liecheck;

pub use error::{Error, Result};
