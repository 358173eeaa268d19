//! Exact computational algebra over finite-dimensional F_p-algebras.
//!
//! The crate builds the rings, free modules, and maps needed to study
//! indivisible sequences at finite scale: boolean group rings with their
//! degree-1 embeddings, augmented maps and their split injectivity, the
//! obstruction lifting problem with coverage accounting, the greedy
//! avoidance search with its counting threshold, and the free-algebra
//! functors that assemble the faithfully flat tensor maps.
//!
//! Every decision procedure reduces to Gaussian elimination over F_p. There
//! is no floating point anywhere; witnesses and refutation certificates
//! re-verify bit-exactly and serialize with content digests.

pub mod avoidance;
pub mod caps;
pub mod error;
pub mod fp;
pub mod functors;
pub mod group_ring;
pub mod index;
pub mod indivisibility;
pub mod linalg;
pub mod modules;
pub mod ring;
pub mod solver;
pub mod splitting;
pub mod witness;

pub use error::{Error, Result};
pub use fp::PrimeModulus;
pub use index::{IndexSet, Label};
pub use ring::{make_ring, RingDescriptor, RingElem, RingHandle, RingHom};
