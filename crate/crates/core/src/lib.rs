//! One-way universal-relation protocols over GF(q) sparse-recovery
//! sketches, strict-turnstile support finding and ℓ0-sampling built on
//! them, and an executable subset encoder/decoder that measures how many
//! bits a protocol saves.

pub mod bits;
pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod experiments;
pub mod gfq;
pub mod lb;
pub mod levels;
pub mod prf;
pub mod protocol;
pub mod sparse_recovery;
pub mod stream;

pub use error::{Error, Result};
pub use gfq::{FieldElem, FieldVec, SketchMatrix};
