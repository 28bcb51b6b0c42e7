//! Runs every code snippet in the guide (`book/src`) as a doc-test, so
//! the book and the library cannot drift apart.
//!
//! mdbook cannot compile snippets against this workspace's crates, so
//! each chapter is included here as module documentation and
//! `cargo test -p book-tests --doc` does the work. One module per
//! chapter, so a failing snippet names its chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/qubit-model.md")]
pub mod qubit_model {}

#[doc = include_str!("../../../book/src/protocol.md")]
pub mod protocol {}

#[doc = include_str!("../../../book/src/controller-attack.md")]
pub mod controller_attack {}

#[doc = include_str!("../../../book/src/masked-variant.md")]
pub mod masked_variant {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
