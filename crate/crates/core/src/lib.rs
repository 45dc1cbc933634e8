//! Desk-scale simulation of parameter-count separations between bounded and
//! unbounded learners and adversaries.
//!
//! The crate builds two explicit learning tasks end to end (Reed–Solomon
//! codes, a toy PRG, Lamport one-time signatures, a pseudorandom subset
//! sampler), the learners and attacks that separate them, and exact
//! validators for the extraction and small-bias lemmas they rely on.

pub mod exec;
pub mod adversaries;
pub mod coding;
pub mod crypto;
pub mod field;
pub mod harness;
pub mod learners;
pub mod sampler;
pub mod stat;
pub mod tasks;

pub use exec::Exec;
