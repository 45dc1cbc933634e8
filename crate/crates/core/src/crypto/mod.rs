//! Toy PRG (fixed-key AES in counter mode) and Lamport one-time signatures
//! over a truncated SHA-256, both with explicit brute-force modes.

mod ots;
mod prg;

pub use ots::{
    forge_success_model, ots_forge, ots_forge_from, ots_gen, ots_sign, ots_verify, OtsKeys, Signature, SigningKey, ToyHash,
    VerifyingKey,
};
pub use prg::{AesKernel, PrgStream, ToyPrg, MAX_INVERT_BITS};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    #[error("expected {expected} bits, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("target is not in the PRG image")]
    NotInRange,
    #[error("forgery not found within {effort} evaluations")]
    ForgeFailed { effort: u64 },
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
}
