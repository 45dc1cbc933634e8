use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CryptoError;
use crate::exec::Exec;

const HASH_TAG: &[u8] = b"paramsep/ots-hash/v1";

/// SHA-256 truncated to `bits` output bits, on `bits`-bit inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToyHash {
    bits: u32,
}

impl ToyHash {
    pub fn new(bits: u32) -> Result<Self, CryptoError> {
        if !(1..=62).contains(&bits) {
            return Err(CryptoError::Infeasible(format!("hash width {bits} outside 1..=62")));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn domain(&self) -> u64 {
        1u64 << self.bits
    }

    #[inline]
    pub fn eval(&self, x: u64) -> u64 {
        let mut h = Sha256::new();
        h.update(HASH_TAG);
        h.update(x.to_le_bytes());
        let d = h.finalize();
        u64::from_le_bytes(d[..8].try_into().unwrap()) & (self.domain() - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyingKey {
    pub hash: ToyHash,
    pub h: [u64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigningKey {
    pub hash: ToyHash,
    pub x: [u64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OtsKeys {
    pub vk: VerifyingKey,
    pub sk: SigningKey,
}

/// A Lamport signature on one bit: a preimage of `vk.h[b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Signature(pub u64);

pub fn ots_gen<R: Rng + ?Sized>(hash: ToyHash, rng: &mut R) -> OtsKeys {
    let x = [rng.random_range(0..hash.domain()), rng.random_range(0..hash.domain())];
    OtsKeys { vk: VerifyingKey { hash, h: [hash.eval(x[0]), hash.eval(x[1])] }, sk: SigningKey { hash, x } }
}

pub fn ots_sign(sk: &SigningKey, b: bool) -> Signature {
    Signature(sk.x[b as usize])
}

pub fn ots_verify(vk: &VerifyingKey, b: bool, sig: Signature) -> bool {
    sig.0 < vk.hash.domain() && vk.hash.eval(sig.0) == vk.h[b as usize]
}

/// Exhaustive preimage search over the first `effort` inputs.
pub fn ots_forge(vk: &VerifyingKey, target: bool, effort: u64, exec: Exec) -> Result<Signature, CryptoError> {
    ots_forge_from(vk, target, effort, 0, exec)
}

/// Preimage search over `effort` consecutive inputs from `start`, wrapping
/// around the domain.
pub fn ots_forge_from(vk: &VerifyingKey, target: bool, effort: u64, start: u64, exec: Exec) -> Result<Signature, CryptoError> {
    let want = vk.h[target as usize];
    let mask = vk.hash.domain() - 1;
    let end = effort.min(vk.hash.domain());
    let at = |i: u64| start.wrapping_add(i) & mask;
    exec.find_first(0..end, |i| vk.hash.eval(at(i)) == want)
        .map(|i| Signature(at(i)))
        .ok_or(CryptoError::ForgeFailed { effort })
}

/// Success probability of [`ots_forge`] against a fresh key, treating the
/// hash as a random function.
pub fn forge_success_model(hash_bits: u32, effort: u64) -> f64 {
    let d = (hash_bits as f64).exp2();
    let e = (effort as f64).min(d);
    let own = e / d;
    let other = 1.0 - (1.0 - 1.0 / d).powf(e);
    own + (1.0 - own) * other
}
