use aes::cipher::generic_array::GenericArray;
use aes::cipher::{BlockEncrypt, KeyInit};
use aes::Aes128;
use sha2::{Digest, Sha256};

use super::CryptoError;
use crate::exec::Exec;
use crate::field::BitVec;

/// Largest seed length [`ToyPrg::invert`] will enumerate.
pub const MAX_INVERT_BITS: u32 = 24;

/// Fixed-key AES-128 in counter mode over the seed.
///
/// Block input is `seed (u64 LE) ‖ counter (u64 LE)`; the key is the first
/// 16 bytes of SHA-256 of a domain tag, so distinct roles get independent
/// kernels.
#[derive(Clone)]
pub struct AesKernel {
    cipher: Aes128,
    tag: String,
}

impl std::fmt::Debug for AesKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "AesKernel({:?})", self.tag)
    }
}

impl AesKernel {
    pub fn new(tag: &str) -> Self {
        let digest = Sha256::digest(tag.as_bytes());
        let key = GenericArray::clone_from_slice(&digest[..16]);
        Self { cipher: Aes128::new(&key), tag: tag.to_string() }
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    #[inline]
    pub fn block(&self, seed: u64, counter: u64) -> [u64; 2] {
        let mut input = [0u8; 16];
        input[..8].copy_from_slice(&seed.to_le_bytes());
        input[8..].copy_from_slice(&counter.to_le_bytes());
        let mut b = GenericArray::from(input);
        self.cipher.encrypt_block(&mut b);
        [
            u64::from_le_bytes(b[..8].try_into().unwrap()),
            u64::from_le_bytes(b[8..].try_into().unwrap()),
        ]
    }

    /// Unbounded keystream for one seed.
    pub fn stream(&self, seed: u64) -> PrgStream<'_> {
        PrgStream { kernel: self, seed, counter: 0, buf: [0; 2], pos: 2 }
    }
}

/// Word-at-a-time reader over an [`AesKernel`] keystream.
pub struct PrgStream<'a> {
    kernel: &'a AesKernel,
    seed: u64,
    counter: u64,
    buf: [u64; 2],
    pos: usize,
}

impl PrgStream<'_> {
    pub fn next_u64(&mut self) -> u64 {
        if self.pos == 2 {
            self.buf = self.kernel.block(self.seed, self.counter);
            self.counter += 1;
            self.pos = 0;
        }
        self.pos += 1;
        self.buf[self.pos - 1]
    }

    /// Uniform integer in `[0, bound)` by multiply-shift with rejection.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        loop {
            let x = self.next_u64();
            let wide = (x as u128) * (bound as u128);
            let low = wide as u64;
            if low >= bound.wrapping_neg() % bound {
                return (wide >> 64) as u64;
            }
        }
    }
}

/// Seed expander `{0,1}^λ → {0,1}^out` with a brute-force inversion mode.
#[derive(Clone, Debug)]
pub struct ToyPrg {
    seed_bits: u32,
    out_bits: usize,
    kernel: AesKernel,
}

impl ToyPrg {
    pub fn new(seed_bits: u32, out_bits: usize, tag: &str) -> Result<Self, CryptoError> {
        if seed_bits > 64 {
            return Err(CryptoError::Infeasible(format!("seed length {seed_bits} > 64")));
        }
        if out_bits <= seed_bits as usize {
            return Err(CryptoError::Infeasible(format!("output {out_bits} bits does not stretch a {seed_bits}-bit seed")));
        }
        Ok(Self { seed_bits, out_bits, kernel: AesKernel::new(tag) })
    }

    pub fn seed_bits(&self) -> u32 {
        self.seed_bits
    }

    pub fn out_bits(&self) -> usize {
        self.out_bits
    }

    pub fn kernel(&self) -> &AesKernel {
        &self.kernel
    }

    fn seed_mask(&self) -> u64 {
        if self.seed_bits == 64 {
            u64::MAX
        } else {
            (1u64 << self.seed_bits) - 1
        }
    }

    pub fn expand(&self, seed: &BitVec) -> Result<BitVec, CryptoError> {
        if seed.len() != self.seed_bits as usize {
            return Err(CryptoError::LengthMismatch { expected: self.seed_bits as usize, got: seed.len() });
        }
        Ok(self.expand_u64(seed.to_u64()))
    }

    /// Expansion of the seed given as its low `seed_bits` bits.
    pub fn expand_u64(&self, seed: u64) -> BitVec {
        let seed = seed & self.seed_mask();
        let words = self.out_bits.div_ceil(64);
        let mut out = Vec::with_capacity(words + 1);
        for c in 0..(words as u64).div_ceil(2) {
            out.extend_from_slice(&self.kernel.block(seed, c));
        }
        BitVec::from_words(out, self.out_bits)
    }

    /// Exhaustive search for a seed expanding to `target`.
    pub fn invert(&self, target: &BitVec, exec: Exec) -> Result<u64, CryptoError> {
        if self.seed_bits > MAX_INVERT_BITS {
            return Err(CryptoError::Infeasible(format!("inversion needs λ ≤ {MAX_INVERT_BITS}")));
        }
        if target.len() != self.out_bits {
            return Err(CryptoError::LengthMismatch { expected: self.out_bits, got: target.len() });
        }
        let head = target.words()[0];
        let head_mask = if self.out_bits >= 64 { u64::MAX } else { (1u64 << self.out_bits) - 1 };
        exec.find_first(0..1u64 << self.seed_bits, |s| {
            self.kernel.block(s, 0)[0] & head_mask == head && self.expand_u64(s) == *target
        })
        .ok_or(CryptoError::NotInRange)
    }
}
