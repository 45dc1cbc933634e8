//! Deterministic subset sampler `samp: {0,1}^r → size-t subsets of [N]`.
//!
//! The seed keys an AES keystream that drives a partial Fisher–Yates
//! shuffle; the first `t` positions, sorted ascending, form the subset.
//! Indices are 0-based.

use serde::Serialize;
use thiserror::Error;

use crate::crypto::AesKernel;
use crate::field::BitVec;

/// Largest universe the exhaustive entropy validator accepts.
pub const MAX_VALIDATE_UNIVERSE: u32 = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SamplerError {
    #[error("seed has {got} bits, sampler expects {expected}")]
    SeedLength { expected: usize, got: usize },
    #[error("invalid sampler parameters: {0}")]
    InvalidParams(String),
    #[error("exhaustive validation needs N ≤ {MAX_VALIDATE_UNIVERSE} and r ≤ 20")]
    Infeasible,
}

/// Θ(√N) seed bits rounded up to whole bytes.
pub fn default_seed_bits(universe: u32) -> u32 {
    let root = (universe as f64).sqrt().ceil() as u32;
    8 * root.div_ceil(8).max(1)
}

#[derive(Debug, Clone)]
pub struct SubsetSampler {
    seed_bits: u32,
    universe: u32,
    t: u32,
    kernel: AesKernel,
}

impl SubsetSampler {
    pub fn new(universe: u32, t: u32, seed_bits: u32, tag: &str) -> Result<Self, SamplerError> {
        if t > universe {
            return Err(SamplerError::InvalidParams(format!("t = {t} exceeds universe {universe}")));
        }
        if seed_bits > 64 {
            return Err(SamplerError::InvalidParams(format!("seed length {seed_bits} > 64")));
        }
        Ok(Self { seed_bits, universe, t, kernel: AesKernel::new(tag) })
    }

    pub fn with_default_seed(universe: u32, t: u32, tag: &str) -> Result<Self, SamplerError> {
        Self::new(universe, t, default_seed_bits(universe), tag)
    }

    pub fn seed_bits(&self) -> u32 {
        self.seed_bits
    }

    pub fn universe(&self) -> u32 {
        self.universe
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn samp(&self, seed: &BitVec) -> Result<Vec<u32>, SamplerError> {
        if seed.len() != self.seed_bits as usize {
            return Err(SamplerError::SeedLength { expected: self.seed_bits as usize, got: seed.len() });
        }
        Ok(self.samp_u64(seed.to_u64()))
    }

    /// Subset for the seed given as its low `seed_bits` bits.
    pub fn samp_u64(&self, seed: u64) -> Vec<u32> {
        let seed = if self.seed_bits == 64 { seed } else { seed & ((1u64 << self.seed_bits) - 1) };
        let n = self.universe;
        let t = self.t as usize;
        if t == n as usize {
            return (0..n).collect();
        }
        let mut perm: Vec<u32> = (0..n).collect();
        let mut stream = self.kernel.stream(seed);
        for i in 0..t {
            let j = i + stream.below((n as usize - i) as u64) as usize;
            perm.swap(i, j);
        }
        perm.truncate(t);
        perm.sort_unstable();
        perm
    }
}

/// Flat source over an explicit support of N-bit strings.
#[derive(Debug, Clone)]
pub struct FlatSource {
    pub n_bits: u32,
    pub support: Vec<u32>,
}

impl FlatSource {
    pub fn uniform(n_bits: u32) -> Self {
        Self { n_bits, support: (0..1u32 << n_bits).collect() }
    }

    /// Uniform over the GF(2)-span of `basis`.
    pub fn subspace(n_bits: u32, basis: &[u32]) -> Self {
        let mut span = vec![0u32];
        for &b in basis {
            if span.contains(&b) {
                continue;
            }
            let more: Vec<u32> = span.iter().map(|&s| s ^ b).collect();
            span.extend(more);
        }
        span.sort_unstable();
        Self { n_bits, support: span }
    }

    /// Uniform over strings that vanish outside `window`.
    pub fn window(n_bits: u32, window: u32) -> Self {
        let support = (0..1u32 << n_bits).filter(|x| x & !window == 0).collect();
        Self { n_bits, support }
    }

    /// Entropy rate μ = log₂|support| / N.
    pub fn rate(&self) -> f64 {
        (self.support.len() as f64).log2() / self.n_bits as f64
    }
}

/// Restriction of `x` to the bits at `idx`, packed in order.
pub fn project(x: u32, idx: &[u32]) -> u32 {
    idx.iter().enumerate().fold(0, |acc, (j, &i)| acc | (((x >> i) & 1) << j))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeedEntropy {
    pub min_entropy: f64,
    pub deficiency: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyPreservationReport {
    pub universe: u32,
    pub t: u32,
    pub seed_bits: u32,
    pub mu: f64,
    pub kappa1: f64,
    pub floor_bits: f64,
    /// Mean over seeds of the mass above the floor; bounds the distance to
    /// the nearest joint distribution meeting the floor.
    pub mean_deficiency: f64,
    pub max_deficiency: f64,
    pub deficient_seeds: u64,
    pub min_restricted_entropy: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Entropy of `X_{samp(seed)}` against the floor `floor_bits`.
pub fn seed_entropy(s: &SubsetSampler, source: &FlatSource, seed: u64, floor_bits: f64) -> SeedEntropy {
    let idx = s.samp_u64(seed);
    let mut proj: Vec<u32> = source.support.iter().map(|&x| project(x, &idx)).collect();
    proj.sort_unstable();
    let total = proj.len() as f64;
    let cap = (-floor_bits).exp2();
    let mut max_count = 0usize;
    let mut deficiency = 0.0;
    let mut i = 0;
    while i < proj.len() {
        let j = proj[i..].iter().position(|&v| v != proj[i]).map_or(proj.len(), |p| i + p);
        let c = j - i;
        max_count = max_count.max(c);
        deficiency += (c as f64 / total - cap).max(0.0);
        i = j;
    }
    SeedEntropy { min_entropy: -(max_count as f64 / total).log2(), deficiency }
}

pub fn validate_entropy_preservation(
    s: &SubsetSampler,
    source: &FlatSource,
    kappa1: f64,
    tolerance: f64,
) -> Result<EntropyPreservationReport, SamplerError> {
    if s.universe > MAX_VALIDATE_UNIVERSE || s.seed_bits > 20 || source.n_bits != s.universe {
        return Err(SamplerError::Infeasible);
    }
    let mu = source.rate();
    let floor_bits = ((mu - kappa1) * s.t as f64).max(0.0);
    let seeds = 1u64 << s.seed_bits;
    let mut sum = 0.0;
    let mut max: f64 = 0.0;
    let mut deficient = 0;
    let mut min_h = f64::INFINITY;
    for seed in 0..seeds {
        let e = seed_entropy(s, source, seed, floor_bits);
        sum += e.deficiency;
        max = max.max(e.deficiency);
        deficient += (e.deficiency > 0.0) as u64;
        min_h = min_h.min(e.min_entropy);
    }
    let mean = sum / seeds as f64;
    Ok(EntropyPreservationReport {
        universe: s.universe,
        t: s.t,
        seed_bits: s.seed_bits,
        mu,
        kappa1,
        floor_bits,
        mean_deficiency: mean,
        max_deficiency: max,
        deficient_seeds: deficient,
        min_restricted_entropy: min_h,
        tolerance,
        pass: mean <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_seed_lengths() {
        assert_eq!(default_seed_bits(32), 8);
        assert_eq!(default_seed_bits(64), 8);
        assert_eq!(default_seed_bits(256), 16);
        assert_eq!(default_seed_bits(1024), 32);
        assert_eq!(default_seed_bits(1), 8);
    }

    #[test]
    fn projection_packs_in_order() {
        assert_eq!(project(0b1010_0110, &[1, 2, 5, 7]), 0b1111);
        assert_eq!(project(0b0010_0010, &[1, 2, 5, 7]), 0b0101);
        assert_eq!(project(0b0010_0010, &[5, 1]), 0b11);
    }

    #[test]
    fn subspace_span_size() {
        assert_eq!(FlatSource::subspace(6, &[0b1, 0b10, 0b11, 0b100]).support.len(), 8);
    }
}
