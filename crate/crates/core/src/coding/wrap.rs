//! The wrapper code `[v]`: bit strings packed ℓ bits per symbol, split into
//! RS blocks, each block optionally repeated an odd number of times.
//!
//! With repetition 2t+1 and per-block unique radius e, plurality voting per
//! position followed by Berlekamp–Welch corrects any (t+1)(e+1)−1 symbol
//! errors: a position only votes wrong after t+1 of its copies are hit.

use serde::Serialize;

use super::{CodingError, RsCode};
use crate::field::{BitVec, Fe, Field};

#[derive(Debug, Clone)]
pub struct WrapCode {
    inner: RsCode,
    payload_bits: usize,
    symbols: usize,
    blocks: usize,
    rep: usize,
    correct_radius: usize,
}

/// Layout summary for reports.
#[derive(Debug, Clone, Serialize)]
pub struct WrapLayout {
    pub payload_bits: usize,
    pub block_n: usize,
    pub block_k: usize,
    pub blocks: usize,
    pub rep: usize,
    pub len: usize,
    pub correct_radius: usize,
}

fn radius_for(block_n: usize, block_k: usize, rep: usize) -> usize {
    let e = (block_n - block_k) / 2;
    let t = (rep - 1) / 2;
    (t + 1) * (e + 1) - 1
}

impl WrapCode {
    pub fn new(field: &Field, payload_bits: usize, block_k: usize, block_n: usize, rep: usize) -> Result<Self, CodingError> {
        if payload_bits == 0 {
            return Err(CodingError::InvalidParams("empty payload".into()));
        }
        if rep % 2 == 0 {
            return Err(CodingError::InvalidParams("repetition must be odd".into()));
        }
        let inner = RsCode::new(field, block_n, block_k)?;
        let symbols = payload_bits.div_ceil(field.ell() as usize);
        let blocks = symbols.div_ceil(block_k);
        Ok(Self { inner, payload_bits, symbols, blocks, rep, correct_radius: radius_for(block_n, block_k, rep) })
    }

    /// Shortest layout whose guaranteed radius is at least `min_radius`.
    ///
    /// Ties prefer less repetition, then fewer blocks.
    pub fn for_radius(field: &Field, payload_bits: usize, min_radius: usize) -> Result<Self, CodingError> {
        let q = field.order();
        let symbols = payload_bits.div_ceil(field.ell() as usize).max(1);
        let mut best: Option<(usize, usize, usize, usize)> = None;
        let mut rep = 1;
        while rep <= 2 * min_radius + 1 {
            let t = (rep - 1) / 2;
            let e = (min_radius + 1).div_ceil(t + 1) - 1;
            for block_k in (1..=symbols.min(q)).rev() {
                let block_n = block_k + 2 * e;
                if block_n > q {
                    continue;
                }
                let len = symbols.div_ceil(block_k) * block_n * rep;
                if best.is_none_or(|(l, ..)| len < l) {
                    best = Some((len, block_k, block_n, rep));
                }
            }
            rep += 2;
        }
        let (_, block_k, block_n, rep) = best.ok_or_else(|| {
            CodingError::InvalidParams(format!("no wrapper reaches radius {min_radius} over GF(2^{})", field.ell()))
        })?;
        Self::new(field, payload_bits, block_k, block_n, rep)
    }

    pub fn len(&self) -> usize {
        self.blocks * self.inner.n() * self.rep
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn payload_bits(&self) -> usize {
        self.payload_bits
    }

    pub fn correct_radius(&self) -> usize {
        self.correct_radius
    }

    pub fn inner(&self) -> &RsCode {
        &self.inner
    }

    pub fn layout(&self) -> WrapLayout {
        WrapLayout {
            payload_bits: self.payload_bits,
            block_n: self.inner.n(),
            block_k: self.inner.k(),
            blocks: self.blocks,
            rep: self.rep,
            len: self.len(),
            correct_radius: self.correct_radius,
        }
    }

    pub fn encode(&self, v: &BitVec) -> Result<Vec<Fe>, CodingError> {
        if v.len() != self.payload_bits {
            return Err(CodingError::DimensionMismatch { expected: self.payload_bits, got: v.len() });
        }
        let bk = self.inner.k();
        let mut syms = v.to_symbols(self.inner.field().ell());
        syms.resize(self.blocks * bk, Fe::ZERO);
        let mut out = Vec::with_capacity(self.len());
        for chunk in syms.chunks(bk) {
            let cw = self.inner.encode(chunk)?;
            for _ in 0..self.rep {
                out.extend_from_slice(&cw);
            }
        }
        Ok(out)
    }

    pub fn decode(&self, w: &[Fe]) -> Result<BitVec, CodingError> {
        if w.len() != self.len() {
            return Err(CodingError::DimensionMismatch { expected: self.len(), got: w.len() });
        }
        let n = self.inner.n();
        let mut syms = Vec::with_capacity(self.blocks * self.inner.k());
        let mut votes: Vec<Fe> = Vec::with_capacity(self.rep);
        for block in w.chunks(n * self.rep) {
            let word: Vec<Fe> = (0..n)
                .map(|i| {
                    votes.clear();
                    votes.extend((0..self.rep).map(|c| block[c * n + i]));
                    plurality(&mut votes)
                })
                .collect();
            syms.extend(self.inner.unique_decode(&word)?);
        }
        if syms[self.symbols..].iter().any(|s| !s.is_zero()) {
            return Err(CodingError::DecodeFailure);
        }
        BitVec::from_symbols(&syms[..self.symbols], self.inner.field().ell(), self.payload_bits)
            .ok_or(CodingError::DecodeFailure)
    }
}

/// Most frequent value, smallest on ties.
fn plurality(v: &mut [Fe]) -> Fe {
    if v.len() == 1 {
        return v[0];
    }
    v.sort_unstable();
    let mut best = (0usize, v[0]);
    let mut i = 0;
    while i < v.len() {
        let j = v[i..].iter().position(|&x| x != v[i]).map_or(v.len(), |p| i + p);
        if j - i > best.0 {
            best = (j - i, v[i]);
        }
        i = j;
    }
    best.1
}
