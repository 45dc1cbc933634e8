//! Arithmetic over GF(2) and GF(2^ℓ).
//!
//! Elements are packed polynomial residues: bit `j` of [`Fe`] is the
//! coefficient of `x^j`. [`ff_mul`] is the reference shift-XOR multiplier;
//! [`Field`] adds log/antilog tables behind the same contract.

mod bits;
mod linalg;

pub use bits::BitVec;
pub use linalg::{solve_dense, Gf2System};

use std::fmt;
use std::ops::{Add, AddAssign};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_ELL: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("field width {0} outside 1..=16")]
    WidthOutOfRange(u32),
    #[error("modulus {modulus:#x} does not have degree {ell}")]
    WrongDegree { ell: u32, modulus: u32 },
    #[error("modulus {0:#x} is reducible")]
    Reducible(u32),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("inconsistent linear system")]
    Inconsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldParams {
    pub ell: u32,
    pub modulus: u32,
}

/// Conventional irreducible moduli, indexed by ℓ.
const DEFAULT_MODULI: [u32; 17] = [
    0, 0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11B, 0x211, 0x409, 0x805, 0x1053, 0x201B,
    0x4443, 0x8003, 0x1100B,
];

impl FieldParams {
    pub fn new(ell: u32, modulus: u32) -> Result<Self, FieldError> {
        if !(1..=MAX_ELL).contains(&ell) {
            return Err(FieldError::WidthOutOfRange(ell));
        }
        if modulus >> ell != 1 {
            return Err(FieldError::WrongDegree { ell, modulus });
        }
        if !is_irreducible(modulus) {
            return Err(FieldError::Reducible(modulus));
        }
        Ok(Self { ell, modulus })
    }

    pub fn default_for(ell: u32) -> Result<Self, FieldError> {
        if !(1..=MAX_ELL).contains(&ell) {
            return Err(FieldError::WidthOutOfRange(ell));
        }
        Self::new(ell, DEFAULT_MODULI[ell as usize])
    }

    pub fn order(&self) -> usize {
        1usize << self.ell
    }

    pub fn mask(&self) -> u16 {
        ((1u32 << self.ell) - 1) as u16
    }
}

fn degree(p: u64) -> i32 {
    63 - p.leading_zeros() as i32
}

fn poly_mod(mut a: u64, b: u64) -> u64 {
    let db = degree(b);
    while a != 0 && degree(a) >= db {
        a ^= b << (degree(a) - db);
    }
    a
}

/// Irreducibility over GF(2) by trial division with every polynomial of
/// degree at most half the input degree.
pub fn is_irreducible(poly: u32) -> bool {
    let p = poly as u64;
    let d = degree(p);
    if d < 1 {
        return false;
    }
    for cand in 2u64..(1u64 << (d / 2 + 1)) {
        if degree(cand) > d / 2 {
            break;
        }
        if poly_mod(p, cand) == 0 {
            return false;
        }
    }
    true
}

/// A field element; addition is XOR.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fe(pub u16);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

impl Add for Fe {
    type Output = Fe;
    fn add(self, rhs: Fe) -> Fe {
        Fe(self.0 ^ rhs.0)
    }
}

impl AddAssign for Fe {
    fn add_assign(&mut self, rhs: Fe) {
        self.0 ^= rhs.0;
    }
}

/// Carry-less multiply with on-the-fly reduction.
pub fn ff_mul(a: Fe, b: Fe, p: &FieldParams) -> Fe {
    let top = 1u32 << p.ell;
    let mut a = a.0 as u32;
    let mut b = b.0 as u32;
    let mut acc = 0u32;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & top != 0 {
            a ^= p.modulus;
        }
    }
    Fe(acc as u16)
}

/// Trace straight from its definition: y + y² + y⁴ + … + y^{2^{ℓ−1}}.
pub fn trace_direct(a: Fe, p: &FieldParams) -> u8 {
    let mut y = a;
    let mut acc = a;
    for _ in 1..p.ell {
        y = ff_mul(y, y, p);
        acc += y;
    }
    debug_assert!(acc.0 <= 1);
    acc.0 as u8
}

struct Tables {
    exp: Vec<u16>,
    log: Vec<u32>,
    trace_mask: u16,
}

/// GF(2^ℓ) with precomputed tables; cheap to clone.
#[derive(Clone)]
pub struct Field {
    params: FieldParams,
    tables: Arc<Tables>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field").field("params", &self.params).finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
    }
}

impl Eq for Field {}

fn find_generator(p: &FieldParams) -> u16 {
    let q1 = (p.order() - 1) as u64;
    if q1 == 1 {
        return 1;
    }
    let mut primes = Vec::new();
    let mut m = q1;
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            primes.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        primes.push(m);
    }
    let pow = |g: Fe, mut e: u64| {
        let mut base = g;
        let mut acc = Fe::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = ff_mul(acc, base, p);
            }
            base = ff_mul(base, base, p);
            e >>= 1;
        }
        acc
    };
    (2..p.order() as u32)
        .map(|g| g as u16)
        .find(|&g| primes.iter().all(|&pr| pow(Fe(g), q1 / pr) != Fe::ONE))
        .expect("multiplicative group of a finite field is cyclic")
}

impl Field {
    pub fn new(params: FieldParams) -> Self {
        let q = params.order();
        let g = Fe(find_generator(&params));
        let mut exp = vec![0u16; 2 * (q - 1)];
        let mut log = vec![0u32; q];
        let mut x = Fe::ONE;
        for i in 0..q - 1 {
            exp[i] = x.0;
            exp[i + q - 1] = x.0;
            log[x.0 as usize] = i as u32;
            x = ff_mul(x, g, &params);
        }
        let mut trace_mask = 0u16;
        for j in 0..params.ell {
            trace_mask |= (trace_direct(Fe(1 << j), &params) as u16) << j;
        }
        Self { params, tables: Arc::new(Tables { exp, log, trace_mask }) }
    }

    pub fn with_ell(ell: u32) -> Result<Self, FieldError> {
        Ok(Self::new(FieldParams::default_for(ell)?))
    }

    pub fn params(&self) -> &FieldParams {
        &self.params
    }

    pub fn ell(&self) -> u32 {
        self.params.ell
    }

    pub fn order(&self) -> usize {
        self.params.order()
    }

    pub fn elem(&self, v: u64) -> Fe {
        Fe((v & self.params.mask() as u64) as u16)
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.order() as u32).map(|v| Fe(v as u16))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        let t = &self.tables;
        Fe(t.exp[(t.log[a.0 as usize] + t.log[b.0 as usize]) as usize])
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: Fe) -> Option<Fe> {
        if a.is_zero() {
            return None;
        }
        let q1 = self.order() - 1;
        let l = self.tables.log[a.0 as usize] as usize;
        Some(Fe(self.tables.exp[(q1 - l) % q1]))
    }

    /// `a / b`; panics when `b` is zero.
    pub fn div(&self, a: Fe, b: Fe) -> Fe {
        self.mul(a, self.inv(b).expect("division by zero"))
    }

    pub fn pow(&self, a: Fe, e: u64) -> Fe {
        if e == 0 {
            return Fe::ONE;
        }
        if a.is_zero() {
            return Fe::ZERO;
        }
        let q1 = (self.order() - 1) as u64;
        let l = self.tables.log[a.0 as usize] as u64;
        Fe(self.tables.exp[((l * (e % q1)) % q1) as usize])
    }

    /// Absolute trace to GF(2), via the trace values of the polynomial basis.
    #[inline]
    pub fn trace(&self, a: Fe) -> u8 {
        ((a.0 & self.tables.trace_mask).count_ones() & 1) as u8
    }

    /// Bit mask `τ(a)` with `Tr(x·a) = parity(x & τ(a))` for every `x`.
    pub fn trace_form(&self, a: Fe) -> u16 {
        let mut m = 0u16;
        for j in 0..self.ell() {
            m |= (self.trace(self.mul(a, Fe(1 << j))) as u16) << j;
        }
        m
    }
}

/// Parity of the coordinatewise AND of two bit vectors.
pub fn gf2_inner(a: &BitVec, b: &BitVec) -> Result<bool, FieldError> {
    a.inner(b)
}
