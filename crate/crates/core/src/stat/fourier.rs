use super::{Dist, Ratio, StatError};
use crate::field::{Fe, Field};

/// Largest packed dimension n·ℓ the exhaustive routines accept.
pub const MAX_PACKED_BITS: u32 = 20;

/// The vector space GF(2^ℓ)^n, with vectors packed as integers: symbol `i`
/// occupies bits `[iℓ, (i+1)ℓ)`.
#[derive(Debug, Clone)]
pub struct VecSpace {
    field: Field,
    n: usize,
}

impl VecSpace {
    pub fn new(field: &Field, n: usize) -> Result<Self, StatError> {
        if n as u32 * field.ell() > MAX_PACKED_BITS {
            return Err(StatError::Infeasible(format!("{n} symbols of {} bits", field.ell())));
        }
        Ok(Self { field: field.clone(), n })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u32 {
        self.n as u32 * self.field.ell()
    }

    pub fn size(&self) -> usize {
        1 << self.bits()
    }

    pub fn pack(&self, v: &[Fe]) -> usize {
        let ell = self.field.ell();
        v.iter().enumerate().fold(0, |acc, (i, s)| acc | ((s.0 as usize) << (i as u32 * ell)))
    }

    pub fn unpack(&self, x: usize) -> Vec<Fe> {
        let ell = self.field.ell();
        (0..self.n).map(|i| self.field.elem((x >> (i as u32 * ell)) as u64)).collect()
    }

    /// τ(α): the GF(2) vector with Tr⟨x, α⟩ = parity(x & τ(α)).
    pub fn tau(&self, alpha: &[Fe]) -> usize {
        let ell = self.field.ell();
        alpha.iter().enumerate().fold(0, |acc, (i, &a)| acc | ((self.field.trace_form(a) as usize) << (i as u32 * ell)))
    }

    /// Tr⟨x, α⟩ from the definition.
    pub fn trace_inner(&self, x: &[Fe], alpha: &[Fe]) -> u8 {
        let dot = x.iter().zip(alpha).fold(Fe::ZERO, |acc, (&a, &b)| acc + self.field.mul(a, b));
        self.field.trace(dot)
    }
}

/// In-place Walsh–Hadamard transform (unnormalized).
pub fn wht(v: &mut [i128]) {
    let n = v.len();
    assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Unnormalized Fourier spectrum of the weights: entry `τ(α)` divided by the
/// total weight is the signed bias E[(−1)^{Tr⟨x,α⟩}].
pub fn bias_spectrum(x: &Dist, sp: &VecSpace) -> Result<Vec<i128>, StatError> {
    if x.len() != sp.size() {
        return Err(StatError::UniverseMismatch(x.len(), sp.size()));
    }
    let mut v: Vec<i128> = x.weights().iter().map(|&w| w as i128).collect();
    wht(&mut v);
    Ok(v)
}

/// Σ_x w(x)·(−1)^{Tr⟨x,α⟩} by direct enumeration.
pub fn signed_bias_numerator(x: &Dist, sp: &VecSpace, alpha: &[Fe]) -> i128 {
    x.support()
        .map(|i| {
            let w = x.weight(i) as i128;
            if sp.trace_inner(&sp.unpack(i), alpha) == 0 {
                w
            } else {
                -w
            }
        })
        .sum()
}

/// bias(X, α) = |E[(−1)^{Tr⟨x,α⟩}]|.
pub fn bias(x: &Dist, sp: &VecSpace, alpha: &[Fe]) -> f64 {
    signed_bias_numerator(x, sp, alpha).unsigned_abs() as f64 / x.total() as f64
}

/// Maximum bias over nonzero α, exactly.
pub fn max_bias_exact(x: &Dist, sp: &VecSpace) -> Result<Ratio, StatError> {
    let spec = bias_spectrum(x, sp)?;
    // τ is a bijection fixing 0, so nonzero α ↔ nonzero spectrum index
    let m = spec[1..].iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
    Ok(Ratio::new(m, x.total() as u128))
}

pub fn max_bias(x: &Dist, sp: &VecSpace) -> Result<f64, StatError> {
    Ok(max_bias_exact(x, sp)?.to_f64())
}

/// Distribution of X + Y for independent X, Y, by direct enumeration.
pub fn xor_convolve(x: &Dist, y: &Dist) -> Result<Dist, StatError> {
    if x.len() != y.len() {
        return Err(StatError::UniverseMismatch(x.len(), y.len()));
    }
    x.total().checked_mul(y.total()).ok_or(StatError::Overflow)?;
    let mut w = vec![0u64; x.len()];
    for a in x.support() {
        for b in y.support() {
            w[a ^ b] += x.weight(a) * y.weight(b);
        }
    }
    Dist::from_weights(w)
}
