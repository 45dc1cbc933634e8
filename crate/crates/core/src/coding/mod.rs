//! Reed–Solomon codes: encoding, Berlekamp–Welch unique decoding,
//! Guruswami–Sudan list decoding, and the wrapper code `[v]` for bit strings.

mod gs;
mod poly;
mod wrap;

pub use wrap::WrapCode;

use std::cmp::Ordering;

use thiserror::Error;

use crate::field::{solve_dense, Fe, Field};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodingError {
    #[error("expected {expected} symbols, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no codeword within the decoding radius")]
    DecodeFailure,
    #[error("radius {radius} exceeds supported maximum {max}")]
    RadiusOutOfRange { radius: usize, max: usize },
    #[error("invalid code parameters: {0}")]
    InvalidParams(String),
}

/// Reed–Solomon code of length `n` and dimension `k` over GF(2^ℓ).
#[derive(Debug, Clone)]
pub struct RsCode {
    field: Field,
    n: usize,
    k: usize,
    points: Vec<Fe>,
}

/// Evaluation points 1, 2, …, 2^ℓ−1 in value order, followed by 0.
///
/// Zero comes last so that full-length codes (n = 2^ℓ) exist while shorter
/// codes use only nonzero points.
pub fn default_points(field: &Field, n: usize) -> Vec<Fe> {
    (1..field.order()).chain(std::iter::once(0)).take(n).map(|v| Fe(v as u16)).collect()
}

impl RsCode {
    pub fn new(field: &Field, n: usize, k: usize) -> Result<Self, CodingError> {
        if n > field.order() {
            return Err(CodingError::InvalidParams(format!(
                "n = {n} exceeds field order {}",
                field.order()
            )));
        }
        Self::with_points(field, k, default_points(field, n))
    }

    pub fn with_points(field: &Field, k: usize, points: Vec<Fe>) -> Result<Self, CodingError> {
        let n = points.len();
        if k == 0 || k > n {
            return Err(CodingError::InvalidParams(format!("need 1 ≤ k ≤ n, got k={k}, n={n}")));
        }
        let mut seen = vec![false; field.order()];
        for p in &points {
            if p.0 as usize >= field.order() || std::mem::replace(&mut seen[p.0 as usize], true) {
                return Err(CodingError::InvalidParams("evaluation points must be distinct field elements".into()));
            }
        }
        Ok(Self { field: field.clone(), n, k, points })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn distance(&self) -> usize {
        self.n - self.k + 1
    }

    pub fn unique_radius(&self) -> usize {
        (self.n - self.k) / 2
    }

    /// Largest radius accepted by [`list_decode`](Self::list_decode): n − ⌈√(kn)⌉.
    pub fn list_radius(&self) -> usize {
        self.n - ceil_sqrt(self.k * self.n)
    }

    pub fn points(&self) -> &[Fe] {
        &self.points
    }

    fn check_len(&self, got: usize, expected: usize) -> Result<(), CodingError> {
        if got != expected {
            return Err(CodingError::DimensionMismatch { expected, got });
        }
        Ok(())
    }

    /// Evaluate m₁ + m₂x + … + m_k x^{k−1} at every evaluation point.
    pub fn encode(&self, msg: &[Fe]) -> Result<Vec<Fe>, CodingError> {
        self.check_len(msg.len(), self.k)?;
        Ok(self.points.iter().map(|&x| poly::eval(&self.field, msg, x)).collect())
    }

    /// Berlekamp–Welch decoding up to ⌊(n−k)/2⌋ errors.
    pub fn unique_decode(&self, word: &[Fe]) -> Result<Vec<Fe>, CodingError> {
        self.check_len(word.len(), self.n)?;
        let f = &self.field;
        let e = self.unique_radius();
        let qlen = e + self.k;
        // unknowns: q_0..q_{e+k−1}, then e_0..e_{e−1} of the monic error locator
        let mut a = Vec::with_capacity(self.n);
        let mut b = Vec::with_capacity(self.n);
        for (&x, &y) in self.points.iter().zip(word) {
            let mut row = Vec::with_capacity(qlen + e);
            let mut xp = Fe::ONE;
            for _ in 0..qlen {
                row.push(xp);
                xp = f.mul(xp, x);
            }
            let mut xp = Fe::ONE;
            for _ in 0..e {
                row.push(f.mul(y, xp));
                xp = f.mul(xp, x);
            }
            a.push(row);
            b.push(f.mul(y, xp));
        }
        let sol = solve_dense(f, &a, &b).ok_or(CodingError::DecodeFailure)?;
        let q = &sol[..qlen];
        let mut locator = sol[qlen..].to_vec();
        locator.push(Fe::ONE);
        let (mut quot, rem) = poly::divrem(f, q, &locator);
        if rem.iter().any(|c| !c.is_zero()) || poly::degree(&quot).is_some_and(|d| d >= self.k) {
            return Err(CodingError::DecodeFailure);
        }
        quot.resize(self.k, Fe::ZERO);
        let cw = self.encode(&quot)?;
        if hamming(&cw, word) > e {
            return Err(CodingError::DecodeFailure);
        }
        Ok(quot)
    }

    /// Every message whose codeword lies within `radius` of `word`, sorted by
    /// packed value.
    pub fn list_decode(&self, word: &[Fe], radius: usize) -> Result<Vec<Vec<Fe>>, CodingError> {
        self.check_len(word.len(), self.n)?;
        let max = self.list_radius();
        if radius > max {
            return Err(CodingError::RadiusOutOfRange { radius, max });
        }
        let mut out = if self.k == 1 {
            self.field.elements().map(|c| vec![c]).collect()
        } else if radius <= self.unique_radius() {
            self.unique_decode(word).map(|m| vec![m]).unwrap_or_default()
        } else {
            gs::candidates(self, word, radius)
        };
        out.retain(|m| hamming(&self.encode(m).expect("k symbols"), word) <= radius);
        out.sort_by(|a, b| cmp_packed(a, b));
        out.dedup();
        Ok(out)
    }
}

/// Order messages by their packed integer value (symbol i is digit i).
pub fn cmp_packed(a: &[Fe], b: &[Fe]) -> Ordering {
    a.iter().rev().cmp(b.iter().rev())
}

pub fn hamming(a: &[Fe], b: &[Fe]) -> usize {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

pub(crate) fn ceil_sqrt(v: usize) -> usize {
    let mut r = (v as f64).sqrt() as usize;
    while r * r < v {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= v {
        r -= 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_sqrt_values() {
        for v in 0..2000usize {
            let r = ceil_sqrt(v);
            assert!(r * r >= v && (r == 0 || (r - 1) * (r - 1) < v), "{v}");
        }
    }

    #[test]
    fn encode_examples() {
        let f = Field::with_ell(3).unwrap();
        let code = RsCode::new(&f, 7, 2).unwrap();
        assert_eq!(code.encode(&[Fe(0), Fe(0)]).unwrap(), vec![Fe(0); 7]);
        assert_eq!(code.encode(&[Fe(5), Fe(0)]).unwrap(), vec![Fe(5); 7]);
        let x = Fe(0b010);
        let cw = code.encode(&[Fe::ONE, x]).unwrap();
        for (i, &p) in code.points().iter().enumerate() {
            assert_eq!(cw[i], Fe::ONE + f.mul(x, p));
        }
        assert!(code.encode(&[Fe(1)]).is_err());
    }

    #[test]
    fn full_length_uses_zero_last() {
        let f = Field::with_ell(4).unwrap();
        let code = RsCode::new(&f, 16, 3).unwrap();
        assert_eq!(code.points()[15], Fe::ZERO);
        assert_eq!(code.points()[0], Fe::ONE);
        assert!(RsCode::new(&f, 17, 3).is_err());
        assert!(RsCode::with_points(&f, 1, vec![Fe(1), Fe(1)]).is_err());
    }

    #[test]
    fn list_radius_values() {
        let f = Field::with_ell(4).unwrap();
        assert_eq!(RsCode::new(&f, 16, 3).unwrap().list_radius(), 9);
        let f8 = Field::with_ell(8).unwrap();
        assert_eq!(RsCode::new(&f8, 32, 6).unwrap().list_radius(), 18);
    }
}
