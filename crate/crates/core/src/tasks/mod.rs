//! The two learning tasks: instance samplers, ground-truth labels, and the
//! flattened symbol geometry that adversaries perturb.

mod c1;
mod c2;

pub use c1::{label_c1, sample_c1, Fixture1, Instance1, Secret1, Task1, TaskParams1};
pub use c2::{label_c2, pack_sig, sample_c2, unpack_sig, Instance2, Secret2, Task2, TaskParams2};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coding::CodingError;
use crate::crypto::CryptoError;
use crate::field::{Fe, Field};
use crate::sampler::SamplerError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TaskError {
    #[error("inconsistent parameters: {0}")]
    Params(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("flattened instance has {got} symbols, layout needs {expected}")]
    Length { expected: usize, got: usize },
    #[error("symbol {value} at position {pos} is outside the field")]
    Symbol { pos: usize, value: u16 },
    #[error(transparent)]
    Coding(#[from] CodingError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
}

/// One named run of symbols inside a flattened instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

/// Segment manifest of a flattened instance, in instance field order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub segments: Vec<Segment>,
    pub len: usize,
}

impl Layout {
    fn new(parts: &[(&str, usize)]) -> Self {
        let mut segments = Vec::with_capacity(parts.len());
        let mut offset = 0;
        for &(name, len) in parts {
            segments.push(Segment { name: name.to_string(), offset, len });
            offset += len;
        }
        Self { segments, len: offset }
    }

    pub fn segment(&self, name: &str) -> Option<&Segment> {
        self.segments.iter().find(|s| s.name == name)
    }

    /// Segment containing flattened position `pos`.
    pub fn locate(&self, pos: usize) -> Option<&Segment> {
        self.segments.iter().find(|s| (s.offset..s.offset + s.len).contains(&pos))
    }

    fn split<'a>(&self, v: &'a [Fe]) -> Vec<&'a [Fe]> {
        self.segments.iter().map(|s| &v[s.offset..s.offset + s.len]).collect()
    }
}

/// What adversaries and the harness need from either task.
pub trait Task: Sync {
    type Instance: Clone + Send + Sync;

    fn field(&self) -> &Field;
    fn layout(&self) -> &Layout;
    /// Hamming budget over GF(2^ℓ) symbols, rounded down.
    fn budget(&self) -> usize;
    fn flatten(&self, x: &Self::Instance) -> Vec<Fe>;
    fn unflatten(&self, v: &[Fe]) -> Result<Self::Instance, TaskError>;
}

fn check_flat(field: &Field, layout: &Layout, v: &[Fe]) -> Result<(), TaskError> {
    if v.len() != layout.len {
        return Err(TaskError::Length { expected: layout.len, got: v.len() });
    }
    let order = field.order();
    if let Some((pos, s)) = v.iter().enumerate().find(|(_, s)| s.0 as usize >= order) {
        return Err(TaskError::Symbol { pos, value: s.0 });
    }
    Ok(())
}

/// Names accepted by [`Preset::get`].
pub const PRESETS: [&str; 4] = ["c1-tiny", "c1-small", "c2-small", "c2-medium"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "construction", rename_all = "lowercase")]
pub enum Preset {
    C1(TaskParams1),
    C2(TaskParams2),
}

impl Preset {
    pub fn get(name: &str) -> Result<Self, TaskError> {
        let p = match name {
            "c1-tiny" => Preset::C1(TaskParams1 {
                name: name.into(),
                lambda: 8,
                ell: 3,
                n: 7,
                k: 2,
                alpha: 32,
                beta: 64,
                r1: None,
                r2: None,
            }),
            "c1-small" => Preset::C1(TaskParams1 {
                name: name.into(),
                lambda: 16,
                ell: 4,
                n: 15,
                k: 4,
                alpha: 256,
                beta: 1024,
                r1: None,
                r2: None,
            }),
            "c2-small" => Preset::C2(TaskParams2 {
                name: name.into(),
                lambda: 16,
                ell: 4,
                n: 16,
                k: 3,
                alpha: 256,
                hash_bits: 11,
                r: None,
            }),
            "c2-medium" => Preset::C2(TaskParams2 {
                name: name.into(),
                lambda: 32,
                ell: 8,
                n: 32,
                k: 6,
                alpha: 256,
                hash_bits: 40,
                r: None,
            }),
            _ => return Err(TaskError::UnknownPreset(name.into())),
        };
        Ok(p)
    }
}

/// Largest b with (n − b)² ≥ k·n, i.e. ⌊(1 − √(k/n))·n⌋.
pub(crate) fn sqrt_budget(n: usize, k: usize) -> usize {
    let mut b = 0;
    while b < n && (n - b - 1) * (n - b - 1) >= k * n {
        b += 1;
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_budget_matches_float() {
        for n in 1..64 {
            for k in 1..=n {
                let f = ((1.0 - (k as f64 / n as f64).sqrt()) * n as f64 + 1e-9).floor() as usize;
                assert_eq!(sqrt_budget(n, k), f, "n={n} k={k}");
            }
        }
        assert_eq!(sqrt_budget(16, 3), 9);
        assert_eq!(sqrt_budget(32, 6), 18);
    }

    #[test]
    fn layout_offsets() {
        let l = Layout::new(&[("a", 3), ("b", 0), ("c", 5)]);
        assert_eq!(l.len, 8);
        assert_eq!(l.locate(2).unwrap().name, "a");
        assert_eq!(l.locate(3).unwrap().name, "c");
        assert!(l.locate(8).is_none());
        assert_eq!(l.segment("c").unwrap().offset, 3);
    }

    #[test]
    fn presets_build() {
        for name in PRESETS {
            match Preset::get(name).unwrap() {
                Preset::C1(p) => {
                    Task1::new(p).unwrap();
                }
                Preset::C2(p) => {
                    Task2::new(p).unwrap();
                }
            }
        }
        assert!(Preset::get("nope").is_err());
    }
}
