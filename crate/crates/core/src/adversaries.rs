//! Hamming-budgeted perturbation attacks on flattened instances.
//!
//! Every attack measures what it spent against the instance it was given and
//! panics if that exceeds its budget.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coding::hamming;
use crate::crypto::{ots_forge_from, Signature, SigningKey};
use crate::exec::Exec;
use crate::field::Fe;
use crate::learners::verifying_pairs;
use crate::tasks::{Instance1, Instance2, Task, Task1, Task2};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AttackError {
    #[error("unknown segment `{0}`")]
    UnknownSegment(String),
    #[error("attack budget {budget} exceeds the task budget {max}")]
    BudgetTooLarge { budget: usize, max: usize },
    #[error("forging needs n/2 = {need} ≤ budget {budget}")]
    ForgeBudget { need: usize, budget: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attacked<I> {
    pub x: I,
    /// Hamming distance from the input instance, in symbols.
    pub spent: usize,
    /// False when the attack gave up and returned the input unchanged.
    pub landed: bool,
}

/// Symbols changed between two instances of the same task.
pub fn spent<T: Task>(task: &T, x: &T::Instance, y: &T::Instance) -> usize {
    hamming(&task.flatten(x), &task.flatten(y))
}

fn finish<T: Task>(task: &T, x: &T::Instance, y: T::Instance, budget: usize, landed: bool) -> Attacked<T::Instance> {
    let d = spent(task, x, &y);
    assert!(d <= budget, "attack spent {d} symbols over budget {budget}");
    Attacked { x: y, spent: d, landed }
}

fn check_budget<T: Task>(task: &T, budget: usize) -> Result<(), AttackError> {
    if budget > task.budget() {
        return Err(AttackError::BudgetTooLarge { budget, max: task.budget() });
    }
    Ok(())
}

fn overwrite<T: Task, R: Rng + ?Sized>(task: &T, v: &mut [Fe], positions: impl Iterator<Item = usize>, rng: &mut R) {
    let f = task.field();
    for p in positions {
        v[p] = f.elem(rng.random());
    }
}

/// Uniform symbols at a uniformly random `budget`-subset of all positions.
pub fn attack_random<T: Task, R: Rng + ?Sized>(
    task: &T,
    x: &T::Instance,
    budget: usize,
    rng: &mut R,
) -> Result<Attacked<T::Instance>, AttackError> {
    check_budget(task, budget)?;
    let mut v = task.flatten(x);
    let pos = sample(rng, v.len(), budget.min(v.len()));
    overwrite(task, &mut v, pos.into_iter(), rng);
    let y = task.unflatten(&v).expect("same layout");
    Ok(finish(task, x, y, budget, true))
}

/// Like [`attack_random`] but confined to one named segment.
pub fn attack_segment_targeted<T: Task, R: Rng + ?Sized>(
    task: &T,
    x: &T::Instance,
    budget: usize,
    segment: &str,
    rng: &mut R,
) -> Result<Attacked<T::Instance>, AttackError> {
    check_budget(task, budget)?;
    let seg = task.layout().segment(segment).ok_or_else(|| AttackError::UnknownSegment(segment.into()))?.clone();
    let mut v = task.flatten(x);
    let pos = sample(rng, seg.len, budget.min(seg.len));
    overwrite(task, &mut v, pos.into_iter().map(|p| seg.offset + p), rng);
    let y = task.unflatten(&v).expect("same layout");
    Ok(finish(task, x, y, budget, true))
}

/// Randomize the cleartext m (k symbols) and put uniform noise on a random
/// ⌊(1 − 3R)n/2⌋-subset of the masked block. Wrappers are left alone.
pub fn attack_noise_plant<R: Rng + ?Sized>(task: &Task1, x: &Instance1, rng: &mut R) -> Attacked<Instance1> {
    let f = task.field();
    let mut y = x.clone();
    for s in y.m.iter_mut() {
        *s = f.elem(rng.random());
    }
    let n = y.masked.len();
    for p in sample(rng, n, task.noise_positions()) {
        y.masked[p] = f.elem(rng.random());
    }
    finish(task, x, y, task.budget(), true)
}

/// How the forger obtains a signature on the opposite bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForgeMode {
    /// Preimage search over `effort` hash inputs from a uniform start.
    Search { effort: u64 },
    /// Sign with the instance's secret key, standing in for an unbounded forger.
    Oracle,
}

/// Plant LEnc(1 − b, σ′) on a uniformly random n/2-subset of the signature
/// block.
///
/// b is the given label when the caller passes it (the adversary sees
/// h(x)); otherwise it is read from the list around the block. Returns the
/// input unchanged with `landed = false` when no forgery is found.
pub fn attack_forge<R: Rng + ?Sized>(
    task: &Task2,
    x: &Instance2,
    label: Option<bool>,
    mode: ForgeMode,
    sk: Option<&SigningKey>,
    exec: Exec,
    rng: &mut R,
) -> Result<Attacked<Instance2>, AttackError> {
    let n = x.sig_block.len();
    let half = n / 2;
    if half > task.budget() {
        return Err(AttackError::ForgeBudget { need: half, budget: task.budget() });
    }
    let fail = || Attacked { x: x.clone(), spent: 0, landed: false };
    let Ok(vk) = task.decode_vk(x) else { return Ok(fail()) };
    let b = match label {
        Some(b) => b,
        None => match verifying_pairs(task, x) {
            Some((_, pairs)) if !pairs.is_empty() => pairs[0].0,
            _ => return Ok(fail()),
        },
    };
    let sig = match (mode, sk) {
        (ForgeMode::Oracle, Some(sk)) => Signature(sk.x[!b as usize]),
        (ForgeMode::Oracle, None) => return Ok(fail()),
        (ForgeMode::Search { effort }, _) => match ots_forge_from(&vk, !b, effort, rng.random_range(0..vk.hash.domain()), exec) {
            Ok(sig) => sig,
            Err(_) => return Ok(fail()),
        },
    };
    let forged = task.sig_codeword(!b, sig);
    let mut y = x.clone();
    for p in sample(rng, n, half) {
        y.sig_block[p] = forged[p];
    }
    Ok(finish(task, x, y, task.budget(), true))
}
