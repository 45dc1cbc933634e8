//! Learners for both tasks and the classifiers their models describe.
//!
//! A [`Model`] is a kind tag plus a parameter string; its length is the
//! parameter count the separations are about. Classifiers are materialized
//! from models once and then evaluated on many instances.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coding::cmp_packed;
use crate::crypto::{ots_verify, Signature, ToyPrg, VerifyingKey, MAX_INVERT_BITS};
use crate::exec::Exec;
use crate::field::{BitVec, Fe, Gf2System};
use crate::tasks::{unpack_sig, Instance1, Instance2, Task, Task1, Task2, TaskError};

/// Dictionary learners search at most this many index bits.
pub const DICT_MAX_BITS: usize = 8;

const SKETCH_TAG: &str = "paramsep/learners/sketch";
const DICT_TAG: &str = "paramsep/learners/dictionary";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LearnError {
    #[error("samples admit no consistent model")]
    InconsistentSamples,
    #[error("no seed is consistent with the samples")]
    NoConsistentSeed,
    #[error("seed search stopped after {effort} candidates")]
    EffortExceeded { effort: u64 },
    #[error("budget of {budget} bits exceeds the full model size {full}")]
    BudgetTooLarge { budget: usize, full: usize },
    #[error("model kind {0} does not apply here")]
    WrongKind(ModelKind),
    #[error("model declares {declared} parameter bits but carries {actual}")]
    ParamBits { declared: usize, actual: usize },
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
    #[error(transparent)]
    Task(#[from] TaskError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// (P′, Q′), α + β bits.
    Pq,
    /// (s, s′), 2λ bits.
    Seed,
    /// Prefix of a (P′, Q′) model.
    Truncate,
    /// GF(2) linear sketch of a (P′, Q′) model.
    Sketch,
    /// Index into a fixed public dictionary of (P, Q) pairs.
    Dictionary,
    /// s′ for the second task, up to α bits.
    S,
    /// The parameter-free list-decoding classifier.
    ListDecode,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        write!(f, "{}", s.as_str().expect("string"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "ModelRecord", try_from = "ModelRecord")]
pub struct Model {
    pub kind: ModelKind,
    pub params: BitVec,
}

#[derive(Serialize, Deserialize)]
struct ModelRecord {
    kind: ModelKind,
    param_bits: usize,
    params: String,
}

impl From<Model> for ModelRecord {
    fn from(m: Model) -> Self {
        ModelRecord { kind: m.kind, param_bits: m.params.len(), params: m.params.to_hex() }
    }
}

impl TryFrom<ModelRecord> for Model {
    type Error = String;

    fn try_from(r: ModelRecord) -> Result<Self, String> {
        let params = BitVec::from_hex(&r.params, r.param_bits).ok_or("params do not match param_bits")?;
        Ok(Model { kind: r.kind, params })
    }
}

impl Model {
    pub fn new(kind: ModelKind, params: BitVec) -> Self {
        Self { kind, params }
    }

    pub fn param_bits(&self) -> usize {
        self.params.len()
    }

    pub fn list_decode() -> Self {
        Self::new(ModelKind::ListDecode, BitVec::zeros(0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Truncate,
    Sketch,
    Dictionary,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Truncate, Strategy::Sketch, Strategy::Dictionary];
}

impl FromStr for Strategy {
    type Err = LearnError;

    fn from_str(s: &str) -> Result<Self, LearnError> {
        match s {
            "truncate" => Ok(Strategy::Truncate),
            "sketch" => Ok(Strategy::Sketch),
            "dictionary" => Ok(Strategy::Dictionary),
            _ => Err(LearnError::UnknownStrategy(s.into())),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Truncate => "truncate",
            Strategy::Sketch => "sketch",
            Strategy::Dictionary => "dictionary",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Prediction {
    Label(bool),
    /// A wrapper failed to decode; scored as an error.
    Abstain,
}

impl Prediction {
    pub fn is_error(self, truth: bool) -> bool {
        self != Prediction::Label(truth)
    }
}

/// What one labeled sample reveals, with wrappers decoded.
struct View1 {
    idx1: Vec<u32>,
    m_bits: BitVec,
    label: bool,
    idx2: Vec<u32>,
    /// masked − Enc(m) as nℓ bits.
    diff: BitVec,
}

fn views_c1(task: &Task1, samples: &[(Instance1, bool)]) -> Result<Vec<View1>, LearnError> {
    let ell = task.field().ell();
    samples
        .iter()
        .map(|(x, label)| {
            let u1 = task.decode_u1(x)?;
            let u2 = task.decode_u2(x)?;
            let cw = task.enc().encode(&x.m).map_err(TaskError::from)?;
            let d: Vec<Fe> = x.masked.iter().zip(&cw).map(|(&a, &b)| a + b).collect();
            let diff = BitVec::from_symbols(&d, ell, d.len() * ell as usize).expect("full symbols");
            Ok(View1 {
                idx1: task.samp1().samp_u64(u1),
                m_bits: task.m_bits(&x.m),
                label: *label,
                idx2: task.samp2().samp_u64(u2),
                diff,
            })
        })
        .collect()
}

fn scatter(idx: &[u32], bits: &BitVec, len: usize) -> BitVec {
    let mut row = BitVec::zeros(len);
    for (j, &i) in idx.iter().enumerate() {
        if bits.get(j) {
            row.set(i as usize, true);
        }
    }
    row
}

/// Linear-algebra learner: Q′ read off coordinate by coordinate, P′ by
/// GF(2) elimination with free coordinates set to zero.
pub fn learn_efficient_c1(task: &Task1, samples: &[(Instance1, bool)]) -> Result<Model, LearnError> {
    let (alpha, beta) = (task.alpha(), task.beta());
    let mut q = BitVec::zeros(beta);
    let mut known = BitVec::zeros(beta);
    let mut sys = Gf2System::new(alpha);
    for v in views_c1(task, samples)? {
        for (j, &i) in v.idx2.iter().enumerate() {
            let (i, b) = (i as usize, v.diff.get(j));
            if known.get(i) && q.get(i) != b {
                return Err(LearnError::InconsistentSamples);
            }
            known.set(i, true);
            q.set(i, b);
        }
        sys.add_equation(scatter(&v.idx1, &v.m_bits, alpha), v.label)
            .map_err(|_| LearnError::InconsistentSamples)?;
    }
    Ok(Model::new(ModelKind::Pq, sys.solution().concat(&q)))
}

/// Exhaustive seed search, run separately for the f₁ and f₂ constraints.
///
/// Enumerates seeds 0, 1, … up to `effort_cap` for each side.
pub fn learn_it_c1(task: &Task1, samples: &[(Instance1, bool)], effort_cap: u64, exec: Exec) -> Result<Model, LearnError> {
    let lam = task.params().lambda;
    if lam > MAX_INVERT_BITS {
        return Err(TaskError::Params(format!("seed search needs λ ≤ {MAX_INVERT_BITS}")).into());
    }
    let views = views_c1(task, samples)?;
    let space = 1u64 << lam;
    let end = effort_cap.min(space);
    let search = |pred: &(dyn Fn(u64) -> bool + Sync)| {
        exec.find_first(0..end, pred).ok_or(if end < space {
            LearnError::EffortExceeded { effort: end }
        } else {
            LearnError::NoConsistentSeed
        })
    };
    let s = search(&|s| {
        let p = task.f1().expand_u64(s);
        views.iter().all(|v| v.m_bits.inner(&p.restrict(&v.idx1)).expect("kℓ bits") == v.label)
    })?;
    let s2 = search(&|s| {
        let q = task.f2().expand_u64(s);
        views.iter().all(|v| q.restrict(&v.idx2) == v.diff)
    })?;
    let l = lam as usize;
    Ok(Model::new(ModelKind::Seed, BitVec::from_u64(s, l).concat(&BitVec::from_u64(s2, l))))
}

fn sketch_prg(task: &Task1) -> ToyPrg {
    ToyPrg::new(32, task.alpha() + task.beta(), SKETCH_TAG).expect("α + β > 32")
}

fn dictionary_prg(task: &Task1) -> ToyPrg {
    ToyPrg::new(32, task.alpha() + task.beta(), DICT_TAG).expect("α + β > 32")
}

fn low_index(params: &BitVec) -> u64 {
    let j = params.len().min(DICT_MAX_BITS);
    (0..j).filter(|&i| params.get(i)).map(|i| 1u64 << i).sum()
}

/// Learners restricted to `budget_bits` of parameters.
///
/// Truncate keeps a prefix of the (P′, Q′) model; Sketch keeps `budget_bits`
/// GF(2) inner products of it with fixed pseudorandom rows; Dictionary keeps
/// the index of the public dictionary entry with fewest training errors,
/// searching the first 2^min(budget, 8) entries.
pub fn learn_compressed(
    task: &Task1,
    samples: &[(Instance1, bool)],
    budget_bits: usize,
    strategy: Strategy,
) -> Result<Model, LearnError> {
    let full = task.alpha() + task.beta();
    if budget_bits > full {
        return Err(LearnError::BudgetTooLarge { budget: budget_bits, full });
    }
    match strategy {
        Strategy::Truncate => {
            let m = learn_efficient_c1(task, samples)?;
            Ok(Model::new(ModelKind::Truncate, m.params.slice(0, budget_bits)))
        }
        Strategy::Sketch => {
            let x = learn_efficient_c1(task, samples)?.params;
            let rows = sketch_prg(task);
            let mut y = BitVec::zeros(budget_bits);
            for i in 0..budget_bits {
                y.set(i, rows.expand_u64(i as u64).inner(&x).expect("same length"));
            }
            Ok(Model::new(ModelKind::Sketch, y))
        }
        Strategy::Dictionary => {
            let j = budget_bits.min(DICT_MAX_BITS);
            let dict = dictionary_prg(task);
            let mut best = (usize::MAX, 0u64);
            for idx in 0..1u64 << j {
                let c = Classifier1::from_pq(task, &dict.expand_u64(idx));
                let errs = samples.iter().filter(|(x, y)| c.predict(task, x).is_error(*y)).count();
                if errs < best.0 {
                    best = (errs, idx);
                }
            }
            let mut params = BitVec::zeros(budget_bits);
            for i in 0..j {
                params.set(i, (best.1 >> i) & 1 == 1);
            }
            Ok(Model::new(ModelKind::Dictionary, params))
        }
    }
}

/// The classifier f_{P′,Q′}: decode u₁, u₂, unmask with Q′, unique-decode m,
/// output ⟨m, P′|_{samp₁(u₁)}⟩.
///
/// When the unmasked word does not decode, the cleartext m is used instead.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classifier1 {
    pub p: BitVec,
    pub q: BitVec,
}

impl Classifier1 {
    fn from_pq(task: &Task1, pq: &BitVec) -> Self {
        Self { p: pq.slice(0, task.alpha()), q: pq.slice(task.alpha(), task.beta()) }
    }

    pub fn from_model(task: &Task1, model: &Model) -> Result<Self, LearnError> {
        let (alpha, beta) = (task.alpha(), task.beta());
        let full = alpha + beta;
        let bits = model.param_bits();
        let expect = |n: usize| {
            if bits == n {
                Ok(())
            } else {
                Err(LearnError::ParamBits { declared: n, actual: bits })
            }
        };
        match model.kind {
            ModelKind::Pq => {
                expect(full)?;
                Ok(Self::from_pq(task, &model.params))
            }
            ModelKind::Seed => {
                let l = task.params().lambda as usize;
                expect(2 * l)?;
                Ok(Self {
                    p: task.f1().expand_u64(model.params.slice(0, l).to_u64()),
                    q: task.f2().expand_u64(model.params.slice(l, l).to_u64()),
                })
            }
            ModelKind::Truncate => {
                if bits > full {
                    return Err(LearnError::BudgetTooLarge { budget: bits, full });
                }
                Ok(Self::from_pq(task, &model.params.concat(&BitVec::zeros(full - bits))))
            }
            ModelKind::Sketch => {
                let rows = sketch_prg(task);
                let mut sys = Gf2System::new(full);
                for i in 0..bits {
                    // an inconsistent row can only come from a hand-made string; skip it
                    let _ = sys.add_equation(rows.expand_u64(i as u64), model.params.get(i));
                }
                Ok(Self::from_pq(task, &sys.solution()))
            }
            ModelKind::Dictionary => Ok(Self::from_pq(task, &dictionary_prg(task).expand_u64(low_index(&model.params)))),
            other => Err(LearnError::WrongKind(other)),
        }
    }

    pub fn predict(&self, task: &Task1, x: &Instance1) -> Prediction {
        let (Ok(u1), Ok(u2)) = (task.decode_u1(x), task.decode_u2(x)) else {
            return Prediction::Abstain;
        };
        let word: Vec<Fe> = x.masked.iter().zip(task.mask(&self.q, u2)).map(|(&a, b)| a + b).collect();
        let m = task.enc().unique_decode(&word).unwrap_or_else(|_| x.m.clone());
        Prediction::Label(task.hypothesis(&self.p, u1, &m))
    }
}

pub fn eval_model_c1(task: &Task1, model: &Model, x: &Instance1) -> Result<Prediction, LearnError> {
    Ok(Classifier1::from_model(task, model)?.predict(task, x))
}

/// Verifying (b, σ) pairs in the list around the signature block, ordered
/// by packed value. `None` when the key wrapper does not decode.
pub fn verifying_pairs(task: &Task2, x: &Instance2) -> Option<(VerifyingKey, Vec<(bool, Signature)>)> {
    let vk = task.decode_vk(x).ok()?;
    let mut list = task.lenc().list_decode(&x.sig_block, task.budget()).ok()?;
    list.sort_by(|a, b| cmp_packed(a, b));
    let pairs = list
        .iter()
        .filter_map(|m| unpack_sig(task, m))
        .filter(|&(b, sig)| ots_verify(&vk, b, sig))
        .collect();
    Some((vk, pairs))
}

/// The zero-parameter classifier: first verifying pair in the list, or a
/// random bit when none verifies.
pub fn classify_listdecode_c2<R: Rng + ?Sized>(task: &Task2, x: &Instance2, rng: &mut R) -> bool {
    match verifying_pairs(task, x) {
        Some((_, pairs)) if !pairs.is_empty() => pairs[0].0,
        _ => rng.random(),
    }
}

/// Solve ⟨v, s|_{samp(u)}⟩ = payload ⊕ b for s′ over all samples.
pub fn learn_it_c2(task: &Task2, samples: &[(Instance2, bool)]) -> Result<Model, LearnError> {
    let alpha = task.alpha();
    let mut sys = Gf2System::new(alpha);
    for (x, label) in samples {
        let (u, v, payload) = decode_s_channel(task, x)?;
        let row = scatter(&task.samp().samp_u64(u), &v, alpha);
        sys.add_equation(row, payload ^ label).map_err(|_| LearnError::InconsistentSamples)?;
    }
    Ok(Model::new(ModelKind::S, sys.solution()))
}

/// First `bits` parameters of an S model.
pub fn truncate_s(model: &Model, bits: usize) -> Result<Model, LearnError> {
    if model.kind != ModelKind::S {
        return Err(LearnError::WrongKind(model.kind));
    }
    if bits > model.param_bits() {
        return Err(LearnError::BudgetTooLarge { budget: bits, full: model.param_bits() });
    }
    Ok(Model::new(ModelKind::S, model.params.slice(0, bits)))
}

fn decode_s_channel(task: &Task2, x: &Instance2) -> Result<(u64, BitVec, bool), TaskError> {
    let u = task.wrap_u().decode(&x.u_enc)?.to_u64();
    let v = task.wrap_v().decode(&x.v_enc)?;
    let payload = task.wrap_bit().decode(&x.bit_enc)?.get(0);
    Ok((u, v, payload))
}

/// payload ⊕ ⟨v, s′|_{samp(u)}⟩, ignoring the signature block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifierS {
    pub s: BitVec,
}

impl ClassifierS {
    /// Models shorter than α are zero-extended.
    pub fn from_model(task: &Task2, model: &Model) -> Result<Self, LearnError> {
        if model.kind != ModelKind::S {
            return Err(LearnError::WrongKind(model.kind));
        }
        let alpha = task.alpha();
        if model.param_bits() > alpha {
            return Err(LearnError::BudgetTooLarge { budget: model.param_bits(), full: alpha });
        }
        Ok(Self { s: model.params.concat(&BitVec::zeros(alpha - model.param_bits())) })
    }

    pub fn predict(&self, task: &Task2, x: &Instance2) -> Prediction {
        match decode_s_channel(task, x) {
            Ok((u, v, payload)) => Prediction::Label(payload ^ task.mask_bit(&self.s, u, &v)),
            Err(_) => Prediction::Abstain,
        }
    }
}
