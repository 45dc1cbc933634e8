//! Paired trial loops: every classifier is scored against every attack on
//! the same fresh draws.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{stream_rng, HarnessError, LearnerKind};
use crate::adversaries::{
    attack_forge, attack_noise_plant, attack_random, attack_segment_targeted, spent, Attacked, ForgeMode,
};
use crate::exec::Exec;
use crate::field::BitVec;
use crate::learners::{
    classify_listdecode_c2, learn_compressed, learn_efficient_c1, learn_it_c1, learn_it_c2, truncate_s,
    Classifier1, ClassifierS, Model, ModelKind, Prediction,
};
use crate::tasks::{sample_c1, sample_c2, Instance1, Instance2, Secret1, Secret2, Task, Task1, Task2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackKind {
    #[default]
    None,
    Random,
    Segment,
    NoisePlant,
    Forge,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AttackSpec {
    pub kind: AttackKind,
    /// Symbols; defaults to the task budget.
    pub budget: Option<usize>,
    pub segment: Option<String>,
    pub effort: u64,
    /// Forge with the signing key instead of searching.
    pub oracle: bool,
}

impl AttackSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn random(budget: Option<usize>) -> Self {
        Self { kind: AttackKind::Random, budget, ..Self::default() }
    }

    pub fn segment(segment: &str, budget: Option<usize>) -> Self {
        Self { kind: AttackKind::Segment, budget, segment: Some(segment.into()), ..Self::default() }
    }

    pub fn noise_plant() -> Self {
        Self { kind: AttackKind::NoisePlant, ..Self::default() }
    }

    pub fn forge(effort: u64) -> Self {
        Self { kind: AttackKind::Forge, effort, ..Self::default() }
    }

    pub fn forge_oracle() -> Self {
        Self { kind: AttackKind::Forge, oracle: true, ..Self::default() }
    }

    /// Stable name, also used to key the attack's RNG stream.
    pub fn label(&self) -> String {
        let b = |d: &str| self.budget.map_or(d.to_string(), |b| b.to_string());
        match self.kind {
            AttackKind::None => "none".into(),
            AttackKind::Random => format!("random(b={})", b("max")),
            AttackKind::Segment => format!("segment({},b={})", self.segment.as_deref().unwrap_or("?"), b("max")),
            AttackKind::NoisePlant => "noise-plant".into(),
            AttackKind::Forge if self.oracle => "forge(oracle)".into(),
            AttackKind::Forge => format!("forge(effort={})", self.effort),
        }
    }

    pub fn effort_field(&self) -> Option<u64> {
        (self.kind == AttackKind::Forge && !self.oracle).then_some(self.effort)
    }

    /// Budget the attack is allowed to spend on `task`.
    pub fn resolved_budget<T: Task>(&self, task: &T) -> Result<usize, HarnessError> {
        match self.kind {
            AttackKind::None => Ok(0),
            AttackKind::Random | AttackKind::Segment => {
                let b = self.budget.unwrap_or(task.budget());
                if b > task.budget() {
                    return Err(HarnessError::Config(format!("attack budget {b} exceeds task budget {}", task.budget())));
                }
                if self.kind == AttackKind::Segment {
                    let name = self.segment.as_deref().unwrap_or("");
                    if task.layout().segment(name).is_none() {
                        return Err(HarnessError::Config(format!("unknown segment `{name}`")));
                    }
                }
                Ok(b)
            }
            AttackKind::NoisePlant | AttackKind::Forge => Ok(task.budget()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub trials: u64,
    /// Wrong labels plus abstentions.
    pub errors: u64,
    pub abstains: u64,
    pub landed: u64,
    /// Trials whose perturbation, recomputed here, exceeds the budget.
    pub violations: u64,
    pub spent_hist: BTreeMap<usize, u64>,
}

impl Tally {
    fn record(&mut self, pred: Prediction, truth: bool, spent: usize, budget: usize, landed: bool) {
        self.trials += 1;
        self.errors += pred.is_error(truth) as u64;
        self.abstains += (pred == Prediction::Abstain) as u64;
        self.landed += landed as u64;
        self.violations += (spent > budget) as u64;
        *self.spent_hist.entry(spent).or_default() += 1;
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        self.trials += other.trials;
        self.errors += other.errors;
        self.abstains += other.abstains;
        self.landed += other.landed;
        self.violations += other.violations;
        for (k, v) in other.spent_hist {
            *self.spent_hist.entry(k).or_default() += v;
        }
        self
    }
}

fn merge_grid(a: Vec<Vec<Tally>>, b: Vec<Vec<Tally>>) -> Vec<Vec<Tally>> {
    a.into_iter().zip(b).map(|(ra, rb)| ra.into_iter().zip(rb).map(|(x, y)| x.merge(y)).collect()).collect()
}

/// ⌈(α/(kℓ/2))·ln(α/δ)⌉ ∨ ⌈(β/nℓ)·ln(β/δ)⌉ at δ = 10⁻³: enough draws for
/// the sampled subsets to cover P and Q.
pub fn default_train_samples_c1(task: &Task1) -> usize {
    let p = task.params();
    let ln_inv_delta = 1000f64.ln();
    let kl = (p.k * p.ell as usize) as f64;
    let nl = (p.n * p.ell as usize) as f64;
    let a = p.alpha as f64;
    let b = p.beta as f64;
    let na = (a / (kl / 2.0)) * (a.ln() + ln_inv_delta);
    let nb = (b / nl) * (b.ln() + ln_inv_delta);
    na.max(nb).ceil() as usize
}

pub fn default_train_samples_c2(task: &Task2) -> usize {
    4 * task.alpha()
}

pub fn train_c1(task: &Task1, secret: &Secret1, n: usize, seed: u64) -> Vec<(Instance1, bool)> {
    (0..n as u64).map(|i| sample_c1(task, secret, &mut stream_rng(seed, "train", i))).collect()
}

pub fn train_c2(task: &Task2, secret: &Secret2, n: usize, seed: u64) -> Vec<(Instance2, bool)> {
    (0..n as u64)
        .map(|i| {
            let (x, y, _) = sample_c2(task, secret, &mut stream_rng(seed, "train", i));
            (x, y)
        })
        .collect()
}

fn need_budget(kind: LearnerKind, budget_bits: Option<usize>) -> Result<usize, HarnessError> {
    budget_bits.ok_or_else(|| HarnessError::Config(format!("learner {} needs budget-bits", kind.name())))
}

pub fn build_c1_classifier(
    task: &Task1,
    secret: &Secret1,
    samples: &[(Instance1, bool)],
    kind: LearnerKind,
    budget_bits: Option<usize>,
    effort_cap: Option<u64>,
    exec: Exec,
) -> Result<(Model, Classifier1), HarnessError> {
    let model = match kind {
        LearnerKind::Efficient => learn_efficient_c1(task, samples)?,
        LearnerKind::It => learn_it_c1(task, samples, effort_cap.unwrap_or(u64::MAX), exec)?,
        LearnerKind::Truncate | LearnerKind::Sketch | LearnerKind::Dictionary => {
            let strategy = kind.strategy().expect("compressed kind");
            learn_compressed(task, samples, need_budget(kind, budget_bits)?, strategy)?
        }
        LearnerKind::TrueParams => Model::new(ModelKind::Pq, secret.p.concat(&secret.q)),
        LearnerKind::Zero => Model::new(ModelKind::Truncate, BitVec::zeros(0)),
        LearnerKind::ListDecode | LearnerKind::ItC2 => {
            return Err(HarnessError::Config(format!("learner {} belongs to the second task", kind.name())))
        }
    };
    let clf = Classifier1::from_model(task, &model)?;
    Ok((model, clf))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum C2Classifier {
    ListDecode,
    S(ClassifierS),
}

impl C2Classifier {
    pub fn predict<R: Rng + ?Sized>(&self, task: &Task2, x: &Instance2, rng: &mut R) -> Prediction {
        match self {
            C2Classifier::ListDecode => Prediction::Label(classify_listdecode_c2(task, x, rng)),
            C2Classifier::S(c) => c.predict(task, x),
        }
    }
}

/// `budget_bits` truncates an S model to its first bits.
pub fn build_c2_classifier(
    task: &Task2,
    secret: &Secret2,
    samples: &[(Instance2, bool)],
    kind: LearnerKind,
    budget_bits: Option<usize>,
) -> Result<(Model, C2Classifier), HarnessError> {
    let full = match kind {
        LearnerKind::ListDecode => return Ok((Model::list_decode(), C2Classifier::ListDecode)),
        LearnerKind::ItC2 | LearnerKind::Truncate => learn_it_c2(task, samples)?,
        LearnerKind::TrueParams => Model::new(ModelKind::S, secret.s.clone()),
        LearnerKind::Zero => Model::new(ModelKind::S, BitVec::zeros(0)),
        _ => return Err(HarnessError::Config(format!("learner {} belongs to the first task", kind.name()))),
    };
    let model = match budget_bits {
        Some(b) if b < full.param_bits() => truncate_s(&full, b)?,
        _ => full,
    };
    let clf = C2Classifier::S(ClassifierS::from_model(task, &model)?);
    Ok((model, clf))
}

fn apply_c1<R: Rng + ?Sized>(
    task: &Task1,
    x: &Instance1,
    spec: &AttackSpec,
    budget: usize,
    rng: &mut R,
) -> Attacked<Instance1> {
    match spec.kind {
        AttackKind::None => Attacked { x: x.clone(), spent: 0, landed: false },
        AttackKind::Random => attack_random(task, x, budget, rng).expect("validated"),
        AttackKind::Segment => {
            attack_segment_targeted(task, x, budget, spec.segment.as_deref().expect("validated"), rng).expect("validated")
        }
        AttackKind::NoisePlant => attack_noise_plant(task, x, rng),
        AttackKind::Forge => unreachable!("validated"),
    }
}

/// Tallies indexed `[attack][classifier]`.
pub fn run_c1(
    task: &Task1,
    secret: &Secret1,
    classifiers: &[Classifier1],
    attacks: &[AttackSpec],
    trials: u64,
    seed: u64,
    exec: Exec,
) -> Result<Vec<Vec<Tally>>, HarnessError> {
    let mut budgets = Vec::with_capacity(attacks.len());
    for a in attacks {
        if a.kind == AttackKind::Forge {
            return Err(HarnessError::Config("forge attacks apply to the second task".into()));
        }
        budgets.push(a.resolved_budget(task)?);
    }
    let roles: Vec<String> = attacks.iter().map(|a| format!("attack/{}", a.label())).collect();
    let empty = || vec![vec![Tally::default(); classifiers.len()]; attacks.len()];
    Ok(exec.map_reduce(
        0..trials,
        empty,
        |i| {
            let mut out = empty();
            let (x, truth) = sample_c1(task, secret, &mut stream_rng(seed, "test", i));
            for (ai, spec) in attacks.iter().enumerate() {
                let att = apply_c1(task, &x, spec, budgets[ai], &mut stream_rng(seed, &roles[ai], i));
                let d = spent(task, &x, &att.x);
                for (ci, c) in classifiers.iter().enumerate() {
                    out[ai][ci].record(c.predict(task, &att.x), truth, d, task.budget(), att.landed);
                }
            }
            out
        },
        merge_grid,
    ))
}

/// Tallies indexed `[attack][classifier]`. Forgers are handed the true label.
pub fn run_c2(
    task: &Task2,
    secret: &Secret2,
    classifiers: &[C2Classifier],
    attacks: &[AttackSpec],
    trials: u64,
    seed: u64,
    exec: Exec,
) -> Result<Vec<Vec<Tally>>, HarnessError> {
    let mut budgets = Vec::with_capacity(attacks.len());
    for a in attacks {
        if a.kind == AttackKind::NoisePlant {
            return Err(HarnessError::Config("noise planting applies to the first task".into()));
        }
        budgets.push(a.resolved_budget(task)?);
    }
    let roles: Vec<String> = attacks.iter().map(|a| format!("attack/{}", a.label())).collect();
    let empty = || vec![vec![Tally::default(); classifiers.len()]; attacks.len()];
    Ok(exec.map_reduce(
        0..trials,
        empty,
        |i| {
            let mut out = empty();
            let (x, truth, sk) = sample_c2(task, secret, &mut stream_rng(seed, "test", i));
            for (ai, spec) in attacks.iter().enumerate() {
                let rng = &mut stream_rng(seed, &roles[ai], i);
                let att = match spec.kind {
                    AttackKind::None => Attacked { x: x.clone(), spent: 0, landed: false },
                    AttackKind::Random => attack_random(task, &x, budgets[ai], rng).expect("validated"),
                    AttackKind::Segment => attack_segment_targeted(
                        task,
                        &x,
                        budgets[ai],
                        spec.segment.as_deref().expect("validated"),
                        rng,
                    )
                    .expect("validated"),
                    AttackKind::Forge => {
                        let mode = if spec.oracle { ForgeMode::Oracle } else { ForgeMode::Search { effort: spec.effort } };
                        attack_forge(task, &x, Some(truth), mode, Some(&sk), Exec::Sequential, rng).expect("n/2 ≤ budget")
                    }
                    AttackKind::NoisePlant => unreachable!("validated"),
                };
                let d = spent(task, &x, &att.x);
                let crng = &mut stream_rng(seed, &format!("classify/{}", roles[ai]), i);
                for (ci, c) in classifiers.iter().enumerate() {
                    out[ai][ci].record(c.predict(task, &att.x, crng), truth, d, task.budget(), att.landed);
                }
            }
            out
        },
        merge_grid,
    ))
}
