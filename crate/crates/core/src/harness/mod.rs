//! Experiment orchestration: counter-based RNG streams, Monte Carlo risk
//! estimates with Hoeffding radii, the three separation suites, and the
//! exhaustive validators.

mod engine;
mod suites;
mod validators;

pub use engine::{
    build_c1_classifier, build_c2_classifier, default_train_samples_c1, default_train_samples_c2, run_c1, run_c2,
    train_c1, train_c2, AttackKind, AttackSpec, C2Classifier, Tally,
};
pub use suites::{run_suite, Suite, SuiteConfig, SuiteReport, Verdict};
pub use validators::{run_validators, ValidatorEntry, ValidatorGrid, ValidatorReport};

use std::collections::BTreeMap;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::adversaries::AttackError;
use crate::exec::Exec;
use crate::learners::{LearnError, Strategy};
use crate::tasks::{Fixture1, Preset, Secret1, Secret2, Task, Task1, Task2, TaskError};

pub const SCHEMA_VERSION: u32 = 1;

/// Printed in every report: robust risk is measured against the configured
/// attack, not the supremum over all in-budget perturbations.
pub const ROBUST_RISK_NOTE: &str =
    "robust risk is attack-relative: it is measured against the configured attack, not the maximum over all in-budget perturbations";

/// Generator recorded in reports for cross-implementation reproduction.
pub const RNG_NAME: &str = "ChaCha20; key = SHA-256(\"paramsep/rng/v1\" || seed_le || role), stream = index";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Attack(#[from] AttackError),
}

/// Independent ChaCha20 stream for `(seed, role, index)`.
pub fn stream_rng(seed: u64, role: &str, index: u64) -> ChaCha20Rng {
    let mut h = Sha256::new();
    h.update(b"paramsep/rng/v1");
    h.update(seed.to_le_bytes());
    h.update(role.as_bytes());
    let mut rng = ChaCha20Rng::from_seed(h.finalize().into());
    rng.set_stream(index);
    rng
}

/// √(ln(2/δ) / 2N).
pub fn hoeffding_half_width(trials: u64, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * trials as f64)).sqrt()
}

/// ⌈ln(2/δ) / (2w²)⌉.
pub fn min_trials(half_width: f64, delta: f64) -> u64 {
    ((2.0 / delta).ln() / (2.0 * half_width * half_width)).ceil() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Threshold {
    AtMost(f64),
    AtLeast(f64),
    Within { center: f64, radius: f64 },
}

impl Threshold {
    pub fn holds(self, risk: f64) -> bool {
        match self {
            Threshold::AtMost(t) => risk <= t,
            Threshold::AtLeast(t) => risk >= t,
            Threshold::Within { center, radius } => (risk - center).abs() <= radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSummary {
    pub kind: String,
    pub param_bits: usize,
    pub train_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSummary {
    pub name: String,
    pub budget: usize,
    pub effort: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub note: String,
    pub rng: String,
    pub name: String,
    pub preset: String,
    pub fixture: Option<Fixture1>,
    pub hash_bits: Option<u32>,
    pub task_budget: usize,
    pub learner: LearnerSummary,
    pub attack: AttackSummary,
    pub seed: u64,
    pub trials: u64,
    pub errors: u64,
    pub abstains: u64,
    pub risk: f64,
    pub delta: f64,
    pub half_width: f64,
    pub attacks_landed: u64,
    pub budget_violations: u64,
    /// Symbols spent per trial → trial count.
    pub spent_hist: BTreeMap<usize, u64>,
    pub threshold: Option<Threshold>,
    pub pass: Option<bool>,
    pub wall_ms: u64,
}

impl ExperimentReport {
    /// Everything except wall-clock time.
    pub fn counts(&self) -> (u64, u64, u64, u64, u64, &BTreeMap<usize, u64>) {
        (self.trials, self.errors, self.abstains, self.attacks_landed, self.budget_violations, &self.spent_hist)
    }

    pub fn accuracy(&self) -> f64 {
        1.0 - self.risk
    }

    fn judge(mut self, threshold: Option<Threshold>) -> Self {
        self.threshold = threshold;
        self.pass = threshold.map(|t| t.holds(self.risk));
        self
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn make_report(
    name: &str,
    preset: &str,
    fixture: Option<Fixture1>,
    hash_bits: Option<u32>,
    task_budget: usize,
    learner: LearnerSummary,
    attack: AttackSummary,
    seed: u64,
    delta: f64,
    tally: &Tally,
    started: Instant,
) -> ExperimentReport {
    ExperimentReport {
        schema_version: SCHEMA_VERSION,
        note: ROBUST_RISK_NOTE.into(),
        rng: RNG_NAME.into(),
        name: name.into(),
        preset: preset.into(),
        fixture,
        hash_bits,
        task_budget,
        learner,
        attack,
        seed,
        trials: tally.trials,
        errors: tally.errors,
        abstains: tally.abstains,
        risk: tally.errors as f64 / tally.trials.max(1) as f64,
        delta,
        half_width: hoeffding_half_width(tally.trials.max(1), delta),
        attacks_landed: tally.landed,
        budget_violations: tally.violations,
        spent_hist: tally.spent_hist.clone(),
        threshold: None,
        pass: None,
        wall_ms: started.elapsed().as_millis() as u64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerKind {
    /// Linear learner, full α + β bits (first task).
    Efficient,
    /// Seed search, 2λ bits (first task).
    It,
    Truncate,
    Sketch,
    Dictionary,
    /// The ground-truth strings as a model.
    TrueParams,
    /// Zero-bit model (constant classifier on the first task).
    Zero,
    /// Parameter-free list-decoding classifier (second task).
    #[serde(alias = "listdecode")]
    ListDecode,
    /// Linear learner for s, α bits, optionally truncated (second task).
    ItC2,
}

impl FromStr for LearnerKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        serde_json::from_value(serde_json::Value::String(s.into()))
            .map_err(|_| HarnessError::Config(format!("unknown learner `{s}`")))
    }
}

impl LearnerKind {
    pub fn strategy(self) -> Option<Strategy> {
        match self {
            LearnerKind::Truncate => Some(Strategy::Truncate),
            LearnerKind::Sketch => Some(Strategy::Sketch),
            LearnerKind::Dictionary => Some(Strategy::Dictionary),
            _ => None,
        }
    }

    pub fn name(self) -> String {
        serde_json::to_value(self).expect("unit").as_str().expect("string").to_string()
    }
}

fn default_delta() -> f64 {
    0.05
}

fn default_trials() -> u64 {
    10_000
}

/// Flat key-value experiment description, as read from TOML or JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: String,
    /// Explicit parameters; overrides `preset` when present.
    #[serde(default)]
    pub params: Option<Preset>,
    #[serde(default)]
    pub fixture: Fixture1,
    #[serde(default)]
    pub hash_bits: Option<u32>,
    pub learner: LearnerKind,
    #[serde(default)]
    pub budget_bits: Option<usize>,
    #[serde(default)]
    pub train_samples: Option<usize>,
    #[serde(default)]
    pub effort_cap: Option<u64>,
    #[serde(default)]
    pub attack: AttackKind,
    #[serde(default)]
    pub attack_budget: Option<usize>,
    #[serde(default)]
    pub segment: Option<String>,
    #[serde(default)]
    pub effort: Option<u64>,
    #[serde(default)]
    pub oracle: bool,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub half_width: Option<f64>,
}

impl ExperimentConfig {
    pub fn new(preset: &str, learner: LearnerKind) -> Self {
        Self {
            preset: preset.into(),
            params: None,
            fixture: Fixture1::Prg,
            hash_bits: None,
            learner,
            budget_bits: None,
            train_samples: None,
            effort_cap: None,
            attack: AttackKind::None,
            attack_budget: None,
            segment: None,
            effort: None,
            oracle: false,
            trials: default_trials(),
            seed: 0,
            delta: default_delta(),
            half_width: None,
        }
    }

    pub fn preset(&self) -> Result<Preset, HarnessError> {
        match &self.params {
            Some(p) => Ok(p.clone()),
            None => Ok(Preset::get(&self.preset)?),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(HarnessError::Config(format!("δ = {} is not in (0, 1)", self.delta)));
        }
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be positive".into()));
        }
        if let Some(w) = self.half_width {
            let need = min_trials(w, self.delta);
            if self.trials < need {
                return Err(HarnessError::Config(format!(
                    "{} trials give half-width {:.4} > {w}; need ≥ {need}",
                    self.trials,
                    hoeffding_half_width(self.trials, self.delta)
                )));
            }
        }
        Ok(())
    }

    pub fn attack_spec(&self) -> AttackSpec {
        AttackSpec {
            kind: self.attack,
            budget: self.attack_budget,
            segment: self.segment.clone(),
            effort: self.effort.unwrap_or(0),
            oracle: self.oracle,
        }
    }
}

/// Fresh-draw Monte Carlo risk; any configured attack is ignored.
pub fn estimate_risk(cfg: &ExperimentConfig, exec: Exec) -> Result<ExperimentReport, HarnessError> {
    let mut plain = cfg.clone();
    plain.attack = AttackKind::None;
    estimate(&plain, exec)
}

/// Risk against the configured attack, judged on the unperturbed label.
pub fn estimate_robust_risk(cfg: &ExperimentConfig, exec: Exec) -> Result<ExperimentReport, HarnessError> {
    estimate(cfg, exec)
}

fn estimate(cfg: &ExperimentConfig, exec: Exec) -> Result<ExperimentReport, HarnessError> {
    cfg.validate()?;
    let started = Instant::now();
    let attack = cfg.attack_spec();
    let name = format!("{}/{}", cfg.learner.name(), attack.label());
    match cfg.preset()? {
        Preset::C1(p) => {
            let preset = p.name.clone();
            let task = Task1::new(p)?;
            let secret = Secret1::draw(&task, cfg.fixture, &mut stream_rng(cfg.seed, "secret", 0));
            let n = cfg.train_samples.unwrap_or_else(|| default_train_samples_c1(&task));
            let samples = train_c1(&task, &secret, n, cfg.seed);
            let model = build_c1_classifier(&task, &secret, &samples, cfg.learner, cfg.budget_bits, cfg.effort_cap, exec)?;
            let tally = run_c1(&task, &secret, &[model.1.clone()], &[attack.clone()], cfg.trials, cfg.seed, exec)?;
            let budget = attack.resolved_budget(&task)?;
            Ok(make_report(
                &name,
                &preset,
                Some(cfg.fixture),
                None,
                task.budget(),
                LearnerSummary { kind: cfg.learner.name(), param_bits: model.0.param_bits(), train_samples: n },
                AttackSummary { name: attack.label(), budget, effort: attack.effort_field() },
                cfg.seed,
                cfg.delta,
                &tally[0][0],
                started,
            )
            .judge(None))
        }
        Preset::C2(p) => {
            let preset = p.name.clone();
            let mut task = Task2::new(p)?;
            if let Some(h) = cfg.hash_bits {
                task = task.with_hash_bits(h)?;
            }
            let secret = Secret2::draw(&task, &mut stream_rng(cfg.seed, "secret", 0));
            let n = match cfg.learner {
                LearnerKind::ListDecode => 0,
                _ => cfg.train_samples.unwrap_or_else(|| default_train_samples_c2(&task)),
            };
            let samples = train_c2(&task, &secret, n, cfg.seed);
            let (model, clf) = build_c2_classifier(&task, &secret, &samples, cfg.learner, cfg.budget_bits)?;
            let tally = run_c2(&task, &secret, &[clf], &[attack.clone()], cfg.trials, cfg.seed, exec)?;
            let budget = attack.resolved_budget(&task)?;
            Ok(make_report(
                &name,
                &preset,
                None,
                Some(task.hash().bits()),
                task.budget(),
                LearnerSummary { kind: cfg.learner.name(), param_bits: model.param_bits(), train_samples: n },
                AttackSummary { name: attack.label(), budget, effort: attack.effort_field() },
                cfg.seed,
                cfg.delta,
                &tally[0][0],
                started,
            )
            .judge(None))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_independent_and_stable() {
        let a: u64 = stream_rng(1, "test", 0).random();
        assert_eq!(a, stream_rng(1, "test", 0).random::<u64>());
        assert_ne!(a, stream_rng(1, "test", 1).random::<u64>());
        assert_ne!(a, stream_rng(1, "train", 0).random::<u64>());
        assert_ne!(a, stream_rng(2, "test", 0).random::<u64>());
    }

    #[test]
    fn hoeffding_numbers() {
        let w = hoeffding_half_width(10_000, 0.05);
        assert!((w - 0.013581).abs() < 1e-6);
        assert_eq!(min_trials(0.02, 0.05), 4612);
        assert!(hoeffding_half_width(4612, 0.05) <= 0.02);
        assert!(hoeffding_half_width(4611, 0.05) > 0.02);
    }

    #[test]
    fn config_round_trips_and_rejects_unknown_keys() {
        let mut c = ExperimentConfig::new("c1-tiny", LearnerKind::Truncate);
        c.budget_bits = Some(16);
        c.attack = AttackKind::NoisePlant;
        let s = serde_json::to_string(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"preset":"c1-tiny","learner":"efficient","bogus":1}"#).is_err());
    }

    #[test]
    fn half_width_target_enforced() {
        let mut c = ExperimentConfig::new("c1-tiny", LearnerKind::Zero);
        c.half_width = Some(0.02);
        c.trials = 1000;
        assert!(c.validate().is_err());
        c.trials = 4612;
        assert!(c.validate().is_ok());
    }
}
