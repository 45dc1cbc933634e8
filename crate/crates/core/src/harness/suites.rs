//! The three separation experiments with their pass thresholds.

use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::engine::{
    build_c1_classifier, build_c2_classifier, default_train_samples_c1, default_train_samples_c2, run_c1, run_c2,
    train_c1, train_c2, AttackSpec, Tally,
};
use super::{make_report, stream_rng, AttackSummary, ExperimentReport, HarnessError, LearnerKind, LearnerSummary, Threshold};
use crate::exec::Exec;
use crate::learners::Model;
use crate::tasks::{Fixture1, Preset, Secret1, Secret2, Task, Task1, Task2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    E1,
    E2,
    E3,
}

impl FromStr for Suite {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        match s.to_ascii_lowercase().as_str() {
            "e1" => Ok(Suite::E1),
            "e2" => Ok(Suite::E2),
            "e3" => Ok(Suite::E3),
            _ => Err(HarnessError::Config(format!("unknown suite `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: u64,
    pub delta: f64,
    pub train_samples: Option<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: 1, trials: 10_000, delta: 0.05, train_samples: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub suite: Suite,
    pub config: SuiteConfig,
    pub reports: Vec<ExperimentReport>,
    pub verdicts: Vec<Verdict>,
    pub budget_violations: u64,
    pub pass: bool,
    pub wall_ms: u64,
}

impl SuiteReport {
    pub fn report(&self, name: &str) -> Option<&ExperimentReport> {
        self.reports.iter().find(|r| r.name == name)
    }

    /// True when every count (not timing) matches.
    pub fn same_counts(&self, other: &SuiteReport) -> bool {
        self.reports.len() == other.reports.len()
            && self.reports.iter().zip(&other.reports).all(|(a, b)| a.name == b.name && a.counts() == b.counts())
    }
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig, exec: Exec) -> Result<SuiteReport, HarnessError> {
    let started = Instant::now();
    let (reports, mut verdicts) = match suite {
        Suite::E1 => e1(cfg, exec)?,
        Suite::E2 => e2(cfg, exec)?,
        Suite::E3 => e3(cfg, exec)?,
    };
    for r in &reports {
        if let (Some(t), Some(pass)) = (r.threshold, r.pass) {
            verdicts.push(Verdict { name: r.name.clone(), pass, detail: format!("risk {:.4} against {t:?}", r.risk) });
        }
    }
    let budget_violations = reports.iter().map(|r| r.budget_violations).sum();
    verdicts.push(Verdict {
        name: "budget".into(),
        pass: budget_violations == 0,
        detail: format!("{budget_violations} over-budget perturbations"),
    });
    let pass = verdicts.iter().all(|v| v.pass);
    Ok(SuiteReport {
        schema_version: super::SCHEMA_VERSION,
        suite,
        config: *cfg,
        reports,
        verdicts,
        budget_violations,
        pass,
        wall_ms: started.elapsed().as_millis() as u64,
    })
}

type Out = (Vec<ExperimentReport>, Vec<Verdict>);

struct Entry {
    name: String,
    kind: LearnerKind,
    budget_bits: Option<usize>,
    threshold: Option<Threshold>,
}

fn entry(name: impl Into<String>, kind: LearnerKind, budget_bits: Option<usize>, threshold: Option<Threshold>) -> Entry {
    Entry { name: name.into(), kind, budget_bits, threshold }
}

fn c1_task(name: &str) -> Result<Task1, HarnessError> {
    match Preset::get(name)? {
        Preset::C1(p) => Ok(Task1::new(p)?),
        Preset::C2(_) => unreachable!("first-task preset"),
    }
}

fn c2_task(name: &str) -> Result<Task2, HarnessError> {
    match Preset::get(name)? {
        Preset::C2(p) => Ok(Task2::new(p)?),
        Preset::C1(_) => unreachable!("second-task preset"),
    }
}

/// One first-task preset, one fixture, one attack, many learners.
fn c1_block(
    cfg: &SuiteConfig,
    exec: Exec,
    tag: &str,
    preset: &str,
    fixture: Fixture1,
    attack: AttackSpec,
    entries: &[Entry],
) -> Result<Vec<ExperimentReport>, HarnessError> {
    let started = Instant::now();
    let task = c1_task(preset)?;
    let secret = Secret1::draw(&task, fixture, &mut stream_rng(cfg.seed, &format!("secret/{tag}"), 0));
    let n = cfg.train_samples.unwrap_or_else(|| default_train_samples_c1(&task));
    let samples = train_c1(&task, &secret, n, cfg.seed);
    let mut models: Vec<Model> = Vec::new();
    let mut clfs = Vec::new();
    for e in entries {
        let (m, c) = build_c1_classifier(&task, &secret, &samples, e.kind, e.budget_bits, None, exec)?;
        models.push(m);
        clfs.push(c);
    }
    let tallies = run_c1(&task, &secret, &clfs, std::slice::from_ref(&attack), cfg.trials, cfg.seed, exec)?;
    let budget = attack.resolved_budget(&task)?;
    Ok(entries
        .iter()
        .zip(&models)
        .zip(&tallies[0])
        .map(|((e, m), t)| {
            make_report(
                &format!("{tag}/{}", e.name),
                preset,
                Some(fixture),
                None,
                task.budget(),
                LearnerSummary { kind: e.kind.name(), param_bits: m.param_bits(), train_samples: n },
                AttackSummary { name: attack.label(), budget, effort: attack.effort_field() },
                cfg.seed,
                cfg.delta,
                t,
                started,
            )
            .judge(e.threshold)
        })
        .collect())
}

fn bounded_entries(bits: usize, label: &str) -> Vec<Entry> {
    let hi = Some(Threshold::AtLeast(0.325));
    vec![
        entry(format!("truncate@{label}"), LearnerKind::Truncate, Some(bits), hi),
        entry(format!("sketch@{label}"), LearnerKind::Sketch, Some(bits), hi),
        entry(format!("dictionary@{label}"), LearnerKind::Dictionary, Some(bits), hi),
    ]
}

fn sweep_entries(points: &[(usize, &str)]) -> Vec<Entry> {
    points.iter().map(|&(b, l)| entry(format!("sweep/truncate@{l}"), LearnerKind::Truncate, Some(b), None)).collect()
}

/// The truncation sweep must not rise by more than the two estimates' joint
/// half-width and must end at ≤ 0.01; with `floor = (f, limit)`, every point
/// below `limit` bits must stay at or above f.
fn sweep_verdicts(tag: &str, reports: &[ExperimentReport], floor: Option<(f64, usize)>) -> Vec<Verdict> {
    let prefix = format!("{tag}/sweep/");
    let pts: Vec<&ExperimentReport> = reports.iter().filter(|r| r.name.starts_with(&prefix)).collect();
    let curve: Vec<String> = pts.iter().map(|r| format!("{}:{:.4}", r.learner.param_bits, r.risk)).collect();
    let detail = curve.join(" ");
    let monotone = pts.windows(2).all(|w| w[1].risk <= w[0].risk + w[0].half_width + w[1].half_width);
    let end = pts.last().is_some_and(|r| r.risk <= 0.01);
    let mut v = vec![Verdict { name: format!("{tag}/sweep/monotone"), pass: monotone && end, detail: detail.clone() }];
    if let Some((f, limit)) = floor {
        let held = pts.iter().filter(|r| r.learner.param_bits < limit).all(|r| r.risk >= f);
        v.push(Verdict {
            name: format!("{tag}/sweep/floor"),
            pass: held,
            detail: format!("floor {f} below {limit} bits: {detail}"),
        });
    }
    v
}

/// Learner-power separation: polynomially many parameters suffice for the
/// efficient learner, while α/2-bit learners stay near chance.
fn e1(cfg: &SuiteConfig, exec: Exec) -> Result<Out, HarnessError> {
    let task = c1_task("c1-small")?;
    let (a, b) = (task.alpha(), task.beta());
    let mut entries = vec![entry("efficient", LearnerKind::Efficient, None, Some(Threshold::AtMost(0.01)))];
    entries.extend(bounded_entries(a / 2, "alpha/2"));
    entries.extend(sweep_entries(&[(0, "0"), (a / 4, "alpha/4"), (a / 2, "alpha/2"), (a, "alpha"), (a + b, "alpha+beta")]));
    let mut reports =
        c1_block(cfg, exec, "e1", "c1-small", Fixture1::UniformP, AttackSpec::none(), &entries)?;

    let it = c1_block(
        cfg,
        exec,
        "e1",
        "c1-tiny",
        Fixture1::Prg,
        AttackSpec::none(),
        &[entry("it", LearnerKind::It, None, Some(Threshold::AtMost(0.01)))],
    )?;
    let lam = c1_task("c1-tiny")?.params().lambda as usize;
    let bits = it[0].learner.param_bits;
    let mut verdicts = sweep_verdicts("e1", &reports, None);
    verdicts.push(Verdict {
        name: "e1/it/param-bits".into(),
        pass: bits == 2 * lam,
        detail: format!("{bits} parameter bits, 2λ = {}", 2 * lam),
    });
    reports.extend(it);
    Ok((reports, verdicts))
}

/// Adversary-power separation on the first task: the full model survives
/// noise planting; β/4-bit models do not.
fn e2(cfg: &SuiteConfig, exec: Exec) -> Result<Out, HarnessError> {
    let task = c1_task("c1-small")?;
    let (a, b) = (task.alpha(), task.beta());
    let mut entries = vec![
        entry("efficient", LearnerKind::Efficient, None, Some(Threshold::AtMost(0.01))),
        entry("true-params", LearnerKind::TrueParams, None, Some(Threshold::AtMost(0.01))),
    ];
    entries.extend(bounded_entries(b / 4, "beta/4"));
    entries.extend(sweep_entries(&[(0, "0"), (b / 4, "beta/4"), (b / 2, "beta/2"), (b, "beta"), (a + b, "alpha+beta")]));
    let reports =
        c1_block(cfg, exec, "e2", "c1-small", Fixture1::UniformQ, AttackSpec::noise_plant(), &entries)?;
    let verdicts = sweep_verdicts("e2", &reports, Some((0.325, b)));
    Ok((reports, verdicts))
}

const E3_STRONG_HASH: u32 = 40;
const E3_WEAK_HASH: u32 = 16;

/// Second task: the zero-parameter classifier is robust to efficient
/// forgers only; the α-bit learner is robust to both.
fn e3(cfg: &SuiteConfig, exec: Exec) -> Result<Out, HarnessError> {
    let started = Instant::now();
    let strong = c2_task("c2-medium")?.with_hash_bits(E3_STRONG_HASH)?;
    let weak = strong.with_hash_bits(E3_WEAK_HASH)?;
    let alpha = strong.alpha();
    let secret = Secret2::draw(&strong, &mut stream_rng(cfg.seed, "secret/e3", 0));
    let n = cfg.train_samples.unwrap_or_else(|| default_train_samples_c2(&strong));
    let samples = train_c2(&strong, &secret, n, cfg.seed);
    // s does not depend on the hash width, so one training run serves both tasks
    let learners = [
        ("listdecode", LearnerKind::ListDecode, None),
        ("it-c2", LearnerKind::ItC2, None),
        ("it-c2@alpha/2", LearnerKind::ItC2, Some(alpha / 2)),
    ];
    let mut models = Vec::new();
    let mut clfs = Vec::new();
    for (_, kind, bits) in learners {
        let (m, c) = build_c2_classifier(&strong, &secret, &samples, kind, bits)?;
        models.push(m);
        clfs.push(c);
    }
    let strong_attacks = [AttackSpec::none(), AttackSpec::random(None), AttackSpec::forge(0)];
    let weak_attacks = [AttackSpec::forge(1u64 << E3_WEAK_HASH)];
    let ts = run_c2(&strong, &secret, &clfs, &strong_attacks, cfg.trials, cfg.seed, exec)?;
    let tw = run_c2(&weak, &secret, &clfs, &weak_attacks, cfg.trials, cfg.seed, exec)?;

    let lo = Some(Threshold::AtMost(0.01));
    let thresholds = |hash: u32, attack: &AttackSpec, learner: &str| -> Option<Threshold> {
        match (hash, attack.label().as_str(), learner) {
            (E3_STRONG_HASH, "random(b=max)" | "forge(effort=0)", "listdecode") => lo,
            (E3_WEAK_HASH, _, "listdecode") => Some(Threshold::Within { center: 0.5, radius: 0.05 }),
            (E3_WEAK_HASH, _, "it-c2") => lo,
            (E3_WEAK_HASH, _, "it-c2@alpha/2") => Some(Threshold::AtLeast(1.0 / 3.0)),
            _ => None,
        }
    };
    let mut reports = Vec::new();
    let mut push = |task: &Task2, attacks: &[AttackSpec], grid: &[Vec<Tally>]| {
        let hash = task.hash().bits();
        for (attack, row) in attacks.iter().zip(grid) {
            for (((name, kind, _), m), t) in learners.iter().zip(&models).zip(row) {
                let r = make_report(
                    &format!("e3/h{hash}/{}/{name}", attack.label()),
                    "c2-medium",
                    None,
                    Some(hash),
                    task.budget(),
                    LearnerSummary {
                        kind: kind.name(),
                        param_bits: m.param_bits(),
                        train_samples: if *kind == LearnerKind::ListDecode { 0 } else { n },
                    },
                    AttackSummary { name: attack.label(), budget: task.budget(), effort: attack.effort_field() },
                    cfg.seed,
                    cfg.delta,
                    t,
                    started,
                );
                reports.push(r.judge(thresholds(hash, attack, name)));
            }
        }
    };
    push(&strong, &strong_attacks, &ts);
    push(&weak, &weak_attacks, &tw);

    let find = |name: &str| reports.iter().find(|r| r.name == name).expect("report present");
    let easy = find("e3/h40/forge(effort=0)/listdecode");
    let hard = find("e3/h16/forge(effort=65536)/listdecode");
    let gap = easy.accuracy() - hard.accuracy();
    let landed = hard.attacks_landed;
    let verdicts = vec![
        Verdict {
            name: "e3/gap".into(),
            pass: gap >= 0.4,
            detail: format!("accuracy {:.4} at effort 0 vs {:.4} at effort 2^16, gap {gap:.4}", easy.accuracy(), hard.accuracy()),
        },
        Verdict {
            name: "e3/forge-lands".into(),
            pass: landed == hard.trials && easy.attacks_landed == 0,
            detail: format!("{landed}/{} forgeries at 2^16, {} at effort 0", hard.trials, easy.attacks_landed),
        },
    ];
    Ok((reports, verdicts))
}
