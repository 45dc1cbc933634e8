use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use paramsep::adversaries::spent;
use paramsep::harness::{
    build_c1_classifier, build_c2_classifier, default_train_samples_c1, default_train_samples_c2, estimate_risk,
    estimate_robust_risk, run_suite, run_validators, stream_rng, train_c1, train_c2, AttackKind, AttackSpec,
    ExperimentConfig, ExperimentReport, LearnerKind, Suite, SuiteConfig, ValidatorGrid,
};
use paramsep::adversaries::{attack_forge, attack_noise_plant, attack_random, attack_segment_targeted, ForgeMode};
use paramsep::tasks::{sample_c1, sample_c2, Fixture1, Preset, Secret1, Secret2, Task, Task1, Task2};
use paramsep::Exec;

#[derive(Parser)]
#[command(name = "paramsep", version, about = "Parameter-count separation experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    out: OutArgs,
    /// Run trial loops on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Args)]
struct OutArgs {
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Emit labelled instances.
    Gen(TaskArgs),
    /// Train a model and print its record.
    Learn(TaskArgs),
    /// Draw instances and perturb them.
    Attack(TaskArgs),
    /// Monte Carlo risk on fresh draws.
    Risk(TaskArgs),
    /// Monte Carlo risk against the configured attack.
    RobustRisk(TaskArgs),
    /// Run a separation suite.
    Suite {
        #[arg(value_parser = parse_suite)]
        which: Suite,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
    },
    /// Exhaustive lemma validators.
    Validate {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Negative control: check against a bound four times too small.
        #[arg(long)]
        corrupt_bias_bound: bool,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: paramsep::harness::HarnessError| e.to_string())
}

#[derive(Args, Clone)]
struct TaskArgs {
    /// Experiment config file (TOML or JSON); flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Explicit task parameters (TOML or JSON with a `construction` key).
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, value_parser = parse_serde::<Fixture1>)]
    fixture: Option<Fixture1>,
    #[arg(long)]
    hash_bits: Option<u32>,
    #[arg(long, value_parser = parse_serde::<LearnerKind>)]
    learner: Option<LearnerKind>,
    #[arg(long)]
    budget_bits: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    effort_cap: Option<u64>,
    #[arg(long, value_parser = parse_serde::<AttackKind>)]
    attack: Option<AttackKind>,
    /// Attack budget in symbols (defaults to the task budget).
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    segment: Option<String>,
    #[arg(long)]
    effort: Option<u64>,
    #[arg(long)]
    oracle: bool,
    /// Trials for risk estimates; instance count for gen and attack.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    half_width: Option<f64>,
}

fn parse_serde<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|e| e.to_string())
}

fn read_doc<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    } else {
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

impl TaskArgs {
    fn config(&self, default_trials: u64) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => read_doc::<ExperimentConfig>(p)?,
            None => {
                let mut c = ExperimentConfig::new(self.preset.as_deref().unwrap_or("c1-tiny"), LearnerKind::Efficient);
                c.trials = default_trials;
                c
            }
        };
        if let Some(p) = &self.preset {
            c.preset = p.clone();
        }
        if let Some(p) = &self.params {
            let preset: Preset = read_doc(p)?;
            c.preset = match &preset {
                Preset::C1(p) => p.name.clone(),
                Preset::C2(p) => p.name.clone(),
            };
            c.params = Some(preset);
        }
        macro_rules! set {
            ($($f:ident => $g:ident),*) => { $(if let Some(v) = self.$f.clone() { c.$g = v; })* };
        }
        set!(fixture => fixture, learner => learner, attack => attack, trials => trials, seed => seed, delta => delta);
        macro_rules! set_opt {
            ($($f:ident => $g:ident),*) => { $(if self.$f.is_some() { c.$g = self.$f.clone(); })* };
        }
        set_opt!(hash_bits => hash_bits, budget_bits => budget_bits, samples => train_samples,
            effort_cap => effort_cap, budget => attack_budget, segment => segment, effort => effort,
            half_width => half_width);
        c.oracle |= self.oracle;
        Ok(c)
    }
}

enum Built {
    C1(Task1),
    C2(Task2),
}

fn build(c: &ExperimentConfig) -> Result<Built> {
    Ok(match c.preset()? {
        Preset::C1(p) => Built::C1(Task1::new(p)?),
        Preset::C2(p) => {
            let t = Task2::new(p)?;
            Built::C2(match c.hash_bits {
                Some(h) => t.with_hash_bits(h)?,
                None => t,
            })
        }
    })
}

fn emit(out: &OutArgs, json_value: &impl Serialize, csv_rows: Option<(Vec<&str>, Vec<Vec<String>>)>) -> Result<()> {
    let mut sink: Box<dyn Write> = match &out.out {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    match (out.format, csv_rows) {
        (Format::Csv, Some((header, rows))) => {
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(&header)?;
            for r in rows {
                w.write_record(&r)?;
            }
            w.flush()?;
        }
        (Format::Csv, None) => bail!("this command has no CSV form"),
        (Format::Json, _) => {
            serde_json::to_writer_pretty(&mut sink, json_value)?;
            writeln!(sink)?;
        }
    }
    Ok(())
}

const REPORT_HEADER: [&str; 17] = [
    "name", "preset", "hash_bits", "learner", "param_bits", "train_samples", "attack", "attack_budget", "seed",
    "trials", "errors", "abstains", "risk", "half_width", "delta", "budget_violations", "pass",
];

fn report_row(r: &ExperimentReport) -> Vec<String> {
    vec![
        r.name.clone(),
        r.preset.clone(),
        r.hash_bits.map_or(String::new(), |h| h.to_string()),
        r.learner.kind.clone(),
        r.learner.param_bits.to_string(),
        r.learner.train_samples.to_string(),
        r.attack.name.clone(),
        r.attack.budget.to_string(),
        r.seed.to_string(),
        r.trials.to_string(),
        r.errors.to_string(),
        r.abstains.to_string(),
        format!("{:.6}", r.risk),
        format!("{:.6}", r.half_width),
        r.delta.to_string(),
        r.budget_violations.to_string(),
        r.pass.map_or(String::new(), |p| p.to_string()),
    ]
}

fn symbols<T: Task>(t: &T, x: &T::Instance) -> String {
    t.flatten(x).iter().map(|s| s.0.to_string()).collect::<Vec<_>>().join(" ")
}

fn cmd_gen(c: &ExperimentConfig, out: &OutArgs) -> Result<()> {
    let n = c.trials;
    let (layout, rows): (_, Vec<(u64, bool, String)>) = match build(c)? {
        Built::C1(t) => {
            let s = Secret1::draw(&t, c.fixture, &mut stream_rng(c.seed, "secret", 0));
            let rows = (0..n).map(|i| {
                let (x, y) = sample_c1(&t, &s, &mut stream_rng(c.seed, "test", i));
                (i, y, symbols(&t, &x))
            });
            (t.layout().clone(), rows.collect())
        }
        Built::C2(t) => {
            let s = Secret2::draw(&t, &mut stream_rng(c.seed, "secret", 0));
            let rows = (0..n).map(|i| {
                let (x, y, _) = sample_c2(&t, &s, &mut stream_rng(c.seed, "test", i));
                (i, y, symbols(&t, &x))
            });
            (t.layout().clone(), rows.collect())
        }
    };
    let doc = json!({
        "preset": c.preset,
        "seed": c.seed,
        "layout": layout,
        "instances": rows.iter().map(|(i, y, s)| json!({"index": i, "label": y, "symbols": s})).collect::<Vec<_>>(),
    });
    let csv = rows.iter().map(|(i, y, s)| vec![i.to_string(), (*y as u8).to_string(), s.clone()]).collect();
    emit(out, &doc, Some((vec!["index", "label", "symbols"], csv)))
}

fn cmd_learn(c: &ExperimentConfig, out: &OutArgs, exec: Exec) -> Result<()> {
    let (model, n) = match build(c)? {
        Built::C1(t) => {
            let s = Secret1::draw(&t, c.fixture, &mut stream_rng(c.seed, "secret", 0));
            let n = c.train_samples.unwrap_or_else(|| default_train_samples_c1(&t));
            let samples = train_c1(&t, &s, n, c.seed);
            (build_c1_classifier(&t, &s, &samples, c.learner, c.budget_bits, c.effort_cap, exec)?.0, n)
        }
        Built::C2(t) => {
            let s = Secret2::draw(&t, &mut stream_rng(c.seed, "secret", 0));
            let n = c.train_samples.unwrap_or_else(|| default_train_samples_c2(&t));
            let samples = train_c2(&t, &s, n, c.seed);
            (build_c2_classifier(&t, &s, &samples, c.learner, c.budget_bits)?.0, n)
        }
    };
    let doc = json!({ "preset": c.preset, "seed": c.seed, "learner": c.learner, "train_samples": n, "model": model });
    let row = vec![c.preset.clone(), c.seed.to_string(), c.learner.name(), n.to_string(), model.param_bits().to_string()];
    emit(out, &doc, Some((vec!["preset", "seed", "learner", "train_samples", "param_bits"], vec![row])))
}

fn cmd_attack(c: &ExperimentConfig, out: &OutArgs, exec: Exec) -> Result<()> {
    let spec: AttackSpec = c.attack_spec();
    let role = format!("attack/{}", spec.label());
    let mut rows = Vec::new();
    match build(c)? {
        Built::C1(t) => {
            let budget = spec.resolved_budget(&t)?;
            let s = Secret1::draw(&t, c.fixture, &mut stream_rng(c.seed, "secret", 0));
            for i in 0..c.trials {
                let (x, y) = sample_c1(&t, &s, &mut stream_rng(c.seed, "test", i));
                let rng = &mut stream_rng(c.seed, &role, i);
                let a = match spec.kind {
                    AttackKind::None => paramsep::adversaries::Attacked { x: x.clone(), spent: 0, landed: false },
                    AttackKind::Random => attack_random(&t, &x, budget, rng)?,
                    AttackKind::Segment => attack_segment_targeted(&t, &x, budget, spec.segment.as_deref().unwrap_or(""), rng)?,
                    AttackKind::NoisePlant => attack_noise_plant(&t, &x, rng),
                    AttackKind::Forge => bail!("forge attacks apply to second-task presets"),
                };
                rows.push((i, y, spent(&t, &x, &a.x), a.landed, symbols(&t, &x), symbols(&t, &a.x)));
            }
        }
        Built::C2(t) => {
            let budget = spec.resolved_budget(&t)?;
            let s = Secret2::draw(&t, &mut stream_rng(c.seed, "secret", 0));
            for i in 0..c.trials {
                let (x, y, sk) = sample_c2(&t, &s, &mut stream_rng(c.seed, "test", i));
                let rng = &mut stream_rng(c.seed, &role, i);
                let a = match spec.kind {
                    AttackKind::None => paramsep::adversaries::Attacked { x: x.clone(), spent: 0, landed: false },
                    AttackKind::Random => attack_random(&t, &x, budget, rng)?,
                    AttackKind::Segment => attack_segment_targeted(&t, &x, budget, spec.segment.as_deref().unwrap_or(""), rng)?,
                    AttackKind::Forge => {
                        let mode = if spec.oracle { ForgeMode::Oracle } else { ForgeMode::Search { effort: spec.effort } };
                        attack_forge(&t, &x, Some(y), mode, Some(&sk), exec, rng)?
                    }
                    AttackKind::NoisePlant => bail!("noise planting applies to first-task presets"),
                };
                rows.push((i, y, spent(&t, &x, &a.x), a.landed, symbols(&t, &x), symbols(&t, &a.x)));
            }
        }
    }
    let doc = json!({
        "preset": c.preset,
        "seed": c.seed,
        "attack": spec.label(),
        "results": rows.iter().map(|(i, y, d, l, x, a)| json!({
            "index": i, "label": y, "spent": d, "landed": l, "original": x, "attacked": a,
        })).collect::<Vec<_>>(),
    });
    let csv = rows
        .iter()
        .map(|(i, y, d, l, x, a)| vec![i.to_string(), (*y as u8).to_string(), d.to_string(), l.to_string(), x.clone(), a.clone()])
        .collect();
    emit(out, &doc, Some((vec!["index", "label", "spent", "landed", "original", "attacked"], csv)))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    match &cli.cmd {
        Cmd::Gen(a) => cmd_gen(&a.config(10)?, &cli.out),
        Cmd::Learn(a) => cmd_learn(&a.config(10)?, &cli.out, exec),
        Cmd::Attack(a) => cmd_attack(&a.config(10)?, &cli.out, exec),
        Cmd::Risk(a) => {
            let r = estimate_risk(&a.config(10_000)?, exec)?;
            emit(&cli.out, &r, Some((REPORT_HEADER.to_vec(), vec![report_row(&r)])))
        }
        Cmd::RobustRisk(a) => {
            let r = estimate_robust_risk(&a.config(10_000)?, exec)?;
            emit(&cli.out, &r, Some((REPORT_HEADER.to_vec(), vec![report_row(&r)])))
        }
        Cmd::Suite { which, seed, trials, delta } => {
            let cfg = SuiteConfig { seed: *seed, trials: *trials, delta: *delta, train_samples: None };
            let r = run_suite(*which, &cfg, exec)?;
            let rows = r.reports.iter().map(report_row).collect();
            emit(&cli.out, &r, Some((REPORT_HEADER.to_vec(), rows)))?;
            if !r.pass {
                let failed: Vec<_> = r.verdicts.iter().filter(|v| !v.pass).map(|v| v.name.as_str()).collect();
                eprintln!("suite failed: {}", failed.join(", "));
                std::process::exit(2);
            }
            Ok(())
        }
        Cmd::Validate { seed, corrupt_bias_bound } => {
            let r = run_validators(&ValidatorGrid { seed: *seed, corrupt_bias_bound: *corrupt_bias_bound })?;
            let rows = r
                .entries
                .iter()
                .map(|e| {
                    vec![
                        e.check.clone(),
                        e.params.clone(),
                        format!("{:e}", e.value),
                        format!("{:e}", e.bound),
                        format!("{:e}", e.margin),
                        e.pass.to_string(),
                        e.gating.to_string(),
                    ]
                })
                .collect();
            emit(&cli.out, &r, Some((vec!["check", "params", "value", "bound", "margin", "pass", "gating"], rows)))?;
            if !r.pass {
                eprintln!("validators failed: {}", r.failures.join(", "));
                std::process::exit(2);
            }
            Ok(())
        }
    }
}
