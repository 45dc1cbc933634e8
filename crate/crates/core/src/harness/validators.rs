//! Exhaustive checks of the extraction, masking, noisy-code and
//! average-min-entropy lemmas on a fixed grid of micro-instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coding::RsCode;
use crate::field::Field;
use crate::stat::{
    convolution_bias_identity_check, ip_extractor_check, masking_check, min_ent_lemma_check, noisy_code_check,
    noisy_rs_distribution, parseval_check, Dist, JointDist, Ratio, StatError, Tolerances, VecSpace,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidatorGrid {
    pub seed: u64,
    /// Negative control: check the noisy-code bias against a bound four
    /// times too small.
    pub corrupt_bias_bound: bool,
}

impl Default for ValidatorGrid {
    fn default() -> Self {
        Self { seed: 7, corrupt_bias_bound: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidatorEntry {
    pub check: String,
    pub params: String,
    pub value: f64,
    pub bound: f64,
    /// bound − value; for identities, the negated absolute discrepancy.
    pub margin: f64,
    pub pass: bool,
    /// Whether this entry counts toward the overall verdict.
    pub gating: bool,
    /// The distribution that broke the bound, when one did.
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidatorReport {
    pub schema_version: u32,
    pub grid: ValidatorGrid,
    pub entries: Vec<ValidatorEntry>,
    /// `check[params]` of every failed gating entry.
    pub failures: Vec<String>,
    pub pass: bool,
}

fn entry(check: &str, params: String, value: f64, bound: f64, pass: bool, witness: impl FnOnce() -> String) -> ValidatorEntry {
    ValidatorEntry {
        check: check.into(),
        params,
        value,
        bound,
        margin: bound - value,
        pass,
        gating: true,
        witness: (!pass).then(witness),
    }
}

fn random_dist(rng: &mut ChaCha8Rng, size: usize, points: usize) -> Dist {
    let mut w = vec![0u64; size];
    for _ in 0..points {
        w[rng.random_range(0..size)] += rng.random_range(1..20);
    }
    Dist::from_weights(w).expect("positive weight")
}

fn describe(d: &Dist) -> String {
    let pts: Vec<String> = d.support().map(|i| format!("{i}:{}", d.weight(i))).collect();
    format!("weights over {} points {{{}}}", d.len(), pts.join(", "))
}

fn span(basis: &[usize]) -> Vec<usize> {
    let mut s = vec![0usize];
    for &b in basis {
        if !s.contains(&b) {
            let more: Vec<usize> = s.iter().map(|&v| v ^ b).collect();
            s.extend(more);
        }
    }
    s
}

fn ip_checks(rng: &mut ChaCha8Rng, out: &mut Vec<ValidatorEntry>) -> Result<(), StatError> {
    for n in 2..=12u32 {
        for d in 0..=n as usize {
            let mut basis = Vec::new();
            while span(&basis).len() < 1 << d {
                basis.push(rng.random_range(1..1usize << n));
            }
            let x = Dist::uniform_over(1 << n, &span(&basis))?;
            let c = ip_extractor_check(&x)?;
            let params = format!("n={n} d={d} basis={basis:?}");
            let wit = || format!("uniform over the span of {basis:?} in GF(2)^{n}");
            out.push(entry("ip", params.clone(), c.sd, c.stated_bound, c.pass, wit));
            let mut chain = entry("ip/proof-chain", params.clone(), c.sd, c.proof_chain_bound, c.proof_chain_holds, wit);
            chain.gating = false;
            out.push(chain);
            out.push(entry("ip/collision", params, c.sd, c.collision_bound, c.collision_holds, wit));
        }
    }
    Ok(())
}

fn masking_checks(rng: &mut ChaCha8Rng, out: &mut Vec<ValidatorEntry>) -> Result<(), StatError> {
    let f = Field::with_ell(2).expect("GF(4)");
    for n in 1..=3 {
        let sp = VecSpace::new(&f, n)?;
        for t in 0..20 {
            let x = random_dist(rng, sp.size(), 6);
            let y = random_dist(rng, sp.size(), 6);
            let c = masking_check(&x, &y, &sp)?;
            let wit = || format!("X {}; Y {}", describe(&x), describe(&y));
            out.push(entry("masking", format!("l=2 n={n} random#{t}"), c.sd, c.bound, c.pass, wit));

            let mut worst = (0.0f64, true);
            for a in 0..sp.size() {
                let id = convolution_bias_identity_check(&x, &y, &sp, &sp.unpack(a))?;
                worst = (worst.0.max(id.abs_diff), worst.1 && id.pass);
            }
            let mut e = entry("convolution-identity", format!("l=2 n={n} random#{t}"), worst.0, 0.0, worst.1, wit);
            e.margin = -worst.0;
            out.push(e);
        }
    }
    let sp = VecSpace::new(&f, 3)?;
    let code = RsCode::new(&f, 3, 1).expect("n ≤ q");
    for s in 0..=3 {
        let y = noisy_rs_distribution(&code, s)?;
        for h in 1..sp.size() {
            let supp: Vec<usize> = (0..sp.size()).filter(|x| (x & h).count_ones() % 2 == 0).collect();
            let x = Dist::uniform_over(sp.size(), &supp)?;
            let c = masking_check(&x, &y, &sp)?;
            let wit = || format!("X uniform on the half-space orthogonal to {h}; Y noisy RS(3,1) with s={s}");
            out.push(entry("masking", format!("l=2 n=3 half-space={h} noisy-rs s={s}"), c.sd, c.bound, c.pass, wit));
        }
    }
    Ok(())
}

/// GF(4) has only four points, so n = 5 runs over GF(8); n ≤ 4 over GF(4).
const NOISY_GRID: [(u32, usize, usize); 3] = [(3, 5, 1), (2, 4, 1), (2, 3, 1)];

fn noisy_checks(corrupt: bool, out: &mut Vec<ValidatorEntry>) -> Result<(), StatError> {
    for (ell, n, k) in NOISY_GRID {
        let f = Field::with_ell(ell).expect("small field");
        let code = RsCode::new(&f, n, k).expect("n ≤ q");
        for s in 0..=3 {
            let c = noisy_code_check(&code, s)?;
            let wit = || format!("uniform RS({n},{k}) codeword over GF(2^{ell}) with {s} uniform symbols");
            out.push(entry("noisy-code", format!("l={ell} n={n} k={k} s={s}"), c.max_bias, c.bound, c.pass, wit));
        }
    }
    if corrupt {
        let f = Field::with_ell(2).expect("GF(4)");
        let code = RsCode::new(&f, 3, 1).expect("n ≤ q");
        let c = noisy_code_check(&code, 1)?;
        let bound = c.bound / 4.0;
        let pass = c.max_bias <= bound + Tolerances::FLOAT_SLACK;
        let wit = || "uniform RS(3,1) codeword over GF(4) with 1 uniform symbol".to_string();
        out.push(entry("noisy-code/corrupted-bound", "l=2 n=3 k=1 s=1 bound/4".into(), c.max_bias, bound, pass, wit));
    }
    Ok(())
}

fn min_ent_checks(rng: &mut ChaCha8Rng, out: &mut Vec<ValidatorEntry>) {
    let mut made = 0;
    while made < 100 {
        let nx = rng.random_range(2..=16);
        let nz = rng.random_range(1..=8);
        let w: Vec<u64> = (0..nx * nz).map(|_| if rng.random_bool(0.4) { rng.random_range(1..9) } else { 0 }).collect();
        let Ok(joint) = JointDist::new(nx, nz, w.clone()) else { continue };
        made += 1;
        for eps in [Ratio::new(1, 2), Ratio::new(1, 4), Ratio::new(1, 10), Ratio::new(1, 100)] {
            let c = min_ent_lemma_check(&joint, eps);
            let params = format!("joint#{made} {nx}x{nz} eps={}", c.eps);
            let wit = || format!("joint weights {nx}x{nz} {w:?}");
            // h_avg ≥ h_x − m, written as value ≤ bound on the deficit
            out.push(entry("min-ent/chain", params.clone(), c.h_x - c.h_avg, c.m_bits as f64, c.chain_holds, wit));
            out.push(entry("min-ent/concentration", params, 1.0 - c.good_mass, c.eps, c.concentration_holds, wit));
        }
    }
}

fn parseval_checks(rng: &mut ChaCha8Rng, out: &mut Vec<ValidatorEntry>) -> Result<(), StatError> {
    for t in 0..100 {
        let ell = rng.random_range(1..=3);
        let n = rng.random_range(1..=3);
        let f = Field::with_ell(ell).expect("small field");
        let sp = VecSpace::new(&f, n)?;
        let pts = rng.random_range(1..12);
        let x = random_dist(rng, sp.size(), pts);
        let c = parseval_check(&x, &sp)?;
        let diff = (c.sum_bias_sq - c.collision_scaled).abs();
        let slack = Tolerances::FLOAT_SLACK * c.collision_scaled.max(1.0);
        let mut e = entry("parseval", format!("#{t} l={ell} n={n}"), diff, slack, c.exact && diff <= slack, || describe(&x));
        e.margin = slack - diff;
        out.push(e);
    }
    Ok(())
}

pub fn run_validators(grid: &ValidatorGrid) -> Result<ValidatorReport, StatError> {
    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    let mut entries = Vec::new();
    ip_checks(&mut rng, &mut entries)?;
    masking_checks(&mut rng, &mut entries)?;
    noisy_checks(grid.corrupt_bias_bound, &mut entries)?;
    min_ent_checks(&mut rng, &mut entries);
    parseval_checks(&mut rng, &mut entries)?;
    let failures: Vec<String> =
        entries.iter().filter(|e| e.gating && !e.pass).map(|e| format!("{}[{}]", e.check, e.params)).collect();
    Ok(ValidatorReport { schema_version: super::SCHEMA_VERSION, grid: *grid, pass: failures.is_empty(), failures, entries })
}
