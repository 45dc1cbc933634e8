//! Min-entropy, statistical distance, Fourier bias, and exhaustive
//! validators for the extraction, masking and noisy-code lemmas.
//!
//! Distributions carry integer weights, so the validators decide every
//! inequality in exact integer arithmetic; [`Tolerances`] only covers the
//! fallback path when a product would overflow 128 bits.

mod dist;
mod fourier;

pub use dist::{
    avg_min_entropy, entropy_report, min_ent_lemma_check, min_entropy, stat_dist, stat_dist_exact, Dist,
    EntropyReport, JointDist, MinEntLemmaCheck, Ratio,
};
pub use fourier::{
    bias, bias_spectrum, max_bias, max_bias_exact, signed_bias_numerator, wht, xor_convolve, VecSpace,
    MAX_PACKED_BITS,
};

use serde::Serialize;
use thiserror::Error;

use crate::coding::RsCode;
use crate::field::Fe;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatError {
    #[error("distribution has empty support")]
    EmptySupport,
    #[error("universe sizes differ: {0} vs {1}")]
    UniverseMismatch(usize, usize),
    #[error("weights overflow 64 bits")]
    Overflow,
    #[error("infeasible enumeration: {0}")]
    Infeasible(String),
}

/// Numeric slack for the rare comparisons that fall back to floating point.
pub struct Tolerances;

impl Tolerances {
    pub const FLOAT_SLACK: f64 = 9.313225746154785e-10; // 2^-30
    pub const DIST_SUM: f64 = 9.094947017729282e-13; // 2^-40
}

/// Exact `Π lhs ≤ Π rhs`, or `None` if a product overflows.
fn le_products(lhs: &[u128], rhs: &[u128]) -> Option<bool> {
    let l = lhs.iter().try_fold(1u128, |a, &b| a.checked_mul(b))?;
    let r = rhs.iter().try_fold(1u128, |a, &b| a.checked_mul(b))?;
    Some(l <= r)
}

fn decide(exact: Option<bool>, lhs: f64, rhs: f64) -> bool {
    exact.unwrap_or(lhs <= rhs + Tolerances::FLOAT_SLACK)
}

#[derive(Debug, Clone, Serialize)]
pub struct IpCheck {
    pub n: u32,
    pub h_min: f64,
    pub sd: f64,
    /// ε with H∞(X) = 2·log(1/ε).
    pub stated_bound: f64,
    /// ½·√(2^{−H∞−1}), the last expression of the published proof chain.
    pub proof_chain_bound: f64,
    /// ½·√(Σ p²), the bound Jensen plus Parseval actually give.
    pub collision_bound: f64,
    pub pass: bool,
    pub proof_chain_holds: bool,
    pub collision_holds: bool,
}

/// Exact distance of (Y, ⟨X, Y⟩) from uniform on n+1 bits, Y uniform.
pub fn ip_extractor_check(x: &Dist) -> Result<IpCheck, StatError> {
    if !x.len().is_power_of_two() || x.len() > 1 << 14 {
        return Err(StatError::Infeasible(format!("universe {} is not 2^n with n ≤ 14", x.len())));
    }
    let n = x.len().trailing_zeros();
    let mut spec: Vec<i128> = x.weights().iter().map(|&w| w as i128).collect();
    wht(&mut spec);
    let t = x.total() as u128;
    let num: u128 = spec.iter().map(|v| v.unsigned_abs()).sum();
    let den = (2u128 << n) * t;
    let sd = num as f64 / den as f64;
    let mw = x.max_weight() as u128;
    let h_min = min_entropy(x);
    let sq: u128 = x.weights().iter().map(|&w| (w as u128) * (w as u128)).sum();
    // sd² ≤ mw/T, sd² ≤ mw/(8T), sd² ≤ Σw²/(4T²)
    let pass = decide(le_products(&[num, num, t], &[mw, den, den]), sd, (-h_min / 2.0).exp2());
    let chain = 0.5 * (-h_min - 1.0).exp2().sqrt();
    let proof_chain_holds = decide(le_products(&[8, num, num, t], &[mw, den, den]), sd, chain);
    let coll = 0.5 * (sq as f64).sqrt() / t as f64;
    let collision_holds = decide(le_products(&[4, num, num, t, t], &[sq, den, den]), sd, coll);
    Ok(IpCheck {
        n,
        h_min,
        sd,
        stated_bound: (-h_min / 2.0).exp2(),
        proof_chain_bound: chain,
        collision_bound: coll,
        pass,
        proof_chain_holds,
        collision_holds,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MaskingCheck {
    pub k: f64,
    pub eps: f64,
    pub sd: f64,
    pub bound: f64,
    pub pass: bool,
}

/// SD(X + Y, U) against 2^{(nℓ−k)/2 − 1}·ε with k = H∞(X), ε = max_bias(Y).
pub fn masking_check(x: &Dist, y: &Dist, sp: &VecSpace) -> Result<MaskingCheck, StatError> {
    let conv = xor_convolve(x, y)?;
    let u = sp.size() as u128;
    let txy = conv.total() as u128;
    let sn: u128 = conv.weights().iter().map(|&c| (u * c as u128).abs_diff(txy)).sum();
    let sden = 2 * u * txy;
    let sd = sn as f64 / sden as f64;
    let k = min_entropy(x);
    let eps = max_bias_exact(y, sp)?;
    let bound = ((sp.bits() as f64 - k) / 2.0 - 1.0).exp2() * eps.to_f64();
    // sd² ≤ 2^{nℓ−2}·(mw/Tx)·ε²  ⟺  4·sn²·Tx·ε.den² ≤ 2^{nℓ}·mw·ε.num²·sden²
    let exact = le_products(
        &[4, sn, sn, x.total() as u128, eps.den, eps.den],
        &[u, x.max_weight() as u128, eps.num, eps.num, sden, sden],
    );
    Ok(MaskingCheck { k, eps: eps.to_f64(), sd, bound, pass: decide(exact, sd, bound) })
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub abs_diff: f64,
    pub exact: bool,
    pub pass: bool,
}

/// bias(X+Y, α) = bias(X, α)·bias(Y, α), on signed coefficients.
pub fn convolution_bias_identity_check(x: &Dist, y: &Dist, sp: &VecSpace, alpha: &[Fe]) -> Result<IdentityCheck, StatError> {
    let conv = xor_convolve(x, y)?;
    let lhs = signed_bias_numerator(&conv, sp, alpha);
    let rhs = signed_bias_numerator(x, sp, alpha) * signed_bias_numerator(y, sp, alpha);
    let den = conv.total() as f64;
    let (l, r) = (lhs as f64 / den, rhs as f64 / den);
    let abs_diff = (l - r).abs();
    Ok(IdentityCheck {
        lhs: l.abs(),
        rhs: r.abs(),
        abs_diff,
        exact: lhs == rhs,
        pass: lhs == rhs && abs_diff <= Tolerances::FLOAT_SLACK,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ParsevalCheck {
    pub sum_bias_sq: f64,
    pub collision_scaled: f64,
    pub exact: bool,
}

/// Σ_α bias(X, α)² = |F|^n·Σ_ω Pr[X = ω]².
pub fn parseval_check(x: &Dist, sp: &VecSpace) -> Result<ParsevalCheck, StatError> {
    let spec = bias_spectrum(x, sp)?;
    let lhs: u128 = spec.iter().map(|v| v.unsigned_abs() * v.unsigned_abs()).sum();
    let sq: u128 = x.weights().iter().map(|&w| (w as u128) * (w as u128)).sum();
    let rhs = sp.size() as u128 * sq;
    let t2 = (x.total() as f64).powi(2);
    Ok(ParsevalCheck { sum_bias_sq: lhs as f64 / t2, collision_scaled: rhs as f64 / t2, exact: lhs == rhs })
}

fn combinations(n: usize, s: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(s);
    fn rec(start: usize, n: usize, s: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, s, cur, out);
            cur.pop();
        }
    }
    rec(0, n, s, &mut cur, &mut out);
    out
}

/// Uniform codeword with a uniformly random s-subset of positions replaced
/// by uniform symbols.
pub fn noisy_rs_distribution(code: &RsCode, s: usize) -> Result<Dist, StatError> {
    let f = code.field();
    let sp = VecSpace::new(f, code.n())?;
    if s > code.n() {
        return Err(StatError::Infeasible(format!("s = {s} > n = {}", code.n())));
    }
    let q = f.order();
    let mut w = vec![0u64; sp.size()];
    let subsets = combinations(code.n(), s);
    for mi in 0..q.pow(code.k() as u32) {
        let msg: Vec<Fe> = (0..code.k()).map(|j| f.elem((mi / q.pow(j as u32)) as u64)).collect();
        let cw = code.encode(&msg).expect("k symbols");
        for sub in &subsets {
            for noise in 0..q.pow(s as u32) {
                let mut v = cw.clone();
                for (j, &pos) in sub.iter().enumerate() {
                    v[pos] = f.elem((noise / q.pow(j as u32)) as u64);
                }
                w[sp.pack(&v)] += 1;
            }
        }
    }
    Dist::from_weights(w)
}

#[derive(Debug, Clone, Serialize)]
pub struct NoisyCodeCheck {
    pub n: usize,
    pub k: usize,
    pub s: usize,
    pub max_bias: f64,
    pub bound: f64,
    pub pass: bool,
}

/// max_bias of the noisy RS distribution against (1 − R)^s.
pub fn noisy_code_check(code: &RsCode, s: usize) -> Result<NoisyCodeCheck, StatError> {
    let d = noisy_rs_distribution(code, s)?;
    let sp = VecSpace::new(code.field(), code.n())?;
    let mb = max_bias_exact(&d, &sp)?;
    let (n, k) = (code.n() as u128, code.k() as u128);
    let exact = le_products(&[mb.num, n.pow(s as u32)], &[(n - k).pow(s as u32), mb.den]);
    let bound = (1.0 - code.rate()).powi(s as i32);
    Ok(NoisyCodeCheck { n: code.n(), k: code.k(), s, max_bias: mb.to_f64(), bound, pass: decide(exact, mb.to_f64(), bound) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(5, 2).len(), 10);
        assert_eq!(combinations(5, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn slack_constants() {
        assert_eq!(Tolerances::FLOAT_SLACK, (-30f64).exp2());
        assert_eq!(Tolerances::DIST_SUM, (-40f64).exp2());
    }
}
