use serde::Serialize;

use super::StatError;

/// Exact non-negative rational `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Ratio {
    pub num: u128,
    pub den: u128,
}

impl Ratio {
    pub fn new(num: u128, den: u128) -> Self {
        assert!(den > 0);
        Self { num, den }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `self ≤ other`, exactly.
    pub fn le(self, other: Ratio) -> bool {
        self.num * other.den <= other.num * self.den
    }
}

/// Distribution over the dense universe `0..len` with integer weights.
///
/// Probabilities are `weight / total`, so every quantity below is an exact
/// rational; floats appear only at the reporting boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dist {
    weights: Vec<u64>,
    total: u64,
}

impl Dist {
    pub fn from_weights(weights: Vec<u64>) -> Result<Self, StatError> {
        let total = weights.iter().try_fold(0u64, |a, &w| a.checked_add(w)).ok_or(StatError::Overflow)?;
        if total == 0 {
            return Err(StatError::EmptySupport);
        }
        Ok(Self { weights, total })
    }

    pub fn uniform(size: usize) -> Self {
        Self::from_weights(vec![1; size]).expect("nonempty universe")
    }

    pub fn point(size: usize, at: usize) -> Self {
        let mut w = vec![0; size];
        w[at] = 1;
        Self::from_weights(w).expect("nonempty")
    }

    pub fn uniform_over(size: usize, support: &[usize]) -> Result<Self, StatError> {
        let mut w = vec![0; size];
        for &s in support {
            w[s] = 1;
        }
        Self::from_weights(w)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> u64 {
        self.weights[i]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.weights[i] as f64 / self.total as f64
    }

    pub fn max_weight(&self) -> u64 {
        self.weights.iter().copied().max().unwrap_or(0)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights.iter().enumerate().filter(|(_, &w)| w > 0).map(|(i, _)| i)
    }
}

pub fn stat_dist_exact(a: &Dist, b: &Dist) -> Result<Ratio, StatError> {
    if a.len() != b.len() {
        return Err(StatError::UniverseMismatch(a.len(), b.len()));
    }
    let (ta, tb) = (a.total as u128, b.total as u128);
    let num: u128 = a
        .weights
        .iter()
        .zip(&b.weights)
        .map(|(&x, &y)| (x as u128 * tb).abs_diff(y as u128 * ta))
        .sum();
    Ok(Ratio::new(num, 2 * ta * tb))
}

/// ½·Σ|p − q|.
pub fn stat_dist(a: &Dist, b: &Dist) -> Result<f64, StatError> {
    Ok(stat_dist_exact(a, b)?.to_f64())
}

/// −log₂ max p.
pub fn min_entropy(a: &Dist) -> f64 {
    (a.total as f64 / a.max_weight() as f64).log2()
}

/// Joint distribution of (X, Z), stored with X as the fast index.
#[derive(Debug, Clone)]
pub struct JointDist {
    nx: usize,
    nz: usize,
    dist: Dist,
}

impl JointDist {
    pub fn new(nx: usize, nz: usize, weights: Vec<u64>) -> Result<Self, StatError> {
        if weights.len() != nx * nz {
            return Err(StatError::UniverseMismatch(weights.len(), nx * nz));
        }
        Ok(Self { nx, nz, dist: Dist::from_weights(weights)? })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn dist(&self) -> &Dist {
        &self.dist
    }

    fn slice(&self, z: usize) -> &[u64] {
        &self.dist.weights[z * self.nx..(z + 1) * self.nx]
    }

    pub fn marginal_x(&self) -> Dist {
        let mut w = vec![0u64; self.nx];
        for z in 0..self.nz {
            for (acc, &v) in w.iter_mut().zip(self.slice(z)) {
                *acc += v;
            }
        }
        Dist::from_weights(w).expect("joint is nonempty")
    }

    /// Σ_z max_x w(x, z); the average min-entropy is log₂(total / this).
    pub fn guess_mass(&self) -> u64 {
        (0..self.nz).map(|z| self.slice(z).iter().copied().max().unwrap_or(0)).sum()
    }

    pub fn z_support(&self) -> usize {
        (0..self.nz).filter(|&z| self.slice(z).iter().any(|&w| w > 0)).count()
    }

    /// (weight of z, max_x weight of (x, z)) for each z in the support.
    pub fn conditionals(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        (0..self.nz).filter_map(|z| {
            let s = self.slice(z);
            let wz: u64 = s.iter().sum();
            (wz > 0).then(|| (wz, s.iter().copied().max().unwrap()))
        })
    }
}

/// H̃∞(X|Z) = −log₂ E_z[max_x Pr[X = x | Z = z]].
pub fn avg_min_entropy(joint: &JointDist) -> f64 {
    (joint.dist.total as f64 / joint.guess_mass() as f64).log2()
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyReport {
    pub h_min: f64,
    pub h_avg_min: f64,
    /// Pr_z[H∞(X|Z=z) < H̃∞(X|Z) − log(1/ε)].
    pub deficiency_mass: f64,
}

/// Whether `H∞(X|Z=z) ≥ H̃∞(X|Z) − log(1/ε)` for the slice with weight `wz`
/// and top weight `mz`, decided exactly with ε = `eps.num / eps.den`.
fn slice_meets_floor(joint: &JointDist, wz: u64, mz: u64, eps: Ratio) -> bool {
    // mz / wz ≤ (1/ε)·S/T  ⟺  mz·T·ε.num ≤ S·wz·ε.den
    let t = joint.dist.total as u128;
    let s = joint.guess_mass() as u128;
    mz as u128 * t * eps.num <= s * wz as u128 * eps.den
}

pub fn entropy_report(joint: &JointDist, eps: Ratio) -> EntropyReport {
    let bad: u64 = joint.conditionals().filter(|&(wz, mz)| !slice_meets_floor(joint, wz, mz, eps)).map(|(wz, _)| wz).sum();
    EntropyReport {
        h_min: min_entropy(&joint.marginal_x()),
        h_avg_min: avg_min_entropy(joint),
        deficiency_mass: bad as f64 / joint.dist.total as f64,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MinEntLemmaCheck {
    pub h_x: f64,
    pub h_avg: f64,
    pub m_bits: u32,
    pub chain_holds: bool,
    pub eps: f64,
    pub good_mass: f64,
    pub concentration_holds: bool,
}

/// Both bullets of the average-min-entropy lemma, decided in integers:
/// H̃∞(X|Z) ≥ H∞(X) − m whenever |Supp Z| ≤ 2^m, and
/// Pr_z[H∞(X|Z=z) ≥ H̃∞(X|Z) − log(1/ε)] ≥ 1 − ε.
pub fn min_ent_lemma_check(joint: &JointDist, eps: Ratio) -> MinEntLemmaCheck {
    let supp = joint.z_support() as u64;
    let m_bits = 64 - (supp.max(1) - 1).leading_zeros();
    let mx = joint.marginal_x().max_weight() as u128;
    let chain_holds = joint.guess_mass() as u128 <= (1u128 << m_bits) * mx;
    let t = joint.dist.total as u128;
    let good: u64 = joint.conditionals().filter(|&(wz, mz)| slice_meets_floor(joint, wz, mz, eps)).map(|(wz, _)| wz).sum();
    let concentration_holds = good as u128 * eps.den >= (eps.den - eps.num) * t;
    MinEntLemmaCheck {
        h_x: min_entropy(&joint.marginal_x()),
        h_avg: avg_min_entropy(joint),
        m_bits,
        chain_holds,
        eps: eps.to_f64(),
        good_mass: good as f64 / t as f64,
        concentration_holds,
    }
}
