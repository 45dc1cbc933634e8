use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_flat, Layout, Task, TaskError};
use crate::coding::{RsCode, WrapCode};
use crate::crypto::ToyPrg;
use crate::field::{BitVec, Fe, Field};
use crate::sampler::{default_seed_bits, SubsetSampler};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskParams1 {
    pub name: String,
    pub lambda: u32,
    pub ell: u32,
    pub n: usize,
    pub k: usize,
    pub alpha: usize,
    pub beta: usize,
    /// Sampler seed lengths; default from the universe size.
    #[serde(default)]
    pub r1: Option<u32>,
    #[serde(default)]
    pub r2: Option<u32>,
}

/// Where the ground-truth strings come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Fixture1 {
    /// P = f₁(s), Q = f₂(s).
    #[default]
    Prg,
    /// P uniform, Q = f₂(s).
    UniformP,
    /// P = f₁(s), Q uniform.
    UniformQ,
}

/// Construction 1 context: codes, generators and samplers built from the
/// parameters.
#[derive(Debug, Clone)]
pub struct Task1 {
    params: TaskParams1,
    field: Field,
    enc: RsCode,
    f1: ToyPrg,
    f2: ToyPrg,
    samp1: SubsetSampler,
    samp2: SubsetSampler,
    wrap_u1: WrapCode,
    wrap_u2: WrapCode,
    budget: usize,
    noise: usize,
    layout: Layout,
}

impl Task1 {
    pub fn new(params: TaskParams1) -> Result<Self, TaskError> {
        let TaskParams1 { lambda, ell, n, k, alpha, beta, .. } = params;
        let lam = lambda as usize;
        if !(n <= lam && lam <= alpha && alpha <= beta) {
            return Err(TaskError::Params(format!("need n ≤ λ ≤ α ≤ β, got {n}, {lam}, {alpha}, {beta}")));
        }
        if k == 0 || 3 * k >= n {
            return Err(TaskError::Params(format!("rate {k}/{n} is not in (0, 1/3)")));
        }
        if lambda > 64 {
            return Err(TaskError::Params("λ > 64".into()));
        }
        if k * ell as usize > alpha || n * ell as usize > beta {
            return Err(TaskError::Params("sampled subsets exceed the PRG outputs".into()));
        }
        let field = Field::with_ell(ell).map_err(|e| TaskError::Params(e.to_string()))?;
        let enc = RsCode::new(&field, n, k)?;
        let budget = (n - k) / 2;
        // ⌊(1 − 3R)n/2⌋
        let noise = (n - 3 * k) / 2;
        let r1 = params.r1.unwrap_or_else(|| default_seed_bits(alpha as u32));
        let r2 = params.r2.unwrap_or_else(|| default_seed_bits(beta as u32));
        let samp1 = SubsetSampler::new(alpha as u32, (k * ell as usize) as u32, r1, "paramsep/c1/samp1")?;
        let samp2 = SubsetSampler::new(beta as u32, (n * ell as usize) as u32, r2, "paramsep/c1/samp2")?;
        // the wrappers must correct strictly more than (1 − R)n/2 errors
        let wrap_radius = (n - k) / 2 + 1;
        let wrap_u1 = WrapCode::for_radius(&field, r1 as usize, wrap_radius)?;
        let wrap_u2 = WrapCode::for_radius(&field, r2 as usize, wrap_radius)?;
        let f1 = ToyPrg::new(lambda, alpha, "paramsep/c1/f1")?;
        let f2 = ToyPrg::new(lambda, beta, "paramsep/c1/f2")?;
        let layout = Layout::new(&[("u1", wrap_u1.len()), ("u2", wrap_u2.len()), ("m", k), ("masked", n)]);
        Ok(Self { params, field, enc, f1, f2, samp1, samp2, wrap_u1, wrap_u2, budget, noise, layout })
    }

    pub fn params(&self) -> &TaskParams1 {
        &self.params
    }

    pub fn enc(&self) -> &RsCode {
        &self.enc
    }

    pub fn f1(&self) -> &ToyPrg {
        &self.f1
    }

    pub fn f2(&self) -> &ToyPrg {
        &self.f2
    }

    pub fn samp1(&self) -> &SubsetSampler {
        &self.samp1
    }

    pub fn samp2(&self) -> &SubsetSampler {
        &self.samp2
    }

    pub fn wrap_u1(&self) -> &WrapCode {
        &self.wrap_u1
    }

    pub fn wrap_u2(&self) -> &WrapCode {
        &self.wrap_u2
    }

    /// |T| of the noise-planting attack, ⌊(1 − 3R)n/2⌋.
    pub fn noise_positions(&self) -> usize {
        self.noise
    }

    pub fn alpha(&self) -> usize {
        self.params.alpha
    }

    pub fn beta(&self) -> usize {
        self.params.beta
    }

    /// Q|_{samp₂(u₂)} as n symbols, bits in ascending index order.
    pub fn mask(&self, q: &BitVec, u2: u64) -> Vec<Fe> {
        q.restrict(&self.samp2.samp_u64(u2)).to_symbols(self.field.ell())
    }

    /// m as a kℓ-bit string, symbol i at bits [iℓ, (i+1)ℓ).
    pub fn m_bits(&self, m: &[Fe]) -> BitVec {
        BitVec::from_symbols(m, self.field.ell(), self.params.k * self.field.ell() as usize).expect("k symbols")
    }

    /// ⟨m, P|_{samp₁(u₁)}⟩ over GF(2).
    pub fn hypothesis(&self, p: &BitVec, u1: u64, m: &[Fe]) -> bool {
        self.m_bits(m).inner(&p.restrict(&self.samp1.samp_u64(u1))).expect("kℓ bits")
    }

    pub fn decode_u1(&self, x: &Instance1) -> Result<u64, TaskError> {
        Ok(self.wrap_u1.decode(&x.u1_enc)?.to_u64())
    }

    pub fn decode_u2(&self, x: &Instance1) -> Result<u64, TaskError> {
        Ok(self.wrap_u2.decode(&x.u2_enc)?.to_u64())
    }
}

impl Task for Task1 {
    type Instance = Instance1;

    fn field(&self) -> &Field {
        &self.field
    }

    fn layout(&self) -> &Layout {
        &self.layout
    }

    fn budget(&self) -> usize {
        self.budget
    }

    fn flatten(&self, x: &Instance1) -> Vec<Fe> {
        [&x.u1_enc[..], &x.u2_enc, &x.m, &x.masked].concat()
    }

    fn unflatten(&self, v: &[Fe]) -> Result<Instance1, TaskError> {
        check_flat(&self.field, &self.layout, v)?;
        let s = self.layout.split(v);
        Ok(Instance1 { u1_enc: s[0].to_vec(), u2_enc: s[1].to_vec(), m: s[2].to_vec(), masked: s[3].to_vec() })
    }
}

/// Ground truth (P, Q) of one distribution in the family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Secret1 {
    pub p: BitVec,
    pub q: BitVec,
    /// Seed s when P or Q comes from the generators.
    pub seed: Option<u64>,
}

impl Secret1 {
    pub fn from_seed(task: &Task1, s: u64) -> Self {
        Self { p: task.f1.expand_u64(s), q: task.f2.expand_u64(s), seed: Some(s) }
    }

    pub fn draw<R: Rng + ?Sized>(task: &Task1, fixture: Fixture1, rng: &mut R) -> Self {
        let lam = task.params.lambda;
        let s = if lam == 64 { rng.random() } else { rng.random_range(0..1u64 << lam) };
        let mut out = Self::from_seed(task, s);
        match fixture {
            Fixture1::Prg => {}
            Fixture1::UniformP => out.p = random_bits(task.params.alpha, rng),
            Fixture1::UniformQ => out.q = random_bits(task.params.beta, rng),
        }
        out
    }
}

pub(crate) fn random_bits<R: Rng + ?Sized>(len: usize, rng: &mut R) -> BitVec {
    BitVec::from_words((0..len.div_ceil(64)).map(|_| rng.random()).collect(), len)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance1 {
    pub u1_enc: Vec<Fe>,
    pub u2_enc: Vec<Fe>,
    pub m: Vec<Fe>,
    pub masked: Vec<Fe>,
}

/// Draw ([u₁], [u₂], m, Enc(m) + Q|_{samp₂(u₂)}) and its label ⟨m, P|_{samp₁(u₁)}⟩.
pub fn sample_c1<R: Rng + ?Sized>(task: &Task1, secret: &Secret1, rng: &mut R) -> (Instance1, bool) {
    let u1 = draw_seed(task.samp1.seed_bits(), rng);
    let u2 = draw_seed(task.samp2.seed_bits(), rng);
    let m: Vec<Fe> = (0..task.params.k).map(|_| task.field.elem(rng.random())).collect();
    let mut masked = task.enc.encode(&m).expect("k symbols");
    for (c, z) in masked.iter_mut().zip(task.mask(&secret.q, u2)) {
        *c += z;
    }
    let label = task.hypothesis(&secret.p, u1, &m);
    let x = Instance1 {
        u1_enc: task.wrap_u1.encode(&BitVec::from_u64(u1, task.samp1.seed_bits() as usize)).expect("seed bits"),
        u2_enc: task.wrap_u2.encode(&BitVec::from_u64(u2, task.samp2.seed_bits() as usize)).expect("seed bits"),
        m,
        masked,
    };
    (x, label)
}

pub(crate) fn draw_seed<R: Rng + ?Sized>(bits: u32, rng: &mut R) -> u64 {
    if bits == 64 {
        rng.random()
    } else {
        rng.random_range(0..1u64 << bits)
    }
}

/// h(x) on an unperturbed instance: u₁ from its wrapper, m from the clear.
pub fn label_c1(task: &Task1, x: &Instance1, secret: &Secret1) -> Result<bool, TaskError> {
    Ok(task.hypothesis(&secret.p, task.decode_u1(x)?, &x.m))
}
