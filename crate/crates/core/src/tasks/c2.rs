use rand::Rng;
use serde::{Deserialize, Serialize};

use super::c1::{draw_seed, random_bits};
use super::{check_flat, sqrt_budget, Layout, Task, TaskError};
use crate::coding::{RsCode, WrapCode};
use crate::crypto::{ots_gen, ots_sign, Signature, SigningKey, ToyHash, VerifyingKey};
use crate::field::{BitVec, Fe, Field};
use crate::sampler::{default_seed_bits, SubsetSampler};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskParams2 {
    pub name: String,
    pub lambda: u32,
    pub ell: u32,
    pub n: usize,
    pub k: usize,
    pub alpha: usize,
    pub hash_bits: u32,
    #[serde(default)]
    pub r: Option<u32>,
}

/// Construction 2 context.
#[derive(Debug, Clone)]
pub struct Task2 {
    params: TaskParams2,
    field: Field,
    lenc: RsCode,
    samp: SubsetSampler,
    hash: ToyHash,
    wrap_u: WrapCode,
    wrap_v: WrapCode,
    wrap_vk: WrapCode,
    wrap_bit: WrapCode,
    budget: usize,
    layout: Layout,
}

impl Task2 {
    pub fn new(params: TaskParams2) -> Result<Self, TaskError> {
        let TaskParams2 { lambda, ell, n, k, alpha, hash_bits, .. } = params;
        let lam = lambda as usize;
        if !(n <= lam && lam <= alpha) {
            return Err(TaskError::Params(format!("need n ≤ λ ≤ α, got {n}, {lam}, {alpha}")));
        }
        if k == 0 || 4 * k >= n {
            return Err(TaskError::Params(format!("rate {k}/{n} is not in (0, 1/4)")));
        }
        if 1 + hash_bits as usize > k * ell as usize {
            return Err(TaskError::Params(format!("(b, σ) needs {} bits but k·ℓ = {}", 1 + hash_bits, k * ell as usize)));
        }
        let field = Field::with_ell(ell).map_err(|e| TaskError::Params(e.to_string()))?;
        let lenc = RsCode::new(&field, n, k)?;
        let budget = sqrt_budget(n, k);
        debug_assert!(budget <= lenc.list_radius());
        let hash = ToyHash::new(hash_bits)?;
        let r = params.r.unwrap_or_else(|| default_seed_bits(alpha as u32));
        let samp = SubsetSampler::new(alpha as u32, n as u32, r, "paramsep/c2/samp")?;
        let radius = budget + 1;
        let wrap_u = WrapCode::for_radius(&field, r as usize, radius)?;
        let wrap_v = WrapCode::for_radius(&field, n, radius)?;
        let wrap_vk = WrapCode::for_radius(&field, 2 * hash_bits as usize, radius)?;
        let wrap_bit = WrapCode::for_radius(&field, 1, radius)?;
        let layout = Layout::new(&[
            ("u", wrap_u.len()),
            ("v", wrap_v.len()),
            ("vk", wrap_vk.len()),
            ("sig", n),
            ("bit", wrap_bit.len()),
        ]);
        Ok(Self { params, field, lenc, samp, hash, wrap_u, wrap_v, wrap_vk, wrap_bit, budget, layout })
    }

    pub fn params(&self) -> &TaskParams2 {
        &self.params
    }

    pub fn lenc(&self) -> &RsCode {
        &self.lenc
    }

    pub fn samp(&self) -> &SubsetSampler {
        &self.samp
    }

    pub fn hash(&self) -> ToyHash {
        self.hash
    }

    pub fn wrap_u(&self) -> &WrapCode {
        &self.wrap_u
    }

    pub fn wrap_v(&self) -> &WrapCode {
        &self.wrap_v
    }

    pub fn wrap_vk(&self) -> &WrapCode {
        &self.wrap_vk
    }

    pub fn wrap_bit(&self) -> &WrapCode {
        &self.wrap_bit
    }

    pub fn alpha(&self) -> usize {
        self.params.alpha
    }

    /// Same task with a different signature hash width.
    pub fn with_hash_bits(&self, hash_bits: u32) -> Result<Self, TaskError> {
        Self::new(TaskParams2 { hash_bits, ..self.params.clone() })
    }

    pub fn vk_bits(&self, vk: &VerifyingKey) -> BitVec {
        let h = self.hash.bits() as usize;
        BitVec::from_u64(vk.h[0], h).concat(&BitVec::from_u64(vk.h[1], h))
    }

    pub fn decode_vk(&self, x: &Instance2) -> Result<VerifyingKey, TaskError> {
        let bits = self.wrap_vk.decode(&x.vk_enc)?;
        let h = self.hash.bits() as usize;
        Ok(VerifyingKey { hash: self.hash, h: [bits.slice(0, h).to_u64(), bits.slice(h, h).to_u64()] })
    }

    /// LEnc(b, σ).
    pub fn sig_codeword(&self, b: bool, sig: Signature) -> Vec<Fe> {
        self.lenc.encode(&pack_sig(self, b, sig)).expect("k symbols")
    }

    /// ⟨v, s|_{samp(u)}⟩.
    pub fn mask_bit(&self, s: &BitVec, u: u64, v: &BitVec) -> bool {
        v.inner(&s.restrict(&self.samp.samp_u64(u))).expect("n bits")
    }
}

impl Task for Task2 {
    type Instance = Instance2;

    fn field(&self) -> &Field {
        &self.field
    }

    fn layout(&self) -> &Layout {
        &self.layout
    }

    fn budget(&self) -> usize {
        self.budget
    }

    fn flatten(&self, x: &Instance2) -> Vec<Fe> {
        [&x.u_enc[..], &x.v_enc, &x.vk_enc, &x.sig_block, &x.bit_enc].concat()
    }

    fn unflatten(&self, v: &[Fe]) -> Result<Instance2, TaskError> {
        check_flat(&self.field, &self.layout, v)?;
        let s = self.layout.split(v);
        Ok(Instance2 {
            u_enc: s[0].to_vec(),
            v_enc: s[1].to_vec(),
            vk_enc: s[2].to_vec(),
            sig_block: s[3].to_vec(),
            bit_enc: s[4].to_vec(),
        })
    }
}

/// (b, σ) as k symbols: b at bit 0, σ at bits 1..=h, zero padding above.
pub fn pack_sig(task: &Task2, b: bool, sig: Signature) -> Vec<Fe> {
    let ell = task.field.ell();
    let kl = task.params.k * ell as usize;
    let mut bits = BitVec::zeros(kl);
    bits.set(0, b);
    for i in 0..task.hash.bits() as usize {
        bits.set(1 + i, (sig.0 >> i) & 1 == 1);
    }
    bits.to_symbols(ell)
}

/// Inverse of [`pack_sig`]; `None` if any padding bit is set.
pub fn unpack_sig(task: &Task2, msg: &[Fe]) -> Option<(bool, Signature)> {
    let ell = task.field.ell();
    let bits = BitVec::from_symbols(msg, ell, task.params.k * ell as usize)?;
    let h = task.hash.bits() as usize;
    if (1 + h..bits.len()).any(|i| bits.get(i)) {
        return None;
    }
    Some((bits.get(0), Signature(bits.slice(1, h).to_u64())))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Secret2 {
    pub s: BitVec,
}

impl Secret2 {
    pub fn draw<R: Rng + ?Sized>(task: &Task2, rng: &mut R) -> Self {
        Self { s: random_bits(task.params.alpha, rng) }
    }

    pub fn zero(task: &Task2) -> Self {
        Self { s: BitVec::zeros(task.params.alpha) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance2 {
    pub u_enc: Vec<Fe>,
    pub v_enc: Vec<Fe>,
    pub vk_enc: Vec<Fe>,
    pub sig_block: Vec<Fe>,
    pub bit_enc: Vec<Fe>,
}

/// Draw ([u], [v], [vk], LEnc(b, Sign(sk, b)), [b ⊕ ⟨v, s|_{samp(u)}⟩]) with
/// a fresh key pair. Returns the instance, the label b, and the signing key
/// (for oracle-mode attacks only).
pub fn sample_c2<R: Rng + ?Sized>(task: &Task2, secret: &Secret2, rng: &mut R) -> (Instance2, bool, SigningKey) {
    let u = draw_seed(task.samp.seed_bits(), rng);
    let v = random_bits(task.params.n, rng);
    let keys = ots_gen(task.hash, rng);
    let b: bool = rng.random();
    let sig = ots_sign(&keys.sk, b);
    let payload = b ^ task.mask_bit(&secret.s, u, &v);
    let x = Instance2 {
        u_enc: task.wrap_u.encode(&BitVec::from_u64(u, task.samp.seed_bits() as usize)).expect("seed bits"),
        v_enc: task.wrap_v.encode(&v).expect("n bits"),
        vk_enc: task.wrap_vk.encode(&task.vk_bits(&keys.vk)).expect("2h bits"),
        sig_block: task.sig_codeword(b, sig),
        bit_enc: task.wrap_bit.encode(&BitVec::from_bools(&[payload])).expect("1 bit"),
    };
    (x, b, keys.sk)
}

/// h(x): unique-decode the unperturbed signature block and return b.
pub fn label_c2(task: &Task2, x: &Instance2) -> Result<bool, TaskError> {
    let msg = task.lenc.unique_decode(&x.sig_block)?;
    unpack_sig(task, &msg).map(|(b, _)| b).ok_or(TaskError::Coding(crate::coding::CodingError::DecodeFailure))
}
