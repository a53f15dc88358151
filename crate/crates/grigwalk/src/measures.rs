//! Assumption Fr(D), the index sets W_k^n and V_k^j, conjugated generators
//! 𝔠_j^v, modified elements g̃_j^v, the sets 𝔉_{j,n}, and mixture samplers for
//! υ_n, μ_β, η₀ and η₂.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::core_tree::{iota, Digits, Element, Expr, GroupCtx, Letter, Vertex};
use crate::error::{Error, Result};
use crate::grigorchuk::OmegaString;
use crate::subst_calculus::{build_gn, build_hn, length_ln};

/// Largest support enumerated exhaustively.
pub const MAX_ENUMERATION_LOG2: u32 = 20;

/// Outcome of the Fr(D) scan of a (possibly shifted) string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrReport {
    pub d: usize,
    /// Number of leading digits removed before the scan.
    pub shift: usize,
    /// The shifted string s^shift ω.
    pub omega: OmegaString,
    /// m_k for the blocks before the cycle and for one cycle of blocks.
    m: Vec<usize>,
    pre_blocks: usize,
    cycle: usize,
}

/// The first D-block without 201 or 211.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrWitness {
    pub d: usize,
    pub shift: usize,
    pub block: usize,
    pub digits: Vec<u8>,
}

impl FrReport {
    /// m_k for any block index k.
    pub fn m(&self, k: usize) -> usize {
        if k < self.pre_blocks {
            self.m[k]
        } else {
            self.m[self.pre_blocks + (k - self.pre_blocks) % self.cycle]
        }
    }

    /// Membership in I_ω = {kD + m_k + 3}.
    pub fn in_i(&self, pos: usize) -> bool {
        if pos < 3 {
            return false;
        }
        let k = (pos - 3) / self.d;
        (pos - 3) % self.d == self.m(k)
    }

    /// Elements of I_ω up to a bound.
    pub fn i_set(&self, upto: usize) -> Vec<usize> {
        (0..=upto).filter(|p| self.in_i(*p)).collect()
    }

    pub fn m_values(&self, blocks: usize) -> Vec<usize> {
        (0..blocks).map(|k| self.m(k)).collect()
    }
}

/// Scan the D-blocks of ω for 201 or 211, without shifting.
pub fn check_fr(om: &OmegaString, d: usize) -> std::result::Result<FrReport, FrWitness> {
    scan_fr(om, d, 0)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn scan_fr(om: &OmegaString, d: usize, shift: usize) -> std::result::Result<FrReport, FrWitness> {
    let s = om.shift(shift);
    let q = s.period().len();
    let pre_blocks = s.preperiod().len().div_ceil(d.max(1));
    let cycle = q / gcd(q, d);
    if d < 3 {
        return Err(FrWitness { d, shift, block: 0, digits: vec![] });
    }
    let mut m = Vec::with_capacity(pre_blocks + cycle);
    for k in 0..pre_blocks + cycle {
        let block: Vec<u8> = (k * d..k * d + d).map(|i| s.digit(i)).collect();
        let found = (0..=d - 3).find(|&i| block[i] == 2 && block[i + 2] == 1 && block[i + 1] != 2);
        match found {
            Some(i) => m.push(i),
            None => return Err(FrWitness { d, shift, block: k, digits: block }),
        }
    }
    Ok(FrReport { d, shift, omega: s, m, pre_blocks, cycle })
}

/// Fr(D) with shift normalization: tries shifts 0..D and returns the first
/// passing report, or the unshifted failure witness.
pub fn check_fr_d(om: &OmegaString, d: usize) -> std::result::Result<FrReport, FrWitness> {
    let first = scan_fr(om, d, 0);
    if first.is_ok() {
        return first;
    }
    for shift in 1..d {
        if let Ok(r) = scan_fr(om, d, shift) {
            return Ok(r);
        }
    }
    first
}

/// Free positions (1-based) of W_k^n: those i ≤ k with n+i ∈ I_ω.
pub fn wk_free_positions(fr: &FrReport, n: usize, k: usize) -> Result<Vec<usize>> {
    if !n.is_multiple_of(fr.d) || !k.is_multiple_of(fr.d) {
        return Err(Error::Precondition(format!("W_k^n needs D | n and D | k (n={n}, k={k}, D={})", fr.d)));
    }
    Ok((1..=k).filter(|i| fr.in_i(n + i)).collect())
}

fn enumerate_free(len: usize, free: &[usize]) -> Result<Vec<Vec<u8>>> {
    if free.len() as u32 > MAX_ENUMERATION_LOG2 {
        return Err(Error::BoundExceeded(1 << MAX_ENUMERATION_LOG2));
    }
    let mut out = Vec::with_capacity(1 << free.len());
    for mask in 0u64..(1u64 << free.len()) {
        let mut u = vec![1u8; len];
        for (b, &p) in free.iter().enumerate() {
            if (mask >> b) & 1 == 1 {
                u[p - 1] = 0;
            }
        }
        out.push(u);
    }
    Ok(out)
}

/// The set W_k^n.
pub fn build_wk(fr: &FrReport, n: usize, k: usize) -> Result<Vec<Vec<u8>>> {
    let free = wk_free_positions(fr, n, k)?;
    enumerate_free(k, &free)
}

/// Layout of V_k^j = {1^{D−j̄} u 1^{m_ℓ+2} 0 : u ∈ W_k^{j+D−j̄}}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VShape {
    pub j: usize,
    pub k: usize,
    /// Length k′ of every vertex.
    pub len: usize,
    /// Free positions (1-based, within v).
    pub free: Vec<usize>,
}

impl VShape {
    pub fn new(fr: &FrReport, j: usize, k: usize) -> Result<Self> {
        let d = fr.d;
        let jbar = j % d;
        let n = j + d - jbar;
        let u_free = wk_free_positions(fr, n, k)?;
        let ell = (j + d - jbar + k) / d;
        let m = fr.m(ell);
        let len = d - jbar + k + m + 3;
        let free = u_free.into_iter().map(|i| d - jbar + i).collect();
        Ok(VShape { j, k, len, free })
    }

    /// The vertex with the given free digits (bit b of mask set means 0).
    pub fn vertex(&self, zeros_mask: u64) -> Vec<u8> {
        let mut v = vec![1u8; self.len];
        v[self.len - 1] = 0;
        for (b, &p) in self.free.iter().enumerate() {
            if (zeros_mask >> b) & 1 == 1 {
                v[p - 1] = 0;
            }
        }
        v
    }

    /// Free positions beyond a forced prefix of ones.
    pub fn free_after(&self, prefix: usize) -> Vec<usize> {
        self.free.iter().copied().filter(|p| *p > prefix).collect()
    }

    /// Uniform vertex among those starting with 1^prefix.
    pub fn sample<R: Rng + ?Sized>(&self, prefix: usize, rng: &mut R) -> Vec<u8> {
        let mut v = vec![1u8; self.len];
        v[self.len - 1] = 0;
        for p in self.free_after(prefix) {
            v[p - 1] = rng.gen_range(0..2u8);
        }
        v
    }

    /// All vertices starting with 1^prefix.
    pub fn enumerate(&self, prefix: usize) -> Result<Vec<Vec<u8>>> {
        let free = self.free_after(prefix);
        let mut all = enumerate_free(self.len, &free)?;
        for v in &mut all {
            v[self.len - 1] = 0;
        }
        Ok(all)
    }
}

/// A vertex of V_k^j with its parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexVertex {
    pub v: Vec<u8>,
    pub j: usize,
    pub k: usize,
}

/// The set V_k^j.
pub fn build_vk(fr: &FrReport, j: usize, k: usize) -> Result<Vec<IndexVertex>> {
    let shape = VShape::new(fr, j, k)?;
    Ok(shape.enumerate(0)?.into_iter().map(|v| IndexVertex { v, j, k }).collect())
}

fn check_hv(om: &OmegaString, j: usize, v: &[u8], i: usize) -> Result<()> {
    if i < 2 || i > v.len() {
        return Err(Error::Precondition(format!("h_i^v needs 2 ≤ i ≤ |v| with v_i = 0 (i={i})")));
    }
    if i >= 3 && om.digit(j + i - 3) != 2 {
        return Err(Error::Precondition(format!("digit at level {} is not 2", j + i - 3)));
    }
    Ok(())
}

/// h_i^v = ι([b, a], v₁…v_{i−2}) of level j when v_i = 0, id otherwise.
pub fn conjugator_h(om: &OmegaString, j: usize, v: &[u8], i: usize) -> Result<Expr> {
    if v[i - 1] == 1 {
        return Ok(Expr::identity(j));
    }
    check_hv(om, j, v, i)?;
    let child = Expr::word(j + i - 2, vec![Letter::B, Letter::A, Letter::B, Letter::A]);
    Expr::rist(om, j, child, v[..i - 2].to_vec())
}

/// Flat word of h_i^v.
pub fn conjugator_h_flat(ctx: &Arc<GroupCtx>, j: usize, v: &[u8], i: usize) -> Result<Element> {
    if v[i - 1] == 1 {
        return Ok(Element::identity(ctx, j));
    }
    check_hv(ctx.omega(), j, v, i)?;
    iota(ctx, j, Letter::B, &Vertex::new(v[..i - 2].to_vec()))
}

/// The conjugator h₁^v⋯h_{k′}^v.
pub fn conjugator_product(om: &OmegaString, j: usize, v: &[u8]) -> Result<Expr> {
    let hs = (1..=v.len()).map(|i| conjugator_h(om, j, v, i)).collect::<Result<Vec<_>>>()?;
    Expr::product(om, j, hs)
}

/// 𝔠_j^v = H⁻¹ c H with H = h₁^v⋯h_{k′}^v.
pub fn build_ckv(om: &OmegaString, j: usize, v: &[u8]) -> Result<Expr> {
    let h = conjugator_product(om, j, v)?;
    Expr::product(om, j, vec![h.inverse(om)?, Expr::letter(j, Letter::C), h])
}

/// Flat word of 𝔠_j^v.
pub fn build_ckv_flat(ctx: &Arc<GroupCtx>, j: usize, v: &[u8]) -> Result<Element> {
    let mut h = Element::identity(ctx, j);
    for i in 1..=v.len() {
        h = h.multiply(&conjugator_h_flat(ctx, j, v, i)?)?;
    }
    h.inverse().multiply(&Element::generator(ctx, j, Letter::C))?.multiply(&h)
}

/// Predicted nontrivial sections of 𝔠_j^v along v: at the sibling
/// v₁…v_i0 (when v_{i+1} = 1 and ω_{j+i} ≠ 1) the section is bab when
/// v_{i+2} = 0 and a otherwise; the section at v is c.
pub fn ckv_predicted_portrait(om: &OmegaString, j: usize, v: &[u8]) -> Vec<(Vec<u8>, Vec<Letter>)> {
    let k = v.len();
    let mut out = Vec::new();
    for i in 0..k {
        let mut u = v[..i].to_vec();
        u.push(v[i] ^ 1);
        let w = if v[i] == 1 && om.digit(j + i) != 1 {
            if i + 2 <= k && v[i + 1] == 0 {
                vec![Letter::B, Letter::A, Letter::B]
            } else {
                vec![Letter::A]
            }
        } else {
            vec![]
        };
        out.push((u, w));
    }
    out.push((v.to_vec(), vec![Letter::C]));
    out
}

/// Compare the portrait of 𝔠_j^v along v with the prediction; returns the
/// first mismatching vertex.
pub fn ckv_portrait_check(ctx: &Arc<GroupCtx>, j: usize, v: &[u8]) -> Result<Option<Vec<u8>>> {
    let om = ctx.omega();
    let ck = build_ckv(om, j, v)?;
    let fixed = ck.act_vertex(om, v) == v;
    if !fixed {
        return Ok(Some(v.to_vec()));
    }
    for (u, w) in ckv_predicted_portrait(om, j, v) {
        let s = ck.section(om, &u)?;
        let sw = s.to_word(om, 1 << 24)?;
        let level = j + u.len();
        let got = Element::from_letters(ctx, level, &sw);
        let want = Element::from_letters(ctx, level, &w);
        if !got.equals(&want)? {
            return Ok(Some(u));
        }
    }
    Ok(None)
}

/// g̃_j^v with its index vertex.
#[derive(Clone, Debug)]
pub struct ModifiedGenerator {
    pub j: usize,
    pub v: Vec<u8>,
    pub element: Expr,
}

impl ModifiedGenerator {
    /// Predicted bad-germ locations B(j,v) = {x₁…x_{j+1}v₂…v_{k′}1^∞ :
    /// j+1+Σxᵢ odd}, as prefixes.
    pub fn predicted_locations(&self) -> Vec<Vec<u8>> {
        let j = self.j;
        let mut out = Vec::with_capacity(1 << j);
        for mask in 0u64..(1u64 << (j + 1)) {
            let x: Vec<u8> = (0..=j).map(|i| ((mask >> i) & 1) as u8).collect();
            let s: usize = x.iter().map(|b| *b as usize).sum();
            if (j + 1 + s) % 2 == 1 {
                let mut p = x;
                p.extend_from_slice(&self.v[1..]);
                out.push(p);
            }
        }
        out
    }
}

/// g̃_j^v = ζ_{ω₀}∘…∘ζ_{ω_{j−1}}(a𝔠_j^v).
pub fn build_gjv(om: &OmegaString, j: usize, v: &[u8]) -> Result<ModifiedGenerator> {
    let ck = build_ckv(om, j, v)?;
    let inner = Expr::product(om, j, vec![Expr::letter(j, Letter::A), ck])?;
    let element = Expr::zeta_chain(om, 0, j, inner)?;
    Ok(ModifiedGenerator { j, v: v.to_vec(), element })
}

/// Flat word of g̃_j^v, for cross-checks at small size.
pub fn build_gjv_flat(ctx: &Arc<GroupCtx>, j: usize, v: &[u8]) -> Result<Element> {
    let om = ctx.omega();
    let ck = build_ckv_flat(ctx, j, v)?;
    let inner = Element::generator(ctx, j, Letter::A).multiply(&ck)?;
    let w = crate::subst_calculus::zeta_chain_word(om, j, inner.letters())?;
    Ok(Element::from_letters(ctx, 0, &w))
}

/// The set 𝔉_{j,n}: either {g_j} or modified elements indexed by vertices of
/// V_{2k_n}^j with prefix 1^{n−j+D}.
#[derive(Clone, Debug)]
pub enum FjnKind {
    Single(Expr),
    Modified { shape: VShape, prefix: usize },
}

#[derive(Clone, Debug)]
pub struct Fjn {
    pub j: usize,
    pub n: usize,
    pub kind: FjnKind,
}

impl Fjn {
    pub fn new(fr: &FrReport, j: usize, n: usize, k_n: usize) -> Result<Self> {
        let om = &fr.omega;
        let d = fr.d;
        if j == 0 || j > n {
            return Err(Error::Precondition(format!("need 1 ≤ j ≤ n (j={j}, n={n})")));
        }
        if om.digit(j - 1) == 2 && n < j + k_n {
            let shape = VShape::new(fr, j, 2 * k_n)?;
            Ok(Fjn { j, n, kind: FjnKind::Modified { shape, prefix: n - j + d } })
        } else {
            Ok(Fjn { j, n, kind: FjnKind::Single(build_gn(om, j)?) })
        }
    }

    pub fn is_modified(&self) -> bool {
        matches!(self.kind, FjnKind::Modified { .. })
    }

    /// log₂ |𝔉_{j,n}|.
    pub fn log2_card(&self) -> u32 {
        match &self.kind {
            FjnKind::Single(_) => 0,
            FjnKind::Modified { shape, prefix } => shape.free_after(*prefix).len() as u32,
        }
    }

    /// Uniform element; also returns the index vertex when modified.
    pub fn sample<R: Rng + ?Sized>(&self, om: &OmegaString, rng: &mut R) -> Result<(Expr, Option<Vec<u8>>)> {
        match &self.kind {
            FjnKind::Single(g) => Ok((g.clone(), None)),
            FjnKind::Modified { shape, prefix } => {
                let v = shape.sample(*prefix, rng);
                Ok((build_gjv(om, self.j, &v)?.element, Some(v)))
            }
        }
    }

    /// Index vertices (empty for the singleton case).
    pub fn index_vertices(&self) -> Result<Vec<Vec<u8>>> {
        match &self.kind {
            FjnKind::Single(_) => Ok(vec![]),
            FjnKind::Modified { shape, prefix } => shape.enumerate(*prefix),
        }
    }

    /// All elements of the set.
    pub fn enumerate(&self, om: &OmegaString) -> Result<Vec<Expr>> {
        match &self.kind {
            FjnKind::Single(g) => Ok(vec![g.clone()]),
            FjnKind::Modified { .. } => self
                .index_vertices()?
                .into_iter()
                .map(|v| Ok(build_gjv(om, self.j, &v)?.element))
                .collect(),
        }
    }
}

/// Metadata of a sampled element.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleMeta {
    /// Scale parameter n of the component, when it has one.
    pub n: Option<usize>,
    /// ε-tuple (ε₁,…,ε_n).
    pub eps: Vec<u8>,
    /// Index vertex chosen for each modified factor, by j.
    pub choices: Vec<Option<Vec<u8>>>,
    pub inverse: bool,
}

/// A sampled group element given as factors applied left to right.
#[derive(Clone, Debug)]
pub struct Sample {
    pub component: usize,
    pub factors: Vec<Expr>,
    pub meta: SampleMeta,
}

impl Sample {
    pub fn identity() -> Self {
        Sample { component: 0, factors: vec![], meta: SampleMeta::default() }
    }

    /// Act on a ray; returns the xor-encoded germ at the starting point.
    pub fn act(&self, om: &OmegaString, x: &mut Digits) -> u8 {
        self.factors.iter().fold(0u8, |g, f| g ^ f.act(om, x, 0))
    }

    /// Construction length (upper bound on word length).
    pub fn construction_len(&self) -> u128 {
        self.factors.iter().fold(0u128, |a, f| a.saturating_add(f.construction_len()))
    }

    pub fn to_expr(&self, om: &OmegaString) -> Result<Expr> {
        Expr::product(om, 0, self.factors.clone())
    }

    pub fn to_element(&self, ctx: &Arc<GroupCtx>, max_len: u128) -> Result<Element> {
        let w = self.to_expr(ctx.omega())?.to_word(ctx.omega(), max_len)?;
        Ok(Element::from_letters(ctx, 0, &w))
    }

    pub fn inverse(&self, om: &OmegaString) -> Result<Sample> {
        let factors = self.factors.iter().rev().map(|f| f.inverse(om)).collect::<Result<Vec<_>>>()?;
        let mut meta = self.meta.clone();
        meta.inverse = !meta.inverse;
        Ok(Sample { component: self.component, factors, meta })
    }
}

/// The uniformised quasi-cubic measure υ_n.
#[derive(Clone, Debug)]
pub struct Upsilon {
    pub n: usize,
    pub k_n: usize,
    /// 𝔉_{j,n} for j = 1..n (index j−1).
    pub sets: Vec<Fjn>,
}

impl Upsilon {
    pub fn new(fr: &FrReport, n: usize, k_n: usize) -> Result<Self> {
        if !n.is_multiple_of(fr.d) || !k_n.is_multiple_of(fr.d) {
            return Err(Error::Precondition(format!("υ_n needs D | n and D | k_n (n={n}, k_n={k_n})")));
        }
        let sets = (1..=n).map(|j| Fjn::new(fr, j, n, k_n)).collect::<Result<Vec<_>>>()?;
        Ok(Upsilon { n, k_n, sets })
    }

    /// log₂ |Λ_n|.
    pub fn log2_support(&self) -> u32 {
        self.n as u32 + self.sets.iter().map(|s| s.log2_card()).sum::<u32>()
    }

    /// γ_n^{ε_n}⋯γ₁^{ε₁} with ε and γ independent and uniform.
    pub fn sample<R: Rng + ?Sized>(&self, om: &OmegaString, rng: &mut R) -> Result<Sample> {
        let mut eps = vec![0u8; self.n];
        let mut choices = vec![None; self.n];
        let mut factors = Vec::new();
        for j in (1..=self.n).rev() {
            let e = rng.gen_range(0..2u8);
            eps[j - 1] = e;
            let (g, v) = self.sets[j - 1].sample(om, rng)?;
            choices[j - 1] = v;
            if e == 1 {
                factors.push(g);
            }
        }
        Ok(Sample { component: 0, factors, meta: SampleMeta { n: Some(self.n), eps, choices, inverse: false } })
    }

    /// Every point of Λ_n as (ε, γ-choices, factors).
    pub fn enumerate_support(&self, om: &OmegaString) -> Result<Vec<Sample>> {
        if self.log2_support() > MAX_ENUMERATION_LOG2 {
            return Err(Error::BoundExceeded(1 << MAX_ENUMERATION_LOG2));
        }
        let elems: Vec<Vec<(Expr, Option<Vec<u8>>)>> = self
            .sets
            .iter()
            .map(|s| match &s.kind {
                FjnKind::Single(g) => Ok(vec![(g.clone(), None)]),
                FjnKind::Modified { .. } => s
                    .index_vertices()?
                    .into_iter()
                    .map(|v| Ok((build_gjv(om, s.j, &v)?.element, Some(v))))
                    .collect(),
            })
            .collect::<Result<_>>()?;
        let mut out = Vec::new();
        let mut idx = vec![0usize; self.n];
        loop {
            for mask in 0u64..(1u64 << self.n) {
                let eps: Vec<u8> = (0..self.n).map(|i| ((mask >> i) & 1) as u8).collect();
                let factors = (1..=self.n).rev().filter(|j| eps[j - 1] == 1).map(|j| elems[j - 1][idx[j - 1]].0.clone());
                let choices = (0..self.n).map(|i| elems[i][idx[i]].1.clone()).collect();
                out.push(Sample {
                    component: 0,
                    factors: factors.collect(),
                    meta: SampleMeta { n: Some(self.n), eps, choices, inverse: false },
                });
            }
            // Advance the mixed-radix counter over the γ-choices.
            let mut i = 0;
            loop {
                if i == self.n {
                    return Ok(out);
                }
                idx[i] += 1;
                if idx[i] < elems[i].len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
        }
    }

    /// log₂ of the length envelope 2^{2k_n+2D+4} L_n^ω.
    pub fn log2_length_envelope(&self, fr: &FrReport) -> f64 {
        (2 * self.k_n + 2 * fr.d + 4) as f64 + biguint_log2(&length_ln(&fr.omega, self.n))
    }
}

pub fn biguint_log2(x: &num_bigint::BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return (x.iter_u64_digits().next().unwrap_or(0) as f64).log2();
    }
    let shift = bits - 53;
    let top: num_bigint::BigUint = x >> shift;
    (top.iter_u64_digits().next().unwrap() as f64).log2() + shift as f64
}

/// One component of a mixture.
#[derive(Clone, Debug)]
pub enum Component {
    /// Uniform on the generators {a, b, c, d}.
    Generators,
    Atom(Expr),
    /// Uniform on a finite set.
    Uniform(Arc<Vec<Expr>>),
    /// Uniform on F_n = {s_n^{ε_n}⋯s₁^{ε₁}} for a cube-independent sequence,
    /// or on its inverse set.
    Cube { seq: Arc<Vec<Expr>>, n: usize, inverse: bool },
    /// υ_n or υ̌_n.
    Upsilon { ups: Arc<Upsilon>, inverse: bool },
}

/// Serializable description of a sampler.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub kind: String,
    pub omega: OmegaString,
    pub d: Option<usize>,
    pub beta: Option<f64>,
    pub a: Option<usize>,
    pub n_max: Option<usize>,
    pub eps: Option<f64>,
    pub shift: usize,
    pub theorem_faithful: bool,
}

/// Finite mixture of component samplers.
#[derive(Clone, Debug)]
pub struct MixtureSampler {
    pub omega: OmegaString,
    pub spec: SamplerSpec,
    pub components: Vec<(f64, String, Component)>,
    cumulative: Vec<f64>,
    /// k_n used for each υ_n component, by n.
    pub k_values: Vec<(usize, usize)>,
}

impl MixtureSampler {
    /// Build from unnormalized weights.
    pub fn new(omega: OmegaString, spec: SamplerSpec, components: Vec<(f64, String, Component)>) -> Result<Self> {
        let total: f64 = components.iter().map(|c| c.0).sum();
        if !(total > 0.0) || components.iter().any(|c| c.0 < 0.0 || !c.0.is_finite()) {
            return Err(Error::Numeric("mixture weights must be nonnegative with positive sum".into()));
        }
        let components: Vec<_> = components.into_iter().map(|(w, l, c)| (w / total, l, c)).collect();
        let mut acc = 0.0;
        let cumulative = components
            .iter()
            .map(|c| {
                acc += c.0;
                acc
            })
            .collect();
        Ok(MixtureSampler { omega, spec, components, cumulative, k_values: vec![] })
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.0).collect()
    }

    /// ½u_S + ½(this mixture).
    pub fn with_generators(self) -> Result<Self> {
        let mut comps: Vec<_> = self.components.into_iter().map(|(w, l, c)| (0.5 * w, l, c)).collect();
        comps.insert(0, (0.5, "u_S".into(), Component::Generators));
        let mut spec = self.spec;
        spec.kind = format!("half_us_{}", spec.kind);
        let k_values = self.k_values;
        let mut out = Self::new(self.omega, spec, comps)?;
        out.k_values = k_values;
        Ok(out)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Sample> {
        let u: f64 = rng.gen();
        let i = self.cumulative.iter().position(|c| u < *c).unwrap_or(self.components.len() - 1);
        let om = &self.omega;
        let mut s = match &self.components[i].2 {
            Component::Generators => {
                let l = Letter::from_code(rng.gen_range(0..4u8));
                Sample {
                    component: i,
                    factors: vec![Expr::letter(0, l)],
                    meta: SampleMeta::default(),
                }
            }
            Component::Atom(e) => Sample { component: i, factors: vec![e.clone()], meta: SampleMeta::default() },
            Component::Uniform(set) => {
                let e = set[rng.gen_range(0..set.len())].clone();
                Sample { component: i, factors: vec![e], meta: SampleMeta::default() }
            }
            Component::Cube { seq, n, inverse } => {
                let eps: Vec<u8> = (0..*n).map(|_| rng.gen_range(0..2u8)).collect();
                let factors: Vec<Expr> = if *inverse {
                    (1..=*n).filter(|j| eps[j - 1] == 1).map(|j| seq[j - 1].inverse(om)).collect::<Result<_>>()?
                } else {
                    (1..=*n).rev().filter(|j| eps[j - 1] == 1).map(|j| seq[j - 1].clone()).collect()
                };
                Sample {
                    component: i,
                    factors,
                    meta: SampleMeta { n: Some(*n), eps, choices: vec![], inverse: *inverse },
                }
            }
            Component::Upsilon { ups, inverse } => {
                let s = ups.sample(om, rng)?;
                if *inverse {
                    s.inverse(om)?
                } else {
                    s
                }
            }
        };
        s.component = i;
        Ok(s)
    }

    /// Σ weight · log₂|support| over the components, a proxy for the entropy
    /// bound.
    pub fn entropy_proxy(&self) -> f64 {
        self.components
            .iter()
            .map(|(w, _, c)| {
                w * match c {
                    Component::Generators => 2.0,
                    Component::Atom(_) => 0.0,
                    Component::Uniform(s) => (s.len() as f64).log2(),
                    Component::Cube { n, .. } => *n as f64,
                    Component::Upsilon { ups, .. } => ups.log2_support() as f64,
                }
            })
            .sum()
    }
}

/// Parameters of μ_β.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuBetaParams {
    pub d: usize,
    pub beta: f64,
    pub a: usize,
    pub n_max: usize,
}

impl MuBetaParams {
    /// The conditions β > 1 − 1/D, A > D(1+β)/(2(1−β)) and D | A.
    pub fn theorem_faithful(&self) -> bool {
        let d = self.d as f64;
        self.beta > 1.0 - 1.0 / d
            && (self.a as f64) > d * (1.0 + self.beta) / (2.0 * (1.0 - self.beta))
            && self.a.is_multiple_of(self.d)
    }

    /// k_n = A⌊log₂ n⌋, rounded up to a multiple of D.
    pub fn k_n(&self, n: usize) -> usize {
        let k = self.a * (usize::BITS - 1 - n.leading_zeros()) as usize;
        k.div_ceil(self.d) * self.d
    }
}

/// μ_β = ½u_S + ½Σ_{D|n≤N_max} C 2^{−nβ}(υ_n + υ̌_n), truncated and
/// renormalized. ω is shifted (by fewer than D digits) to satisfy Fr(D).
pub fn build_mu_beta(om: &OmegaString, p: MuBetaParams) -> Result<MixtureSampler> {
    if !(p.beta > 0.0 && p.beta < 1.0) {
        return Err(Error::Precondition(format!("β = {} is outside (0,1)", p.beta)));
    }
    let fr = check_fr_d(om, p.d).map_err(|w| Error::FrFailure { block: w.block })?;
    let mut comps = Vec::new();
    let mut k_values = Vec::new();
    let mut tail = 0.0;
    let mut n = p.d;
    while n <= p.n_max {
        let k = p.k_n(n);
        let ups = Arc::new(Upsilon::new(&fr, n, k)?);
        let w = 2f64.powf(-(n as f64) * p.beta);
        tail += 2.0 * w;
        comps.push((w, format!("upsilon_{n}"), Component::Upsilon { ups: ups.clone(), inverse: false }));
        comps.push((w, format!("upsilon_inv_{n}"), Component::Upsilon { ups, inverse: true }));
        k_values.push((n, k));
        n += p.d;
    }
    if comps.is_empty() {
        return Err(Error::Precondition("N_max is below D".into()));
    }
    // ½u_S + ½·(normalized υ-part).
    for c in &mut comps {
        c.0 /= tail;
    }
    let spec = SamplerSpec {
        kind: "mu_beta".into(),
        omega: fr.omega.clone(),
        d: Some(p.d),
        beta: Some(p.beta),
        a: Some(p.a),
        n_max: Some(p.n_max),
        eps: None,
        shift: fr.shift,
        theorem_faithful: p.theorem_faithful(),
    };
    let inner = MixtureSampler::new(fr.omega.clone(), spec, comps)?;
    let mut out = inner.with_generators()?;
    out.spec.kind = "mu_beta".into();
    out.k_values = k_values;
    Ok(out)
}

fn cube_mixture(
    om: &OmegaString,
    seq: Vec<Expr>,
    eps: f64,
    kind: &str,
    n_max: usize,
) -> Result<MixtureSampler> {
    let seq = Arc::new(seq);
    let mut comps = Vec::new();
    for n in 1..=n_max {
        let w = (n as f64).powf(1.0 + eps) / 2f64.powi(n as i32);
        comps.push((w, format!("{kind}_F{n}"), Component::Cube { seq: seq.clone(), n, inverse: false }));
        comps.push((w, format!("{kind}_F{n}_inv"), Component::Cube { seq: seq.clone(), n, inverse: true }));
    }
    let spec = SamplerSpec {
        kind: kind.into(),
        omega: om.clone(),
        d: None,
        beta: None,
        a: None,
        n_max: Some(n_max),
        eps: Some(eps),
        shift: 0,
        theorem_faithful: true,
    };
    MixtureSampler::new(om.clone(), spec, comps)
}

/// η₀ = Σ C n^{1+ε} 2^{−n}(u_{F_n} + u_{F_n⁻¹}) over the sequence (g_n).
pub fn build_eta0(om: &OmegaString, eps: f64, n_max: usize) -> Result<MixtureSampler> {
    let seq = (1..=n_max).map(|n| build_gn(om, n)).collect::<Result<Vec<_>>>()?;
    cube_mixture(om, seq, eps, "eta0", n_max)
}

/// η₂: the same recipe over the sequence (h_n) of the first group.
pub fn build_eta2(eps: f64, n_max: usize) -> Result<MixtureSampler> {
    let om = OmegaString::first_group();
    let seq = (1..=n_max).map(|n| build_hn(&om, n)).collect::<Result<Vec<_>>>()?;
    cube_mixture(&om, seq, eps, "eta2", n_max)
}

/// Uniform measure on the generators.
pub fn build_us(om: &OmegaString) -> Result<MixtureSampler> {
    let spec = SamplerSpec {
        kind: "us".into(),
        omega: om.clone(),
        d: None,
        beta: None,
        a: None,
        n_max: None,
        eps: None,
        shift: 0,
        theorem_faithful: true,
    };
    MixtureSampler::new(om.clone(), spec, vec![(1.0, "u_S".into(), Component::Generators)])
}

/// Uniform measure on F₁ ∪ F₁⁻¹ = {id, g₁}.
pub fn build_uf1(om: &OmegaString) -> Result<MixtureSampler> {
    let g1 = build_gn(om, 1)?;
    let set = Arc::new(vec![Expr::identity(0), g1.clone(), g1.inverse(om)?]);
    let spec = SamplerSpec {
        kind: "uf1".into(),
        omega: om.clone(),
        d: None,
        beta: None,
        a: None,
        n_max: Some(1),
        eps: None,
        shift: 0,
        theorem_faithful: true,
    };
    MixtureSampler::new(om.clone(), spec, vec![(1.0, "u_F1".into(), Component::Uniform(set))])
}

/// Point mass.
pub fn build_atom(om: &OmegaString, e: Expr) -> Result<MixtureSampler> {
    let spec = SamplerSpec {
        kind: "atom".into(),
        omega: om.clone(),
        d: None,
        beta: None,
        a: None,
        n_max: None,
        eps: None,
        shift: 0,
        theorem_faithful: true,
    };
    MixtureSampler::new(om.clone(), spec, vec![(1.0, "atom".into(), Component::Atom(e))])
}
