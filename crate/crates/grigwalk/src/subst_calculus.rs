//! Substitutions ζ₀, ζ₁, ζ₂ (and the first-group ζ, σ), cube-independent
//! sequences, length matrices, L_n^ω and growth exponents.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::core_tree::{push_reduced, reduce, Expr, Letter};
use crate::error::{Error, Result};
use crate::grigorchuk::OmegaString;
use crate::par;

/// 3×3 nonnegative integer matrix; column j holds the counts of the image of
/// the j-th syllable (ab, ac, ad).
pub type SubstitutionMatrix = [[u64; 3]; 3];

/// Images of the syllables aγ under ζ_i, listed by their Klein letters.
fn zeta_table(digit: u8, g: Letter) -> &'static [Letter] {
    use Letter::*;
    match (digit, g) {
        (0, B) => &[B, B],
        (0, C) => &[C, C],
        (0, D) => &[B, D, C],
        (1, B) => &[B, B],
        (1, C) => &[D, C, B],
        (1, D) => &[D, D],
        (2, B) => &[C, B, D],
        (2, C) => &[C, C],
        (2, D) => &[D, D],
        _ => unreachable!("syllable letter must be b, c or d"),
    }
}

/// Images under the first-group ζ in usual notation: ab ↦ abadac, ac ↦ abab,
/// ad ↦ acac.
fn usual_zeta_table(g: Letter) -> &'static [Letter] {
    use Letter::*;
    match g {
        B => &[B, D, C],
        C => &[B, B],
        D => &[C, C],
        A => unreachable!(),
    }
}

pub fn substitution_matrix(digit: u8) -> SubstitutionMatrix {
    let mut m = [[0u64; 3]; 3];
    for (j, g) in [Letter::B, Letter::C, Letter::D].into_iter().enumerate() {
        for l in zeta_table(digit, g) {
            m[l.code() as usize - 1][j] += 1;
        }
    }
    m
}

/// The matrix of the first-group ζ.
pub fn matrix_m() -> SubstitutionMatrix {
    let mut m = [[0u64; 3]; 3];
    for (j, g) in [Letter::B, Letter::C, Letter::D].into_iter().enumerate() {
        for l in usual_zeta_table(g) {
            m[l.code() as usize - 1][j] += 1;
        }
    }
    m
}

/// The matrix A attached to the sequence ĥ_n.
pub fn matrix_a() -> SubstitutionMatrix {
    [[0, 1, 0], [1, 1, 2], [1, 0, 0]]
}

pub fn mat_mul(a: &SubstitutionMatrix, b: &SubstitutionMatrix) -> SubstitutionMatrix {
    let mut c = [[0u64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn mat_vec(a: &SubstitutionMatrix, v: &[u64; 3]) -> [u64; 3] {
    let mut out = [0u64; 3];
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..3).map(|k| a[i][k] * v[k]).sum();
    }
    out
}

/// A word in {ab, ac, ad}*, stored by its Klein letters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SyllableWord(pub Vec<Letter>);

/// Shape of an alternating word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SyllableForm {
    /// In {ab, ac, ad}*.
    Direct,
    /// In {ba, ca, da}*.
    Inverse,
}

impl SyllableWord {
    pub fn parse(s: &str) -> Result<Self> {
        let w = crate::core_tree::parse_word(s)?;
        match Self::from_word(&w) {
            Some((sw, SyllableForm::Direct)) => Ok(sw),
            _ => Err(Error::Representation(format!("{s} is not a word in {{ab,ac,ad}}*"))),
        }
    }

    /// Decompose a reduced word as a direct or inverse syllable word.
    pub fn from_word(w: &[Letter]) -> Option<(Self, SyllableForm)> {
        if w.len() % 2 == 1 {
            return None;
        }
        if w.chunks(2).all(|p| p[0] == Letter::A && p[1] != Letter::A) {
            return Some((SyllableWord(w.iter().skip(1).step_by(2).copied().collect()), SyllableForm::Direct));
        }
        if w.chunks(2).all(|p| p[0] != Letter::A && p[1] == Letter::A) {
            let mut g: Vec<Letter> = w.iter().step_by(2).copied().collect();
            g.reverse();
            return Some((SyllableWord(g), SyllableForm::Inverse));
        }
        None
    }

    pub fn to_letters(&self) -> Vec<Letter> {
        let mut out = Vec::with_capacity(2 * self.0.len());
        for &g in &self.0 {
            out.push(Letter::A);
            out.push(g);
        }
        out
    }

    /// Count vector (#ab, #ac, #ad).
    pub fn counts(&self) -> [u64; 3] {
        let mut c = [0u64; 3];
        for g in &self.0 {
            c[g.code() as usize - 1] += 1;
        }
        c
    }

    pub fn len_letters(&self) -> usize {
        2 * self.0.len()
    }
}

/// ζ_i on syllable words.
pub fn apply_zeta(digit: u8, w: &SyllableWord) -> SyllableWord {
    SyllableWord(w.0.iter().flat_map(|g| zeta_table(digit, *g).iter().copied()).collect())
}

/// First-group ζ (usual notation) on syllable words.
pub fn apply_usual_zeta(w: &SyllableWord) -> SyllableWord {
    SyllableWord(w.0.iter().flat_map(|g| usual_zeta_table(*g).iter().copied()).collect())
}

fn syllable_apply(w: &[Letter], f: impl Fn(&SyllableWord) -> SyllableWord) -> Result<Vec<Letter>> {
    if w.is_empty() {
        return Ok(Vec::new());
    }
    match SyllableWord::from_word(w) {
        Some((sw, SyllableForm::Direct)) => Ok(f(&sw).to_letters()),
        Some((sw, SyllableForm::Inverse)) => {
            let mut out = f(&sw).to_letters();
            out.reverse();
            Ok(out)
        }
        None => Err(Error::Representation(format!(
            "{} is neither in {{ab,ac,ad}}* nor in {{ba,ca,da}}*",
            crate::core_tree::word_to_string(w)
        ))),
    }
}

/// ζ_digit applied to a reduced word of either syllable form.
pub fn zeta_word(digit: u8, w: &[Letter]) -> Result<Vec<Letter>> {
    syllable_apply(w, |s| apply_zeta(digit, s))
}

/// First-group ζ applied to a reduced word of either syllable form.
pub fn usual_zeta_word(w: &[Letter]) -> Result<Vec<Letter>> {
    syllable_apply(w, apply_usual_zeta)
}

/// Lysionok substitution σ: a ↦ aca, b ↦ d, c ↦ b, d ↦ c (first group).
pub fn apply_sigma(w: &[Letter]) -> Vec<Letter> {
    let mut out = Vec::with_capacity(3 * w.len());
    for &l in w {
        match l {
            Letter::A => {
                push_reduced(&mut out, Letter::A);
                push_reduced(&mut out, Letter::C);
                push_reduced(&mut out, Letter::A);
            }
            Letter::B => push_reduced(&mut out, Letter::D),
            Letter::C => push_reduced(&mut out, Letter::B),
            Letter::D => push_reduced(&mut out, Letter::C),
        }
    }
    out
}

/// ζ_{ω₀} ∘ … ∘ ζ_{ω_{j−1}} applied to a seed of level j, structured.
pub fn zeta_chain(om: &OmegaString, j: usize, seed: &[Letter]) -> Result<Expr> {
    Expr::zeta_chain(om, 0, j, Expr::word(j, seed.to_vec()))
}

/// The same chain computed on flat words.
pub fn zeta_chain_word(om: &OmegaString, j: usize, seed: &[Letter]) -> Result<Vec<Letter>> {
    let mut w = reduce(seed);
    for l in (0..j).rev() {
        w = zeta_word(om.digit(l), &w)?;
    }
    Ok(w)
}

/// Seed of g_n: ab if ω_{n−1} ≠ 2, ac otherwise.
pub fn gn_seed(om: &OmegaString, n: usize) -> Vec<Letter> {
    if om.digit(n - 1) != 2 {
        vec![Letter::A, Letter::B]
    } else {
        vec![Letter::A, Letter::C]
    }
}

/// g_n as a structured element of G_ω.
pub fn build_gn(om: &OmegaString, n: usize) -> Result<Expr> {
    if n == 0 {
        return Err(Error::Precondition("g_n needs n ≥ 1".into()));
    }
    zeta_chain(om, n, &gn_seed(om, n))
}

/// g_n as a flat word.
pub fn build_gn_word(om: &OmegaString, n: usize) -> Result<Vec<Letter>> {
    if n == 0 {
        return Err(Error::Precondition("g_n needs n ≥ 1".into()));
    }
    zeta_chain_word(om, n, &gn_seed(om, n))
}

/// Structured h_n of the first group (general notation, ω = (012)^∞):
/// h₁ = ζ(ac), h_{2k} = h_{2k−1}², h_{2k+1} = ζ²(σ(h_{2k−1})) with σ(h) acting
/// as h below the vertex 1.
pub fn build_hn(om: &OmegaString, n: usize) -> Result<Expr> {
    if n == 0 {
        return Err(Error::Precondition("h_n needs n ≥ 1".into()));
    }
    if om.canon(3) != om.canon(0) {
        return Err(Error::Precondition("h_n is defined for the first group".into()));
    }
    let mut h = build_gn(om, 1)?;
    let mut k = 1;
    while 2 * k - 1 < n - n.is_multiple_of(2) as usize {
        let r = Expr::rist(om, 2, h, vec![1])?;
        h = Expr::zeta_chain(om, 0, 2, r)?;
        k += 1;
    }
    if n.is_multiple_of(2) {
        Expr::product(om, 0, vec![h.clone(), h])
    } else {
        Ok(h)
    }
}

/// Flat h_n in usual notation for the first group.
pub fn build_hn_word_usual(n: usize) -> Result<Vec<Letter>> {
    if n == 0 {
        return Err(Error::Precondition("h_n needs n ≥ 1".into()));
    }
    let mut h = usual_zeta_word(&[Letter::A, Letter::C])?;
    let odd = if n.is_multiple_of(2) { n - 1 } else { n };
    let mut m = 1;
    while m < odd {
        h = usual_zeta_word(&usual_zeta_word(&apply_sigma(&h))?)?;
        m += 2;
    }
    if n.is_multiple_of(2) {
        let mut w = h.clone();
        for &l in &h {
            push_reduced(&mut w, l);
        }
        Ok(w)
    } else {
        Ok(h)
    }
}

/// Level stabilized by h_n: 3k−2 for n = 2k−1 and 3k−1 for n = 2k.
pub fn hn_stabilized_level(n: usize) -> usize {
    let k = n.div_ceil(2);
    if n % 2 == 1 {
        3 * k - 2
    } else {
        3 * k - 1
    }
}

/// L_n^ω = (1 1 1) M_{ω₀} … M_{ω_{n−1}} (1 1 1)ᵀ.
pub fn length_ln(om: &OmegaString, n: usize) -> BigUint {
    let mut col = [BigUint::one(), BigUint::one(), BigUint::one()];
    for i in (0..n).rev() {
        let m = substitution_matrix(om.digit(i));
        col = big_mat_vec(&m, &col);
    }
    col.iter().fold(BigUint::zero(), |a, b| a + b)
}

fn big_mat_vec(m: &SubstitutionMatrix, v: &[BigUint; 3]) -> [BigUint; 3] {
    let mut out = [BigUint::zero(), BigUint::zero(), BigUint::zero()];
    for (i, o) in out.iter_mut().enumerate() {
        for (k, vk) in v.iter().enumerate() {
            if m[i][k] != 0 {
                *o += vk * m[i][k];
            }
        }
    }
    out
}

/// (2 2 2) Mⁿ e₂, the predicted length of ζⁿ(ac) in the first group.
pub fn zeta_power_len(n: usize) -> BigUint {
    let m = matrix_m();
    let mut col = [BigUint::zero(), BigUint::one(), BigUint::zero()];
    for _ in 0..n {
        col = big_mat_vec(&m, &col);
    }
    col.iter().fold(BigUint::zero(), |a, b| a + b) * 2u32
}

/// Growth exponent report for a periodic string.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExponentReport {
    pub lambda: f64,
    pub alpha: f64,
    pub q: usize,
    pub preperiod_ignored: bool,
}

fn to_f64(m: &SubstitutionMatrix) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m[i][j] as f64;
        }
    }
    out
}

fn is_primitive(m: &SubstitutionMatrix) -> bool {
    let b = |m: &SubstitutionMatrix| {
        let mut o = [[0u64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                o[i][j] = (m[i][j] > 0) as u64;
            }
        }
        o
    };
    let base = b(m);
    let mut p = base;
    for _ in 0..6 {
        if p.iter().all(|r| r.iter().all(|x| *x > 0)) {
            return true;
        }
        p = b(&mat_mul(&p, &base));
    }
    false
}

fn char_poly(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let tr = m[0][0] + m[1][1] + m[2][2];
    let c2 = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0] + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    [-tr, c2, -det]
}

/// Largest real root of X³ + p₀X² + p₁X + p₂ by bisection then Newton.
pub fn largest_cubic_root(p: [f64; 3]) -> f64 {
    let f = |x: f64| ((x + p[0]) * x + p[1]) * x + p[2];
    let df = |x: f64| (3.0 * x + 2.0 * p[0]) * x + p[1];
    let bound = 1.0 + p.iter().map(|c| c.abs()).fold(0.0, f64::max);
    // f is increasing on the bracket chosen from the critical points.
    let disc = 4.0 * p[0] * p[0] - 12.0 * p[1];
    let (mut lo, mut hi) = if disc <= 0.0 {
        (-bound, bound)
    } else {
        let c1 = (-2.0 * p[0] - disc.sqrt()) / 6.0;
        let c2 = (-2.0 * p[0] + disc.sqrt()) / 6.0;
        if f(c2) <= 0.0 {
            (c2, bound)
        } else {
            (-bound, c1)
        }
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..4 {
        let d = df(x);
        if d.abs() > 1e-300 {
            x -= f(x) / d;
        }
    }
    x
}

/// Spectral radius of a primitive nonnegative matrix: power iteration to
/// relative tolerance 1e−12, polished on the characteristic polynomial.
pub fn spectral_radius(m: &SubstitutionMatrix) -> Result<f64> {
    if !is_primitive(m) {
        return Err(Error::Numeric("matrix is not primitive".into()));
    }
    let mf = to_f64(m);
    let mut v = [1.0f64; 3];
    let mut lambda = 0.0;
    let mut converged = false;
    for _ in 0..100_000 {
        let mut w = [0.0; 3];
        for i in 0..3 {
            w[i] = (0..3).map(|k| mf[i][k] * v[k]).sum();
        }
        let norm: f64 = w.iter().sum();
        let vs: f64 = v.iter().sum();
        let new = norm / vs;
        for i in 0..3 {
            v[i] = w[i] / norm;
        }
        if (new - lambda).abs() <= 1e-12 * new {
            lambda = new;
            converged = true;
            break;
        }
        lambda = new;
    }
    let p = char_poly(&mf);
    let root = largest_cubic_root(p);
    if !converged {
        return Ok(root);
    }
    let f = |x: f64| ((x + p[0]) * x + p[1]) * x + p[2];
    let df = |x: f64| (3.0 * x + 2.0 * p[0]) * x + p[1];
    let mut x = lambda;
    for _ in 0..4 {
        x -= f(x) / df(x);
    }
    if (x - root).abs() > 1e-6 * root {
        return Err(Error::Numeric(format!("power iteration {x} disagrees with root {root}")));
    }
    Ok(x)
}

/// The positive root λ₀ of X³ − X² − 2X − 4.
pub fn lambda0() -> f64 {
    largest_cubic_root([-1.0, -2.0, -4.0])
}

/// Growth exponent α = q log 2 / log λ of the period's matrix product.
pub fn growth_exponent(om: &OmegaString) -> Result<ExponentReport> {
    let per = om.period();
    let mut p = substitution_matrix(per[0]);
    for &d in &per[1..] {
        p = mat_mul(&p, &substitution_matrix(d));
    }
    let lambda = spectral_radius(&p)?;
    let q = per.len();
    Ok(ExponentReport { lambda, alpha: q as f64 * 2f64.ln() / lambda.ln(), q, preperiod_ignored: !om.preperiod().is_empty() })
}

/// Witness of a failure of cube independence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeWitness {
    pub x: Vec<u8>,
    pub eps1: Vec<usize>,
    pub eps2: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CubeReport {
    pub independent: bool,
    pub vertices_checked: usize,
    pub witness: Option<CubeWitness>,
}

/// Vertex set for cube-independence checks: exhaustive up to depth 12,
/// 4096 uniform samples beyond.
pub fn cube_vertex_set(depth: usize, seed: u64) -> Vec<Vec<u8>> {
    if depth <= 12 {
        crate::core_tree::Vertex::level(depth).map(|v| v.bits().to_vec()).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..4096).map(|_| (0..depth).map(|_| rng.gen_range(0..2u8)).collect()).collect()
    }
}

/// Images x·g_n^{ε_n}…g₁^{ε₁} for all tuples 0 ≤ ε_j ≤ k_j, keyed by tuple.
fn cube_images(om: &OmegaString, seq: &[Expr], ks: &[usize], x: &[u8]) -> Vec<(Vec<usize>, Vec<u8>)> {
    let n = seq.len();
    let mut out = Vec::new();
    let mut eps = vec![0usize; n];
    fn rec(
        om: &OmegaString,
        seq: &[Expr],
        ks: &[usize],
        i: usize,
        cur: Vec<u8>,
        eps: &mut Vec<usize>,
        out: &mut Vec<(Vec<usize>, Vec<u8>)>,
    ) {
        if i == 0 {
            out.push((eps.clone(), cur));
            return;
        }
        let mut y = cur;
        for e in 0..=ks[i - 1] {
            eps[i - 1] = e;
            rec(om, seq, ks, i - 1, y.clone(), eps, out);
            if e < ks[i - 1] {
                y = seq[i - 1].act_vertex(om, &y);
            }
        }
        eps[i - 1] = 0;
    }
    rec(om, seq, ks, n, x.to_vec(), &mut eps, &mut out);
    out
}

/// Brute-force injectivity of (ε₁,…,ε_n) ↦ x·g_n^{ε_n}…g₁^{ε₁} over the given
/// vertices.
pub fn check_cube_independence(om: &OmegaString, seq: &[Expr], ks: &[usize], vertices: &[Vec<u8>]) -> CubeReport {
    assert_eq!(seq.len(), ks.len());
    let witnesses = par::map_slice(vertices, |x| {
        let mut seen: HashMap<Vec<u8>, Vec<usize>> = HashMap::new();
        for (eps, img) in cube_images(om, seq, ks, x) {
            if let Some(prev) = seen.get(&img) {
                return Some(CubeWitness { x: x.clone(), eps1: prev.clone(), eps2: eps });
            }
            seen.insert(img, eps);
        }
        None
    });
    let witness = witnesses.into_iter().flatten().next();
    CubeReport { independent: witness.is_none(), vertices_checked: vertices.len(), witness }
}

/// F_n = {g_n^{ε_n}…g₁^{ε₁}}, with distinctness checked on the orbit of
/// 1^{n+2}.
pub fn quasi_cubic_set(om: &OmegaString, seq: &[Expr], n: usize) -> Result<Vec<(Vec<usize>, Expr)>> {
    let seq = &seq[..n];
    let ks = vec![1usize; n];
    let x = vec![1u8; n + 2];
    let mut seen: HashMap<Vec<u8>, Vec<usize>> = HashMap::new();
    for (eps, img) in cube_images(om, seq, &ks, &x) {
        if let Some(prev) = seen.get(&img) {
            let enc = |e: &Vec<usize>| e.iter().map(|v| *v as u8).collect::<Vec<u8>>();
            return Err(Error::Collision(enc(prev), enc(&eps)));
        }
        seen.insert(img, eps);
    }
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0u64..(1u64 << n) {
        let eps: Vec<usize> = (0..n).map(|i| ((mask >> i) & 1) as usize).collect();
        let factors: Vec<Expr> = (0..n).rev().filter(|i| eps[*i] == 1).map(|i| seq[i].clone()).collect();
        out.push((eps, Expr::product(om, 0, factors)?));
    }
    Ok(out)
}
