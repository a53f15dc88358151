//! Word arithmetic for automorphisms of the rooted binary tree: reduction,
//! wreath recursion, sections, actions on vertices, identity testing and the
//! rigid-stabilizer embedding ι.

mod digits;
mod expr;

pub use digits::Digits;
pub use expr::{Expr, Step};

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use dashmap::DashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grigorchuk::OmegaString;

/// Recursion limit for identity testing.
pub const RECURSION_GUARD: usize = 64;
/// Words longer than this are not memoized.
const MEMO_MAX_LEN: usize = 256;

/// Generator letters. Codes of b, c, d multiply by xor in the Klein group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Letter {
    A = 0,
    B = 1,
    C = 2,
    D = 3,
}

impl Letter {
    pub fn from_code(c: u8) -> Self {
        match c & 3 {
            0 => Letter::A,
            1 => Letter::B,
            2 => Letter::C,
            _ => Letter::D,
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'a' => Some(Letter::A),
            'b' => Some(Letter::B),
            'c' => Some(Letter::C),
            'd' => Some(Letter::D),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        ['a', 'b', 'c', 'd'][self as usize]
    }

    /// Image of the letter under the digit's map V4 → {id, a}; `None` is id.
    pub fn image(self, digit: u8) -> Option<Letter> {
        if self == Letter::A || self.code() == 3 - digit {
            None
        } else {
            Some(Letter::A)
        }
    }
}

/// Parse a word over {a,b,c,d}; "" and "id" denote the identity.
pub fn parse_word(s: &str) -> Result<Vec<Letter>> {
    let s = s.trim();
    if s == "id" || s == "e" {
        return Ok(Vec::new());
    }
    s.chars()
        .map(|c| Letter::from_char(c).ok_or_else(|| Error::Parse(format!("bad letter {c:?}"))))
        .collect()
}

pub fn word_to_string(w: &[Letter]) -> String {
    w.iter().map(|l| l.to_char()).collect()
}

/// Push a letter onto a reduced word, cancelling aa and collapsing adjacent
/// Klein letters.
#[inline]
pub fn push_reduced(w: &mut Vec<Letter>, l: Letter) {
    match w.last().copied() {
        Some(Letter::A) if l == Letter::A => {
            w.pop();
        }
        Some(t) if t != Letter::A && l != Letter::A => {
            w.pop();
            let p = t.code() ^ l.code();
            if p != 0 {
                push_reduced(w, Letter::from_code(p));
            }
        }
        _ => w.push(l),
    }
}

/// Canonical reduced form of a letter sequence.
pub fn reduce(word: &[Letter]) -> Vec<Letter> {
    let mut out = Vec::with_capacity(word.len());
    for &l in word {
        push_reduced(&mut out, l);
    }
    out
}

/// One step of wreath recursion of a word at the given level: returns the
/// reduced sections at 0 and 1 and the root swap.
pub fn one_step_word(om: &OmegaString, level: usize, w: &[Letter]) -> (Vec<Letter>, Vec<Letter>, bool) {
    let digit = om.digit(level);
    let mut left = Vec::with_capacity(w.len() / 2 + 1);
    let mut right = Vec::with_capacity(w.len() / 2 + 1);
    let mut swap = false;
    for &l in w {
        if l == Letter::A {
            swap = !swap;
            continue;
        }
        let img = l.image(digit);
        let (zero_side, one_side) = if swap { (&mut right, &mut left) } else { (&mut left, &mut right) };
        if let Some(x) = img {
            push_reduced(zero_side, x);
        }
        push_reduced(one_side, l);
    }
    (left, right, swap)
}

/// Action of a single letter of level `level` on the digits starting at `pos`.
/// Returns the germ code contributed by the letter at the ray (nonzero only
/// for b, c, d acting on a ray with no zero at or after `pos`).
#[inline]
pub fn act_letter(om: &OmegaString, level: usize, l: Letter, x: &mut Digits, pos: usize) -> u8 {
    if l == Letter::A {
        x.flip(pos);
        return 0;
    }
    match x.first_zero_from(pos) {
        None => {
            if x.is_ray() {
                l.code()
            } else {
                0
            }
        }
        Some(q) => {
            if l.image(om.digit(level + q - pos)).is_some() {
                x.flip(q + 1);
            }
            0
        }
    }
}

/// Shared context of a group family: the defining string and the memo of
/// identity decisions.
pub struct GroupCtx {
    omega: OmegaString,
    memo: DashMap<(usize, Vec<Letter>), bool>,
}

impl GroupCtx {
    pub fn new(omega: OmegaString) -> Arc<Self> {
        Arc::new(Self { omega, memo: DashMap::new() })
    }

    pub fn omega(&self) -> &OmegaString {
        &self.omega
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    fn is_id_rec(&self, level: usize, w: &[Letter], depth: usize) -> Result<bool> {
        if w.is_empty() {
            return Ok(true);
        }
        if w.iter().filter(|l| **l == Letter::A).count() % 2 == 1 || w.len() == 1 {
            return Ok(false);
        }
        if depth > RECURSION_GUARD {
            return Err(Error::RecursionGuard { depth, len: w.len() });
        }
        let key = if w.len() <= MEMO_MAX_LEN { Some((self.omega.canon(level), w.to_vec())) } else { None };
        if let Some(k) = &key {
            if let Some(v) = self.memo.get(k) {
                return Ok(*v);
            }
        }
        let (l, r, _) = one_step_word(&self.omega, level, w);
        if l.len() > w.len() || r.len() > w.len() {
            return Err(Error::RecursionGuard { depth, len: w.len() });
        }
        let out = self.is_id_rec(level + 1, &l, depth + 1)? && self.is_id_rec(level + 1, &r, depth + 1)?;
        if let Some(k) = key {
            self.memo.insert(k, out);
        }
        Ok(out)
    }
}

impl fmt::Debug for GroupCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupCtx({})", self.omega)
    }
}

/// A vertex of the binary tree, v₁…v_k.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Vertex(Vec<u8>);

impl Vertex {
    pub fn new(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Vertex(bits)
    }

    pub fn root() -> Self {
        Vertex(Vec::new())
    }

    pub fn ones(n: usize) -> Self {
        Vertex(vec![1; n])
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    /// All vertices of the given depth, in lexicographic order.
    pub fn level(depth: usize) -> impl Iterator<Item = Vertex> {
        (0u64..(1u64 << depth)).map(move |n| Vertex((0..depth).map(|i| ((n >> (depth - 1 - i)) & 1) as u8).collect()))
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for Vertex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Parse(format!("bad vertex digit {c:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Vertex)
    }
}

impl TryFrom<String> for Vertex {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Vertex> for String {
    fn from(v: Vertex) -> String {
        v.to_string()
    }
}

/// A group element of G_{s^n ω}: a reduced word and a level n.
#[derive(Clone)]
pub struct Element {
    ctx: Arc<GroupCtx>,
    level: usize,
    word: Vec<Letter>,
}

/// Wreath recursion g = (left, right)·ε^swap.
#[derive(Clone, Debug)]
pub struct OneStep {
    pub left: Element,
    pub right: Element,
    pub swap: bool,
}

impl Element {
    pub fn from_letters(ctx: &Arc<GroupCtx>, level: usize, letters: &[Letter]) -> Self {
        Element { ctx: ctx.clone(), level, word: reduce(letters) }
    }

    pub fn parse(ctx: &Arc<GroupCtx>, level: usize, s: &str) -> Result<Self> {
        Ok(Self::from_letters(ctx, level, &parse_word(s)?))
    }

    pub fn identity(ctx: &Arc<GroupCtx>, level: usize) -> Self {
        Element { ctx: ctx.clone(), level, word: Vec::new() }
    }

    pub fn generator(ctx: &Arc<GroupCtx>, level: usize, l: Letter) -> Self {
        Element { ctx: ctx.clone(), level, word: vec![l] }
    }

    pub fn ctx(&self) -> &Arc<GroupCtx> {
        &self.ctx
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn letters(&self) -> &[Letter] {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn word_string(&self) -> String {
        word_to_string(&self.word)
    }

    fn check_compatible(&self, other: &Element) -> Result<()> {
        if !Arc::ptr_eq(&self.ctx, &other.ctx) && self.ctx.omega != other.ctx.omega {
            return Err(Error::Mismatch("different omega strings".into()));
        }
        let om = &self.ctx.omega;
        if om.canon(self.level) != om.canon(other.level) {
            return Err(Error::Mismatch(format!("levels {} and {}", self.level, other.level)));
        }
        Ok(())
    }

    pub fn multiply(&self, other: &Element) -> Result<Element> {
        self.check_compatible(other)?;
        let mut w = self.word.clone();
        for &l in &other.word {
            push_reduced(&mut w, l);
        }
        Ok(Element { ctx: self.ctx.clone(), level: self.level, word: w })
    }

    pub fn inverse(&self) -> Element {
        let mut w = self.word.clone();
        w.reverse();
        Element { ctx: self.ctx.clone(), level: self.level, word: w }
    }

    pub fn pow(&self, k: usize) -> Element {
        let mut w = Vec::new();
        for _ in 0..k {
            for &l in &self.word {
                push_reduced(&mut w, l);
            }
        }
        Element { ctx: self.ctx.clone(), level: self.level, word: w }
    }

    pub fn one_step(&self) -> OneStep {
        let (l, r, swap) = one_step_word(&self.ctx.omega, self.level, &self.word);
        OneStep {
            left: Element { ctx: self.ctx.clone(), level: self.level + 1, word: l },
            right: Element { ctx: self.ctx.clone(), level: self.level + 1, word: r },
            swap,
        }
    }

    pub fn section(&self, v: &Vertex) -> Element {
        let om = &self.ctx.omega;
        let mut w = self.word.clone();
        let mut level = self.level;
        for &b in v.bits() {
            if w.is_empty() {
                break;
            }
            let (l, r, _) = one_step_word(om, level, &w);
            w = if b == 0 { l } else { r };
            level += 1;
        }
        Element { ctx: self.ctx.clone(), level: self.level + v.depth(), word: w }
    }

    /// Right action v·g, letter by letter.
    pub fn act_vertex(&self, v: &Vertex) -> Vertex {
        let mut x = Digits::vertex(v.bits());
        self.act_digits(&mut x, 0);
        Vertex(x.into_bits())
    }

    /// Apply the element to digits starting at `pos`; returns the germ code
    /// when `x` is a ray.
    pub fn act_digits(&self, x: &mut Digits, pos: usize) -> u8 {
        let om = &self.ctx.omega;
        let mut g = 0u8;
        for &l in &self.word {
            g ^= act_letter(om, self.level, l, x, pos);
        }
        g
    }

    /// Action computed from the recursion instead of letter by letter.
    pub fn act_vertex_recursive(&self, v: &Vertex) -> Vertex {
        let mut out = Vec::with_capacity(v.depth());
        let om = &self.ctx.omega;
        let mut w = self.word.clone();
        let mut level = self.level;
        for &b in v.bits() {
            let (l, r, swap) = one_step_word(om, level, &w);
            out.push(b ^ swap as u8);
            w = if b == 0 { l } else { r };
            level += 1;
        }
        Vertex(out)
    }

    pub fn is_identity(&self) -> Result<bool> {
        self.ctx.is_id_rec(self.level, &self.word, 0)
    }

    pub fn equals(&self, other: &Element) -> Result<bool> {
        self.multiply(&other.inverse())?.is_identity()
    }

    /// Least k ≤ cap with g^k = id.
    pub fn order(&self, cap: usize) -> Result<Option<usize>> {
        let mut w: Vec<Letter> = Vec::new();
        for k in 1..=cap {
            for &l in &self.word {
                push_reduced(&mut w, l);
            }
            if self.ctx.is_id_rec(self.level, &w, 0)? {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }

    /// The same element viewed at another level, renaming letters.
    pub fn relabel_to(&self, level: usize) -> Option<Element> {
        let map = self.ctx.omega.letter_map(self.level, level)?;
        let word = self.word.iter().map(|l| map[l.code() as usize]).collect();
        Some(Element { ctx: self.ctx.clone(), level, word })
    }

    /// Sections at v₁…v_{i−1}v̌_i for i = 1..|v|, followed by the section at v.
    pub fn portrait_along_ray(&self, v: &Vertex) -> Result<Vec<(Vertex, Element)>> {
        if self.act_vertex(v) != *v {
            return Err(Error::Precondition(format!("vertex {v} is not fixed")));
        }
        let mut out = Vec::with_capacity(v.depth() + 1);
        for i in 0..v.depth() {
            let mut bits = v.bits()[..=i].to_vec();
            bits[i] ^= 1;
            let u = Vertex(bits);
            out.push((u.clone(), self.section(&u)));
        }
        out.push((v.clone(), self.section(v)));
        Ok(out)
    }

    pub fn to_expr(&self) -> Expr {
        Expr::word(self.level, self.word.clone())
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self, self.level)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            write!(f, "id")
        } else {
            write!(f, "{}", self.word_string())
        }
    }
}

/// Serialized form of an element: word plus level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementRecord {
    pub word: String,
    pub level: usize,
}

impl From<&Element> for ElementRecord {
    fn from(e: &Element) -> Self {
        ElementRecord { word: e.word_string(), level: e.level }
    }
}

/// The letter γ_m (relative to `base`) killed by the digit at level base+m−1.
fn gamma_rel(om: &OmegaString, base: usize, m: usize) -> Letter {
    om.kills(base + m - 1)
}

/// Some letter sent to a by the digit at the given level.
fn non_killed(om: &OmegaString, level: usize) -> Letter {
    let k = om.kills(level);
    [Letter::B, Letter::C, Letter::D].into_iter().find(|l| *l != k).unwrap()
}

/// The letter y_{m−1} of the substitution σ_m: a ↦ a y_{m−1} a, relative to
/// the group G_{s^base ω}.
pub fn sigma_letter(om: &OmegaString, base: usize, m: usize) -> Letter {
    debug_assert!(m >= 1);
    if m == 1 {
        return non_killed(om, base);
    }
    if om.digit(base + m - 2) != om.digit(base + m - 1) {
        gamma_rel(om, base, m - 1)
    } else {
        non_killed(om, base + m - 2)
    }
}

/// Apply the chain of substitutions that moves an element h of level
/// base+|v| into the rigid stabilizer of v, as an element of level base.
/// Valid for h in the normal closure of [a, γ_{|v|}].
pub fn sigma_chain(om: &OmegaString, base: usize, v: &[u8], h: &[Letter]) -> Vec<Letter> {
    let n = v.len();
    let mut w = h.to_vec();
    for j in 0..n {
        let m = n - j;
        let y = sigma_letter(om, base, m);
        let mut next = Vec::with_capacity(2 * w.len() + 2);
        if v[m - 1] == 0 {
            push_reduced(&mut next, Letter::A);
        }
        for &l in &w {
            if l == Letter::A {
                push_reduced(&mut next, Letter::A);
                push_reduced(&mut next, y);
                push_reduced(&mut next, Letter::A);
            } else {
                push_reduced(&mut next, l);
            }
        }
        if v[m - 1] == 0 {
            push_reduced(&mut next, Letter::A);
        }
        w = next;
    }
    w
}

/// ι([γ, a], v) = the element of the rigid stabilizer of v acting as γaγa
/// below v, as a word of level `base`. Requires γ to be killed by the digit
/// at level base+|v|−1 when |v| ≥ 1.
pub fn iota(ctx: &Arc<GroupCtx>, base: usize, gamma: Letter, v: &Vertex) -> Result<Element> {
    let om = &ctx.omega;
    let n = v.depth();
    if gamma == Letter::A {
        return Err(Error::Precondition("γ must be one of b, c, d".into()));
    }
    if n >= 1 && om.kills(base + n - 1) != gamma {
        return Err(Error::Precondition(format!(
            "{} is not killed by the digit at level {}",
            gamma.to_char(),
            base + n - 1
        )));
    }
    let w0 = [gamma, Letter::A, gamma, Letter::A];
    let w = sigma_chain(om, base, v.bits(), &w0);
    Ok(Element { ctx: ctx.clone(), level: base, word: w })
}
