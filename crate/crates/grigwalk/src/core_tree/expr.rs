//! Structured elements. Substitution images and rigid-stabilizer elements are
//! kept as lazy nodes whose wreath recursion is computed on demand, so that
//! elements with astronomically long words can still act on rays.

use std::fmt;
use std::sync::{Arc, OnceLock};

use super::{act_letter, one_step_word, push_reduced, reduce, sigma_chain, sigma_letter, word_to_string, Digits, Letter};
use crate::error::{Error, Result};
use crate::grigorchuk::OmegaString;
use crate::subst_calculus::{substitution_matrix, zeta_word};

/// A structured element of G_{s^level ω}.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

struct Node {
    kind: Kind,
    level: usize,
    /// Parity of the number of a's, which is the root permutation.
    swap: bool,
    /// Image in the Klein group {id,b,c,d} killing a.
    proj: u8,
    /// Construction counts of the letters b, c, d.
    counts: [u128; 3],
    /// Construction length, an upper bound on the reduced word length.
    len: u128,
    step: OnceLock<Step>,
    inv: OnceLock<Expr>,
}

enum Kind {
    Word(Vec<Letter>),
    Product(Vec<Expr>),
    /// ζ_{ω_level} applied to a child of level+1.
    Zeta(Expr),
    /// ι(child, path): acts as the child below `path`, trivially elsewhere.
    Rist(Expr, Vec<u8>),
}

/// One step of wreath recursion of a structured element.
#[derive(Clone)]
pub struct Step {
    pub left: Expr,
    pub right: Expr,
    pub swap: bool,
}

fn sat_add(a: u128, b: u128) -> u128 {
    a.saturating_add(b)
}

fn sat_mul(a: u128, b: u128) -> u128 {
    a.saturating_mul(b)
}

impl Expr {
    fn from_node(kind: Kind, level: usize, swap: bool, proj: u8, counts: [u128; 3], len: u128) -> Self {
        Expr(Arc::new(Node { kind, level, swap, proj, counts, len, step: OnceLock::new(), inv: OnceLock::new() }))
    }

    /// A flat word (reduced on construction).
    pub fn word(level: usize, letters: Vec<Letter>) -> Self {
        let w = reduce(&letters);
        let mut swap = false;
        let mut proj = 0u8;
        let mut counts = [0u128; 3];
        for &l in &w {
            if l == Letter::A {
                swap = !swap;
            } else {
                proj ^= l.code();
                counts[l.code() as usize - 1] += 1;
            }
        }
        let len = w.len() as u128;
        Self::from_node(Kind::Word(w), level, swap, proj, counts, len)
    }

    pub fn parse(level: usize, s: &str) -> Result<Self> {
        Ok(Self::word(level, super::parse_word(s)?))
    }

    pub fn identity(level: usize) -> Self {
        Self::word(level, Vec::new())
    }

    pub fn letter(level: usize, l: Letter) -> Self {
        Self::word(level, vec![l])
    }

    pub fn level(&self) -> usize {
        self.0.level
    }

    pub fn swap(&self) -> bool {
        self.0.swap
    }

    pub fn proj(&self) -> u8 {
        self.0.proj
    }

    pub fn counts(&self) -> [u128; 3] {
        self.0.counts
    }

    /// Construction length (upper bound on the word length).
    pub fn construction_len(&self) -> u128 {
        self.0.len
    }

    pub fn as_word(&self) -> Option<&[Letter]> {
        match &self.0.kind {
            Kind::Word(w) => Some(w),
            _ => None,
        }
    }

    pub fn is_trivial_word(&self) -> bool {
        matches!(&self.0.kind, Kind::Word(w) if w.is_empty())
    }

    pub fn ptr_eq(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    fn check_level(om: &OmegaString, expected: usize, got: usize, what: &str) -> Result<()> {
        if om.canon(expected) != om.canon(got) {
            return Err(Error::Mismatch(format!("{what}: expected level {expected}, child has level {got}")));
        }
        Ok(())
    }

    /// Product of factors of a common level, simplified: nested products are
    /// flattened, identities dropped, adjacent words merged.
    pub fn product(om: &OmegaString, level: usize, factors: Vec<Expr>) -> Result<Self> {
        let mut flat: Vec<Expr> = Vec::with_capacity(factors.len());
        let push = |flat: &mut Vec<Expr>, f: Expr| {
            if f.is_trivial_word() {
                return;
            }
            if let (Some(w2), Some(last)) = (f.as_word(), flat.last()) {
                if let Some(w1) = last.as_word() {
                    let mut w = w1.to_vec();
                    for &l in w2 {
                        push_reduced(&mut w, l);
                    }
                    let lvl = last.level();
                    flat.pop();
                    if !w.is_empty() {
                        flat.push(Expr::word(lvl, w));
                    }
                    return;
                }
            }
            flat.push(f);
        };
        for f in factors {
            Self::check_level(om, level, f.level(), "product")?;
            match &f.0.kind {
                Kind::Product(inner) => {
                    for g in inner {
                        push(&mut flat, g.clone());
                    }
                }
                _ => push(&mut flat, f),
            }
        }
        match flat.len() {
            0 => Ok(Expr::identity(level)),
            1 => Ok(flat.pop().unwrap()),
            _ => {
                let mut swap = false;
                let mut proj = 0;
                let mut counts = [0u128; 3];
                let mut len = 0u128;
                for f in &flat {
                    swap ^= f.0.swap;
                    proj ^= f.0.proj;
                    for i in 0..3 {
                        counts[i] = sat_add(counts[i], f.0.counts[i]);
                    }
                    len = sat_add(len, f.0.len);
                }
                Ok(Self::from_node(Kind::Product(flat), level, swap, proj, counts, len))
            }
        }
    }

    /// ζ_{ω_level}(child), the child being of level+1 and representable as a
    /// word in {ab,ac,ad}* or {ba,ca,da}*.
    pub fn zeta(om: &OmegaString, level: usize, child: Expr) -> Result<Self> {
        Self::check_level(om, level + 1, child.level(), "zeta")?;
        if child.is_trivial_word() {
            return Ok(Expr::identity(level));
        }
        let digit = om.digit(level);
        let proj_image = child.0.proj != 0 && Letter::from_code(child.0.proj).image(digit).is_some();
        let swap = child.0.swap ^ proj_image;
        let m = substitution_matrix(digit);
        let c = child.0.counts;
        let mut counts = [0u128; 3];
        for (i, out) in counts.iter_mut().enumerate() {
            for (j, cj) in c.iter().enumerate() {
                *out = sat_add(*out, sat_mul(m[i][j] as u128, *cj));
            }
        }
        let len = sat_mul(2, counts.iter().fold(0u128, |a, b| sat_add(a, *b)));
        Ok(Self::from_node(Kind::Zeta(child), level, swap, 0, counts, len))
    }

    /// Chain ζ_{ω_level} ∘ … ∘ ζ_{ω_{level+depth−1}} applied to a child of
    /// level level+depth.
    pub fn zeta_chain(om: &OmegaString, level: usize, depth: usize, child: Expr) -> Result<Self> {
        let mut e = child;
        for l in (level..level + depth).rev() {
            e = Expr::zeta(om, l, e)?;
        }
        Ok(e)
    }

    /// ι(child, path) of level `level`; the child has level level+|path|.
    pub fn rist(om: &OmegaString, level: usize, child: Expr, path: Vec<u8>) -> Result<Self> {
        Self::check_level(om, level + path.len(), child.level(), "rist")?;
        if path.is_empty() || child.is_trivial_word() {
            return if path.is_empty() { Ok(child) } else { Ok(Expr::identity(level)) };
        }
        let mut counts = child.0.counts;
        let mut na = match child.as_word() {
            Some(w) => w.iter().filter(|l| **l == Letter::A).count() as u128,
            None => counts.iter().fold(0u128, |a, b| sat_add(a, *b)),
        };
        let mut len = child.0.len;
        for m in (1..=path.len()).rev() {
            let y = sigma_letter(om, level, m);
            counts[y.code() as usize - 1] = sat_add(counts[y.code() as usize - 1], na);
            len = sat_add(len, sat_mul(2, na));
            na = sat_mul(2, na);
        }
        let proj = child.0.proj;
        Ok(Self::from_node(Kind::Rist(child, path), level, false, proj, counts, len))
    }

    /// Inverse, with inversion pushed to the leaves.
    pub fn inverse(&self, om: &OmegaString) -> Result<Expr> {
        if let Some(i) = self.0.inv.get() {
            return Ok(i.clone());
        }
        let level = self.level();
        let inv = match &self.0.kind {
            Kind::Word(w) => {
                let mut r = w.clone();
                r.reverse();
                Expr::word(level, r)
            }
            Kind::Product(fs) => {
                let mut out = Vec::with_capacity(fs.len());
                for f in fs.iter().rev() {
                    out.push(f.inverse(om)?);
                }
                Expr::product(om, level, out)?
            }
            Kind::Zeta(c) => Expr::zeta(om, level, c.inverse(om)?)?,
            Kind::Rist(c, p) => Expr::rist(om, level, c.inverse(om)?, p.clone())?,
        };
        let _ = self.0.inv.set(inv.clone());
        Ok(inv)
    }

    /// Apply the element to the digits starting at `pos`; returns the germ
    /// code (xor-encoded Klein value) at the ray when `x` is a ray buffer.
    pub fn act(&self, om: &OmegaString, x: &mut Digits, pos: usize) -> u8 {
        if !x.in_range(pos) {
            return 0;
        }
        match &self.0.kind {
            Kind::Word(w) => {
                let mut g = 0;
                for &l in w {
                    g ^= act_letter(om, self.0.level, l, x, pos);
                }
                g
            }
            Kind::Product(fs) => {
                let mut g = 0;
                for f in fs {
                    g ^= f.act(om, x, pos);
                }
                g
            }
            Kind::Zeta(c) => {
                let d = x.get(pos);
                if self.0.swap {
                    x.flip(pos);
                }
                match (self.0.swap, d) {
                    (false, 0) => {
                        x.flip(pos + 1);
                        let g = c.act(om, x, pos + 1);
                        x.flip(pos + 1);
                        g
                    }
                    (false, _) => c.act(om, x, pos + 1),
                    (true, 0) => {
                        x.flip(pos + 1);
                        c.act(om, x, pos + 1)
                    }
                    (true, _) => {
                        let g = c.act(om, x, pos + 1);
                        x.flip(pos + 1);
                        g
                    }
                }
            }
            Kind::Rist(c, path) => {
                for (i, &b) in path.iter().enumerate() {
                    if !x.in_range(pos + i) {
                        return 0;
                    }
                    if x.get(pos + i) != b {
                        return 0;
                    }
                }
                c.act(om, x, pos + path.len())
            }
        }
    }

    /// Action on a finite vertex.
    pub fn act_vertex(&self, om: &OmegaString, v: &[u8]) -> Vec<u8> {
        let mut x = Digits::vertex(v);
        self.act(om, &mut x, 0);
        x.into_bits()
    }

    /// One step of wreath recursion (memoized).
    pub fn one_step(&self, om: &OmegaString) -> Result<&Step> {
        if let Some(s) = self.0.step.get() {
            return Ok(s);
        }
        let level = self.level();
        let next = level + 1;
        let step = match &self.0.kind {
            Kind::Word(w) => {
                let (l, r, swap) = one_step_word(om, level, w);
                Step { left: Expr::word(next, l), right: Expr::word(next, r), swap }
            }
            Kind::Product(fs) => {
                let mut lefts = Vec::with_capacity(fs.len());
                let mut rights = Vec::with_capacity(fs.len());
                let mut swap = false;
                for f in fs {
                    let st = f.one_step(om)?;
                    if swap {
                        lefts.push(st.right.clone());
                        rights.push(st.left.clone());
                    } else {
                        lefts.push(st.left.clone());
                        rights.push(st.right.clone());
                    }
                    swap ^= st.swap;
                }
                Step { left: Expr::product(om, next, lefts)?, right: Expr::product(om, next, rights)?, swap }
            }
            Kind::Zeta(c) => {
                let a = Expr::letter(next, Letter::A);
                if self.0.swap {
                    Step {
                        left: Expr::product(om, next, vec![a.clone(), c.clone()])?,
                        right: Expr::product(om, next, vec![c.clone(), a])?,
                        swap: true,
                    }
                } else {
                    Step { left: Expr::product(om, next, vec![a.clone(), c.clone(), a])?, right: c.clone(), swap: false }
                }
            }
            Kind::Rist(c, path) => {
                let rest = Expr::rist(om, next, c.clone(), path[1..].to_vec())?;
                let id = Expr::identity(next);
                if path[0] == 0 {
                    Step { left: rest, right: id, swap: false }
                } else {
                    Step { left: id, right: rest, swap: false }
                }
            }
        };
        let _ = self.0.step.set(step);
        Ok(self.0.step.get().unwrap())
    }

    pub fn section_digit(&self, om: &OmegaString, b: u8) -> Result<Expr> {
        let st = self.one_step(om)?;
        Ok(if b == 0 { st.left.clone() } else { st.right.clone() })
    }

    pub fn section(&self, om: &OmegaString, v: &[u8]) -> Result<Expr> {
        let mut s = self.clone();
        for &b in v {
            if s.is_trivial_word() {
                return Ok(Expr::identity(self.level() + v.len()));
            }
            s = s.section_digit(om, b)?;
        }
        Ok(s)
    }

    /// Flat word of the element, by substitution on words. Fails when the
    /// construction length exceeds `max_len`.
    pub fn to_word(&self, om: &OmegaString, max_len: u128) -> Result<Vec<Letter>> {
        if self.0.len > max_len {
            return Err(Error::BoundExceeded(max_len as usize));
        }
        Ok(match &self.0.kind {
            Kind::Word(w) => w.clone(),
            Kind::Product(fs) => {
                let mut w = Vec::new();
                for f in fs {
                    for l in f.to_word(om, max_len)? {
                        push_reduced(&mut w, l);
                    }
                }
                w
            }
            Kind::Zeta(c) => zeta_word(om.digit(self.level()), &c.to_word(om, max_len)?)?,
            Kind::Rist(c, path) => reduce(&sigma_chain(om, self.level(), path, &c.to_word(om, max_len)?)),
        })
    }

    /// Number of nodes in the expression tree (shared nodes counted once per
    /// occurrence).
    pub fn node_count(&self) -> usize {
        1 + match &self.0.kind {
            Kind::Word(_) => 0,
            Kind::Product(fs) => fs.iter().map(|f| f.node_count()).sum(),
            Kind::Zeta(c) => c.node_count(),
            Kind::Rist(c, _) => c.node_count(),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.kind {
            Kind::Word(w) if w.is_empty() => write!(f, "id@{}", self.level()),
            Kind::Word(w) => write!(f, "{}@{}", word_to_string(w), self.level()),
            Kind::Product(fs) => {
                write!(f, "(")?;
                for (i, x) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "·")?;
                    }
                    write!(f, "{x:?}")?;
                }
                write!(f, ")")
            }
            Kind::Zeta(c) => write!(f, "ζ@{}[{:?}]", self.level(), c),
            Kind::Rist(c, p) => {
                write!(f, "ι@{}[{:?}; ", self.level(), c)?;
                for b in p {
                    write!(f, "{b}")?;
                }
                write!(f, "]")
            }
        }
    }
}
