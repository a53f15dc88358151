//! The G_ω layer: defining strings, germ values at rays, the ⟨b⟩-germ
//! sub-groupoid and the subgroup H^b.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::core_tree::{one_step_word, Element, Expr, Letter, Vertex};
use crate::error::{Error, Result};
use crate::schreier::OrbitPoint;

/// An eventually periodic string over {0,1,2}, written `preperiod|period`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct OmegaString {
    pre: Vec<u8>,
    period: Vec<u8>,
}

impl OmegaString {
    pub fn new(pre: Vec<u8>, period: Vec<u8>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::Parse("period must be nonempty".into()));
        }
        if pre.iter().chain(period.iter()).any(|&d| d > 2) {
            return Err(Error::Parse("digits must lie in {0,1,2}".into()));
        }
        Ok(Self { pre, period })
    }

    /// The string (012)^∞ defining the first Grigorchuk group.
    pub fn first_group() -> Self {
        Self { pre: vec![], period: vec![0, 1, 2] }
    }

    /// A purely periodic string.
    pub fn periodic(period: &[u8]) -> Result<Self> {
        Self::new(vec![], period.to_vec())
    }

    pub fn preperiod(&self) -> &[u8] {
        &self.pre
    }

    pub fn period(&self) -> &[u8] {
        &self.period
    }

    pub fn digit(&self, n: usize) -> u8 {
        if n < self.pre.len() {
            self.pre[n]
        } else {
            self.period[(n - self.pre.len()) % self.period.len()]
        }
    }

    /// Representative level with the same tail: levels with equal canonical
    /// level define identical groups with identical letter names.
    pub fn canon(&self, n: usize) -> usize {
        let p = self.pre.len();
        if n < p {
            n
        } else {
            p + (n - p) % self.period.len()
        }
    }

    /// Letter killed by the digit at level n.
    pub fn kills(&self, n: usize) -> Letter {
        omega_kills(self.digit(n))
    }

    /// The shifted string s^k ω.
    pub fn shift(&self, k: usize) -> Self {
        if k <= self.pre.len() {
            return Self { pre: self.pre[k..].to_vec(), period: self.period.clone() };
        }
        let r = (k - self.pre.len()) % self.period.len();
        let mut period = self.period[r..].to_vec();
        period.extend_from_slice(&self.period[..r]);
        Self { pre: vec![], period }
    }

    /// True when all three digits occur in the period (torsion-type strings).
    pub fn is_torsion_type(&self) -> bool {
        (0..3).all(|d| self.period.contains(&d))
    }

    /// Letter bijection φ with φ(kills(from+k)) = kills(to+k) for all k, when
    /// one exists. Elements of G_{s^from ω} are then elements of G_{s^to ω}
    /// after renaming letters by φ.
    pub fn letter_map(&self, from: usize, to: usize) -> Option<[Letter; 4]> {
        let mut map: [Option<u8>; 3] = [None; 3];
        let horizon = self.pre.len() + 2 * self.period.len() + 3;
        for k in 0..horizon {
            let s = self.digit(from + k) as usize;
            let t = self.digit(to + k);
            match map[s] {
                None => {
                    if map.contains(&Some(t)) {
                        return None;
                    }
                    map[s] = Some(t);
                }
                Some(u) if u != t => return None,
                _ => {}
            }
        }
        let mut unused: Vec<u8> = (0..3).filter(|t| !map.contains(&Some(*t))).collect();
        for m in map.iter_mut() {
            if m.is_none() {
                *m = unused.pop();
            }
        }
        let mut out = [Letter::A; 4];
        for s in 0..3u8 {
            out[omega_kills(s).code() as usize] = omega_kills(map[s as usize].unwrap());
        }
        Some(out)
    }
}

impl fmt::Display for OmegaString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.pre {
            write!(f, "{d}")?;
        }
        write!(f, "|")?;
        for d in &self.period {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl FromStr for OmegaString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let digits = |t: &str| -> Result<Vec<u8>> {
            t.trim()
                .chars()
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    '2' => Ok(2),
                    _ => Err(Error::Parse(format!("bad digit {c:?} in omega string"))),
                })
                .collect()
        };
        match s.split_once('|') {
            Some((pre, per)) => Self::new(digits(pre)?, digits(per)?),
            None => Self::new(vec![], digits(s)?),
        }
    }
}

impl TryFrom<String> for OmegaString {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<OmegaString> for String {
    fn from(o: OmegaString) -> String {
        o.to_string()
    }
}

/// Digit 0, 1, 2 kills d, c, b respectively.
pub fn omega_kills(digit: u8) -> Letter {
    Letter::from_code(3 - digit)
}

/// Germ values at a cofinal ray: the Klein four-group {id,b,c,d}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GermValue {
    Id,
    B,
    C,
    D,
}

impl GermValue {
    pub fn from_code(c: u8) -> Self {
        match c & 3 {
            0 => GermValue::Id,
            1 => GermValue::B,
            2 => GermValue::C,
            _ => GermValue::D,
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn mul(self, other: Self) -> Self {
        Self::from_code(self.code() ^ other.code())
    }

    pub fn coset(self) -> GermCoset {
        if self.code() >> 1 == 0 {
            GermCoset::B
        } else {
            GermCoset::CB
        }
    }

    pub fn to_char(self) -> char {
        match self {
            GermValue::Id => 'e',
            GermValue::B => 'b',
            GermValue::C => 'c',
            GermValue::D => 'd',
        }
    }
}

/// Cosets of the germ group modulo ⟨b⟩ = {id,b}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GermCoset {
    B,
    CB,
}

/// Ternary answer for searches that may run out of budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    True,
    False,
    Undecided,
}

/// Germ of a flat element at a cofinal ray, by descending sections along the
/// ray until the section is a nucleus letter beyond the last zero.
pub fn germ_at(g: &Element, x: &OrbitPoint) -> Result<GermValue> {
    let om = g.ctx().omega();
    let last = x.max_position();
    let mut word = g.letters().to_vec();
    let mut level = g.level();
    let mut pos = 1usize;
    let guard = last + 3 * (word.len() + om.period().len()) + 64;
    loop {
        if pos > last && word.len() <= 1 {
            return Ok(match word.first() {
                None | Some(Letter::A) => GermValue::Id,
                Some(l) => GermValue::from_code(l.code()),
            });
        }
        if pos > guard {
            return Err(Error::RecursionGuard { depth: pos, len: word.len() });
        }
        let (l, r, _) = one_step_word(om, level, &word);
        word = if x.digit(pos) == 0 { l } else { r };
        level += 1;
        pos += 1;
    }
}

/// Germ of a structured element at a cofinal ray, computed from sections of
/// the whole element (not factor by factor).
pub fn germ_at_expr(g: &Expr, om: &OmegaString, x: &OrbitPoint) -> Result<GermValue> {
    let last = x.max_position();
    let mut s = g.clone();
    let mut pos = 1usize;
    let guard = last + 4096;
    loop {
        if pos > last {
            if let Some(w) = s.as_word() {
                if w.len() <= 1 {
                    return Ok(match w.first() {
                        None | Some(Letter::A) => GermValue::Id,
                        Some(l) => GermValue::from_code(l.code()),
                    });
                }
            }
        }
        if pos > guard {
            return Err(Error::RecursionGuard { depth: pos, len: 0 });
        }
        s = s.section_digit(om, x.digit(pos))?;
        pos += 1;
    }
}

fn hb_letter(w: &[Letter]) -> Option<bool> {
    match w {
        [] | [Letter::A] | [Letter::B] => Some(true),
        [Letter::C] | [Letter::D] => Some(false),
        _ => None,
    }
}

/// H^b membership of a flat element: every branch of the portrait reaches a
/// section in {id, a, b}. Sections of id, a, b stay in that set, so a
/// branchwise search is equivalent to finding one level where all sections
/// lie in it.
pub fn in_hb(g: &Element, max_depth: usize) -> Decision {
    let om = g.ctx().omega();
    let mut memo: HashMap<(usize, Vec<Letter>), Decision> = HashMap::new();
    fn rec(
        om: &OmegaString,
        level: usize,
        w: Vec<Letter>,
        depth: usize,
        max_depth: usize,
        memo: &mut HashMap<(usize, Vec<Letter>), Decision>,
    ) -> Decision {
        if let Some(b) = hb_letter(&w) {
            return if b { Decision::True } else { Decision::False };
        }
        if depth >= max_depth {
            return Decision::Undecided;
        }
        let key = (om.canon(level), w.clone());
        if let Some(d) = memo.get(&key) {
            return *d;
        }
        let (l, r, _) = one_step_word(om, level, &w);
        let dl = rec(om, level + 1, l, depth + 1, max_depth, memo);
        let out = if dl == Decision::False {
            Decision::False
        } else {
            let dr = rec(om, level + 1, r, depth + 1, max_depth, memo);
            match (dl, dr) {
                (_, Decision::False) => Decision::False,
                (Decision::True, Decision::True) => Decision::True,
                _ => Decision::Undecided,
            }
        };
        memo.insert(key, out);
        out
    }
    rec(om, g.level(), g.letters().to_vec(), 0, max_depth, &mut memo)
}

/// H^b membership for a structured element.
pub fn in_hb_expr(g: &Expr, om: &OmegaString, max_depth: usize) -> Result<Decision> {
    fn rec(g: &Expr, om: &OmegaString, depth: usize, max_depth: usize) -> Result<Decision> {
        if let Some(w) = g.as_word() {
            if let Some(b) = hb_letter(w) {
                return Ok(if b { Decision::True } else { Decision::False });
            }
        }
        if depth >= max_depth {
            return Ok(Decision::Undecided);
        }
        let st = g.one_step(om)?;
        let dl = rec(&st.left, om, depth + 1, max_depth)?;
        if dl == Decision::False {
            return Ok(Decision::False);
        }
        let dr = rec(&st.right, om, depth + 1, max_depth)?;
        Ok(match (dl, dr) {
            (_, Decision::False) => Decision::False,
            (Decision::True, Decision::True) => Decision::True,
            _ => Decision::Undecided,
        })
    }
    rec(g, om, 0, max_depth)
}

/// All cofinal rays where the germ of g lies in {c, d}, found by walking the
/// portrait until every section is a nucleus letter.
pub fn bad_germ_support(g: &Expr, om: &OmegaString, depth_bound: usize) -> Result<Vec<OrbitPoint>> {
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<u8>, Expr)> = vec![(Vec::new(), g.clone())];
    while let Some((prefix, s)) = stack.pop() {
        if let Some(w) = s.as_word() {
            if w.len() <= 1 {
                if matches!(w.first(), Some(Letter::C) | Some(Letter::D)) {
                    out.push(OrbitPoint::from_prefix(&prefix));
                }
                continue;
            }
        }
        if prefix.len() >= depth_bound {
            return Err(Error::BoundExceeded(depth_bound));
        }
        let st = s.one_step(om)?;
        let mut p0 = prefix.clone();
        p0.push(0);
        let mut p1 = prefix;
        p1.push(1);
        stack.push((p0, st.left.clone()));
        stack.push((p1, st.right.clone()));
    }
    out.sort();
    Ok(out)
}

/// Bad-germ support of a flat element.
pub fn bad_germ_support_flat(g: &Element, depth_bound: usize) -> Result<Vec<OrbitPoint>> {
    let om = g.ctx().omega();
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<u8>, usize, Vec<Letter>)> = vec![(Vec::new(), g.level(), g.letters().to_vec())];
    while let Some((prefix, level, w)) = stack.pop() {
        if w.len() <= 1 {
            if matches!(w.first(), Some(Letter::C) | Some(Letter::D)) {
                out.push(OrbitPoint::from_prefix(&prefix));
            }
            continue;
        }
        if prefix.len() >= depth_bound {
            return Err(Error::BoundExceeded(depth_bound));
        }
        let (l, r, _) = one_step_word(om, level, &w);
        let mut p0 = prefix.clone();
        p0.push(0);
        let mut p1 = prefix;
        p1.push(1);
        stack.push((p0, level + 1, l));
        stack.push((p1, level + 1, r));
    }
    out.sort();
    Ok(out)
}

/// Germ of g along the ray v1^∞ below a vertex.
pub fn germ_below(g: &Element, v: &Vertex) -> Result<GermValue> {
    germ_at(g, &OrbitPoint::from_prefix(v.bits()))
}
