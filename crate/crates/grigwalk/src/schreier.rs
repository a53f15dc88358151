//! The orbit of o = 1^∞: points, Gray-code index, distance, neighbors, BFS
//! oracle and graph export.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::core_tree::{act_letter, Digits, Element, Expr, Letter, Vertex};
use crate::error::{Error, Result};
use crate::grigorchuk::OmegaString;

/// Position on the half-line Schreier graph.
pub type GrayIndex = BigUint;

/// Default bound on flipped positions.
pub const ORBIT_CAPACITY: u32 = 1 << 10;

/// A ray cofinal with 1^∞, stored as the sorted 1-based positions of its zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct OrbitPoint {
    zeros: Vec<u32>,
}

impl OrbitPoint {
    /// The base point o = 1^∞.
    pub fn origin() -> Self {
        OrbitPoint { zeros: Vec::new() }
    }

    pub fn from_zeros(mut zeros: Vec<u32>) -> Result<Self> {
        zeros.sort_unstable();
        zeros.dedup();
        if zeros.first() == Some(&0) {
            return Err(Error::Parse("positions are 1-based".into()));
        }
        Ok(OrbitPoint { zeros })
    }

    /// The ray p1^∞ for a finite prefix p.
    pub fn from_prefix(prefix: &[u8]) -> Self {
        let zeros = prefix.iter().enumerate().filter(|(_, b)| **b == 0).map(|(i, _)| i as u32 + 1).collect();
        OrbitPoint { zeros }
    }

    pub fn from_digits(d: &Digits) -> Result<Self> {
        if d.overflowed() {
            return Err(Error::BoundExceeded(ORBIT_CAPACITY as usize));
        }
        Ok(OrbitPoint { zeros: d.zeros() })
    }

    pub fn zeros(&self) -> &[u32] {
        &self.zeros
    }

    pub fn is_origin(&self) -> bool {
        self.zeros.is_empty()
    }

    /// Largest flipped position, 0 for o.
    pub fn max_position(&self) -> usize {
        self.zeros.last().map(|p| *p as usize).unwrap_or(0)
    }

    /// Digit at a 1-based position.
    pub fn digit(&self, pos: usize) -> u8 {
        if self.zeros.binary_search(&(pos as u32)).is_ok() {
            0
        } else {
            1
        }
    }

    /// Digits up to the last zero.
    pub fn prefix(&self) -> Vec<u8> {
        (1..=self.max_position()).map(|i| self.digit(i)).collect()
    }

    pub fn to_digits(&self) -> Digits {
        Digits::ray(&self.prefix())
    }

    /// First n digits as a vertex.
    pub fn vertex(&self, n: usize) -> Vertex {
        Vertex::new((1..=n).map(|i| self.digit(i)).collect())
    }

    /// The shift sⁿ x.
    pub fn shift(&self, n: usize) -> Self {
        OrbitPoint { zeros: self.zeros.iter().filter(|p| **p as usize > n).map(|p| *p - n as u32).collect() }
    }

    /// Image under a flat element.
    pub fn act(&self, g: &Element) -> Result<Self> {
        let mut d = self.to_digits();
        g.act_digits(&mut d, 0);
        Self::from_digits(&d)
    }

    /// Image under a structured element.
    pub fn act_expr(&self, g: &Expr, om: &OmegaString) -> Result<Self> {
        let mut d = self.to_digits();
        g.act(om, &mut d, 0);
        Self::from_digits(&d)
    }
}

impl fmt::Display for OrbitPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z:")?;
        for (i, p) in self.zeros.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl FromStr for OrbitPoint {
    type Err = Error;

    /// Accepts "z:3,5,8", a Gray integer, or a digit prefix such as "0101".
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("z:") {
            let zeros = rest
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| t.trim().parse::<u32>().map_err(|e| Error::Parse(format!("{t}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            return Self::from_zeros(zeros);
        }
        if let Some(rest) = s.strip_prefix("g:") {
            let n: BigUint = rest.parse().map_err(|e| Error::Parse(format!("{rest}: {e}")))?;
            return Ok(from_gray_index(&n));
        }
        if !s.is_empty() && s.chars().all(|c| c == '0' || c == '1') {
            let bits: Vec<u8> = s.bytes().map(|b| b - b'0').collect();
            return Ok(Self::from_prefix(&bits));
        }
        Err(Error::Parse(format!("cannot parse orbit point {s:?}")))
    }
}

impl TryFrom<String> for OrbitPoint {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<OrbitPoint> for String {
    fn from(p: OrbitPoint) -> String {
        p.to_string()
    }
}

/// Gray bits b_m…b₁ (index i−1 holds b_i).
fn gray_bits(x: &OrbitPoint) -> Vec<bool> {
    let m = x.max_position();
    let mut b = vec![false; m];
    let mut acc = false;
    for i in (1..=m).rev() {
        acc ^= x.digit(i) == 0;
        b[i - 1] = acc;
    }
    b
}

/// Gray index Σ b_i 2^{i−1}, b_i = x̌_i ⊕ … ⊕ x̌_m.
pub fn gray_index(x: &OrbitPoint) -> GrayIndex {
    let mut n = BigUint::zero();
    for (i, b) in gray_bits(x).into_iter().enumerate() {
        if b {
            n.set_bit(i as u64, true);
        }
    }
    n
}

/// Gray index when it fits in 128 bits.
pub fn gray_index_u128(x: &OrbitPoint) -> Option<u128> {
    if x.max_position() > 128 {
        return None;
    }
    let mut n = 0u128;
    for (i, b) in gray_bits(x).into_iter().enumerate() {
        if b {
            n |= 1 << i;
        }
    }
    Some(n)
}

/// Inverse of `gray_index`: x̌_i = b_i ⊕ b_{i+1}.
pub fn from_gray_index(n: &GrayIndex) -> OrbitPoint {
    let m = n.bits() as usize;
    let zeros = (1..=m)
        .filter(|&i| n.bit(i as u64 - 1) != n.bit(i as u64))
        .map(|i| i as u32)
        .collect();
    OrbitPoint { zeros }
}

pub fn from_gray_u128(n: u128) -> OrbitPoint {
    let bit = |i: u32| if i < 128 { (n >> i) & 1 } else { 0 };
    let zeros = (1..=128u32).filter(|&i| bit(i - 1) != bit(i)).collect();
    OrbitPoint { zeros }
}

/// Closed-form Schreier distance |x̄ − ȳ|.
pub fn distance(x: &OrbitPoint, y: &OrbitPoint) -> BigUint {
    let (a, b) = (gray_index(x), gray_index(y));
    if a >= b {
        a - b
    } else {
        b - a
    }
}

/// Distance as u128 when both indices fit.
pub fn distance_u128(x: &OrbitPoint, y: &OrbitPoint) -> Option<u128> {
    Some(gray_index_u128(x)?.abs_diff(gray_index_u128(y)?))
}

/// x·s for the four generators, via the letterwise tree action.
pub fn neighbors(om: &OmegaString, x: &OrbitPoint) -> Vec<(Letter, OrbitPoint)> {
    [Letter::A, Letter::B, Letter::C, Letter::D]
        .into_iter()
        .map(|s| {
            let mut d = x.to_digits();
            act_letter(om, 0, s, &mut d, 0);
            (s, OrbitPoint { zeros: d.zeros() })
        })
        .collect()
}

/// Graph distance by breadth-first search, `None` beyond the cap.
pub fn bfs_distance(om: &OmegaString, x: &OrbitPoint, y: &OrbitPoint, radius_cap: usize) -> Option<usize> {
    if x == y {
        return Some(0);
    }
    let mut seen: HashMap<OrbitPoint, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    seen.insert(x.clone(), 0);
    queue.push_back(x.clone());
    while let Some(p) = queue.pop_front() {
        let dp = seen[&p];
        if dp >= radius_cap {
            continue;
        }
        for (_, q) in neighbors(om, &p) {
            if seen.contains_key(&q) {
                continue;
            }
            if &q == y {
                return Some(dp + 1);
            }
            seen.insert(q.clone(), dp + 1);
            queue.push_back(q);
        }
    }
    None
}

/// BFS distances from o to every point of the ball of the given radius.
pub fn bfs_ball(om: &OmegaString, radius: usize) -> HashMap<OrbitPoint, usize> {
    let mut seen: HashMap<OrbitPoint, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    seen.insert(OrbitPoint::origin(), 0);
    queue.push_back(OrbitPoint::origin());
    while let Some(p) = queue.pop_front() {
        let dp = seen[&p];
        if dp >= radius {
            continue;
        }
        for (_, q) in neighbors(om, &p) {
            if !seen.contains_key(&q) {
                seen.insert(q.clone(), dp + 1);
                queue.push_back(q);
            }
        }
    }
    seen
}

/// Checks d(x, x·g) ≤ 2ⁿ(|g_{x₁…x_n}| + 1).
pub fn displacement_check(g: &Element, x: &OrbitPoint, n: usize) -> Result<bool> {
    let y = x.act(g)?;
    let sec = g.section(&x.vertex(n));
    let bound = BigUint::from(sec.len() + 1) << n;
    Ok(distance(x, &y) <= bound)
}

/// The ball of Gray radius r as a DOT graph with generator-labelled edges.
pub fn export_graph(om: &OmegaString, radius: u64) -> String {
    let mut out = String::from("graph schreier {\n");
    for n in 0..=radius {
        let x = from_gray_index(&BigUint::from(n));
        out.push_str(&format!("  n{n} [label=\"{x}\"];\n"));
    }
    for n in 0..=radius {
        let x = from_gray_index(&BigUint::from(n));
        for (s, y) in neighbors(om, &x) {
            let m = gray_index(&y).to_u64().unwrap_or(u64::MAX);
            // Each undirected edge once; loops are omitted.
            if m > n && m <= radius {
                out.push_str(&format!("  n{n} -- n{m} [label=\"{}\"];\n", s.to_char()));
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Distance table as CSV rows "x,y,distance".
pub fn distance_csv(points: &[OrbitPoint]) -> String {
    let mut out = String::from("x,y,distance\n");
    for x in points {
        for y in points {
            out.push_str(&format!("{x},{y},{}\n", distance(x, y)));
        }
    }
    out
}
