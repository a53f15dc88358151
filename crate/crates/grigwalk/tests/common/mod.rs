//! Independent oracles written directly from the defining recursions.

#![allow(dead_code)]

/// Digit of a purely periodic string.
pub fn digit(period: &[u8], n: usize) -> u8 {
    period[n % period.len()]
}

/// v·s for a generator s ∈ {a,b,c,d} of level `level`, from
/// a = swap, γ = (ω_level(γ), γ at level+1) where the digit 0 kills d,
/// 1 kills c and 2 kills b.
pub fn act_gen(period: &[u8], level: usize, s: char, v: &[u8]) -> Vec<u8> {
    let mut out = v.to_vec();
    if v.is_empty() {
        return out;
    }
    if s == 'a' {
        out[0] ^= 1;
        return out;
    }
    let killed = match digit(period, level) {
        0 => 'd',
        1 => 'c',
        _ => 'b',
    };
    if v[0] == 0 {
        if s != killed && out.len() > 1 {
            out[1] ^= 1;
        }
    } else {
        let rest = act_gen(period, level + 1, s, &v[1..]);
        out[1..].copy_from_slice(&rest);
    }
    out
}

pub fn act_word(period: &[u8], level: usize, w: &str, v: &[u8]) -> Vec<u8> {
    w.chars().fold(v.to_vec(), |x, s| act_gen(period, level, s, &x))
}

/// All vertices of a level, lexicographic.
pub fn level(depth: usize) -> Vec<Vec<u8>> {
    (0..1usize << depth)
        .map(|i| (0..depth).map(|k| ((i >> (depth - 1 - k)) & 1) as u8).collect())
        .collect()
}

pub fn vertex_index(v: &[u8]) -> usize {
    v.iter().fold(0, |a, b| (a << 1) | *b as usize)
}

/// Permutation of a level induced by a word.
pub fn perm(period: &[u8], w: &str, depth: usize) -> Vec<usize> {
    level(depth).iter().map(|v| vertex_index(&act_word(period, 0, w, v))).collect()
}

/// Order of a permutation.
pub fn perm_order(p: &[usize]) -> usize {
    let mut seen = vec![false; p.len()];
    let mut l = 1usize;
    for i in 0..p.len() {
        if seen[i] {
            continue;
        }
        let mut c = 0;
        let mut j = i;
        while !seen[j] {
            seen[j] = true;
            j = p[j];
            c += 1;
        }
        l = lcm(l, c);
    }
    l
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Ray p1^∞ acted on by a word, computed on a long enough prefix.
pub fn act_ray(period: &[u8], w: &str, prefix: &[u8]) -> Vec<u8> {
    let mut v = prefix.to_vec();
    v.extend(std::iter::repeat_n(1, w.len() + 8));
    let mut out = act_word(period, 0, w, &v);
    while out.last() == Some(&1) {
        out.pop();
    }
    out
}

/// Ball sizes by distinct permutations of a deep level.
pub fn ball_sizes_by_perm(period: &[u8], radius: usize, depth: usize) -> Vec<u64> {
    use std::collections::HashSet;
    let gens: Vec<Vec<usize>> = ["a", "b", "c", "d"].iter().map(|g| perm(period, g, depth)).collect();
    let id: Vec<usize> = (0..1 << depth).collect();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    seen.insert(id.clone());
    let mut frontier = vec![id];
    let mut sizes = vec![1u64];
    for _ in 0..radius {
        let mut next = Vec::new();
        for p in &frontier {
            for g in &gens {
                let q: Vec<usize> = p.iter().map(|&y| g[y]).collect();
                if seen.insert(q.clone()) {
                    next.push(q);
                }
            }
        }
        sizes.push(seen.len() as u64);
        frontier = next;
    }
    sizes
}

/// Flat first-group ζ on usual-notation words: ab→abadac, ac→abab,
/// ad→acac, by string replacement on syllables.
pub fn usual_zeta(w: &str) -> String {
    let b = w.as_bytes();
    assert!(b.len().is_multiple_of(2) && b.chunks(2).all(|p| p[0] == b'a'));
    b.chunks(2)
        .map(|p| match p[1] {
            b'b' => "abadac",
            b'c' => "abab",
            b'd' => "acac",
            _ => panic!("bad syllable"),
        })
        .collect()
}

/// Gray decoding by brute force: BFS distance from 1^∞ on a window of the
/// Schreier graph, with rays truncated at length `depth`.
pub fn bfs_distances(period: &[u8], depth: usize) -> std::collections::HashMap<Vec<u8>, usize> {
    use std::collections::{HashMap, VecDeque};
    let start = vec![1u8; depth];
    let mut dist = HashMap::new();
    dist.insert(start.clone(), 0usize);
    let mut q = VecDeque::from([start]);
    while let Some(v) = q.pop_front() {
        let d = dist[&v];
        for s in ['a', 'b', 'c', 'd'] {
            let u = act_gen(period, 0, s, &v);
            if !dist.contains_key(&u) {
                dist.insert(u.clone(), d + 1);
                q.push_back(u);
            }
        }
    }
    dist
}
