/// Mutable digit buffer used for actions. A ray buffer reads 1 beyond its
/// stored digits; a vertex buffer has a fixed length and ignores writes
/// beyond it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digits {
    d: Vec<u8>,
    bound: Option<usize>,
    overflow: bool,
}

/// Default capacity for ray buffers (positions are 0-based here).
pub const RAY_CAPACITY: usize = 1024;

impl Digits {
    pub fn vertex(bits: &[u8]) -> Self {
        Digits { d: bits.to_vec(), bound: Some(bits.len()), overflow: false }
    }

    /// A ray cofinal with 1^∞ given by its finite prefix.
    pub fn ray(prefix: &[u8]) -> Self {
        let mut d = prefix.to_vec();
        while d.last() == Some(&1) {
            d.pop();
        }
        Digits { d, bound: None, overflow: false }
    }

    pub fn is_ray(&self) -> bool {
        self.bound.is_none()
    }

    #[inline]
    pub fn in_range(&self, i: usize) -> bool {
        match self.bound {
            Some(b) => i < b,
            None => true,
        }
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        if i < self.d.len() {
            self.d[i]
        } else {
            1
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        match self.bound {
            Some(b) if i >= b => {}
            _ => {
                if i >= self.d.len() {
                    if i >= RAY_CAPACITY && self.bound.is_none() {
                        self.overflow = true;
                        return;
                    }
                    self.d.resize(i + 1, 1);
                }
                self.d[i] ^= 1;
                if self.bound.is_none() {
                    while self.d.last() == Some(&1) {
                        self.d.pop();
                    }
                }
            }
        }
    }

    /// First index ≥ pos holding a 0.
    #[inline]
    pub fn first_zero_from(&self, pos: usize) -> Option<usize> {
        if pos >= self.d.len() {
            return None;
        }
        self.d[pos..].iter().position(|&b| b == 0).map(|k| k + pos)
    }

    /// True when no zero occurs at or after `pos`.
    #[inline]
    pub fn tail_is_ones(&self, pos: usize) -> bool {
        self.first_zero_from(pos).is_none()
    }

    pub fn overflowed(&self) -> bool {
        self.overflow
    }

    pub fn bits(&self) -> &[u8] {
        &self.d
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.d
    }

    /// 1-based positions of zeros.
    pub fn zeros(&self) -> Vec<u32> {
        self.d.iter().enumerate().filter(|(_, b)| **b == 0).map(|(i, _)| i as u32 + 1).collect()
    }
}
