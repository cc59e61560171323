use super::Graph;

/// Dense adjacency bitset, one row of `u64` words per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        BitMatrix {
            n,
            words,
            data: vec![0; n * words],
        }
    }

    pub fn from_graph(g: &Graph) -> Self {
        let mut b = BitMatrix::new(g.n());
        for u in 0..g.n() {
            for &v in g.neighbors(u) {
                b.set(u, v);
            }
        }
        b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn words(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn set(&mut self, u: usize, v: usize) {
        self.data[u * self.words + v / 64] |= 1 << (v % 64);
    }

    #[inline]
    pub fn has(&self, u: usize, v: usize) -> bool {
        self.data[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    #[inline]
    pub fn row(&self, u: usize) -> &[u64] {
        &self.data[u * self.words..(u + 1) * self.words]
    }
}

/// Helpers for bitsets stored as `[u64]`.
pub mod bitset {
    pub fn new(n: usize) -> Vec<u64> {
        vec![0; n.div_ceil(64).max(1)]
    }

    pub fn full(n: usize) -> Vec<u64> {
        let mut b = new(n);
        for v in 0..n {
            insert(&mut b, v);
        }
        b
    }

    #[inline]
    pub fn insert(b: &mut [u64], v: usize) {
        b[v / 64] |= 1 << (v % 64);
    }

    #[inline]
    pub fn remove(b: &mut [u64], v: usize) {
        b[v / 64] &= !(1 << (v % 64));
    }

    #[inline]
    pub fn contains(b: &[u64], v: usize) -> bool {
        b[v / 64] >> (v % 64) & 1 == 1
    }

    pub fn count(b: &[u64]) -> usize {
        b.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn and_count(a: &[u64], b: &[u64]) -> usize {
        a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as usize).sum()
    }

    /// Members of `a ∩ b` in increasing order.
    pub fn and_iter<'a>(a: &'a [u64], b: &'a [u64]) -> impl Iterator<Item = usize> + 'a {
        a.iter().zip(b).enumerate().flat_map(|(i, (x, y))| {
            let mut w = x & y;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(i * 64 + t)
                }
            })
        })
    }

    /// The `k`-th (0-based) member of `a ∩ b`.
    pub fn and_nth(a: &[u64], b: &[u64], mut k: usize) -> Option<usize> {
        for (i, (x, y)) in a.iter().zip(b).enumerate() {
            let mut w = x & y;
            let c = w.count_ones() as usize;
            if k >= c {
                k -= c;
                continue;
            }
            for _ in 0..k {
                w &= w - 1;
            }
            return Some(i * 64 + w.trailing_zeros() as usize);
        }
        None
    }
}
