//! Small numeric helpers: exact ceil-log2, entropy, tuple enumeration, a
//! deterministic rng for reproducible sweeps, and labeled-tree enumeration.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// ceil(log2(x)) for x >= 1, exact.
pub fn ceil_log2(x: &BigUint) -> u64 {
    assert!(!x.is_zero(), "ceil_log2 of zero");
    let bits = x.bits();
    if x.count_ones() == 1 {
        bits - 1
    } else {
        bits
    }
}

/// ceil(log2(k^n)) for k >= 1, exact.
pub fn ceil_log2_pow(k: u64, n: u64) -> u64 {
    ceil_log2(&BigUint::from(k).pow(n as u32))
}

/// Shannon entropy in bits of a probability vector (zero entries contribute 0).
pub fn entropy_bits(probs: &[BigRational]) -> f64 {
    probs
        .iter()
        .filter(|p| !p.is_zero())
        .map(|p| {
            let p = p.to_f64().expect("probability out of f64 range");
            -p * p.log2()
        })
        .sum()
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("rational out of f64 range")
}

/// Number of tuples in the product of the given alphabet sizes.
pub fn product_size(sizes: &[u32]) -> u128 {
    sizes.iter().map(|&s| s as u128).product()
}

/// Row-major index of a tuple (last coordinate varies fastest).
pub fn tuple_index(sizes: &[u32], tuple: &[u32]) -> usize {
    debug_assert_eq!(sizes.len(), tuple.len());
    let mut idx = 0usize;
    for (s, x) in sizes.iter().zip(tuple) {
        debug_assert!(x < s);
        idx = idx * (*s as usize) + *x as usize;
    }
    idx
}

/// Iterator over all tuples of the product alphabet, in row-major order.
pub fn tuples(sizes: &[u32]) -> Tuples {
    Tuples {
        sizes: sizes.to_vec(),
        next: if sizes.contains(&0) {
            None
        } else {
            Some(vec![0; sizes.len()])
        },
    }
}

pub struct Tuples {
    sizes: Vec<u32>,
    next: Option<Vec<u32>>,
}

impl Iterator for Tuples {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let current = self.next.clone()?;
        let mut succ = current.clone();
        let mut pos = self.sizes.len();
        loop {
            if pos == 0 {
                self.next = None;
                break;
            }
            pos -= 1;
            succ[pos] += 1;
            if succ[pos] < self.sizes[pos] {
                self.next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(current)
    }
}

/// SplitMix64: tiny deterministic generator for seeded sweeps. The sequence
/// depends only on the seed, so reports built from it are reproducible.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform value in 0..bound (bound >= 1).
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound >= 1);
        self.next_u64() % bound
    }
}

/// All labeled trees on nodes 1..=n as edge lists, via Prüfer sequences.
/// n = 1 yields one empty tree; n = 2 the single edge.
pub fn labeled_trees(n: usize) -> Vec<Vec<(u32, u32)>> {
    assert!((1..=7).contains(&n), "labeled_trees is for small n");
    if n == 1 {
        return vec![vec![]];
    }
    if n == 2 {
        return vec![vec![(1, 2)]];
    }
    let mut out = Vec::new();
    let len = n - 2;
    let mut seq = vec![1u32; len];
    loop {
        out.push(prufer_decode(&seq, n));
        // advance the sequence in base n
        let mut pos = len;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            seq[pos] += 1;
            if seq[pos] <= n as u32 {
                break;
            }
            seq[pos] = 1;
        }
    }
}

fn prufer_decode(seq: &[u32], n: usize) -> Vec<(u32, u32)> {
    let mut degree = vec![1u32; n + 1];
    for &s in seq {
        degree[s as usize] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut used = vec![false; n + 1];
    for &s in seq {
        let leaf = (1..=n as u32)
            .find(|&v| degree[v as usize] == 1 && !used[v as usize])
            .expect("prufer decode leaf");
        edges.push((leaf.min(s), leaf.max(s)));
        used[leaf as usize] = true;
        degree[s as usize] -= 1;
    }
    let rest: Vec<u32> = (1..=n as u32)
        .filter(|&v| !used[v as usize] && degree[v as usize] >= 1)
        .collect();
    debug_assert_eq!(rest.len(), 2);
    edges.push((rest[0].min(rest[1]), rest[0].max(rest[1])));
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log2_exact_values() {
        assert_eq!(ceil_log2(&BigUint::from(1u32)), 0);
        assert_eq!(ceil_log2(&BigUint::from(2u32)), 1);
        assert_eq!(ceil_log2(&BigUint::from(3u32)), 2);
        assert_eq!(ceil_log2(&BigUint::from(4u32)), 2);
        assert_eq!(ceil_log2(&BigUint::from(5u32)), 3);
        // ceil(5 * log2(3)) = ceil(7.92) = 8
        assert_eq!(ceil_log2_pow(3, 5), 8);
        assert_eq!(ceil_log2_pow(1, 10), 0);
    }

    #[test]
    fn tuples_row_major_order() {
        let all: Vec<_> = tuples(&[2, 3]).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[1], vec![0, 1]);
        assert_eq!(all[5], vec![1, 2]);
        for (i, t) in all.iter().enumerate() {
            assert_eq!(tuple_index(&[2, 3], t), i);
        }
    }

    #[test]
    fn labeled_tree_counts_follow_cayley() {
        assert_eq!(labeled_trees(2).len(), 1);
        assert_eq!(labeled_trees(3).len(), 3);
        assert_eq!(labeled_trees(4).len(), 16);
        assert_eq!(labeled_trees(5).len(), 125);
    }

    #[test]
    fn splitmix_is_deterministic() {
        let a: Vec<u64> = {
            let mut r = SplitMix64::new(7);
            (0..5).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = SplitMix64::new(7);
            (0..5).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
    }
}
