//! Prefix-free codes with exact Kraft accounting.
//!
//! Two constructions live here. `PrefixCodebook` is an explicit codeword
//! table: Huffman lengths from exact rational probabilities, canonical
//! codewords assigned in (length, symbol) order. `BlockCode` is an implicit
//! canonical code over all length-N sequences of an effective alphabet whose
//! letters are either *plain* or *marked*; a sequence with w marked letters
//! gets length `L - w`. Codewords are computed by enumerative ranking, so
//! blocks of hundreds of instances never materialize the codebook.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::util::ceil_log2;

/// An explicit prefix-free codebook over symbols `0..k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixCodebook {
    words: Vec<Vec<u8>>,
}

impl PrefixCodebook {
    /// Canonical codewords for a feasible length function: symbols are sorted
    /// by (length, symbol id) and assigned binary values in counting order.
    /// A single symbol of length 0 gets the empty codeword.
    pub fn canonical_from_lengths(lengths: &[u64]) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::Invalid("empty codebook".into()));
        }
        if lengths.len() == 1 {
            return Ok(PrefixCodebook {
                words: vec![vec![0u8; lengths[0] as usize]],
            });
        }
        // Kraft feasibility, exactly: sum 2^(maxlen - l) <= 2^maxlen.
        let max_len = *lengths.iter().max().unwrap();
        let kraft_scaled: BigUint = lengths
            .iter()
            .map(|&l| BigUint::one() << (max_len - l))
            .sum();
        if kraft_scaled > BigUint::one() << max_len {
            return Err(Error::Invalid(
                "length function violates the Kraft inequality".into(),
            ));
        }
        let mut order: Vec<usize> = (0..lengths.len()).collect();
        order.sort_by_key(|&i| (lengths[i], i));
        let mut words = vec![Vec::new(); lengths.len()];
        let mut code = BigUint::zero();
        let mut prev_len = lengths[order[0]];
        for (rank, &i) in order.iter().enumerate() {
            let l = lengths[i];
            if rank > 0 {
                code += 1u32;
                code <<= l - prev_len;
            }
            words[i] = big_to_bits(&code, l);
            prev_len = l;
        }
        Ok(PrefixCodebook { words })
    }

    /// Deterministic binary Huffman code for an exact probability vector.
    /// Merging always takes the two smallest weights, ties broken by the
    /// smallest symbol id contained in the subtree; codewords are then
    /// assigned canonically from the resulting lengths.
    pub fn huffman(probs: &[BigRational]) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Invalid("empty probability vector".into()));
        }
        let total: BigRational = probs.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, expected exactly 1"
            )));
        }
        let k = probs.len();
        if k == 1 {
            // a single symbol needs no transmission at all
            return Ok(PrefixCodebook { words: vec![vec![]] });
        }
        #[derive(PartialEq, Eq, PartialOrd, Ord)]
        struct Node {
            weight: BigRational,
            min_symbol: usize,
            id: usize,
        }
        let mut heap: BinaryHeap<Reverse<Node>> = BinaryHeap::new();
        // tree nodes: leaves 0..k, merges appended after
        let mut children: Vec<Option<(usize, usize)>> = vec![None; k];
        for (i, p) in probs.iter().enumerate() {
            heap.push(Reverse(Node {
                weight: p.clone(),
                min_symbol: i,
                id: i,
            }));
        }
        while heap.len() > 1 {
            let Reverse(a) = heap.pop().unwrap();
            let Reverse(b) = heap.pop().unwrap();
            let id = children.len();
            children.push(Some((a.id, b.id)));
            heap.push(Reverse(Node {
                weight: a.weight + b.weight,
                min_symbol: a.min_symbol.min(b.min_symbol),
                id,
            }));
        }
        let root = heap.pop().unwrap().0.id;
        let mut lengths = vec![0u64; k];
        let mut stack = vec![(root, 0u64)];
        while let Some((node, depth)) = stack.pop() {
            match children[node] {
                Some((a, b)) => {
                    stack.push((a, depth + 1));
                    stack.push((b, depth + 1));
                }
                None => lengths[node] = depth,
            }
        }
        PrefixCodebook::canonical_from_lengths(&lengths)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, symbol: usize) -> &[u8] {
        &self.words[symbol]
    }

    pub fn lengths(&self) -> Vec<u64> {
        self.words.iter().map(|w| w.len() as u64).collect()
    }

    /// Exact Kraft sum over the codebook.
    pub fn kraft_sum(&self) -> BigRational {
        self.words
            .iter()
            .map(|w| {
                BigRational::new(1.into(), (BigUint::one() << w.len() as u32).into())
            })
            .sum()
    }

    /// No codeword is a prefix of another (the empty word only passes alone).
    pub fn is_prefix_free(&self) -> bool {
        let mut sorted: Vec<&Vec<u8>> = self.words.iter().collect();
        if sorted.len() <= 1 {
            return true;
        }
        sorted.sort();
        sorted
            .windows(2)
            .all(|w| !(w[1].len() >= w[0].len() && &w[1][..w[0].len()] == w[0].as_slice()))
    }

    /// Expected length under an exact probability vector.
    pub fn expected_length(&self, probs: &[BigRational]) -> BigRational {
        self.words
            .iter()
            .zip(probs)
            .map(|(w, p)| p * BigRational::from_integer((w.len() as u64).into()))
            .sum()
    }
}

fn big_to_bits(value: &BigUint, len: u64) -> Vec<u8> {
    (0..len)
        .rev()
        .map(|i| if value.bit(i) { 1u8 } else { 0u8 })
        .collect()
}

/// Implicit canonical prefix code over all sequences of length `n` from an
/// alphabet whose letters are plain or marked. A sequence with `w` marked
/// letters has codeword length `L - w` where `L = ceil(n log2(a + 2b))`,
/// `a` plain letters and `b` marked. The Kraft sum is then exactly
/// `(a + 2b)^n / 2^L <= 1`.
#[derive(Clone, Debug)]
pub struct BlockCode {
    n: usize,
    marked: Vec<bool>,
    plain_count: u64,
    marked_count: u64,
    total_bits: u64,
    /// suffix[r][j] = number of length-r suffixes with exactly j marked letters
    suffix: Vec<Vec<BigUint>>,
    /// canonical first code value of the tier with w marked letters
    tier_first: Vec<BigUint>,
}

impl BlockCode {
    pub fn new(n: usize, marked: Vec<bool>) -> Self {
        assert!(!marked.is_empty(), "alphabet must be non-empty");
        let b = marked.iter().filter(|&&m| m).count() as u64;
        let a = marked.len() as u64 - b;
        let coding_size = a + 2 * b;
        let total_bits = ceil_log2(&BigUint::from(coding_size).pow(n as u32));
        let mut suffix = vec![vec![BigUint::zero(); n + 1]; n + 1];
        suffix[0][0] = BigUint::one();
        for r in 1..=n {
            for j in 0..=r {
                let mut c = &suffix[r - 1][j] * a;
                if j > 0 {
                    c += &suffix[r - 1][j - 1] * b;
                }
                suffix[r][j] = c;
            }
        }
        // canonical ordering: shortest codewords first, i.e. largest w first
        let mut tier_first = vec![BigUint::zero(); n + 1];
        let mut code = BigUint::zero();
        let mut prev: Option<(u64, usize)> = None;
        for w in (0..=n).rev() {
            if suffix[n][w].is_zero() {
                continue;
            }
            let len = total_bits - w as u64;
            if let Some((prev_len, prev_w)) = prev {
                code = (code + &suffix[n][prev_w]) << (len - prev_len);
            }
            tier_first[w] = code.clone();
            prev = Some((len, w));
        }
        BlockCode {
            n,
            marked,
            plain_count: a,
            marked_count: b,
            total_bits,
            suffix,
            tier_first,
        }
    }

    pub fn block_len(&self) -> usize {
        self.n
    }

    pub fn alphabet_len(&self) -> usize {
        self.marked.len()
    }

    /// a + 2b: the effective coding size whose log is the per-instance rate.
    pub fn coding_size(&self) -> u64 {
        self.plain_count + 2 * self.marked_count
    }

    /// Worst-case total L: codeword length plus one reply bit per marked letter.
    pub fn total_bits(&self) -> u64 {
        self.total_bits
    }

    pub fn is_marked(&self, letter: u32) -> bool {
        self.marked[letter as usize]
    }

    pub fn marked_in(&self, seq: &[u32]) -> u64 {
        seq.iter().filter(|&&c| self.marked[c as usize]).count() as u64
    }

    pub fn codeword_len(&self, seq: &[u32]) -> u64 {
        self.total_bits - self.marked_in(seq)
    }

    /// Exact Kraft feasibility: sum over all sequences of 2^(-len) is
    /// `(a + 2b)^n / 2^L`. Returns the sum and whether it is <= 1.
    pub fn kraft_exact(&self) -> (BigRational, bool) {
        let m = BigUint::from(self.coding_size()).pow(self.n as u32);
        // cross-check the binomial identity sum_w count(w) 2^w = (a+2b)^n
        let via_tiers: BigUint = (0..=self.n)
            .map(|w| &self.suffix[self.n][w] << w)
            .sum();
        debug_assert_eq!(via_tiers, m);
        let denom = BigUint::one() << self.total_bits;
        let ok = m <= denom;
        (BigRational::new(m.into(), denom.into()), ok)
    }

    /// Canonical codeword of a sequence.
    pub fn encode(&self, seq: &[u32]) -> Vec<u8> {
        assert_eq!(seq.len(), self.n);
        let w = self.marked_in(seq) as usize;
        let mut rank = BigUint::zero();
        let mut marked_seen = 0usize;
        for (i, &letter) in seq.iter().enumerate() {
            let remaining = self.n - 1 - i;
            for c in 0..letter {
                let need = w - marked_seen;
                let j = need.checked_sub(usize::from(self.marked[c as usize]));
                if let Some(j) = j {
                    if j <= remaining {
                        rank += &self.suffix[remaining][j];
                    }
                }
            }
            marked_seen += usize::from(self.marked[letter as usize]);
        }
        let value = &self.tier_first[w] + rank;
        big_to_bits(&value, self.total_bits - w as u64)
    }

    /// Decodes one codeword starting at `bits[*pos]`, advancing the cursor.
    pub fn decode(&self, bits: &[u8], pos: &mut usize) -> Result<Vec<u32>> {
        let mut value = BigUint::zero();
        let mut len = 0u64;
        loop {
            if let Some(w) = self.tier_of_len(len) {
                let first = &self.tier_first[w];
                if value >= *first && &value - first < self.suffix[self.n][w] {
                    let rank = &value - first;
                    return Ok(self.unrank(w, rank));
                }
            }
            if *pos >= bits.len() {
                return Err(Error::Invalid("truncated codeword".into()));
            }
            value = (value << 1u8) + bits[*pos];
            *pos += 1;
            len += 1;
        }
    }

    fn tier_of_len(&self, len: u64) -> Option<usize> {
        if len > self.total_bits {
            return None;
        }
        let w = (self.total_bits - len) as usize;
        if w <= self.n && !self.suffix[self.n][w].is_zero() {
            Some(w)
        } else {
            None
        }
    }

    fn unrank(&self, w: usize, mut rank: BigUint) -> Vec<u32> {
        let mut seq = Vec::with_capacity(self.n);
        let mut need = w;
        for i in 0..self.n {
            let remaining = self.n - 1 - i;
            for c in 0..self.marked.len() as u32 {
                let j = match need.checked_sub(usize::from(self.marked[c as usize])) {
                    Some(j) if j <= remaining => j,
                    _ => continue,
                };
                let count = &self.suffix[remaining][j];
                if rank < *count {
                    seq.push(c);
                    need = j;
                    break;
                }
                rank -= count;
            }
        }
        debug_assert_eq!(seq.len(), self.n);
        seq
    }

    /// Materializes every codeword; only for small instances (tests).
    pub fn all_codewords(&self) -> Vec<(Vec<u32>, Vec<u8>)> {
        crate::util::tuples(&vec![self.marked.len() as u32; self.n])
            .map(|seq| {
                let word = self.encode(&seq);
                (seq, word)
            })
            .collect()
    }
}

/// Entropy in bits of an exact probability vector.
pub fn entropy(probs: &[BigRational]) -> f64 {
    crate::util::entropy_bits(probs)
}

/// Packs a sequence of symbols from an alphabet of size `k` into
/// `ceil(log2(k^n))` bits by treating it as a base-k numeral.
pub fn pack_base_k(seq: &[u32], k: u64) -> Vec<u8> {
    if k <= 1 {
        return Vec::new();
    }
    let mut value = BigUint::zero();
    for &s in seq {
        value = value * k + s;
    }
    let total = ceil_log2(&BigUint::from(k).pow(seq.len() as u32));
    big_to_bits(&value, total)
}

/// Inverse of `pack_base_k`.
pub fn unpack_base_k(bits: &[u8], k: u64, n: usize) -> Vec<u32> {
    if k <= 1 {
        return vec![0; n];
    }
    let mut value = BigUint::zero();
    for &b in bits {
        value = (value << 1u8) + b;
    }
    let mut out = vec![0u32; n];
    let big_k = BigUint::from(k);
    for slot in out.iter_mut().rev() {
        let digit = (&value % &big_k).to_u32().unwrap();
        *slot = digit;
        value /= &big_k;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn huffman_dyadic_matches_entropy() {
        let q = vec![ratio(1, 2), ratio(1, 4), ratio(1, 4)];
        let code = PrefixCodebook::huffman(&q).unwrap();
        let mut lens = code.lengths();
        lens.sort();
        assert_eq!(lens, vec![1, 2, 2]);
        let e = code.expected_length(&q);
        assert_eq!(e, ratio(3, 2));
        assert!((entropy(&q) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn huffman_single_symbol_is_free() {
        let code = PrefixCodebook::huffman(&[ratio(1, 1)]).unwrap();
        assert_eq!(code.word(0).len(), 0);
        let e = code.expected_length(&[ratio(1, 1)]);
        assert!(e <= ratio(1, 1));
    }

    #[test]
    fn huffman_non_dyadic_case() {
        // q = (0.4, 0.3, 0.3): E[l] = 1.6, H ~ 1.571
        let q = vec![ratio(2, 5), ratio(3, 10), ratio(3, 10)];
        let code = PrefixCodebook::huffman(&q).unwrap();
        assert_eq!(code.expected_length(&q), ratio(8, 5));
        let h = entropy(&q);
        let e = 1.6f64;
        assert!(h <= e + 1e-9 && e <= h + 1.0 + 1e-9);
        assert!(code.is_prefix_free());
        assert!(code.kraft_sum() <= ratio(1, 1));
    }

    #[test]
    fn canonical_code_rejects_infeasible_lengths() {
        assert!(PrefixCodebook::canonical_from_lengths(&[1, 1, 1]).is_err());
        let ok = PrefixCodebook::canonical_from_lengths(&[1, 2, 2]).unwrap();
        assert!(ok.is_prefix_free());
        assert_eq!(ok.kraft_sum(), ratio(1, 1));
    }

    #[test]
    fn block_code_and_alphabet() {
        // AND effective alphabet: letter 0 plain, letter 1 marked; M = 3.
        for n in 1..=6usize {
            let code = BlockCode::new(n, vec![false, true]);
            assert_eq!(code.coding_size(), 3);
            let expected_total = ceil_log2(&BigUint::from(3u32).pow(n as u32));
            assert_eq!(code.total_bits(), expected_total);
            let (kraft, ok) = code.kraft_exact();
            assert!(ok, "kraft sum {kraft} exceeds 1");
            // every sequence: codeword length + marked letters == L
            let words = code.all_codewords();
            for (seq, word) in &words {
                assert_eq!(word.len() as u64 + code.marked_in(seq), code.total_bits());
            }
            // prefix-free across the whole codebook
            let mut sorted: Vec<&Vec<u8>> = words.iter().map(|(_, w)| w).collect();
            sorted.sort();
            for pair in sorted.windows(2) {
                assert!(
                    !(pair[1].len() >= pair[0].len()
                        && &pair[1][..pair[0].len()] == pair[0].as_slice()),
                    "prefix violation"
                );
            }
            // round-trip
            for (seq, word) in &words {
                let mut pos = 0;
                let back = code.decode(word, &mut pos).unwrap();
                assert_eq!(&back, seq);
                assert_eq!(pos, word.len());
            }
        }
    }

    #[test]
    fn block_code_single_plain_letter_needs_no_bits() {
        let code = BlockCode::new(5, vec![false]);
        assert_eq!(code.total_bits(), 0);
        let word = code.encode(&[0; 5]);
        assert!(word.is_empty());
        let mut pos = 0;
        assert_eq!(code.decode(&[], &mut pos).unwrap(), vec![0; 5]);
    }

    #[test]
    fn block_code_all_marked_is_fixed_length() {
        // two marked letters: M = 4, every codeword has length 2n - n = n
        let code = BlockCode::new(4, vec![true, true]);
        assert_eq!(code.coding_size(), 4);
        for (seq, word) in code.all_codewords() {
            assert_eq!(word.len(), 4, "sequence {seq:?}");
        }
    }

    #[test]
    fn base_k_packing_round_trips() {
        let seq = vec![3, 0, 2, 1, 3];
        let bits = pack_base_k(&seq, 4);
        assert_eq!(bits.len() as u64, ceil_log2(&BigUint::from(4u32).pow(5)));
        assert_eq!(unpack_base_k(&bits, 4, 5), seq);
        assert!(pack_base_k(&[0, 0, 0], 1).is_empty());
    }
}
