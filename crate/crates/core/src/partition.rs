//! One-way two-node encoder synthesis: the coarsest feasible partition of one
//! side's alphabet, its restriction to a supported relation under a joint
//! distribution, Huffman coding of the induced class probabilities, and the
//! N-fold block extension.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;

use crate::codebook::PrefixCodebook;
use crate::error::{Error, Result};
use crate::model::{FunctionTable, JointDistribution};
use crate::util::{ceil_log2, entropy_bits};

/// A partition of `0..ground_size` into disjoint classes, kept canonical:
/// classes are ordered by their minimum element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    ground_size: u32,
    classes: Vec<Vec<u32>>,
    class_of: Vec<u32>,
}

impl Partition {
    /// Builds the canonical form from an arbitrary class labelling.
    pub fn from_labels(labels: &[u32]) -> Self {
        let ground_size = labels.len() as u32;
        let mut first_seen: Vec<u32> = Vec::new();
        let mut class_of = vec![0u32; labels.len()];
        let mut classes: Vec<Vec<u32>> = Vec::new();
        for (x, &lab) in labels.iter().enumerate() {
            match first_seen.iter().position(|&l| l == lab) {
                Some(c) => {
                    class_of[x] = c as u32;
                    classes[c].push(x as u32);
                }
                None => {
                    class_of[x] = first_seen.len() as u32;
                    first_seen.push(lab);
                    classes.push(vec![x as u32]);
                }
            }
        }
        Partition {
            ground_size,
            classes,
            class_of,
        }
    }

    pub fn ground_size(&self) -> u32 {
        self.ground_size
    }

    pub fn class_count(&self) -> u64 {
        self.classes.len() as u64
    }

    pub fn classes(&self) -> &[Vec<u32>] {
        &self.classes
    }

    pub fn class_of(&self, letter: u32) -> u32 {
        self.class_of[letter as usize]
    }

    /// True if every class of `self` is contained in a class of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.ground_size == coarser.ground_size
            && self.classes.iter().all(|class| {
                let c = coarser.class_of(class[0]);
                class.iter().all(|&x| coarser.class_of(x) == c)
            })
    }

    /// Worst-case bits for one instance: ceil(log2 k).
    pub fn single_shot_bits(&self) -> u64 {
        ceil_log2(&BigUint::from(self.class_count()))
    }

    /// Asymptotic bits per instance: log2 k.
    pub fn rate_bits(&self) -> f64 {
        (self.class_count() as f64).log2()
    }
}

fn check_two_node(f: &FunctionTable, side: usize) -> Result<()> {
    if f.arity() != 2 {
        return Err(Error::InvalidFunction(format!(
            "two-node coding requires arity 2, got {}",
            f.arity()
        )));
    }
    if side > 1 {
        return Err(Error::InvalidFunction(format!(
            "side must be 0 or 1, got {side}"
        )));
    }
    Ok(())
}

fn eval_pair(f: &FunctionTable, side: usize, own: u32, other: u32) -> u32 {
    if side == 0 {
        f.eval(&[own, other])
    } else {
        f.eval(&[other, own])
    }
}

/// The coarsest feasible partition of one side's alphabet: two letters share
/// a class iff the function agrees on them against every letter of the other
/// side. Any feasible encoder must refine this partition, so its class count
/// determines the one-way complexity.
pub fn optimal_partition(f: &FunctionTable, side: usize) -> Result<Partition> {
    check_two_node(f, side)?;
    let own = f.alphabet(side).size();
    let other = f.alphabet(1 - side).size();
    let mut labels = vec![0u32; own as usize];
    let mut signatures: Vec<Vec<u32>> = Vec::new();
    for x in 0..own {
        let sig: Vec<u32> = (0..other).map(|y| eval_pair(f, side, x, y)).collect();
        let lab = match signatures.iter().position(|s| *s == sig) {
            Some(i) => i as u32,
            None => {
                signatures.push(sig);
                (signatures.len() - 1) as u32
            }
        };
        labels[x as usize] = lab;
    }
    Ok(Partition::from_labels(&labels))
}

/// The agreement relation restricted to pairs with positive probability:
/// `x1 ~ x2` iff the function agrees on every `y` supported jointly with both.
/// Reflexive and symmetric always; transitive only in special cases, e.g.
/// whenever the distribution is strictly positive (then the relation is the
/// plain agreement relation and the partition below is returned).
#[derive(Clone, Debug)]
pub struct SupportedRelation {
    pub related: Vec<Vec<bool>>,
    pub transitive: bool,
    /// Present exactly when the distribution is strictly positive.
    pub partition: Option<Partition>,
}

pub fn optimal_partition_supported(
    f: &FunctionTable,
    side: usize,
    p: &JointDistribution,
) -> Result<SupportedRelation> {
    check_two_node(f, side)?;
    if !p.matches(f) {
        return Err(Error::InvalidDistribution(
            "distribution shape does not match the function arguments".into(),
        ));
    }
    let own = f.alphabet(side).size() as usize;
    let other = f.alphabet(1 - side).size();
    let prob = |x: u32, y: u32| {
        if side == 0 {
            p.prob(&[x, y])
        } else {
            p.prob(&[y, x])
        }
    };
    let mut related = vec![vec![false; own]; own];
    for x1 in 0..own as u32 {
        for x2 in 0..own as u32 {
            let agree = (0..other).all(|y| {
                if prob(x1, y).is_zero() || prob(x2, y).is_zero() {
                    true
                } else {
                    eval_pair(f, side, x1, y) == eval_pair(f, side, x2, y)
                }
            });
            related[x1 as usize][x2 as usize] = agree;
        }
    }
    let transitive = (0..own).all(|a| {
        (0..own).all(|b| {
            (0..own).all(|c| !(related[a][b] && related[b][c]) || related[a][c])
        })
    });
    let partition = if p.is_strictly_positive() {
        let mut labels = vec![u32::MAX; own];
        let mut next = 0u32;
        for x in 0..own {
            if labels[x] == u32::MAX {
                for y in x..own {
                    if related[x][y] {
                        labels[y] = next;
                    }
                }
                next += 1;
            }
        }
        Some(Partition::from_labels(&labels))
    } else {
        None
    };
    Ok(SupportedRelation {
        related,
        transitive,
        partition,
    })
}

/// Class probabilities induced by a partition of one side: `q_c` sums
/// `p(x, y)` over `x` in class `c` and all `y`, exactly.
#[derive(Clone, Debug)]
pub struct InducedDistribution {
    pub probs: Vec<BigRational>,
}

impl InducedDistribution {
    pub fn new(
        partition: &Partition,
        side: usize,
        p: &JointDistribution,
    ) -> Result<Self> {
        let sizes = p.sizes();
        if sizes.len() != 2 {
            return Err(Error::InvalidDistribution("expected two arguments".into()));
        }
        let other = sizes[1 - side];
        let mut probs = vec![BigRational::zero(); partition.class_count() as usize];
        for x in 0..partition.ground_size() {
            for y in 0..other {
                let pr = if side == 0 {
                    p.prob(&[x, y])
                } else {
                    p.prob(&[y, x])
                };
                probs[partition.class_of(x) as usize] += pr;
            }
        }
        Ok(InducedDistribution { probs })
    }

    pub fn entropy_bits(&self) -> f64 {
        entropy_bits(&self.probs)
    }
}

/// Minimum-expected-length prefix code over the partition classes.
pub fn huffman_code(q: &InducedDistribution) -> Result<PrefixCodebook> {
    PrefixCodebook::huffman(&q.probs)
}

/// The N-fold block extension: class count is `k^N`, and the worst-case
/// per-instance rate is `ceil(N log2 k) / N`.
#[derive(Clone, Debug)]
pub struct BlockPartitionReport {
    pub base_classes: u64,
    pub block_classes: BigUint,
    pub total_bits: u64,
    pub rate_bits: f64,
}

pub fn block_partition(f: &FunctionTable, side: usize, n: u64) -> Result<BlockPartitionReport> {
    if n == 0 {
        return Err(Error::Invalid("block length must be >= 1".into()));
    }
    let base = optimal_partition(f, side)?;
    let k = base.class_count();
    let block_classes = BigUint::from(k).pow(n as u32);
    let total_bits = ceil_log2(&block_classes);
    Ok(BlockPartitionReport {
        base_classes: k,
        block_classes,
        total_bits,
        rate_bits: total_bits as f64 / n as f64,
    })
}
