//! Interactive block protocols for two nodes computing a Boolean function of
//! `X1 + X2`, with exact worst-case bit accounting.
//!
//! All protocols here are single-round: the speaker merges letters its side
//! never needs to separate, sends a variable-length codeword whose length
//! shrinks by one bit for every *ambiguous* instance in its block, and the
//! listener replies with exactly one bit per ambiguous instance. The total is
//! therefore the same for every block: `ceil(N log2 M)` where `M` counts
//! unambiguous classes once and ambiguous classes twice. Matching fooling
//! sets certify optimality for sum-threshold functions and near-optimality
//! (within one bit) for sum-interval functions.

use crate::codebook::BlockCode;
use crate::error::{Error, Result};
use crate::model::{ExactRate, FunctionTable, NodeId, Rate};
use crate::transcript::ProtocolTranscript;

/// Max letters per node and threshold for the indicator of `X1 + X2 >= theta`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ThresholdSpec {
    pub m1: u32,
    pub m2: u32,
    pub theta: u32,
}

impl ThresholdSpec {
    pub fn new(m1: u32, m2: u32, theta: u32) -> Result<Self> {
        let n = m1 + m2;
        if theta > n + 1 {
            return Err(Error::ThresholdOutOfRange { theta, max: n + 1 });
        }
        Ok(ThresholdSpec { m1, m2, theta })
    }

    pub fn capacity(&self) -> u32 {
        self.m1 + self.m2
    }

    /// Canonical orientation: the smaller side first.
    pub fn canonical(&self) -> (u32, u32, bool) {
        if self.m1 <= self.m2 {
            (self.m1, self.m2, false)
        } else {
            (self.m2, self.m1, true)
        }
    }

    pub fn predicate(&self) -> impl Fn(u32) -> bool + Copy {
        let theta = self.theta;
        move |s| s >= theta
    }
}

/// Interval indicator of `a <= X1 + X2 <= b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntervalSpec {
    pub m1: u32,
    pub m2: u32,
    pub a: u32,
    pub b: u32,
}

impl IntervalSpec {
    /// Requires `a <= b` and the hypothesis `b <= (m1 + m2) / 2`, except for
    /// the degenerate constant-1 interval `[0, >= m1 + m2]` which needs no
    /// communication at all.
    pub fn new(m1: u32, m2: u32, a: u32, b: u32) -> Result<Self> {
        if a > b {
            return Err(Error::Invalid(format!(
                "interval bounds must satisfy a <= b, got [{a}, {b}]"
            )));
        }
        let capacity = m1 + m2;
        let spec = IntervalSpec { m1, m2, a, b };
        if spec.is_constant_one() {
            return Ok(spec);
        }
        if 2 * b > capacity {
            return Err(Error::IntervalHypothesis { b, capacity });
        }
        Ok(spec)
    }

    pub fn capacity(&self) -> u32 {
        self.m1 + self.m2
    }

    pub fn is_constant_one(&self) -> bool {
        self.a == 0 && self.b >= self.capacity()
    }

    pub fn predicate(&self) -> impl Fn(u32) -> bool + Copy {
        let (a, b) = (self.a, self.b);
        move |s| a <= s && s <= b
    }
}

/// The separation stage for one speaker: letters `0..=speaker_max` are merged
/// whenever the function agrees on them against every listener value. A class
/// is *determined* when the function is constant on it regardless of the
/// listener; only undetermined (ambiguous) classes cost a reply bit.
#[derive(Clone, Debug)]
pub struct SumScheme {
    pub speaker_max: u32,
    pub listener_max: u32,
    class_of: Vec<u32>,
    reps: Vec<u32>,
    determined: Vec<Option<u8>>,
}

impl SumScheme {
    pub fn for_predicate(
        speaker_max: u32,
        listener_max: u32,
        f: impl Fn(u32) -> bool,
    ) -> Self {
        let mut signatures: Vec<Vec<bool>> = Vec::new();
        let mut reps: Vec<u32> = Vec::new();
        let mut class_of = Vec::with_capacity(speaker_max as usize + 1);
        for c in 0..=speaker_max {
            let sig: Vec<bool> = (0..=listener_max).map(|y| f(c + y)).collect();
            let id = match signatures.iter().position(|s| *s == sig) {
                Some(i) => i as u32,
                None => {
                    signatures.push(sig);
                    reps.push(c);
                    (signatures.len() - 1) as u32
                }
            };
            class_of.push(id);
        }
        let determined = signatures
            .iter()
            .map(|sig| {
                if sig.iter().all(|&v| v) {
                    Some(1)
                } else if sig.iter().all(|&v| !v) {
                    Some(0)
                } else {
                    None
                }
            })
            .collect();
        SumScheme {
            speaker_max,
            listener_max,
            class_of,
            reps,
            determined,
        }
    }

    pub fn class_count(&self) -> usize {
        self.reps.len()
    }

    pub fn class_of(&self, letter: u32) -> u32 {
        self.class_of[letter as usize]
    }

    pub fn rep(&self, class: u32) -> u32 {
        self.reps[class as usize]
    }

    pub fn determined(&self, class: u32) -> Option<u8> {
        self.determined[class as usize]
    }

    pub fn determined_count(&self) -> usize {
        self.determined.iter().filter(|d| d.is_some()).count()
    }

    /// M: ambiguous classes count twice, determined classes once.
    pub fn coding_size(&self) -> u64 {
        (2 * self.class_count() - self.determined_count()) as u64
    }

    pub fn rate(&self) -> Rate {
        Rate::log2_int(self.coding_size())
    }

    /// The implicit canonical prefix code for blocks of length `n`.
    pub fn block_code(&self, n: usize) -> BlockCode {
        let marked = self.determined.iter().map(|d| d.is_none()).collect();
        BlockCode::new(n, marked)
    }
}

/// The exact per-instance complexity of a sum-threshold function:
/// `log2 min(2*theta + 1, 2*min(m1, m2) + 2, 2*(n - theta + 1) + 1)`.
pub fn threshold_coding_size(spec: &ThresholdSpec) -> u64 {
    let (m1, _, _) = spec.canonical();
    let n = spec.capacity() as u64;
    let theta = spec.theta as u64;
    if theta > n {
        return 1; // constant function, nothing to send
    }
    (2 * theta + 1)
        .min(2 * m1 as u64 + 2)
        .min(2 * (n - theta + 1) + 1)
}

pub fn threshold_complexity(spec: &ThresholdSpec) -> Rate {
    Rate::log2_int(threshold_coding_size(spec))
}

/// Which node transmits the codeword (the other replies).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Speaker {
    Node1,
    Node2,
}

impl Speaker {
    fn ids(self) -> (NodeId, NodeId) {
        match self {
            Speaker::Node1 => (NodeId(1), NodeId(2)),
            Speaker::Node2 => (NodeId(2), NodeId(1)),
        }
    }
}

/// Builds the speaker-side scheme for a threshold spec. The coding size is
/// the same for either speaker and equals `threshold_coding_size`.
pub fn threshold_scheme(spec: &ThresholdSpec, speaker: Speaker) -> SumScheme {
    let (s_max, l_max) = match speaker {
        Speaker::Node1 => (spec.m1, spec.m2),
        Speaker::Node2 => (spec.m2, spec.m1),
    };
    SumScheme::for_predicate(s_max, l_max, spec.predicate())
}

/// The speaker's block codebook; lengths are `L - (ambiguous instances)` and
/// the Kraft sum is exactly `M^N / 2^L`.
pub fn threshold_codebook(spec: &ThresholdSpec, n: usize, speaker: Speaker) -> (SumScheme, BlockCode) {
    let scheme = threshold_scheme(spec, speaker);
    let code = scheme.block_code(n);
    (scheme, code)
}

/// Outcome of one simulated block exchange.
#[derive(Clone, Debug)]
pub struct ExchangeOutcome {
    pub transcript: ProtocolTranscript,
    pub decoded_node1: Vec<u8>,
    pub decoded_node2: Vec<u8>,
    pub total_bits: u64,
}

/// Runs the single-round exchange: codeword from the speaker, one reply bit
/// per ambiguous instance from the listener, both sides decode every
/// instance. `f` is the predicate on the sum.
pub fn run_sum_exchange(
    scheme: &SumScheme,
    code: &BlockCode,
    speaker: Speaker,
    x1: &[u32],
    x2: &[u32],
    f: impl Fn(u32) -> bool,
) -> Result<ExchangeOutcome> {
    let n = code.block_len();
    if x1.len() != n || x2.len() != n {
        return Err(Error::BlockMismatch(format!(
            "blocks must have length {n}"
        )));
    }
    let (speaker_block, listener_block) = match speaker {
        Speaker::Node1 => (x1, x2),
        Speaker::Node2 => (x2, x1),
    };
    if speaker_block.iter().any(|&x| x > scheme.speaker_max)
        || listener_block.iter().any(|&x| x > scheme.listener_max)
    {
        return Err(Error::BlockMismatch("letter out of alphabet".into()));
    }
    let (s_id, l_id) = speaker.ids();
    let classes: Vec<u32> = speaker_block.iter().map(|&x| scheme.class_of(x)).collect();
    let word = code.encode(&classes);
    let mut transcript = ProtocolTranscript::new(n);
    transcript.push(s_id, l_id, word.clone());

    // listener decodes the class sequence and computes the function
    let mut pos = 0;
    let decoded_classes = code.decode(&word, &mut pos)?;
    debug_assert_eq!(decoded_classes, classes);
    let mut listener_values = Vec::with_capacity(n);
    let mut reply = Vec::new();
    for (t, &c) in decoded_classes.iter().enumerate() {
        let v = match scheme.determined(c) {
            Some(v) => v,
            None => {
                let v = u8::from(f(scheme.rep(c) + listener_block[t]));
                reply.push(v);
                v
            }
        };
        listener_values.push(v);
    }
    transcript.push(l_id, s_id, reply.clone());

    // speaker reads the reply bits in instance order
    let mut speaker_values = Vec::with_capacity(n);
    let mut reply_pos = 0;
    for &c in &classes {
        let v = match scheme.determined(c) {
            Some(v) => v,
            None => {
                let v = reply[reply_pos];
                reply_pos += 1;
                v
            }
        };
        speaker_values.push(v);
    }
    let total_bits = transcript.total_bits();
    let (decoded_node1, decoded_node2) = match speaker {
        Speaker::Node1 => (speaker_values, listener_values),
        Speaker::Node2 => (listener_values, speaker_values),
    };
    Ok(ExchangeOutcome {
        transcript,
        decoded_node1,
        decoded_node2,
        total_bits,
    })
}

pub fn run_threshold_protocol(
    spec: &ThresholdSpec,
    x1: &[u32],
    x2: &[u32],
    speaker: Speaker,
) -> Result<ExchangeOutcome> {
    let (scheme, code) = threshold_codebook(spec, x1.len(), speaker);
    run_sum_exchange(&scheme, &code, speaker, x1, x2, spec.predicate())
}

/// Boolean AND of two binary blocks: the threshold protocol at
/// `m1 = m2 = 1, theta = 2`, worst-case total exactly `ceil(N log2 3)`.
pub fn and_protocol(x1: &[u32], x2: &[u32]) -> Result<ExchangeOutcome> {
    let spec = ThresholdSpec::new(1, 1, 2)?;
    run_threshold_protocol(&spec, x1, x2, Speaker::Node1)
}

/// A set of column vectors any two of which force distinct transcripts. Its
/// N-th power is a fooling set for the block function, so
/// `log2 |Z|` lower-bounds the bits per instance of any zero-error strategy.
#[derive(Clone, Debug)]
pub struct FoolingSet {
    pub columns: Vec<(u32, u32)>,
    pub verified: bool,
    pub per_instance_bits: f64,
}

impl FoolingSet {
    pub fn size(&self) -> u64 {
        self.columns.len() as u64
    }

    pub fn block_bound_bits(&self, n: u64) -> f64 {
        n as f64 * self.per_instance_bits
    }
}

/// Verifies the pairwise fooling property for a Boolean function of two
/// arguments: any two columns either disagree on the function or admit a
/// diagonal element that disagrees.
pub fn verify_fooling(columns: &[(u32, u32)], f: impl Fn(u32, u32) -> bool) -> bool {
    for (i, &(a1, a2)) in columns.iter().enumerate() {
        for &(b1, b2) in &columns[i + 1..] {
            let fa = f(a1, a2);
            let fb = f(b1, b2);
            if fa != fb {
                continue;
            }
            if f(a1, b2) != fa || f(b1, a2) != fa {
                continue;
            }
            return false;
        }
    }
    true
}

/// The band `theta - 1 <= z1 + z2 <= theta` inside the box, machine-verified;
/// its size equals the threshold coding size in every parameter regime.
pub fn fooling_bound_threshold(spec: &ThresholdSpec) -> FoolingSet {
    let mut columns = Vec::new();
    for z1 in 0..=spec.m1 {
        for z2 in 0..=spec.m2 {
            let s = z1 + z2;
            if s + 1 >= spec.theta && s <= spec.theta {
                columns.push((z1, z2));
            }
        }
    }
    let theta = spec.theta;
    let verified = verify_fooling(&columns, |x1, x2| x1 + x2 >= theta);
    let bits = (columns.len() as f64).log2();
    FoolingSet {
        columns,
        verified,
        per_instance_bits: bits,
    }
}

/// Fooling set for a sum-interval function: every in-box column summing to
/// `b`, plus a run of at most `b - a + 2` consecutive columns summing to
/// `b + 1` (longer runs would break the diagonal property).
pub fn fooling_bound_interval(spec: &IntervalSpec) -> FoolingSet {
    let (a, b) = (spec.a, spec.b);
    let mut columns = Vec::new();
    let line = |s: u32, m1: u32, m2: u32| -> Vec<(u32, u32)> {
        let lo = s.saturating_sub(m2);
        let hi = s.min(m1);
        (lo..=hi).map(|z1| (z1, s - z1)).collect()
    };
    columns.extend(line(b, spec.m1, spec.m2));
    let upper = line(b + 1, spec.m1, spec.m2);
    let take = ((b - a + 2) as usize).min(upper.len());
    columns.extend(upper.into_iter().take(take));
    let verified = verify_fooling(&columns, |x1, x2| {
        let s = x1 + x2;
        a <= s && s <= b
    });
    let bits = (columns.len() as f64).log2();
    FoolingSet {
        columns,
        verified,
        per_instance_bits: bits,
    }
}

/// Lower and upper bounds (bits per instance) for a sum-interval function;
/// they differ by at most one bit. The lower bound is the exact size of the
/// machine-verified fooling set; the upper bound is achieved by
/// `run_interval_protocol`.
#[derive(Clone, Debug)]
pub struct IntervalBounds {
    pub lower_bits: f64,
    pub upper_bits: f64,
    pub upper_coding_size: u64,
    pub fooling: FoolingSet,
}

pub fn interval_bounds(spec: &IntervalSpec) -> IntervalBounds {
    if spec.is_constant_one() {
        return IntervalBounds {
            lower_bits: 0.0,
            upper_bits: 0.0,
            upper_coding_size: 1,
            fooling: FoolingSet {
                columns: vec![(0, 0)],
                verified: true,
                per_instance_bits: 0.0,
            },
        };
    }
    let fooling = fooling_bound_interval(spec);
    let m1 = spec.m1.min(spec.m2) as u64;
    let upper_coding_size = (2 * (spec.b as u64 + 1) + 1).min(2 * m1 + 2);
    IntervalBounds {
        lower_bits: fooling.per_instance_bits,
        upper_bits: (upper_coding_size as f64).log2(),
        upper_coding_size,
        fooling,
    }
}

pub fn interval_scheme(spec: &IntervalSpec, speaker: Speaker) -> SumScheme {
    let (s_max, l_max) = match speaker {
        Speaker::Node1 => (spec.m1, spec.m2),
        Speaker::Node2 => (spec.m2, spec.m1),
    };
    SumScheme::for_predicate(s_max, l_max, spec.predicate())
}

/// The speaker whose scheme attains the interval upper bound: the side with
/// the smaller alphabet. (Thresholds are speaker-symmetric; intervals are
/// not, and the stated bound is for the small side transmitting first.)
pub fn interval_canonical_speaker(spec: &IntervalSpec) -> Speaker {
    if spec.m1 <= spec.m2 {
        Speaker::Node1
    } else {
        Speaker::Node2
    }
}

pub fn run_interval_protocol(
    spec: &IntervalSpec,
    x1: &[u32],
    x2: &[u32],
    speaker: Speaker,
) -> Result<ExchangeOutcome> {
    let scheme = interval_scheme(spec, speaker);
    let code = scheme.block_code(x1.len());
    run_sum_exchange(&scheme, &code, speaker, x1, x2, spec.predicate())
}

/// Separation + coding for an arbitrary Boolean function of `x1 + x2`:
/// merge letters the function never distinguishes, then code with the
/// always-0 / always-1 classes costing no reply. The rate is
/// `log2(2l - |A0| - |A1|)` for `l` merged classes.
#[derive(Clone, Debug)]
pub struct GeneralSumScheme {
    pub scheme: SumScheme,
    pub reduced_alphabet_size: usize,
    pub always_zero: usize,
    pub always_one: usize,
    pub rate: Rate,
    /// Function value per attainable sum.
    pub by_sum: Vec<bool>,
}

pub fn general_separation_coding(f: &FunctionTable) -> Result<GeneralSumScheme> {
    if f.arity() != 2 {
        return Err(Error::InvalidFunction(
            "general separation takes a two-argument function".into(),
        ));
    }
    if f.range_size() != 2 {
        return Err(Error::InvalidFunction(
            "the one-round reply scheme needs a Boolean range".into(),
        ));
    }
    let m1 = f.alphabet(0).size() - 1;
    let m2 = f.alphabet(1).size() - 1;
    // the function must depend on x1 + x2 only
    let mut by_sum: Vec<Option<bool>> = vec![None; (m1 + m2 + 1) as usize];
    for x1 in 0..=m1 {
        for x2 in 0..=m2 {
            let v = f.eval(&[x1, x2]) == 1;
            match by_sum[(x1 + x2) as usize] {
                None => by_sum[(x1 + x2) as usize] = Some(v),
                Some(prev) if prev == v => {}
                Some(_) => return Err(Error::NotSumDependent),
            }
        }
    }
    let by_sum: Vec<bool> = by_sum
        .into_iter()
        .map(|v| v.expect("every sum is attainable"))
        .collect();
    let pred = {
        let by_sum = by_sum.clone();
        move |s: u32| by_sum[s as usize]
    };
    let scheme = SumScheme::for_predicate(m1, m2, pred);
    let always_one = (0..scheme.class_count() as u32)
        .filter(|&c| scheme.determined(c) == Some(1))
        .count();
    let always_zero = (0..scheme.class_count() as u32)
        .filter(|&c| scheme.determined(c) == Some(0))
        .count();
    Ok(GeneralSumScheme {
        reduced_alphabet_size: scheme.class_count(),
        always_zero,
        always_one,
        rate: scheme.rate(),
        scheme,
        by_sum,
    })
}

pub fn run_general_protocol(
    general: &GeneralSumScheme,
    x1: &[u32],
    x2: &[u32],
) -> Result<ExchangeOutcome> {
    let code = general.scheme.block_code(x1.len());
    run_sum_exchange(&general.scheme, &code, Speaker::Node1, x1, x2, |s| {
        general.by_sum[s as usize]
    })
}

/// Exact worst-case total for any block: `ceil(N log2 M)`.
pub fn worst_case_total(coding_size: u64, n: u64) -> u64 {
    crate::util::ceil_log2_pow(coding_size, n)
}

/// Exact expression for a block rate: `ceil(N log2 M) / N`.
pub fn block_rate(coding_size: u64, n: u64) -> Rate {
    let total = worst_case_total(coding_size, n);
    Rate {
        bits: total as f64 / n as f64,
        exact: Some(ExactRate::Frac(total, n)),
    }
}
