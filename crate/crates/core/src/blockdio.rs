//! Long/short block decomposition of `{1..N}` and exact counters for
//! near-solutions of the two-, three- and four-term frequency equations
//! inside a block.
//!
//! All indices are 1-based. A decomposition alternates long blocks `Δ_i`
//! of length `L` and short blocks `Δ_i′` of length `s`; only the trailing
//! block may be shorter, and the final short block may be missing.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::seqgen::LacunarySequence;

/// Whether `(q^s > (1 - q^{-1/2})^{-1}, 1 + 4 q^{-s} <= √q)` hold, decided
/// exactly.
///
/// With `q = a/b` the conditions are cleared of roots and denominators:
/// the first becomes `(a^s - b^s)^2 > a^{2s-1} b` and the second
/// `(a^s + 4 b^s)^2 b <= a^{2s+1}`.
pub fn s_conditions(q: &BigRational, s: u32) -> (bool, bool) {
    let a = q.numer().magnitude();
    let b = q.denom().magnitude();
    let a_s = a.pow(s);
    let b_s = b.pow(s);
    let first = if a_s > b_s {
        let diff = &a_s - &b_s;
        &diff * &diff > &a_s * &a_s / a * b
    } else {
        false
    };
    let sum = &a_s + &b_s * 4u32;
    let second = &sum * &sum * b <= &a_s * &a_s * a;
    (first, second)
}

/// Smallest positive `s` satisfying both gap conditions of
/// [`s_conditions`]. Both conditions are monotone in `s`, so a floating
/// point estimate is refined by exact checks on either side.
pub fn choose_s(q: &BigRational) -> Result<u32> {
    if *q <= BigRational::one() {
        return Err(Error::domain(format!("gap ratio q = {q} must exceed 1")));
    }
    let qf = q.to_f64().unwrap_or(f64::MAX);
    let ln_q = qf.ln();
    let root = qf.sqrt();
    let est_first = (-(1.0 - 1.0 / root).ln() / ln_q).floor();
    let est_second = ((4.0 / (root - 1.0)).ln() / ln_q).floor();
    let estimate = est_first.max(est_second);
    let holds = |s: u32| {
        let (a, b) = s_conditions(q, s);
        a && b
    };
    let mut s = if estimate.is_finite() && estimate > 2.0 {
        (estimate as u32).saturating_sub(1)
    } else {
        1
    };
    while !holds(s) {
        s += 1;
    }
    while s > 1 && holds(s - 1) {
        s -= 1;
    }
    Ok(s)
}

/// `L = ⌈1 / (2|λ|)⌉`, evaluated on the exact binary value of `λ`.
pub fn choose_l(lambda: f64) -> Result<usize> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::domain(format!(
            "lambda = {lambda} must be finite and nonzero"
        )));
    }
    let exact = BigRational::from_float(lambda.abs()).expect("finite");
    let l = (BigRational::one() / (exact * BigInt::from(2))).ceil();
    l.to_integer()
        .to_usize()
        .ok_or_else(|| Error::domain(format!("L for lambda = {lambda} does not fit in usize")))
}

/// Whether `s < L` and `L <= 1/(√2 |λ|)` hold (the latter as `2 L² λ² <= 1`, exactly).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WorkingAssumptions {
    pub short_below_long: bool,
    pub long_within_lambda: bool,
}

impl WorkingAssumptions {
    pub fn check(s: usize, l: usize, lambda: f64) -> Self {
        let long_within_lambda = BigRational::from_float(lambda.abs()).is_some_and(|lam| {
            let l = BigRational::from_integer(BigInt::from(l));
            BigRational::from_integer(BigInt::from(2)) * &l * &l * &lam * &lam <= BigRational::one()
        });
        WorkingAssumptions {
            short_below_long: s < l,
            long_within_lambda,
        }
    }

    pub fn hold(&self) -> bool {
        self.short_below_long && self.long_within_lambda
    }
}

/// Inclusive 1-based index range `first..=last`. Empty when `first > last`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Block {
    pub index: usize,
    pub first: usize,
    pub last: usize,
}

impl Block {
    pub fn new(index: usize, first: usize, last: usize) -> Self {
        Block { index, first, last }
    }

    pub fn len(&self) -> usize {
        (self.last + 1).saturating_sub(self.first)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        self.first..=self.last
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockDecomposition {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub long_len: usize,
    #[serde(rename = "s")]
    pub short_len: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub long_blocks: Vec<Block>,
    pub short_blocks: Vec<Block>,
}

impl BlockDecomposition {
    /// `i⁻`, the smallest index of `Δ_i` (1-based `i`).
    pub fn long_min(&self, i: usize) -> usize {
        self.long_blocks[i - 1].first
    }

    /// `i⁺`, the largest index of `Δ_i`.
    pub fn long_max(&self, i: usize) -> usize {
        self.long_blocks[i - 1].last
    }

    /// `i*`, the largest index of `Δ_i′`, if that block exists.
    pub fn short_max(&self, i: usize) -> Option<usize> {
        self.short_blocks.get(i - 1).map(|b| b.last)
    }

    /// All blocks in index order `Δ_1, Δ_1′, Δ_2, …`.
    pub fn ordered_blocks(&self) -> Vec<Block> {
        let mut out = Vec::with_capacity(self.long_blocks.len() + self.short_blocks.len());
        for (i, long) in self.long_blocks.iter().enumerate() {
            out.push(*long);
            if let Some(short) = self.short_blocks.get(i) {
                out.push(*short);
            }
        }
        out
    }
}

/// Splits `{1..N}` into alternating long (`L`) and short (`s`) blocks.
pub fn decompose(n: usize, l: usize, s: usize) -> Result<BlockDecomposition> {
    if s == 0 || l <= s {
        return Err(Error::InvalidBlockShape { long: l, short: s });
    }
    if n < l + 1 {
        return Err(Error::InsufficientLength {
            required: l + 1,
            available: n,
        });
    }
    let mut long_blocks = Vec::new();
    let mut short_blocks = Vec::new();
    let mut pos = 1;
    while pos <= n {
        let index = long_blocks.len() + 1;
        let last = (pos + l - 1).min(n);
        long_blocks.push(Block::new(index, pos, last));
        pos = last + 1;
        if pos <= n {
            let last = (pos + s - 1).min(n);
            short_blocks.push(Block::new(index, pos, last));
            pos = last + 1;
        }
    }
    Ok(BlockDecomposition {
        n,
        long_len: l,
        short_len: s,
        m: long_blocks.len(),
        long_blocks,
        short_blocks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationKind {
    /// `|n_{k1} - n_{k2}| < T`, off-diagonal pairs.
    TwoTerm,
    /// `|n_{k1} - n_{k2} - n_{k3}| < T`.
    ThreeTerm,
    /// `|n_{k1} + n_{k2} - n_{k3} - n_{k4}| < T`.
    FourTermPpmm,
    /// `|n_{k1} + n_{k2} + n_{k3} - n_{k4}| < T`.
    FourTermPppm,
}

impl EquationKind {
    pub fn arity(self) -> u32 {
        match self {
            EquationKind::TwoTerm => 2,
            EquationKind::ThreeTerm => 3,
            EquationKind::FourTermPpmm | EquationKind::FourTermPppm => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EquationKind::TwoTerm => "two_term",
            EquationKind::ThreeTerm => "three_term",
            EquationKind::FourTermPpmm => "four_term_ppmm",
            EquationKind::FourTermPppm => "four_term_pppm",
        }
    }
}

impl fmt::Display for EquationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EquationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two_term" => Ok(EquationKind::TwoTerm),
            "three_term" => Ok(EquationKind::ThreeTerm),
            "four_term_ppmm" => Ok(EquationKind::FourTermPpmm),
            "four_term_pppm" => Ok(EquationKind::FourTermPppm),
            other => Err(Error::domain(format!("unknown equation kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FourTermSignature {
    Ppmm,
    Pppm,
}

fn serialize_decimal<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_str_radix(10))
}

/// Number of ordered index tuples in one block satisfying an equation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolutionCount {
    #[serde(rename = "kind")]
    pub equation_kind: EquationKind,
    #[serde(rename = "block")]
    pub block_index: usize,
    #[serde(serialize_with = "serialize_decimal")]
    pub threshold: BigUint,
    pub count: u64,
    #[serde(rename = "L")]
    pub l: usize,
}

fn block_values(seq: &LacunarySequence, block: &Block) -> Result<Vec<BigInt>> {
    if !block.is_empty() && (block.first == 0 || block.last > seq.len()) {
        return Err(Error::domain(format!(
            "block {}..={} outside 1..={}",
            block.first,
            block.last,
            seq.len()
        )));
    }
    Ok(block
        .indices()
        .map(|k| BigInt::from(seq.terms()[k - 1].clone()))
        .collect())
}

/// Number of entries of the sorted slice in the open window `(c - t, c + t)`.
fn count_window(sorted: &[BigInt], center: &BigInt, t: &BigInt) -> u64 {
    let hi = center + t;
    let lo = center - t;
    let upper = sorted.partition_point(|v| *v < hi);
    let lower = sorted.partition_point(|v| *v <= lo);
    upper.saturating_sub(lower) as u64
}

fn pair_sums(values: &[BigInt], sign: i8) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(values.len() * values.len());
    for a in values {
        for b in values {
            out.push(if sign > 0 { a + b } else { b - a });
        }
    }
    out.sort();
    out
}

fn make_count(kind: EquationKind, block: &Block, threshold: &BigUint, count: u64) -> SolutionCount {
    SolutionCount {
        equation_kind: kind,
        block_index: block.index,
        threshold: threshold.clone(),
        count,
        l: block.len(),
    }
}

/// Ordered pairs with `|n_{k1} - n_{k2}| < threshold`; the diagonal
/// `k1 = k2` is dropped when `exclude_diagonal` is set.
pub fn count_two_term(
    seq: &LacunarySequence,
    block: &Block,
    threshold: &BigUint,
    exclude_diagonal: bool,
) -> Result<SolutionCount> {
    let values = block_values(seq, block)?;
    let t = BigInt::from(threshold.clone());
    let mut count: u64 = values.iter().map(|v| count_window(&values, v, &t)).sum();
    if exclude_diagonal && t.is_positive() {
        count -= values.len() as u64;
    }
    Ok(make_count(EquationKind::TwoTerm, block, threshold, count))
}

/// Ordered triples with `|n_{k1} - n_{k2} - n_{k3}| < threshold`.
pub fn count_three_term(
    seq: &LacunarySequence,
    block: &Block,
    threshold: &BigUint,
) -> Result<SolutionCount> {
    let values = block_values(seq, block)?;
    let t = BigInt::from(threshold.clone());
    let sums = pair_sums(&values, 1);
    let count = values.iter().map(|v| count_window(&sums, v, &t)).sum();
    Ok(make_count(EquationKind::ThreeTerm, block, threshold, count))
}

/// Ordered 4-tuples for the `(+,+,-,-)` or `(+,+,+,-)` signature,
/// matched in the middle over sorted pair sums and differences.
pub fn count_four_term(
    seq: &LacunarySequence,
    block: &Block,
    threshold: &BigUint,
    signature: FourTermSignature,
) -> Result<SolutionCount> {
    let values = block_values(seq, block)?;
    let t = BigInt::from(threshold.clone());
    let sums = pair_sums(&values, 1);
    let (kind, count) = match signature {
        FourTermSignature::Ppmm => (
            EquationKind::FourTermPpmm,
            sums.par_iter().map(|x| count_window(&sums, x, &t)).sum(),
        ),
        FourTermSignature::Pppm => {
            // n_{k1} + n_{k2} ≈ n_{k4} - n_{k3}
            let diffs = pair_sums(&values, -1);
            (
                EquationKind::FourTermPppm,
                sums.par_iter().map(|x| count_window(&diffs, x, &t)).sum(),
            )
        }
    };
    Ok(make_count(kind, block, threshold, count))
}

/// Dispatches on `kind`; the two-term count excludes the diagonal.
pub fn count(
    seq: &LacunarySequence,
    block: &Block,
    threshold: &BigUint,
    kind: EquationKind,
) -> Result<SolutionCount> {
    match kind {
        EquationKind::TwoTerm => count_two_term(seq, block, threshold, true),
        EquationKind::ThreeTerm => count_three_term(seq, block, threshold),
        EquationKind::FourTermPpmm => {
            count_four_term(seq, block, threshold, FourTermSignature::Ppmm)
        }
        EquationKind::FourTermPppm => {
            count_four_term(seq, block, threshold, FourTermSignature::Pppm)
        }
    }
}

/// Counts on every long block of `dec`, each with threshold `n_{i⁻}`.
pub fn count_long_blocks(
    seq: &LacunarySequence,
    dec: &BlockDecomposition,
    kind: EquationKind,
) -> Result<Vec<SolutionCount>> {
    if dec.n > seq.len() {
        return Err(Error::InsufficientLength {
            required: dec.n,
            available: seq.len(),
        });
    }
    dec.long_blocks
        .par_iter()
        .map(|b| count(seq, b, &seq.terms()[b.first - 1], kind))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeRow {
    #[serde(rename = "L")]
    pub l: usize,
    pub blocks: usize,
    pub max_count: u64,
}

/// For each `L`, decomposes the whole sequence with `s = choose_s(q)` and
/// reports the largest long-block count.
pub fn scaling_probe(
    seq: &LacunarySequence,
    kind: EquationKind,
    l_values: &[usize],
) -> Result<Vec<ProbeRow>> {
    let s = choose_s(seq.q_certified())? as usize;
    l_values
        .iter()
        .map(|&l| {
            if l <= s {
                return Err(Error::InvalidBlockShape { long: l, short: s });
            }
            if seq.len() < l + 1 {
                return Err(Error::InsufficientLength {
                    required: l + 1,
                    available: seq.len(),
                });
            }
            let dec = decompose(seq.len(), l, s)?;
            let counts = count_long_blocks(seq, &dec, kind)?;
            Ok(ProbeRow {
                l,
                blocks: counts.len(),
                max_count: counts.iter().map(|c| c.count).max().unwrap_or(0),
            })
        })
        .collect()
}

/// Slopes `Δ log(count) / Δ log(L)` between consecutive probe rows; `None`
/// where either count is zero.
pub fn log_log_slopes(rows: &[ProbeRow]) -> Vec<Option<f64>> {
    rows.windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            if a.max_count == 0 || b.max_count == 0 {
                None
            } else {
                Some(
                    (b.max_count as f64 / a.max_count as f64).ln() / (b.l as f64 / a.l as f64).ln(),
                )
            }
        })
        .collect()
}
