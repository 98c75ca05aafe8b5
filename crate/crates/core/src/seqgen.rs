//! Lacunary frequency sequences.
//!
//! A [`LacunarySequence`] holds strictly increasing positive frequencies
//! `n_1 < n_2 < ...` together with an exactly certified gap ratio `q > 1`
//! such that `n_{k+1} >= q * n_k` for every consecutive pair.
//!
//! Indices in this module follow the mathematical convention: the first
//! term is `n_1`. Vectors are zero-based, so `terms()[k - 1]` is `n_k`.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Validated lacunary frequency sequence. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LacunarySequence {
    terms: Vec<BigUint>,
    q_certified: BigRational,
    label: String,
}

impl LacunarySequence {
    /// Validates `terms` and certifies the smallest consecutive ratio.
    ///
    /// A single term has no consecutive pair and certifies any `q`; it is
    /// given the conventional certificate `q = 2`.
    pub fn from_terms(terms: Vec<BigUint>, label: impl Into<String>) -> Result<Self> {
        let q = match verify_hadamard(&terms)? {
            Some(q) => q,
            None => BigRational::from_integer(BigInt::from(2)),
        };
        Ok(LacunarySequence {
            terms,
            q_certified: q,
            label: label.into(),
        })
    }

    /// Convenience constructor from machine integers.
    pub fn from_u64s(terms: &[u64], label: impl Into<String>) -> Result<Self> {
        Self::from_terms(terms.iter().map(|&t| BigUint::from(t)).collect(), label)
    }

    /// Builds a sequence with a caller-supplied certificate, checking
    /// `n_{k+1} >= q * n_k` exactly for every pair.
    pub fn with_certificate(
        terms: Vec<BigUint>,
        q: BigRational,
        label: impl Into<String>,
    ) -> Result<Self> {
        if q <= BigRational::one() {
            return Err(Error::domain(format!("certified gap {q} must exceed 1")));
        }
        check_terms(&terms)?;
        let (num, den) = (q.numer(), q.denom());
        for (i, pair) in terms.windows(2).enumerate() {
            let lhs = BigInt::from(pair[1].clone()) * den;
            let rhs = BigInt::from(pair[0].clone()) * num;
            if lhs < rhs {
                return Err(Error::CertificateViolated {
                    index: i + 2,
                    q: q.to_string(),
                });
            }
        }
        Ok(LacunarySequence {
            terms,
            q_certified: q,
            label: label.into(),
        })
    }

    pub fn terms(&self) -> &[BigUint] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn q_certified(&self) -> &BigRational {
        &self.q_certified
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Largest frequency `n_N`.
    pub fn max_term(&self) -> &BigUint {
        self.terms.last().expect("sequences are nonempty")
    }

    /// Frequencies as `u64`, or `None` if any term does not fit.
    pub fn terms_u64(&self) -> Option<Vec<u64>> {
        self.terms.iter().map(|t| t.to_u64()).collect()
    }

    /// The first `n` terms as a new sequence.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(Error::InsufficientLength {
                required: n.max(1),
                available: self.len(),
            });
        }
        if n == self.len() {
            return Ok(self.clone());
        }
        let terms = self.terms[..n].to_vec();
        let q = verify_hadamard(&terms)?.unwrap_or_else(|| self.q_certified.clone());
        Ok(LacunarySequence {
            terms,
            q_certified: q,
            label: self.label.clone(),
        })
    }

    /// Same frequencies under a new label.
    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

impl fmt::Display for LacunarySequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (N = {}, q = {})",
            self.label,
            self.len(),
            self.q_certified
        )
    }
}

fn check_terms(terms: &[BigUint]) -> Result<()> {
    if terms.is_empty() {
        return Err(Error::domain("a sequence needs at least one term"));
    }
    for (i, t) in terms.iter().enumerate() {
        if t.is_zero() {
            return Err(Error::NonPositiveTerm { index: i + 1 });
        }
    }
    Ok(())
}

/// Exact minimum of the consecutive ratios `n_{k+1}/n_k`.
///
/// Returns `Ok(None)` for a single term (no ratio to certify). Fails with
/// [`Error::NotIncreasing`] when a term decreases and [`Error::NotLacunary`]
/// when two consecutive terms are equal.
pub fn verify_hadamard(terms: &[BigUint]) -> Result<Option<BigRational>> {
    check_terms(terms)?;
    let mut min: Option<BigRational> = None;
    for (i, pair) in terms.windows(2).enumerate() {
        let index = i + 2;
        if pair[1] < pair[0] {
            return Err(Error::NotIncreasing { index });
        }
        let ratio = BigRational::new(BigInt::from(pair[1].clone()), BigInt::from(pair[0].clone()));
        if ratio <= BigRational::one() {
            return Err(Error::NotLacunary {
                index,
                ratio: ratio.to_string(),
            });
        }
        if min.as_ref().is_none_or(|m| ratio < *m) {
            min = Some(ratio);
        }
    }
    Ok(min)
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::domain("sequence length N must be at least 1"))
    } else {
        Ok(())
    }
}

/// `n_k = a^k` for `k = 1..=N`, certified with `q = a`.
pub fn make_geometric(a: u64, n: usize) -> Result<LacunarySequence> {
    if a < 2 {
        return Err(Error::domain(format!(
            "geometric base must be >= 2, got {a}"
        )));
    }
    check_len(n)?;
    let base = BigUint::from(a);
    let mut terms = Vec::with_capacity(n);
    let mut cur = base.clone();
    for _ in 0..n {
        terms.push(cur.clone());
        cur *= &base;
    }
    let q = BigRational::from_integer(BigInt::from(a));
    LacunarySequence::with_certificate(terms, q, format!("geometric:{a}:{n}"))
}

/// Pair-block sequence: `n_1 = 1`, `n_{k+1} = 2 n_k` for odd `k` and
/// `n_{k+1} = k! n_k` for even `k`. Consecutive indices `(2j-1, 2j)` form
/// the dependent pairs.
pub fn make_pairblock(n: usize) -> Result<LacunarySequence> {
    check_len(n)?;
    let mut terms = Vec::with_capacity(n);
    let mut cur = BigUint::one();
    let mut factorial = BigUint::one();
    for k in 1..=n {
        terms.push(cur.clone());
        factorial *= BigUint::from(k);
        if k % 2 == 1 {
            cur *= 2u32;
        } else {
            cur *= &factorial;
        }
    }
    let q = BigRational::from_integer(BigInt::from(2));
    LacunarySequence::with_certificate(terms, q, format!("pairblock:{n}"))
}

/// Triple-block sequence: `n_1 = 1`; within each triple starting at
/// `k ≡ 1 (mod 3)` the terms are `n_k, 2 n_k, 3 n_k`; a triple is followed
/// by the jump `n_{k+1} = k! n_k` at `k ≡ 0 (mod 3)`. So `n_4 = 3! n_3`.
pub fn make_tripleblock(n: usize) -> Result<LacunarySequence> {
    check_len(n)?;
    let mut terms: Vec<BigUint> = Vec::with_capacity(n);
    let mut factorial = BigUint::one();
    for k in 1..=n {
        let next = match k % 3 {
            1 if k == 1 => BigUint::one(),
            // k - 1 ≡ 0 (mod 3): factorial jump from the previous term.
            1 => &terms[k - 2] * &factorial,
            2 => &terms[k - 2] * 2u32,
            _ => &terms[k - 3] * 3u32,
        };
        terms.push(next);
        factorial *= BigUint::from(k);
    }
    let q = if n >= 3 {
        BigRational::new(BigInt::from(3), BigInt::from(2))
    } else {
        BigRational::from_integer(BigInt::from(2))
    };
    LacunarySequence::with_certificate(terms, q, format!("tripleblock:{n}"))
}

/// Reads a sequence file: one decimal integer per line, `#` lines ignored.
pub fn load_sequence(path: impl AsRef<Path>) -> Result<LacunarySequence> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "file".to_string());
    parse_sequence(&text, label)
}

/// Parses the sequence file format from a string.
pub fn parse_sequence(text: &str, label: impl Into<String>) -> Result<LacunarySequence> {
    let mut terms = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let value: BigInt = line.parse().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("not a decimal integer: {line:?}"),
        })?;
        match value.sign() {
            Sign::Plus => terms.push(value.magnitude().clone()),
            _ => {
                return Err(Error::NonPositiveTerm {
                    index: terms.len() + 1,
                })
            }
        }
    }
    if terms.is_empty() {
        return Err(Error::Parse {
            line: text.lines().count(),
            message: "no terms found".into(),
        });
    }
    LacunarySequence::from_terms(terms, label)
}

/// Writes `seq` in the sequence file format, preceded by a label comment.
pub fn save_sequence(seq: &LacunarySequence, path: impl AsRef<Path>) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(format_sequence(seq).as_bytes())?;
    Ok(())
}

pub fn format_sequence(seq: &LacunarySequence) -> String {
    let mut out = format!("# {}\n", seq.label());
    for t in seq.terms() {
        out.push_str(&t.to_str_radix(10));
        out.push('\n');
    }
    out
}
