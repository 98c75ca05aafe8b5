//! Exact Bessel expansion of the MGF.
//!
//! Inserting `exp(z cos θ) = Σ_m I_m(z) e^{imθ}` into every factor and
//! integrating over `[0, 1]` leaves
//!
//! ```text
//! MGF = Σ_{(m_1..m_N) : Σ m_k n_k = 0} Π_k I_{|m_k|}(√2 λ),
//! ```
//!
//! truncated to `|m_k| <= m_max`. Indices are processed from the largest
//! frequency down. A partial sum `P` is dropped once `|P|` exceeds the
//! largest mass `m_max Σ n_j` the remaining indices can cancel, and partial
//! sums that coincide are merged, so the search only keeps the distinct
//! reachable values of `P` at each depth.

use std::f64::consts::SQRT_2;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use super::{check_lambda, log_error, MethodKind, MethodMeta, MgfEstimate};
use crate::besselkit::{bessel_i, BesselSeriesConfig, MAX_ORDER};
use crate::error::{Error, Result};
use crate::seqgen::LacunarySequence;
use crate::sum::Neumaier;

/// Largest sequence length the expansion accepts.
pub const MAX_DIOPHANTINE_N: usize = 16;
/// Largest per-index order accepted.
pub const MAX_M: u32 = 32;

/// Target for the truncation bound when `m_max` is chosen automatically.
const AUTO_TARGET: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiophantineConfig {
    /// Per-index order cap; `None` picks the smallest cap whose truncation
    /// bound is below 1e-15.
    pub m_max: Option<u32>,
    /// Absolute tail tolerance of the Bessel series behind the weights.
    pub tail_tolerance: f64,
}

impl Default for DiophantineConfig {
    fn default() -> Self {
        DiophantineConfig {
            m_max: None,
            tail_tolerance: 1e-30,
        }
    }
}

impl DiophantineConfig {
    pub fn with_m_max(m_max: u32) -> Self {
        DiophantineConfig {
            m_max: Some(m_max),
            ..Default::default()
        }
    }
}

/// `2 Σ_{j > m} I_j(|z|)`, the weight lost per index by truncating at `m`.
fn bessel_tail(z: f64, m: u32) -> f64 {
    let cfg = BesselSeriesConfig::default();
    let x = z.abs();
    let mut sum = 0.0;
    let mut last = 0.0;
    let top = MAX_ORDER.min(m + 40);
    for j in (m + 1)..=top {
        last = bessel_i(j, x, &cfg).expect("order and argument in range");
        sum += last;
    }
    // I_{j+1}(x) / I_j(x) < x / (2j + 1) bounds what lies beyond `top`.
    let r = x / (2 * top + 1) as f64;
    2.0 * (sum + last * r / (1.0 - r))
}

/// Bound on the MGF mass carried by tuples with some `|m_k| > m_max`.
fn truncation_bound(n: usize, z: f64, m_max: u32) -> f64 {
    n as f64 * bessel_tail(z, m_max) * (z.abs() * (n as f64 - 1.0)).exp()
}

/// Smallest `m_max` whose truncation bound is below `target`, capped at [`MAX_M`].
pub fn suggested_m_max(n: usize, lambda: f64, target: f64) -> u32 {
    let z = SQRT_2 * lambda;
    (1..=MAX_M)
        .find(|&m| truncation_bound(n, z, m) <= target)
        .unwrap_or(MAX_M)
}

/// Evaluates the MGF through the truncated Bessel expansion.
pub fn mgf_diophantine(
    seq: &LacunarySequence,
    lambda: f64,
    cfg: &DiophantineConfig,
) -> Result<MgfEstimate> {
    check_lambda(lambda)?;
    let n = seq.len();
    if n > MAX_DIOPHANTINE_N {
        return Err(Error::infeasible(format!(
            "Diophantine expansion requires N <= {MAX_DIOPHANTINE_N}, got N = {n}"
        )));
    }
    let m_max = cfg
        .m_max
        .unwrap_or_else(|| suggested_m_max(n, lambda, AUTO_TARGET));
    if m_max > MAX_M {
        return Err(Error::infeasible(format!(
            "Diophantine expansion requires m_max <= {MAX_M}, got m_max = {m_max}"
        )));
    }
    let bessel_cfg = BesselSeriesConfig::new(200, cfg.tail_tolerance)?;
    let z = SQRT_2 * lambda;
    if lambda == 0.0 {
        return Ok(MgfEstimate {
            value: 1.0,
            log_value: 0.0,
            method: MethodKind::Diophantine,
            error_bound: 0.0,
            lambda,
            n,
            meta: MethodMeta::Diophantine {
                m_max,
                max_states: 1,
                tail_tolerance: cfg.tail_tolerance,
            },
        });
    }

    let mm = m_max as i64;
    let mut weights = Vec::with_capacity(2 * m_max as usize + 1);
    let mut abs_weights = Vec::with_capacity(weights.capacity());
    for m in -mm..=mm {
        let order = m.unsigned_abs() as u32;
        weights.push(bessel_i(order, z, &bessel_cfg)?);
        abs_weights.push(bessel_i(order, z.abs(), &bessel_cfg)?);
    }
    let table = WeightTable {
        m_max: mm,
        signed: weights,
        absolute: abs_weights,
    };

    let descending: Vec<BigInt> = seq
        .terms()
        .iter()
        .rev()
        .map(|t| BigInt::from(t.clone()))
        .collect();
    let total: BigInt = descending.iter().sum::<BigInt>() * mm;
    let (value, abs_value, max_states) = if total.bits() < 100 {
        let freqs: Vec<i128> = descending.iter().map(|f| f.to_i128().unwrap()).collect();
        run_levels(&freqs, &table)
    } else {
        run_levels(&descending, &table)
    };

    let truncation = truncation_bound(n, z, m_max);
    let rounding = 4.0 * f64::EPSILON * (n as f64 + 2.0) * abs_value;
    let weight_error = n as f64
        * (2 * m_max + 1) as f64
        * 1.8
        * cfg.tail_tolerance
        * (z.abs() * (n as f64 - 1.0)).exp();
    Ok(MgfEstimate {
        value,
        log_value: value.ln(),
        method: MethodKind::Diophantine,
        error_bound: log_error(truncation + rounding + weight_error, value),
        lambda,
        n,
        meta: MethodMeta::Diophantine {
            m_max,
            max_states,
            tail_tolerance: cfg.tail_tolerance,
        },
    })
}

struct WeightTable {
    m_max: i64,
    signed: Vec<f64>,
    absolute: Vec<f64>,
}

impl WeightTable {
    fn get(&self, m: i64) -> (f64, f64) {
        let i = (m + self.m_max) as usize;
        (self.signed[i], self.absolute[i])
    }
}

/// Integer key for partial sums `Σ m_k n_k`.
trait PartialSum: Clone + Ord + Send + Sync {
    fn zero() -> Self;
    fn add_multiple(&self, m: i64, n: &Self) -> Self;
    /// Multiples `m ∈ [-m_max, m_max]` with `|self + m n| <= bound`.
    fn admissible(&self, n: &Self, bound: &Self, m_max: i64) -> (i64, i64);
}

impl PartialSum for i128 {
    fn zero() -> Self {
        0
    }

    fn add_multiple(&self, m: i64, n: &Self) -> Self {
        self + m as i128 * n
    }

    fn admissible(&self, n: &Self, bound: &Self, m_max: i64) -> (i64, i64) {
        let lo = Integer::div_ceil(&(-bound - self), n);
        let hi = Integer::div_floor(&(bound - self), n);
        (lo.max(-m_max as i128) as i64, hi.min(m_max as i128) as i64)
    }
}

impl PartialSum for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }

    fn add_multiple(&self, m: i64, n: &Self) -> Self {
        self + BigInt::from(m) * n
    }

    fn admissible(&self, n: &Self, bound: &Self, m_max: i64) -> (i64, i64) {
        let lo = Integer::div_ceil(&(-bound - self), n);
        let hi = Integer::div_floor(&(bound - self), n);
        let lo = lo.max(BigInt::from(-m_max)).to_i64().unwrap_or(m_max + 1);
        let hi = hi.min(BigInt::from(m_max)).to_i64().unwrap_or(-m_max - 1);
        (lo, hi)
    }
}

/// Runs the level-by-level expansion over `freqs` (largest first) and
/// returns the signed total at `P = 0`, the same total with `|I_m|`
/// weights, and the largest number of live partial sums.
fn run_levels<K: PartialSum>(freqs: &[K], table: &WeightTable) -> (f64, f64, usize) {
    let mm = table.m_max;
    // remaining[k] = m_max * Σ_{j > k} freqs[j]
    let mut remaining = vec![K::zero(); freqs.len()];
    for k in (0..freqs.len().saturating_sub(1)).rev() {
        remaining[k] = remaining[k + 1].add_multiple(mm, &freqs[k + 1]);
    }

    let mut states: Vec<(K, f64, f64)> = vec![(K::zero(), 1.0, 1.0)];
    let mut max_states = 1;
    for (n, bound) in freqs.iter().zip(&remaining) {
        let mut next: Vec<(K, f64, f64)> = states
            .par_iter()
            .flat_map_iter(|(p, v, a)| {
                let (lo, hi) = p.admissible(n, bound, mm);
                (lo..=hi).map(move |m| {
                    let (w, aw) = table.get(m);
                    (p.add_multiple(m, n), v * w, a * aw)
                })
            })
            .collect();
        next.par_sort_by(|x, y| x.0.cmp(&y.0));
        states = merge_equal(next);
        max_states = max_states.max(states.len());
        if states.is_empty() {
            break;
        }
    }
    let zero = K::zero();
    states
        .iter()
        .find(|s| s.0 == zero)
        .map_or((0.0, 0.0, max_states), |s| (s.1, s.2, max_states))
}

fn merge_equal<K: PartialSum>(sorted: Vec<(K, f64, f64)>) -> Vec<(K, f64, f64)> {
    let mut out: Vec<(K, f64, f64)> = Vec::new();
    let mut acc = (Neumaier::new(), Neumaier::new());
    let mut current: Option<K> = None;
    for (key, v, a) in sorted {
        if current.as_ref() != Some(&key) {
            if let Some(k) = current.take() {
                out.push((k, acc.0.value(), acc.1.value()));
            }
            acc = (Neumaier::new(), Neumaier::new());
            current = Some(key);
        }
        acc.0.add(v);
        acc.1.add(a);
    }
    if let Some(k) = current {
        out.push((k, acc.0.value(), acc.1.value()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mgfeval::{mgf_quadrature, QuadratureConfig};
    use crate::seqgen::make_geometric;

    /// Unpruned depth-first sum over all tuples in `[-m_max, m_max]^N`.
    fn brute_force(freqs: &[i64], lambda: f64, m_max: i64) -> f64 {
        let cfg = BesselSeriesConfig::default();
        let z = SQRT_2 * lambda;
        fn go(freqs: &[i64], z: f64, m_max: i64, partial: i64, cfg: &BesselSeriesConfig) -> f64 {
            match freqs.split_first() {
                None => {
                    if partial == 0 {
                        1.0
                    } else {
                        0.0
                    }
                }
                Some((&n, rest)) => (-m_max..=m_max)
                    .map(|m| {
                        let w = bessel_i(m.unsigned_abs() as u32, z, cfg).unwrap();
                        w * go(rest, z, m_max, partial + m * n, cfg)
                    })
                    .sum(),
            }
        }
        go(freqs, z, m_max, 0, &cfg)
    }

    #[test]
    fn matches_unpruned_enumeration() {
        for (terms, lambda) in [
            (vec![1u64, 2, 3], 0.3),
            (vec![1, 2, 3], -0.8),
            (vec![2, 3, 5, 8], 0.6),
            (vec![1, 3, 4, 7], -1.0),
        ] {
            let seq = LacunarySequence::from_u64s(&terms, "t").unwrap();
            let freqs: Vec<i64> = terms.iter().map(|&t| t as i64).collect();
            let est = mgf_diophantine(&seq, lambda, &DiophantineConfig::with_m_max(4)).unwrap();
            let expect = brute_force(&freqs, lambda, 4);
            assert!(
                (est.value - expect).abs() < 1e-13 * expect,
                "{terms:?} {lambda}"
            );
        }
    }

    #[test]
    fn single_frequency_keeps_only_zero_tuple() {
        let seq = LacunarySequence::from_u64s(&[1], "one").unwrap();
        let cfg = BesselSeriesConfig::default();
        for &lambda in &[-0.9, 0.25, 1.0] {
            let est = mgf_diophantine(&seq, lambda, &DiophantineConfig::default()).unwrap();
            let i0 = bessel_i(0, SQRT_2 * lambda, &cfg).unwrap();
            assert_eq!(est.value, i0);
        }
    }

    #[test]
    fn superlacunary_is_a_product_of_i0() {
        let seq = LacunarySequence::from_u64s(&[1, 100, 10_000], "super").unwrap();
        let est = mgf_diophantine(&seq, 0.5, &DiophantineConfig::with_m_max(4)).unwrap();
        let i0 = bessel_i(0, SQRT_2 * 0.5, &BesselSeriesConfig::default()).unwrap();
        assert!((est.value - i0.powi(3)).abs() < 1e-15);
        let quad = mgf_quadrature(&seq, 0.5, &QuadratureConfig::default()).unwrap();
        assert!((quad.log_value - est.log_value).abs() < 1e-12);
    }

    #[test]
    fn three_term_relation_contributes() {
        let seq = LacunarySequence::from_u64s(&[1, 2, 3], "t").unwrap();
        let dio = mgf_diophantine(&seq, 0.3, &DiophantineConfig::default()).unwrap();
        let quad = mgf_quadrature(&seq, 0.3, &QuadratureConfig::default()).unwrap();
        assert!((dio.log_value - quad.log_value).abs() < 1e-10);
        let i0 = bessel_i(0, SQRT_2 * 0.3, &BesselSeriesConfig::default()).unwrap();
        assert!(dio.value > i0.powi(3) * 1.01);
    }

    #[test]
    fn big_integer_path_agrees_with_machine_path() {
        // 10^35 pushes m_max * Σ n_k past the i128 fast path.
        let big = BigInt::from(10u64).pow(35);
        let terms: Vec<_> = [1u64, 2, 5]
            .iter()
            .map(|&t| (BigInt::from(t) * &big).to_biguint().unwrap())
            .collect();
        let scaled = LacunarySequence::from_terms(terms, "scaled").unwrap();
        let small = LacunarySequence::from_u64s(&[1, 2, 5], "small").unwrap();
        let cfg = DiophantineConfig::with_m_max(6);
        let a = mgf_diophantine(&scaled, 0.7, &cfg).unwrap();
        let b = mgf_diophantine(&small, 0.7, &cfg).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn limits_are_enforced() {
        let seq = make_geometric(2, 17).unwrap();
        assert!(matches!(
            mgf_diophantine(&seq, 0.1, &DiophantineConfig::default()),
            Err(Error::Infeasible { .. })
        ));
        let seq = make_geometric(2, 4).unwrap();
        assert!(matches!(
            mgf_diophantine(&seq, 0.1, &DiophantineConfig::with_m_max(33)),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn auto_order_grows_with_lambda() {
        assert!(suggested_m_max(10, 1.0, 1e-15) > suggested_m_max(10, 0.1, 1e-15));
        assert!(suggested_m_max(16, 1.0, 1e-15) <= MAX_M);
    }
}
