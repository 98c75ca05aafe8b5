//! Modified Bessel functions of the first kind by power series, and the
//! exact Taylor coefficients of `λ ↦ log I₀(√2 λ)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest order accepted by [`bessel_i`].
pub const MAX_ORDER: u32 = 64;
/// Largest `|x|` accepted by [`bessel_i`].
pub const MAX_ARGUMENT: f64 = 4.0;

/// Truncation control for the Bessel power series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselSeriesConfig {
    pub max_terms: usize,
    /// Absolute bound on the first omitted term.
    pub tail_tolerance: f64,
}

impl Default for BesselSeriesConfig {
    fn default() -> Self {
        BesselSeriesConfig {
            max_terms: 200,
            tail_tolerance: 1e-300,
        }
    }
}

impl BesselSeriesConfig {
    pub fn new(max_terms: usize, tail_tolerance: f64) -> Result<Self> {
        if max_terms == 0 {
            return Err(Error::domain("max_terms must be at least 1"));
        }
        if tail_tolerance.is_nan() || tail_tolerance <= 0.0 {
            return Err(Error::domain("tail_tolerance must be positive"));
        }
        Ok(BesselSeriesConfig {
            max_terms,
            tail_tolerance,
        })
    }
}

/// `I_m(x) = Σ_j (x/2)^{2j+m} / (j! (j+m)!)`.
///
/// Summation stops at the first term below `tail_tolerance` once the term
/// ratio is at most 4/9 (guaranteed for `j >= 2` on `|x| <= 4`), so the
/// omitted tail is below `1.8 * tail_tolerance`.
pub fn bessel_i(m: u32, x: f64, cfg: &BesselSeriesConfig) -> Result<f64> {
    if m > MAX_ORDER {
        return Err(Error::domain(format!(
            "Bessel order {m} exceeds {MAX_ORDER}"
        )));
    }
    if x.is_nan() || x.abs() > MAX_ARGUMENT {
        return Err(Error::domain(format!(
            "Bessel argument {x} outside [-{MAX_ARGUMENT}, {MAX_ARGUMENT}]"
        )));
    }
    let half = 0.5 * x;
    let quarter_sq = half * half;
    let mut term = 1.0;
    for i in 1..=m {
        term *= half / i as f64;
    }
    let mut sum = term;
    for j in 0..cfg.max_terms.saturating_sub(1) {
        let k = (j + 1) as f64;
        term *= quarter_sq / (k * (k + m as f64));
        if j >= 1 && term.abs() < cfg.tail_tolerance {
            break;
        }
        sum += term;
    }
    Ok(sum)
}

/// Dense truncated power series with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalSeries {
    coeffs: Vec<BigRational>,
}

impl RationalSeries {
    /// Series known up to and including `x^order`.
    pub fn new(mut coeffs: Vec<BigRational>, order: usize) -> Self {
        coeffs.resize(order + 1, BigRational::zero());
        RationalSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &BigRational {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut out = vec![BigRational::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                out[i + j] += a * b;
            }
        }
        RationalSeries { coeffs: out }
    }

    /// `outer(self)` for a series `self` with zero constant term, by Horner
    /// evaluation of `outer` at `self`.
    pub fn compose_into(&self, outer: &RationalSeries) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::domain("inner series must have zero constant term"));
        }
        let order = self.order();
        let mut acc = RationalSeries::new(vec![], order);
        for c in outer.coeffs.iter().rev() {
            acc = acc.mul(self);
            acc.coeffs[0] += c;
        }
        Ok(acc)
    }
}

/// `log(1 + u) = Σ_{k≥1} (-1)^{k+1} u^k / k` up to `u^order`.
fn log1p_series(order: usize) -> RationalSeries {
    let coeffs = (0..=order)
        .map(|k| {
            if k == 0 {
                BigRational::zero()
            } else {
                let sign = if k % 2 == 1 { 1 } else { -1 };
                BigRational::new(BigInt::from(sign), BigInt::from(k))
            }
        })
        .collect();
    RationalSeries::new(coeffs, order)
}

/// `I₀(√2 λ) = Σ_m λ^{2m} / (2^m (m!)²)` as a series in `λ` up to `λ^order`.
pub fn i0_sqrt2_series(order: usize) -> RationalSeries {
    let mut coeffs = vec![BigRational::zero(); order + 1];
    let mut denom = BigInt::one();
    for m in 0..=order / 2 {
        if m > 0 {
            let mm = BigInt::from(m);
            denom *= BigInt::from(2) * &mm * &mm;
        }
        coeffs[2 * m] = BigRational::new(BigInt::one(), denom.clone());
    }
    RationalSeries::new(coeffs, order)
}

/// Full Taylor series of `log I₀(√2 λ)` up to `λ^order` (odd entries are zero).
pub fn log_i0_series(order: usize) -> RationalSeries {
    let mut inner = i0_sqrt2_series(order);
    inner.coeffs[0] = BigRational::zero();
    inner
        .compose_into(&log1p_series(order))
        .expect("inner series has zero constant term")
}

/// Coefficients of `λ², λ⁴, …, λ^order` in `log I₀(√2 λ)`; `order ∈ {2,4,6,8}`.
pub fn log_i0_coefficients(order: u32) -> Result<Vec<BigRational>> {
    if order % 2 == 1 {
        return Err(Error::domain(format!("order {order} must be even")));
    }
    if !(2..=8).contains(&order) {
        return Err(Error::domain(format!(
            "order {order} must be one of 2, 4, 6, 8"
        )));
    }
    let series = log_i0_series(order as usize);
    Ok((2..=order as usize)
        .step_by(2)
        .map(|k| series.coeff(k).clone())
        .collect())
}
