//! Reference implementations shared by integration tests.
#![allow(dead_code)]

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed};

use lacmgf_core::blockdio::EquationKind;

/// Counts ordered tuples by direct enumeration.
pub fn brute_force_count(values: &[i64], threshold: i64, kind: EquationKind) -> u64 {
    let n = values.len();
    let mut count = 0;
    match kind {
        EquationKind::TwoTerm => {
            for a in 0..n {
                for b in 0..n {
                    if a != b && (values[a] - values[b]).abs() < threshold {
                        count += 1;
                    }
                }
            }
        }
        EquationKind::ThreeTerm => {
            for a in values {
                for b in values {
                    for c in values {
                        if (a - b - c).abs() < threshold {
                            count += 1;
                        }
                    }
                }
            }
        }
        EquationKind::FourTermPpmm | EquationKind::FourTermPppm => {
            let ppmm = kind == EquationKind::FourTermPpmm;
            for a in values {
                for b in values {
                    for c in values {
                        for d in values {
                            let v = if ppmm { a + b - c - d } else { a + b + c - d };
                            if v.abs() < threshold {
                                count += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    count
}

fn rat(v: BigInt) -> BigRational {
    BigRational::from_integer(v)
}

/// Decides `q^s (1 - 1/√q) > 1` and `1 + 4 q^{-s} <= √q` by bracketing
/// `√q` between dyadic rationals until the answer is forced.
pub fn s_conditions_by_intervals(q: &BigRational, s: u32) -> (bool, bool) {
    let a = q.numer().magnitude().clone();
    let b = q.denom().magnitude().clone();
    let qs = num_traits::pow(q.clone(), s as usize);
    let first = |x: &BigRational| &qs * (BigRational::one() - x.recip()) > BigRational::one();
    let second = |x: &BigRational| BigRational::one() + rat(BigInt::from(4)) / &qs <= *x;
    let mut bits = 16u32;
    loop {
        let scale = BigUint::one() << bits;
        let radicand = &a * &b * &scale * &scale;
        let r = radicand.sqrt();
        let denom = BigInt::from(&scale * &b);
        let lo = BigRational::new(BigInt::from(r.clone()), denom.clone());
        if &r * &r == radicand {
            return (first(&lo), second(&lo));
        }
        let hi = BigRational::new(BigInt::from(r + 1u32), denom);
        let f = match (first(&lo), first(&hi)) {
            (true, _) => Some(true),
            (false, false) => Some(false),
            _ => None,
        };
        let g = match (second(&lo), second(&hi)) {
            (true, _) => Some(true),
            (false, false) => Some(false),
            _ => None,
        };
        if let (Some(f), Some(g)) = (f, g) {
            return (f, g);
        }
        bits *= 2;
        assert!(bits < 1 << 16, "bracketing did not converge");
    }
}

/// Smallest `s` with both conditions, scanning upward.
pub fn choose_s_by_scan(q: &BigRational) -> u32 {
    assert!(q.is_positive() && *q > BigRational::one());
    let mut s = 1;
    loop {
        let (f, g) = s_conditions_by_intervals(q, s);
        if f && g {
            return s;
        }
        s += 1;
    }
}

/// `Σ_{j≤40} x^{2j} / (4^j (j!)²)`.
pub fn bessel_i0_long(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..=40 {
        term *= (x / 2.0) * (x / 2.0) / (j as f64 * j as f64);
        sum += term;
    }
    sum
}
