//! Compensated accumulation and order-fixed pairwise reduction.
//!
//! Every parallel reduction in the crate splits its work into chunks of a
//! fixed size, sums each chunk with [`Neumaier`], and merges the chunk
//! partials with [`pairwise_sum`]. The chunk layout does not depend on the
//! number of worker threads, so results are bitwise identical for any pool
//! size.

/// Number of grid points handled by one reduction chunk.
pub const CHUNK: usize = 1 << 14;

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub const fn new() -> Self {
        Neumaier {
            sum: 0.0,
            comp: 0.0,
        }
    }

    pub fn from_value(v: f64) -> Self {
        Neumaier { sum: v, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sums `values` with a balanced binary tree whose shape depends only on
/// `values.len()`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => {
            let mut acc = Neumaier::new();
            values.iter().for_each(|&v| acc.add(v));
            acc.value()
        }
        n => {
            let (lo, hi) = values.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_mass() {
        let mut acc = Neumaier::new();
        for v in [1.0, 1e100, 1.0, -1e100] {
            acc.add(v);
        }
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn pairwise_matches_exact_integer_sum() {
        let v: Vec<f64> = (1..=10_000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 50_005_000.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
