//! Equispaced (trapezoidal) quadrature of the 1-periodic integrand.

use std::f64::consts::{E, SQRT_2, TAU};

use rayon::prelude::*;

use super::{check_lambda, log_error, MethodKind, MethodMeta, MgfEstimate};
use crate::error::{Error, Result};
use crate::seqgen::LacunarySequence;
use crate::sum::{pairwise_sum, Neumaier, CHUNK};

/// Largest frequency the quadrature accepts.
pub const MAX_FREQUENCY: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureConfig {
    /// Grid points per unit of effective bandwidth; at least 4.
    pub oversample: u32,
    /// Upper limit on the number of grid points.
    pub max_grid: u64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            oversample: 8,
            max_grid: 1 << 28,
        }
    }
}

/// Effective bandwidth `B = n_N (1 + 2 ⌈√2 |λ| e⌉)`.
pub(crate) fn bandwidth(max_freq: u64, lambda: f64) -> Option<u64> {
    let orders = (SQRT_2 * lambda.abs() * E).ceil() as u64;
    max_freq.checked_mul(1 + 2 * orders)
}

/// Evaluates the MGF as the mean of the integrand over `oversample * B`
/// equispaced points.
///
/// The reported `error_bound` combines a rounding allowance with a
/// certified aliasing bound. The bound comes from the Bessel generating
/// function `Σ_m I_m(|z|) t^m = exp(|z|(t + 1/t)/2)` with `t = e^{2πh}`:
/// every Fourier mode `|m| >= M` of the integrand is below
/// `exp(|z| Σ_k cosh(2π n_k h) - 2π h |m|)`, minimised over `h > 0`.
pub fn mgf_quadrature(
    seq: &LacunarySequence,
    lambda: f64,
    cfg: &QuadratureConfig,
) -> Result<MgfEstimate> {
    check_lambda(lambda)?;
    if cfg.oversample < 4 {
        return Err(Error::domain(format!(
            "oversample = {} must be at least 4",
            cfg.oversample
        )));
    }
    let freqs = match seq.terms_u64() {
        Some(f) if *f.last().unwrap() <= MAX_FREQUENCY => f,
        _ => {
            return Err(Error::infeasible(format!(
                "quadrature requires n_N <= 2^32, got n_N = {}",
                seq.max_term()
            )))
        }
    };
    let max_freq = *freqs.last().unwrap();
    let band = bandwidth(max_freq, lambda);
    let grid = band.and_then(|b| b.checked_mul(cfg.oversample as u64));
    let (band, grid) = match (band, grid) {
        (Some(b), Some(g)) if g <= cfg.max_grid => (b, g),
        _ => {
            return Err(Error::infeasible(format!(
                "quadrature grid of {} points exceeds the cap of {} points",
                grid.map_or_else(|| "more than 2^64".to_string(), |g| g.to_string()),
                cfg.max_grid
            )))
        }
    };
    let meta = MethodMeta::Quadrature {
        grid_points: grid,
        bandwidth: band,
        oversample: cfg.oversample,
    };
    let n = freqs.len();
    if lambda == 0.0 {
        return Ok(MgfEstimate {
            value: 1.0,
            log_value: 0.0,
            method: MethodKind::Quadrature,
            error_bound: 0.0,
            lambda,
            n,
            meta,
        });
    }

    let z = SQRT_2 * lambda;
    let mean = symmetric_grid_mean(&freqs, grid, |s| (z * s).exp());
    let value_error = aliasing_bound(&freqs, z, grid) + rounding_allowance(n, lambda) * mean;
    Ok(MgfEstimate {
        value: mean,
        log_value: mean.ln(),
        method: MethodKind::Quadrature,
        error_bound: log_error(value_error, mean),
        lambda,
        n,
        meta,
    })
}

/// Mean of `g(Σ_k cos(2π n_k j / M))` over `j = 0..M`, using the symmetry
/// `j ↔ M - j` of the cosine sum.
pub(crate) fn symmetric_grid_mean<G>(freqs: &[u64], grid: u64, g: G) -> f64
where
    G: Fn(f64) -> f64 + Sync,
{
    let half = grid / 2;
    let chunks = (half as usize + 1).div_ceil(CHUNK);
    let partials: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = (c * CHUNK) as u64;
            let end = ((c + 1) * CHUNK) as u64;
            let end = end.min(half + 1);
            let mut acc = Neumaier::new();
            for_each_cos_sum(freqs, grid, start, end, |j, s| {
                let w = if j == 0 || 2 * j == grid { 1.0 } else { 2.0 };
                acc.add(w * g(s));
            });
            acc.value()
        })
        .collect();
    pairwise_sum(&partials) / grid as f64
}

/// Calls `f(j, Σ_k cos(2π n_k j / M))` for `j` in `start..end`.
///
/// Phases are tracked as exact residues `n_k j mod M`.
pub(crate) fn for_each_cos_sum<F>(freqs: &[u64], grid: u64, start: u64, end: u64, mut f: F)
where
    F: FnMut(u64, f64),
{
    if start >= end {
        return;
    }
    let steps: Vec<u64> = freqs.iter().map(|&n| n % grid).collect();
    let mut phases: Vec<u64> = steps
        .iter()
        .map(|&s| ((s as u128 * start as u128) % grid as u128) as u64)
        .collect();
    let scale = TAU / grid as f64;
    for j in start..end {
        let mut s = 0.0;
        for (p, &step) in phases.iter_mut().zip(&steps) {
            s += (scale * *p as f64).cos();
            *p += step;
            if *p >= grid {
                *p -= grid;
            }
        }
        f(j, s);
    }
}

/// Allowance for floating-point error relative to the computed mean.
fn rounding_allowance(n: usize, lambda: f64) -> f64 {
    8.0 * f64::EPSILON * (1.0 + SQRT_2 * n as f64 * lambda.abs())
}

/// Certified bound on `Σ_{j≠0} |f̂(j M)|` for `f = exp(z Σ cos(2π n_k x))`.
pub(crate) fn aliasing_bound(freqs: &[u64], z: f64, grid: u64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let n_max = *freqs.last().unwrap() as f64;
    let ratio = grid as f64 / n_max;
    let mut best = f64::INFINITY;
    // u = 2π h n_N ranges over a geometric grid in (0, 40].
    let mut u = 1e-3;
    while u <= 40.0 {
        let strip: f64 = freqs
            .iter()
            .map(|&n| (u * n as f64 / n_max).cosh())
            .sum::<f64>();
        let decay = u * ratio;
        let log_bound =
            std::f64::consts::LN_2 + z.abs() * strip - decay - (-(-decay).exp()).ln_1p();
        best = best.min(log_bound);
        u *= 1.05;
    }
    best.exp()
}
