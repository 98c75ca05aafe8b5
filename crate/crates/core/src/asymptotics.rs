//! Small-λ behaviour of `Λ_N`: series fits, the cubic envelope, Legendre
//! transforms and empirical tails at moderate-deviation scale.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mgfeval::{
    for_each_cos_sum, lambda_n, mgf_quadrature, Method, QuadratureConfig, MAX_FREQUENCY,
};
use crate::seqgen::LacunarySequence;
use crate::sum::CHUNK;

/// Highest power of λ in the default fitting basis `λ², …, λ⁶`. The
/// powers above four absorb truncation so that `c₃, c₄` stay clean on
/// grids reaching `|λ| = 0.25`.
pub const DEFAULT_FIT_DEGREE: u32 = 6;
/// Largest `|λ|` accepted on a fitting grid.
pub const MAX_FIT_LAMBDA: f64 = 0.3;

/// `{±0.05, ±0.10, ±0.15, ±0.20, ±0.25}`.
pub fn default_fit_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (1..=5).map(|k| -0.05 * (6 - k) as f64).collect();
    grid.extend((1..=5).map(|k| 0.05 * k as f64));
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesFit {
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    /// Coefficients of `λ⁵, λ⁶, …` in the fitting basis.
    pub higher: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    /// Fitted samples, one per grid point.
    pub values: Vec<f64>,
    pub residual_max: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub seq_label: String,
}

fn check_fit_grid(grid: &[f64], degree: u32) -> Result<()> {
    if !(4..=12).contains(&degree) {
        return Err(Error::domain(format!(
            "fit degree {degree} must lie in 4..=12"
        )));
    }
    if grid.len() < 8 {
        return Err(Error::Grid(format!(
            "fit grid has {} points, need at least 8",
            grid.len()
        )));
    }
    if grid.len() < degree as usize {
        return Err(Error::Grid(format!(
            "fit grid has {} points, too few for degree {degree}",
            grid.len()
        )));
    }
    if let Some(bad) = grid.iter().find(|l| l.is_nan() || l.abs() > MAX_FIT_LAMBDA) {
        return Err(Error::Grid(format!(
            "grid point {bad} outside [-{MAX_FIT_LAMBDA}, {MAX_FIT_LAMBDA}]"
        )));
    }
    if grid.contains(&0.0) {
        return Err(Error::Grid("fit grid must exclude 0".into()));
    }
    if grid.iter().all(|&l| l > 0.0) || grid.iter().all(|&l| l < 0.0) {
        return Err(Error::Grid("fit grid points all have the same sign".into()));
    }
    for &l in grid {
        if !grid.iter().any(|&m| (m + l).abs() <= 1e-12) {
            return Err(Error::Grid(format!(
                "fit grid is not symmetric: {l} has no mirror point"
            )));
        }
    }
    Ok(())
}

/// Least-squares fit of `values` against `λ², …, λ^degree`.
pub fn fit_samples(
    grid: &[f64],
    values: &[f64],
    degree: u32,
    n: usize,
    seq_label: impl Into<String>,
) -> Result<SeriesFit> {
    check_fit_grid(grid, degree)?;
    if values.len() != grid.len() {
        return Err(Error::domain("one value per grid point is required"));
    }
    // Columns in u = λ / max|λ| keep the design matrix well conditioned.
    let scale = grid.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let cols = (degree - 1) as usize;
    let design = DMatrix::from_fn(grid.len(), cols, |i, j| {
        (grid[i] / scale).powi(j as i32 + 2)
    });
    let rhs = DVector::from_column_slice(values);
    let svd = design.clone().svd(true, true);
    let coef = svd
        .solve(&rhs, 1e-13)
        .map_err(|e| Error::Grid(format!("least squares failed: {e}")))?;
    let residual_max = (&design * &coef - &rhs).amax();
    let c: Vec<f64> = coef
        .iter()
        .enumerate()
        .map(|(j, a)| a / scale.powi(j as i32 + 2))
        .collect();
    Ok(SeriesFit {
        c2: c[0],
        c3: c[1],
        c4: c[2],
        higher: c[3..].to_vec(),
        lambda_grid: grid.to_vec(),
        values: values.to_vec(),
        residual_max,
        n,
        seq_label: seq_label.into(),
    })
}

/// Samples `Λ_N` on the grid and fits it with [`DEFAULT_FIT_DEGREE`].
pub fn fit_series(
    seq: &LacunarySequence,
    n: usize,
    grid: &[f64],
    method: &Method,
) -> Result<SeriesFit> {
    check_fit_grid(grid, DEFAULT_FIT_DEGREE)?;
    let seq = seq.prefix(n)?;
    let values = grid
        .iter()
        .map(|&l| lambda_n(&seq, l, method).map(|c| c.value))
        .collect::<Result<Vec<_>>>()?;
    fit_samples(grid, &values, DEFAULT_FIT_DEGREE, n, seq.label())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockGenerator {
    Pair,
    Triple,
}

impl BlockGenerator {
    pub fn frequencies(self) -> &'static [u64] {
        match self {
            BlockGenerator::Pair => &[1, 2],
            BlockGenerator::Triple => &[1, 2, 3],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BlockGenerator::Pair => "pair",
            BlockGenerator::Triple => "triple",
        }
    }
}

/// Limit of `Λ_N` for sequences built from isolated blocks `n, 2n` or
/// `n, 2n, 3n`: the per-term log of the single-block integral.
pub fn block_limit_lambda(generator: BlockGenerator, lambda: f64) -> Result<f64> {
    let freqs = generator.frequencies();
    let seq = LacunarySequence::from_u64s(freqs, generator.label())?;
    let est = mgf_quadrature(&seq, lambda, &QuadratureConfig::default())?;
    Ok(est.log_value / freqs.len() as f64)
}

/// Fits [`block_limit_lambda`] on the grid.
pub fn fit_block_limit(generator: BlockGenerator, grid: &[f64]) -> Result<SeriesFit> {
    check_fit_grid(grid, DEFAULT_FIT_DEGREE)?;
    let values = grid
        .iter()
        .map(|&l| block_limit_lambda(generator, l))
        .collect::<Result<Vec<_>>>()?;
    fit_samples(
        grid,
        &values,
        DEFAULT_FIT_DEGREE,
        generator.frequencies().len(),
        generator.label(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeCheck {
    pub ratio: f64,
    pub argmax_lambda: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub seq_label: String,
    /// `(λ, Λ_N(λ))` for every grid point.
    pub samples: Vec<(f64, f64)>,
}

/// `max_λ |Λ_N(λ) - λ²/2| / |λ|³` over the grid.
pub fn envelope_check(
    seq: &LacunarySequence,
    n: usize,
    grid: &[f64],
    method: &Method,
) -> Result<EnvelopeCheck> {
    if grid.is_empty() {
        return Err(Error::Grid("envelope grid is empty".into()));
    }
    if let Some(bad) = grid
        .iter()
        .find(|l| **l == 0.0 || l.is_nan() || l.abs() > 1.0)
    {
        return Err(Error::Grid(format!(
            "grid point {bad} outside [-1, 1] \\ {{0}}"
        )));
    }
    let seq = seq.prefix(n)?;
    let mut best = (f64::NEG_INFINITY, grid[0]);
    let mut samples = Vec::with_capacity(grid.len());
    for &l in grid {
        let c = lambda_n(&seq, l, method)?;
        samples.push((l, c.value));
        let r = (c.value - 0.5 * l * l).abs() / l.abs().powi(3);
        if r > best.0 {
            best = (r, l);
        }
    }
    Ok(EnvelopeCheck {
        ratio: best.0,
        argmax_lambda: best.1,
        n,
        seq_label: seq.label().to_string(),
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LegendreRate {
    pub t: f64,
    pub rate: f64,
    pub argmax_lambda: f64,
    /// The maximum sits on the first or last grid point, so the true
    /// supremum may lie outside the sampled range.
    pub boundary_attained: bool,
}

/// `max_λ (tλ - Λ(λ))` over sampled pairs `(λ, Λ(λ))`.
pub fn legendre_rate(samples: &[(f64, f64)], t: f64) -> Result<LegendreRate> {
    if samples.is_empty() {
        return Err(Error::Grid("no samples".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut best, mut at) = (f64::NEG_INFINITY, 0);
    for (i, &(l, v)) in sorted.iter().enumerate() {
        let g = t * l - v;
        if g > best {
            best = g;
            at = i;
        }
    }
    Ok(LegendreRate {
        t,
        rate: best,
        argmax_lambda: sorted[at].0,
        boundary_attained: sorted.len() > 1 && (at == 0 || at == sorted.len() - 1),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailEstimate {
    pub t: f64,
    pub lambda: f64,
    #[serde(rename = "N")]
    pub n: usize,
    /// Fraction of sample points in the level set, or `1/grid_points` when
    /// none was hit (see `flagged`).
    pub measure: f64,
    pub grid_points: u64,
    pub mdp_normalized: f64,
    pub gaussian_target: f64,
    /// Certified bound `2 n_N / grid_points` on the sampling error of `measure`.
    pub resolution_bound: f64,
    pub flagged: bool,
}

/// Largest grid accepted by [`empirical_tail`].
pub const MAX_TAIL_GRID: u64 = 1 << 32;

/// Measures `{x : (λ/√N) Σ √2 cos(2π n_k x) >= t}` on `grid_points`
/// equispaced points.
///
/// The integrand is a trigonometric polynomial of degree `n_N`, so the
/// level set has at most `2 n_N` boundary points and sampling misjudges at
/// most that many cells.
pub fn empirical_tail(
    seq: &LacunarySequence,
    n: usize,
    lambda_scale: f64,
    t: f64,
    grid_points: u64,
) -> Result<TailEstimate> {
    if !(lambda_scale > 0.0 && lambda_scale.is_finite()) {
        return Err(Error::domain(format!(
            "lambda_scale = {lambda_scale} must be positive"
        )));
    }
    if !t.is_finite() {
        return Err(Error::domain("t must be finite"));
    }
    let seq = seq.prefix(n)?;
    let freqs = match seq.terms_u64() {
        Some(f) if *f.last().unwrap() <= MAX_FREQUENCY => f,
        _ => {
            return Err(Error::infeasible(format!(
                "tail sampling requires n_N <= 2^32, got n_N = {}",
                seq.max_term()
            )))
        }
    };
    let max_freq = *freqs.last().unwrap();
    if grid_points < 10 * max_freq {
        return Err(Error::Grid(format!(
            "grid_points = {grid_points} below 10 n_N = {}",
            10 * max_freq
        )));
    }
    if grid_points > MAX_TAIL_GRID {
        return Err(Error::infeasible(format!(
            "grid_points = {grid_points} exceeds the cap of {MAX_TAIL_GRID}"
        )));
    }
    let factor = lambda_scale * SQRT_2 / (n as f64).sqrt();
    let half = grid_points / 2;
    let chunks = (half as usize + 1).div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = (c * CHUNK) as u64;
            let end = (((c + 1) * CHUNK) as u64).min(half + 1);
            let mut hits = 0u64;
            for_each_cos_sum(&freqs, grid_points, start, end, |j, s| {
                if factor * s >= t {
                    hits += if j == 0 || 2 * j == grid_points { 1 } else { 2 };
                }
            });
            hits
        })
        .sum();
    let flagged = hits == 0;
    let measure = if flagged {
        1.0 / grid_points as f64
    } else {
        hits as f64 / grid_points as f64
    };
    Ok(TailEstimate {
        t,
        lambda: lambda_scale,
        n,
        measure,
        grid_points,
        mdp_normalized: lambda_scale * lambda_scale * measure.ln(),
        gaussian_target: 0.0 - 0.5 * t * t,
        resolution_bound: (2.0 * max_freq as f64 / grid_points as f64).min(1.0),
        flagged,
    })
}
