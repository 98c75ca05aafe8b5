//! Moment generating function of a lacunary cosine sum,
//!
//! ```text
//! MGF_N(λ) = ∫₀¹ exp(λ Σ_{k≤N} √2 cos(2π n_k x)) dx,
//! ```
//!
//! computed by two independent routes: equispaced quadrature
//! ([`mgf_quadrature`]) and the exact Bessel expansion restricted to integer
//! tuples with `Σ m_k n_k = 0` ([`mgf_diophantine`]). `Λ_N(λ) = log MGF_N / N`
//! is available through [`lambda_n`].

mod diophantine;
mod quadrature;

pub use diophantine::{
    mgf_diophantine, suggested_m_max, DiophantineConfig, MAX_DIOPHANTINE_N, MAX_M,
};
pub(crate) use quadrature::for_each_cos_sum;
pub use quadrature::{mgf_quadrature, QuadratureConfig, MAX_FREQUENCY};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::seqgen::LacunarySequence;

/// Which route produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Quadrature,
    Diophantine,
}

/// Method-specific parameters recorded with an estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum MethodMeta {
    Quadrature {
        grid_points: u64,
        bandwidth: u64,
        oversample: u32,
    },
    Diophantine {
        m_max: u32,
        max_states: usize,
        tail_tolerance: f64,
    },
}

/// One MGF evaluation. `error_bound` is an absolute bound on `log_value`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MgfEstimate {
    pub value: f64,
    pub log_value: f64,
    pub method: MethodKind,
    pub error_bound: f64,
    pub lambda: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub meta: MethodMeta,
}

/// How to evaluate the MGF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Quadrature(QuadratureConfig),
    Diophantine(DiophantineConfig),
    /// Quadrature when the grid fits, the Diophantine expansion otherwise.
    Auto {
        quadrature: QuadratureConfig,
        diophantine: DiophantineConfig,
    },
}

impl Default for Method {
    fn default() -> Self {
        Method::Auto {
            quadrature: QuadratureConfig::default(),
            diophantine: DiophantineConfig::default(),
        }
    }
}

/// Evaluates the MGF with the chosen method.
pub fn mgf(seq: &LacunarySequence, lambda: f64, method: &Method) -> Result<MgfEstimate> {
    match method {
        Method::Quadrature(cfg) => mgf_quadrature(seq, lambda, cfg),
        Method::Diophantine(cfg) => mgf_diophantine(seq, lambda, cfg),
        Method::Auto {
            quadrature,
            diophantine,
        } => match mgf_quadrature(seq, lambda, quadrature) {
            Err(Error::Infeasible { bound: quad_bound }) => {
                mgf_diophantine(seq, lambda, diophantine).map_err(|e| match e {
                    Error::Infeasible { bound } => {
                        Error::infeasible(format!("{quad_bound}; {bound}"))
                    }
                    other => other,
                })
            }
            other => other,
        },
    }
}

/// `Λ_N(λ) = log MGF_N(λ) / N` with its error bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CumulantEstimate {
    pub lambda: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub value: f64,
    pub error_bound: f64,
    pub method: MethodKind,
}

pub fn lambda_n(seq: &LacunarySequence, lambda: f64, method: &Method) -> Result<CumulantEstimate> {
    let est = mgf(seq, lambda, method)?;
    let n = seq.len() as f64;
    Ok(CumulantEstimate {
        lambda,
        n: seq.len(),
        value: est.log_value / n,
        error_bound: est.error_bound / n,
        method: est.method,
    })
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&lambda) {
        return Err(Error::domain(format!(
            "lambda = {lambda} must lie in [-1, 1]"
        )));
    }
    Ok(())
}

/// Converts an absolute error on the MGF value into one on its logarithm.
/// The true MGF is at least 1, so `min(1, value)` bounds both endpoints.
pub(crate) fn log_error(value_error: f64, value: f64) -> f64 {
    value_error / value.min(1.0)
}
