//! Parsing of sequence sources, grids and rationals given on the command line.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use lacmgf_core::seqgen::{load_sequence, make_geometric, make_pairblock, make_tripleblock};
use lacmgf_core::LacunarySequence;

use crate::CliError;

/// `geometric:a:N`, `pairblock:N`, `tripleblock:N` or `list:n1,n2,...`.
pub fn parse_generator(spec: &str) -> Result<LacunarySequence, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str, what: &str| -> Result<u64, CliError> {
        s.trim().parse::<u64>().map_err(|_| {
            CliError::usage(format!(
                "generator {spec:?}: {what} {s:?} is not a positive integer"
            ))
        })
    };
    let seq = match parts.as_slice() {
        ["geometric", a, n] => make_geometric(num(a, "base")?, num(n, "length")? as usize)?,
        ["pairblock", n] => make_pairblock(num(n, "length")? as usize)?,
        ["tripleblock", n] => make_tripleblock(num(n, "length")? as usize)?,
        ["list", items] => {
            let text = items.replace(',', "\n");
            lacmgf_core::seqgen::parse_sequence(&text, "list")?
        }
        _ => {
            return Err(CliError::usage(format!(
                "unknown generator {spec:?}; expected geometric:a:N, pairblock:N, tripleblock:N or list:n1,n2,..."
            )))
        }
    };
    Ok(seq)
}

/// Resolves `--gen` / `--seq` and an optional `--n` prefix length.
pub fn resolve_sequence(
    generator: Option<&str>,
    path: Option<&std::path::Path>,
    n: Option<usize>,
) -> Result<LacunarySequence, CliError> {
    let seq = match (generator, path) {
        (Some(g), None) => parse_generator(g)?,
        (None, Some(p)) => load_sequence(p)?,
        (Some(_), Some(_)) => return Err(CliError::usage("give exactly one of --gen and --seq")),
        (None, None) => {
            return Err(CliError::usage(
                "a sequence is required: pass --gen or --seq",
            ))
        }
    };
    match n {
        Some(n) => Ok(seq.prefix(n)?),
        None => Ok(seq),
    }
}

fn tidy(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// `a:b:step`, inclusive of `b` up to rounding.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || {
        CliError::usage(format!(
            "grid {spec:?} must have the form a:b:step with step > 0 and a <= b"
        ))
    };
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let (a, b, step) = (v[0], v[1], v[2]);
    if !a.is_finite() || !b.is_finite() || a > b || step.is_nan() || step <= 0.0 {
        return Err(bad());
    }
    let count = ((b - a) / step + 1e-9).floor() as usize;
    if count > 10_000_000 {
        return Err(CliError::usage(format!(
            "grid {spec:?} has more than 10^7 points"
        )));
    }
    Ok((0..=count).map(|k| tidy(a + k as f64 * step)).collect())
}

/// An integer, a fraction `a/b`, or a terminating decimal, read exactly.
pub fn parse_rational(text: &str) -> Result<BigRational, CliError> {
    let t = text.trim();
    let bad = || CliError::usage(format!("{text:?} is not a rational number"));
    if let Some((num, den)) = t.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (int, frac) = t.split_once('.').unwrap_or((t, ""));
    if !frac.chars().all(|c| c.is_ascii_digit()) || (int.is_empty() && frac.is_empty()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let mut den = BigInt::one();
    for _ in 0..frac.len() {
        den *= 10;
    }
    Ok(BigRational::new(num, den))
}
