use num_bigint::BigUint;
use serde::Serialize;

use lacmgf_core::asymptotics::{
    block_limit_lambda, default_fit_grid, empirical_tail, envelope_check, fit_block_limit,
    fit_series, legendre_rate, BlockGenerator, LegendreRate,
};
use lacmgf_core::besselkit::log_i0_coefficients;
use lacmgf_core::blockdio::{
    choose_l, choose_s, count, count_two_term, decompose, log_log_slopes, scaling_probe, Block,
    BlockDecomposition, EquationKind, SolutionCount, WorkingAssumptions,
};
use lacmgf_core::mgfeval::{lambda_n, mgf, DiophantineConfig, Method, QuadratureConfig};
use lacmgf_core::LacunarySequence;

use crate::input::{parse_grid, parse_rational, resolve_sequence};
use crate::output::{emit, float, json, Csv, Format};
use crate::{
    BlockChoice, Cli, CliError, Command, KindChoice, LambdaArgs, MethodArgs, MethodChoice, OutArgs,
    SeqArgs, TArgs,
};

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::usage(format!("cannot start worker pool: {e}")))?;
    }
    match cli.command {
        Command::Seq { seq, out } => cmd_seq(&seq, &out),
        Command::Mgf {
            seq,
            lambda,
            method,
            out,
        } => cmd_mgf(&seq, &lambda, &method, &out),
        Command::Blocks {
            n,
            q,
            generator,
            seq,
            lambda,
            out,
        } => cmd_blocks(
            n,
            q.as_deref(),
            generator.as_deref(),
            seq.as_deref(),
            lambda,
            &out,
        ),
        Command::Count {
            seq,
            kind,
            block,
            threshold,
            l,
            include_diagonal,
            out,
        } => cmd_count(
            &seq,
            kind,
            block.as_deref(),
            threshold.as_deref(),
            l,
            include_diagonal,
            &out,
        ),
        Command::Probe {
            seq,
            kind,
            l_values,
            out,
        } => cmd_probe(&seq, kind, &l_values, &out),
        Command::BesselCoeffs { order, out } => cmd_bessel_coeffs(order, &out),
        Command::Fit {
            seq,
            block,
            lambda_grid,
            method,
            out,
        } => cmd_fit(&seq, block, lambda_grid.as_deref(), &method, &out),
        Command::Envelope {
            seq,
            lambda_grid,
            method,
            out,
        } => cmd_envelope(&seq, lambda_grid.as_deref(), &method, &out),
        Command::Rate {
            seq,
            block,
            gaussian,
            lambda_grid,
            t,
            method,
            out,
        } => cmd_rate(
            &seq,
            block,
            gaussian,
            lambda_grid.as_deref(),
            &t,
            &method,
            &out,
        ),
        Command::Tail {
            seq,
            lambda_scale,
            t,
            grid_points,
            out,
        } => cmd_tail(&seq, lambda_scale, &t, grid_points, &out),
    }
}

fn sequence(args: &SeqArgs) -> Result<LacunarySequence, CliError> {
    resolve_sequence(args.generator.as_deref(), args.seq.as_deref(), args.n)
}

fn has_sequence(args: &SeqArgs) -> bool {
    args.generator.is_some() || args.seq.is_some()
}

fn quadrature_config(oversample: Option<u32>) -> Result<QuadratureConfig, CliError> {
    let mut cfg = QuadratureConfig::default();
    if let Some(o) = oversample {
        cfg.oversample = o;
    }
    if let Ok(text) = std::env::var("LACMGF_MAX_GRID") {
        cfg.max_grid = text.trim().parse().map_err(|_| {
            CliError::usage(format!(
                "LACMGF_MAX_GRID = {text:?} is not a positive integer"
            ))
        })?;
    }
    Ok(cfg)
}

fn diophantine_config(m_max: Option<u32>) -> DiophantineConfig {
    DiophantineConfig {
        m_max,
        ..Default::default()
    }
}

fn methods(args: &MethodArgs, allow_both: bool) -> Result<Vec<Method>, CliError> {
    let quadrature = quadrature_config(args.oversample)?;
    let diophantine = diophantine_config(args.m_max);
    Ok(match args.method {
        MethodChoice::Auto => vec![Method::Auto {
            quadrature,
            diophantine,
        }],
        MethodChoice::Quad => vec![Method::Quadrature(quadrature)],
        MethodChoice::Dio => vec![Method::Diophantine(diophantine)],
        MethodChoice::Both if allow_both => {
            vec![
                Method::Quadrature(quadrature),
                Method::Diophantine(diophantine),
            ]
        }
        MethodChoice::Both => {
            return Err(CliError::usage("--method both is only available for mgf"))
        }
    })
}

fn single_method(args: &MethodArgs) -> Result<Method, CliError> {
    Ok(methods(args, false)?.remove(0))
}

fn lambdas(args: &LambdaArgs) -> Result<Vec<f64>, CliError> {
    match (args.lambda, args.lambda_grid.as_deref()) {
        (Some(l), None) => Ok(vec![l]),
        (None, Some(g)) => parse_grid(g),
        _ => Err(CliError::usage(
            "give exactly one of --lambda and --lambda-grid",
        )),
    }
}

fn thresholds(args: &TArgs) -> Result<Vec<f64>, CliError> {
    match (args.t, args.t_grid.as_deref()) {
        (Some(t), None) => Ok(vec![t]),
        (None, Some(g)) => parse_grid(g),
        _ => Err(CliError::usage("give exactly one of --t and --t-grid")),
    }
}

/// Grid for fitting or envelope checks, without the point 0.
fn nonzero_grid(spec: Option<&str>) -> Result<Vec<f64>, CliError> {
    match spec {
        None => Ok(default_fit_grid()),
        Some(g) => Ok(parse_grid(g)?.into_iter().filter(|&l| l != 0.0).collect()),
    }
}

fn format_or(out: &OutArgs, default: Format) -> Format {
    out.format.unwrap_or(default)
}

fn generator(choice: BlockChoice) -> BlockGenerator {
    match choice {
        BlockChoice::Pair => BlockGenerator::Pair,
        BlockChoice::Triple => BlockGenerator::Triple,
    }
}

fn kind(choice: KindChoice) -> EquationKind {
    match choice {
        KindChoice::TwoTerm => EquationKind::TwoTerm,
        KindChoice::ThreeTerm => EquationKind::ThreeTerm,
        KindChoice::FourTermPpmm => EquationKind::FourTermPpmm,
        KindChoice::FourTermPppm => EquationKind::FourTermPppm,
    }
}

#[derive(Serialize)]
struct SeqOut {
    label: String,
    #[serde(rename = "N")]
    n: usize,
    q_certified: String,
    terms: Vec<String>,
}

fn cmd_seq(args: &SeqArgs, out: &OutArgs) -> Result<(), CliError> {
    let seq = sequence(args)?;
    let text = match format_or(out, Format::Json) {
        Format::Json => json(&SeqOut {
            label: seq.label().to_string(),
            n: seq.len(),
            q_certified: seq.q_certified().to_string(),
            terms: seq.terms().iter().map(|t| t.to_string()).collect(),
        })?,
        Format::Csv => {
            let mut csv = Csv::new(&["k", "n_k"]);
            for (k, t) in seq.terms().iter().enumerate() {
                csv.row([(k + 1).to_string(), t.to_string()]);
            }
            csv.finish()
        }
    };
    emit(&text, out.out.as_ref())
}

fn cmd_mgf(
    seq: &SeqArgs,
    lambda: &LambdaArgs,
    method: &MethodArgs,
    out: &OutArgs,
) -> Result<(), CliError> {
    let seq = sequence(seq)?;
    let grid = lambdas(lambda)?;
    let methods = methods(method, true)?;
    let mut estimates = Vec::new();
    for &l in &grid {
        for m in &methods {
            estimates.push(mgf(&seq, l, m)?);
        }
    }
    let text = match format_or(out, Format::Json) {
        Format::Json => json(&estimates)?,
        Format::Csv => {
            let mut csv = Csv::new(&["lambda", "method", "value", "log_value", "error_bound"]);
            for e in &estimates {
                let method = match e.method {
                    lacmgf_core::mgfeval::MethodKind::Quadrature => "quadrature",
                    lacmgf_core::mgfeval::MethodKind::Diophantine => "diophantine",
                };
                csv.row([
                    float(e.lambda),
                    method.to_string(),
                    float(e.value),
                    float(e.log_value),
                    float(e.error_bound),
                ]);
            }
            csv.finish()
        }
    };
    emit(&text, out.out.as_ref())
}

#[derive(Serialize)]
struct BlocksOut {
    q: String,
    s: u32,
    #[serde(rename = "L")]
    l: usize,
    lambda: f64,
    working_assumptions: WorkingAssumptions,
    decomposition: BlockDecomposition,
}

fn cmd_blocks(
    n: Option<usize>,
    q: Option<&str>,
    generator: Option<&str>,
    path: Option<&std::path::Path>,
    lambda: f64,
    out: &OutArgs,
) -> Result<(), CliError> {
    let (q, seq_len) = match (q, generator.is_some() || path.is_some()) {
        (Some(q), false) => (parse_rational(q)?, None),
        (None, true) => {
            let seq = resolve_sequence(generator, path, n)?;
            (seq.q_certified().clone(), Some(seq.len()))
        }
        (Some(_), true) => return Err(CliError::usage("give either --q or a sequence, not both")),
        (None, false) => return Err(CliError::usage("give --q or a sequence via --gen/--seq")),
    };
    let n = n
        .or(seq_len)
        .ok_or_else(|| CliError::usage("--n is required with --q"))?;
    let s = choose_s(&q)?;
    let l = choose_l(lambda)?;
    let need = l + s as usize;
    if n < need {
        return Err(CliError::infeasible(format!(
            "N = {n} violates N >= L+s = {need} (L = {l}, s = {s}): at least one long and one short block are required"
        )));
    }
    let dec = decompose(n, l, s as usize)?;
    let text = match format_or(out, Format::Json) {
        Format::Json => json(&BlocksOut {
            q: q.to_string(),
            s,
            l,
            lambda,
            working_assumptions: WorkingAssumptions::check(s as usize, l, lambda),
            decomposition: dec,
        })?,
        Format::Csv => {
            let mut csv = Csv::new(&["kind", "index", "first", "last"]);
            for (name, blocks) in [("long", &dec.long_blocks), ("short", &dec.short_blocks)] {
                for b in blocks {
                    csv.row([
                        name.to_string(),
                        b.index.to_string(),
                        b.first.to_string(),
                        b.last.to_string(),
                    ]);
                }
            }
            csv.finish()
        }
    };
    emit(&text, out.out.as_ref())
}

#[derive(Serialize)]
struct CountOut {
    sequence: String,
    kind: EquationKind,
    counts: Vec<SolutionCount>,
}

fn parse_block(spec: &str) -> Result<Block, CliError> {
    let bad = || CliError::usage(format!("block {spec:?} must have the form first:last"));
    let (a, b) = spec.split_once(':').ok_or_else(bad)?;
    let first: usize = a.trim().parse().map_err(|_| bad())?;
    let last: usize = b.trim().parse().map_err(|_| bad())?;
    if first == 0 || last < first {
        return Err(bad());
    }
    Ok(Block::new(1, first, last))
}

fn cmd_count(
    args: &SeqArgs,
    choice: KindChoice,
    block: Option<&str>,
    threshold: Option<&str>,
    l: Option<usize>,
    include_diagonal: bool,
    out: &OutArgs,
) -> Result<(), CliError> {
    let seq = sequence(args)?;
    let kind = kind(choice);
    let count_one = |b: &Block, t: &BigUint| -> Result<SolutionCount, CliError> {
        Ok(match kind {
            EquationKind::TwoTerm => count_two_term(&seq, b, t, !include_diagonal)?,
            _ => count(&seq, b, t, kind)?,
        })
    };
    let counts = match (block, l) {
        (Some(spec), None) => {
            let b = parse_block(spec)?;
            if b.last > seq.len() {
                return Err(CliError::usage(format!(
                    "block {spec} exceeds N = {}",
                    seq.len()
                )));
            }
            let t = match threshold {
                Some(t) => t.trim().parse::<BigUint>().map_err(|_| {
                    CliError::usage(format!("threshold {t:?} is not a nonnegative integer"))
                })?,
                None => seq.terms()[b.first - 1].clone(),
            };
            vec![count_one(&b, &t)?]
        }
        (None, Some(l)) => {
            if threshold.is_some() {
                return Err(CliError::usage("--threshold applies only with --block"));
            }
            let s = choose_s(seq.q_certified())? as usize;
            let dec = decompose(seq.len(), l, s)?;
            dec.long_blocks
                .iter()
                .map(|b| count_one(b, &seq.terms()[b.first - 1]))
                .collect::<Result<Vec<_>, _>>()?
        }
        _ => return Err(CliError::usage("give exactly one of --block and --l")),
    };
    let text = match format_or(out, Format::Json) {
        Format::Json => json(&CountOut {
            sequence: seq.label().to_string(),
            kind,
            counts,
        })?,
        Format::Csv => {
            let mut csv = Csv::new(&["kind", "block", "threshold", "count", "L"]);
            for c in &counts {
                csv.row([
                    c.equation_kind.name().to_string(),
                    c.block_index.to_string(),
                    c.threshold.to_string(),
                    c.count.to_string(),
                    c.l.to_string(),
                ]);
            }
            csv.finish()
        }
    };
    emit(&text, out.out.as_ref())
}

#[derive(Serialize)]
struct ProbeOut {
    sequence: String,
    kind: EquationKind,
    s: u32,
    rows: Vec<lacmgf_core::blockdio::ProbeRow>,
    slopes: Vec<Option<f64>>,
}

fn cmd_probe(
    args: &SeqArgs,
    choice: KindChoice,
    l_values: &[usize],
    out: &OutArgs,
) -> Result<(), CliError> {
    let seq = sequence(args)?;
    let kind = kind(choice);
    let rows = scaling_probe(&seq, kind, l_values)?;
    let text = match format_or(out, Format::Json) {
        Format::Json => json(&ProbeOut {
            sequence: seq.label().to_string(),
            kind,
            s: choose_s(seq.q_certified())?,
            slopes: log_log_slopes(&rows),
            rows,
        })?,
        Format::Csv => {
            let mut csv = Csv::new(&["L", "blocks", "max_count"]);
            for r in &rows {
                csv.row([
                    r.l.to_string(),
                    r.blocks.to_string(),
                    r.max_count.to_string(),
                ]);
            }
            csv.finish()
        }
    };
    emit(&text, out.out.as_ref())
}

#[derive(Serialize)]
struct CoeffsOut {
    order: u32,
    coefficients: Vec<String>,
}

fn cmd_bessel_coeffs(order: u32, out: &OutArgs) -> Result<(), CliError> {
    let coeffs: Vec<String> = log_i0_coefficients(order)?
        .iter()
        .map(|c| c.to_string())
        .collect();
    let text = match format_or(out, Format::Csv) {
        Format::Json => json(&CoeffsOut {
            order,
            coefficients: coeffs,
        })?,
        Format::Csv => format!("{}\n", coeffs.join(",")),
    };
    emit(&text, out.out.as_ref())
}

fn samples_csv(grid: &[f64], values: &[f64]) -> String {
    let mut csv = Csv::new(&["lambda", "lambda_n"]);
    for (l, v) in grid.iter().zip(values) {
        csv.row([float(*l), float(*v)]);
    }
    csv.finish()
}

fn cmd_fit(
    args: &SeqArgs,
    block: Option<BlockChoice>,
    grid: Option<&str>,
    method: &MethodArgs,
    out: &OutArgs,
) -> Result<(), CliError> {
    let grid = nonzero_grid(grid)?;
    let fit = match (block, has_sequence(args)) {
        (Some(b), false) => fit_block_limit(generator(b), &grid)?,
        (None, true) => {
            let seq = sequence(args)?;
            fit_series(&seq, seq.len(), &grid, &single_method(method)?)?
        }
        _ => {
            return Err(CliError::usage(
                "give exactly one of --block and a sequence",
            ))
        }
    };
    let text = match format_or(out, Format::Json) {
        Format::Json => json(&fit)?,
        Format::Csv => samples_csv(&fit.lambda_grid, &fit.values),
    };
    emit(&text, out.out.as_ref())
}

fn cmd_envelope(
    args: &SeqArgs,
    grid: Option<&str>,
    method: &MethodArgs,
    out: &OutArgs,
) -> Result<(), CliError> {
    let grid = nonzero_grid(grid)?;
    let seq = sequence(args)?;
    let check = envelope_check(&seq, seq.len(), &grid, &single_method(method)?)?;
    let text = match format_or(out, Format::Json) {
        Format::Json => json(&check)?,
        Format::Csv => {
            let mut csv = Csv::new(&["lambda", "lambda_n", "ratio"]);
            for &(l, v) in &check.samples {
                csv.row([
                    float(l),
                    float(v),
                    float((v - 0.5 * l * l).abs() / l.abs().powi(3)),
                ]);
            }
            csv.finish()
        }
    };
    emit(&text, out.out.as_ref())
}

#[derive(Serialize)]
struct RateOut {
    source: String,
    lambda_grid_points: usize,
    rates: Vec<LegendreRate>,
}

fn cmd_rate(
    args: &SeqArgs,
    block: Option<BlockChoice>,
    gaussian: bool,
    grid: Option<&str>,
    t: &TArgs,
    method: &MethodArgs,
    out: &OutArgs,
) -> Result<(), CliError> {
    let grid = match grid {
        Some(g) => parse_grid(g)?,
        None => parse_grid("-1:1:0.01")?,
    };
    let ts = thresholds(t)?;
    let sources = gaussian as u8 + block.is_some() as u8 + has_sequence(args) as u8;
    if sources != 1 {
        return Err(CliError::usage(
            "give exactly one of --gaussian, --block and a sequence",
        ));
    }
    let (source, samples) = if gaussian {
        (
            "gaussian".to_string(),
            grid.iter().map(|&l| (l, 0.5 * l * l)).collect::<Vec<_>>(),
        )
    } else if let Some(b) = block {
        let g = generator(b);
        let samples = grid
            .iter()
            .map(|&l| block_limit_lambda(g, l).map(|v| (l, v)))
            .collect::<Result<Vec<_>, _>>()?;
        (g.label().to_string(), samples)
    } else {
        let seq = sequence(args)?;
        let m = single_method(method)?;
        let samples = grid
            .iter()
            .map(|&l| lambda_n(&seq, l, &m).map(|c| (l, c.value)))
            .collect::<Result<Vec<_>, _>>()?;
        (seq.label().to_string(), samples)
    };
    let rates = ts
        .iter()
        .map(|&t| legendre_rate(&samples, t))
        .collect::<Result<Vec<_>, _>>()?;
    let text = match format_or(out, Format::Json) {
        Format::Json => json(&RateOut {
            source,
            lambda_grid_points: samples.len(),
            rates,
        })?,
        Format::Csv => {
            let mut csv = Csv::new(&["t", "rate"]);
            for r in &rates {
                csv.row([float(r.t), float(r.rate)]);
            }
            csv.finish()
        }
    };
    emit(&text, out.out.as_ref())
}

fn cmd_tail(
    args: &SeqArgs,
    lambda_scale: f64,
    t: &TArgs,
    grid_points: Option<u64>,
    out: &OutArgs,
) -> Result<(), CliError> {
    let seq = sequence(args)?;
    let ts = thresholds(t)?;
    let grid_points = match grid_points {
        Some(g) => g,
        None => {
            let top = seq
                .terms_u64()
                .and_then(|t| t.last().copied())
                .and_then(|n| n.checked_mul(10))
                .ok_or_else(|| {
                    CliError::infeasible(format!(
                        "n_N = {} is too large for tail sampling",
                        seq.max_term()
                    ))
                })?;
            top.next_power_of_two()
        }
    };
    let estimates = ts
        .iter()
        .map(|&t| empirical_tail(&seq, seq.len(), lambda_scale, t, grid_points))
        .collect::<Result<Vec<_>, _>>()?;
    let text = match format_or(out, Format::Json) {
        Format::Json => json(&estimates)?,
        Format::Csv => {
            let mut csv = Csv::new(&["t", "measure", "mdp_normalized", "gaussian_target"]);
            for e in &estimates {
                csv.row([
                    float(e.t),
                    float(e.measure),
                    float(e.mdp_normalized),
                    float(e.gaussian_target),
                ]);
            }
            csv.finish()
        }
    };
    emit(&text, out.out.as_ref())
}
