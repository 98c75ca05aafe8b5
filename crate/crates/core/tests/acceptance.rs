//! Acceptance checks, one line per criterion.
//!
//! Run with `cargo test -p lacmgf-core --test acceptance`. A line reads
//! `PASS`, `FAIL`, or `DEVIATION` (a literal expectation that contradicts
//! the defining formula; the formula is checked instead and the difference
//! is printed). The process exits nonzero if any line fails.

mod common;

use std::f64::consts::SQRT_2;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{bessel_i0_long, brute_force_count, s_conditions_by_intervals};
use lacmgf_core::asymptotics::{
    default_fit_grid, empirical_tail, envelope_check, fit_block_limit, fit_series, legendre_rate,
    BlockGenerator, TailEstimate,
};
use lacmgf_core::besselkit::{bessel_i, log_i0_coefficients, BesselSeriesConfig};
use lacmgf_core::blockdio::{
    choose_s, count, decompose, s_conditions, scaling_probe, EquationKind,
};
use lacmgf_core::mgfeval::{
    mgf_diophantine, mgf_quadrature, DiophantineConfig, Method, MgfEstimate, QuadratureConfig,
};
use lacmgf_core::seqgen::{make_geometric, make_pairblock, make_tripleblock, LacunarySequence};

enum Status {
    Pass,
    Fail,
    Deviation,
}

struct Outcome {
    status: Status,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome {
        status: Status::Pass,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        status: Status::Fail,
        detail: detail.into(),
    }
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        pass(detail)
    } else {
        fail(detail)
    }
}

/// Every MGF value seen by the suite, as `(label, λ, log MGF)`.
#[derive(Default)]
struct Jensen {
    seen: Vec<(String, f64, f64)>,
}

impl Jensen {
    fn estimate(&mut self, label: &str, est: &MgfEstimate) {
        self.seen
            .push((label.to_string(), est.lambda, est.log_value));
    }

    /// `Λ = log MGF / N`, so `Λ >= 0` is the same floor.
    fn cumulant(&mut self, label: &str, lambda: f64, value: f64) {
        self.seen.push((label.to_string(), lambda, value));
    }
}

struct Suite {
    failures: usize,
    jensen: Jensen,
}

impl Suite {
    fn run(
        &mut self,
        id: &str,
        title: &str,
        budget: Duration,
        f: impl FnOnce(&mut Jensen) -> Outcome,
    ) {
        let start = Instant::now();
        let mut outcome = f(&mut self.jensen);
        let elapsed = start.elapsed();
        if elapsed > budget && !matches!(outcome.status, Status::Fail) {
            outcome = fail(format!(
                "{}; runtime {:.1}s over budget {:.0}s",
                outcome.detail,
                elapsed.as_secs_f64(),
                budget.as_secs_f64()
            ));
        }
        let tag = match outcome.status {
            Status::Pass => "PASS",
            Status::Fail => {
                self.failures += 1;
                "FAIL"
            }
            Status::Deviation => "DEVIATION",
        };
        println!(
            "[{tag}] {id:>2}. {title}: {} ({:.2}s)",
            outcome.detail,
            elapsed.as_secs_f64()
        );
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn bessel_coefficients() -> Outcome {
    let got = log_i0_coefficients(6).unwrap();
    let want = vec![rat(1, 2), rat(-1, 16), rat(1, 72)];
    let shown: Vec<String> = got.iter().map(|c| c.to_string()).collect();
    verdict(got == want, format!("got {}", shown.join(", ")))
}

fn one_frequency(j: &mut Jensen) -> Outcome {
    let seq = LacunarySequence::from_u64s(&[1], "single").unwrap();
    let cfg = BesselSeriesConfig::default();
    let mut worst: f64 = 0.0;
    for lambda in [0.1, 0.5, 1.0] {
        let est = mgf_quadrature(&seq, lambda, &QuadratureConfig::default()).unwrap();
        j.estimate("single", &est);
        let series = bessel_i(0, SQRT_2 * lambda, &cfg).unwrap();
        let oracle = bessel_i0_long(SQRT_2 * lambda);
        worst = worst
            .max((est.value - series).abs())
            .max((est.value - oracle).abs());
    }
    verdict(
        worst <= 1e-12,
        format!("max deviation {worst:.2e} (tol 1e-12)"),
    )
}

fn random_lacunary(rng: &mut ChaCha8Rng) -> Vec<u64> {
    loop {
        let n = rng.gen_range(1..=10);
        let mut terms = vec![rng.gen_range(1..=9u64)];
        while terms.len() < n {
            let prev = *terms.last().unwrap();
            let r: f64 = rng.gen_range(1.15..2.6);
            terms.push(((prev as f64 * r).ceil() as u64).max(prev + 1));
        }
        if *terms.last().unwrap() <= 2048 {
            return terms;
        }
    }
}

fn cross_method(j: &mut Jensen) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1acc_0a11);
    let mut worst: f64 = 0.0;
    let mut at = String::new();
    for i in 0..50 {
        let terms = random_lacunary(&mut rng);
        let seq = LacunarySequence::from_u64s(&terms, format!("random{i}")).unwrap();
        for lambda in [-1.0, -0.3, 0.3, 1.0] {
            let q = mgf_quadrature(&seq, lambda, &QuadratureConfig::default()).unwrap();
            let d = mgf_diophantine(&seq, lambda, &DiophantineConfig::default()).unwrap();
            j.estimate(seq.label(), &q);
            j.estimate(seq.label(), &d);
            let diff = (q.log_value - d.log_value).abs();
            if diff > worst {
                worst = diff;
                at = format!("{terms:?} at lambda {lambda}");
            }
        }
    }
    verdict(
        worst <= 1e-9,
        format!("50 sequences, max |log difference| {worst:.2e} (tol 1e-9) for {at}"),
    )
}

fn fit_line(c2: f64, c3: f64, c4: f64) -> String {
    format!("c2 = {c2:.6}, c3 = {c3:.6}, c4 = {c4:.6}")
}

fn pair_fit(j: &mut Jensen) -> Outcome {
    let fit = fit_block_limit(BlockGenerator::Pair, &default_fit_grid()).unwrap();
    for (l, v) in fit.lambda_grid.iter().zip(&fit.values) {
        j.cumulant("pair", *l, *v);
    }
    let ok = (fit.c2 - 0.5).abs() <= 2e-3
        && (fit.c3 - 1.0 / (4.0 * SQRT_2)).abs() <= 2e-3
        && (fit.c4 + 1.0 / 16.0).abs() <= 5e-3;
    verdict(ok, fit_line(fit.c2, fit.c3, fit.c4))
}

fn triple_fit(j: &mut Jensen) -> Outcome {
    let fit = fit_block_limit(BlockGenerator::Triple, &default_fit_grid()).unwrap();
    for (l, v) in fit.lambda_grid.iter().zip(&fit.values) {
        j.cumulant("triple", *l, *v);
    }
    let ok = (fit.c3 - 1.0 / (2.0 * SQRT_2)).abs() <= 2e-3 && (fit.c4 - 7.0 / 144.0).abs() <= 5e-3;
    verdict(ok, fit_line(fit.c2, fit.c3, fit.c4))
}

fn superlacunary_fit(j: &mut Jensen) -> Outcome {
    let mut terms = vec![1u64];
    for _ in 1..6 {
        terms.push(terms.last().unwrap() * 101 + 7);
    }
    let seq = LacunarySequence::from_u64s(&terms, "superlacunary").unwrap();
    let method = Method::Diophantine(DiophantineConfig::default());
    let fit = fit_series(&seq, 6, &default_fit_grid(), &method).unwrap();
    for (l, v) in fit.lambda_grid.iter().zip(&fit.values) {
        j.cumulant("superlacunary", *l, *v);
    }
    let ok = fit.c3.abs() <= 2e-3 && (fit.c4 + 1.0 / 16.0).abs() <= 5e-3;
    verdict(ok, fit_line(fit.c2, fit.c3, fit.c4))
}

const ENVELOPE_CEILING: f64 = 2.0;

fn envelope(j: &mut Jensen) -> Outcome {
    let coarse = default_fit_grid();
    let fine: Vec<f64> = (2..=10)
        .flat_map(|k| [-0.025 * k as f64, 0.025 * k as f64])
        .collect();
    let cases = [
        (make_geometric(2, 16).unwrap(), Method::default()),
        (
            make_geometric(3, 16).unwrap(),
            Method::Diophantine(DiophantineConfig::default()),
        ),
        (
            make_pairblock(16).unwrap(),
            Method::Diophantine(DiophantineConfig::default()),
        ),
        (
            make_tripleblock(16).unwrap(),
            Method::Diophantine(DiophantineConfig::default()),
        ),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (seq, method) in &cases {
        let a = envelope_check(seq, 16, &coarse, method).unwrap();
        let b = envelope_check(seq, 16, &fine, method).unwrap();
        for &(l, v) in a.samples.iter().chain(&b.samples) {
            j.cumulant(seq.label(), l, v);
        }
        let drift = (b.ratio - a.ratio).abs() / a.ratio;
        ok &= a.ratio.is_finite() && a.ratio <= ENVELOPE_CEILING && drift <= 0.05;
        parts.push(format!(
            "{} r = {:.4} (refined {:.4})",
            seq.label(),
            a.ratio,
            b.ratio
        ));
    }
    verdict(
        ok,
        format!(
            "{}; ceiling {ENVELOPE_CEILING}, drift tol 5%",
            parts.join(", ")
        ),
    )
}

fn counting() -> Outcome {
    let seq = make_geometric(2, 260).unwrap();
    let three = scaling_probe(&seq, EquationKind::ThreeTerm, &[8, 16, 32, 64, 128]).unwrap();
    let four = scaling_probe(&seq, EquationKind::FourTermPpmm, &[8, 16, 32, 64]).unwrap();
    let ratios = |rows: &[lacmgf_core::blockdio::ProbeRow]| -> Vec<f64> {
        rows.windows(2)
            .map(|w| w[1].max_count as f64 / w[0].max_count as f64)
            .collect()
    };
    let r3 = ratios(&three);
    let r4 = ratios(&four);
    let mut ok = r3.iter().all(|&r| r <= 2.2) && r4.iter().all(|&r| r <= 4.4);

    let mut checked = 0;
    let mut mismatches = 0;
    let sequences = [
        make_geometric(2, 40).unwrap(),
        make_geometric(3, 30).unwrap(),
        make_tripleblock(9).unwrap(),
        LacunarySequence::from_u64s(
            &[1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987],
            "fib",
        )
        .unwrap(),
    ];
    for seq in &sequences {
        let s = choose_s(seq.q_certified()).unwrap() as usize;
        let values: Vec<i64> = seq.terms_u64().unwrap().iter().map(|&v| v as i64).collect();
        for l in (s + 1)..=10 {
            if seq.len() < l + 1 {
                continue;
            }
            let dec = decompose(seq.len(), l, s).unwrap();
            for block in dec.ordered_blocks() {
                let t = &seq.terms()[block.first - 1];
                let slice = &values[block.first - 1..block.last];
                for kind in [
                    EquationKind::TwoTerm,
                    EquationKind::ThreeTerm,
                    EquationKind::FourTermPpmm,
                    EquationKind::FourTermPppm,
                ] {
                    let got = count(seq, &block, t, kind).unwrap().count;
                    let tv: i64 = t.try_into().unwrap();
                    if got != brute_force_count(slice, tv, kind) {
                        mismatches += 1;
                    }
                    checked += 1;
                }
            }
        }
    }
    ok &= mismatches == 0;
    let fmt = |r: &[f64]| {
        r.iter()
            .map(|x| format!("{x:.3}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    verdict(
        ok,
        format!(
            "three-term ratios [{}] (tol 2.2), ppmm ratios [{}] (tol 4.4), {checked} block counts vs brute force, {mismatches} mismatches",
            fmt(&r3),
            fmt(&r4)
        ),
    )
}

fn choose_s_exact() -> Outcome {
    let int = |n: i64| rat(n, 1);
    let s2 = choose_s(&int(2)).unwrap();
    let s4 = choose_s(&int(4)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut ok = s2 == 4;
    for _ in 0..20 {
        let den: i64 = rng.gen_range(1..=1000);
        let num: i64 = rng.gen_range(den + 1..=10 * den);
        let q = rat(num, den);
        let s = choose_s(&q).unwrap();
        let at = s_conditions_by_intervals(&q, s);
        let below = if s > 1 {
            s_conditions_by_intervals(&q, s - 1)
        } else {
            (false, false)
        };
        ok &= at == (true, true) && !(below.0 && below.1) && s_conditions(&q, s) == at;
    }
    // The s = 1 conditions for q = 4 read 4 > 2 and 1 + 4/4 <= 2, the
    // second holding with equality, so the smallest s is 1.
    let four_at_one = s_conditions_by_intervals(&int(4), 1);
    let detail = format!(
        "choose_s(2) = {s2}, choose_s(4) = {s4}, 20 random q in (1, 10] minimal in exact arithmetic"
    );
    if !ok || s4 != 1 || four_at_one != (true, true) {
        return fail(detail);
    }
    Outcome {
        status: Status::Deviation,
        detail: format!(
            "{detail}; expected value 2 for q = 4 contradicts the defining inequalities, which hold at s = 1 (1 + 4/4 = sqrt(4))"
        ),
    }
}

fn legendre_fixed_point() -> Outcome {
    let samples: Vec<(f64, f64)> = (-1000..=1000)
        .map(|i| {
            let l = i as f64 * 1e-3;
            (l, 0.5 * l * l)
        })
        .collect();
    let mut worst: f64 = 0.0;
    for i in -40..=40 {
        let t = i as f64 * 0.01;
        let r = legendre_rate(&samples, t).unwrap();
        worst = worst.max((r.rate - 0.5 * t * t).abs());
    }
    verdict(
        worst <= 2e-3,
        format!("max |rate - t^2/2| {worst:.2e} on t in [-0.4, 0.4] (tol 2e-3)"),
    )
}

fn mdp_probe() -> Outcome {
    let grid = 1u64 << 24;
    let tail = |n: usize, scale: f64, t: f64| -> TailEstimate {
        let seq = make_geometric(2, n).unwrap();
        empirical_tail(&seq, n, scale, t, grid).unwrap()
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for t in [0.3, 0.5] {
        let a = tail(18, 0.35, t);
        let b = tail(20, 0.30, t);
        let da = (a.mdp_normalized - a.gaussian_target).abs();
        let db = (b.mdp_normalized - b.gaussian_target).abs();
        ok &= !a.flagged && da <= 0.35 && db < da;
        parts.push(format!(
            "t = {t}: discrepancy {da:.4} at (18, 0.35), {db:.4} at (20, 0.30)"
        ));
    }
    verdict(ok, format!("{} (tol 0.35, must shrink)", parts.join("; ")))
}

fn main() {
    let mut suite = Suite {
        failures: 0,
        jensen: Jensen::default(),
    };
    suite.run("1", "log I0 coefficients", secs(1), |_| {
        bessel_coefficients()
    });
    suite.run("2", "one-frequency identity", secs(1), one_frequency);
    suite.run("3", "quadrature vs Diophantine", secs(120), cross_method);
    suite.run("4", "pair-block coefficients", secs(10), pair_fit);
    suite.run("5", "triple-block coefficients", secs(10), triple_fit);
    suite.run(
        "6",
        "superlacunary coefficients",
        secs(60),
        superlacunary_fit,
    );
    suite.run("7", "cubic envelope", secs(300), envelope);
    suite.run("8", "counting bounds", secs(120), |_| counting());
    suite.run("9", "choose_s exactness", secs(1), |_| choose_s_exact());
    suite.run("10", "Legendre fixed point", secs(1), |_| {
        legendre_fixed_point()
    });
    suite.run("11", "moderate-deviation probe", secs(600), |_| mdp_probe());

    let seen = std::mem::take(&mut suite.jensen.seen);
    suite.run("12", "Jensen floor", secs(1), |_| {
        let bad: Vec<_> = seen
            .iter()
            .filter(|(_, _, v)| v.is_nan() || *v < 0.0)
            .collect();
        let detail = format!("{} evaluations, {} below MGF = 1", seen.len(), bad.len());
        match bad.first() {
            None => pass(detail),
            Some((label, l, v)) => {
                fail(format!("{detail}; first {label} at lambda {l}: log {v:e}"))
            }
        }
    });

    if suite.failures > 0 {
        println!("{} criteria failed", suite.failures);
        std::process::exit(1);
    }
    println!("all criteria met");
}
