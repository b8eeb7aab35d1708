//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Runs without the libtest harness so the report is printed whether or not
//! output capture is enabled.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use qfp_core::bounds::{
    forster_bound, linial_bound, margin_upper_bound, maximize_margin_heuristic, repetition_lower_bound,
    HeuristicConfig, GROTHENDIECK_KG,
};
use qfp_core::compiler::{assemble_shared_randomness_states, classical_projection_protocol, compile_smp, ThresholdRule};
use qfp_core::embeddings::{embed_to_realization, realization_to_embedding, verify_realization, verify_threshold_embedding};
use qfp_core::problems::{
    eq_matrix, eq_parity_protocol, ham_matrix, ham_parity_embedding, ham_parity_gap, ip_matrix, ParitySource,
};
use qfp_core::projections::{jl_dimension, project_vectors, verify_distortion};
use qfp_core::rng::Rng;
use qfp_core::sim::{run_protocol, sample_swap_tests, swap_test_prob, FingerprintProtocol};
use qfp_core::{RealVector, Seed, SignMatrix, ThresholdEmbedding};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn random_unit(rng: &mut Rng, dim: usize) -> RealVector {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return RealVector::new(v.iter().map(|x| x / norm).collect()).unwrap();
        }
    }
}

fn dot(a: &RealVector, b: &RealVector) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum()
}

/// Random unit vectors, labelled by a random cut on the squared inner product.
/// About one pair in ten is left outside the promise.
fn random_embedding(rng: &mut Rng) -> (ThresholdEmbedding, SignMatrix) {
    loop {
        let rows = rng.random_range(1..=8);
        let cols = rng.random_range(1..=8);
        let dim = rng.random_range(1..=8);
        let alphas: Vec<RealVector> = (0..rows).map(|_| random_unit(rng, dim)).collect();
        let betas: Vec<RealVector> = (0..cols).map(|_| random_unit(rng, dim)).collect();
        let cut = rng.random_range(0.05..0.6);
        let (mut d0, mut d1) = (0.0f64, 1.0f64);
        let mut entries = Vec::with_capacity(rows * cols);
        for a in &alphas {
            for b in &betas {
                let sq = dot(a, b).powi(2);
                entries.push(if rng.random_bool(0.1) {
                    0
                } else if sq >= cut {
                    d1 = d1.min(sq);
                    -1
                } else {
                    d0 = d0.max(sq);
                    1
                });
            }
        }
        let Ok(m) = SignMatrix::new(rows, cols, entries) else { continue };
        if d1 - d0 < 1e-3 {
            continue;
        }
        return (ThresholdEmbedding::new(alphas, betas, d0, d1).unwrap(), m);
    }
}

fn c1_forster_ip() -> Outcome {
    let mut worst = 0.0f64;
    for k in 1..=4u32 {
        let f = forster_bound(&ip_matrix(k).unwrap()).unwrap();
        worst = worst.max((f - 2f64.powf(-(k as f64) / 2.0)).abs());
    }
    outcome(worst <= 1e-6, format!("max |forster - 2^(-k/2)| = {worst:.2e}"))
}

fn c2_repetition_blowup() -> Outcome {
    let mut ok = true;
    let mut values = Vec::new();
    for k in 1..=4u32 {
        let r = repetition_lower_bound(forster_bound(&ip_matrix(k).unwrap()).unwrap()).unwrap();
        let want = 2f64.powi(k as i32);
        ok &= r.round() == want && ((r - want) / want).abs() <= 1e-12;
        values.push(r);
    }
    outcome(ok, format!("1/forster^2 = {values:?}"))
}

fn c3_round_trips() -> Outcome {
    let mut rng = Seed(2024).rng();
    let mut worst_margin = 0.0f64;
    let mut worst_gap = 0.0f64;
    let mut ok = true;
    for _ in 0..50 {
        let (e, m) = random_embedding(&mut rng);
        let (d0, d1) = (e.delta0(), e.delta1());
        let r = embed_to_realization(&e).unwrap();
        let rep = verify_realization(&r, &m).unwrap();
        ok &= rep.valid;
        worst_margin = worst_margin.max((r.gamma() - (d1 - d0) / (2.0 + d1 + d0)).abs());
        let back = realization_to_embedding(&r).unwrap();
        ok &= verify_threshold_embedding(&back, &m).unwrap().valid;
        worst_gap = worst_gap.max((back.delta1() - back.delta0() - r.gamma()).abs());
    }
    ok &= worst_margin <= 1e-12 && worst_gap <= 1e-12;
    outcome(ok, format!("margin err {worst_margin:.1e}, gap err {worst_gap:.1e}"))
}

fn c4_eq_pipeline() -> Outcome {
    let m = eq_matrix(4).unwrap();
    let v = compile_smp(&eq_parity_protocol(4).unwrap()).unwrap();
    let e = assemble_shared_randomness_states(&v, &m, ThresholdRule::Exact).unwrap();
    let exact = e.delta0() == 1.0 / 16.0 && e.delta1() == 0.25;
    let p = FingerprintProtocol::for_error(e, 1.0 / 3.0).unwrap();
    let run = run_protocol(&p, &m, 200, Seed(0)).unwrap();
    let limit = 1.0 / 3.0 + 3.0 * ((1.0 / 3.0) * (2.0 / 3.0) / 200.0f64).sqrt();
    outcome(
        exact && run.max_error <= limit,
        format!(
            "delta=({}, {}), r={}, max error {:.4} <= {:.4}",
            p.embedding().delta0(),
            p.embedding().delta1(),
            p.repetitions(),
            run.max_error,
            limit
        ),
    )
}

fn c5_eq_witness() -> Outcome {
    let m = eq_matrix(3).unwrap();
    let r = maximize_margin_heuristic(&m, 9, Seed(0), &HeuristicConfig::default()).unwrap();
    let upper = margin_upper_bound(&m).unwrap();
    let valid = verify_realization(&r, &m).unwrap().valid;
    outcome(
        valid && r.gamma() >= 0.30 && r.gamma() <= upper + 1e-6,
        format!("gamma {:.6}, upper {:.6}", r.gamma(), upper),
    )
}

fn c6_ham_scaling() -> Outcome {
    let mut scaled = Vec::new();
    let mut ok = true;
    for d in 2..=4u32 {
        let rep = ham_parity_gap(12, d).unwrap();
        ok &= rep.margin_lower_bound > 0.0;
        scaled.push(rep.margin_lower_bound * d as f64);
        // The same thresholds come out of materialized states at the largest exhaustive size.
        let (e, mat) = ham_parity_embedding(10, d, ParitySource::Exhaustive).unwrap();
        let small = ham_parity_gap(10, d).unwrap();
        ok &= (mat.delta0 - small.delta0).abs() < 1e-12 && (mat.delta1 - small.delta1).abs() < 1e-12;
        ok &= small.delta0 == rep.delta0 && small.delta1 == rep.delta1;
        if d == 4 {
            ok &= verify_threshold_embedding(&e, &ham_matrix(10, d).unwrap()).unwrap().valid;
        }
    }
    let hi = scaled.iter().copied().fold(f64::MIN, f64::max);
    let lo = scaled.iter().copied().fold(f64::MAX, f64::min);
    ok &= hi <= 3.0 * lo;
    outcome(ok, format!("gamma*d = {scaled:.4?}, ratio {:.3}", hi / lo))
}

fn c7_jl_fidelity() -> Outcome {
    let mut rng = Seed(7_000).rng();
    let vs: Vec<RealVector> = (0..100).map(|_| random_unit(&mut rng, 2000)).collect();
    let d = jl_dimension(101, 0.2).unwrap();
    let passes = (0..20u64)
        .filter(|&s| {
            let pv = project_vectors(&vs, d, Seed(s)).unwrap();
            verify_distortion(&vs, &pv, 0.2).unwrap().ok
        })
        .count();
    outcome(passes >= 15, format!("d = {d}, {passes}/20 seeds within 0.2"))
}

fn c8_bound_consistency() -> Outcome {
    let mut rng = Seed(8_000).rng();
    let cfg = HeuristicConfig {
        restarts: 2,
        iterations: 300,
        ..HeuristicConfig::default()
    };
    let mut ok = true;
    let mut witnesses = 0;
    for i in 0..100u64 {
        let rows = rng.random_range(1..=12);
        let cols = rng.random_range(1..=12);
        let entries = (0..rows * cols).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
        let m = SignMatrix::new(rows, cols, entries).unwrap();
        let f = forster_bound(&m).unwrap();
        let l = linial_bound(&m).unwrap();
        let upper = margin_upper_bound(&m).unwrap();
        ok &= l <= GROTHENDIECK_KG * f + 1e-9;
        if let Ok(r) = maximize_margin_heuristic(&m, rows, Seed(i), &cfg) {
            witnesses += 1;
            ok &= r.gamma() <= upper + 1e-6;
        }
    }
    outcome(ok && witnesses == 100, format!("100 matrices, {witnesses} witnesses"))
}

fn c9_swap_law() -> Outcome {
    let mut rng = Seed(9_000).rng();
    let r = 100_000;
    let mut worst = 0.0f64;
    for i in 0..20u64 {
        let dim = rng.random_range(2..=16);
        let a = random_unit(&mut rng, dim);
        let b = random_unit(&mut rng, dim);
        let p = 0.5 + dot(&a, &b).powi(2) / 2.0;
        assert!((swap_test_prob(&a, &b).unwrap() - p).abs() < 1e-15);
        let zeros = sample_swap_tests(&a, &b, r, Seed(i)).unwrap().iter().filter(|&&o| o == 0).count();
        let sd = (p * (1.0 - p) / r as f64).sqrt();
        worst = worst.max((zeros as f64 / r as f64 - p).abs() / sd);
    }
    outcome(worst <= 4.0, format!("worst deviation {worst:.2} sd"))
}

fn c10_classical_projection() -> Outcome {
    let mut rng = Seed(10_000).rng();
    let mut hits = 0;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let a = random_unit(&mut rng, 16);
        let b = random_unit(&mut rng, 16);
        let truth = dot(&a, &b);
        let e = ThresholdEmbedding::new(vec![a], vec![b], 0.0, 1.0).unwrap();
        let est = classical_projection_protocol(&e, (0, 0), 4, 800, 16, Seed(0)).unwrap();
        let err = (est - truth).abs();
        worst = worst.max(err);
        hits += usize::from(err <= 0.1);
    }
    outcome(hits >= 9, format!("{hits}/10 within 0.1, worst {worst:.4}"))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, u64, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("1 Forster bound on IP", 1, c1_forster_ip),
        ("2 IP repetition blow-up", 1, c2_repetition_blowup),
        ("3 embedding/realization round trips", 5, c3_round_trips),
        ("4 EQ end-to-end pipeline", 30, c4_eq_pipeline),
        ("5 EQ margin witness", 30, c5_eq_witness),
        ("6 HAM margin scaling", 60, c6_ham_scaling),
        ("7 JL fidelity", 60, c7_jl_fidelity),
        ("8 bound consistency", 60, c8_bound_consistency),
        ("9 swap-test law", 60, c9_swap_law),
        ("10 classical projection estimator", 60, c10_classical_projection),
    ];
    let mut failed = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let ok = out.ok && took < Duration::from_secs(limit);
        failed += usize::from(!ok);
        println!(
            "acceptance {name:<38} {} ({:.2}s, limit {limit}s) {}",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            out.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
