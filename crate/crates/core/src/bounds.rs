//! Margin bounds for sign matrices.
//!
//! Upper bounds on the best margin of any realization, whatever its dimension:
//!
//! * Forster: `γ ≤ ‖M‖ / √(|X|·|Y|)` with `‖M‖` the largest singular value;
//! * Linial et al.: `γ ≤ K_G · ‖M‖_{∞→1} / (|X|·|Y|)`.
//!
//! Both are stated for total matrices and refuse promise matrices. A gradient
//! heuristic supplies lower-bound witnesses. An upper bound `γ*` turns into
//! `1/γ*²` swap-test copies and `¼·log2(1/γ*)` qubits of entangled two-way
//! communication; both are asymptotic with the constant omitted.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::embeddings::{achieved_margin, verify_realization, SignMatrix};
use crate::linalg::{dot, linf_to_l1_norm, operator_norm, RealVector, DEFAULT_NORM_TOL, LINF_L1_MAX_COLS};
use crate::{Error, Realization, Result, Seed};

/// Krivine's upper bound on Grothendieck's constant, `π / (2 ln(1 + √2))`.
pub const GROTHENDIECK_KG: f64 = 1.782_213_978_1;

fn require_total(m: &SignMatrix) -> Result<()> {
    match m.first_zero() {
        Some((row, col)) => Err(Error::PromiseMatrix { row, col }),
        None => Ok(()),
    }
}

pub fn forster_bound(m: &SignMatrix) -> Result<f64> {
    require_total(m)?;
    let norm = operator_norm(&m.to_real(), DEFAULT_NORM_TOL)?;
    Ok((norm / ((m.rows() * m.cols()) as f64).sqrt()).min(1.0))
}

pub fn linial_bound(m: &SignMatrix) -> Result<f64> {
    require_total(m)?;
    let l = linf_to_l1_norm(&m.to_real())?;
    Ok((GROTHENDIECK_KG * l / (m.rows() * m.cols()) as f64).min(1.0))
}

/// The smaller of the two bounds; Linial's is skipped above [`LINF_L1_MAX_COLS`] columns.
pub fn margin_upper_bound(m: &SignMatrix) -> Result<f64> {
    let f = forster_bound(m)?;
    if m.cols() <= LINF_L1_MAX_COLS {
        Ok(f.min(linial_bound(m)?))
    } else {
        Ok(f)
    }
}

/// `1/γ²`: order of swap-test copies any fingerprinting protocol needs.
pub fn repetition_lower_bound(gamma_upper: f64) -> Result<f64> {
    check_gamma(gamma_upper)?;
    Ok(1.0 / (gamma_upper * gamma_upper))
}

/// `¼·log2(1/γ)` qubits, valid up to an additive constant.
pub fn qent_lower_bound(gamma_upper: f64) -> Result<f64> {
    check_gamma(gamma_upper)?;
    Ok(0.25 * (1.0 / gamma_upper).log2())
}

fn check_gamma(g: f64) -> Result<()> {
    if g > 0.0 && g <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("margin must lie in (0, 1], got {g}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeuristicConfig {
    pub restarts: usize,
    pub iterations: usize,
    /// Initial step (maximum angular move of any vector), decayed by `step_decay` each iteration.
    pub step: f64,
    pub step_decay: f64,
    /// Soft-min temperature at the first iteration.
    pub softmin_temp: f64,
    /// Soft-min temperature at the last iteration; annealing is geometric.
    pub softmin_temp_final: f64,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig {
            restarts: 8,
            iterations: 2000,
            step: 0.05,
            step_decay: 0.999,
            softmin_temp: 1.0,
            softmin_temp_final: 0.01,
        }
    }
}

/// Searches for a realization of `m` in dimension `d` with large margin.
///
/// Each restart runs projected gradient ascent on the soft-min of
/// `M_xy⟨α_x, β_y⟩` over the promise, renormalizing after every step, then
/// tries flipping individual vectors. Starts are `config.restarts` random
/// Gaussian arrangements plus, when they fit in `d` dimensions:
///
/// * `α_x = (1, √2·e_x)/√3`, `β_y = (1, −√2·e_y)/√3` when `m` is EQ-shaped;
/// * `α_x = e_x`, `β_y = M_{·y}/‖M_{·y}‖`, which has margin `≥ 1/√rows`.
///
/// The returned margin is the exact minimum for the best arrangement found.
pub fn maximize_margin_heuristic(
    m: &SignMatrix,
    d: usize,
    seed: Seed,
    config: &HeuristicConfig,
) -> Result<Realization> {
    if d == 0 {
        return Err(Error::param("dimension must be at least 1"));
    }
    if config.iterations == 0 || !(config.step > 0.0) || !(config.softmin_temp > 0.0) || !(config.softmin_temp_final > 0.0) {
        return Err(Error::param("heuristic needs positive iterations, step and temperatures"));
    }
    let mut starts: Vec<Arrangement> = Vec::new();
    if m.is_equality_shaped() && d > m.rows() {
        starts.push(eq_start(m.rows(), d));
    }
    if d >= m.rows() {
        starts.push(identity_start(m, d));
    }
    let mut rng = seed.rng();
    for _ in 0..config.restarts {
        starts.push(random_start(&mut rng, m.rows(), m.cols(), d));
    }

    let mut best: Option<(f64, Arrangement)> = None;
    for start in starts {
        let (score, arr) = ascend(m, start, config);
        if best.as_ref().is_none_or(|(b, _)| score > *b) {
            best = Some((score, arr));
        }
    }
    let (score, arr) = best.ok_or_else(|| Error::param("no restarts requested"))?;
    if !(score > 0.0) {
        return Err(Error::NoSeparatingArrangement { best: score });
    }
    let to_vecs = |vs: Vec<Vec<f64>>| vs.into_iter().map(RealVector::new).collect::<Result<Vec<_>>>();
    let (alphas, betas) = (to_vecs(arr.alphas)?, to_vecs(arr.betas)?);
    let (gamma, _) = achieved_margin(&alphas, &betas, m);
    let r = Realization::new(alphas, betas, gamma.min(1.0))?;
    debug_assert!(verify_realization(&r, m).map(|v| v.valid).unwrap_or(false));
    Ok(r)
}

#[derive(Clone)]
struct Arrangement {
    alphas: Vec<Vec<f64>>,
    betas: Vec<Vec<f64>>,
}

fn normalize_in_place(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

fn eq_start(n: usize, d: usize) -> Arrangement {
    let s = 1.0 / 3f64.sqrt();
    let t = 2f64.sqrt() * s;
    let make = |i: usize, sign: f64| {
        let mut v = vec![0.0; d];
        v[0] = s;
        v[i + 1] = sign * t;
        v
    };
    Arrangement {
        alphas: (0..n).map(|i| make(i, 1.0)).collect(),
        betas: (0..n).map(|i| make(i, -1.0)).collect(),
    }
}

fn identity_start(m: &SignMatrix, d: usize) -> Arrangement {
    let alphas = (0..m.rows())
        .map(|x| {
            let mut v = vec![0.0; d];
            v[x] = 1.0;
            v
        })
        .collect();
    let betas = (0..m.cols())
        .map(|y| {
            let mut v = vec![0.0; d];
            for x in 0..m.rows() {
                v[x] = f64::from(m.get(x, y));
            }
            if v.iter().all(|&c| c == 0.0) {
                v[0] = 1.0;
            }
            normalize_in_place(&mut v);
            v
        })
        .collect();
    Arrangement { alphas, betas }
}

fn random_start(rng: &mut crate::rng::Rng, rows: usize, cols: usize, d: usize) -> Arrangement {
    use rand_distr::{Distribution, StandardNormal};
    let mut draw = || {
        let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        if v.iter().all(|&c| c == 0.0) {
            v[rng.random_range(0..d)] = 1.0;
        }
        normalize_in_place(&mut v);
        v
    };
    let alphas = (0..rows).map(|_| draw()).collect();
    let betas = (0..cols).map(|_| draw()).collect();
    Arrangement { alphas, betas }
}

fn exact_margin(m: &SignMatrix, a: &Arrangement) -> f64 {
    m.nonzero()
        .map(|(x, y, s)| f64::from(s) * dot(&a.alphas[x], &a.betas[y]))
        .fold(f64::INFINITY, f64::min)
}

fn ascend(m: &SignMatrix, start: Arrangement, config: &HeuristicConfig) -> (f64, Arrangement) {
    let pairs: Vec<(usize, usize, f64)> = m.nonzero().map(|(x, y, s)| (x, y, f64::from(s))).collect();
    let d = start.alphas[0].len();
    let mut cur = start;
    let mut best_score = exact_margin(m, &cur);
    let mut best = cur.clone();
    let mut step = config.step;
    let anneal = if config.iterations > 1 {
        (config.softmin_temp_final / config.softmin_temp).powf(1.0 / (config.iterations - 1) as f64)
    } else {
        1.0
    };
    let mut temp = config.softmin_temp;
    let mut z = vec![0.0; pairs.len()];
    let mut ga = vec![vec![0.0; d]; cur.alphas.len()];
    let mut gb = vec![vec![0.0; d]; cur.betas.len()];

    for _ in 0..config.iterations {
        for (k, &(x, y, s)) in pairs.iter().enumerate() {
            z[k] = s * dot(&cur.alphas[x], &cur.betas[y]);
        }
        // Soft-min weights softmax(−z/T), shifted by the minimum for stability.
        let zmin = z.iter().copied().fold(f64::INFINITY, f64::min);
        let mut total = 0.0;
        let w: Vec<f64> = z
            .iter()
            .map(|&zi| {
                let e = (-(zi - zmin) / temp).exp();
                total += e;
                e
            })
            .collect();
        ga.iter_mut().chain(gb.iter_mut()).for_each(|g| g.fill(0.0));
        for (k, &(x, y, s)) in pairs.iter().enumerate() {
            let c = s * w[k] / total;
            for i in 0..d {
                ga[x][i] += c * cur.betas[y][i];
                gb[y][i] += c * cur.alphas[x][i];
            }
        }
        // Project onto tangent spaces and scale so the largest move is `step`.
        let mut gmax = 0.0f64;
        for (g, v) in ga.iter_mut().zip(&cur.alphas).chain(gb.iter_mut().zip(&cur.betas)) {
            let r = dot(g, v);
            g.iter_mut().zip(v).for_each(|(gi, vi)| *gi -= r * vi);
            gmax = gmax.max(dot(g, g).sqrt());
        }
        if gmax > 0.0 {
            let scale = step / gmax;
            for (v, g) in cur.alphas.iter_mut().zip(&ga).chain(cur.betas.iter_mut().zip(&gb)) {
                v.iter_mut().zip(g).for_each(|(vi, gi)| *vi += scale * gi);
                normalize_in_place(v);
            }
        }
        let score = exact_margin(m, &cur);
        if score > best_score {
            best_score = score;
            best = cur.clone();
        }
        step *= config.step_decay;
        temp *= anneal;
    }

    flip_pass(m, &mut best, &mut best_score);
    (best_score, best)
}

/// Greedy sign flips of whole vectors; the only move available when `d = 1`.
fn flip_pass(m: &SignMatrix, a: &mut Arrangement, score: &mut f64) {
    for _ in 0..(a.alphas.len() + a.betas.len()) {
        let mut improved = false;
        for i in 0..a.alphas.len() + a.betas.len() {
            let flip = |a: &mut Arrangement| {
                let v = if i < a.alphas.len() {
                    &mut a.alphas[i]
                } else {
                    &mut a.betas[i - a.alphas.len()]
                };
                v.iter_mut().for_each(|c| *c = -*c);
            };
            flip(a);
            let s = exact_margin(m, a);
            if s > *score {
                *score = s;
                improved = true;
            } else {
                flip(a);
            }
        }
        if !improved {
            break;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    pub forster: Option<f64>,
    pub linial: Option<f64>,
    /// Minimum of the available upper bounds.
    pub upper: Option<f64>,
    /// Margin of the heuristic witness, when requested.
    pub heuristic_lower: Option<f64>,
    pub heuristic_dim: Option<usize>,
    /// `¼·log2(1/upper)`, asymptotic, constant omitted.
    pub qent_lower_bits: Option<f64>,
    /// `1/upper²`, asymptotic, constant omitted.
    pub repetition_lower: Option<f64>,
    pub note: String,
}

pub const ASYMPTOTIC_NOTE: &str = "qent_lower_bits and repetition_lower are asymptotic; additive/multiplicative constants omitted";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicRequest {
    pub dim: usize,
    pub seed: Seed,
    pub config: HeuristicConfig,
}

/// Spectral bounds (when `spectral`), an optional heuristic witness, and the derived lower bounds.
///
/// Promise matrices are accepted only with `spectral = false`.
pub fn margin_report(m: &SignMatrix, spectral: bool, heuristic: Option<HeuristicRequest>) -> Result<MarginReport> {
    let (forster, linial, upper) = if spectral {
        let f = forster_bound(m)?;
        let l = if m.cols() <= LINF_L1_MAX_COLS {
            Some(linial_bound(m)?)
        } else {
            None
        };
        (Some(f), l, Some(l.map_or(f, |l| l.min(f))))
    } else {
        (None, None, None)
    };
    let heuristic_lower = heuristic
        .map(|h| maximize_margin_heuristic(m, h.dim, h.seed, &h.config).map(|r| r.gamma()))
        .transpose()?;
    Ok(MarginReport {
        forster,
        linial,
        upper,
        heuristic_lower,
        heuristic_dim: heuristic.map(|h| h.dim),
        qent_lower_bits: upper.map(qent_lower_bound).transpose()?,
        repetition_lower: upper.map(repetition_lower_bound).transpose()?,
        note: ASYMPTOTIC_NOTE.into(),
    })
}
