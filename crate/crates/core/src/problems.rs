//! Equality, Inner Product and Hamming-distance instances.
//!
//! Sign convention throughout: `M_xy = (−1)^{f(x,y)}`, so `−1` marks the inputs
//! on which the function is 1.
//!
//! The Hamming-distance fingerprint uses biased parity sketches: under shared
//! string `s` with independent Bernoulli(`p`) bits, each party announces
//! `⟨input, s⟩ mod 2`. The two bits collide with probability
//! `(1 + (1−2p)^Δ)/2` where `Δ` is the Hamming distance. With `p = 1/(2d)` the
//! collision probabilities at `Δ = d` and `Δ = d+1` differ by `Θ(1/d)`. This
//! sketch stands in for a message construction that is only specified through
//! its collision properties; reports label it as substituted.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::compiler::{assemble_shared_randomness_states, compile_smp, ThresholdRule, MAX_INPUT_BITS};
use crate::embeddings::embedding_margin;
use crate::linalg::RealVector;
use crate::{ClassicalSmpProtocol, Error, Realization, Result, Seed, SignMatrix, ThresholdEmbedding};

/// Largest input length for which matrices are materialized.
pub const MAX_BITS: u32 = MAX_INPUT_BITS;

/// Largest `rows × dim` (per side) for materialized Hamming states.
pub const HAM_STATE_ENTRY_CAP: usize = 1 << 21;

/// Shared strings per input bit in the sampled parity protocol.
pub const SAMPLED_STRINGS_PER_BIT: usize = 32;

pub const HAM_CONSTRUCTION: &str = "substituted: biased parity sketch, p = 1/(2d)";

fn check_bits(n: u32, what: &str) -> Result<()> {
    if (1..=MAX_BITS).contains(&n) {
        Ok(())
    } else {
        Err(Error::param(format!("{what} must lie in [1, {MAX_BITS}], got {n}")))
    }
}

fn parity(v: u64) -> u32 {
    v.count_ones() & 1
}

pub fn eq_matrix(n: u32) -> Result<SignMatrix> {
    check_bits(n, "n")?;
    let k = 1usize << n;
    SignMatrix::from_boolean(k, k, |x, y| x == y)
}

/// `M_xy = (−1)^{⟨x,y⟩ mod 2}`.
pub fn ip_matrix(k: u32) -> Result<SignMatrix> {
    check_bits(k, "k")?;
    let size = 1usize << k;
    SignMatrix::from_boolean(size, size, |x, y| parity((x & y) as u64) == 1)
}

/// `−1` iff the Hamming distance is at most `d`.
pub fn ham_matrix(n: u32, d: u32) -> Result<SignMatrix> {
    check_bits(n, "n")?;
    if d >= n {
        return Err(Error::param(format!("distance threshold must be below n = {n}, got {d}")));
    }
    let k = 1usize << n;
    SignMatrix::from_boolean(k, k, |x, y| (x ^ y).count_ones() <= d)
}

fn parity_protocol(n: u32, randomness: Vec<u64>) -> ClassicalSmpProtocol {
    let k = 1u64 << n;
    let table: Vec<Vec<u32>> = randomness
        .iter()
        .map(|&r| (0..k).map(|x| parity(x & r)).collect())
        .collect();
    ClassicalSmpProtocol {
        n,
        c: 1,
        randomness,
        alice: table.clone(),
        bob: table,
        referee: vec![vec![true, false], vec![false, true]],
    }
}

/// One-bit parity check for equality over every `r ∈ {0,1}^n`.
///
/// Accepts with probability 1 on `x = y` and exactly 1/2 otherwise.
pub fn eq_parity_protocol(n: u32) -> Result<ClassicalSmpProtocol> {
    check_bits(n, "n")?;
    Ok(parity_protocol(n, (0..1u64 << n).collect()))
}

/// As [`eq_parity_protocol`] over `32·n` strings drawn uniformly from `seed`.
pub fn eq_parity_protocol_sampled(n: u32, seed: Seed) -> Result<ClassicalSmpProtocol> {
    check_bits(n, "n")?;
    let mut rng = seed.rng();
    let randomness = (0..SAMPLED_STRINGS_PER_BIT * n as usize)
        .map(|_| rng.random_range(0..1u64 << n))
        .collect();
    Ok(parity_protocol(n, randomness))
}

/// Compiled and assembled parity-EQ states: `δ0 = 1/16`, `δ1 = 1/4` with full randomness.
pub fn eq_parity_embedding(n: u32) -> Result<ThresholdEmbedding> {
    let v = compile_smp(&eq_parity_protocol(n)?)?;
    assemble_shared_randomness_states(&v, &eq_matrix(n)?, ThresholdRule::Exact)
}

/// `α_x = (1, √2·e_x)/√3`, `β_y = (1, −√2·e_y)/√3` in dimension `2^n + 1`: margin 1/3 on EQ.
pub fn eq_margin_realization(n: u32) -> Result<Realization> {
    check_bits(n, "n")?;
    let k = 1usize << n;
    let s = 1.0 / 3f64.sqrt();
    let t = 2f64.sqrt() * s;
    let make = |i: usize, sign: f64| {
        let mut v = vec![0.0; k + 1];
        v[0] = s;
        v[i + 1] = sign * t;
        RealVector::new(v)
    };
    let alphas = (0..k).map(|i| make(i, 1.0)).collect::<Result<_>>()?;
    let betas = (0..k).map(|i| make(i, -1.0)).collect::<Result<_>>()?;
    Realization::new(alphas, betas, 1.0 / 3.0)
}

/// Probability that biased parities of inputs at distance `delta` agree.
pub fn collision_probability(p: f64, delta: u32) -> f64 {
    (1.0 + (1.0 - 2.0 * p).powi(delta as i32)) / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamParityReport {
    pub n: u32,
    pub d: u32,
    pub p: f64,
    /// Largest squared state overlap over pairs at distance `> d`.
    pub delta0: f64,
    /// Smallest squared state overlap over pairs at distance `≤ d`.
    pub delta1: f64,
    /// Margin `(δ1−δ0)/(2+δ1+δ0)` of the realization derived from the embedding.
    pub margin_lower_bound: f64,
    pub construction: String,
    /// `"analytic"`, `"exhaustive"` or `"sampled"`.
    pub source: String,
}

impl HamParityReport {
    pub fn gap(&self) -> f64 {
        self.delta1 - self.delta0
    }
}

fn check_ham(n: u32, d: u32) -> Result<()> {
    check_bits(n, "n")?;
    if d == 0 || 2 * d >= n {
        return Err(Error::param(format!("need 1 <= d < n/2, got n = {n}, d = {d}")));
    }
    Ok(())
}

fn ham_report(n: u32, d: u32, delta0: f64, delta1: f64, source: &str) -> Result<HamParityReport> {
    let gap = delta1 - delta0;
    if !(gap >= crate::compiler::MIN_REDUCTION_GAP) {
        return Err(Error::GapTooSmall { gap });
    }
    Ok(HamParityReport {
        n,
        d,
        p: 1.0 / (2.0 * d as f64),
        delta0,
        delta1,
        margin_lower_bound: embedding_margin(delta0, delta1),
        construction: HAM_CONSTRUCTION.into(),
        source: source.into(),
    })
}

/// Exact thresholds of the parity-sketch states from the collision formula.
///
/// Every distance `0..=n` occurs among `n`-bit pairs, and the collision
/// probability is decreasing, so `δ1 = P(d)²` and `δ0 = P(d+1)²`.
pub fn ham_parity_gap(n: u32, d: u32) -> Result<HamParityReport> {
    check_ham(n, d)?;
    let p = 1.0 / (2.0 * d as f64);
    let sq = |delta: u32| collision_probability(p, delta).powi(2);
    let delta1 = (0..=d).map(sq).fold(f64::INFINITY, f64::min);
    let delta0 = (d + 1..=n).map(sq).fold(0.0, f64::max);
    ham_report(n, d, delta0, delta1, "analytic")
}

/// How the shared strings of the Hamming sketch are realized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParitySource {
    /// Every `s ∈ {0,1}^n`, block `s` weighted by `√Pr[s]`; overlaps equal the collision formula.
    Exhaustive,
    /// `strings` independent draws; overlaps are empirical collision frequencies.
    Sampled { strings: usize, seed: Seed },
}

/// Materialized Hamming-distance states.
///
/// Block `j` of `α_x` is `w_j^{1/2}·|⟨x, s_j⟩ mod 2⟩`, and `β_y` likewise, so
/// `⟨α_x, β_y⟩ = Σ_j w_j·[bits agree]`. Thresholds are the exact extremal
/// squared overlaps on each side of `ham_matrix(n, d)`.
pub fn ham_parity_embedding(n: u32, d: u32, source: ParitySource) -> Result<(ThresholdEmbedding, HamParityReport)> {
    check_ham(n, d)?;
    let p = 1.0 / (2.0 * d as f64);
    let (strings, weights): (Vec<u64>, Vec<f64>) = match source {
        ParitySource::Exhaustive => (0..1u64 << n)
            .map(|s| {
                let ones = s.count_ones() as i32;
                (s, p.powi(ones) * (1.0 - p).powi(n as i32 - ones))
            })
            .unzip(),
        ParitySource::Sampled { strings, seed } => {
            if strings == 0 {
                return Err(Error::param("sampled sketch needs at least one string"));
            }
            let mut rng = seed.rng();
            let draws = (0..strings)
                .map(|_| (0..n).filter(|_| rng.random_bool(p)).fold(0u64, |acc, i| acc | 1 << i))
                .collect();
            (draws, vec![1.0 / strings as f64; strings])
        }
    };
    let rows = 1usize << n;
    let dim = 2 * strings.len();
    if rows.saturating_mul(dim) > HAM_STATE_ENTRY_CAP {
        return Err(Error::TooLarge {
            what: "hamming state entries",
            got: rows.saturating_mul(dim),
            limit: HAM_STATE_ENTRY_CAP,
        });
    }
    let states: Vec<RealVector> = (0..rows as u64)
        .map(|x| {
            let mut v = vec![0.0; dim];
            for (j, (&s, &w)) in strings.iter().zip(&weights).enumerate() {
                v[2 * j + parity(x & s) as usize] = w.sqrt();
            }
            RealVector::new(v)
        })
        .collect::<Result<_>>()?;

    // Overlaps depend only on z = x ⊕ y.
    let overlap: Vec<f64> = (0..rows as u64)
        .map(|z| {
            strings
                .iter()
                .zip(&weights)
                .filter(|(&s, _)| parity(z & s) == 0)
                .map(|(_, &w)| w)
                .sum()
        })
        .collect();
    let mut delta0 = 0.0f64;
    let mut delta1 = 1.0f64;
    for (z, &o) in overlap.iter().enumerate() {
        if z.count_ones() <= d {
            delta1 = delta1.min(o * o);
        } else {
            delta0 = delta0.max(o * o);
        }
    }
    let label = match source {
        ParitySource::Exhaustive => "exhaustive",
        ParitySource::Sampled { .. } => "sampled",
    };
    if delta0 >= delta1 {
        return Err(Error::NotSeparating { delta0, delta1 });
    }
    let report = ham_report(n, d, delta0, delta1, label)?;
    let e = ThresholdEmbedding::new(states.clone(), states, delta0, delta1)?;
    Ok((e, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub name: String,
    pub n: Option<u32>,
    pub k: Option<u32>,
    pub d: Option<u32>,
    pub matrix: SignMatrix,
    pub protocol: Option<ClassicalSmpProtocol>,
    pub embedding: Option<ThresholdEmbedding>,
}

impl ProblemInstance {
    /// Equality with its parity protocol and compiled embedding.
    pub fn eq(n: u32) -> Result<Self> {
        Ok(ProblemInstance {
            name: "eq".into(),
            n: Some(n),
            k: None,
            d: None,
            matrix: eq_matrix(n)?,
            protocol: Some(eq_parity_protocol(n)?),
            embedding: Some(eq_parity_embedding(n)?),
        })
    }

    pub fn ip(k: u32) -> Result<Self> {
        Ok(ProblemInstance {
            name: "ip".into(),
            n: None,
            k: Some(k),
            d: None,
            matrix: ip_matrix(k)?,
            protocol: None,
            embedding: None,
        })
    }

    /// Hamming distance; the exhaustive sketch embedding is attached when it fits.
    pub fn ham(n: u32, d: u32) -> Result<Self> {
        let matrix = ham_matrix(n, d)?;
        let embedding = match ham_parity_embedding(n, d, ParitySource::Exhaustive) {
            Ok((e, _)) => Some(e),
            Err(Error::TooLarge { .. }) | Err(Error::InvalidParameter(_)) | Err(Error::GapTooSmall { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(ProblemInstance {
            name: "ham".into(),
            n: Some(n),
            k: None,
            d: Some(d),
            matrix,
            protocol: None,
            embedding,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::verify_threshold_embedding;
    use crate::linalg::operator_norm;

    #[test]
    fn eq_matrix_examples() {
        assert_eq!(eq_matrix(1).unwrap().entries(), &[-1, 1, 1, -1]);
        let m = eq_matrix(3).unwrap();
        assert_eq!(m, m.transpose());
        assert!((0..8).all(|i| m.get(i, i) == -1));
        assert!(eq_matrix(0).is_err());
        assert!(eq_matrix(13).is_err());
    }

    #[test]
    fn ip_matrix_examples() {
        assert_eq!(ip_matrix(1).unwrap().entries(), &[1, 1, 1, -1]);
        for k in 1..=6 {
            let norm = operator_norm(&ip_matrix(k).unwrap().to_real(), 1e-12).unwrap();
            assert!((norm - 2f64.powi(k as i32).sqrt()).abs() < 1e-6);
        }
        assert!(ip_matrix(0).is_err());
    }

    #[test]
    fn ip_gram_is_scaled_identity() {
        for k in 1..=4u32 {
            let m = ip_matrix(k).unwrap();
            let n = 1usize << k;
            for i in 0..n {
                for j in 0..n {
                    let g: i32 = (0..n).map(|x| i32::from(m.get(x, i)) * i32::from(m.get(x, j))).sum();
                    assert_eq!(g, if i == j { n as i32 } else { 0 });
                }
            }
        }
    }

    #[test]
    fn ham_matrix_examples() {
        for n in 1..=6 {
            assert_eq!(ham_matrix(n, 0).unwrap(), eq_matrix(n).unwrap());
        }
        let m = ham_matrix(4, 3).unwrap();
        for x in 0..16 {
            for y in 0..16 {
                assert_eq!(m.get(x, y) == 1, x ^ y == 15);
            }
        }
        assert_eq!(m, m.transpose());
        assert!(ham_matrix(4, 4).is_err());
    }

    #[test]
    fn parity_protocol_acceptance() {
        for n in 1..=5 {
            let p = eq_parity_protocol(n).unwrap();
            let counts = p.acceptance_counts();
            let r = 1usize << n;
            for x in 0..r {
                for y in 0..r {
                    assert_eq!(counts[x][y] * 2, if x == y { 2 * r } else { r });
                }
            }
        }
    }

    #[test]
    fn parity_embedding_verifies() {
        for n in 1..=5 {
            let e = eq_parity_embedding(n).unwrap();
            assert!(verify_threshold_embedding(&e, &eq_matrix(n).unwrap()).unwrap().valid);
        }
    }

    #[test]
    fn margin_realization_for_eq() {
        let r = eq_margin_realization(3).unwrap();
        assert_eq!(r.dim(), 9);
        let rep = crate::embeddings::verify_realization(&r, &eq_matrix(3).unwrap()).unwrap();
        assert!(rep.valid);
        assert!((rep.achieved_margin - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn sampled_protocol_shape() {
        let p = eq_parity_protocol_sampled(4, Seed(3)).unwrap();
        assert_eq!(p.randomness.len(), 128);
        assert!(p.validate().is_ok());
        assert_eq!(p, eq_parity_protocol_sampled(4, Seed(3)).unwrap());
        let counts = p.acceptance_counts();
        assert!((0..16).all(|x| counts[x][x] == 128));
    }

    /// Direct sum over all `s ∈ {0,1}^n` with Bernoulli weights.
    fn enumerated_collision(n: u32, p: f64, x: u64, y: u64) -> f64 {
        (0..1u64 << n)
            .filter(|&s| parity(x & s) == parity(y & s))
            .map(|s| {
                let ones = s.count_ones() as i32;
                p.powi(ones) * (1.0 - p).powi(n as i32 - ones)
            })
            .sum()
    }

    #[test]
    fn collision_formula_matches_enumeration() {
        assert_eq!(collision_probability(0.25, 2), 0.625);
        assert!((enumerated_collision(4, 0.25, 0b0000, 0b0011) - 0.625).abs() < 1e-15);
        for x in 0..16u64 {
            for y in 0..16u64 {
                let delta = (x ^ y).count_ones();
                for p in [0.1, 0.25, 1.0 / 6.0] {
                    assert!((enumerated_collision(4, p, x, y) - collision_probability(p, delta)).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn analytic_gap_values() {
        let r = ham_parity_gap(12, 2).unwrap();
        assert_eq!(r.delta1, 0.625f64.powi(2));
        assert_eq!(r.delta0, 0.5625f64.powi(2));
        assert!((r.margin_lower_bound - embedding_margin(r.delta0, r.delta1)).abs() < 1e-15);
        assert!(ham_parity_gap(12, 6).is_err());
        assert!(ham_parity_gap(12, 0).is_err());
        // p = 1/2 makes every nonzero distance collide with probability 1/2.
        assert!(matches!(ham_parity_gap(4, 1), Err(Error::GapTooSmall { .. })));
    }

    #[test]
    fn margin_scales_inversely_with_d() {
        let scaled: Vec<f64> = (2..=4)
            .map(|d| {
                let r = ham_parity_gap(12, d).unwrap();
                assert!(r.margin_lower_bound > 0.0);
                r.margin_lower_bound * d as f64
            })
            .collect();
        for v in &scaled {
            assert!((0.05..=2.0).contains(v), "{scaled:?}");
        }
    }

    #[test]
    fn exhaustive_states_match_formula() {
        let (e, rep) = ham_parity_embedding(6, 2, ParitySource::Exhaustive).unwrap();
        assert_eq!(e.dim(), 128);
        let m = ham_matrix(6, 2).unwrap();
        assert!(verify_threshold_embedding(&e, &m).unwrap().valid);
        for x in 0..64 {
            for y in 0..64 {
                let ip = e.alphas()[x].inner(&e.betas()[y]).unwrap();
                let want = collision_probability(0.25, (x ^ y).count_ones());
                assert!((ip - want).abs() < 1e-9);
            }
        }
        let analytic = ham_parity_gap(6, 2).unwrap();
        assert!((rep.delta0 - analytic.delta0).abs() < 1e-12);
        assert!((rep.delta1 - analytic.delta1).abs() < 1e-12);
        assert!(e.alphas().iter().all(|v| v.is_unit(1e-9)));
    }

    #[test]
    fn sampled_states_are_empirical_frequencies() {
        let seed = Seed(5);
        let (e, rep) = ham_parity_embedding(7, 2, ParitySource::Sampled { strings: 4000, seed }).unwrap();
        assert_eq!(rep.source, "sampled");
        assert!(verify_threshold_embedding(&e, &ham_matrix(7, 2).unwrap()).unwrap().valid);
        // Recompute one overlap from the block structure.
        let (a, b) = (&e.alphas()[3], &e.betas()[5]);
        let agree = (0..4000)
            .filter(|&j| (a[2 * j] > 0.0) == (b[2 * j] > 0.0))
            .count() as f64
            / 4000.0;
        assert!((a.inner(b).unwrap() - agree).abs() < 1e-12);
        assert!((agree - collision_probability(0.25, 2)).abs() < 0.05);
    }

    #[test]
    fn sampled_too_small_is_refused_or_separates() {
        match ham_parity_embedding(7, 2, ParitySource::Sampled { strings: 3, seed: Seed(0) }) {
            Ok((e, _)) => assert!(verify_threshold_embedding(&e, &ham_matrix(7, 2).unwrap()).unwrap().valid),
            Err(err) => assert!(matches!(err, Error::NotSeparating { .. } | Error::GapTooSmall { .. })),
        }
        assert!(matches!(
            ham_parity_embedding(12, 2, ParitySource::Exhaustive),
            Err(Error::TooLarge { .. })
        ));
    }
}
