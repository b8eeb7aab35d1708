//! Repeated swap-test fingerprinting.
//!
//! A swap test on `|α⟩, |β⟩` outputs 0 with probability `1/2 + ⟨α,β⟩²/2`. The
//! referee runs `r` of them, estimates `⟨α,β⟩² ≈ 2·(fraction of zeros) − 1`
//! and outputs 1 when the estimate reaches the threshold `θ = (δ0+δ1)/2`.
//!
//! With `r = ⌈8 ln(2/ε)/(δ1−δ0)²⌉` Hoeffding's inequality keeps the fraction of
//! zeros within `(δ1−δ0)/4` of its mean except with probability `ε`, so the
//! estimate lands on the correct side of `θ`.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::embeddings::{realization_to_embedding, verify_realization, verify_threshold_embedding};
use crate::linalg::{dot, RealVector};
use crate::rng::Rng;
use crate::{Error, Realization, Result, Seed, SignMatrix, ThresholdEmbedding};

/// Norm slack tolerated by [`swap_test_prob`].
pub const SWAP_UNIT_TOL: f64 = 1e-6;

/// Probability that a swap test on unit vectors `alpha`, `beta` outputs 0.
pub fn swap_test_prob(alpha: &RealVector, beta: &RealVector) -> Result<f64> {
    if alpha.dim() != beta.dim() {
        return Err(Error::DimensionMismatch {
            expected: alpha.dim(),
            found: beta.dim(),
        });
    }
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !v.is_unit(SWAP_UNIT_TOL) {
            return Err(Error::NotUnit {
                which: name.into(),
                norm: v.norm(),
            });
        }
    }
    let ip = dot(alpha.as_slice(), beta.as_slice());
    Ok((0.5 + ip * ip / 2.0).clamp(0.5, 1.0))
}

/// Draws `r` swap-test outcomes (0 or 1) with `P[0] = p_zero`.
pub(crate) fn draw_outcomes(rng: &mut Rng, p_zero: f64, r: usize) -> Vec<u8> {
    (0..r).map(|_| u8::from(rng.random::<f64>() >= p_zero)).collect()
}

fn count_zeros(rng: &mut Rng, p_zero: f64, r: usize) -> usize {
    (0..r).filter(|_| rng.random::<f64>() < p_zero).count()
}

/// `r` independent swap tests on `(alpha, beta)`, reproducible from `seed`.
pub fn sample_swap_tests(alpha: &RealVector, beta: &RealVector, r: usize, seed: Seed) -> Result<Vec<u8>> {
    if r == 0 {
        return Err(Error::param("repetition count must be at least 1"));
    }
    let p = swap_test_prob(alpha, beta)?;
    Ok(draw_outcomes(&mut seed.rng(), p, r))
}

/// Hoeffding-sufficient repetition count `⌈8 ln(2/ε) / (δ1−δ0)²⌉`.
pub fn required_repetitions(delta0: f64, delta1: f64, eps: f64) -> Result<usize> {
    if !(0.0 <= delta0 && delta0 < delta1 && delta1 <= 1.0) {
        return Err(Error::ThresholdOrder { delta0, delta1 });
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::param(format!("error probability must lie in (0, 1/2), got {eps}")));
    }
    let gap = delta1 - delta0;
    Ok((8.0 * (2.0 / eps).ln() / (gap * gap)).ceil() as usize)
}

/// Referee output from swap-test outcomes.
///
/// The estimate `clamp(2·zeros/r − 1, 0, 1)` targets `⟨α,β⟩²`; the result is 1
/// iff the estimate is at least `theta` (ties go to 1).
pub fn referee_decide(outcomes: &[u8], theta: f64) -> Result<u8> {
    if outcomes.is_empty() {
        return Err(Error::Empty("swap-test outcomes"));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::param(format!("threshold must lie in (0, 1), got {theta}")));
    }
    let zeros = outcomes.iter().filter(|&&b| b == 0).count();
    Ok(decide_from_zeros(zeros, outcomes.len(), theta))
}

fn decide_from_zeros(zeros: usize, r: usize, theta: f64) -> u8 {
    let est = (2.0 * zeros as f64 / r as f64 - 1.0).clamp(0.0, 1.0);
    u8::from(est >= theta)
}

/// A threshold embedding run as an `r`-fold swap-test protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerprintProtocol {
    embedding: ThresholdEmbedding,
    repetitions: usize,
    theta: f64,
}

impl FingerprintProtocol {
    pub fn new(embedding: ThresholdEmbedding, repetitions: usize, theta: f64) -> Result<Self> {
        let p = FingerprintProtocol {
            embedding,
            repetitions,
            theta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Repetitions from [`required_repetitions`] and the midpoint threshold.
    pub fn for_error(embedding: ThresholdEmbedding, eps: f64) -> Result<Self> {
        let r = required_repetitions(embedding.delta0(), embedding.delta1(), eps)?;
        let theta = (embedding.delta0() + embedding.delta1()) / 2.0;
        Self::new(embedding, r, theta)
    }

    pub fn validate(&self) -> Result<()> {
        self.embedding.validate()?;
        if self.repetitions == 0 {
            return Err(Error::param("repetition count must be at least 1"));
        }
        let (d0, d1) = (self.embedding.delta0(), self.embedding.delta1());
        if !(d0 < self.theta && self.theta < d1) {
            return Err(Error::param(format!(
                "threshold {} must lie strictly between {d0} and {d1}",
                self.theta
            )));
        }
        Ok(())
    }

    pub fn embedding(&self) -> &ThresholdEmbedding {
        &self.embedding
    }

    pub fn repetitions(&self) -> usize {
        self.repetitions
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Qubits per fingerprint copy: `⌈log2(dim)⌉`.
    pub fn qubits_per_copy(&self) -> u32 {
        qubits_for_dim(self.embedding.dim())
    }

    /// Total communication `2·q·r`: each party sends `r` copies of a `q`-qubit state.
    pub fn total_qubits(&self) -> u64 {
        2 * u64::from(self.qubits_per_copy()) * self.repetitions as u64
    }
}

pub fn qubits_for_dim(dim: usize) -> u32 {
    if dim <= 1 {
        0
    } else {
        usize::BITS - (dim - 1).leading_zeros()
    }
}

/// Protocol from a margin realization: embedding via the `(1, ±v)/√2` lift,
/// repetitions from [`required_repetitions`], midpoint threshold.
pub fn protocol_from_margin(m: &SignMatrix, r: &Realization, eps: f64) -> Result<FingerprintProtocol> {
    let rep = verify_realization(r, m)?;
    if !rep.valid {
        return Err(Error::InvalidRealization {
            achieved: rep.achieved_margin,
            claimed: r.gamma(),
        });
    }
    FingerprintProtocol::for_error(realization_to_embedding(r)?, eps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Fraction of wrong referee outputs per pair; `None` outside the promise.
    pub per_pair_error: Vec<Vec<Option<f64>>>,
    pub max_error: f64,
    pub trials: usize,
    pub repetitions: usize,
    pub theta: f64,
}

/// Runs `trials` executions of the protocol on every promise pair of `m`.
///
/// Pair `(x, y)` draws from `seed.derive(x·cols + y)`, so each pair's result is
/// independent of iteration order.
pub fn run_protocol(p: &FingerprintProtocol, m: &SignMatrix, trials: usize, seed: Seed) -> Result<RunReport> {
    if trials == 0 {
        return Err(Error::param("trial count must be at least 1"));
    }
    let e = p.embedding();
    let check = verify_threshold_embedding(e, m)?;
    if let Some((row, col)) = check.first_violation {
        return Err(Error::InvalidEmbedding { row, col });
    }
    if !check.valid {
        return Err(Error::param("embedding vectors are not unit norm"));
    }
    let mut per_pair = vec![vec![None; m.cols()]; m.rows()];
    let mut max_error = 0.0f64;
    for (x, y, s) in m.nonzero() {
        let prob = swap_test_prob(&e.alphas()[x], &e.betas()[y])?;
        let mut rng = seed.derive((x * m.cols() + y) as u64).rng();
        // f = 1 exactly where M = −1.
        let truth = u8::from(s < 0);
        let wrong = (0..trials)
            .filter(|_| {
                let zeros = count_zeros(&mut rng, prob, p.repetitions());
                decide_from_zeros(zeros, p.repetitions(), p.theta()) != truth
            })
            .count();
        let err = wrong as f64 / trials as f64;
        max_error = max_error.max(err);
        per_pair[x][y] = Some(err);
    }
    Ok(RunReport {
        per_pair_error: per_pair,
        max_error,
        trials,
        repetitions: p.repetitions(),
        theta: p.theta(),
    })
}
