//! From classical protocols to fingerprint states.
//!
//! A public-coin protocol with `c`-bit messages becomes, for each shared random
//! string `r`, a pair of vectors `a_r(x), b_r(y) ∈ {0,1}^{2^c}`: `a_r(x)` is the
//! indicator of Alice's message, `b_r(y)` the set of messages that make the
//! receiver accept. Their inner product is the acceptance bit, so averaging
//! over `r` gives the acceptance probability `P(x,y)`.
//!
//! Bounded vectors become unit states by junk padding, and the random string is
//! folded in as a block index:
//!
//! ```text
//! α_x = |R|^{-1/2} Σ_r |r⟩ ⊗ (a_r(x) ⊕ √(L²−‖a_r(x)‖²)·|junk_a⟩) / L
//! ```
//!
//! so that `⟨α_x, β_y⟩ = P(x,y) / L²`.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::embeddings::{verify_threshold_embedding, PROJECTION_RETRIES};
use crate::linalg::{dot, RealVector};
use crate::projections::{jl_dimension, project_vectors};
use crate::{Error, Result, Seed, SignMatrix, ThresholdEmbedding};

/// Largest message length accepted by the compilers; vectors have `2^c` entries.
pub const MAX_MESSAGE_BITS: u32 = 16;

/// Largest input length; truth tables have `2^n` rows.
pub const MAX_INPUT_BITS: u32 = 12;

/// Smallest threshold gap [`reduce_embedding_dimension`] will work with.
pub const MIN_REDUCTION_GAP: f64 = 1e-6;

/// Slack on the norm bound `‖v‖ ≤ L`.
pub const NORM_BOUND_TOL: f64 = 1e-9;

fn check_sizes(n: u32, c: u32, r: usize) -> Result<()> {
    if n > MAX_INPUT_BITS {
        return Err(Error::TooLarge {
            what: "input bit-length",
            got: n as usize,
            limit: MAX_INPUT_BITS as usize,
        });
    }
    if c > MAX_MESSAGE_BITS {
        return Err(Error::TooLarge {
            what: "message bit-length",
            got: c as usize,
            limit: MAX_MESSAGE_BITS as usize,
        });
    }
    if r == 0 {
        return Err(Error::Empty("shared randomness list"));
    }
    Ok(())
}

fn check_table(table: &[Vec<u32>], what: &'static str, width: usize, messages: usize) -> Result<()> {
    for row in table {
        if row.len() != width {
            return Err(Error::Shape {
                what,
                detail: format!("expected {width} entries per random string, found {}", row.len()),
            });
        }
        if let Some(&m) = row.iter().find(|&&m| m as usize >= messages) {
            return Err(Error::Shape {
                what,
                detail: format!("message {m} out of range for {messages} messages"),
            });
        }
    }
    Ok(())
}

/// Simultaneous-message protocol given by truth tables.
///
/// `alice[i][x]` and `bob[i][y]` are the messages under random string
/// `randomness[i]`; `referee[m_a][m_b]` is the output bit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalSmpProtocol {
    pub n: u32,
    pub c: u32,
    pub randomness: Vec<u64>,
    pub alice: Vec<Vec<u32>>,
    pub bob: Vec<Vec<u32>>,
    pub referee: Vec<Vec<bool>>,
}

impl ClassicalSmpProtocol {
    pub fn validate(&self) -> Result<()> {
        check_sizes(self.n, self.c, self.randomness.len())?;
        let (inputs, messages) = (1usize << self.n, 1usize << self.c);
        for (what, t) in [("alice message table", &self.alice), ("bob message table", &self.bob)] {
            if t.len() != self.randomness.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.randomness.len(),
                    found: t.len(),
                });
            }
            check_table(t, what, inputs, messages)?;
        }
        if self.referee.len() != messages || self.referee.iter().any(|row| row.len() != messages) {
            return Err(Error::Shape {
                what: "referee table",
                detail: format!("expected {messages} x {messages}"),
            });
        }
        Ok(())
    }

    pub fn inputs(&self) -> usize {
        1 << self.n
    }

    /// Bob's role folded into the referee: he accepts `m_a` iff `referee[m_a][bob(y, r)]`.
    pub fn to_one_way(&self) -> OneWayProtocol {
        let bob_accept = self
            .bob
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&mb| self.referee.iter().map(|ra| ra[mb as usize]).collect())
                    .collect()
            })
            .collect();
        OneWayProtocol {
            n: self.n,
            c: self.c,
            randomness: self.randomness.clone(),
            alice: self.alice.clone(),
            bob_accept,
        }
    }

    /// Number of random strings on which the referee accepts `(x, y)`, by direct execution.
    pub fn acceptance_counts(&self) -> Vec<Vec<usize>> {
        let k = self.inputs();
        let mut counts = vec![vec![0; k]; k];
        for (al, bo) in self.alice.iter().zip(&self.bob) {
            for x in 0..k {
                let ra = &self.referee[al[x] as usize];
                for y in 0..k {
                    counts[x][y] += usize::from(ra[bo[y] as usize]);
                }
            }
        }
        counts
    }
}

/// One-way protocol: Alice sends `alice[i][x]`, Bob outputs `bob_accept[i][y][m]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneWayProtocol {
    pub n: u32,
    pub c: u32,
    pub randomness: Vec<u64>,
    pub alice: Vec<Vec<u32>>,
    pub bob_accept: Vec<Vec<Vec<bool>>>,
}

impl OneWayProtocol {
    pub fn validate(&self) -> Result<()> {
        check_sizes(self.n, self.c, self.randomness.len())?;
        let (inputs, messages) = (1usize << self.n, 1usize << self.c);
        if self.alice.len() != self.randomness.len() || self.bob_accept.len() != self.randomness.len() {
            return Err(Error::DimensionMismatch {
                expected: self.randomness.len(),
                found: self.alice.len().min(self.bob_accept.len()),
            });
        }
        check_table(&self.alice, "alice message table", inputs, messages)?;
        for t in &self.bob_accept {
            if t.len() != inputs || t.iter().any(|row| row.len() != messages) {
                return Err(Error::Shape {
                    what: "bob acceptance table",
                    detail: format!("expected {inputs} x {messages} per random string"),
                });
            }
        }
        Ok(())
    }

    pub fn inputs(&self) -> usize {
        1 << self.n
    }

    pub fn acceptance_counts(&self) -> Vec<Vec<usize>> {
        let k = self.inputs();
        let mut counts = vec![vec![0; k]; k];
        for (al, acc) in self.alice.iter().zip(&self.bob_accept) {
            for x in 0..k {
                for y in 0..k {
                    counts[x][y] += usize::from(acc[y][al[x] as usize]);
                }
            }
        }
        counts
    }
}

/// Per random string `r`, vectors `a[r][x]` and `b[r][y]` with norms at most `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorSystem {
    pub a: Vec<Vec<RealVector>>,
    pub b: Vec<Vec<RealVector>>,
    /// `L²`, kept exact for compiled systems (`2^c`).
    pub norm_bound_sq: f64,
}

impl VectorSystem {
    pub fn validate(&self) -> Result<()> {
        if self.a.is_empty() {
            return Err(Error::Empty("vector system"));
        }
        if self.a.len() != self.b.len() {
            return Err(Error::DimensionMismatch {
                expected: self.a.len(),
                found: self.b.len(),
            });
        }
        if !(self.norm_bound_sq.is_finite() && self.norm_bound_sq > 0.0) {
            return Err(Error::param(format!("norm bound must be positive, got L² = {}", self.norm_bound_sq)));
        }
        let rows = self.a[0].len();
        let cols = self.b[0].len();
        let first = self.a[0].first().or(self.b[0].first()).ok_or(Error::Empty("vector system"))?;
        let dim = first.dim();
        let bound = self.norm_bound();
        for (ar, br) in self.a.iter().zip(&self.b) {
            if ar.len() != rows || br.len() != cols {
                return Err(Error::Shape {
                    what: "vector system",
                    detail: "every random string needs the same number of vectors".into(),
                });
            }
            for v in ar.iter().chain(br) {
                v.validate()?;
                if v.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: v.dim(),
                    });
                }
                if v.norm() > bound + NORM_BOUND_TOL {
                    return Err(Error::NormBoundExceeded { norm: v.norm(), bound });
                }
            }
        }
        Ok(())
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound_sq.sqrt()
    }

    pub fn randomness_len(&self) -> usize {
        self.a.len()
    }

    pub fn rows(&self) -> usize {
        self.a[0].len()
    }

    pub fn cols(&self) -> usize {
        self.b[0].len()
    }

    pub fn dim(&self) -> usize {
        self.a[0].first().or(self.b[0].first()).map_or(0, RealVector::dim)
    }

    /// `P(x,y) = |R|^{-1} Σ_r ⟨a_r(x), b_r(y)⟩`.
    pub fn acceptance_matrix(&self) -> Vec<Vec<f64>> {
        let mut p = vec![vec![0.0; self.cols()]; self.rows()];
        for (ar, br) in self.a.iter().zip(&self.b) {
            for (x, ax) in ar.iter().enumerate() {
                for (y, by) in br.iter().enumerate() {
                    p[x][y] += dot(ax.as_slice(), by.as_slice());
                }
            }
        }
        let r = self.randomness_len() as f64;
        p.iter_mut().flatten().for_each(|v| *v /= r);
        p
    }
}

fn indicator(len: usize, hot: u32) -> RealVector {
    RealVector::basis(len, hot as usize)
}

fn accept_set(bits: impl Iterator<Item = bool>) -> RealVector {
    RealVector::new(bits.map(|b| if b { 1.0 } else { 0.0 }).collect()).expect("message count is at least 2")
}

pub fn compile_one_way(p: &OneWayProtocol) -> Result<VectorSystem> {
    p.validate()?;
    let len = 1usize << p.c;
    let a = p.alice.iter().map(|row| row.iter().map(|&m| indicator(len, m)).collect()).collect();
    let b = p
        .bob_accept
        .iter()
        .map(|rows| rows.iter().map(|acc| accept_set(acc.iter().copied())).collect())
        .collect();
    Ok(VectorSystem {
        a,
        b,
        norm_bound_sq: len as f64,
    })
}

pub fn compile_smp(p: &ClassicalSmpProtocol) -> Result<VectorSystem> {
    p.validate()?;
    let len = 1usize << p.c;
    let a = p.alice.iter().map(|row| row.iter().map(|&m| indicator(len, m)).collect()).collect();
    let b = p
        .bob
        .iter()
        .map(|row| {
            row.iter()
                .map(|&mb| accept_set(p.referee.iter().map(|ra| ra[mb as usize])))
                .collect()
        })
        .collect();
    Ok(VectorSystem {
        a,
        b,
        norm_bound_sq: len as f64,
    })
}

/// `v ⊕ √(L²−‖v‖²)·e_junk`, scaled by `1/L`; `junk` is 0 for Alice's slot, 1 for Bob's.
fn pad(v: &RealVector, l_sq: f64, junk: usize, scale: f64) -> Result<RealVector> {
    let l = l_sq.sqrt();
    let norm = v.norm();
    if norm > l + NORM_BOUND_TOL {
        return Err(Error::NormBoundExceeded { norm, bound: l });
    }
    let w = (l_sq - v.norm_sq()).max(0.0).sqrt();
    let mut out: Vec<f64> = v.as_slice().iter().map(|x| x * scale / l).collect();
    let mut tail = [0.0, 0.0];
    tail[junk] = w * scale / l;
    out.extend_from_slice(&tail);
    RealVector::new(out)
}

/// Unit states for random string `r`: dimension grows by two junk coordinates.
pub fn pad_to_states(v: &VectorSystem, r: usize) -> Result<(Vec<RealVector>, Vec<RealVector>)> {
    v.validate()?;
    if r >= v.randomness_len() {
        return Err(Error::param(format!(
            "random string index {r} out of range for {} strings",
            v.randomness_len()
        )));
    }
    let l_sq = v.norm_bound_sq;
    let alphas = v.a[r].iter().map(|a| pad(a, l_sq, 0, 1.0)).collect::<Result<_>>()?;
    let betas = v.b[r].iter().map(|b| pad(b, l_sq, 1, 1.0)).collect::<Result<_>>()?;
    Ok((alphas, betas))
}

/// How [`assemble_shared_randomness_states`] chooses `(δ0, δ1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// Extremal achieved values of `(P/L²)²` on each side.
    Exact,
    /// Worst case for a protocol with error `ε`: `(ε/L²)²` and `((1−ε)/L²)²`.
    ProtocolError(f64),
}

/// Block states of dimension `|R|·(dim+2)` with `⟨α_x, β_y⟩ = P(x,y)/L²`.
///
/// Pairs with `M = −1` (function value 1) must have the larger `|P|`.
pub fn assemble_shared_randomness_states(
    v: &VectorSystem,
    m: &SignMatrix,
    rule: ThresholdRule,
) -> Result<ThresholdEmbedding> {
    v.validate()?;
    if m.rows() != v.rows() || m.cols() != v.cols() {
        return Err(Error::DimensionMismatch {
            expected: v.rows() * v.cols(),
            found: m.rows() * m.cols(),
        });
    }
    let l_sq = v.norm_bound_sq;
    let p = v.acceptance_matrix();
    let (delta0, delta1) = match rule {
        ThresholdRule::Exact => {
            let mut d0 = 0.0f64;
            let mut d1 = 1.0f64;
            for (x, y, s) in m.nonzero() {
                let q = (p[x][y] / l_sq).powi(2);
                if s > 0 {
                    d0 = d0.max(q);
                } else {
                    d1 = d1.min(q);
                }
            }
            (d0, d1)
        }
        ThresholdRule::ProtocolError(eps) => {
            if !(0.0..0.5).contains(&eps) {
                return Err(Error::param(format!("protocol error must lie in [0, 1/2), got {eps}")));
            }
            ((eps / l_sq).powi(2), ((1.0 - eps) / l_sq).powi(2))
        }
    };
    if delta0 >= delta1 {
        return Err(Error::NotSeparating { delta0, delta1 });
    }

    let blocks = v.randomness_len();
    let block_dim = v.dim() + 2;
    let scale = 1.0 / (blocks as f64).sqrt();
    let stack = |vs: &[Vec<RealVector>], idx: usize, junk: usize| -> Result<RealVector> {
        let mut out = Vec::with_capacity(blocks * block_dim);
        for block in vs {
            out.extend_from_slice(pad(&block[idx], l_sq, junk, scale)?.as_slice());
        }
        RealVector::new(out)
    };
    let alphas = (0..v.rows()).map(|x| stack(&v.a, x, 0)).collect::<Result<Vec<_>>>()?;
    let betas = (0..v.cols()).map(|y| stack(&v.b, y, 1)).collect::<Result<Vec<_>>>()?;
    let e = ThresholdEmbedding::new(alphas, betas, delta0, delta1)?;
    if let Some((row, col)) = verify_threshold_embedding(&e, m)?.first_violation {
        return Err(Error::InvalidEmbedding { row, col });
    }
    Ok(e)
}

/// Asymptotic repetition scale `2^{2c}` for a compiled `c`-bit protocol, constant omitted.
pub fn compiled_repetition_scale(c: u32) -> f64 {
    4f64.powi(c as i32)
}

fn check_reducible(e: &ThresholdEmbedding, m: &SignMatrix) -> Result<()> {
    let rep = verify_threshold_embedding(e, m)?;
    if let Some((row, col)) = rep.first_violation {
        return Err(Error::InvalidEmbedding { row, col });
    }
    if e.gap() < MIN_REDUCTION_GAP {
        return Err(Error::GapTooSmall { gap: e.gap() });
    }
    Ok(())
}

/// Random projection of a threshold embedding to `jl_dimension(|X|+|Y|+1, gap/10)`.
///
/// See [`reduce_embedding_dimension_to`].
pub fn reduce_embedding_dimension(e: &ThresholdEmbedding, m: &SignMatrix, seed: Seed) -> Result<ThresholdEmbedding> {
    check_reducible(e, m)?;
    let count = e.alphas().len() + e.betas().len();
    let target = jl_dimension(count + 1, e.gap() / 10.0)?;
    reduce_embedding_dimension_to(e, m, target, seed)
}

/// Projects all vectors to `target` dimensions, re-pads them to unit norm with
/// two junk coordinates at the largest projected norm `L'`, and claims
/// thresholds `(δ0 + gap/4, δ1 − gap/4)`.
///
/// Returns the input unchanged when `target + 2` does not reduce the dimension.
/// Seeds `seed.derive(0..)` are tried until the result verifies.
pub fn reduce_embedding_dimension_to(
    e: &ThresholdEmbedding,
    m: &SignMatrix,
    target: usize,
    seed: Seed,
) -> Result<ThresholdEmbedding> {
    check_reducible(e, m)?;
    if target == 0 {
        return Err(Error::param("target dimension must be at least 1"));
    }
    if target + 2 >= e.dim() {
        return Ok(e.clone());
    }
    let quarter = e.gap() / 4.0;
    let (d0, d1) = (e.delta0() + quarter, e.delta1() - quarter);
    let all: Vec<RealVector> = e.alphas().iter().chain(e.betas()).cloned().collect();
    let rows = e.alphas().len();
    for attempt in 0..PROJECTION_RETRIES {
        let projected = project_vectors(&all, target, seed.derive(attempt as u64))?;
        let l_sq = projected.iter().map(RealVector::norm_sq).fold(0.0, f64::max);
        if !(l_sq > 0.0) {
            continue;
        }
        let (pa, pb) = projected.split_at(rows);
        let alphas = pa.iter().map(|v| pad(v, l_sq, 0, 1.0)).collect::<Result<Vec<_>>>()?;
        let betas = pb.iter().map(|v| pad(v, l_sq, 1, 1.0)).collect::<Result<Vec<_>>>()?;
        let candidate = ThresholdEmbedding::new(alphas, betas, d0, d1)?;
        if verify_threshold_embedding(&candidate, m)?.valid {
            return Ok(candidate);
        }
    }
    Err(Error::RetriesExhausted {
        attempts: PROJECTION_RETRIES,
    })
}

/// Half-width of the fixed-point range used by [`classical_projection_protocol`].
pub const QUANT_RANGE: f64 = 8.0;

/// Round to the nearest multiple of `QUANT_RANGE / 2^{bits−1}`, clipped to `±QUANT_RANGE`.
fn quantize(v: f64, bits: u32) -> f64 {
    let levels = 2f64.powi(bits as i32 - 1);
    let max_code = levels - 1.0;
    let code = (v * levels / QUANT_RANGE).round().clamp(-max_code, max_code);
    code * QUANT_RANGE / levels
}

/// Classical estimate of `⟨α_x, β_y⟩` from `k`-dimensional projections.
///
/// Each repetition draws a shared `k × D` Gaussian map scaled by `1/√k` from
/// `seed.derive(rep)`, quantizes both images to `precision_bits`-bit fixed point
/// and takes their inner product. The mean over repetitions is returned.
pub fn classical_projection_protocol(
    e: &ThresholdEmbedding,
    pair: (usize, usize),
    k: usize,
    reps: usize,
    precision_bits: u32,
    seed: Seed,
) -> Result<f64> {
    let (x, y) = pair;
    if k == 0 || reps == 0 {
        return Err(Error::param("projection dimension and repetitions must be at least 1"));
    }
    if !(2..=52).contains(&precision_bits) {
        return Err(Error::param(format!("precision must lie in [2, 52] bits, got {precision_bits}")));
    }
    let (alpha, beta) = match (e.alphas().get(x), e.betas().get(y)) {
        (Some(a), Some(b)) => (a.as_slice(), b.as_slice()),
        _ => return Err(Error::param(format!("pair ({x}, {y}) outside the embedding"))),
    };
    let scale = 1.0 / (k as f64).sqrt();
    let mut total = 0.0;
    let mut row = vec![0.0; alpha.len()];
    for rep in 0..reps {
        let mut rng = seed.derive(rep as u64).rng();
        let mut ip = 0.0;
        for _ in 0..k {
            row.iter_mut().for_each(|g| *g = scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng));
            let pa = quantize(dot(&row, alpha), precision_bits);
            let pb = quantize(dot(&row, beta), precision_bits);
            ip += pa * pb;
        }
        total += ip;
    }
    Ok(total / reps as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::test_support::{eq_sign, orthonormal_eq_embedding, random_unit};
    use crate::problems::{eq_matrix, eq_parity_protocol};

    fn parity(v: u64) -> u32 {
        v.count_ones() & 1
    }

    fn constant_one_way(n: u32, accept: bool) -> OneWayProtocol {
        let k = 1usize << n;
        OneWayProtocol {
            n,
            c: 1,
            randomness: vec![0, 1],
            alice: vec![(0..k as u32).map(|x| x & 1).collect(); 2],
            bob_accept: vec![vec![vec![accept; 2]; k]; 2],
        }
    }

    /// Bob accepts iff Alice's bit equals `⟨y, r⟩`.
    fn parity_one_way(n: u32) -> OneWayProtocol {
        let k = 1u64 << n;
        let randomness: Vec<u64> = (0..k).collect();
        OneWayProtocol {
            n,
            c: 1,
            alice: randomness.iter().map(|&r| (0..k).map(|x| parity(x & r)).collect()).collect(),
            bob_accept: randomness
                .iter()
                .map(|&r| (0..k).map(|y| (0..2).map(|m| m == parity(y & r)).collect()).collect())
                .collect(),
            randomness,
        }
    }

    fn assert_p_matches_counts(v: &VectorSystem, counts: &[Vec<usize>], r: usize) {
        let p = v.acceptance_matrix();
        for (prow, crow) in p.iter().zip(counts) {
            for (&pv, &c) in prow.iter().zip(crow) {
                assert_eq!(pv, c as f64 / r as f64);
            }
        }
    }

    #[test]
    fn trivial_one_way_protocols() {
        for accept in [true, false] {
            let p = constant_one_way(2, accept);
            let v = compile_one_way(&p).unwrap();
            assert_eq!(v.norm_bound_sq, 2.0);
            let expect = if accept { 1.0 } else { 0.0 };
            for row in v.acceptance_matrix() {
                assert!(row.iter().all(|&q| q == expect));
            }
            for (ar, br) in v.a.iter().zip(&v.b) {
                for a in ar {
                    assert_eq!(a.norm(), 1.0);
                    for b in br {
                        assert_eq!(a.inner(b).unwrap(), expect);
                    }
                }
            }
        }
    }

    #[test]
    fn parity_one_way_acceptance() {
        for n in 1..=4 {
            let p = parity_one_way(n);
            let v = compile_one_way(&p).unwrap();
            let k = 1usize << n;
            assert_p_matches_counts(&v, &p.acceptance_counts(), k);
            let acc = v.acceptance_matrix();
            for x in 0..k {
                for y in 0..k {
                    assert_eq!(acc[x][y], if x == y { 1.0 } else { 0.5 });
                }
            }
        }
    }

    #[test]
    fn smp_and_one_way_agree() {
        for n in 1..=4 {
            let smp = eq_parity_protocol(n).unwrap();
            let v1 = compile_smp(&smp).unwrap();
            let v2 = compile_one_way(&smp.to_one_way()).unwrap();
            let v3 = compile_one_way(&parity_one_way(n)).unwrap();
            assert_eq!(v1, v2);
            assert_eq!(v1.acceptance_matrix(), v3.acceptance_matrix());
            assert_p_matches_counts(&v1, &smp.acceptance_counts(), 1 << n);
        }
    }

    #[test]
    fn referee_always_accepts() {
        let mut p = eq_parity_protocol(2).unwrap();
        p.referee = vec![vec![true; 2]; 2];
        let v = compile_smp(&p).unwrap();
        assert!(v.acceptance_matrix().iter().flatten().all(|&q| q == 1.0));
    }

    #[test]
    fn protocol_validation() {
        let mut p = eq_parity_protocol(2).unwrap();
        p.alice[0][1] = 2;
        assert!(matches!(compile_smp(&p), Err(Error::Shape { .. })));
        let mut p = eq_parity_protocol(2).unwrap();
        p.randomness.clear();
        assert!(p.validate().is_err());
        let mut p = eq_parity_protocol(2).unwrap();
        p.referee.pop();
        assert!(p.validate().is_err());
        let mut q = parity_one_way(2);
        q.bob_accept[0][0].push(true);
        assert!(q.validate().is_err());
    }

    fn single(a: Vec<f64>, b: Vec<f64>, l_sq: f64) -> VectorSystem {
        VectorSystem {
            a: vec![vec![RealVector::new(a).unwrap()]],
            b: vec![vec![RealVector::new(b).unwrap()]],
            norm_bound_sq: l_sq,
        }
    }

    #[test]
    fn padding_examples() {
        let (al, be) = pad_to_states(&single(vec![1.0, 0.0], vec![0.0, 1.0], 4.0), 0).unwrap();
        assert_eq!(al[0].dim(), 4);
        assert!(al[0].is_unit(1e-12) && be[0].is_unit(1e-12));
        assert_eq!(al[0].inner(&be[0]).unwrap(), 0.0);

        let (al, be) = pad_to_states(&single(vec![2.0, 0.0], vec![2.0, 0.0], 4.0), 0).unwrap();
        assert_eq!(al[0].as_slice(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(be[0].as_slice(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(al[0].inner(&be[0]).unwrap(), 1.0);

        let err = pad_to_states(&single(vec![3.0, 0.0], vec![0.0, 1.0], 4.0), 0);
        assert!(matches!(err, Err(Error::NormBoundExceeded { .. })));
        assert!(pad_to_states(&single(vec![1.0, 0.0], vec![0.0, 1.0], 4.0), 1).is_err());
    }

    #[test]
    fn padding_preserves_scaled_inner_products() {
        let mut rng = Seed(11).rng();
        for _ in 0..50 {
            let a = random_unit(&mut rng, 5).scaled(1.7);
            let b = random_unit(&mut rng, 5).scaled(0.4);
            let raw = a.inner(&b).unwrap();
            let v = single(a.into_inner(), b.into_inner(), 3.0);
            let (al, be) = pad_to_states(&v, 0).unwrap();
            assert!((al[0].inner(&be[0]).unwrap() * 3.0 - raw).abs() < 1e-12);
            assert!(al[0].is_unit(1e-12) && be[0].is_unit(1e-12));
        }
    }

    #[test]
    fn parity_eq_padding_per_string() {
        let v = compile_smp(&eq_parity_protocol(3).unwrap()).unwrap();
        for r in 0..8 {
            let (al, be) = pad_to_states(&v, r).unwrap();
            for x in 0..8 {
                for y in 0..8 {
                    let ip = al[x].inner(&be[y]).unwrap();
                    let bit = (x as u64 & r as u64).count_ones() & 1 == (y as u64 & r as u64).count_ones() & 1;
                    assert!((ip - if bit { 0.5 } else { 0.0 }).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn parity_eq_assembly() {
        for n in 1..=4u32 {
            let v = compile_smp(&eq_parity_protocol(n).unwrap()).unwrap();
            let m = eq_matrix(n).unwrap();
            let e = assemble_shared_randomness_states(&v, &m, ThresholdRule::Exact).unwrap();
            assert_eq!(e.delta0(), 1.0 / 16.0);
            assert_eq!(e.delta1(), 0.25);
            assert_eq!(e.dim(), (1 << n) * 4);
            assert!(e.alphas().iter().chain(e.betas()).all(|v| v.is_unit(1e-9)));
            assert!(verify_threshold_embedding(&e, &m).unwrap().valid);
            for x in 0..1usize << n {
                for y in 0..1usize << n {
                    let ip = e.alphas()[x].inner(&e.betas()[y]).unwrap();
                    assert!((ip - if x == y { 0.5 } else { 0.25 }).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn single_block_assembly_is_padding() {
        let v = single(vec![1.0, 0.0], vec![1.0, 0.0], 2.0);
        let m = SignMatrix::new(1, 1, vec![-1]).unwrap();
        let e = assemble_shared_randomness_states(&v, &m, ThresholdRule::Exact).unwrap();
        let (al, be) = pad_to_states(&v, 0).unwrap();
        assert_eq!(e.alphas(), &al[..]);
        assert_eq!(e.betas(), &be[..]);
    }

    #[test]
    fn assembly_refuses_non_separating_system() {
        let v = compile_one_way(&constant_one_way(1, true)).unwrap();
        let m = eq_sign(2);
        assert!(matches!(
            assemble_shared_randomness_states(&v, &m, ThresholdRule::Exact),
            Err(Error::NotSeparating { .. })
        ));
    }

    #[test]
    fn theorem_bound_thresholds() {
        let smp = eq_parity_protocol(2).unwrap();
        let v = compile_smp(&smp).unwrap();
        let m = eq_matrix(2).unwrap();
        // One-sided error 1/2 on unequal inputs gives no worst-case separation.
        assert!(assemble_shared_randomness_states(&v, &m, ThresholdRule::ProtocolError(0.5)).is_err());
        // Claiming error 1/3 is contradicted by the actual P = 1/2.
        assert!(matches!(
            assemble_shared_randomness_states(&v, &m, ThresholdRule::ProtocolError(1.0 / 3.0)),
            Err(Error::InvalidEmbedding { .. })
        ));
        assert_eq!(compiled_repetition_scale(1), 4.0);
    }

    #[test]
    fn reduction_noop_and_guards() {
        let v = compile_smp(&eq_parity_protocol(4).unwrap()).unwrap();
        let m = eq_matrix(4).unwrap();
        let e = assemble_shared_randomness_states(&v, &m, ThresholdRule::Exact).unwrap();
        assert_eq!(e.dim(), 64);
        let r = reduce_embedding_dimension(&e, &m, Seed(0)).unwrap();
        assert!(verify_threshold_embedding(&r, &m).unwrap().valid);
        assert_eq!(r, e);
        assert_eq!(reduce_embedding_dimension_to(&e, &m, 64, Seed(0)).unwrap(), e);

        let a = RealVector::new(vec![1.0, 0.0]).unwrap();
        let b = RealVector::new(vec![(1.0f64 - 1e-8).sqrt(), (1e-8f64).sqrt()]).unwrap();
        let tiny = ThresholdEmbedding::new(vec![a], vec![b], 1.0 - 2e-7, 1.0 - 1e-7).unwrap();
        let m1 = SignMatrix::new(1, 1, vec![-1]).unwrap();
        assert!(matches!(
            reduce_embedding_dimension(&tiny, &m1, Seed(0)),
            Err(Error::GapTooSmall { .. })
        ));
    }

    #[test]
    fn reduction_projects_high_dimensional_embedding() {
        let n = 2;
        let big = 4000;
        let base = orthonormal_eq_embedding(n);
        let pad_out = |v: &RealVector| {
            let mut w = v.as_slice().to_vec();
            w.resize(big, 0.0);
            RealVector::new(w).unwrap()
        };
        let e = ThresholdEmbedding::new(
            base.alphas().iter().map(pad_out).collect(),
            base.betas().iter().map(pad_out).collect(),
            0.0,
            1.0,
        )
        .unwrap();
        let m = eq_sign(n);
        let r = reduce_embedding_dimension_to(&e, &m, 2000, Seed(7)).unwrap();
        assert_eq!(r.dim(), 2002);
        assert_eq!((r.delta0(), r.delta1()), (0.25, 0.75));
        assert!(verify_threshold_embedding(&r, &m).unwrap().valid);
        assert_eq!(r, reduce_embedding_dimension_to(&e, &m, 2000, Seed(7)).unwrap());
    }

    #[test]
    fn quantizer() {
        assert_eq!(quantize(0.0, 16), 0.0);
        assert_eq!(quantize(100.0, 4), QUANT_RANGE * 7.0 / 8.0);
        assert_eq!(quantize(-100.0, 4), -QUANT_RANGE * 7.0 / 8.0);
        assert!((quantize(0.123456, 16) - 0.123456).abs() <= QUANT_RANGE / 32768.0 / 2.0);
    }

    #[test]
    fn projection_protocol_examples() {
        let e = orthonormal_eq_embedding(3);
        let same = classical_projection_protocol(&e, (1, 1), 4, 800, 16, Seed(0)).unwrap();
        assert!((same - 1.0).abs() < 0.1, "{same}");
        let orth = classical_projection_protocol(&e, (0, 2), 4, 800, 16, Seed(0)).unwrap();
        assert!(orth.abs() < 0.1, "{orth}");
        assert_eq!(same, classical_projection_protocol(&e, (1, 1), 4, 800, 16, Seed(0)).unwrap());
        assert!(classical_projection_protocol(&e, (3, 0), 4, 10, 16, Seed(0)).is_err());
        assert!(classical_projection_protocol(&e, (0, 0), 0, 10, 16, Seed(0)).is_err());
        assert!(classical_projection_protocol(&e, (0, 0), 4, 0, 16, Seed(0)).is_err());
    }

    #[test]
    fn projection_protocol_unbiased() {
        let mut rng = Seed(21).rng();
        let a = random_unit(&mut rng, 12);
        let b = random_unit(&mut rng, 12);
        let truth = a.inner(&b).unwrap();
        let e = ThresholdEmbedding::new(vec![a], vec![b], 0.0, 1.0).unwrap();
        let samples: Vec<f64> = (0..500)
            .map(|s| classical_projection_protocol(&e, (0, 0), 4, 1, 16, Seed(s)).unwrap())
            .collect();
        let mean = samples.iter().sum::<f64>() / 500.0;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 499.0;
        assert!((mean - truth).abs() < 5.0 * (var / 500.0).sqrt());
    }
}
