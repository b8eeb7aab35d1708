//! Sign matrices, threshold embeddings and margin realizations.
//!
//! A threshold embedding bounds the *squared* inner product of fingerprint
//! pairs (`≤ delta0` on 0-inputs, `≥ delta1` on 1-inputs); a realization bounds
//! the *signed* inner product (`≥ gamma` on 0-inputs, `≤ −gamma` on 1-inputs).
//! The two convert into each other exactly:
//!
//! * embedding → realization: `α' = (√a, √(1−a)·α⊗α)`, `β' = (√a, −√(1−a)·β⊗β)`
//!   with `a = (δ1+δ0)/(2+δ1+δ0)`, giving margin `(δ1−δ0)/(2+δ1+δ0)`;
//! * realization → embedding: `α' = (1, α)/√2`, `β' = (1, −β)/√2` with
//!   `δ0 = (1−γ)²/4`, `δ1 = (1+γ)²/4`.

use serde::{Deserialize, Serialize};

use crate::linalg::{dot, RealMatrix, RealVector};
use crate::projections::{jl_dimension, project_vectors};
use crate::{Error, Result, Seed, VERIFY_TOL};

/// Unit-norm slack accepted on stored fingerprint vectors.
pub const UNIT_TOL: f64 = 1e-9;

/// Largest input dimension accepted by [`embed_to_realization`] (output is `d² + 1`).
pub const TENSOR_DIM_CAP: usize = 64;

/// Attempts made by [`reduce_realization_dimension`] before giving up.
pub const PROJECTION_RETRIES: usize = 20;

/// `M[x][y] = (−1)^f(x,y)` on the promise, 0 outside it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<i8>,
}

impl SignMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<i8>) -> Result<Self> {
        let m = SignMatrix {
            rows,
            cols,
            entries,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> i8) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows * cols);
        for x in 0..rows {
            for y in 0..cols {
                entries.push(f(x, y));
            }
        }
        Self::new(rows, cols, entries)
    }

    /// Total sign matrix of a Boolean function: `+1` where `f = 0`, `−1` where `f = 1`.
    pub fn from_boolean(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        Self::from_fn(rows, cols, |x, y| if f(x, y) { -1 } else { 1 })
    }

    pub fn from_rows(rows: &[Vec<i8>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::DimensionMismatch {
                expected: c,
                found: bad.len(),
            });
        }
        Self::new(r, c, rows.concat())
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Empty("sign matrix"));
        }
        if self.rows * self.cols != self.entries.len() {
            return Err(Error::Shape {
                what: "sign matrix",
                detail: format!(
                    "{}x{} requires {} entries, found {}",
                    self.rows,
                    self.cols,
                    self.rows * self.cols,
                    self.entries.len()
                ),
            });
        }
        if let Some(bad) = self.entries.iter().find(|e| !matches!(e, -1..=1)) {
            return Err(Error::Shape {
                what: "sign matrix",
                detail: format!("entry {bad} not in {{-1, 0, 1}}"),
            });
        }
        if self.entries.iter().all(|&e| e == 0) {
            return Err(Error::Shape {
                what: "sign matrix",
                detail: "all entries are 0 (empty promise)".into(),
            });
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, x: usize, y: usize) -> i8 {
        self.entries[x * self.cols + y]
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    /// First promise-excluded position, if any.
    pub fn first_zero(&self) -> Option<(usize, usize)> {
        self.entries
            .iter()
            .position(|&e| e == 0)
            .map(|i| (i / self.cols, i % self.cols))
    }

    pub fn is_total(&self) -> bool {
        self.first_zero().is_none()
    }

    /// `(x, y, sign)` for every entry inside the promise.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, i8)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, &e)| e != 0)
            .map(|(i, &e)| (i / self.cols, i % self.cols, e))
    }

    pub fn to_real(&self) -> RealMatrix {
        RealMatrix::new(
            self.rows,
            self.cols,
            self.entries.iter().map(|&e| f64::from(e)).collect(),
        )
        .expect("validated sign matrix is a valid real matrix")
    }

    pub fn transpose(&self) -> SignMatrix {
        SignMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i)).expect("transpose of valid matrix")
    }

    /// Rows and columns reordered: `out[i][j] = self[row_perm[i]][col_perm[j]]`.
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> Result<SignMatrix> {
        if row_perm.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: row_perm.len(),
            });
        }
        if col_perm.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: col_perm.len(),
            });
        }
        SignMatrix::from_fn(self.rows, self.cols, |i, j| self.get(row_perm[i], col_perm[j]))
    }

    /// Square, `−1` on the diagonal, `+1` elsewhere.
    pub fn is_equality_shaped(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|x| (0..self.cols).all(|y| self.get(x, y) == if x == y { -1 } else { 1 }))
    }
}

fn check_vector_list(vectors: &[RealVector], what: &'static str) -> Result<usize> {
    let first = vectors.first().ok_or(Error::Empty(what))?;
    let dim = first.dim();
    for v in vectors {
        v.validate()?;
        if v.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.dim(),
            });
        }
    }
    Ok(dim)
}

fn check_unit(vectors: &[RealVector], side: &str) -> Result<()> {
    for (i, v) in vectors.iter().enumerate() {
        if !v.is_unit(UNIT_TOL) {
            return Err(Error::NotUnit {
                which: format!("{side}[{i}]"),
                norm: v.norm(),
            });
        }
    }
    Ok(())
}

fn check_against(alphas: &[RealVector], betas: &[RealVector], m: &SignMatrix) -> Result<()> {
    if alphas.len() != m.rows() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            found: alphas.len(),
        });
    }
    if betas.len() != m.cols() {
        return Err(Error::DimensionMismatch {
            expected: m.cols(),
            found: betas.len(),
        });
    }
    let da = check_vector_list(alphas, "alpha vectors")?;
    let db = check_vector_list(betas, "beta vectors")?;
    if da != db {
        return Err(Error::DimensionMismatch {
            expected: da,
            found: db,
        });
    }
    Ok(())
}

/// Unit vectors `α_x`, `β_y` with squared inner products `≤ delta0` on
/// 0-inputs and `≥ delta1` on 1-inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEmbedding {
    alphas: Vec<RealVector>,
    betas: Vec<RealVector>,
    delta0: f64,
    delta1: f64,
}

impl ThresholdEmbedding {
    pub fn new(alphas: Vec<RealVector>, betas: Vec<RealVector>, delta0: f64, delta1: f64) -> Result<Self> {
        let e = ThresholdEmbedding {
            alphas,
            betas,
            delta0,
            delta1,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        let da = check_vector_list(&self.alphas, "alpha vectors")?;
        let db = check_vector_list(&self.betas, "beta vectors")?;
        if da != db {
            return Err(Error::DimensionMismatch {
                expected: da,
                found: db,
            });
        }
        check_unit(&self.alphas, "alpha")?;
        check_unit(&self.betas, "beta")?;
        let (d0, d1) = (self.delta0, self.delta1);
        if !(d0.is_finite() && d1.is_finite() && 0.0 <= d0 && d0 < d1 && d1 <= 1.0) {
            return Err(Error::ThresholdOrder {
                delta0: d0,
                delta1: d1,
            });
        }
        Ok(())
    }

    pub fn alphas(&self) -> &[RealVector] {
        &self.alphas
    }

    pub fn betas(&self) -> &[RealVector] {
        &self.betas
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    pub fn delta1(&self) -> f64 {
        self.delta1
    }

    pub fn gap(&self) -> f64 {
        self.delta1 - self.delta0
    }

    pub fn dim(&self) -> usize {
        self.alphas[0].dim()
    }
}

/// Unit vectors with signed inner products `≥ gamma` on 0-inputs and `≤ −gamma` on 1-inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    alphas: Vec<RealVector>,
    betas: Vec<RealVector>,
    gamma: f64,
}

impl Realization {
    pub fn new(alphas: Vec<RealVector>, betas: Vec<RealVector>, gamma: f64) -> Result<Self> {
        let r = Realization {
            alphas,
            betas,
            gamma,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let da = check_vector_list(&self.alphas, "alpha vectors")?;
        let db = check_vector_list(&self.betas, "beta vectors")?;
        if da != db {
            return Err(Error::DimensionMismatch {
                expected: da,
                found: db,
            });
        }
        check_unit(&self.alphas, "alpha")?;
        check_unit(&self.betas, "beta")?;
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::param(format!("margin must lie in (0, 1], got {}", self.gamma)));
        }
        Ok(())
    }

    pub fn alphas(&self) -> &[RealVector] {
        &self.alphas
    }

    pub fn betas(&self) -> &[RealVector] {
        &self.betas
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.alphas[0].dim()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub valid: bool,
    /// Every vector unit-norm within [`UNIT_TOL`].
    pub unit_norms: bool,
    /// Largest `⟨α_x, β_y⟩²` over pairs with `M = +1`.
    pub worst_zero_side: Option<f64>,
    /// Smallest `⟨α_x, β_y⟩²` over pairs with `M = −1`.
    pub worst_one_side: Option<f64>,
    /// First pair (row-major) violating its threshold.
    pub first_violation: Option<(usize, usize)>,
}

/// Checks the threshold inequalities with slack [`VERIFY_TOL`]; promise-excluded pairs are skipped.
///
/// Works on whatever vectors the embedding holds, so a corrupted document can
/// be diagnosed; non-unit vectors make the report invalid.
pub fn verify_threshold_embedding(e: &ThresholdEmbedding, m: &SignMatrix) -> Result<ThresholdReport> {
    check_threshold_vectors(&e.alphas, &e.betas, e.delta0, e.delta1, m)
}

pub fn check_threshold_vectors(
    alphas: &[RealVector],
    betas: &[RealVector],
    delta0: f64,
    delta1: f64,
    m: &SignMatrix,
) -> Result<ThresholdReport> {
    check_against(alphas, betas, m)?;
    let unit_norms = alphas.iter().chain(betas).all(|v| v.is_unit(UNIT_TOL));
    let mut worst_zero: Option<f64> = None;
    let mut worst_one: Option<f64> = None;
    let mut first_violation = None;
    for (x, y, s) in m.nonzero() {
        let ip = dot(alphas[x].as_slice(), betas[y].as_slice());
        let sq = ip * ip;
        let ok = if s > 0 {
            worst_zero = Some(worst_zero.map_or(sq, |w| w.max(sq)));
            sq <= delta0 + VERIFY_TOL
        } else {
            worst_one = Some(worst_one.map_or(sq, |w| w.min(sq)));
            sq >= delta1 - VERIFY_TOL
        };
        if !ok && first_violation.is_none() {
            first_violation = Some((x, y));
        }
    }
    Ok(ThresholdReport {
        valid: unit_norms && first_violation.is_none(),
        unit_norms,
        worst_zero_side: worst_zero,
        worst_one_side: worst_one,
        first_violation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationReport {
    pub valid: bool,
    pub unit_norms: bool,
    /// `min M_xy·⟨α_x, β_y⟩` over the promise.
    pub achieved_margin: f64,
    /// Pair attaining `achieved_margin`.
    pub worst_pair: (usize, usize),
}

pub fn verify_realization(r: &Realization, m: &SignMatrix) -> Result<RealizationReport> {
    check_realization_vectors(&r.alphas, &r.betas, r.gamma, m)
}

pub fn check_realization_vectors(
    alphas: &[RealVector],
    betas: &[RealVector],
    gamma: f64,
    m: &SignMatrix,
) -> Result<RealizationReport> {
    check_against(alphas, betas, m)?;
    let unit_norms = alphas.iter().chain(betas).all(|v| v.is_unit(UNIT_TOL));
    let (achieved, worst) = achieved_margin(alphas, betas, m);
    Ok(RealizationReport {
        valid: unit_norms && achieved >= gamma - VERIFY_TOL,
        unit_norms,
        achieved_margin: achieved,
        worst_pair: worst,
    })
}

/// `min M_xy ⟨α_x, β_y⟩` over nonzero entries, with the minimizing pair. Shapes are not checked.
pub(crate) fn achieved_margin(alphas: &[RealVector], betas: &[RealVector], m: &SignMatrix) -> (f64, (usize, usize)) {
    let mut best = f64::INFINITY;
    let mut at = (0, 0);
    for (x, y, s) in m.nonzero() {
        let z = f64::from(s) * dot(alphas[x].as_slice(), betas[y].as_slice());
        if z < best {
            best = z;
            at = (x, y);
        }
    }
    (best, at)
}

/// Margin `(δ1−δ0)/(2+δ1+δ0)` obtained by [`embed_to_realization`].
pub fn embedding_margin(delta0: f64, delta1: f64) -> f64 {
    (delta1 - delta0) / (2.0 + delta1 + delta0)
}

/// Thresholds `((1−γ)²/4, (1+γ)²/4)` obtained by [`realization_to_embedding`].
pub fn realization_thresholds(gamma: f64) -> (f64, f64) {
    ((1.0 - gamma).powi(2) / 4.0, (1.0 + gamma).powi(2) / 4.0)
}

/// Threshold embedding in dimension `d` → realization in dimension `d² + 1`.
pub fn embed_to_realization(e: &ThresholdEmbedding) -> Result<Realization> {
    let d = e.dim();
    if d > TENSOR_DIM_CAP {
        return Err(Error::TooLarge {
            what: "embedding dimension for tensor squaring",
            got: d,
            limit: TENSOR_DIM_CAP,
        });
    }
    let (d0, d1) = (e.delta0, e.delta1);
    let a = (d1 + d0) / (2.0 + d1 + d0);
    let gamma = embedding_margin(d0, d1);
    let head = a.sqrt();
    let tail = (1.0 - a).sqrt();
    // Inputs are unit within UNIT_TOL; renormalizing first keeps outputs unit to rounding.
    let lift = |v: &RealVector, sign: f64| -> Result<RealVector> {
        let u = v.normalized()?;
        let sq = u.tensor(&u).scaled(sign * tail);
        let mut out = Vec::with_capacity(d * d + 1);
        out.push(head);
        out.extend_from_slice(sq.as_slice());
        RealVector::new(out)
    };
    let alphas = e.alphas.iter().map(|v| lift(v, 1.0)).collect::<Result<_>>()?;
    let betas = e.betas.iter().map(|v| lift(v, -1.0)).collect::<Result<_>>()?;
    Realization::new(alphas, betas, gamma)
}

/// Realization in dimension `d` → threshold embedding in dimension `d + 1`.
pub fn realization_to_embedding(r: &Realization) -> Result<ThresholdEmbedding> {
    let (d0, d1) = realization_thresholds(r.gamma);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let lift = |v: &RealVector, sign: f64| -> Result<RealVector> {
        let u = v.normalized()?;
        let mut out = Vec::with_capacity(u.dim() + 1);
        out.push(s);
        out.extend(u.as_slice().iter().map(|x| sign * s * x));
        RealVector::new(out)
    };
    let alphas = r.alphas.iter().map(|v| lift(v, 1.0)).collect::<Result<_>>()?;
    let betas = r.betas.iter().map(|v| lift(v, -1.0)).collect::<Result<_>>()?;
    ThresholdEmbedding::new(alphas, betas, d0, d1)
}

/// Random projection of a realization valid for `m` down to
/// `jl_dimension(|X| + |Y| + 1, γ/4)` dimensions, renormalized, claiming margin `γ/2`.
///
/// Returns the input unchanged when the target is not smaller than the current
/// dimension. Seeds `seed.derive(0..)` are tried in turn until the projected
/// realization verifies at `γ/2`.
pub fn reduce_realization_dimension(r: &Realization, m: &SignMatrix, seed: Seed) -> Result<Realization> {
    let count = r.alphas.len() + r.betas.len();
    let target = jl_dimension(count + 1, r.gamma / 4.0)?;
    reduce_realization_dimension_to(r, m, target, seed)
}

/// As [`reduce_realization_dimension`] with an explicit target dimension.
pub fn reduce_realization_dimension_to(
    r: &Realization,
    m: &SignMatrix,
    target: usize,
    seed: Seed,
) -> Result<Realization> {
    let report = verify_realization(r, m)?;
    if !report.valid {
        return Err(Error::InvalidRealization {
            achieved: report.achieved_margin,
            claimed: r.gamma,
        });
    }
    if target == 0 {
        return Err(Error::param("target dimension must be at least 1"));
    }
    if target >= r.dim() {
        return Ok(r.clone());
    }
    let half = r.gamma / 2.0;
    let all: Vec<RealVector> = r.alphas.iter().chain(&r.betas).cloned().collect();
    for attempt in 0..PROJECTION_RETRIES {
        let projected = project_vectors(&all, target, seed.derive(attempt as u64))?;
        let Ok(normalized) = projected.iter().map(RealVector::normalized).collect::<Result<Vec<_>>>() else {
            continue;
        };
        let (alphas, betas) = normalized.split_at(r.alphas.len());
        let candidate = Realization::new(alphas.to_vec(), betas.to_vec(), half)?;
        if verify_realization(&candidate, m)?.valid {
            return Ok(candidate);
        }
    }
    Err(Error::RetriesExhausted {
        attempts: PROJECTION_RETRIES,
    })
}
