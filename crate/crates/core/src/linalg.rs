//! Dense real vectors and matrices.
//!
//! Only what the margin bounds and fingerprint constructions need: inner
//! products, normalization, the largest singular value, and the ℓ∞→ℓ1 norm.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A finite, non-empty real vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RealVector(Vec<f64>);

impl RealVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        let v = RealVector(entries);
        v.validate()?;
        Ok(v)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "vector dimension must be at least 1");
        RealVector(vec![0.0; dim])
    }

    /// Standard basis vector `e_index` in `dim` dimensions.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[index] = 1.0;
        v
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::Empty("vector"));
        }
        if self.0.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("vector"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn inner(&self, other: &RealVector) -> Result<f64> {
        inner(self, other)
    }

    pub fn scaled(&self, factor: f64) -> RealVector {
        RealVector(self.0.iter().map(|x| x * factor).collect())
    }

    pub fn normalized(&self) -> Result<RealVector> {
        normalize(self)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn tensor(&self, other: &RealVector) -> RealVector {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.0 {
            out.extend(other.0.iter().map(|b| a * b));
        }
        RealVector(out)
    }

    /// `self` followed by `extra`.
    pub fn concat(&self, extra: &[f64]) -> RealVector {
        let mut out = self.0.clone();
        out.extend_from_slice(extra);
        RealVector(out)
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }
}

impl From<RealVector> for Vec<f64> {
    fn from(v: RealVector) -> Self {
        v.0
    }
}

impl std::ops::Index<usize> for RealVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Standard dot product.
pub fn inner(u: &RealVector, v: &RealVector) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: v.dim(),
        });
    }
    Ok(dot(&u.0, &v.0))
}

pub fn normalize(v: &RealVector) -> Result<RealVector> {
    let n = v.norm();
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(v.scaled(1.0 / n))
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl RealMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        let m = RealMatrix {
            rows,
            cols,
            entries,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
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

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::new(rows, cols, entries)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Empty("matrix"));
        }
        if self.rows * self.cols != self.entries.len() {
            return Err(Error::Shape {
                what: "matrix",
                detail: format!(
                    "{}x{} requires {} entries, found {}",
                    self.rows,
                    self.cols,
                    self.rows * self.cols,
                    self.entries.len()
                ),
            });
        }
        if self.entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn transpose(&self) -> RealMatrix {
        let mut entries = vec![0.0; self.entries.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                entries[j * self.rows + i] = self.get(i, j);
            }
        }
        RealMatrix {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    /// `M v` for `v` of length `cols`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `Mᵀ u` for `u` of length `rows`.
    pub fn mul_t_vec(&self, u: &[f64]) -> Vec<f64> {
        debug_assert_eq!(u.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &ui) in u.iter().enumerate() {
            if ui == 0.0 {
                continue;
            }
            for (o, m) in out.iter_mut().zip(self.row(i)) {
                *o += ui * m;
            }
        }
        out
    }
}

/// Iteration cap for [`operator_norm`].
pub const POWER_ITERATION_CAP: usize = 10_000;

/// Default relative tolerance for [`operator_norm`].
pub const DEFAULT_NORM_TOL: f64 = 1e-9;

/// Largest singular value of `m`, by power iteration on `MᵀM`.
///
/// Iteration starts from the normalized all-ones vector and stops once the
/// eigen-residual `‖MᵀM v − ρ v‖` drops below `tol·ρ`, where `ρ` is the
/// Rayleigh quotient. The all-ones start can be orthogonal to the top singular
/// subspace (any sign matrix with balanced columns, for instance), so a second
/// fixed, non-symmetric start vector is also run and the larger estimate kept.
/// Rayleigh quotients never exceed the top eigenvalue, so taking the maximum is
/// safe.
pub fn operator_norm(m: &RealMatrix, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::param(format!("tolerance must be positive, got {tol}")));
    }
    let n = m.cols();
    let ones = vec![1.0; n];
    // Deterministic, irrational-ish weights: avoids the symmetries of sign matrices.
    let skew: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.754_877_666).sin()).collect();

    let runs = [power_iterate(m, ones, tol), power_iterate(m, skew, tol)];
    let best = runs
        .iter()
        .map(|r| match r {
            Ok(rho) | Err(Error::NotConverged { estimate: rho, .. }) => *rho,
            Err(_) => 0.0,
        })
        .fold(0.0f64, f64::max);
    if runs.iter().all(Result::is_ok) {
        Ok(best.sqrt())
    } else {
        Err(Error::NotConverged {
            estimate: best.sqrt(),
            iterations: POWER_ITERATION_CAP,
        })
    }
}

/// Top eigenvalue of `MᵀM` from `start`; the `NotConverged` estimate is also an eigenvalue (not yet square-rooted).
fn power_iterate(m: &RealMatrix, start: Vec<f64>, tol: f64) -> Result<f64> {
    let mut v = start;
    let norm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);

    let mut rho = 0.0;
    for _ in 0..POWER_ITERATION_CAP {
        let mv = m.mul_vec(&v);
        let w = m.mul_t_vec(&mv);
        // ‖Mv‖² is the Rayleigh quotient of MᵀM at unit v.
        rho = dot(&mv, &mv);
        if rho == 0.0 {
            return Ok(0.0);
        }
        let residual: f64 = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| (wi - rho * vi).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= tol * rho {
            return Ok(rho);
        }
        let wn = dot(&w, &w).sqrt();
        v = w.into_iter().map(|x| x / wn).collect();
    }
    Err(Error::NotConverged {
        estimate: rho,
        iterations: POWER_ITERATION_CAP,
    })
}

/// Column limit for the exhaustive ℓ∞→ℓ1 enumeration.
pub const LINF_L1_MAX_COLS: usize = 25;

/// `max ‖Mv‖₁` over `v ∈ {−1,+1}^cols`.
///
/// `v ↦ ‖Mv‖₁` is convex, so its maximum over the ℓ∞ unit ball is attained at a
/// vertex; enumerating sign vectors gives the exact norm. Sign vectors are
/// visited in Gray-code order (one column flip per step) and `v`, `−v` are
/// identified, so the cost is `2^(cols−1)·rows`.
pub fn linf_to_l1_norm(m: &RealMatrix) -> Result<f64> {
    let cols = m.cols();
    if cols > LINF_L1_MAX_COLS {
        return Err(Error::TooLarge {
            what: "column count for l_inf->l_1 enumeration",
            got: cols,
            limit: LINF_L1_MAX_COLS,
        });
    }
    let mt = m.transpose();
    // Start at v = (+1, ..., +1); column 0 stays fixed at +1.
    let mut mv: Vec<f64> = m.mul_vec(&vec![1.0; cols]);
    let mut signs = vec![1.0; cols];
    let mut best = mv.iter().map(|x| x.abs()).sum::<f64>();
    let steps: u64 = 1 << (cols - 1);
    for k in 1..steps {
        // Gray code: flip column (trailing zeros of k) + 1.
        let j = k.trailing_zeros() as usize + 1;
        let s = signs[j];
        let col = mt.row(j);
        for (acc, c) in mv.iter_mut().zip(col) {
            *acc -= 2.0 * s * c;
        }
        signs[j] = -s;
        let val = mv.iter().map(|x| x.abs()).sum::<f64>();
        if val > best {
            best = val;
        }
    }
    Ok(best)
}

#[cfg(test)]
pub(crate) mod test_oracles {
    //! Independent references used only by tests.

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
    pub fn jacobi_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
        let n = a.len();
        let mut a: Vec<Vec<f64>> = a.to_vec();
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i][j] * a[i][j])
                .sum();
            if off < 1e-26 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[i][i]).collect()
    }

    /// Largest singular value via the eigenvalues of `MᵀM`.
    pub fn top_singular_value(rows: &[Vec<f64>]) -> f64 {
        let c = rows[0].len();
        let gram: Vec<Vec<f64>> = (0..c)
            .map(|i| (0..c).map(|j| rows.iter().map(|r| r[i] * r[j]).sum()).collect())
            .collect();
        jacobi_eigenvalues(&gram)
            .into_iter()
            .fold(0.0f64, f64::max)
            .sqrt()
    }

    /// ℓ∞→ℓ1 norm by enumerating all `2^cols` sign vectors, no symmetry tricks.
    pub fn linf_l1_brute(rows: &[Vec<f64>]) -> f64 {
        let c = rows[0].len();
        let mut best = 0.0f64;
        for mask in 0u32..(1 << c) {
            let v: Vec<f64> = (0..c)
                .map(|j| if mask >> j & 1 == 1 { -1.0 } else { 1.0 })
                .collect();
            let s: f64 = rows
                .iter()
                .map(|r| r.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>().abs())
                .sum();
            best = best.max(s);
        }
        best
    }
}
