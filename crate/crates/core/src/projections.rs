//! Johnson–Lindenstrauss projections.
//!
//! The map is a `d × D` matrix of independent standard Gaussians scaled by
//! `1/√d`. It satisfies the same `(1 ± ε)` distance guarantee as an orthogonal
//! projection onto a random `d`-dimensional subspace rescaled by `√(D/d)`, and
//! `E⟨p(u), p(v)⟩ = ⟨u, v⟩` exactly.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg::{dot, RealVector};
use crate::{Error, Result, Seed};

/// Smallest `d` with `d ≥ 4 ln N / (ε²/2 − ε³/3)`.
pub fn jl_dimension(n: usize, eps: f64) -> Result<usize> {
    if n < 2 {
        return Err(Error::param(format!("point count must be at least 2, got {n}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param(format!("distortion must lie in (0, 1), got {eps}")));
    }
    let denom = eps * eps / 2.0 - eps.powi(3) / 3.0;
    Ok((4.0 * (n as f64).ln() / denom).ceil() as usize)
}

/// Additive inner-product error implied by `(1 ± ε)` distortion on `{u, v, 0}`,
/// via polarization: `3ε·max(‖u‖², ‖v‖²)`.
pub fn inner_product_error_bound(eps: f64, norm_u_sq: f64, norm_v_sq: f64) -> f64 {
    3.0 * eps * norm_u_sq.max(norm_v_sq)
}

/// `ε = 1/(10·2^{2q})`: keeps inner products of vectors with norm `≤ 2^{q−1}`
/// within `3/40 < 1/10` of their original values.
pub fn fingerprint_preset_eps(q: u32) -> f64 {
    1.0 / (10.0 * 4f64.powi(q as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionSpec {
    pub source_dim: usize,
    pub target_dim: usize,
    pub seed: Seed,
}

impl ProjectionSpec {
    pub fn new(source_dim: usize, target_dim: usize, seed: Seed) -> Result<Self> {
        if target_dim == 0 || target_dim > source_dim {
            return Err(Error::param(format!(
                "target dimension must lie in [1, {source_dim}], got {target_dim}"
            )));
        }
        Ok(ProjectionSpec {
            source_dim,
            target_dim,
            seed,
        })
    }
}

/// A linear map `R^D → R^d`.
#[derive(Debug, Clone)]
pub enum Projector {
    /// Debug mode: `d = D`, vectors pass through unchanged.
    Identity { dim: usize },
    /// Row-major `d × D` Gaussian matrix, already scaled by `1/√d`.
    Gaussian { spec: ProjectionSpec, matrix: Vec<f64> },
}

impl Projector {
    pub fn gaussian(spec: ProjectionSpec) -> Self {
        let scale = 1.0 / (spec.target_dim as f64).sqrt();
        let mut rng = spec.seed.rng();
        let matrix = (0..spec.target_dim * spec.source_dim)
            .map(|_| scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
            .collect();
        Projector::Gaussian { spec, matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Projector::Identity { dim }
    }

    pub fn source_dim(&self) -> usize {
        match self {
            Projector::Identity { dim } => *dim,
            Projector::Gaussian { spec, .. } => spec.source_dim,
        }
    }

    pub fn target_dim(&self) -> usize {
        match self {
            Projector::Identity { dim } => *dim,
            Projector::Gaussian { spec, .. } => spec.target_dim,
        }
    }

    pub fn apply(&self, v: &RealVector) -> Result<RealVector> {
        if v.dim() != self.source_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.source_dim(),
                found: v.dim(),
            });
        }
        match self {
            Projector::Identity { .. } => Ok(v.clone()),
            Projector::Gaussian { spec, matrix } => {
                let out = matrix
                    .chunks_exact(spec.source_dim)
                    .map(|row| dot(row, v.as_slice()))
                    .collect();
                RealVector::new(out)
            }
        }
    }
}

fn common_dim(vectors: &[RealVector]) -> Result<usize> {
    let dim = vectors.first().ok_or(Error::Empty("vector list"))?.dim();
    if let Some(bad) = vectors.iter().find(|v| v.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }
    Ok(dim)
}

/// Applies one Gaussian map, drawn from `seed`, to every vector.
pub fn project_vectors(vectors: &[RealVector], target_dim: usize, seed: Seed) -> Result<Vec<RealVector>> {
    let dim = common_dim(vectors)?;
    let p = Projector::gaussian(ProjectionSpec::new(dim, target_dim, seed)?);
    project_with(&p, vectors)
}

pub fn project_with(p: &Projector, vectors: &[RealVector]) -> Result<Vec<RealVector>> {
    common_dim(vectors)?;
    vectors.iter().map(|v| p.apply(v)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub ok: bool,
    /// Pair with the largest relative distance distortion; index `len` is the appended zero vector.
    pub worst_pair: Option<(usize, usize)>,
    /// `max |‖p(u)−p(v)‖² / ‖u−v‖² − 1|` over non-degenerate pairs.
    pub max_distortion: f64,
    /// `max |⟨p(u),p(v)⟩ − ⟨u,v⟩|`, both sides computed by polarization from squared distances.
    pub max_inner_product_error: f64,
    pub eps: f64,
}

/// `set[i]`, or the appended zero vector when `i == set.len()`.
fn point<'a>(set: &'a [RealVector], zero: &'a RealVector, i: usize) -> &'a RealVector {
    set.get(i).unwrap_or(zero)
}

/// Checks `(1−ε)‖u−v‖² ≤ ‖p(u)−p(v)‖² ≤ (1+ε)‖u−v‖²` over all pairs of
/// `V ∪ {0}`. Pairs with `u = v` are skipped.
pub fn verify_distortion(original: &[RealVector], projected: &[RealVector], eps: f64) -> Result<DistortionReport> {
    if original.len() != projected.len() {
        return Err(Error::DimensionMismatch {
            expected: original.len(),
            found: projected.len(),
        });
    }
    let d_orig = common_dim(original)?;
    let d_proj = common_dim(projected)?;
    let n = original.len();
    let zero_o = RealVector::zeros(d_orig);
    let zero_p = RealVector::zeros(d_proj);
    let sq_dist = |a: &RealVector, b: &RealVector| -> f64 {
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(x, y)| (x - y).powi(2))
            .sum()
    };

    let mut worst_pair = None;
    let mut max_distortion = 0.0f64;
    let mut max_ip_err = 0.0f64;
    let mut ok = true;
    let norms_o: Vec<f64> = original.iter().map(RealVector::norm_sq).collect();
    let norms_p: Vec<f64> = projected.iter().map(RealVector::norm_sq).collect();
    for i in 0..=n {
        for j in i + 1..=n {
            let (ou, ov) = (point(original, &zero_o, i), point(original, &zero_o, j));
            let (pu, pv) = (point(projected, &zero_p, i), point(projected, &zero_p, j));
            let before = sq_dist(ou, ov);
            let after = sq_dist(pu, pv);
            if before > 0.0 {
                let rel = (after / before - 1.0).abs();
                if rel > max_distortion {
                    max_distortion = rel;
                    worst_pair = Some((i, j));
                }
                if after < (1.0 - eps) * before || after > (1.0 + eps) * before {
                    ok = false;
                }
            }
            if j < n {
                let ip_o = (norms_o[i] + norms_o[j] - before) / 2.0;
                let ip_p = (norms_p[i] + norms_p[j] - after) / 2.0;
                max_ip_err = max_ip_err.max((ip_p - ip_o).abs());
            }
        }
    }
    Ok(DistortionReport {
        ok,
        worst_pair,
        max_distortion,
        max_inner_product_error: max_ip_err,
        eps,
    })
}
