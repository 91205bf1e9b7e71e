//! Tangent vectors of a product `M₁ × M₂` at a single point.
//!
//! Everything here works on the tangent space `T(M₁×M₂) = T M₁ ⊕ T M₂`
//! written in an orthonormal basis, so the ambient inner product is the
//! Euclidean one on the coordinate list. The first `m₁` coordinates belong to
//! factor 1 and the remaining `m₂` to factor 2.
//!
//! Random frames use [`ChaCha8Rng`] seeded through
//! [`SeedableRng::seed_from_u64`], with standard normal draws from
//! `rand_distr`. The same seed always yields bitwise-identical frames.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible Gram eigenvalue for [`gram_schmidt`].
pub const INDEPENDENCE_TOLERANCE: f64 = 1e-10;

/// Orthonormality tolerance used when validating frames.
pub const FRAME_CHECK_TOLERANCE: f64 = 1e-10;

const MAX_RESAMPLES: usize = 8;

/// Real dimensions of the two factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Split {
    pub m1: usize,
    pub m2: usize,
}

impl Split {
    pub fn new(m1: usize, m2: usize) -> Self {
        Self { m1, m2 }
    }

    pub fn ambient(&self) -> usize {
        self.m1 + self.m2
    }

    /// The split with the factors exchanged.
    pub fn swapped(&self) -> Self {
        Self::new(self.m2, self.m1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Factor {
    First,
    Second,
}

/// A tangent vector of the product, stored as its full coordinate list.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientVector {
    coords: Vec<f64>,
    split: Split,
}

impl AmbientVector {
    pub fn new(coords: Vec<f64>, split: Split) -> Result<Self> {
        if coords.len() != split.ambient() {
            return Err(Error::DimensionMismatch {
                expected: split.ambient(),
                found: coords.len(),
            });
        }
        Ok(Self { coords, split })
    }

    pub fn zeros(split: Split) -> Self {
        Self {
            coords: vec![0.0; split.ambient()],
            split,
        }
    }

    /// Concatenates a factor-1 part and a factor-2 part.
    pub fn from_parts(first: &[f64], second: &[f64]) -> Self {
        let mut coords = Vec::with_capacity(first.len() + second.len());
        coords.extend_from_slice(first);
        coords.extend_from_slice(second);
        Self {
            coords,
            split: Split::new(first.len(), second.len()),
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Factor-1 coordinates (length `m₁`).
    pub fn first(&self) -> &[f64] {
        &self.coords[..self.split.m1]
    }

    /// Factor-2 coordinates (length `m₂`).
    pub fn second(&self) -> &[f64] {
        &self.coords[self.split.m1..]
    }

    pub fn part(&self, which: Factor) -> &[f64] {
        match which {
            Factor::First => self.first(),
            Factor::Second => self.second(),
        }
    }

    pub fn dot(&self, other: &Self) -> f64 {
        dot(&self.coords, &other.coords)
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            coords: self.coords.iter().map(|c| c * factor).collect(),
            split: self.split,
        }
    }

    /// `self + factor · other`.
    pub fn add_scaled(&self, factor: f64, other: &Self) -> Self {
        debug_assert_eq!(self.split, other.split);
        Self {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + factor * b)
                .collect(),
            split: self.split,
        }
    }

    /// Same vector with the factor blocks exchanged.
    pub fn swapped(&self) -> Self {
        Self::from_parts(self.second(), self.first())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Component of `v` in the chosen factor, zero-padded back to ambient length.
pub fn project_factor(v: &AmbientVector, which: Factor) -> AmbientVector {
    let m1 = v.split.m1;
    let coords = v
        .coords
        .iter()
        .enumerate()
        .map(|(i, &c)| match which {
            Factor::First if i < m1 => c,
            Factor::Second if i >= m1 => c,
            _ => 0.0,
        })
        .collect();
    AmbientVector {
        coords,
        split: v.split,
    }
}

/// Smallest eigenvalue of the Gram matrix of `vectors`.
pub fn min_gram_eigenvalue(vectors: &[AmbientVector]) -> f64 {
    let k = vectors.len();
    if k == 0 {
        return f64::INFINITY;
    }
    let gram = DMatrix::from_fn(k, k, |i, j| vectors[i].dot(&vectors[j]));
    gram.symmetric_eigenvalues().min()
}

/// Orthonormalises `vectors` in order (modified Gram-Schmidt, two passes).
///
/// Fails with [`Error::DegenerateInput`] when the smallest eigenvalue of the
/// Gram matrix does not exceed [`INDEPENDENCE_TOLERANCE`].
pub fn gram_schmidt(vectors: &[AmbientVector]) -> Result<Vec<AmbientVector>> {
    let Some(first) = vectors.first() else {
        return Ok(Vec::new());
    };
    let split = first.split;
    for v in vectors {
        if v.split != split {
            return Err(Error::DimensionMismatch {
                expected: split.ambient(),
                found: v.dim(),
            });
        }
    }
    let min_eigenvalue = min_gram_eigenvalue(vectors);
    if !(min_eigenvalue > INDEPENDENCE_TOLERANCE) {
        return Err(Error::DegenerateInput { min_eigenvalue });
    }

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.coords.clone();
        // second sweep restores orthogonality lost to cancellation
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = dot(&w, &w).sqrt();
        if !(norm > 0.0) {
            return Err(Error::DegenerateInput { min_eigenvalue });
        }
        w.iter_mut().for_each(|x| *x /= norm);
        basis.push(w);
    }
    Ok(basis
        .into_iter()
        .map(|coords| AmbientVector { coords, split })
        .collect())
}

/// Joint orthonormal frame `e₁..e_n` (tangent) and `η₁..η_d` (normal).
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedFrame {
    tangent: Vec<AmbientVector>,
    normal: Vec<AmbientVector>,
    split: Split,
}

impl AdaptedFrame {
    /// Builds a frame, checking split consistency and orthonormality.
    pub fn new(tangent: Vec<AmbientVector>, normal: Vec<AmbientVector>) -> Result<Self> {
        let split = tangent
            .first()
            .or(normal.first())
            .map(AmbientVector::split)
            .ok_or_else(|| Error::CaseMismatch("empty frame".into()))?;
        for v in tangent.iter().chain(&normal) {
            if v.split != split {
                return Err(Error::DimensionMismatch {
                    expected: split.ambient(),
                    found: v.dim(),
                });
            }
        }
        let (n, d) = (tangent.len(), normal.len());
        if n + d > split.ambient() {
            return Err(Error::FrameTooLarge {
                n,
                d,
                ambient: split.ambient(),
            });
        }
        let frame = Self {
            tangent,
            normal,
            split,
        };
        let defect = frame.orthonormality_defect();
        if !(defect <= FRAME_CHECK_TOLERANCE) {
            return Err(Error::DegenerateInput {
                min_eigenvalue: 1.0 - defect,
            });
        }
        Ok(frame)
    }

    pub fn tangent(&self) -> &[AmbientVector] {
        &self.tangent
    }

    pub fn normal(&self) -> &[AmbientVector] {
        &self.normal
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn n(&self) -> usize {
        self.tangent.len()
    }

    pub fn d(&self) -> usize {
        self.normal.len()
    }

    /// True when the frame spans the whole ambient tangent space.
    pub fn is_complete(&self) -> bool {
        self.n() + self.d() == self.split.ambient()
    }

    pub fn vectors(&self) -> impl Iterator<Item = &AmbientVector> {
        self.tangent.iter().chain(&self.normal)
    }

    /// Largest entry of `|G − I|` over the joint Gram matrix.
    pub fn orthonormality_defect(&self) -> f64 {
        let all: Vec<&AmbientVector> = self.vectors().collect();
        let mut worst = 0.0_f64;
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.dot(b) - target).abs());
            }
        }
        worst
    }

    /// Determinant of the matrix whose rows are the frame vectors.
    /// Only defined for complete frames.
    pub fn gram_determinant(&self) -> Option<f64> {
        if !self.is_complete() {
            return None;
        }
        let m = self.split.ambient();
        let rows: Vec<&AmbientVector> = self.vectors().collect();
        Some(DMatrix::from_fn(m, m, |i, j| rows[i].coords[j]).determinant())
    }

    /// `|w|² − Σ⟨w,e_j⟩² − Σ⟨w,η_k⟩²`; vanishes for complete frames.
    pub fn completeness_residual(&self, w: &AmbientVector) -> f64 {
        let expansion: f64 = self.vectors().map(|v| v.dot(w).powi(2)).sum();
        w.norm_squared() - expansion
    }

    /// The same frame with factor blocks exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            tangent: self.tangent.iter().map(AmbientVector::swapped).collect(),
            normal: self.normal.iter().map(AmbientVector::swapped).collect(),
            split: self.split.swapped(),
        }
    }

    /// Exchanges the roles of tangent and normal vectors.
    pub fn dual(&self) -> Self {
        Self {
            tangent: self.normal.clone(),
            normal: self.tangent.clone(),
            split: self.split,
        }
    }

    /// Completes orthonormal leading vectors to a frame with `n` tangent and
    /// `d` normal vectors, filling the remainder with seeded Gaussian draws.
    ///
    /// Leading tangent vectors become `e₁, e₂, ..`, leading normal vectors
    /// become `η₁, η₂, ..`.
    pub fn complete_from(
        lead_tangent: &[AmbientVector],
        lead_normal: &[AmbientVector],
        n: usize,
        d: usize,
        split: Split,
        seed: u64,
    ) -> Result<Self> {
        let ambient = split.ambient();
        if n + d > ambient || lead_tangent.len() > n || lead_normal.len() > d {
            return Err(Error::FrameTooLarge { n, d, ambient });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fill_t = n - lead_tangent.len();
        let fill_n = d - lead_normal.len();
        let mut last_err = None;
        for _ in 0..MAX_RESAMPLES {
            let mut raw: Vec<AmbientVector> = lead_tangent.to_vec();
            raw.extend_from_slice(lead_normal);
            for _ in 0..fill_t + fill_n {
                raw.push(gaussian_vector(&mut rng, split));
            }
            match gram_schmidt(&raw) {
                Ok(mut ortho) => {
                    let extra_normal = ortho.split_off(lead_tangent.len() + lead_normal.len() + fill_t);
                    let extra_tangent = ortho.split_off(lead_tangent.len() + lead_normal.len());
                    let lead_n = ortho.split_off(lead_tangent.len());
                    let mut tangent = ortho;
                    tangent.extend(extra_tangent);
                    let mut normal = lead_n;
                    normal.extend(extra_normal);
                    return Ok(Self {
                        tangent,
                        normal,
                        split,
                    });
                }
                Err(e) => last_err = Some(e),
            }
        }
        Err(last_err.expect("at least one attempt"))
    }
}

fn gaussian_vector(rng: &mut ChaCha8Rng, split: Split) -> AmbientVector {
    AmbientVector {
        coords: (0..split.ambient())
            .map(|_| StandardNormal.sample(rng))
            .collect(),
        split,
    }
}

/// Seeded random adapted frame: Gaussian draws orthonormalised in order,
/// the first `n` become tangent and the remaining `d` normal.
pub fn random_adapted_frame(seed: u64, n: usize, d: usize, split: Split) -> Result<AdaptedFrame> {
    AdaptedFrame::complete_from(&[], &[], n, d, split, seed)
}

/// Decorrelated per-task seed derived from a base seed (SplitMix64 step).
pub fn stream_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
