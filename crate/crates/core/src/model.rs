//! Algebraic models of the factor geometries.
//!
//! A [`ProjectiveModel`] describes `CP^{m₁/2}` or `HP^{m₁/4}` at a point:
//! its constant `λ²`, its complex structure `J` (or quaternionic triple
//! `J₁, J₂, J₃`), the curvature tensor and the inner products of the second
//! fundamental form `B` of the generalized Veronese embedding into a sphere.
//! The embedding itself is never constructed; `⟨B(X,Y), B(Z,W)⟩` is obtained
//! from the curvature through
//!
//! ```text
//! 3⟨B(X,Y),B(Z,W)⟩ = ⟨R(X,Z)W,Y⟩ + ⟨R(X,W)Z,Y⟩
//!                   + λ²(⟨X,Y⟩⟨Z,W⟩ + ⟨X,W⟩⟨Y,Z⟩ + ⟨X,Z⟩⟨W,Y⟩).
//! ```
//!
//! Conventions: `J` acts on each coordinate pair as `(x, y) ↦ (−y, x)`.
//! The quaternionic structures are left multiplication by `i, j, k` on
//! `H^{m₁/4}` in the basis `(1, i, j, k)` per quaternionic coordinate, so
//! `J₁J₂ = J₃ = −J₂J₁` and cyclically.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tangent::{dot, AmbientVector, Split};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProjectiveKind {
    Complex,
    Quaternionic,
}

impl ProjectiveKind {
    /// `dim_R K`: 2 for C, 4 for H.
    pub fn field_dim(self) -> usize {
        match self {
            Self::Complex => 2,
            Self::Quaternionic => 4,
        }
    }

    pub fn structure_count(self) -> usize {
        match self {
            Self::Complex => 1,
            Self::Quaternionic => 3,
        }
    }

    fn check(self, m1: usize) -> Result<()> {
        let f = self.field_dim();
        if m1 == 0 || !m1.is_multiple_of(f) {
            return Err(Error::BadDimension { kind: self, m1 });
        }
        Ok(())
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `λ²` as a reduced fraction `(numerator, denominator)`.
///
/// Complex: `m₁/(m₁/2 + 1) = 2m₁/(m₁ + 2)`. Quaternionic: `2m₁/(m₁ + 4)`.
pub fn lambda_squared_ratio(kind: ProjectiveKind, m1: usize) -> Result<(u64, u64)> {
    kind.check(m1)?;
    let m = m1 as u64;
    let (num, den) = match kind {
        ProjectiveKind::Complex => (2 * m, m + 2),
        ProjectiveKind::Quaternionic => (2 * m, m + 4),
    };
    let g = gcd(num, den);
    Ok((num / g, den / g))
}

pub fn lambda_squared(kind: ProjectiveKind, m1: usize) -> Result<f64> {
    let (num, den) = lambda_squared_ratio(kind, m1)?;
    Ok(num as f64 / den as f64)
}

/// `(l_d, m)`: the Veronese image lies in `S^{l_d} ⊂ R^m`, `m = l_d + 1`,
/// with `l_d = (m₁/2)(m₁/d + 1) + m₁/d − 1` and `d = dim_R K`.
pub fn veronese_ambient_dims(kind: ProjectiveKind, m1: usize) -> Result<(usize, usize)> {
    kind.check(m1)?;
    let q = m1 / kind.field_dim();
    // m₁/2 · (q + 1) is an integer: m₁ is even for both fields
    let l = (m1 / 2) * (q + 1) + q - 1;
    Ok((l, l + 1))
}

/// An orthogonal map of `R^m` of the form `v ↦ (sign_i · v[perm_i])_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Structure {
    perm: Vec<usize>,
    sign: Vec<f64>,
}

impl Structure {
    fn from_blocks(block: &[(usize, f64)], blocks: usize) -> Self {
        let width = block.len();
        let mut perm = Vec::with_capacity(width * blocks);
        let mut sign = Vec::with_capacity(width * blocks);
        for b in 0..blocks {
            for &(src, s) in block {
                perm.push(b * width + src);
                sign.push(s);
            }
        }
        Self { perm, sign }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.perm
            .iter()
            .zip(&self.sign)
            .map(|(&p, &s)| s * v[p])
            .collect()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let m = self.dim();
        let mut out = DMatrix::zeros(m, m);
        for (i, (&p, &s)) in self.perm.iter().zip(&self.sign).enumerate() {
            out[(i, p)] = s;
        }
        out
    }
}

fn complex_structure(m1: usize) -> Structure {
    // (x, y) -> (-y, x)
    Structure::from_blocks(&[(1, -1.0), (0, 1.0)], m1 / 2)
}

fn quaternionic_structures(m1: usize) -> Vec<Structure> {
    let blocks = m1 / 4;
    // left multiplication on q = a + b i + c j + d k, coordinates (a, b, c, d)
    let left_i = [(1, -1.0), (0, 1.0), (3, -1.0), (2, 1.0)];
    let left_j = [(2, -1.0), (3, 1.0), (0, 1.0), (1, -1.0)];
    let left_k = [(3, -1.0), (2, -1.0), (1, 1.0), (0, 1.0)];
    [left_i, left_j, left_k]
        .iter()
        .map(|b| Structure::from_blocks(b, blocks))
        .collect()
}

/// Complex or quaternionic projective space of real dimension `m₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveModel {
    kind: ProjectiveKind,
    dim: usize,
    lambda_sq: f64,
    // normalisation of the curvature tensor; equals `lambda_sq` unless overridden
    curvature_lambda_sq: f64,
    structures: Vec<Structure>,
}

impl ProjectiveModel {
    pub fn new(kind: ProjectiveKind, m1: usize) -> Result<Self> {
        let lambda_sq = lambda_squared(kind, m1)?;
        let structures = match kind {
            ProjectiveKind::Complex => vec![complex_structure(m1)],
            ProjectiveKind::Quaternionic => quaternionic_structures(m1),
        };
        Ok(Self {
            kind,
            dim: m1,
            lambda_sq,
            curvature_lambda_sq: lambda_sq,
            structures,
        })
    }

    pub fn complex(m1: usize) -> Result<Self> {
        Self::new(ProjectiveKind::Complex, m1)
    }

    pub fn quaternionic(m1: usize) -> Result<Self> {
        Self::new(ProjectiveKind::Quaternionic, m1)
    }

    /// Replaces the constant used by the embedding identity and the closed
    /// forms while keeping the canonical curvature tensor. Used for fault
    /// injection: any value other than the canonical one breaks the
    /// agreement between the stability formulas.
    pub fn with_lambda_squared_override(mut self, lambda_sq: f64) -> Self {
        self.lambda_sq = lambda_sq;
        self
    }

    pub fn kind(&self) -> ProjectiveKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda_squared(&self) -> f64 {
        self.lambda_sq
    }

    pub fn structures(&self) -> &[Structure] {
        &self.structures
    }

    /// `J` for complex models, `J₁` for quaternionic ones.
    pub fn j(&self) -> &Structure {
        &self.structures[0]
    }

    fn check(&self, vs: &[&[f64]]) -> Result<()> {
        for v in vs {
            if v.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: v.len(),
                });
            }
        }
        Ok(())
    }

    /// `⟨R(X,Y)Z,W⟩`.
    pub fn curvature(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> Result<f64> {
        self.check(&[x, y, z, w])?;
        Ok(self.curvature_unchecked(x, y, z, w))
    }

    pub(crate) fn curvature_unchecked(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> f64 {
        let mut acc = dot(y, z) * dot(x, w) - dot(x, z) * dot(y, w);
        for j in &self.structures {
            let (jx, jy, jz) = (j.apply(x), j.apply(y), j.apply(z));
            acc += dot(&jy, z) * dot(&jx, w) - dot(&jx, z) * dot(&jy, w)
                + 2.0 * dot(x, &jy) * dot(&jz, w);
        }
        self.curvature_lambda_sq / 4.0 * acc
    }

    /// `⟨B(X,Y), B(Z,W)⟩` for the Veronese second fundamental form.
    pub fn sff_inner(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> Result<f64> {
        self.check(&[x, y, z, w])?;
        Ok(self.sff_inner_unchecked(x, y, z, w))
    }

    pub(crate) fn sff_inner_unchecked(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> f64 {
        let curv = self.curvature_unchecked(x, z, w, y) + self.curvature_unchecked(x, w, z, y);
        let metric = dot(x, y) * dot(z, w) + dot(x, w) * dot(y, z) + dot(x, z) * dot(w, y);
        (curv + self.lambda_sq * metric) / 3.0
    }
}

/// Any factor of the product: projective, round sphere, or flat.
#[derive(Debug, Clone, PartialEq)]
pub enum FactorModel {
    Projective(ProjectiveModel),
    Sphere { dim: usize, radius: f64 },
    Flat { dim: usize },
}

impl FactorModel {
    pub fn sphere(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 || !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::BadFactor(format!(
                "sphere needs positive dimension and radius, got dim={dim}, radius={radius}"
            )));
        }
        Ok(Self::Sphere { dim, radius })
    }

    pub fn flat(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::BadFactor("flat factor needs positive dimension".into()));
        }
        Ok(Self::Flat { dim })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Projective(p) => p.dim(),
            Self::Sphere { dim, .. } | Self::Flat { dim } => *dim,
        }
    }

    pub fn curvature(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> Result<f64> {
        match self {
            Self::Projective(p) => p.curvature(x, y, z, w),
            Self::Sphere { dim, radius } => {
                check_dim(*dim, &[x, y, z, w])?;
                let k = 1.0 / (radius * radius);
                Ok(k * (dot(y, z) * dot(x, w) - dot(x, z) * dot(y, w)))
            }
            Self::Flat { dim } => {
                check_dim(*dim, &[x, y, z, w])?;
                Ok(0.0)
            }
        }
    }
}

fn check_dim(dim: usize, vs: &[&[f64]]) -> Result<()> {
    for v in vs {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
    }
    Ok(())
}

/// `⟨R(X,Y)Z,W⟩` for any factor model.
pub fn curvature(model: &FactorModel, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> Result<f64> {
    model.curvature(x, y, z, w)
}

/// `⟨B(X,Y),B(Z,W)⟩` for the Veronese embedding of `model`.
pub fn sff_inner(model: &ProjectiveModel, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> Result<f64> {
    model.sff_inner(x, y, z, w)
}

/// `M̄ = M₁ × M₂` with a projective first factor.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSpace {
    pub factor1: ProjectiveModel,
    pub factor2: FactorModel,
}

impl ProductSpace {
    pub fn new(factor1: ProjectiveModel, factor2: FactorModel) -> Self {
        Self { factor1, factor2 }
    }

    pub fn split(&self) -> Split {
        Split::new(self.factor1.dim(), self.factor2.dim())
    }

    pub fn lambda_squared(&self) -> f64 {
        self.factor1.lambda_squared()
    }

    /// The same product with factors exchanged, when the second factor is
    /// also projective.
    pub fn swapped(&self) -> Option<Self> {
        match &self.factor2 {
            FactorModel::Projective(p) => Some(Self::new(
                p.clone(),
                FactorModel::Projective(self.factor1.clone()),
            )),
            _ => None,
        }
    }

    /// Block-diagonal product curvature
    /// `R̄ = R₁(X¹,Y¹,Z¹,W¹) + R₂(X²,Y²,Z²,W²)`.
    pub fn product_curvature(
        &self,
        x: &AmbientVector,
        y: &AmbientVector,
        z: &AmbientVector,
        w: &AmbientVector,
    ) -> Result<f64> {
        let split = self.split();
        for v in [x, y, z, w] {
            if v.split() != split {
                return Err(Error::DimensionMismatch {
                    expected: split.ambient(),
                    found: v.dim(),
                });
            }
        }
        let r1 = self
            .factor1
            .curvature(x.first(), y.first(), z.first(), w.first())?;
        let r2 = self
            .factor2
            .curvature(x.second(), y.second(), z.second(), w.second())?;
        Ok(r1 + r2)
    }
}

pub fn product_curvature(
    space: &ProductSpace,
    x: &AmbientVector,
    y: &AmbientVector,
    z: &AmbientVector,
    w: &AmbientVector,
) -> Result<f64> {
    space.product_curvature(x, y, z, w)
}
