//! Hand-built adapted frames realising the equality cases of the stability
//! sum and the `J₁`/`J₂` planes of `CP × CP`, plus controlled perturbations
//! of them. Used by the classifier suites.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FactorModel, ProductSpace, Structure};
use crate::tangent::{gram_schmidt, AdaptedFrame, AmbientVector, Split};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Tangent,
    Normal,
}

/// The 2-planes of `CP × CP` used for structure detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlaneKind {
    /// `span{u, J₁u}` with `u = (cos θ X, sin θ Y)`
    J1,
    /// `span{u, J₂u}`
    J2,
    /// `span{(X,0), (JX,0)}`
    FirstOnly,
    /// `span{(0,Y), (0,JY)}`
    SecondOnly,
}

fn unit_vectors(rng: &mut ChaCha8Rng, dim: usize, count: usize) -> Result<Vec<Vec<f64>>> {
    if count > dim {
        return Err(Error::CaseMismatch(format!(
            "need {count} orthonormal vectors in dimension {dim}"
        )));
    }
    let split = Split::new(dim, 0);
    for _ in 0..8 {
        let raw: Vec<AmbientVector> = (0..count)
            .map(|_| {
                let c = (0..dim).map(|_| StandardNormal.sample(&mut *rng)).collect();
                AmbientVector::new(c, split).expect("length matches")
            })
            .collect();
        if let Ok(out) = gram_schmidt(&raw) {
            return Ok(out.into_iter().map(|v| v.coords().to_vec()).collect());
        }
    }
    Err(Error::DegenerateInput { min_eigenvalue: 0.0 })
}

fn scaled(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|x| x * s).collect()
}

fn assemble(space: &ProductSpace, lead: Vec<AmbientVector>, role: Role, seed: u64) -> Result<AdaptedFrame> {
    let split = space.split();
    let k = lead.len();
    let rest = split.ambient().checked_sub(k).ok_or(Error::FrameTooLarge {
        n: k,
        d: 0,
        ambient: split.ambient(),
    })?;
    if rest == 0 {
        return Err(Error::FrameTooLarge {
            n: k,
            d: 0,
            ambient: split.ambient(),
        });
    }
    let seed = seed ^ 0x5EED_F1A7;
    match role {
        Role::Tangent => AdaptedFrame::complete_from(&lead, &[], k, rest, split, seed),
        Role::Normal => AdaptedFrame::complete_from(&[], &lead, rest, k, split, seed),
    }
}

/// Frame whose first two `role` vectors are
/// `v₁ = (cos θ X, sin θ Y)` and `v₂ = (ε cos θ J X, sin θ Y′)`
/// with `X` a unit factor-1 vector and `Y ⟂ Y′` unit factor-2 vectors.
/// `J` is the first structure of the projective factor. For complex factors
/// this realises `v₂¹ = ε J v₁¹` with matched norms.
pub fn complex_pair_frame(space: &ProductSpace, sign: i8, theta: f64, role: Role, seed: u64) -> Result<AdaptedFrame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (c, s) = (theta.cos(), theta.sin());
    let x = unit_vectors(&mut rng, space.factor1.dim(), 1)?.remove(0);
    let m2 = space.factor2.dim();
    let (y, y2) = if s == 0.0 {
        (vec![0.0; m2], vec![0.0; m2])
    } else {
        let mut ys = unit_vectors(&mut rng, m2, 2)?;
        let y2 = ys.pop().expect("two vectors");
        (ys.pop().expect("two vectors"), y2)
    };
    let jx = space.factor1.j().apply(&x);
    let v1 = AmbientVector::from_parts(&scaled(&x, c), &scaled(&y, s));
    let v2 = AmbientVector::from_parts(&scaled(&jx, f64::from(sign) * c), &scaled(&y2, s));
    assemble(space, vec![v1, v2], role, rng_next(&mut rng))
}

/// Frame whose first `count` `role` vectors lie entirely in factor 2.
pub fn zero_projection_frame(space: &ProductSpace, count: usize, role: Role, seed: u64) -> Result<AdaptedFrame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m1 = space.factor1.dim();
    let ys = unit_vectors(&mut rng, space.factor2.dim(), count)?;
    let lead = ys
        .iter()
        .map(|y| AmbientVector::from_parts(&vec![0.0; m1], y))
        .collect();
    assemble(space, lead, role, rng_next(&mut rng))
}

/// Frame whose `role` 2-plane is one of the [`PlaneKind`] planes of `CP × CP`.
pub fn structure_plane_frame(
    space: &ProductSpace,
    plane: PlaneKind,
    theta: f64,
    role: Role,
    seed: u64,
) -> Result<AdaptedFrame> {
    let j2: &Structure = match &space.factor2 {
        FactorModel::Projective(p) => p.j(),
        _ => return Err(Error::CaseMismatch("structure planes need CP × CP".into())),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = unit_vectors(&mut rng, space.factor1.dim(), 1)?.remove(0);
    let y = unit_vectors(&mut rng, space.factor2.dim(), 1)?.remove(0);
    let jx = space.factor1.j().apply(&x);
    let jy = j2.apply(&y);
    let zeros1 = vec![0.0; x.len()];
    let zeros2 = vec![0.0; y.len()];
    let (c, s) = (theta.cos(), theta.sin());
    let (u, v) = match plane {
        PlaneKind::J1 | PlaneKind::J2 => {
            let sign = if plane == PlaneKind::J1 { 1.0 } else { -1.0 };
            (
                AmbientVector::from_parts(&scaled(&x, c), &scaled(&y, s)),
                AmbientVector::from_parts(&scaled(&jx, c), &scaled(&jy, sign * s)),
            )
        }
        PlaneKind::FirstOnly => (
            AmbientVector::from_parts(&x, &zeros2),
            AmbientVector::from_parts(&jx, &zeros2),
        ),
        PlaneKind::SecondOnly => (
            AmbientVector::from_parts(&zeros1, &y),
            AmbientVector::from_parts(&zeros1, &jy),
        ),
    };
    assemble(space, vec![u, v], role, rng_next(&mut rng))
}

/// Rotates `e_i` and `η_k` into each other by `angle`; the result is still
/// an orthonormal adapted frame.
pub fn mix_roles(frame: &AdaptedFrame, tangent_index: usize, normal_index: usize, angle: f64) -> Result<AdaptedFrame> {
    let mut tangent = frame.tangent().to_vec();
    let mut normal = frame.normal().to_vec();
    let (Some(e), Some(eta)) = (tangent.get(tangent_index).cloned(), normal.get(normal_index).cloned()) else {
        return Err(Error::CaseMismatch("mix_roles index out of range".into()));
    };
    let (c, s) = (angle.cos(), angle.sin());
    tangent[tangent_index] = e.scaled(c).add_scaled(s, &eta);
    normal[normal_index] = eta.scaled(c).add_scaled(-s, &e);
    AdaptedFrame::new(tangent, normal)
}

fn rng_next(rng: &mut ChaCha8Rng) -> u64 {
    use rand::RngCore;
    rng.next_u64()
}
