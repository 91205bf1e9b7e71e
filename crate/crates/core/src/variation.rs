//! The second-variation sum `Q = Σ_A −⟨N_{E_A}, J_Σ(N_{E_A})⟩` at a point.
//!
//! `Q` is the sum of the second variations of the normal projections of the
//! constant fields `E_A` of the Veronese target space `R^m`. It depends only
//! on the factor-1 projections `e_j¹`, `η_k¹` of an adapted frame, and is
//! evaluated here by five formulas that are algebraically equal:
//!
//! | function | expression |
//! |---|---|
//! | [`q_from_sff`] | `Σ_{j,k} 2|B(e_j¹,η_k¹)|² − ⟨B(η_k¹,η_k¹),B(e_j¹,e_j¹)⟩` |
//! | [`q_curvature_form`] | `Σ −4/3⟨R(e¹,η¹)η¹,e¹⟩ + 2λ²/3⟨e¹,η¹⟩² + λ²/3|e¹|²|η¹|²` |
//! | [`q_midform`] | `λ² Σ ⟨e¹,η¹⟩² − Σ_k ⟨e¹,J_k η¹⟩²` |
//! | [`q_normal_closed`] | normal-only closed form (complete frames) |
//! | [`q_tangent_closed`] | tangent-only closed form (complete frames) |
//!
//! The first three hold for any orthonormal frame; the closed forms use the
//! completeness of the frame and are returned per structure index `s` for
//! quaternionic factors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FactorModel, ProductSpace, ProjectiveKind, ProjectiveModel, Structure};
use crate::tangent::{dot, AdaptedFrame, AmbientVector};

/// Projections below this norm count as zero in verdict details.
pub const ZERO_PROJECTION_TOLERANCE: f64 = 1e-8;

/// Tolerance of the J-invariance test in [`detect_structure`].
pub const STRUCTURE_TOLERANCE: f64 = 1e-9;

/// Tolerance for declaring `Q = 0`: `1e−10 · λ² · (n+d)²`.
pub fn equality_tolerance(lambda_sq: f64, n: usize, d: usize) -> f64 {
    let m = (n + d) as f64;
    1e-10 * lambda_sq * m * m
}

struct FirstFactor {
    e: Vec<Vec<f64>>,
    eta: Vec<Vec<f64>>,
}

fn first_factor(space: &ProductSpace, frame: &AdaptedFrame) -> Result<FirstFactor> {
    let split = space.split();
    if frame.split() != split {
        return Err(Error::DimensionMismatch {
            expected: split.ambient(),
            found: frame.split().ambient(),
        });
    }
    let take = |vs: &[AmbientVector]| vs.iter().map(|v| v.first().to_vec()).collect();
    Ok(FirstFactor {
        e: take(frame.tangent()),
        eta: take(frame.normal()),
    })
}

fn require_complete(frame: &AdaptedFrame) -> Result<()> {
    if !frame.is_complete() {
        return Err(Error::IncompleteFrame {
            n: frame.n(),
            d: frame.d(),
            ambient: frame.split().ambient(),
        });
    }
    Ok(())
}

pub fn q_from_sff(space: &ProductSpace, frame: &AdaptedFrame) -> Result<f64> {
    let p = first_factor(space, frame)?;
    let model = &space.factor1;
    let mut q = 0.0;
    for e in &p.e {
        for eta in &p.eta {
            q += 2.0 * model.sff_inner_unchecked(e, eta, e, eta)
                - model.sff_inner_unchecked(eta, eta, e, e);
        }
    }
    Ok(q)
}

pub fn q_curvature_form(space: &ProductSpace, frame: &AdaptedFrame) -> Result<f64> {
    let p = first_factor(space, frame)?;
    let model = &space.factor1;
    let lam = model.lambda_squared();
    let mut q = 0.0;
    for e in &p.e {
        let ee = dot(e, e);
        for eta in &p.eta {
            let r = model.curvature_unchecked(e, eta, eta, e);
            q += -4.0 / 3.0 * r
                + 2.0 * lam / 3.0 * dot(e, eta).powi(2)
                + lam / 3.0 * ee * dot(eta, eta);
        }
    }
    Ok(q)
}

pub fn q_midform(space: &ProductSpace, frame: &AdaptedFrame) -> Result<f64> {
    let p = first_factor(space, frame)?;
    let model = &space.factor1;
    let mut q = 0.0;
    for eta in &p.eta {
        let rotated: Vec<Vec<f64>> = model.structures().iter().map(|j| j.apply(eta)).collect();
        for e in &p.e {
            q += dot(e, eta).powi(2);
            q -= rotated.iter().map(|jeta| dot(e, jeta).powi(2)).sum::<f64>();
        }
    }
    Ok(model.lambda_squared() * q)
}

/// `Σ_{a,b} ⟨J a, b⟩² − ⟨a, b⟩²` over one family of vectors.
fn family_form(j: &Structure, vs: &[Vec<f64>]) -> f64 {
    let mut acc = 0.0;
    for a in vs {
        let ja = j.apply(a);
        for b in vs {
            acc += dot(&ja, b).powi(2) - dot(a, b).powi(2);
        }
    }
    acc
}

/// `Σ_{k≠s} Σ_{j,β} ⟨J_k η_β, e_j⟩²`.
fn cross_term(model: &ProjectiveModel, s: usize, p: &FirstFactor) -> f64 {
    let mut acc = 0.0;
    for (k, j) in model.structures().iter().enumerate() {
        if k == s {
            continue;
        }
        for eta in &p.eta {
            let jeta = j.apply(eta);
            acc += p.e.iter().map(|e| dot(&jeta, e).powi(2)).sum::<f64>();
        }
    }
    acc
}

fn closed_form(space: &ProductSpace, frame: &AdaptedFrame, normal_side: bool) -> Result<Vec<f64>> {
    require_complete(frame)?;
    let p = first_factor(space, frame)?;
    let model = &space.factor1;
    let lam = model.lambda_squared();
    let family = if normal_side { &p.eta } else { &p.e };
    Ok(model
        .structures()
        .iter()
        .enumerate()
        .map(|(s, j)| lam * (family_form(j, family) - cross_term(model, s, &p)))
        .collect())
}

/// Normal-side closed form; one entry for complex factors, three (indexed
/// by `s`) for quaternionic factors.
pub fn q_normal_closed(space: &ProductSpace, frame: &AdaptedFrame) -> Result<Vec<f64>> {
    closed_form(space, frame, true)
}

/// Tangent-side closed form, shaped like [`q_normal_closed`].
pub fn q_tangent_closed(space: &ProductSpace, frame: &AdaptedFrame) -> Result<Vec<f64>> {
    closed_form(space, frame, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassifierCase {
    D1,
    D2Complex,
    N1,
    N2Complex,
    QuatD1,
    QuatD2,
    QuatN1,
    QuatN2,
    Structure,
}

impl ClassifierCase {
    pub const ALL: [ClassifierCase; 9] = [
        Self::D1,
        Self::D2Complex,
        Self::N1,
        Self::N2Complex,
        Self::QuatD1,
        Self::QuatD2,
        Self::QuatN1,
        Self::QuatN2,
        Self::Structure,
    ];

    /// Factor kind and the `(side, count)` the case is about: side `true`
    /// means the normal frame, `false` the tangent frame.
    fn shape(self) -> (ProjectiveKind, bool, usize) {
        use ProjectiveKind::*;
        match self {
            Self::D1 => (Complex, true, 1),
            Self::D2Complex => (Complex, true, 2),
            Self::N1 => (Complex, false, 1),
            Self::N2Complex => (Complex, false, 2),
            Self::QuatD1 => (Quaternionic, true, 1),
            Self::QuatD2 => (Quaternionic, true, 2),
            Self::QuatN1 => (Quaternionic, false, 1),
            Self::QuatN2 => (Quaternionic, false, 2),
            Self::Structure => (Complex, true, 2),
        }
    }

    /// True when the case concerns the normal frame (`d = 1, 2`).
    pub fn is_normal_side(self) -> bool {
        self.shape().1
    }

    /// Number of frame vectors the case constrains (1 or 2).
    pub fn count(self) -> usize {
        self.shape().2
    }

    pub fn kind(self) -> ProjectiveKind {
        self.shape().0
    }

    /// The case matching `(kind, n, d)`, preferring the normal side.
    pub fn infer(space: &ProductSpace, frame: &AdaptedFrame) -> Option<Self> {
        let kind = space.factor1.kind();
        let pick = |normal: bool, count: usize| {
            Self::ALL.into_iter().find(|c| {
                *c != Self::Structure && c.shape() == (kind, normal, count)
            })
        };
        match (frame.n(), frame.d()) {
            (_, 1) => pick(true, 1),
            (_, 2) => pick(true, 2),
            (1, _) => pick(false, 1),
            (2, _) => pick(false, 2),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StructureKind {
    J1,
    J2,
    Both,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum VerdictDetail {
    /// Single vector case: norm of its factor-1 projection.
    ZeroProjection { norm: f64 },
    /// Complex pair case: `v₂¹ = ε J v₁¹`. `sign` is unset when both
    /// projections vanish.
    ComplexPair { sign: Option<i8>, residual: f64 },
    /// Quaternionic cases: every factor-1 projection vanishes.
    AllProjectionsVanish { max_norm: f64 },
    Structure(StructureKind),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierVerdict {
    pub case: ClassifierCase,
    pub q: f64,
    pub tolerance: f64,
    /// Violation margin `δ` of the equality condition; see [`violation_margin`].
    pub margin: f64,
    pub is_equality_case: bool,
    pub detail: Option<VerdictDetail>,
}

fn check_case(space: &ProductSpace, frame: &AdaptedFrame, case: ClassifierCase) -> Result<()> {
    let (kind, normal, count) = case.shape();
    if space.factor1.kind() != kind {
        return Err(Error::CaseMismatch(format!(
            "{case:?} needs a {kind:?} first factor"
        )));
    }
    if case == ClassifierCase::Structure {
        let ok = matches!(&space.factor2, FactorModel::Projective(p) if p.kind() == ProjectiveKind::Complex);
        if !ok {
            return Err(Error::CaseMismatch("Structure needs CP × CP".into()));
        }
        if frame.n() != 2 && frame.d() != 2 {
            return Err(Error::CaseMismatch("Structure needs n = 2 or d = 2".into()));
        }
        return Ok(());
    }
    let have = if normal { frame.d() } else { frame.n() };
    if have != count {
        let side = if normal { "d" } else { "n" };
        return Err(Error::CaseMismatch(format!(
            "{case:?} needs {side} = {count}, frame has {side} = {have}"
        )));
    }
    Ok(())
}

fn side(frame: &AdaptedFrame, normal: bool) -> &[AmbientVector] {
    if normal {
        frame.normal()
    } else {
        frame.tangent()
    }
}

/// `min_ε |v₂ − ε J v₁|²`.
fn pair_margin(j: &Structure, v1: &[f64], v2: &[f64]) -> f64 {
    let q = dot(&j.apply(v1), v2);
    (dot(v1, v1) + dot(v2, v2) - 2.0 * q.abs()).max(0.0)
}

/// The violation margin `δ` of the equality condition for `case`.
///
/// * single vector cases: `|v¹|²`
/// * complex pairs: `min_ε |v₂¹ − ε J v₁¹|²`
/// * quaternionic cases: `Σ |v¹|²`
/// * structure: the larger complex-pair margin over both factors
///
/// Each is quadratic in the frame so that `Q ≤ −c·δ²` near equality.
pub fn violation_margin(space: &ProductSpace, frame: &AdaptedFrame, case: ClassifierCase) -> Result<f64> {
    check_case(space, frame, case)?;
    let (_, normal, _) = case.shape();
    let vs = side(frame, normal);
    Ok(match case {
        ClassifierCase::D1 | ClassifierCase::N1 => dot(vs[0].first(), vs[0].first()),
        ClassifierCase::D2Complex | ClassifierCase::N2Complex => {
            pair_margin(space.factor1.j(), vs[0].first(), vs[1].first())
        }
        ClassifierCase::QuatD1
        | ClassifierCase::QuatD2
        | ClassifierCase::QuatN1
        | ClassifierCase::QuatN2 => vs.iter().map(|v| dot(v.first(), v.first())).sum(),
        ClassifierCase::Structure => {
            let vs = side(frame, frame.d() == 2);
            let j = space.factor1.j();
            let m1 = pair_margin(j, vs[0].first(), vs[1].first());
            let j2 = match &space.factor2 {
                FactorModel::Projective(p) => p.j(),
                _ => unreachable!("checked by check_case"),
            };
            let m2 = pair_margin(j2, vs[0].second(), vs[1].second());
            m1.max(m2)
        }
    })
}

/// Decides whether `Q` vanishes at this frame and reports the frame-level
/// consequence of the equality case.
pub fn classify_equality_case(
    space: &ProductSpace,
    frame: &AdaptedFrame,
    case: ClassifierCase,
) -> Result<ClassifierVerdict> {
    require_complete(frame)?;
    check_case(space, frame, case)?;
    let (_, normal, _) = case.shape();
    let margin = violation_margin(space, frame, case)?;
    let lam = space.lambda_squared();
    let tolerance = equality_tolerance(lam, frame.n(), frame.d());

    let q = if case == ClassifierCase::Structure {
        let swapped = space.swapped().expect("checked by check_case");
        q_from_sff(space, frame)? + q_from_sff(&swapped, &frame.swapped())?
    } else {
        q_from_sff(space, frame)?
    };
    let is_equality_case = q >= -tolerance;
    let detail = if !is_equality_case {
        None
    } else {
        let vs = side(frame, normal);
        Some(match case {
            ClassifierCase::D1 | ClassifierCase::N1 => VerdictDetail::ZeroProjection {
                norm: dot(vs[0].first(), vs[0].first()).sqrt(),
            },
            ClassifierCase::D2Complex | ClassifierCase::N2Complex => {
                complex_pair_detail(space.factor1.j(), vs[0].first(), vs[1].first())
            }
            ClassifierCase::Structure => {
                VerdictDetail::Structure(detect_structure(space, frame, STRUCTURE_TOLERANCE)?)
            }
            _ => VerdictDetail::AllProjectionsVanish {
                max_norm: vs
                    .iter()
                    .map(|v| dot(v.first(), v.first()).sqrt())
                    .fold(0.0, f64::max),
            },
        })
    };
    Ok(ClassifierVerdict {
        case,
        q,
        tolerance,
        margin,
        is_equality_case,
        detail,
    })
}

fn complex_pair_detail(j: &Structure, v1: &[f64], v2: &[f64]) -> VerdictDetail {
    let (n1, n2) = (dot(v1, v1).sqrt(), dot(v2, v2).sqrt());
    if n1 <= ZERO_PROJECTION_TOLERANCE && n2 <= ZERO_PROJECTION_TOLERANCE {
        return VerdictDetail::ComplexPair {
            sign: None,
            residual: n1.max(n2),
        };
    }
    let jv1 = j.apply(v1);
    let eps: i8 = if dot(v2, &jv1) >= 0.0 { 1 } else { -1 };
    let residual = v2
        .iter()
        .zip(&jv1)
        .map(|(a, b)| (a - f64::from(eps) * b).powi(2))
        .sum::<f64>()
        .sqrt();
    VerdictDetail::ComplexPair {
        sign: Some(eps),
        residual,
    }
}

/// Which of `J₁ = (J, J)` and `J₂ = (J, −J)` leave the frame's 2-plane
/// invariant. The plane is the tangent plane when `n = 2`, otherwise the
/// normal plane (`d = 2`); both choices are equivalent since `J_i` is
/// orthogonal.
pub fn detect_structure(space: &ProductSpace, frame: &AdaptedFrame, tol: f64) -> Result<StructureKind> {
    let j2 = match &space.factor2 {
        FactorModel::Projective(p)
            if p.kind() == ProjectiveKind::Complex
                && space.factor1.kind() == ProjectiveKind::Complex =>
        {
            p.j()
        }
        _ => return Err(Error::CaseMismatch("structure detection needs CP × CP".into())),
    };
    if frame.split() != space.split() {
        return Err(Error::DimensionMismatch {
            expected: space.split().ambient(),
            found: frame.split().ambient(),
        });
    }
    let plane = match (frame.n(), frame.d()) {
        (2, _) => frame.tangent(),
        (_, 2) => frame.normal(),
        (n, d) => {
            return Err(Error::CaseMismatch(format!(
                "structure detection needs n = 2 or d = 2, got n = {n}, d = {d}"
            )))
        }
    };
    let j1 = space.factor1.j();
    let invariant = |sign2: f64| {
        plane.iter().all(|b| {
            let mut second = j2.apply(b.second());
            second.iter_mut().for_each(|x| *x *= sign2);
            let image = AmbientVector::from_parts(&j1.apply(b.first()), &second);
            let residual = plane
                .iter()
                .fold(image.clone(), |acc, c| acc.add_scaled(-image.dot(c), c));
            residual.norm() <= tol
        })
    };
    Ok(match (invariant(1.0), invariant(-1.0)) {
        (true, true) => StructureKind::Both,
        (true, false) => StructureKind::J1,
        (false, true) => StructureKind::J2,
        (false, false) => StructureKind::Neither,
    })
}

/// `Q` by every applicable formula plus an optional classifier verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondVariationReport {
    pub q_sff: f64,
    pub q_curvature: f64,
    pub q_mid: f64,
    pub q_normal_closed: Vec<f64>,
    pub q_tangent_closed: Vec<f64>,
    pub max_discrepancy: f64,
    pub classifier: Option<ClassifierVerdict>,
}

impl SecondVariationReport {
    pub fn compute(space: &ProductSpace, frame: &AdaptedFrame, case: Option<ClassifierCase>) -> Result<Self> {
        let q_sff = q_from_sff(space, frame)?;
        let q_curvature = q_curvature_form(space, frame)?;
        let q_mid = q_midform(space, frame)?;
        let (q_normal_closed, q_tangent_closed) = if frame.is_complete() {
            (q_normal_closed(space, frame)?, q_tangent_closed(space, frame)?)
        } else {
            (Vec::new(), Vec::new())
        };
        let mut report = Self {
            q_sff,
            q_curvature,
            q_mid,
            q_normal_closed,
            q_tangent_closed,
            max_discrepancy: 0.0,
            classifier: None,
        };
        let (lo, hi) = report
            .values()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        report.max_discrepancy = hi - lo;
        let case = case.or_else(|| ClassifierCase::infer(space, frame));
        if let (Some(case), true) = (case, frame.is_complete()) {
            report.classifier = Some(classify_equality_case(space, frame, case)?);
        }
        Ok(report)
    }

    /// Every computed value of `Q`.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        [self.q_sff, self.q_curvature, self.q_mid]
            .into_iter()
            .chain(self.q_normal_closed.iter().copied())
            .chain(self.q_tangent_closed.iter().copied())
    }

    /// `max_discrepancy / (1 + max |Q|)`.
    pub fn relative_discrepancy(&self) -> f64 {
        let scale = self.values().fold(0.0_f64, |m, v| m.max(v.abs()));
        self.max_discrepancy / (1.0 + scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FactorModel;
    use crate::tangent::{random_adapted_frame, Split};
    use approx::assert_abs_diff_eq;

    fn cp_flat(m1: usize, m2: usize) -> ProductSpace {
        ProductSpace::new(
            ProjectiveModel::complex(m1).unwrap(),
            FactorModel::flat(m2).unwrap(),
        )
    }

    fn frame(tangent: &[&[f64]], normal: &[&[f64]], m1: usize) -> AdaptedFrame {
        let mk = |c: &&[f64]| AmbientVector::new(c.to_vec(), Split::new(m1, c.len() - m1)).unwrap();
        AdaptedFrame::new(tangent.iter().map(mk).collect(), normal.iter().map(mk).collect()).unwrap()
    }

    #[test]
    fn slice_frame_gives_zero() {
        // Σ = point × M₂: every e¹ = 0
        let space = cp_flat(2, 2);
        let f = frame(
            &[&[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 0.0, 1.0]],
            &[&[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]],
            2,
        );
        assert_eq!(q_from_sff(&space, &f).unwrap(), 0.0);
        assert_eq!(q_midform(&space, &f).unwrap(), 0.0);
        assert_eq!(q_curvature_form(&space, &f).unwrap(), 0.0);
    }

    #[test]
    fn cp1_flat_codim_one_with_horizontal_normal() {
        // CP¹ × R, normal (0,0,1): η¹ = 0
        let space = cp_flat(2, 1);
        let f = frame(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]], &[&[0.0, 0.0, 1.0]], 2);
        assert_eq!(q_from_sff(&space, &f).unwrap(), 0.0);
        assert_eq!(q_normal_closed(&space, &f).unwrap(), vec![0.0]);
    }

    #[test]
    fn single_pair_with_orthogonal_complex_line() {
        // e¹ ⟂ η¹, e¹ ⟂ Jη¹: sectional curvature λ²/4
        let space = cp_flat(4, 1);
        let f = frame(&[&[1.0, 0.0, 0.0, 0.0, 0.0]], &[&[0.0, 0.0, 1.0, 0.0, 0.0]], 4);
        assert_abs_diff_eq!(q_curvature_form(&space, &f).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn midform_examples() {
        let space = cp_flat(2, 1);
        let f = frame(&[&[0.0, 1.0, 0.0]], &[&[1.0, 0.0, 0.0]], 2);
        // e¹ = J η¹
        assert_abs_diff_eq!(q_midform(&space, &f).unwrap(), -1.0, epsilon = 1e-15);

        let hp = ProductSpace::new(ProjectiveModel::quaternionic(4).unwrap(), FactorModel::flat(1).unwrap());
        let eta = [1.0, 0.0, 0.0, 0.0];
        let e = hp.factor1.structures()[1].apply(&eta);
        let f = frame(
            &[&[e[0], e[1], e[2], e[3], 0.0]],
            &[&[eta[0], eta[1], eta[2], eta[3], 0.0]],
            4,
        );
        assert_abs_diff_eq!(q_midform(&hp, &f).unwrap(), -hp.lambda_squared(), epsilon = 1e-15);
    }

    #[test]
    fn closed_forms_need_complete_frames() {
        let space = cp_flat(4, 1);
        let f = random_adapted_frame(5, 2, 1, space.split()).unwrap();
        assert!(matches!(q_normal_closed(&space, &f), Err(Error::IncompleteFrame { .. })));
        assert!(matches!(q_tangent_closed(&space, &f), Err(Error::IncompleteFrame { .. })));
        let report = SecondVariationReport::compute(&space, &f, None).unwrap();
        assert!(report.q_normal_closed.is_empty());
        assert!(report.relative_discrepancy() < 1e-12);
    }

    #[test]
    fn d1_closed_form_is_minus_quartic() {
        let space = cp_flat(2, 1);
        for seed in 0..20 {
            let f = random_adapted_frame(seed, 2, 1, space.split()).unwrap();
            let t2 = dot(f.normal()[0].first(), f.normal()[0].first());
            let q = q_normal_closed(&space, &f).unwrap()[0];
            assert_abs_diff_eq!(q, -t2 * t2, epsilon = 1e-14);
        }
    }

    #[test]
    fn mismatched_split_rejected() {
        let space = cp_flat(4, 1);
        let f = random_adapted_frame(0, 2, 1, Split::new(2, 1)).unwrap();
        assert!(matches!(q_from_sff(&space, &f), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn case_mismatch() {
        let space = cp_flat(4, 1);
        let f = random_adapted_frame(0, 4, 1, space.split()).unwrap();
        assert!(matches!(
            classify_equality_case(&space, &f, ClassifierCase::D2Complex),
            Err(Error::CaseMismatch(_))
        ));
        assert!(matches!(
            classify_equality_case(&space, &f, ClassifierCase::QuatD1),
            Err(Error::CaseMismatch(_))
        ));
        assert!(matches!(
            detect_structure(&space, &f, 1e-9),
            Err(Error::CaseMismatch(_))
        ));
        let partial = random_adapted_frame(0, 3, 1, space.split()).unwrap();
        assert!(matches!(
            classify_equality_case(&space, &partial, ClassifierCase::D1),
            Err(Error::IncompleteFrame { .. })
        ));
    }

    #[test]
    fn inferred_case() {
        let space = cp_flat(4, 1);
        let f = random_adapted_frame(0, 4, 1, space.split()).unwrap();
        assert_eq!(ClassifierCase::infer(&space, &f), Some(ClassifierCase::D1));
        let f = random_adapted_frame(0, 1, 4, space.split()).unwrap();
        assert_eq!(ClassifierCase::infer(&space, &f), Some(ClassifierCase::N1));
    }
}
