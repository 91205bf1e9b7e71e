use minstab::construct::{complex_pair_frame, mix_roles, structure_plane_frame, zero_projection_frame, PlaneKind, Role};
use minstab::tangent::{random_adapted_frame, stream_seed};
use minstab::variation::{
    classify_equality_case, detect_structure, q_curvature_form, q_from_sff, q_midform, q_normal_closed,
    q_tangent_closed, ClassifierCase, SecondVariationReport, StructureKind, VerdictDetail, STRUCTURE_TOLERANCE,
};
use minstab::{AdaptedFrame, AmbientVector, Error, FactorModel, ProductSpace, ProjectiveModel};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn cp(m1: usize) -> ProjectiveModel {
    ProjectiveModel::complex(m1).unwrap()
}

fn hp(m1: usize) -> ProjectiveModel {
    ProjectiveModel::quaternionic(m1).unwrap()
}

fn configurations() -> Vec<ProductSpace> {
    vec![
        ProductSpace::new(cp(2), FactorModel::flat(1).unwrap()),
        ProductSpace::new(cp(4), FactorModel::flat(2).unwrap()),
        ProductSpace::new(cp(6), FactorModel::flat(1).unwrap()),
        ProductSpace::new(cp(4), FactorModel::sphere(2, 1.5).unwrap()),
        ProductSpace::new(cp(2), FactorModel::Projective(cp(4))),
        ProductSpace::new(hp(4), FactorModel::flat(2).unwrap()),
        ProductSpace::new(hp(8), FactorModel::flat(1).unwrap()),
        ProductSpace::new(hp(4), FactorModel::sphere(3, 0.8).unwrap()),
    ]
}

fn space_and_frame() -> impl Strategy<Value = (ProductSpace, AdaptedFrame)> {
    (prop::sample::select(configurations()), any::<u64>()).prop_map(|(space, seed)| {
        let m = space.split().ambient();
        let n = 1 + (seed % (m as u64 - 1)) as usize;
        let frame = random_adapted_frame(seed, n, m - n, space.split()).unwrap();
        (space, frame)
    })
}

fn orthogonal(size: usize, seed: u64) -> DMatrix<f64> {
    let mut s = seed | 1;
    let raw = DMatrix::from_fn(size, size, |_, _| {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    });
    raw.qr().q()
}

fn remix(vs: &[AmbientVector], o: &DMatrix<f64>) -> Vec<AmbientVector> {
    (0..vs.len())
        .map(|i| {
            (0..vs.len()).fold(AmbientVector::zeros(vs[0].split()), |acc, j| acc.add_scaled(o[(i, j)], &vs[j]))
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #[test]
    fn five_formulas_agree((space, frame) in space_and_frame()) {
        let report = SecondVariationReport::compute(&space, &frame, None).unwrap();
        prop_assert!(report.relative_discrepancy() <= 1e-9, "{report:?}");
        let expected = space.factor1.structures().len();
        prop_assert_eq!(report.q_normal_closed.len(), expected);
        prop_assert_eq!(report.q_tangent_closed.len(), expected);
    }

    #[test]
    fn q_is_basis_independent((space, frame) in space_and_frame(), seed: u64) {
        let t = remix(frame.tangent(), &orthogonal(frame.n(), seed));
        let n = remix(frame.normal(), &orthogonal(frame.d(), seed.rotate_left(17)));
        let mixed = AdaptedFrame::new(t, n).unwrap();
        let a = q_from_sff(&space, &frame).unwrap();
        let b = q_from_sff(&space, &mixed).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
    }

    /// For the round models `B(X,Y) = −⟨X,Y⟩x`, so
    /// `Q = Σ 2⟨e¹,η¹⟩² − |e¹|²|η¹|²`.
    #[test]
    fn rank_one_oracle(seed: u64, quaternionic: bool, m2 in 1usize..4) {
        let first = if quaternionic { hp(4) } else { cp(2) };
        let space = ProductSpace::new(first, FactorModel::flat(m2).unwrap());
        let m = space.split().ambient();
        let n = 1 + (seed % (m as u64 - 1)) as usize;
        let frame = random_adapted_frame(seed, n, m - n, space.split()).unwrap();
        let mut oracle = 0.0;
        for e in frame.tangent() {
            for eta in frame.normal() {
                let (e, eta) = (e.first(), eta.first());
                oracle += 2.0 * dot(e, eta).powi(2) - dot(e, e) * dot(eta, eta);
            }
        }
        let q = q_from_sff(&space, &frame).unwrap();
        prop_assert!((q - oracle).abs() <= 1e-12);
    }
}

#[test]
fn incomplete_frames_give_three_formulas() {
    let space = ProductSpace::new(cp(4), FactorModel::flat(2).unwrap());
    let frame = random_adapted_frame(3, 2, 2, space.split()).unwrap();
    let a = q_from_sff(&space, &frame).unwrap();
    let b = q_curvature_form(&space, &frame).unwrap();
    let c = q_midform(&space, &frame).unwrap();
    assert!((a - b).abs() <= 1e-12 && (a - c).abs() <= 1e-12);
    assert!(matches!(q_normal_closed(&space, &frame), Err(Error::IncompleteFrame { .. })));
    assert!(matches!(q_tangent_closed(&space, &frame), Err(Error::IncompleteFrame { .. })));
}

#[test]
fn sign_theorems_small_scan() {
    let regimes: Vec<(ProductSpace, usize, bool)> = vec![
        (ProductSpace::new(cp(4), FactorModel::flat(2).unwrap()), 1, true),
        (ProductSpace::new(cp(4), FactorModel::flat(2).unwrap()), 2, true),
        (ProductSpace::new(cp(4), FactorModel::flat(2).unwrap()), 1, false),
        (ProductSpace::new(cp(4), FactorModel::flat(2).unwrap()), 2, false),
        (ProductSpace::new(hp(4), FactorModel::flat(2).unwrap()), 1, true),
        (ProductSpace::new(hp(8), FactorModel::flat(1).unwrap()), 2, true),
        (ProductSpace::new(hp(4), FactorModel::flat(3).unwrap()), 1, false),
        (ProductSpace::new(hp(4), FactorModel::flat(2).unwrap()), 2, false),
    ];
    for (space, count, normal) in regimes {
        let m = space.split().ambient();
        let (n, d) = if normal { (m - count, count) } else { (count, m - count) };
        let worst = (0..2000)
            .map(|i| {
                let f = random_adapted_frame(stream_seed(11, i), n, d, space.split()).unwrap();
                q_from_sff(&space, &f).unwrap()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(worst <= 1e-11, "n={n} d={d}: max Q = {worst}");
    }
}

#[test]
fn constructed_equality_frames() {
    let space = ProductSpace::new(cp(4), FactorModel::flat(2).unwrap());
    for (i, sign) in [1i8, -1].into_iter().enumerate() {
        for role in [Role::Normal, Role::Tangent] {
            let f = complex_pair_frame(&space, sign, 0.6, role, i as u64).unwrap();
            let case = if role == Role::Normal { ClassifierCase::D2Complex } else { ClassifierCase::N2Complex };
            let v = classify_equality_case(&space, &f, case).unwrap();
            assert!(v.q.abs() <= 1e-10 && v.is_equality_case);
            match v.detail {
                Some(VerdictDetail::ComplexPair { sign: Some(s), residual }) => {
                    assert_eq!(s, sign);
                    assert!(residual <= 1e-12);
                }
                other => panic!("unexpected detail {other:?}"),
            }
        }
    }
    let hspace = ProductSpace::new(hp(4), FactorModel::flat(2).unwrap());
    for (count, case) in [(1, ClassifierCase::QuatD1), (2, ClassifierCase::QuatD2)] {
        let f = zero_projection_frame(&hspace, count, Role::Normal, 9).unwrap();
        let v = classify_equality_case(&hspace, &f, case).unwrap();
        assert_eq!(v.q, 0.0);
        assert_eq!(v.detail, Some(VerdictDetail::AllProjectionsVanish { max_norm: 0.0 }));
    }
}

#[test]
fn perturbed_frames_are_strictly_negative() {
    let space = ProductSpace::new(cp(4), FactorModel::flat(2).unwrap());
    let base = zero_projection_frame(&space, 1, Role::Normal, 4).unwrap();
    let mut ratios = Vec::new();
    for angle in [0.05, 0.1, 0.2, 0.4] {
        let f = mix_roles(&base, 0, 0, angle).unwrap();
        let v = classify_equality_case(&space, &f, ClassifierCase::D1).unwrap();
        assert!(!v.is_equality_case && v.detail.is_none());
        ratios.push(-v.q / (v.margin * v.margin));
    }
    // d = 1: Q = −λ²|η¹|⁴ exactly
    for r in ratios {
        assert!((r - space.lambda_squared()).abs() <= 1e-9, "{r}");
    }
}

#[test]
fn structure_detection_examples() {
    let space = ProductSpace::new(cp(2), FactorModel::Projective(cp(2)));
    let expect = [
        (PlaneKind::J1, StructureKind::J1),
        (PlaneKind::J2, StructureKind::J2),
        (PlaneKind::FirstOnly, StructureKind::Both),
        (PlaneKind::SecondOnly, StructureKind::Both),
    ];
    for (plane, kind) in expect {
        for role in [Role::Tangent, Role::Normal] {
            let f = structure_plane_frame(&space, plane, 0.7, role, 21).unwrap();
            assert_eq!(detect_structure(&space, &f, STRUCTURE_TOLERANCE).unwrap(), kind);
            let v = classify_equality_case(&space, &f, ClassifierCase::Structure).unwrap();
            assert!(v.is_equality_case, "{plane:?} {role:?}: {}", v.q);
            assert_eq!(v.detail, Some(VerdictDetail::Structure(kind)));
        }
    }
    let generic = random_adapted_frame(1, 2, 2, space.split()).unwrap();
    assert_eq!(detect_structure(&space, &generic, STRUCTURE_TOLERANCE).unwrap(), StructureKind::Neither);
    let flat = ProductSpace::new(cp(2), FactorModel::flat(2).unwrap());
    assert!(matches!(detect_structure(&flat, &generic, STRUCTURE_TOLERANCE), Err(Error::CaseMismatch(_))));
}

#[test]
fn lambda_override_breaks_agreement() {
    let space = ProductSpace::new(cp(4).with_lambda_squared_override(1.5), FactorModel::flat(2).unwrap());
    let worst = (0..50)
        .map(|i| {
            let f = random_adapted_frame(stream_seed(2, i), 3, 3, space.split()).unwrap();
            SecondVariationReport::compute(&space, &f, None).unwrap().relative_discrepancy()
        })
        .fold(0.0, f64::max);
    assert!(worst > 1e-3, "{worst}");
}

#[test]
fn case_mismatch_is_reported() {
    let space = ProductSpace::new(cp(4), FactorModel::flat(2).unwrap());
    let f = random_adapted_frame(0, 3, 3, space.split()).unwrap();
    assert!(matches!(classify_equality_case(&space, &f, ClassifierCase::D1), Err(Error::CaseMismatch(_))));
    assert!(matches!(classify_equality_case(&space, &f, ClassifierCase::QuatD2), Err(Error::CaseMismatch(_))));
}
