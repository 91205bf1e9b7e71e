use minstab::tangent::{gram_schmidt, project_factor, random_adapted_frame, stream_seed};
use minstab::{AmbientVector, Factor, Split};
use proptest::prelude::*;

fn split_strategy() -> impl Strategy<Value = Split> {
    (1usize..6, 1usize..5).prop_map(|(a, b)| Split::new(a, b))
}

fn vector(split: Split) -> impl Strategy<Value = AmbientVector> {
    prop::collection::vec(-2.0..2.0f64, split.ambient())
        .prop_map(move |c| AmbientVector::new(c, split).unwrap())
}

proptest! {
    #[test]
    fn completeness_identity(split in split_strategy(), seed: u64, w in prop::collection::vec(-3.0..3.0f64, 9)) {
        let m = split.ambient();
        prop_assume!(m >= 2);
        let n = 1 + (seed as usize) % (m - 1);
        let frame = random_adapted_frame(seed, n, m - n, split).unwrap();
        let w = AmbientVector::new(w[..m].to_vec(), split).unwrap();
        let sum: f64 = frame.vectors().map(|v| v.dot(&w).powi(2)).sum();
        prop_assert!((sum - w.norm_squared()).abs() <= 1e-10 * (1.0 + w.norm_squared()));
        prop_assert!(frame.completeness_residual(&w) <= 1e-10 * (1.0 + w.norm_squared()));
        prop_assert!(frame.orthonormality_defect() <= 1e-12);
    }

    #[test]
    fn projections_idempotent_and_self_adjoint(
        (u, v) in split_strategy().prop_flat_map(|s| (vector(s), vector(s)))
    ) {
        for which in [Factor::First, Factor::Second] {
            let pu = project_factor(&u, which);
            prop_assert_eq!(&project_factor(&pu, which), &pu);
            let lhs = pu.dot(&v);
            let rhs = u.dot(&project_factor(&v, which));
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }
        let sum = project_factor(&u, Factor::First).add_scaled(1.0, &project_factor(&u, Factor::Second));
        prop_assert_eq!(sum, u);
    }

    #[test]
    fn gram_schmidt_is_orthonormal(split in split_strategy(), seed: u64) {
        let frame = random_adapted_frame(seed, split.ambient(), 0, split).unwrap();
        let again = gram_schmidt(frame.tangent()).unwrap();
        for (a, b) in again.iter().zip(frame.tangent()) {
            prop_assert!(a.add_scaled(-1.0, b).norm() <= 1e-12);
        }
    }
}

#[test]
fn frames_are_bitwise_reproducible() {
    let split = Split::new(4, 3);
    for i in 0..20 {
        let seed = stream_seed(42, i);
        let a = random_adapted_frame(seed, 3, 4, split).unwrap();
        let b = random_adapted_frame(seed, 3, 4, split).unwrap();
        assert_eq!(a, b);
    }
    assert_ne!(stream_seed(42, 0), stream_seed(42, 1));
}

/// A frame vector is uniform on the unit sphere of `R^{m₁+m₂}`, so
/// `E|v¹|² = m₁/(m₁+m₂)`.
#[test]
fn monte_carlo_projection_mean() {
    let split = Split::new(4, 2);
    let samples = 4000;
    let values: Vec<f64> = (0..samples)
        .map(|i| {
            let f = random_adapted_frame(stream_seed(7, i), 1, 1, split).unwrap();
            f.tangent()[0].first().iter().map(|x| x * x).sum()
        })
        .collect();
    let mean = values.iter().sum::<f64>() / samples as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
    let sigma = (var / samples as f64).sqrt();
    let expected = 4.0 / 6.0;
    assert!((mean - expected).abs() <= 3.0 * sigma, "mean {mean}, expected {expected} ± {}", 3.0 * sigma);
}
