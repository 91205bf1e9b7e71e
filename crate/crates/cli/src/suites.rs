//! The four verification suites behind the subcommands.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::time::Instant;

use minstab::construct::{complex_pair_frame, mix_roles, structure_plane_frame, zero_projection_frame, PlaneKind, Role};
use minstab::geodesic::{geodesic_spectrum, GeodesicSpec, GeodesicSpectrum, SecondFactor};
use minstab::tangent::{random_adapted_frame, stream_seed};
use minstab::variation::{
    classify_equality_case, detect_structure, equality_tolerance, q_from_sff, q_normal_closed, q_tangent_closed,
    ClassifierCase, ClassifierVerdict, SecondVariationReport, StructureKind, VerdictDetail, ZERO_PROJECTION_TOLERANCE,
};
use minstab::{AdaptedFrame, FactorModel, ProductSpace, ProjectiveKind};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{GeodesicConfig, SuiteConfig};
use crate::report::{Check, QSummary, SpectrumRow, SuiteReport};
use crate::RunError;

const RICHARDSON_NODES: [usize; 3] = [64, 128, 256];
const LEADING_EIGENVALUES: usize = 8;
const MAX_ATTEMPTS_PER_SAMPLE: usize = 20;

// suite tags mixed into per-task seeds
const TAG_IDENTITIES: u64 = 1;
const TAG_SIGN: u64 = 2;
const TAG_EQUALITY: u64 = 3;
const TAG_VIOLATION: u64 = 4;
const TAG_COLLAPSE: u64 = 5;
const TAG_STRUCTURE: u64 = 6;

fn task_rng(seed: u64, tag: u64, regime: usize, index: usize) -> ChaCha8Rng {
    let s = stream_seed(stream_seed(stream_seed(seed, tag), regime as u64), index as u64);
    ChaCha8Rng::seed_from_u64(s)
}

fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Random complete frames with `n` drawn uniformly from `1..m`.
pub fn verify_identities(config: &SuiteConfig) -> Result<SuiteReport, RunError> {
    let tol = config.tolerance("identity_relative");
    let mut suite = SuiteReport::new("formula_equivalence");
    for (si, (label, space)) in config.built_spaces()?.into_iter().enumerate() {
        let m = space.split().ambient();
        let mut q = Vec::with_capacity(config.samples);
        let mut disc = Vec::with_capacity(config.samples);
        for i in 0..config.samples {
            let mut rng = task_rng(config.seed, TAG_IDENTITIES, si, i);
            let n = rng.random_range(1..m);
            let frame = random_adapted_frame(rng.random(), n, m - n, space.split())?;
            let report = SecondVariationReport::compute(&space, &frame, None)?;
            q.push(report.q_sff);
            disc.push(report.relative_discrepancy());
        }
        let failures = disc.iter().filter(|d| !(**d <= tol)).count();
        suite.push(Check::at_most(format!("equivalence:{label}"), worst(disc), tol, config.samples, failures));
        let eq = equality_tolerance(space.lambda_squared(), 1, m - 1);
        suite.q_summaries.push(QSummary::of(label, &q, eq, false));
    }
    Ok(suite)
}

/// `(n, d)` of the regime, or `None` when the case does not fit the space.
fn regime_dims(space: &ProductSpace, case: ClassifierCase) -> Option<(usize, usize)> {
    if case == ClassifierCase::Structure || case.kind() != space.factor1.kind() {
        return None;
    }
    let m = space.split().ambient();
    let count = case.count();
    if m <= count {
        return None;
    }
    Some(if case.is_normal_side() {
        (m - count, count)
    } else {
        (count, m - count)
    })
}

fn regimes(config: &SuiteConfig) -> Result<Vec<(String, ProductSpace, ClassifierCase)>, RunError> {
    config.require_cases()?;
    let mut out = Vec::new();
    for (label, space) in config.built_spaces()? {
        for &case in &config.cases {
            if regime_dims(&space, case).is_some() {
                out.push((format!("{label} {case:?}"), space.clone(), case));
            }
        }
    }
    Ok(out)
}

pub fn sign_scan(config: &SuiteConfig) -> Result<SuiteReport, RunError> {
    let tol = config.tolerance("sign");
    let mut suite = SuiteReport::new("sign_theorems");
    for (ri, (label, space, case)) in regimes(config)?.into_iter().enumerate() {
        let (n, d) = regime_dims(&space, case).expect("filtered");
        let q = (0..config.samples)
            .map(|i| {
                let mut rng = task_rng(config.seed, TAG_SIGN, ri, i);
                let frame = random_adapted_frame(rng.random(), n, d, space.split())?;
                Ok(q_from_sff(&space, &frame)?)
            })
            .collect::<Result<Vec<f64>, RunError>>()?;
        let failures = q.iter().filter(|v| !(**v <= tol)).count();
        suite.push(Check::at_most(format!("sign:{label}"), worst(q.iter().copied()), tol, q.len(), failures));
        let eq = equality_tolerance(space.lambda_squared(), n, d);
        suite.q_summaries.push(QSummary::of(label, &q, eq, true));
    }
    Ok(suite)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Expected {
    ZeroProjection,
    Pair(Option<i8>),
    AllVanish,
}

fn role(case: ClassifierCase) -> Role {
    if case.is_normal_side() {
        Role::Normal
    } else {
        Role::Tangent
    }
}

/// A frame realising the equality case, or `None` when the second factor
/// is too small for the requested construction.
fn equality_frame(
    space: &ProductSpace,
    case: ClassifierCase,
    rng: &mut ChaCha8Rng,
) -> Result<Option<(AdaptedFrame, Expected)>, RunError> {
    use ClassifierCase::*;
    let m2 = space.split().m2;
    let role = role(case);
    let seed: u64 = rng.random();
    Ok(match case {
        D1 | N1 => Some((zero_projection_frame(space, 1, role, seed)?, Expected::ZeroProjection)),
        D2Complex | N2Complex => {
            if m2 >= 2 && rng.random_ratio(1, 4) {
                Some((zero_projection_frame(space, 2, role, seed)?, Expected::Pair(None)))
            } else {
                let sign = if rng.random() { 1 } else { -1 };
                let theta = if m2 >= 2 { rng.random_range(0.0..FRAC_PI_2 - 0.05) } else { 0.0 };
                Some((complex_pair_frame(space, sign, theta, role, seed)?, Expected::Pair(Some(sign))))
            }
        }
        QuatD1 | QuatD2 | QuatN1 | QuatN2 => {
            if m2 < case.count() {
                None
            } else {
                Some((zero_projection_frame(space, case.count(), role, seed)?, Expected::AllVanish))
            }
        }
        Structure => None,
    })
}

fn verdict_matches(v: &ClassifierVerdict, expected: Expected) -> bool {
    v.is_equality_case
        && match (expected, &v.detail) {
            (Expected::ZeroProjection, Some(VerdictDetail::ZeroProjection { norm })) => {
                *norm <= ZERO_PROJECTION_TOLERANCE
            }
            (Expected::Pair(s), Some(VerdictDetail::ComplexPair { sign, residual })) => {
                *sign == s && (s.is_none() || *residual <= ZERO_PROJECTION_TOLERANCE)
            }
            (Expected::AllVanish, Some(VerdictDetail::AllProjectionsVanish { max_norm })) => {
                *max_norm <= ZERO_PROJECTION_TOLERANCE
            }
            _ => false,
        }
}

/// Rotates one constrained vector of an equality frame into the other side.
fn perturb(frame: &AdaptedFrame, case: ClassifierCase, rng: &mut ChaCha8Rng) -> Result<AdaptedFrame, RunError> {
    let lead = rng.random_range(0..case.count());
    let angle = rng.random_range(0.15..1.4);
    Ok(if case.is_normal_side() {
        mix_roles(frame, rng.random_range(0..frame.n()), lead, angle)?
    } else {
        mix_roles(frame, lead, rng.random_range(0..frame.d()), angle)?
    })
}

fn constrained_side(frame: &AdaptedFrame, case: ClassifierCase) -> &[minstab::AmbientVector] {
    let vs = if case.is_normal_side() {
        frame.normal()
    } else {
        frame.tangent()
    };
    &vs[..case.count()]
}

fn closed_forms(space: &ProductSpace, frame: &AdaptedFrame, case: ClassifierCase) -> Result<Vec<f64>, RunError> {
    Ok(if case.is_normal_side() {
        q_normal_closed(space, frame)?
    } else {
        q_tangent_closed(space, frame)?
    })
}

/// Collapse bookkeeping: frames whose closed forms all vanish and the
/// largest constrained projection among them.
#[derive(Default)]
struct Collapse {
    vanishing: usize,
    worst: f64,
    failures: usize,
}

impl Collapse {
    fn observe(
        &mut self,
        space: &ProductSpace,
        frame: &AdaptedFrame,
        case: ClassifierCase,
        zero: f64,
        bound: f64,
    ) -> Result<(), RunError> {
        let forms = closed_forms(space, frame, case)?;
        if forms.iter().all(|q| q.abs() <= zero) {
            self.vanishing += 1;
            let norm = constrained_side(frame, case)
                .iter()
                .map(|v| v.first().iter().map(|x| x * x).sum::<f64>().sqrt())
                .fold(0.0, f64::max);
            self.worst = self.worst.max(norm);
            if norm > bound {
                self.failures += 1;
            }
        }
        Ok(())
    }
}

pub fn classify(config: &SuiteConfig) -> Result<Vec<SuiteReport>, RunError> {
    let eq_tol = config.tolerance("equality");
    let margin_tol = config.tolerance("violation_margin");
    let viol_q = config.tolerance("violation_q");
    let collapse_bound = config.tolerance("collapse");
    let mut equality = SuiteReport::new("equality_characterization");
    let mut collapse = SuiteReport::new("quaternionic_collapse");

    for (ri, (label, space, case)) in regimes(config)?.into_iter().enumerate() {
        let quaternionic = case.kind() == ProjectiveKind::Quaternionic;
        let mut tracker = Collapse::default();
        let (n, d) = regime_dims(&space, case).expect("filtered");

        // constructed equality frames
        let mut q_abs = Vec::new();
        let mut mismatches = 0;
        for i in 0..config.samples {
            let mut rng = task_rng(config.seed, TAG_EQUALITY, ri, i);
            let Some((frame, expected)) = equality_frame(&space, case, &mut rng)? else {
                break;
            };
            let v = classify_equality_case(&space, &frame, case)?;
            q_abs.push(v.q.abs());
            if !verdict_matches(&v, expected) {
                mismatches += 1;
            }
            if quaternionic {
                tracker.observe(&space, &frame, case, eq_tol, collapse_bound)?;
            }
        }
        if q_abs.is_empty() {
            continue;
        }
        let over = q_abs.iter().filter(|q| !(**q <= eq_tol)).count();
        equality.push(Check::at_most(format!("equality_q:{label}"), worst(q_abs.iter().copied()), eq_tol, q_abs.len(), over));
        equality.push(Check::counted(format!("equality_verdict:{label}"), mismatches as f64, 0.0, q_abs.len(), mismatches));

        // frames violating the condition by at least the margin
        let mut q_viol = Vec::new();
        let mut verdict_errors = 0;
        let mut constant = f64::INFINITY;
        let mut attempts = 0;
        while q_viol.len() < config.samples && attempts < MAX_ATTEMPTS_PER_SAMPLE * config.samples {
            let mut rng = task_rng(config.seed, TAG_VIOLATION, ri, attempts);
            attempts += 1;
            let (base, _) = equality_frame(&space, case, &mut rng)?.expect("constructible above");
            let frame = perturb(&base, case, &mut rng)?;
            let v = classify_equality_case(&space, &frame, case)?;
            if v.margin < margin_tol {
                continue;
            }
            q_viol.push(v.q);
            constant = constant.min(-v.q / (v.margin * v.margin));
            if v.is_equality_case || v.detail.is_some() {
                verdict_errors += 1;
            }
            if quaternionic {
                tracker.observe(&space, &frame, case, eq_tol, collapse_bound)?;
            }
        }
        let shortfall = config.samples - q_viol.len();
        let positive = q_viol.iter().filter(|q| !(**q <= -viol_q)).count();
        equality.push(Check::at_most(
            format!("violation_q:{label}"),
            worst(q_viol.iter().copied()),
            -viol_q,
            q_viol.len(),
            positive + shortfall,
        ));
        equality.push(Check::counted(
            format!("violation_verdict:{label}"),
            verdict_errors as f64,
            0.0,
            q_viol.len(),
            verdict_errors,
        ));
        // Q ≤ −c·δ² with c > 0
        equality.push(Check::at_most(format!("violation_constant:{label}"), -constant, 0.0, q_viol.len(), usize::from(constant <= 0.0)));
        equality.q_summaries.push(QSummary::of(format!("{label} violating"), &q_viol, eq_tol, false));

        if quaternionic {
            let mut q_rand = Vec::with_capacity(config.samples);
            for i in 0..config.samples {
                let mut rng = task_rng(config.seed, TAG_COLLAPSE, ri, i);
                let frame = random_adapted_frame(rng.random(), n, d, space.split())?;
                q_rand.push(q_from_sff(&space, &frame)?);
                tracker.observe(&space, &frame, case, eq_tol, collapse_bound)?;
            }
            collapse.push(Check::counted(
                format!("collapse:{label}"),
                tracker.worst,
                collapse_bound,
                tracker.vanishing,
                tracker.failures,
            ));
            collapse.q_summaries.push(QSummary::of(format!("{label} random"), &q_rand, eq_tol, false));
        }
    }

    let mut out = vec![equality];
    if !collapse.checks.is_empty() {
        out.push(collapse);
    }
    if config.cases.contains(&ClassifierCase::Structure) {
        let structure = structure_suite(config)?;
        if !structure.checks.is_empty() {
            out.push(structure);
        }
    }
    Ok(out)
}

fn is_cp_cp(space: &ProductSpace) -> bool {
    space.factor1.kind() == ProjectiveKind::Complex
        && matches!(&space.factor2, FactorModel::Projective(p) if p.kind() == ProjectiveKind::Complex)
}

const PLANES: [(PlaneKind, StructureKind); 4] = [
    (PlaneKind::J1, StructureKind::J1),
    (PlaneKind::J2, StructureKind::J2),
    (PlaneKind::FirstOnly, StructureKind::Both),
    (PlaneKind::SecondOnly, StructureKind::Both),
];

fn structure_suite(config: &SuiteConfig) -> Result<SuiteReport, RunError> {
    let tol = config.tolerance("structure");
    let eq_tol = config.tolerance("equality");
    let mut suite = SuiteReport::new("structure_detection");
    for (si, (label, space)) in config.built_spaces()?.into_iter().enumerate() {
        if !is_cp_cp(&space) {
            continue;
        }
        for (pi, (plane, expected)) in PLANES.into_iter().enumerate() {
            let mut wrong = 0;
            let mut not_equal = 0;
            let mut q_worst = 0.0_f64;
            for i in 0..config.samples {
                let mut rng = task_rng(config.seed, TAG_STRUCTURE, si * 8 + pi, i);
                let theta = rng.random_range(0.2..FRAC_PI_2 - 0.2);
                let role = if rng.random() { Role::Tangent } else { Role::Normal };
                let frame = structure_plane_frame(&space, plane, theta, role, rng.random())?;
                if detect_structure(&space, &frame, tol)? != expected {
                    wrong += 1;
                }
                let v = classify_equality_case(&space, &frame, ClassifierCase::Structure)?;
                q_worst = q_worst.max(v.q.abs());
                if !(v.is_equality_case && v.detail == Some(VerdictDetail::Structure(expected))) {
                    not_equal += 1;
                }
            }
            let item = format!("{label} {plane:?}");
            suite.push(Check::counted(format!("detect:{item}"), wrong as f64, 0.0, config.samples, wrong));
            suite.push(Check::at_most(format!("structure_q:{item}"), q_worst, eq_tol, config.samples, not_equal));
        }

        // random 2-planes: every frame at equality must carry J1, J2 or Both
        let m = space.split().ambient();
        let mut q = Vec::with_capacity(config.samples);
        let mut neither_at_equality = 0;
        for i in 0..config.samples {
            let mut rng = task_rng(config.seed, TAG_STRUCTURE, si * 8 + 7, i);
            let (n, d) = if rng.random() { (2, m - 2) } else { (m - 2, 2) };
            let frame = random_adapted_frame(rng.random(), n, d, space.split())?;
            let v = classify_equality_case(&space, &frame, ClassifierCase::Structure)?;
            q.push(v.q);
            if v.detail == Some(VerdictDetail::Structure(StructureKind::Neither)) {
                neither_at_equality += 1;
            }
        }
        suite.push(Check::at_most(
            format!("random_partition:{label}"),
            neither_at_equality as f64,
            0.0,
            config.samples,
            neither_at_equality,
        ));
        suite.q_summaries.push(QSummary::of(format!("{label} random planes"), &q, eq_tol, false));
    }
    Ok(suite)
}

fn holonomy_defect(s: &GeodesicSpectrum) -> f64 {
    let h = s.holonomy_matrix();
    (&h - DMatrix::identity(h.nrows(), h.ncols())).amax()
}

fn spectrum_row(label: &str, spec: &GeodesicSpec, nodes: usize, s: &GeodesicSpectrum) -> SpectrumRow {
    SpectrumRow {
        label: label.to_string(),
        nodes,
        speeds: spec.speeds(),
        length: spec.length(),
        morse_index: s.morse_index,
        nullity: s.nullity,
        lambda_min: s.lambda_min(),
        tolerance: s.tolerance,
        leading_eigenvalues: s.eigenvalues.iter().take(LEADING_EIGENVALUES).copied().collect(),
        holonomy_defect: holonomy_defect(s),
        asymmetry: s.asymmetry,
        richardson_ratio: None,
    }
}

/// Index predicted by the stability classification: unstable whenever the
/// factor-1 component moves, otherwise the index of the second-factor
/// geodesic (`k − 1` on `S^k`, `0` on a circle).
pub fn predicted_index(spec: &GeodesicSpec) -> Option<usize> {
    if spec.speeds().0 > 0.0 {
        return None;
    }
    Some(match spec.second() {
        SecondFactor::Circle { .. } => 0,
        SecondFactor::Sphere { dim, .. } => dim - 1,
    })
}

fn index_check(name: String, got: usize, want: usize) -> Check {
    let off = got.abs_diff(want);
    Check::at_most(name, off as f64, 0.0, 1, usize::from(off != 0))
}

pub fn canonical_geodesics() -> [(&'static str, GeodesicSpec); 3] {
    [
        ("slice", GeodesicSpec::slice(TAU).expect("valid")),
        ("equator", GeodesicSpec::equator(TAU).expect("valid")),
        ("diagonal", GeodesicSpec::diagonal().expect("valid")),
    ]
}

/// Spectra of the canonical trio and the configured geodesics, with the
/// wall-clock seconds of each main run.
pub fn geodesic_index(config: &SuiteConfig) -> Result<(SuiteReport, Vec<(String, f64)>), RunError> {
    let nodes = config.canonical_nodes;
    let lam_tol = config.tolerance("lambda_min");
    let floor = config.tolerance("spectrum_floor");
    let hol_tol = config.tolerance("holonomy");
    let sym_tol = config.tolerance("symmetry");
    let factor = config.tolerance("richardson_factor");
    let mut suite = SuiteReport::new("geodesic_spectra");
    let mut seconds = Vec::new();

    for (name, spec) in canonical_geodesics() {
        let start = Instant::now();
        let s = geodesic_spectrum(&spec, nodes)?;
        seconds.push((format!("{name} N={nodes}"), start.elapsed().as_secs_f64()));
        let lmin = s.lambda_min();
        match name {
            "slice" => {
                suite.push(Check::at_most(format!("{name}:lambda_min_floor"), -lmin, floor, 1, 0));
                suite.push(index_check(format!("{name}:morse_index"), s.morse_index, 0));
            }
            "equator" => {
                suite.push(Check::at_most(format!("{name}:lambda_min"), (lmin + 1.0).abs(), lam_tol, 1, 0));
                suite.push(index_check(format!("{name}:morse_index"), s.morse_index, 1));
                suite.push(index_check(format!("{name}:nullity"), s.nullity, 3));
            }
            _ => {
                suite.push(Check::at_most(format!("{name}:lambda_min"), (lmin + 0.5).abs(), lam_tol, 1, 0));
                suite.push(index_check(format!("{name}:morse_index"), s.morse_index, 1));
            }
        }
        suite.push(Check::at_most(format!("{name}:holonomy"), holonomy_defect(&s), hol_tol, 1, 0));
        suite.push(Check::at_most(format!("{name}:symmetry"), s.asymmetry, sym_tol, 1, 0));

        let ladder = RICHARDSON_NODES
            .iter()
            .map(|&n| geodesic_spectrum(&spec, n))
            .collect::<Result<Vec<_>, _>>()?;
        let probe = ladder[0].morse_index + ladder[0].nullity;
        let p: Vec<f64> = ladder.iter().map(|s| s.eigenvalues[probe]).collect();
        let ratio = (p[0] - p[1]) / (p[1] - p[2]);
        let off = (ratio / 4.0).ln().abs();
        suite.push(Check::at_most(format!("{name}:richardson_ratio"), off.exp(), factor, 1, 0));
        let l: Vec<f64> = ladder.iter().map(|s| s.lambda_min()).collect();
        let excess = (l[0] - l[1]).abs() - 4.0 * (l[1] - l[2]).abs();
        suite.push(Check::at_most(format!("{name}:lambda_min_convergence"), excess, 1e-8, 1, 0));

        let mut row = spectrum_row(name, &spec, nodes, &s);
        row.richardson_ratio = Some(ratio);
        suite.spectra.push(row);
    }

    for g in &config.geodesics {
        let label = g.display_label();
        let spec = g.build()?;
        let start = Instant::now();
        let s = geodesic_spectrum(&spec, g.nodes)?;
        seconds.push((format!("{label} N={}", g.nodes), start.elapsed().as_secs_f64()));
        push_user_checks(&mut suite, g, &label, &spec, &s, hol_tol, sym_tol);
        suite.spectra.push(spectrum_row(&label, &spec, g.nodes, &s));
    }
    Ok((suite, seconds))
}

fn push_user_checks(
    suite: &mut SuiteReport,
    g: &GeodesicConfig,
    label: &str,
    spec: &GeodesicSpec,
    s: &GeodesicSpectrum,
    hol_tol: f64,
    sym_tol: f64,
) {
    match g.expect_index.or_else(|| predicted_index(spec)) {
        Some(want) => suite.push(index_check(format!("{label}:morse_index"), s.morse_index, want)),
        None => {
            let unstable = s.morse_index >= 1;
            suite.push(Check::counted(
                format!("{label}:unstable"),
                s.morse_index as f64,
                1.0,
                1,
                usize::from(!unstable),
            ));
        }
    }
    suite.push(Check::at_most(format!("{label}:holonomy_orthogonality"), orthogonality_defect(s), hol_tol, 1, 0));
    suite.push(Check::at_most(format!("{label}:symmetry"), s.asymmetry, sym_tol, 1, 0));
}

fn orthogonality_defect(s: &GeodesicSpectrum) -> f64 {
    let h = s.holonomy_matrix();
    (h.transpose() * &h - DMatrix::identity(h.nrows(), h.ncols())).amax()
}
