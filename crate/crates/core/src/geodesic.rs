//! Closed geodesics in `CP¹ × S¹(c)` and `CP¹ × Sᵏ(r)`, their normal
//! parallel transport and the discretised Jacobi index form.
//!
//! `CP¹` is the unit round sphere `S² ⊂ R³` (constant curvature `λ² = 1`)
//! with `J` the oriented quarter turn `u ↦ x × u`. The second factor is a
//! round sphere `Sᵏ(ρ) ⊂ R^{k+1}`; a flat circle of circumference `c` is
//! embedded as `S¹(c/2π)`. A geodesic is a pair of great circles traversed at
//! unit-speed rates `a` and `b` with `a² + b² = 1`.
//!
//! Along the curve the normal bundle is trivialised by a deliberately
//! rotating reference frame `E(s)`; parallel transport integrates
//! `dc^z/ds = −c^l ⟨∇_{γ'} E_l, E_z⟩` with classical RK4, the connection
//! coefficients being obtained from ambient derivatives of `E`. The index
//! form `Σ h (|ΔV/h|² − ⟨R̄(V,γ')γ',V⟩)` is assembled in the transported
//! frame with periodic coupling twisted by the loop holonomy, and its
//! eigenvalues (mass-normalised) approximate the Jacobi spectrum.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FactorModel, ProductSpace, ProjectiveKind, ProjectiveModel};
use crate::tangent::{dot, AmbientVector};

pub const MIN_NODES: usize = 16;
const CLOSURE_TOLERANCE: f64 = 1e-9;
const RK4_SUBSTEPS: usize = 8;
const DERIVATIVE_STEP: f64 = 1e-3;

/// Second factor of a realizable product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SecondFactor {
    /// Flat circle of the given circumference.
    Circle { circumference: f64 },
    /// Round sphere `S^dim(radius)`.
    Sphere { dim: usize, radius: f64 },
}

impl SecondFactor {
    fn dim(self) -> usize {
        match self {
            Self::Circle { .. } => 1,
            Self::Sphere { dim, .. } => dim,
        }
    }

    /// Radius of the embedding sphere in `R^{dim+1}`.
    fn embedding_radius(self) -> f64 {
        match self {
            Self::Circle { circumference } => circumference / TAU,
            Self::Sphere { radius, .. } => radius,
        }
    }

    /// Length of one closed geodesic of the factor.
    fn period(self) -> f64 {
        TAU * self.embedding_radius()
    }

    fn model(self) -> Result<FactorModel> {
        match self {
            Self::Circle { .. } => FactorModel::flat(1),
            Self::Sphere { dim, radius } => FactorModel::sphere(dim, radius),
        }
    }

    fn validate(self) -> Result<()> {
        let ok = match self {
            Self::Circle { circumference } => circumference.is_finite() && circumference > 0.0,
            Self::Sphere { dim, radius } => dim >= 1 && radius.is_finite() && radius > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::BadClosure(format!("invalid second factor {self:?}")))
        }
    }
}

/// A closed geodesic of `CP¹ × M₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicSpec {
    space: ProductSpace,
    second: SecondFactor,
    speeds: (f64, f64),
    length: f64,
}

fn near_integer(x: f64) -> bool {
    (x - x.round()).abs() <= CLOSURE_TOLERANCE * x.abs().max(1.0)
}

impl GeodesicSpec {
    /// Validates unit speed and closure of both components.
    pub fn new(second: SecondFactor, speeds: (f64, f64), length: f64) -> Result<Self> {
        second.validate()?;
        let (a, b) = speeds;
        if !(a >= 0.0 && b >= 0.0) {
            return Err(Error::BadClosure(format!("speeds must be non-negative, got ({a}, {b})")));
        }
        if ((a * a + b * b) - 1.0).abs() > 1e-12 {
            return Err(Error::BadClosure(format!("a² + b² = {} ≠ 1", a * a + b * b)));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::BadClosure(format!("length must be positive, got {length}")));
        }
        if a > 0.0 && !near_integer(a * length / TAU) {
            return Err(Error::BadClosure(format!(
                "factor-1 component winds {} times",
                a * length / TAU
            )));
        }
        if b > 0.0 && !near_integer(b * length / second.period()) {
            return Err(Error::BadClosure(format!(
                "factor-2 component winds {} times",
                b * length / second.period()
            )));
        }
        let space = ProductSpace::new(ProjectiveModel::new(ProjectiveKind::Complex, 2)?, second.model()?);
        Ok(Self {
            space,
            second,
            speeds,
            length,
        })
    }

    /// The closed geodesic winding `p` times around a great circle of `CP¹`
    /// and `q` times around a closed geodesic of the second factor.
    pub fn from_windings(second: SecondFactor, p: u32, q: u32) -> Result<Self> {
        second.validate()?;
        let u = TAU * f64::from(p);
        let v = second.period() * f64::from(q);
        let length = u.hypot(v);
        if length == 0.0 {
            return Err(Error::BadClosure("at least one winding number must be positive".into()));
        }
        Self::new(second, (u / length, v / length), length)
    }

    /// `{r} × S¹` in `CP¹ × S¹(c)`.
    pub fn slice(circumference: f64) -> Result<Self> {
        Self::from_windings(SecondFactor::Circle { circumference }, 0, 1)
    }

    /// Equator of `CP¹` times a point of `S¹(c)`.
    pub fn equator(circumference: f64) -> Result<Self> {
        Self::from_windings(SecondFactor::Circle { circumference }, 1, 0)
    }

    /// `a = b = 1/√2` in `CP¹ × S¹(2π)`.
    pub fn diagonal() -> Result<Self> {
        Self::from_windings(SecondFactor::Circle { circumference: TAU }, 1, 1)
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    pub fn second(&self) -> SecondFactor {
        self.second
    }

    pub fn speeds(&self) -> (f64, f64) {
        self.speeds
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Dimension of the normal bundle: `m₁ + m₂ − 1`.
    pub fn normal_dim(&self) -> usize {
        self.space.split().ambient() - 1
    }

    fn k(&self) -> usize {
        self.second.dim()
    }

    fn geometry(&self, s: f64) -> PointGeometry {
        let (a, b) = self.speeds;
        let rho = self.second.embedding_radius();
        let (c1, s1) = ((a * s).cos(), (a * s).sin());
        let (c2, s2) = ((b * s / rho).cos(), (b * s / rho).sin());
        let k = self.k();
        let mut x = vec![0.0; 3];
        x[0] = c1;
        x[1] = s1;
        let t1 = vec![-s1, c1, 0.0];
        let pole = vec![0.0, 0.0, 1.0];
        let mut y = vec![0.0; k + 1];
        y[0] = rho * c2;
        y[1] = rho * s2;
        let mut t2 = vec![0.0; k + 1];
        t2[0] = -s2;
        t2[1] = c2;
        let extra = (2..=k)
            .map(|i| {
                let mut e = vec![0.0; k + 1];
                e[i] = 1.0;
                e
            })
            .collect();
        PointGeometry {
            x,
            t1,
            pole,
            y,
            t2,
            extra,
            speeds: self.speeds,
        }
    }

    /// Angles of the rotation `R(s)` applied to the parallel frame to build
    /// the reference frame `E(s) = F(s) R(s)`.
    fn reference_angles(&self, s: f64) -> Vec<f64> {
        let nu = self.normal_dim();
        let w = TAU / self.length;
        (0..nu.saturating_sub(1))
            .map(|i| {
                let i = i as f64;
                (0.4 + 0.15 * i) * s + (0.3 - 0.05 * i) * (w * s + 0.5 * i).sin()
            })
            .collect()
    }

    /// Reference normal frame `E(s)` in embedding coordinates.
    pub fn reference_frame(&self, s: f64) -> Vec<Vec<f64>> {
        let mut frame = self.geometry(s).parallel_frame();
        for (i, angle) in self.reference_angles(s).into_iter().enumerate() {
            let (c, sn) = (angle.cos(), angle.sin());
            let (u, v) = (frame[i].clone(), frame[i + 1].clone());
            frame[i] = u.iter().zip(&v).map(|(p, q)| c * p + sn * q).collect();
            frame[i + 1] = u.iter().zip(&v).map(|(p, q)| -sn * p + c * q).collect();
        }
        frame
    }

    /// Closed-form parallel normal frame, used as an oracle.
    pub fn parallel_frame(&self, s: f64) -> Vec<Vec<f64>> {
        self.geometry(s).parallel_frame()
    }

    /// `ω_{lz}(s) = ⟨∇_{γ'} E_l, E_z⟩`. Since `E_z` is tangent to the
    /// embedded product, this equals `⟨dE_l/ds, E_z⟩` (Gauss formula).
    pub fn connection(&self, s: f64) -> DMatrix<f64> {
        let h = DERIVATIVE_STEP;
        let stencil = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
        let frames: Vec<Vec<Vec<f64>>> = stencil
            .iter()
            .map(|(o, _)| self.reference_frame(s + o * h))
            .collect();
        let here = self.reference_frame(s);
        let nu = here.len();
        DMatrix::from_fn(nu, nu, |l, z| {
            let deriv: Vec<f64> = (0..here[l].len())
                .map(|c| {
                    stencil
                        .iter()
                        .zip(&frames)
                        .map(|((_, wgt), f)| wgt * f[l][c])
                        .sum::<f64>()
                        / (12.0 * h)
                })
                .collect();
            dot(&deriv, &here[z])
        })
    }
}

struct PointGeometry {
    x: Vec<f64>,
    t1: Vec<f64>,
    pole: Vec<f64>,
    y: Vec<f64>,
    t2: Vec<f64>,
    extra: Vec<Vec<f64>>,
    speeds: (f64, f64),
}

impl PointGeometry {
    fn join(u: &[f64], v: &[f64]) -> Vec<f64> {
        u.iter().chain(v).copied().collect()
    }

    fn velocity(&self) -> Vec<f64> {
        let (a, b) = self.speeds;
        let u: Vec<f64> = self.t1.iter().map(|t| a * t).collect();
        let v: Vec<f64> = self.t2.iter().map(|t| b * t).collect();
        Self::join(&u, &v)
    }

    fn position(&self) -> Vec<f64> {
        Self::join(&self.x, &self.y)
    }

    /// `(pole, 0)`, `(b t₁, −a t₂)`, `(0, e_i)`.
    fn parallel_frame(&self) -> Vec<Vec<f64>> {
        let (a, b) = self.speeds;
        let zero2 = vec![0.0; self.y.len()];
        let zero1 = vec![0.0; 3];
        let mut out = vec![
            Self::join(&self.pole, &zero2),
            Self::join(
                &self.t1.iter().map(|t| b * t).collect::<Vec<_>>(),
                &self.t2.iter().map(|t| -a * t).collect::<Vec<_>>(),
            ),
        ];
        out.extend(self.extra.iter().map(|e| Self::join(&zero1, e)));
        out
    }

    /// Intrinsic coordinates in the oriented basis `(t₁, x × t₁) ⊕ (t₂, e₂..e_k)`.
    fn intrinsic(&self, v: &[f64]) -> AmbientVector {
        let (v1, v2) = v.split_at(3);
        let first = [dot(v1, &self.t1), dot(v1, &self.pole)];
        let mut second = vec![dot(v2, &self.t2)];
        second.extend(self.extra.iter().map(|e| dot(v2, e)));
        AmbientVector::from_parts(&first, &second)
    }
}

/// Samples of a closed curve at `s_i = i·h`, `i = 0..N−1`, `h = L/N`.
#[derive(Debug, Clone)]
pub struct CurveSample {
    spec: GeodesicSpec,
    nodes: usize,
    step: f64,
    positions: Vec<Vec<f64>>,
    tangents: Vec<Vec<f64>>,
    transport: Option<Transport>,
}

#[derive(Debug, Clone)]
struct Transport {
    /// Coefficient matrices `C(s_i)` for `i = 0..=N`; column `α` holds the
    /// coordinates of `V_α` in the reference frame.
    coefficients: Vec<DMatrix<f64>>,
    /// Transported frames in embedding coordinates at nodes `0..N−1`.
    frames: Vec<Vec<Vec<f64>>>,
    holonomy: DMatrix<f64>,
}

pub fn sample_geodesic(spec: &GeodesicSpec, nodes: usize) -> Result<CurveSample> {
    if nodes < MIN_NODES {
        return Err(Error::IncompleteSample(format!(
            "need at least {MIN_NODES} nodes, got {nodes}"
        )));
    }
    let step = spec.length / nodes as f64;
    let (positions, tangents) = (0..nodes)
        .map(|i| {
            let g = spec.geometry(i as f64 * step);
            (g.position(), g.velocity())
        })
        .unzip();
    Ok(CurveSample {
        spec: spec.clone(),
        nodes,
        step,
        positions,
        tangents,
        transport: None,
    })
}

impl CurveSample {
    pub fn spec(&self) -> &GeodesicSpec {
        &self.spec
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn positions(&self) -> &[Vec<f64>] {
        &self.positions
    }

    pub fn tangents(&self) -> &[Vec<f64>] {
        &self.tangents
    }

    /// Transported normal frames at the nodes, once filled.
    pub fn frames(&self) -> Option<&[Vec<Vec<f64>>]> {
        self.transport.as_ref().map(|t| t.frames.as_slice())
    }

    pub fn holonomy(&self) -> Option<&DMatrix<f64>> {
        self.transport.as_ref().map(|t| &t.holonomy)
    }

    /// Copy of the sample with the factor-1 component pushed off its great
    /// circle: `x ↦ normalise(x + A sin(4πs/L) · pole)`. The bump runs at twice
    /// the loop frequency; at the loop frequency it would merely tilt a great
    /// circle. The result is no
    /// longer a geodesic and carries no transported frame.
    pub fn perturbed(&self, amplitude: f64) -> Self {
        let w = 2.0 * TAU / self.spec.length;
        let positions = self
            .positions
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let bump = amplitude * (w * i as f64 * self.step).sin();
                let mut p = p.clone();
                p[2] += bump;
                let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                p[..3].iter_mut().for_each(|c| *c /= norm);
                p
            })
            .collect();
        Self {
            positions,
            transport: None,
            ..self.clone()
        }
    }

    /// Max tangential part of the discrete second difference of position
    /// divided by `h²`; vanishes (to rounding) on geodesics.
    pub fn geodesic_residual(&self) -> f64 {
        let n = self.nodes;
        let h2 = self.step * self.step;
        (0..n)
            .map(|i| {
                let prev = &self.positions[(i + n - 1) % n];
                let next = &self.positions[(i + 1) % n];
                let here = &self.positions[i];
                let acc: Vec<f64> = (0..here.len())
                    .map(|c| (next[c] - 2.0 * here[c] + prev[c]) / h2)
                    .collect();
                let (a1, a2) = acc.split_at(3);
                let (x, y) = here.split_at(3);
                tangential(a1, x).into_iter().chain(tangential(a2, y)).map(|c| c * c).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Max over interior nodes of `|(c_{i+1} − c_{i−1})/2h + ωᵀ c_i|`: the
    /// central-difference residual of the transport equation, `O(h²)`.
    pub fn transport_residual(&self) -> Result<f64> {
        let t = self
            .transport
            .as_ref()
            .ok_or_else(|| Error::IncompleteSample("normal frame not transported".into()))?;
        let h = self.step;
        let mut worst = 0.0_f64;
        for i in 1..self.nodes {
            let omega = self.spec.connection(i as f64 * h);
            let diff = (&t.coefficients[i + 1] - &t.coefficients[i - 1]) / (2.0 * h);
            let r = diff + omega.transpose() * &t.coefficients[i];
            worst = worst.max(r.amax());
        }
        Ok(worst)
    }
}

fn tangential(v: &[f64], point: &[f64]) -> Vec<f64> {
    let r2 = dot(point, point);
    let c = dot(v, point) / r2;
    v.iter().zip(point).map(|(a, p)| a - c * p).collect()
}

pub fn geodesic_residual(sample: &CurveSample) -> f64 {
    sample.geodesic_residual()
}

/// Parallel transport of the reference frame `E(0)`.
pub fn transport_normal_frame(sample: &CurveSample) -> Result<CurveSample> {
    let nu = sample.spec.normal_dim();
    transport_normal_frame_from(sample, &DMatrix::identity(nu, nu))
}

/// Parallel transport of `V(0) = E(0) · initial` (columns of `initial`
/// are the reference-frame coordinates of the starting vectors).
pub fn transport_normal_frame_from(sample: &CurveSample, initial: &DMatrix<f64>) -> Result<CurveSample> {
    let spec = &sample.spec;
    let nu = spec.normal_dim();
    if initial.shape() != (nu, nu) {
        return Err(Error::DimensionMismatch {
            expected: nu,
            found: initial.nrows(),
        });
    }
    let h = sample.step;
    let sub = h / RK4_SUBSTEPS as f64;
    // dC/ds = −ωᵀ C
    let rhs = |s: f64, c: &DMatrix<f64>| -(spec.connection(s).transpose() * c);
    let mut c = initial.clone();
    let mut coefficients = Vec::with_capacity(sample.nodes + 1);
    coefficients.push(c.clone());
    for i in 0..sample.nodes {
        for j in 0..RK4_SUBSTEPS {
            let s = i as f64 * h + j as f64 * sub;
            let k1 = rhs(s, &c);
            let k2 = rhs(s + sub / 2.0, &(&c + &k1 * (sub / 2.0)));
            let k3 = rhs(s + sub / 2.0, &(&c + &k2 * (sub / 2.0)));
            let k4 = rhs(s + sub, &(&c + &k3 * sub));
            c += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (sub / 6.0);
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::NumericalBlowup("normal transport".into()));
        }
        coefficients.push(c.clone());
    }

    let to_ambient = |s: f64, coeff: &DMatrix<f64>| -> Vec<Vec<f64>> {
        let e = spec.reference_frame(s);
        (0..nu)
            .map(|alpha| {
                (0..e[0].len())
                    .map(|comp| (0..nu).map(|z| coeff[(z, alpha)] * e[z][comp]).sum())
                    .collect()
            })
            .collect()
    };
    let frames: Vec<Vec<Vec<f64>>> = (0..sample.nodes)
        .map(|i| to_ambient(i as f64 * h, &coefficients[i]))
        .collect();
    let start = &frames[0];
    let end = to_ambient(spec.length, &coefficients[sample.nodes]);
    // V_α(L) = Σ_β H_{βα} V_β(0)
    let holonomy = DMatrix::from_fn(nu, nu, |beta, alpha| dot(&end[alpha], &start[beta]));
    let defect = (holonomy.transpose() * &holonomy - DMatrix::identity(nu, nu)).amax();
    if !(defect < 1e-6) {
        return Err(Error::NumericalBlowup(format!("holonomy lost orthogonality ({defect:e})")));
    }
    Ok(CurveSample {
        transport: Some(Transport {
            coefficients,
            frames,
            holonomy,
        }),
        ..sample.clone()
    })
}

/// Discretised Jacobi spectrum of a closed geodesic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicSpectrum {
    pub eigenvalues: Vec<f64>,
    pub morse_index: usize,
    pub nullity: usize,
    pub tolerance: f64,
    /// Row-major `ν × ν` loop holonomy.
    pub holonomy: Vec<f64>,
    /// `max |A − Aᵀ|` of the assembled matrix.
    pub asymmetry: f64,
}

impl GeodesicSpectrum {
    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    pub fn holonomy_matrix(&self) -> DMatrix<f64> {
        let nu = (self.holonomy.len() as f64).sqrt().round() as usize;
        DMatrix::from_row_slice(nu, nu, &self.holonomy)
    }
}

/// Mass-normalised matrix of the index form in the transported frame.
pub fn index_form_matrix(sample: &CurveSample) -> Result<DMatrix<f64>> {
    let t = sample
        .transport
        .as_ref()
        .ok_or_else(|| Error::IncompleteSample("normal frame not transported".into()))?;
    let spec = &sample.spec;
    let nu = spec.normal_dim();
    let n = sample.nodes;
    let h = sample.step;
    let inv_h2 = 1.0 / (h * h);
    let mut a = DMatrix::zeros(n * nu, n * nu);
    for i in 0..n {
        let g = spec.geometry(i as f64 * h);
        let vel = g.intrinsic(&sample.tangents[i]);
        let frame: Vec<AmbientVector> = t.frames[i].iter().map(|v| g.intrinsic(v)).collect();
        for alpha in 0..nu {
            for beta in 0..nu {
                let k = spec
                    .space
                    .product_curvature(&frame[alpha], &vel, &vel, &frame[beta])?;
                let diag = if alpha == beta { 2.0 * inv_h2 } else { 0.0 };
                a[(i * nu + alpha, i * nu + beta)] = diag - k;
            }
        }
    }
    for i in 0..n - 1 {
        for alpha in 0..nu {
            a[(i * nu + alpha, (i + 1) * nu + alpha)] -= inv_h2;
            a[((i + 1) * nu + alpha, i * nu + alpha)] -= inv_h2;
        }
    }
    // |Hᵀ v₀ − v_{N−1}|²
    let last = (n - 1) * nu;
    for alpha in 0..nu {
        for beta in 0..nu {
            a[(last + alpha, beta)] -= inv_h2 * t.holonomy[(beta, alpha)];
            a[(beta, last + alpha)] -= inv_h2 * t.holonomy[(beta, alpha)];
        }
    }
    Ok(a)
}

pub fn index_form_spectrum(sample: &CurveSample) -> Result<GeodesicSpectrum> {
    let a = index_form_matrix(sample)?;
    let asymmetry = (&a - a.transpose()).amax();
    let mut eigenvalues: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let lmax = eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tolerance = 1e-6 * lmax.max(1.0);
    let morse_index = eigenvalues.iter().filter(|&&v| v < -tolerance).count();
    let nullity = eigenvalues.iter().filter(|&&v| v.abs() <= tolerance).count();
    let holonomy = sample
        .holonomy()
        .expect("checked by index_form_matrix")
        .transpose()
        .iter()
        .copied()
        .collect();
    Ok(GeodesicSpectrum {
        eigenvalues,
        morse_index,
        nullity,
        tolerance,
        holonomy,
        asymmetry,
    })
}

/// Sample, transport and solve in one call.
pub fn geodesic_spectrum(spec: &GeodesicSpec, nodes: usize) -> Result<GeodesicSpectrum> {
    let sample = transport_normal_frame(&sample_geodesic(spec, nodes)?)?;
    index_form_spectrum(&sample)
}

/// Exact eigenvalue `(2πk/L)²` of `−d²/ds²` on the circle of length `L`
/// after periodic second-order discretisation with `N` nodes.
pub fn discrete_laplacian_eigenvalue(length: f64, nodes: usize, k: i64) -> f64 {
    let h = length / nodes as f64;
    let s = (PI * k as f64 / nodes as f64).sin();
    4.0 * s * s / (h * h)
}
