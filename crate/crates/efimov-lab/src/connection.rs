//! The dual connection `∇̃_x y = B⁻¹ ∇_x (B y)`, its torsion and curvature,
//! the pinching constants and the hypothesis verdicts.
//!
//! Three bases are supported. `Immersion` is a patch in an ambient metric.
//! `Conjugate` takes an abstract first form and an endomorphism field in the
//! role of `B` (no ambient). `Abstract` takes the metric `III` directly plus
//! a torsion vector field, and builds
//! `∇̃_x y = ∇^{LC}_x y − III(τ, x) J y`, whose torsion satisfies
//! `T(e₁, e₂) = τ` for any oriented orthonormal frame.

use crate::ambient::ChartBox;
use crate::error::{Error, Result};
use crate::immersion::{Mat2, SurfacePatch, Vec2};
use crate::ambient::MetricField;
use crate::jet::{self, Christoffel, MetricJet};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// `|det B|` below this is treated as a flat point.
pub const SHAPE_FLOOR: f64 = 1e-10;

pub type Metric2Fn = Arc<dyn Fn(&[f64; 2]) -> Mat2 + Send + Sync>;
pub type Metric2First = Arc<dyn Fn(&[f64; 2]) -> [Mat2; 2] + Send + Sync>;
pub type EndoFn = Arc<dyn Fn(&[f64; 2]) -> Mat2 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64; 2]) -> Vec2 + Send + Sync>;

/// A Riemannian metric on a 2D parameter box.
#[derive(Clone)]
pub struct SurfaceMetric {
    pub name: String,
    pub domain: ChartBox<2>,
    pub h: f64,
    eval: Metric2Fn,
    first: Option<Metric2First>,
}

impl std::fmt::Debug for SurfaceMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SurfaceMetric").field("name", &self.name).field("domain", &self.domain).finish()
    }
}

impl SurfaceMetric {
    pub fn new(name: impl Into<String>, domain: ChartBox<2>, eval: impl Fn(&[f64; 2]) -> Mat2 + Send + Sync + 'static) -> Self {
        SurfaceMetric { name: name.into(), domain, h: 1e-3, eval: Arc::new(eval), first: None }
    }

    pub fn with_first(mut self, f: impl Fn(&[f64; 2]) -> [Mat2; 2] + Send + Sync + 'static) -> Self {
        self.first = Some(Arc::new(f));
        self
    }

    pub fn with_step(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn has_analytic_first(&self) -> bool {
        self.first.is_some()
    }

    pub fn raw(&self, q: &[f64; 2]) -> Mat2 {
        (self.eval)(q)
    }

    pub fn metric(&self, q: &[f64; 2]) -> Result<Mat2> {
        self.domain.check(q, 0.0)?;
        let g = self.raw(q);
        if !(g[(0, 0)] > 0.0) || !(g.determinant() > jet::DET_FLOOR) {
            return Err(Error::NonInvertibleMetric { point: q.to_vec(), det: g.determinant() });
        }
        Ok(g)
    }

    pub fn first_partials(&self, q: &[f64; 2]) -> [Mat2; 2] {
        match &self.first {
            Some(f) => f(q),
            None => jet::gradient(&|p: &[f64; 2]| (self.eval)(p), q, self.h),
        }
    }

    pub fn jet(&self, q: &[f64; 2]) -> Result<MetricJet<2>> {
        self.metric(q)?;
        let f = |p: &[f64; 2]| (self.eval)(p);
        Ok(match &self.first {
            Some(d1) => jet::jet_from_first(&f, &|p: &[f64; 2]| d1(p), q, self.h),
            None => jet::fd_jet(&f, q, self.h),
        })
    }

    pub fn christoffel(&self, q: &[f64; 2]) -> Result<Christoffel<2>> {
        let g = self.metric(q)?;
        jet::christoffel_from(&g, &self.first_partials(q)).ok_or(Error::NonInvertibleMetric { point: q.to_vec(), det: g.determinant() })
    }

    /// Gaussian curvature.
    pub fn curvature(&self, q: &[f64; 2]) -> Result<f64> {
        let j = self.jet(q)?;
        let (_, r) = jet::riemann_from(&j).ok_or(Error::NonInvertibleMetric { point: q.to_vec(), det: j.g.determinant() })?;
        Ok(r[0][1][1][0] / j.g.determinant())
    }
}

/// The rotation by `+π/2` of a 2D metric, in coordinates, for the
/// coordinate orientation.
pub fn rotation(m: &Mat2) -> Mat2 {
    let s = m.determinant().sqrt();
    Mat2::new(-m[(0, 1)], -m[(1, 1)], m[(0, 0)], m[(0, 1)]) / s
}

pub fn inner(m: &Mat2, x: &Vec2, y: &Vec2) -> f64 {
    (x.transpose() * m * y)[0]
}

pub fn norm(m: &Mat2, x: &Vec2) -> f64 {
    inner(m, x, x).max(0.0).sqrt()
}

/// `Γ(x, y)^k = Γ^k_ij x^i y^j`.
pub fn contract(gam: &Christoffel<2>, x: &Vec2, y: &Vec2) -> Vec2 {
    let mut out = Vec2::zeros();
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                out[k] += gam[k][i][j] * x[i] * y[j];
            }
        }
    }
    out
}

/// Matrix `(Γ_i)^k_j = Γ^k_ij`.
fn gamma_matrix(gam: &Christoffel<2>, i: usize) -> Mat2 {
    Mat2::new(gam[0][i][0], gam[0][i][1], gam[1][i][0], gam[1][i][1])
}

#[derive(Clone)]
pub enum ConnectionBase {
    Immersion { patch: SurfacePatch, ambient: MetricField },
    Conjugate { metric: SurfaceMetric, endo: EndoFn },
    Abstract { metric: SurfaceMetric, torsion: VectorFn },
}

impl std::fmt::Debug for ConnectionBase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConnectionBase::Immersion { patch, ambient } => f.debug_struct("Immersion").field("patch", patch).field("ambient", ambient).finish(),
            ConnectionBase::Conjugate { metric, .. } => f.debug_struct("Conjugate").field("metric", metric).finish_non_exhaustive(),
            ConnectionBase::Abstract { metric, .. } => f.debug_struct("Abstract").field("metric", metric).finish_non_exhaustive(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SurfaceConnectionData {
    pub name: String,
    pub base: ConnectionBase,
}

impl SurfaceConnectionData {
    pub fn immersion(patch: SurfacePatch, ambient: MetricField) -> Self {
        SurfaceConnectionData { name: patch.name.clone(), base: ConnectionBase::Immersion { patch, ambient } }
    }

    pub fn conjugate(metric: SurfaceMetric, endo: impl Fn(&[f64; 2]) -> Mat2 + Send + Sync + 'static) -> Self {
        SurfaceConnectionData { name: metric.name.clone(), base: ConnectionBase::Conjugate { metric, endo: Arc::new(endo) } }
    }

    pub fn abstract_with(metric: SurfaceMetric, torsion: impl Fn(&[f64; 2]) -> Vec2 + Send + Sync + 'static) -> Self {
        SurfaceConnectionData { name: metric.name.clone(), base: ConnectionBase::Abstract { metric, torsion: Arc::new(torsion) } }
    }

    /// Abstract connection without torsion: the Levi-Civita connection.
    pub fn levi_civita(metric: SurfaceMetric) -> Self {
        Self::abstract_with(metric, |_| Vec2::zeros())
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn is_abstract(&self) -> bool {
        matches!(self.base, ConnectionBase::Abstract { .. })
    }

    pub fn domain(&self) -> &ChartBox<2> {
        match &self.base {
            ConnectionBase::Immersion { patch, .. } => &patch.domain,
            ConnectionBase::Conjugate { metric, .. } | ConnectionBase::Abstract { metric, .. } => &metric.domain,
        }
    }

    /// Step used to difference the primary fields.
    pub fn step(&self) -> f64 {
        match &self.base {
            ConnectionBase::Immersion { patch, .. } => patch.outer_step(),
            ConnectionBase::Conjugate { metric, .. } | ConnectionBase::Abstract { metric, .. } => metric.h,
        }
    }

    /// Step for differencing quantities built from [`Self::coefficients`].
    pub fn outer_step(&self) -> f64 {
        match &self.base {
            ConnectionBase::Abstract { metric, .. } if metric.has_analytic_first() => metric.h,
            _ => 10.0 * self.step(),
        }
    }

    /// Distance from the box edge needed to evaluate the coefficients.
    pub fn margin(&self) -> f64 {
        match &self.base {
            ConnectionBase::Immersion { patch, .. } => patch.margin() + patch.outer_step(),
            ConnectionBase::Conjugate { metric, .. } | ConnectionBase::Abstract { metric, .. } => metric.h,
        }
    }

    pub fn contains(&self, q: &[f64; 2]) -> bool {
        self.domain().contains(q, self.margin())
    }

    fn check(&self, q: &[f64; 2]) -> Result<()> {
        self.domain().check(q, self.margin())
    }

    /// First fundamental form (not available in abstract mode).
    pub fn first_form(&self, q: &[f64; 2]) -> Result<Mat2> {
        match &self.base {
            ConnectionBase::Immersion { patch, ambient } => Ok(patch.shape_data(ambient, q)?.0),
            ConnectionBase::Conjugate { metric, .. } => metric.metric(q),
            ConnectionBase::Abstract { .. } => Err(Error::ModeUnsupported),
        }
    }

    /// `B`, unchecked for degeneracy.
    pub fn shape_raw(&self, q: &[f64; 2]) -> Result<Mat2> {
        match &self.base {
            ConnectionBase::Immersion { patch, ambient } => patch.shape_operator(ambient, q),
            ConnectionBase::Conjugate { endo, .. } => Ok(endo(q)),
            ConnectionBase::Abstract { .. } => Err(Error::ModeUnsupported),
        }
    }

    /// `B`, with the degeneracy floor applied.
    pub fn shape(&self, q: &[f64; 2]) -> Result<Mat2> {
        let b = self.shape_raw(q)?;
        let det = b.determinant();
        if !(det.abs() >= SHAPE_FLOOR) {
            return Err(Error::DegenerateShapeOperator { point: q.to_vec(), det: det.abs() });
        }
        Ok(b)
    }

    fn first_and_shape(&self, q: &[f64; 2]) -> Result<(Mat2, Mat2)> {
        let (i, b) = match &self.base {
            ConnectionBase::Immersion { patch, ambient } => {
                let d = patch.shape_data(ambient, q)?;
                (d.0, d.2)
            }
            ConnectionBase::Conjugate { metric, endo } => (metric.metric(q)?, endo(q)),
            ConnectionBase::Abstract { .. } => return Err(Error::ModeUnsupported),
        };
        let det = b.determinant();
        if !(det.abs() >= SHAPE_FLOOR) {
            return Err(Error::DegenerateShapeOperator { point: q.to_vec(), det: det.abs() });
        }
        Ok((i, b))
    }

    /// The metric `III` the connection is compatible with.
    pub fn metric3(&self, q: &[f64; 2]) -> Result<Mat2> {
        match &self.base {
            ConnectionBase::Abstract { metric, .. } => metric.metric(q),
            _ => {
                let (i, b) = self.first_and_shape(q)?;
                let m = b.transpose() * i * b;
                Ok((m + m.transpose()) * 0.5)
            }
        }
    }

    /// `J` of `III` in coordinates.
    pub fn rotation(&self, q: &[f64; 2]) -> Result<Mat2> {
        Ok(rotation(&self.metric3(q)?))
    }

    fn first_christoffel(&self, q: &[f64; 2]) -> Result<Christoffel<2>> {
        match &self.base {
            ConnectionBase::Immersion { patch, ambient } => patch.first_christoffel(ambient, q),
            ConnectionBase::Conjugate { metric, .. } => metric.christoffel(q),
            ConnectionBase::Abstract { .. } => Err(Error::ModeUnsupported),
        }
    }

    /// `Γ̃^k_ij`, so that `∇̃_{∂_i} ∂_j = Γ̃^k_ij ∂_k`.
    pub fn coefficients(&self, q: &[f64; 2]) -> Result<Christoffel<2>> {
        self.check(q)?;
        match &self.base {
            ConnectionBase::Abstract { metric, torsion } => {
                let m = metric.metric(q)?;
                let mut gam = metric.christoffel(q)?;
                let flat = m * torsion(q);
                let j = rotation(&m);
                for (k, gk) in gam.iter_mut().enumerate() {
                    for (i, gki) in gk.iter_mut().enumerate() {
                        for (jj, v) in gki.iter_mut().enumerate() {
                            *v -= flat[i] * j[(k, jj)];
                        }
                    }
                }
                Ok(gam)
            }
            _ => {
                let (_, b) = self.first_and_shape(q)?;
                let bi = b.try_inverse().ok_or(Error::DegenerateShapeOperator { point: q.to_vec(), det: 0.0 })?;
                let bf = |p: &[f64; 2]| self.shape_raw(p).unwrap_or_else(|_| Mat2::from_element(f64::NAN));
                let db = jet::gradient(&bf, q, self.step());
                let gi = self.first_christoffel(q)?;
                let mut out = [[[0.0; 2]; 2]; 2];
                for (i, dbi) in db.iter().enumerate() {
                    let t = bi * (dbi + gamma_matrix(&gi, i) * b);
                    for k in 0..2 {
                        for j in 0..2 {
                            out[k][i][j] = t[(k, j)];
                        }
                    }
                }
                if out.iter().flatten().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::PointOutsideChart { point: q.to_vec(), margin: self.margin() });
                }
                Ok(out)
            }
        }
    }

    /// `∇̃_x y` with `y` extended by constant coordinates.
    pub fn dual_connection_at(&self, q: &[f64; 2], x: &Vec2, y: &Vec2) -> Result<Vec2> {
        Ok(contract(&self.coefficients(q)?, x, y))
    }

    /// Torsion vector recovered from the coefficients.
    pub fn torsion_from_coefficients(&self, q: &[f64; 2]) -> Result<Vec2> {
        let gam = self.coefficients(q)?;
        let m = self.metric3(q)?;
        let t = Vec2::new(gam[0][0][1] - gam[0][1][0], gam[1][0][1] - gam[1][1][0]);
        Ok(t / m.determinant().sqrt())
    }

    /// The torsion vector field `τ`, with `T(x, y) = dv_III(x, y) τ`.
    pub fn torsion(&self, q: &[f64; 2]) -> Result<Vec2> {
        match &self.base {
            ConnectionBase::Abstract { torsion, .. } => {
                self.check(q)?;
                Ok(torsion(q))
            }
            _ => self.torsion_from_coefficients(q),
        }
    }

    pub fn torsion_norm(&self, q: &[f64; 2]) -> Result<f64> {
        let t = self.torsion(q)?;
        Ok(norm(&self.metric3(q)?, &t))
    }

    /// `K̃`: `K_I / K_e` for an immersion, `K_I / det B` for conjugate data,
    /// and `−dω` of a moving frame in abstract mode.
    pub fn ktilde(&self, q: &[f64; 2]) -> Result<f64> {
        match &self.base {
            ConnectionBase::Immersion { patch, ambient } => {
                let d = patch.fundamental_forms(ambient, q)?;
                if !(d.k_e.abs() >= SHAPE_FLOOR) {
                    return Err(Error::DegenerateShapeOperator { point: q.to_vec(), det: d.k_e.abs() });
                }
                Ok(d.k_i / d.k_e)
            }
            ConnectionBase::Conjugate { metric, .. } => {
                let (_, b) = self.first_and_shape(q)?;
                Ok(metric.curvature(q)? / b.determinant())
            }
            ConnectionBase::Abstract { .. } => self.ktilde_via_frame(q),
        }
    }

    /// Connection 1-form `ω(∂_i) = III(∇̃_{∂_i} e₁, e₂)` of the frame
    /// `e₁ = ∂_u/|∂_u|`, `e₂ = J e₁`.
    pub fn connection_form(&self, q: &[f64; 2]) -> Result<Vec2> {
        let gam = self.coefficients(q)?;
        let m = self.metric3(q)?;
        let step = self.step();
        let m11 = |p: &[f64; 2]| self.metric3(p).map(|m| m[(0, 0)]).unwrap_or(f64::NAN);
        let dm11 = jet::gradient(&m11, q, step);
        let n = m[(0, 0)].sqrt();
        let e1 = Vec2::new(1.0 / n, 0.0);
        let e2 = rotation(&m) * e1;
        let mut w = Vec2::zeros();
        for i in 0..2 {
            let de1 = Vec2::new(-0.5 * dm11[i] / (n * n * n), 0.0);
            let cov = de1 + gamma_matrix(&gam, i) * e1;
            w[i] = inner(&m, &cov, &e2);
        }
        if !w[0].is_finite() || !w[1].is_finite() {
            return Err(Error::PointOutsideChart { point: q.to_vec(), margin: self.margin() });
        }
        Ok(w)
    }

    /// `K̃ = −dω(e₁, e₂)`.
    pub fn ktilde_via_frame(&self, q: &[f64; 2]) -> Result<f64> {
        self.domain().check(q, self.margin() + 2.0 * self.outer_step())?;
        let w = |p: &[f64; 2]| self.connection_form(p).unwrap_or_else(|_| Vec2::from_element(f64::NAN));
        let dw = jet::gradient(&w, q, self.outer_step());
        let m = self.metric3(q)?;
        let k = -(dw[0][1] - dw[1][0]) / m.determinant().sqrt();
        if !k.is_finite() {
            return Err(Error::PointOutsideChart { point: q.to_vec(), margin: self.margin() });
        }
        Ok(k)
    }

    /// Largest `|∂_i III_jk − III(∇̃_i ∂_j, ∂_k) − III(∂_j, ∇̃_i ∂_k)|`,
    /// relative to `|III|`.
    pub fn compatibility_residual(&self, q: &[f64; 2]) -> Result<f64> {
        let gam = self.coefficients(q)?;
        let m = self.metric3(q)?;
        let dm = match &self.base {
            ConnectionBase::Abstract { metric, .. } => metric.first_partials(q),
            _ => {
                let f = |p: &[f64; 2]| self.metric3(p).unwrap_or_else(|_| Mat2::from_element(f64::NAN));
                jet::gradient(&f, q, self.step())
            }
        };
        let mut worst: f64 = 0.0;
        for (i, dmi) in dm.iter().enumerate() {
            let g = gamma_matrix(&gam, i);
            let r = dmi - g.transpose() * m - m * g;
            worst = worst.max(r.abs().max());
        }
        Ok(worst / m.abs().max())
    }

    /// `‖∇̃_x(B̃y) − ∇̃_y(B̃x) − B̃[x, y]‖_III` for the constant-coefficient
    /// fields `x`, `y` (so `[x, y] = 0`).
    pub fn dual_codazzi_residual(&self, q: &[f64; 2], x: &Vec2, y: &Vec2) -> Result<f64> {
        if self.is_abstract() {
            return Err(Error::ModeUnsupported);
        }
        let gam = self.coefficients(q)?;
        let b = self.shape(q)?;
        let bt = b.try_inverse().ok_or(Error::DegenerateShapeOperator { point: q.to_vec(), det: 0.0 })?;
        let inv = |p: &[f64; 2]| {
            self.shape_raw(p).ok().and_then(|m| m.try_inverse()).unwrap_or_else(|| Mat2::from_element(f64::NAN))
        };
        let d = jet::gradient(&inv, q, self.step());
        let dx = d[0] * x[0] + d[1] * x[1];
        let dy = d[0] * y[0] + d[1] * y[1];
        let r = dx * y + contract(&gam, x, &(bt * y)) - dy * x - contract(&gam, y, &(bt * x));
        let m = self.metric3(q)?;
        Ok(norm(&m, &r))
    }

    /// `‖(d^∇B)(x, y)‖_I` for `III`-orthonormal `x, y`, computed from `B`
    /// and `I` alone; equals `‖τ‖_III`.
    pub fn exterior_shape_norm(&self, q: &[f64; 2]) -> Result<f64> {
        let (i, b) = self.first_and_shape(q)?;
        let bf = |p: &[f64; 2]| self.shape_raw(p).unwrap_or_else(|_| Mat2::from_element(f64::NAN));
        let db = jet::gradient(&bf, q, self.step());
        let gi = self.first_christoffel(q)?;
        let d = (db[0] + gamma_matrix(&gi, 0) * b).column(1) - (db[1] + gamma_matrix(&gi, 1) * b).column(0);
        let m = b.transpose() * i * b;
        Ok(norm(&i, &d.into_owned()) / m.determinant().sqrt())
    }
}

/// Closed-form torsion bound `(K_M − K_m) / (2√((K_m − K₁)(K_M − K₁)))`.
pub fn torsion_bound_tau0(k_m: f64, k_big: f64, k1: f64) -> Result<f64> {
    if !(k1 < k_m) {
        return Err(Error::InvalidPinching(format!("need K1 < K_m, got K1 = {k1}, K_m = {k_m}")));
    }
    if !(k_m <= k_big) {
        return Err(Error::InvalidPinching(format!("need K_m <= K_M, got {k_m} > {k_big}")));
    }
    Ok((k_big - k_m) / (2.0 * ((k_m - k1) * (k_big - k1)).sqrt()))
}

fn maxi(q1: f64, q2: f64, k1: f64, a: f64) -> f64 {
    let den = (q1 - q2) * a + q2 - k1;
    (q1 - q2).powi(2) * a * (1.0 - a) / (den * den)
}

/// Square root of the maximum over `α ∈ [0, 1]` of
/// `(q₁−q₂)² α(1−α) / ((q₁−q₂)α + q₂ − K₁)²`, by grid search plus the
/// stationary point.
pub fn torsion_bound_bruteforce(q1: f64, q2: f64, k1: f64, grid_size: usize) -> Result<f64> {
    if !(k1 < q1.min(q2)) {
        return Err(Error::InvalidPinching(format!("need K1 < min(q1, q2), got K1 = {k1}")));
    }
    if grid_size < 1000 {
        return Err(Error::ParameterOutOfRange(format!("grid size {grid_size} < 1000")));
    }
    let mut best = (0..=grid_size).map(|i| maxi(q1, q2, k1, i as f64 / grid_size as f64)).fold(0.0, f64::max);
    let den = 2.0 * k1 - q1 - q2;
    if den != 0.0 {
        let a = (k1 - q2) / den;
        if (0.0..=1.0).contains(&a) {
            best = best.max(maxi(q1, q2, k1, a));
        }
    }
    Ok(best.sqrt())
}

/// `(K₄, K₅)`, the bounds `K₄ ≤ K̃ ≤ K₅`.
pub fn curvature_bounds_k4k5(k1: f64, k2: f64, k3: f64) -> Result<(f64, f64)> {
    if !(k1 < 0.0 && k1 < k2 && k2 <= k3) {
        return Err(Error::InvalidPinching(format!("need K1 < 0, K1 < K2 <= K3, got ({k1}, {k2}, {k3})")));
    }
    let k5 = if k2 >= 0.0 { 1.0 } else { k1 / (k1 - k2) };
    let k4 = if k3 <= 0.0 { 1.0 } else { k1 / (k1 - k3) };
    Ok((k4, k5))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub k5: f64,
    pub tau0: f64,
    /// Measured, see `asymptotics::measure_tau1`.
    pub tau1: f64,
}

impl BoundSet {
    pub fn new(k1: f64, k2: f64, k3: f64, tau1: f64) -> Result<BoundSet> {
        let (k4, k5) = curvature_bounds_k4k5(k1, k2, k3)?;
        let tau0 = torsion_bound_tau0(k2, k3, k1)?;
        Ok(BoundSet { k1, k2, k3, k4, k5, tau0, tau1 })
    }

    /// `τ₀ + 2τ₁`, the net expansion constant.
    pub fn net_constant(&self) -> f64 {
        self.tau0 + 2.0 * self.tau1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "K3>=0")]
    Nonnegative,
    #[serde(rename = "K3<=0")]
    Nonpositive,
    #[serde(rename = "both")]
    Both,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Nonnegative => "K3>=0",
            Regime::Nonpositive => "K3<=0",
            Regime::Both => "both",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisVerdict {
    pub regime: Regime,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub excluded: bool,
    pub sit_check: bool,
    pub th1_cond0: bool,
    pub th1_tau0: bool,
}

/// Evaluates the non-existence inequalities for the pinching `(K₁, K₂, K₃)`.
///
/// `K₂ ≤ K₁` is accepted: the inequalities are still evaluated (and fail),
/// while the checks needing `τ₀` or `K₄` report `false`.
pub fn check_hypothesis(k1: f64, k2: f64, k3: f64) -> Result<HypothesisVerdict> {
    if !(k1.is_finite() && k2.is_finite() && k3.is_finite()) {
        return Err(Error::InvalidPinching("non-finite curvature constant".into()));
    }
    if !(k1 < 0.0) {
        return Err(Error::InvalidPinching(format!("need K1 < 0, got {k1}")));
    }
    if !(k2 <= k3) {
        return Err(Error::InvalidPinching(format!("need K2 <= K3, got {k2} > {k3}")));
    }
    let lhs = (k3 - k2) * (k3 - k2);
    let rhs_pos = 16.0 * k1.abs() * (k2 - k1);
    let rhs_neg = 16.0 * (k3 - k1) * (k2 - k1);
    let (regime, rhs, excluded) = if k3 > 0.0 {
        (Regime::Nonnegative, rhs_pos, lhs < rhs_pos)
    } else if k3 < 0.0 {
        (Regime::Nonpositive, rhs_neg, lhs < rhs_neg)
    } else {
        (Regime::Both, rhs_pos, lhs < rhs_pos && lhs < rhs_neg)
    };
    let tau0 = torsion_bound_tau0(k2, k3, k1).ok();
    let sit_check = match (tau0, curvature_bounds_k4k5(k1, k2, k3)) {
        (Some(t), Ok((k4, _))) => 4.0 * k4 > t * t,
        _ => false,
    };
    let th1_tau0 = match tau0 {
        Some(t) if k3 <= 0.0 => t * t < 4.0 * k1 / (k1 - k3),
        Some(t) => t * t < 4.0,
        None => false,
    };
    let th1_cond0 = match tau0 {
        Some(t) => (k3 - k2) / (2.0 * ((k1 - k3) * (k1 - k2)).sqrt()) <= t,
        None => false,
    };
    Ok(HypothesisVerdict { regime, lhs, rhs, margin: rhs - lhs, excluded, sit_check, th1_cond0, th1_tau0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_sphere() -> SurfaceMetric {
        // dθ² + sin²θ dφ²
        SurfaceMetric::new("s2", ChartBox::new([0.1, -4.0], [3.0, 4.0]), |q| Mat2::new(1.0, 0.0, 0.0, q[0].sin().powi(2)))
            .with_first(|q| [Mat2::new(0.0, 0.0, 0.0, (2.0 * q[0]).sin()), Mat2::zeros()])
    }

    #[test]
    fn tau0_examples() {
        assert_eq!(torsion_bound_tau0(-0.5, -0.5, -1.0).unwrap(), 0.0);
        let t = torsion_bound_tau0(-0.9, -0.8, -1.0).unwrap();
        assert!((t - 0.1 / (2.0 * (0.02f64).sqrt())).abs() < 1e-12);
        let t = torsion_bound_tau0(0.0, 1.0, -1.0).unwrap();
        assert!((t - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!(torsion_bound_tau0(-1.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn bruteforce_matches_closed_form() {
        for (q1, q2, k1) in [(-0.9, -0.8, -1.0), (0.0, 1.0, -1.0), (2.0, 2.0, -3.0)] {
            let a = torsion_bound_bruteforce(q1, q2, k1, 10_000).unwrap();
            let b = torsion_bound_tau0(q1.min(q2), q1.max(q2), k1).unwrap();
            assert!((a - b).abs() < 1e-6, "{a} {b}");
        }
    }

    #[test]
    fn k4k5_cases() {
        assert_eq!(curvature_bounds_k4k5(-1.0, 0.0, 0.0).unwrap(), (1.0, 1.0));
        assert_eq!(curvature_bounds_k4k5(-1.0, -0.5, -0.25).unwrap(), (1.0, 2.0));
        assert_eq!(curvature_bounds_k4k5(-1.0, 0.5, 1.0).unwrap(), (0.5, 1.0));
        assert!(curvature_bounds_k4k5(0.5, 1.0, 2.0).is_err());
    }

    #[test]
    fn verdict_examples() {
        let v = check_hypothesis(-1.0, 0.0, 0.0).unwrap();
        assert!(v.excluded && v.regime == Regime::Both && v.margin == 16.0);
        let v = check_hypothesis(-1.0, 2.0, 14.0).unwrap();
        assert_eq!((v.lhs, v.rhs, v.excluded), (144.0, 48.0, false));
        let v = check_hypothesis(-1.0, -0.9, -0.8).unwrap();
        assert_eq!(v.regime, Regime::Nonpositive);
        assert!((v.lhs - 0.01).abs() < 1e-15 && (v.rhs - 0.32).abs() < 1e-12);
        assert!(v.excluded && v.sit_check);
        let json = serde_json::to_value(v).unwrap();
        assert_eq!(json["regime"], "K3<=0");
        assert_eq!(json.as_object().unwrap().len(), 8);
    }

    #[test]
    fn lc_on_round_sphere() {
        let c = SurfaceConnectionData::levi_civita(round_sphere());
        let q = [1.0, 0.2];
        assert!(c.compatibility_residual(&q).unwrap() < 1e-12);
        assert!(c.torsion_from_coefficients(&q).unwrap().norm() < 1e-14);
        let k = c.ktilde(&q).unwrap();
        assert!((k - 1.0).abs() < 1e-7, "{k}");
    }

    #[test]
    fn abstract_torsion_is_recovered() {
        let tau = |q: &[f64; 2]| Vec2::new(0.3 * q[1].cos(), 0.2 + 0.1 * q[0]);
        let c = SurfaceConnectionData::abstract_with(round_sphere(), tau);
        let q = [1.1, 0.4];
        let t = c.torsion_from_coefficients(&q).unwrap();
        assert!((t - tau(&q)).norm() < 1e-12);
        assert!(c.compatibility_residual(&q).unwrap() < 1e-12);
        // K̃ = K + d(τ♭)(∂θ, ∂φ)/√det, with τ♭ = m τ
        let flat = |p: &[f64; 2]| Mat2::new(1.0, 0.0, 0.0, p[0].sin().powi(2)) * tau(p);
        let d = jet::gradient(&flat, &q, 1e-3);
        let expect = 1.0 + (d[0][1] - d[1][0]) / q[0].sin();
        assert!((c.ktilde(&q).unwrap() - expect).abs() < 1e-7);
    }

    #[test]
    fn conjugate_mode_curvature() {
        // I flat, B = diag(1, -1): III = I, K̃ = 0 / -1 = 0
        let flat = SurfaceMetric::new("flat", ChartBox::new([-1.0, -1.0], [1.0, 1.0]), |_| Mat2::identity());
        let c = SurfaceConnectionData::conjugate(flat, |_| Mat2::new(1.0, 0.0, 0.0, -1.0));
        let q = [0.1, 0.2];
        assert!(c.ktilde(&q).unwrap().abs() < 1e-9);
        assert!(c.ktilde_via_frame(&q).unwrap().abs() < 1e-7);
        assert!(c.torsion_norm(&q).unwrap() < 1e-12);
    }

    #[test]
    fn abstract_mode_has_no_shape() {
        let c = SurfaceConnectionData::levi_civita(round_sphere());
        assert_eq!(c.dual_codazzi_residual(&[1.0, 0.0], &Vec2::x(), &Vec2::y()), Err(Error::ModeUnsupported));
    }
}
