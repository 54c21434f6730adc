//! Ambient 3-metrics on a single chart box.
//!
//! A [`MetricField`] is a point evaluator `p ↦ g_ij(p)` with optional
//! analytic first and second partials. Without them, partials come from
//! central differences with step `h` and one Richardson step.

use crate::error::{Error, Result};
use crate::expr::CoefficientFile;
use crate::jet::{self, Christoffel, MetricJet, Riemann};
use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub type Mat3 = Matrix3<f64>;
pub type Vec3 = Vector3<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl ChartPoint {
    pub fn new(u: f64, v: f64, w: f64) -> Self {
        ChartPoint { u, v, w }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.u, self.v, self.w]
    }
}

impl From<[f64; 3]> for ChartPoint {
    fn from(a: [f64; 3]) -> Self {
        ChartPoint { u: a[0], v: a[1], w: a[2] }
    }
}

/// Axis-aligned chart box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartBox<const N: usize> {
    pub lo: [f64; N],
    pub hi: [f64; N],
}

impl<const N: usize> ChartBox<N> {
    pub fn new(lo: [f64; N], hi: [f64; N]) -> Self {
        ChartBox { lo, hi }
    }

    pub fn unbounded() -> Self {
        ChartBox { lo: [f64::NEG_INFINITY; N], hi: [f64::INFINITY; N] }
    }

    pub fn contains(&self, p: &[f64; N], margin: f64) -> bool {
        (0..N).all(|i| p[i] >= self.lo[i] + margin && p[i] <= self.hi[i] - margin)
    }

    pub fn check(&self, p: &[f64; N], margin: f64) -> Result<()> {
        if self.contains(p, margin) {
            Ok(())
        } else {
            Err(Error::PointOutsideChart { point: p.to_vec(), margin })
        }
    }
}

pub type PointFn = Arc<dyn Fn(&[f64; 3]) -> Mat3 + Send + Sync>;
pub type FirstFn = Arc<dyn Fn(&[f64; 3]) -> [Mat3; 3] + Send + Sync>;
pub type SecondFn = Arc<dyn Fn(&[f64; 3]) -> [[Mat3; 3]; 3] + Send + Sync>;

pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Clone)]
pub struct MetricField {
    pub name: String,
    pub chart: ChartBox<3>,
    pub h: f64,
    eval: PointFn,
    first: Option<FirstFn>,
    second: Option<SecondFn>,
    exprs: Option<Arc<Vec<Option<crate::expr::Expr>>>>,
}

impl std::fmt::Debug for MetricField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricField")
            .field("name", &self.name)
            .field("chart", &self.chart)
            .field("h", &self.h)
            .field("analytic_first", &self.first.is_some())
            .field("analytic_second", &self.second.is_some())
            .finish()
    }
}

/// Curvature data at one point.
#[derive(Debug, Clone)]
pub struct CurvatureSample {
    pub point: ChartPoint,
    pub christoffel: Christoffel<3>,
    pub riemann: Riemann<3>,
    pub k_min: f64,
    pub k_max: f64,
}

impl MetricField {
    pub fn new(name: impl Into<String>, chart: ChartBox<3>, eval: impl Fn(&[f64; 3]) -> Mat3 + Send + Sync + 'static) -> Self {
        MetricField { name: name.into(), chart, h: DEFAULT_STEP, eval: Arc::new(eval), first: None, second: None, exprs: None }
    }

    pub fn with_first(mut self, f: impl Fn(&[f64; 3]) -> [Mat3; 3] + Send + Sync + 'static) -> Self {
        self.first = Some(Arc::new(f));
        self
    }

    pub fn with_second(mut self, f: impl Fn(&[f64; 3]) -> [[Mat3; 3]; 3] + Send + Sync + 'static) -> Self {
        self.second = Some(Arc::new(f));
        self
    }

    pub fn with_step(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    /// Drops analytic partials so every derivative goes through differences.
    pub fn finite_difference_only(&self) -> Self {
        MetricField { first: None, second: None, ..self.clone() }
    }

    pub fn has_analytic_first(&self) -> bool {
        self.first.is_some()
    }

    /// Margin needed around a point for the derivatives this field uses.
    pub fn margin(&self) -> f64 {
        if self.first.is_some() && self.second.is_some() {
            0.0
        } else {
            self.h
        }
    }

    /// Raw metric value; the chart is not checked.
    pub fn raw(&self, p: &[f64; 3]) -> Mat3 {
        (self.eval)(p)
    }

    pub fn metric(&self, p: &[f64; 3]) -> Result<Mat3> {
        self.chart.check(p, 0.0)?;
        Ok((self.eval)(p))
    }

    fn checked_det(&self, p: &[f64; 3], g: &Mat3) -> Result<()> {
        let det = g.determinant();
        if det.abs() < jet::DET_FLOOR {
            return Err(Error::NonInvertibleMetric { point: p.to_vec(), det });
        }
        Ok(())
    }

    pub fn first_partials(&self, p: &[f64; 3]) -> [Mat3; 3] {
        match &self.first {
            Some(f) => f(p),
            None => jet::gradient(&|q: &[f64; 3]| (self.eval)(q), p, self.h),
        }
    }

    /// Value, first and second partials at `p`.
    pub fn jet(&self, p: &[f64; 3]) -> Result<MetricJet<3>> {
        self.chart.check(p, self.margin())?;
        let g = (self.eval)(p);
        self.checked_det(p, &g)?;
        let f = |q: &[f64; 3]| (self.eval)(q);
        Ok(match (&self.first, &self.second) {
            (Some(d1), Some(d2)) => MetricJet { g, dg: d1(p), ddg: d2(p) },
            (Some(d1), None) => jet::jet_from_first(&f, &|q: &[f64; 3]| d1(q), p, self.h),
            _ => jet::fd_jet(&f, p, self.h),
        })
    }

    pub fn christoffel(&self, p: &[f64; 3]) -> Result<Christoffel<3>> {
        let margin = if self.first.is_some() { 0.0 } else { self.h };
        self.chart.check(p, margin)?;
        let g = (self.eval)(p);
        self.checked_det(p, &g)?;
        let dg = self.first_partials(p);
        jet::christoffel_from(&g, &dg).ok_or(Error::NonInvertibleMetric { point: p.to_vec(), det: g.determinant() })
    }

    pub fn riemann(&self, p: &[f64; 3]) -> Result<Riemann<3>> {
        let j = self.jet(p)?;
        jet::riemann_from(&j)
            .map(|(_, r)| r)
            .ok_or(Error::NonInvertibleMetric { point: p.to_vec(), det: j.g.determinant() })
    }

    /// Checks symmetry and positive definiteness (all leading minors > 0).
    pub fn validate_at(&self, p: &[f64; 3]) -> Result<()> {
        let g = self.metric(p)?;
        let asym = (g - g.transpose()).abs().max();
        let m1 = g[(0, 0)];
        let m2 = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)];
        let m3 = g.determinant();
        if asym > 1e-12 || m1 <= 0.0 || m2 <= 0.0 || m3 <= 0.0 {
            return Err(Error::NonInvertibleMetric { point: p.to_vec(), det: m3 });
        }
        Ok(())
    }

    pub fn curvature_sample(&self, p: &[f64; 3]) -> Result<CurvatureSample> {
        let j = self.jet(p)?;
        let (gam, r) = jet::riemann_from(&j).ok_or(Error::NonInvertibleMetric { point: p.to_vec(), det: j.g.determinant() })?;
        let (k_min, k_max) = range_from(&j.g, &r);
        Ok(CurvatureSample { point: ChartPoint::from(*p), christoffel: gam, riemann: r, k_min, k_max })
    }

    /// Builds a metric from a coefficient file with entries `g11 .. g33` in
    /// the variables `u, v, w` and `range` lines for the chart box.
    pub fn from_coefficients(name: &str, file: &CoefficientFile) -> Result<MetricField> {
        let keys = [["g11", "g12", "g13"], ["g12", "g22", "g23"], ["g13", "g23", "g33"]];
        let mut exprs: Vec<Option<crate::expr::Expr>> = Vec::new();
        for (i, row) in keys.iter().enumerate() {
            for (j, key) in row.iter().enumerate() {
                let alt = format!("g{}{}", j + 1, i + 1);
                let e = file.entry(key).or_else(|| file.entry(&alt)).cloned();
                if i == j && e.is_none() {
                    return Err(Error::Config(format!("missing diagonal coefficient {key}")));
                }
                exprs.push(e);
            }
        }
        for (k, _) in &file.entries {
            let ok = k.len() == 3 && k.starts_with('g') && k[1..].chars().all(|c| ('1'..='3').contains(&c));
            if !ok {
                return Err(Error::Config(format!("unknown coefficient '{k}'")));
            }
        }
        let mut lo = [f64::NEG_INFINITY; 3];
        let mut hi = [f64::INFINITY; 3];
        for (i, var) in ["u", "v", "w"].iter().enumerate() {
            if let Some((a, b)) = file.range(var) {
                lo[i] = a;
                hi[i] = b;
            }
        }
        // evaluation errors (division by zero) are reported by `probe`
        let shared = Arc::new(exprs);
        let eval = {
            let shared = shared.clone();
            move |p: &[f64; 3]| {
                let mut m = Mat3::zeros();
                for i in 0..3 {
                    for j in 0..3 {
                        if let Some(e) = &shared[3 * i + j] {
                            m[(i, j)] = e.eval(p).unwrap_or(f64::NAN);
                        }
                    }
                }
                m
            }
        };
        let mut field = MetricField::new(name, ChartBox::new(lo, hi), eval);
        if let Some(h) = file.scalar("step") {
            field.h = h;
        }
        field.exprs = Some(shared);
        Ok(field)
    }
}

impl MetricField {
    /// Evaluates the coefficient expressions (file-built metrics only) so a
    /// division by zero is reported with the offending point.
    pub fn probe(&self, p: &[f64; 3]) -> Result<()> {
        if let Some(exprs) = &self.exprs {
            for e in exprs.iter().flatten() {
                e.eval(p)?;
            }
        }
        Ok(())
    }
}

/// Sectional curvature `R(x,y,y,x) / (|x|²|y|² − ⟨x,y⟩²)` from a tensor.
pub fn sectional_from(g: &Mat3, r: &Riemann<3>, x: &Vec3, y: &Vec3) -> Result<f64> {
    let gram = (x.transpose() * g * x)[0] * (y.transpose() * g * y)[0] - (x.transpose() * g * y)[0].powi(2);
    let scale = (x.transpose() * g * x)[0] * (y.transpose() * g * y)[0];
    if gram <= 1e-14 * scale.max(1e-300) || gram <= 0.0 {
        return Err(Error::DegeneratePlane { gram });
    }
    let xa = [x[0], x[1], x[2]];
    let ya = [y[0], y[1], y[2]];
    Ok(jet::riemann_apply(r, &xa, &ya, &ya, &xa) / gram)
}

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Curvature operator on Λ² in the basis (e₁∧e₂, e₁∧e₃, e₂∧e₃):
/// returns `(R̂, G)` with `R̂_AB = R(a₁,a₂,b₂,b₁)` and `G` the induced inner
/// product. Sectional curvature of `Σ c_A E_A` is `cᵀR̂c / cᵀGc`.
pub fn curvature_operator(g: &Mat3, r: &Riemann<3>) -> (Mat3, Mat3) {
    let mut rh = Mat3::zeros();
    let mut gg = Mat3::zeros();
    for (a, &(a1, a2)) in PAIRS.iter().enumerate() {
        for (b, &(b1, b2)) in PAIRS.iter().enumerate() {
            rh[(a, b)] = r[a1][a2][b2][b1];
            gg[(a, b)] = g[(a1, b1)] * g[(a2, b2)] - g[(a1, b2)] * g[(a2, b1)];
        }
    }
    (rh, gg)
}

/// Eigenvalue extremes of the curvature operator (generalised problem
/// `R̂c = K G c`, reduced through the Cholesky factor of `G`).
pub fn range_from(g: &Mat3, r: &Riemann<3>) -> (f64, f64) {
    let (rh, gg) = curvature_operator(g, r);
    let rh = (rh + rh.transpose()) * 0.5;
    let l = match gg.cholesky() {
        Some(c) => c.l(),
        None => return (f64::NAN, f64::NAN),
    };
    let li = l.try_inverse().unwrap_or_else(Mat3::identity);
    let m = li * rh * li.transpose();
    let m = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(m).eigenvalues;
    (eig.min(), eig.max())
}

/// Christoffel symbols of the Levi-Civita connection at `p`.
pub fn christoffel(metric: &MetricField, p: &ChartPoint) -> Result<Christoffel<3>> {
    metric.christoffel(&p.to_array())
}

/// Sectional curvature of the plane spanned by `x, y` at `p`.
pub fn riemann_sectional(metric: &MetricField, p: &ChartPoint, x: &Vec3, y: &Vec3) -> Result<f64> {
    let j = metric.jet(&p.to_array())?;
    let (_, r) = jet::riemann_from(&j).ok_or(Error::NonInvertibleMetric { point: p.to_array().to_vec(), det: j.g.determinant() })?;
    sectional_from(&j.g, &r, x, y)
}

/// `(K_min, K_max)` over all 2-planes at `p`.
pub fn sectional_range(metric: &MetricField, p: &ChartPoint) -> Result<(f64, f64)> {
    let s = metric.curvature_sample(&p.to_array())?;
    Ok((s.k_min, s.k_max))
}

/// Gram–Schmidt frame of `g` directed by the coordinate axes.
pub fn coordinate_frame(g: &Mat3) -> [Vec3; 3] {
    let mut out = [Vec3::zeros(); 3];
    for i in 0..3 {
        let mut e = Vec3::zeros();
        e[i] = 1.0;
        for prev in out.iter().take(i) {
            let c = (prev.transpose() * g * e)[0];
            e -= prev * c;
        }
        let n = (e.transpose() * g * e)[0].sqrt();
        out[i] = e / n;
    }
    out
}

/// `g(R(x, y) z, w)` for chart vectors.
pub fn riemann_vec(r: &Riemann<3>, x: &Vec3, y: &Vec3, z: &Vec3, w: &Vec3) -> f64 {
    let a = |v: &Vec3| [v[0], v[1], v[2]];
    jet::riemann_apply(r, &a(x), &a(y), &a(z), &a(w))
}

/// The vector `R(x, y) z` in chart components.
pub fn riemann_vector(g: &Mat3, r: &Riemann<3>, x: &Vec3, y: &Vec3, z: &Vec3) -> Vec3 {
    // lowered components g(R(x,y)z, e_l), then raise
    let mut low = Vec3::zeros();
    for l in 0..3 {
        let mut e = Vec3::zeros();
        e[l] = 1.0;
        low[l] = riemann_vec(r, x, y, z, &e);
    }
    g.try_inverse().unwrap_or_else(Mat3::identity) * low
}
