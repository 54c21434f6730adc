//! Immersed surface patches and their fundamental forms.
//!
//! Conventions: `B x = ∇^M_x N`, `II(x, y) = I(Bx, y)`,
//! `III(x, y) = I(Bx, By)`. The normal makes `(∂₁φ, ∂₂φ, N)` positively
//! oriented in the ambient chart, times the patch orientation sign.

use crate::ambient::{self, ChartBox, Mat3, MetricField, Vec3};
use crate::error::{Error, Result};
use crate::expr::{CoefficientFile, Expr};
use crate::jet;
use nalgebra::{Matrix2, Vector2};
use std::sync::Arc;

pub type Mat2 = Matrix2<f64>;
pub type Vec2 = Vector2<f64>;

pub type MapFn = Arc<dyn Fn(&[f64; 2]) -> Vec3 + Send + Sync>;
pub type MapFirst = Arc<dyn Fn(&[f64; 2]) -> [Vec3; 2] + Send + Sync>;
/// Second partials ordered `(φ_uu, φ_uv, φ_vv)`.
pub type MapSecond = Arc<dyn Fn(&[f64; 2]) -> [Vec3; 3] + Send + Sync>;

pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Clone)]
pub struct SurfacePatch {
    pub name: String,
    pub domain: ChartBox<2>,
    pub orientation: f64,
    pub h: f64,
    map: MapFn,
    first: Option<MapFirst>,
    second: Option<MapSecond>,
}

impl std::fmt::Debug for SurfacePatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SurfacePatch")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("orientation", &self.orientation)
            .field("h", &self.h)
            .finish()
    }
}

/// Fundamental data at one parameter point.
#[derive(Debug, Clone)]
pub struct FundamentalData {
    pub q: [f64; 2],
    pub point: [f64; 3],
    pub tangents: [Vec3; 2],
    pub first: Mat2,
    pub second: Mat2,
    pub third: Mat2,
    /// Shape operator in the coordinate basis: column `j` is `B ∂_j`.
    pub shape: Mat2,
    pub normal: Vec3,
    pub k_e: f64,
    pub k_i: f64,
    /// Ambient sectional curvature of the tangent plane.
    pub k_ambient: f64,
}

impl SurfacePatch {
    pub fn new(name: impl Into<String>, domain: ChartBox<2>, map: impl Fn(&[f64; 2]) -> Vec3 + Send + Sync + 'static) -> Self {
        SurfacePatch { name: name.into(), domain, orientation: 1.0, h: DEFAULT_STEP, map: Arc::new(map), first: None, second: None }
    }

    pub fn with_first(mut self, f: impl Fn(&[f64; 2]) -> [Vec3; 2] + Send + Sync + 'static) -> Self {
        self.first = Some(Arc::new(f));
        self
    }

    pub fn with_second(mut self, f: impl Fn(&[f64; 2]) -> [Vec3; 3] + Send + Sync + 'static) -> Self {
        self.second = Some(Arc::new(f));
        self
    }

    pub fn with_orientation(mut self, sign: f64) -> Self {
        self.orientation = sign.signum();
        self
    }

    pub fn with_step(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn flipped(&self) -> Self {
        SurfacePatch { orientation: -self.orientation, ..self.clone() }
    }

    pub fn finite_difference_only(&self) -> Self {
        SurfacePatch { first: None, second: None, ..self.clone() }
    }

    /// Margin kept from the domain edge by [`Self::fundamental_forms`].
    pub fn margin(&self) -> f64 {
        if self.second.is_some() {
            self.h
        } else {
            2.0 * self.h
        }
    }

    /// Step for differencing quantities that are themselves differenced
    /// (the shape operator). Wider without analytic second partials so
    /// that rounding in `B` is not amplified.
    pub fn outer_step(&self) -> f64 {
        if self.second.is_some() {
            self.h
        } else {
            10.0 * self.h
        }
    }

    pub fn point(&self, q: &[f64; 2]) -> Vec3 {
        (self.map)(q)
    }

    pub fn tangents(&self, q: &[f64; 2]) -> [Vec3; 2] {
        match &self.first {
            Some(f) => f(q),
            None => jet::gradient(&|p: &[f64; 2]| (self.map)(p), q, self.h),
        }
    }

    pub fn second_partials(&self, q: &[f64; 2]) -> [Vec3; 3] {
        if let Some(f) = &self.second {
            return f(q);
        }
        if let Some(d1) = &self.first {
            let du = jet::partial(&|p: &[f64; 2]| d1(p)[0], q, 0, self.h);
            let dv = jet::partial(&|p: &[f64; 2]| d1(p)[1], q, 1, self.h);
            let duv = (jet::partial(&|p: &[f64; 2]| d1(p)[1], q, 0, self.h) + jet::partial(&|p: &[f64; 2]| d1(p)[0], q, 1, self.h)) * 0.5;
            return [du, duv, dv];
        }
        let hs = jet::hessian(&|p: &[f64; 2]| (self.map)(p), q, self.h);
        [hs[0][0], hs[0][1], hs[1][1]]
    }

    /// First fundamental form at `q` (no chart checks).
    pub fn first_form(&self, ambient: &MetricField, q: &[f64; 2]) -> Mat2 {
        let p = self.point(q);
        let g = ambient.raw(&[p[0], p[1], p[2]]);
        let t = self.tangents(q);
        gram(&g, &t)
    }

    /// Unit normal and the chart data it was built from.
    fn normal_at(&self, g: &Mat3, t: &[Vec3; 2], q: &[f64; 2]) -> Result<Vec3> {
        let c = t[0].cross(&t[1]);
        let gi = g.try_inverse().ok_or(Error::DegenerateImmersion { point: q.to_vec() })?;
        let n = gi * c;
        let nn = (n.transpose() * g * n)[0];
        if !(nn > 0.0) {
            return Err(Error::DegenerateImmersion { point: q.to_vec() });
        }
        Ok(n * (self.orientation / nn.sqrt()))
    }

    /// `(I, II, B, N)` at `q` without curvature terms.
    pub fn shape_data(&self, ambient: &MetricField, q: &[f64; 2]) -> Result<(Mat2, Mat2, Mat2, Vec3)> {
        let p = self.point(q);
        let pa = [p[0], p[1], p[2]];
        let g = ambient.metric(&pa)?;
        let t = self.tangents(q);
        let first = gram(&g, &t);
        let det = first.determinant();
        let scale = first[(0, 0)] * first[(1, 1)];
        if !(det > 1e-14 * scale.max(1e-300)) {
            return Err(Error::DegenerateImmersion { point: q.to_vec() });
        }
        let n = self.normal_at(&g, &t, q)?;
        let gam = ambient.christoffel(&pa)?;
        let dd = self.second_partials(q);
        let mut second = Mat2::zeros();
        for a in 0..2 {
            for b in 0..2 {
                let idx = a + b;
                let mut acc = dd[idx];
                for k in 0..3 {
                    for i in 0..3 {
                        for j in 0..3 {
                            acc[k] += gam[k][i][j] * t[a][i] * t[b][j];
                        }
                    }
                }
                second[(a, b)] = -(n.transpose() * g * acc)[0];
            }
        }
        second = (second + second.transpose()) * 0.5;
        let shape = first.try_inverse().ok_or(Error::DegenerateImmersion { point: q.to_vec() })? * second;
        Ok((first, second, shape, n))
    }

    /// Shape operator only.
    pub fn shape_operator(&self, ambient: &MetricField, q: &[f64; 2]) -> Result<Mat2> {
        self.shape_data(ambient, q).map(|d| d.2)
    }

    /// `∂_u I`, `∂_v I` from the ambient first partials and the patch
    /// second partials, when both are analytic.
    pub fn first_form_partials(&self, ambient: &MetricField, q: &[f64; 2]) -> Option<[Mat2; 2]> {
        if self.first.is_none() || self.second.is_none() || !ambient.has_analytic_first() {
            return None;
        }
        let p = self.point(q);
        let pa = [p[0], p[1], p[2]];
        let g = ambient.raw(&pa);
        let dg = ambient.first_partials(&pa);
        let t = self.tangents(q);
        let dd = self.second_partials(q);
        Some(std::array::from_fn(|k| {
            let dgk = dg[0] * t[k][0] + dg[1] * t[k][1] + dg[2] * t[k][2];
            let mut out = Mat2::zeros();
            for a in 0..2 {
                for b in 0..2 {
                    let (xak, xbk) = (dd[a + k], dd[b + k]);
                    out[(a, b)] = (t[a].transpose() * dgk * t[b])[0] + (xak.transpose() * g * t[b])[0] + (t[a].transpose() * g * xbk)[0];
                }
            }
            out
        }))
    }

    /// Intrinsic curvature of `I`: one difference of the analytic `∂I`
    /// when available, else differences of the induced metric.
    pub fn intrinsic_curvature(&self, ambient: &MetricField, q: &[f64; 2]) -> Result<f64> {
        let f = |p: &[f64; 2]| self.first_form(ambient, p);
        let j = if self.first_form_partials(ambient, q).is_some() {
            let d1 = |p: &[f64; 2]| self.first_form_partials(ambient, p).expect("analytic partials");
            jet::jet_from_first(&f, &d1, q, self.h)
        } else {
            jet::fd_jet(&f, q, self.h)
        };
        let (_, r) = jet::riemann_from(&j).ok_or(Error::DegenerateImmersion { point: q.to_vec() })?;
        Ok(r[0][1][1][0] / j.g.determinant())
    }

    pub fn fundamental_forms(&self, ambient: &MetricField, q: &[f64; 2]) -> Result<FundamentalData> {
        self.domain.check(q, self.margin())?;
        let (first, second, shape, normal) = self.shape_data(ambient, q)?;
        let p = self.point(q);
        let pa = [p[0], p[1], p[2]];
        let t = self.tangents(q);
        let j = ambient.jet(&pa)?;
        let (_, r) = jet::riemann_from(&j).ok_or(Error::NonInvertibleMetric { point: pa.to_vec(), det: j.g.determinant() })?;
        let k_ambient = ambient::sectional_from(&j.g, &r, &t[0], &t[1])?;
        let k_i = self.intrinsic_curvature(ambient, q)?;
        let third = shape.transpose() * first * shape;
        Ok(FundamentalData { q: *q, point: pa, tangents: t, first, second, third, shape, normal, k_e: k_i - k_ambient, k_i, k_ambient })
    }

    /// `(d^∇B)(∂_u, ∂_v)` in coordinates, with `∇` the Levi-Civita
    /// connection of `I`.
    pub fn exterior_derivative_shape(&self, ambient: &MetricField, q: &[f64; 2]) -> Result<Vec2> {
        let bf = |p: &[f64; 2]| self.shape_operator(ambient, p).unwrap_or_else(|_| Mat2::from_element(f64::NAN));
        let db = jet::gradient(&bf, q, self.outer_step());
        let b = self.shape_operator(ambient, q)?;
        let gam = self.first_christoffel(ambient, q)?;
        let bv = b.column(1).into_owned();
        let bu = b.column(0).into_owned();
        let mut out = db[0].column(1) - db[1].column(0);
        for k in 0..2 {
            for c in 0..2 {
                out[k] += gam[k][0][c] * bv[c] - gam[k][1][c] * bu[c];
            }
        }
        if out.iter().any(|x| !x.is_finite()) {
            return Err(Error::DegenerateImmersion { point: q.to_vec() });
        }
        Ok(out)
    }

    /// Christoffel symbols of `I` at `q`.
    pub fn first_christoffel(&self, ambient: &MetricField, q: &[f64; 2]) -> Result<jet::Christoffel<2>> {
        let f = |p: &[f64; 2]| self.first_form(ambient, p);
        let g = f(q);
        let dg = jet::gradient(&f, q, self.h);
        jet::christoffel_from(&g, &dg).ok_or(Error::DegenerateImmersion { point: q.to_vec() })
    }

    /// Builds a patch from `phi1 .. phi3` expressions in `u, v`.
    pub fn from_coefficients(name: &str, file: &CoefficientFile) -> Result<SurfacePatch> {
        let comps: Vec<Expr> = ["phi1", "phi2", "phi3"]
            .iter()
            .map(|k| file.entry(k).cloned().ok_or_else(|| Error::Config(format!("missing map component {k}"))))
            .collect::<Result<_>>()?;
        let (u0, u1) = file.range("u").ok_or_else(|| Error::Config("missing 'range u'".into()))?;
        let (v0, v1) = file.range("v").ok_or_else(|| Error::Config("missing 'range v'".into()))?;
        let map = move |q: &[f64; 2]| {
            Vec3::new(
                comps[0].eval(q).unwrap_or(f64::NAN),
                comps[1].eval(q).unwrap_or(f64::NAN),
                comps[2].eval(q).unwrap_or(f64::NAN),
            )
        };
        let mut patch = SurfacePatch::new(name, ChartBox::new([u0, v0], [u1, v1]), map);
        if let Some(h) = file.scalar("step") {
            patch.h = h;
        }
        if let Some(s) = file.scalar("orientation") {
            patch.orientation = if s < 0.0 { -1.0 } else { 1.0 };
        }
        Ok(patch)
    }
}

/// Gram matrix of two chart vectors.
pub fn gram(g: &Mat3, t: &[Vec3; 2]) -> Mat2 {
    let mut m = Mat2::zeros();
    for a in 0..2 {
        for b in 0..2 {
            m[(a, b)] = (t[a].transpose() * g * t[b])[0];
        }
    }
    m
}

pub fn fundamental_forms(patch: &SurfacePatch, ambient: &MetricField, q: &[f64; 2]) -> Result<FundamentalData> {
    patch.fundamental_forms(ambient, q)
}

/// `‖(d^∇B)(x, y) − R(x, y)N‖_I`, zero by the Codazzi equation. With the
/// opposite curvature sign convention this reads `d^∇B + R_{x,y} n`.
pub fn codazzi_residual(patch: &SurfacePatch, ambient: &MetricField, q: &[f64; 2], x: &Vec2, y: &Vec2) -> Result<f64> {
    patch.domain.check(q, patch.margin() + patch.outer_step())?;
    let wedge = x[0] * y[1] - x[1] * y[0];
    if wedge.abs() < 1e-14 {
        return Err(Error::DegeneratePlane { gram: wedge * wedge });
    }
    let dnb = patch.exterior_derivative_shape(ambient, q)?;
    let (first, _, _, n) = patch.shape_data(ambient, q)?;
    let p = patch.point(q);
    let pa = [p[0], p[1], p[2]];
    let j = ambient.jet(&pa)?;
    let (_, r) = jet::riemann_from(&j).ok_or(Error::NonInvertibleMetric { point: pa.to_vec(), det: j.g.determinant() })?;
    let t = patch.tangents(q);
    let rn = ambient::riemann_vector(&j.g, &r, &t[0], &t[1], &n);
    let rhs_low = Vec2::new((t[0].transpose() * j.g * rn)[0], (t[1].transpose() * j.g * rn)[0]);
    let rhs = first.try_inverse().ok_or(Error::DegenerateImmersion { point: q.to_vec() })? * rhs_low;
    let d = (dnb - rhs) * wedge;
    Ok((d.transpose() * first * d)[0].max(0.0).sqrt())
}

/// `|det B − (K_I − K_M(TΣ))|`.
pub fn gauss_residual(patch: &SurfacePatch, ambient: &MetricField, q: &[f64; 2]) -> Result<f64> {
    let d = patch.fundamental_forms(ambient, q)?;
    Ok((d.shape.determinant() - d.k_e).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euclid() -> MetricField {
        MetricField::new("e3", ChartBox::unbounded(), |_| Mat3::identity())
            .with_first(|_| [Mat3::zeros(); 3])
            .with_second(|_| [[Mat3::zeros(); 3]; 3])
    }

    fn sphere() -> SurfacePatch {
        // colatitude u, longitude v
        SurfacePatch::new("sphere", ChartBox::new([0.2, -3.0], [2.9, 3.0]), |q| {
            Vec3::new(q[0].sin() * q[1].cos(), q[0].sin() * q[1].sin(), q[0].cos())
        })
    }

    #[test]
    fn plane_is_flat() {
        let plane = SurfacePatch::new("plane", ChartBox::new([-1.0, -1.0], [1.0, 1.0]), |q| Vec3::new(q[0], q[1], 0.0));
        let d = plane.fundamental_forms(&euclid(), &[0.1, 0.2]).unwrap();
        assert!(d.shape.abs().max() < 1e-9);
        assert!(d.third.abs().max() < 1e-9);
        assert!(d.k_e.abs() < 1e-9);
        assert!(gauss_residual(&plane, &euclid(), &[0.1, 0.2]).unwrap() < 1e-9);
    }

    #[test]
    fn sphere_outward_normal_gives_identity() {
        let d = sphere().fundamental_forms(&euclid(), &[1.0, 0.5]).unwrap();
        // (∂θ, ∂φ, N) positive means N points outward here
        assert!(d.normal.dot(&Vec3::from(d.point)) > 0.0);
        assert!((d.shape - Mat2::identity()).abs().max() < 1e-6);
        assert!((d.k_i - 1.0).abs() < 1e-6);
        assert!(gauss_residual(&sphere(), &euclid(), &[1.0, 0.5]).unwrap() < 1e-6);
        let r = codazzi_residual(&sphere(), &euclid(), &[1.0, 0.5], &Vec2::new(1.0, 0.0), &Vec2::new(0.0, 1.0)).unwrap();
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn flip_negates_shape_only() {
        let a = sphere().fundamental_forms(&euclid(), &[1.0, 0.5]).unwrap();
        let b = sphere().flipped().fundamental_forms(&euclid(), &[1.0, 0.5]).unwrap();
        assert!((a.shape + b.shape).abs().max() < 1e-9);
        assert!((a.normal + b.normal).norm() < 1e-12);
        assert!((a.third - b.third).abs().max() < 1e-9);
        assert!((a.k_e - b.k_e).abs() < 1e-9);
    }

    #[test]
    fn rank_deficient_patch() {
        let bad = SurfacePatch::new("line", ChartBox::new([-1.0, -1.0], [1.0, 1.0]), |q| Vec3::new(q[0] + q[1], 0.0, 0.0));
        assert!(matches!(bad.fundamental_forms(&euclid(), &[0.0, 0.0]), Err(Error::DegenerateImmersion { .. })));
    }
}
