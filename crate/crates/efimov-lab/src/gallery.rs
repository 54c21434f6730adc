//! Ready-made metrics, patches and connections with closed-form reference
//! data, plus the virtual third form built from a Monge–Ampère solution.

use crate::ambient::{self, ChartBox, Mat3, MetricField, Vec3};
use crate::connection::{self, SurfaceConnectionData, SurfaceMetric};
use crate::error::{Error, Result};
use crate::immersion::{Mat2, SurfacePatch, Vec2};
use crate::jet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

pub type Params = BTreeMap<String, f64>;
pub type ScalarFn = Arc<dyn Fn(&[f64; 2]) -> f64 + Send + Sync>;

fn param(p: &Params, key: &str, default: f64) -> f64 {
    p.get(key).copied().unwrap_or(default)
}

fn reject_unknown(p: &Params, allowed: &[&str]) -> Result<()> {
    match p.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::ParameterOutOfRange(format!("unknown parameter '{k}' (allowed: {})", allowed.join(", ")))),
        None => Ok(()),
    }
}

// ---------------------------------------------------------------- metrics

/// `ψ(x) δ` with analytic partials from `ψ`, `∇ψ` and the Hessian of `ψ`.
fn conformal3(
    name: &str,
    chart: ChartBox<3>,
    psi: impl Fn(&Vec3) -> f64 + Send + Sync + Copy + 'static,
    dpsi: impl Fn(&Vec3) -> Vec3 + Send + Sync + Copy + 'static,
    ddpsi: impl Fn(&Vec3) -> Mat3 + Send + Sync + Copy + 'static,
) -> MetricField {
    MetricField::new(name, chart, move |p| Mat3::identity() * psi(&Vec3::from(*p)))
        .with_first(move |p| {
            let d = dpsi(&Vec3::from(*p));
            [Mat3::identity() * d[0], Mat3::identity() * d[1], Mat3::identity() * d[2]]
        })
        .with_second(move |p| {
            let h = ddpsi(&Vec3::from(*p));
            std::array::from_fn(|i| std::array::from_fn(|j| Mat3::identity() * h[(i, j)]))
        })
}

pub fn euclidean3() -> MetricField {
    MetricField::new("euclidean3", ChartBox::unbounded(), |_| Mat3::identity())
        .with_first(|_| [Mat3::zeros(); 3])
        .with_second(|_| [[Mat3::zeros(); 3]; 3])
}

/// Round unit 3-sphere in the stereographic chart `4/(1+|x|²)² δ`.
pub fn sphere3() -> MetricField {
    conformal3(
        "sphere3",
        ChartBox::new([-3.0; 3], [3.0; 3]),
        |x| 4.0 / (1.0 + x.norm_squared()).powi(2),
        |x| x * (-16.0 / (1.0 + x.norm_squared()).powi(3)),
        |x| {
            let s = 1.0 + x.norm_squared();
            Mat3::identity() * (-16.0 / s.powi(3)) + x * x.transpose() * (96.0 / s.powi(4))
        },
    )
}

/// Hyperbolic 3-space in the Poincaré ball `4/(1−|x|²)² δ`.
pub fn hyperbolic3() -> MetricField {
    conformal3(
        "hyperbolic3",
        ChartBox::new([-0.55; 3], [0.55; 3]),
        |x| 4.0 / (1.0 - x.norm_squared()).powi(2),
        |x| x * (16.0 / (1.0 - x.norm_squared()).powi(3)),
        |x| {
            let s = 1.0 - x.norm_squared();
            Mat3::identity() * (16.0 / s.powi(3)) + x * x.transpose() * (96.0 / s.powi(4))
        },
    )
}

/// Default half-height of the `g_λ` chart box.
pub fn g_lambda_default_z(lambda: f64) -> f64 {
    if lambda > 0.0 {
        0.2f64.min(1.0 / (4.0 * lambda))
    } else {
        0.2
    }
}

/// `(1+2λz) cosh²y cosh²z dx² + (1−2λz) cosh²z dy² + dz²` on
/// `|x|, |y| ≤ 2`, `|z| ≤ z_max`.
pub fn g_lambda(lambda: f64, z_max: f64) -> Result<MetricField> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::ParameterOutOfRange(format!("lambda must be >= 0, got {lambda}")));
    }
    if !(z_max > 0.0) || lambda * z_max >= 0.5 {
        return Err(Error::ParameterOutOfRange(format!(
            "z box {z_max} leaves the positive region (need lambda * z_max < 1/2)"
        )));
    }
    let l = lambda;
    let eval = move |p: &[f64; 3]| {
        let (y, z) = (p[1], p[2]);
        let c = z.cosh().powi(2);
        Mat3::from_diagonal(&Vec3::new((1.0 + 2.0 * l * z) * y.cosh().powi(2) * c, (1.0 - 2.0 * l * z) * c, 1.0))
    };
    let first = move |p: &[f64; 3]| {
        let (y, z) = (p[1], p[2]);
        let (a, da) = (y.cosh().powi(2), (2.0 * y).sinh());
        let (c, dc) = (z.cosh().powi(2), (2.0 * z).sinh());
        let dy = Mat3::from_diagonal(&Vec3::new((1.0 + 2.0 * l * z) * da * c, 0.0, 0.0));
        let dz = Mat3::from_diagonal(&Vec3::new(a * (2.0 * l * c + (1.0 + 2.0 * l * z) * dc), -2.0 * l * c + (1.0 - 2.0 * l * z) * dc, 0.0));
        [Mat3::zeros(), dy, dz]
    };
    let second = move |p: &[f64; 3]| {
        let (y, z) = (p[1], p[2]);
        let (a, da, dda) = (y.cosh().powi(2), (2.0 * y).sinh(), 2.0 * (2.0 * y).cosh());
        let (c, dc, ddc) = (z.cosh().powi(2), (2.0 * z).sinh(), 2.0 * (2.0 * z).cosh());
        let yy = Mat3::from_diagonal(&Vec3::new((1.0 + 2.0 * l * z) * dda * c, 0.0, 0.0));
        let yz = Mat3::from_diagonal(&Vec3::new(da * (2.0 * l * c + (1.0 + 2.0 * l * z) * dc), 0.0, 0.0));
        let zz = Mat3::from_diagonal(&Vec3::new(
            a * (4.0 * l * dc + (1.0 + 2.0 * l * z) * ddc),
            -4.0 * l * dc + (1.0 - 2.0 * l * z) * ddc,
            0.0,
        ));
        let z0 = Mat3::zeros();
        [[z0, z0, z0], [z0, yy, yz], [z0, yz, zz]]
    };
    Ok(MetricField::new(format!("g_lambda({l})"), ChartBox::new([-2.0, -2.0, -z_max], [2.0, 2.0, z_max]), eval)
        .with_first(first)
        .with_second(second))
}

/// The six printed curvature entries of `g_λ` in the orthonormal frame
/// directed by the coordinate axes, as
/// `[K(e₁,e₂), K(e₁,e₃), K(e₂,e₃), R(e₁,e₂,e₁,e₃), R(e₂,e₁,e₂,e₃), R(e₃,e₁,e₃,e₂)]`
/// where `R(a,b,c,d) = g(R(a,b)c, d)`. The first three are sectional
/// curvatures.
pub fn g_lambda_entries(metric: &MetricField, p: &[f64; 3]) -> Result<[f64; 6]> {
    let g = metric.metric(p)?;
    let r = metric.riemann(p)?;
    let [e1, e2, e3] = ambient::coordinate_frame(&g);
    let rv = |a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3| ambient::riemann_vec(&r, a, b, c, d);
    Ok([rv(&e1, &e2, &e2, &e1), rv(&e1, &e3, &e3, &e1), rv(&e2, &e3, &e3, &e2), rv(&e1, &e2, &e1, &e3), rv(&e2, &e1, &e2, &e3), rv(&e3, &e1, &e3, &e2)])
}

/// Closed-form values of [`g_lambda_entries`].
pub fn g_lambda_reference(lambda: f64, y: f64) -> [f64; 6] {
    let d = lambda * lambda - 1.0;
    [d, d, d, 2.0 * lambda * y.tanh(), 0.0, 0.0]
}

// ---------------------------------------------------------- 2D metrics

fn conformal2(name: &str, domain: ChartBox<2>, psi: fn(f64) -> f64, dpsi: fn(f64) -> f64) -> SurfaceMetric {
    // ψ as a function of r², dψ its derivative in r²
    SurfaceMetric::new(name, domain, move |q| Mat2::identity() * psi(q[0] * q[0] + q[1] * q[1])).with_first(move |q| {
        let d = dpsi(q[0] * q[0] + q[1] * q[1]);
        [Mat2::identity() * (2.0 * q[0] * d), Mat2::identity() * (2.0 * q[1] * d)]
    })
}

/// Unit sphere in the stereographic chart; the origin is a pole and the
/// chart radius `tan(ψ/2)` is the circle at colatitude `ψ`.
pub fn sphere2() -> SurfaceMetric {
    conformal2("sphere2", ChartBox::new([-3.0, -3.0], [3.0, 3.0]), |s| 4.0 / (1.0 + s).powi(2), |s| -8.0 / (1.0 + s).powi(3))
}

/// Poincaré disk; chart radius `tanh(ρ/2)` is hyperbolic radius `ρ`.
pub fn hyperbolic2() -> SurfaceMetric {
    conformal2("hyperbolic2", ChartBox::new([-0.7, -0.7], [0.7, 0.7]), |s| 4.0 / (1.0 - s).powi(2), |s| 8.0 / (1.0 - s).powi(3))
}

pub fn flat2() -> SurfaceMetric {
    SurfaceMetric::new("flat2", ChartBox::new([-10.0, -10.0], [10.0, 10.0]), |_| Mat2::identity()).with_first(|_| [Mat2::zeros(); 2])
}

pub const POLAR_R_MIN: f64 = 1e-3;

/// `dr² + sinh²r dθ²` on `r ∈ [r_min, 6]`, `θ ∈ [−10, 10]` (no wrap).
pub fn hyperbolic_polar() -> SurfaceMetric {
    SurfaceMetric::new("hyperbolic_polar", ChartBox::new([POLAR_R_MIN, -10.0], [6.0, 10.0]), |q| Mat2::new(1.0, 0.0, 0.0, q[0].sinh().powi(2)))
        .with_first(|q| [Mat2::new(0.0, 0.0, 0.0, (2.0 * q[0]).sinh()), Mat2::zeros()])
}

/// `dψ² + sin²ψ dφ²` (colatitude, longitude) with `φ ∈ [−10, 10]`.
pub fn sphere_polar() -> SurfaceMetric {
    SurfaceMetric::new("sphere_polar", ChartBox::new([1e-3, -10.0], [std::f64::consts::PI - 1e-3, 10.0]), |q| {
        Mat2::new(1.0, 0.0, 0.0, q[0].sin().powi(2))
    })
    .with_first(|q| [Mat2::new(0.0, 0.0, 0.0, (2.0 * q[0]).sin()), Mat2::zeros()])
}

// ------------------------------------------------------------ connections

/// Hyperbolic plane (polar chart) with `∇^t = ∇⁰ + β_t ⊗ J`, `β_t = −t u_θ*`,
/// where `u_θ` is the unit angular field. Torsion vector `τ = t u_θ`.
pub fn hyperbolic_deformed(t: f64) -> Result<SurfaceConnectionData> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::ParameterOutOfRange(format!("t must be >= 0, got {t}")));
    }
    Ok(SurfaceConnectionData::abstract_with(hyperbolic_polar(), move |q| Vec2::new(0.0, t / q[0].sinh())).named(format!("hyperbolic_deformed({t})")))
}

/// Curvature of `∇^t` derived from `K̃ = K + d(τ♭)/dv`: `t·coth(r) − 1`.
pub fn deformed_curvature(t: f64, r: f64) -> f64 {
    t / r.tanh() - 1.0
}

/// The printed closed form `t·tanh(r) − 1`.
pub fn deformed_curvature_printed(t: f64, r: f64) -> f64 {
    t * r.tanh() - 1.0
}

// ---------------------------------------------------------------- patches

/// Clifford torus `(cos u, sin u, cos v, sin v)/√2` in the stereographic
/// chart of [`sphere3`], with analytic partials.
pub fn clifford_torus() -> SurfacePatch {
    let s2 = std::f64::consts::SQRT_2;
    let lim = std::f64::consts::PI + 1.0;
    SurfacePatch::new("clifford_torus", ChartBox::new([-lim, -lim], [lim, lim]), move |q| {
        let d = s2 + q[1].sin();
        Vec3::new(q[0].cos(), q[0].sin(), q[1].cos()) / d
    })
    .with_first(move |q| {
        let (cu, su, cv, sv) = (q[0].cos(), q[0].sin(), q[1].cos(), q[1].sin());
        let d = s2 + sv;
        let inv_d = -cv / (d * d);
        let w1 = (-s2 * sv - 1.0) / (d * d);
        [Vec3::new(-su / d, cu / d, 0.0), Vec3::new(cu * inv_d, su * inv_d, w1)]
    })
    .with_second(move |q| {
        let (cu, su, cv, sv) = (q[0].cos(), q[0].sin(), q[1].cos(), q[1].sin());
        let d = s2 + sv;
        let inv_d1 = -cv / (d * d);
        let inv_d2 = (2.0 * cv * cv + d * sv) / d.powi(3);
        let w2 = (-s2 * cv * d + 2.0 * (s2 * sv + 1.0) * cv) / d.powi(3);
        [Vec3::new(-cu / d, -su / d, 0.0), Vec3::new(-su * inv_d1, cu * inv_d1, 0.0), Vec3::new(cu * inv_d2, su * inv_d2, w2)]
    })
}

/// Graph `z = c·uv` over `[−a, a]²` with analytic partials.
pub fn saddle_graph(c: f64, a: f64) -> SurfacePatch {
    SurfacePatch::new(format!("saddle({c})"), ChartBox::new([-a, -a], [a, a]), move |q| Vec3::new(q[0], q[1], c * q[0] * q[1]))
        .with_first(move |q| [Vec3::new(1.0, 0.0, c * q[1]), Vec3::new(0.0, 1.0, c * q[0])])
        .with_second(move |_| [Vec3::zeros(), Vec3::new(0.0, 0.0, c), Vec3::zeros()])
}

/// The saddle `z = uv` over `[−1, 1]²`.
pub fn saddle() -> SurfacePatch {
    saddle_graph(1.0, 1.0).renamed("saddle")
}

/// Round sphere of radius `ρ`, colatitude `u` and longitude `v`.
pub fn round_sphere(rho: f64) -> SurfacePatch {
    SurfacePatch::new(format!("sphere({rho})"), ChartBox::new([0.05, -7.0], [std::f64::consts::PI - 0.05, 7.0]), move |q| {
        Vec3::new(q[0].sin() * q[1].cos(), q[0].sin() * q[1].sin(), q[0].cos()) * rho
    })
    .with_first(move |q| {
        let (cu, su, cv, sv) = (q[0].cos(), q[0].sin(), q[1].cos(), q[1].sin());
        [Vec3::new(cu * cv, cu * sv, -su) * rho, Vec3::new(-su * sv, su * cv, 0.0) * rho]
    })
    .with_second(move |q| {
        let (cu, su, cv, sv) = (q[0].cos(), q[0].sin(), q[1].cos(), q[1].sin());
        [Vec3::new(-su * cv, -su * sv, -cu) * rho, Vec3::new(-cu * sv, cu * cv, 0.0) * rho, Vec3::new(-su * cv, -su * sv, 0.0) * rho]
    })
}

/// Pseudosphere `a(sech u cos v, sech u sin v, u − tanh u)`, curvature `−1/a²`.
pub fn pseudosphere(a: f64) -> SurfacePatch {
    SurfacePatch::new(format!("pseudosphere({a})"), ChartBox::new([0.2, -4.0], [3.0, 4.0]), move |q| {
        let s = 1.0 / q[0].cosh();
        Vec3::new(s * q[1].cos(), s * q[1].sin(), q[0] - q[0].tanh()) * a
    })
    .with_first(move |q| {
        let (s, t) = (1.0 / q[0].cosh(), q[0].tanh());
        let (cv, sv) = (q[1].cos(), q[1].sin());
        [Vec3::new(-s * t * cv, -s * t * sv, t * t) * a, Vec3::new(-s * sv, s * cv, 0.0) * a]
    })
    .with_second(move |q| {
        let (s, t) = (1.0 / q[0].cosh(), q[0].tanh());
        let (cv, sv) = (q[1].cos(), q[1].sin());
        let s2 = s * (t * t - s * s);
        [
            Vec3::new(s2 * cv, s2 * sv, 2.0 * t * s * s) * a,
            Vec3::new(s * t * sv, -s * t * cv, 0.0) * a,
            Vec3::new(-s * cv, -s * sv, 0.0) * a,
        ]
    })
}

/// Surface of constant curvature `K` in Euclidean space: a scaled
/// pseudosphere for `K < 0`, a round sphere for `K > 0`, a plane for `K = 0`.
pub fn constant_k_surface(k: f64) -> Result<SurfacePatch> {
    if !k.is_finite() {
        return Err(Error::ParameterOutOfRange(format!("K must be finite, got {k}")));
    }
    let p = if k < 0.0 {
        pseudosphere(1.0 / (-k).sqrt())
    } else if k > 0.0 {
        round_sphere(1.0 / k.sqrt())
    } else {
        SurfacePatch::new("plane", ChartBox::new([-5.0, -5.0], [5.0, 5.0]), |q| Vec3::new(q[0], q[1], 0.0))
            .with_first(|_| [Vec3::x(), Vec3::y()])
            .with_second(|_| [Vec3::zeros(); 3])
    };
    Ok(p.renamed(&format!("constant_k_surface({k})")))
}

/// The totally non-umbilic slice `z = 0` of `g_λ`, isometric to `H²`.
pub fn g_lambda_slice(lambda: f64, z_max: f64) -> Result<(SurfacePatch, MetricField)> {
    let m = g_lambda(lambda, z_max)?;
    let p = SurfacePatch::new("g_lambda_slice", ChartBox::new([-1.9, -1.9], [1.9, 1.9]), |q| Vec3::new(q[0], q[1], 0.0))
        .with_first(|_| [Vec3::x(), Vec3::y()])
        .with_second(|_| [Vec3::zeros(); 3]);
    Ok((p, m))
}

trait Renamed {
    fn renamed(self, name: &str) -> Self;
}

impl Renamed for SurfacePatch {
    fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }
}

// ---------------------------------------------------------- example cases

pub const EXAMPLE_NAMES: [&str; 8] =
    ["euclidean3", "sphere3", "hyperbolic3", "g_lambda", "hyperbolic_deformed", "clifford_torus", "saddle", "constant_k_surface"];

/// 2D connections usable by name from the command line.
pub const CONNECTION_NAMES: [&str; 11] = [
    "flat2",
    "sphere2",
    "sphere_polar",
    "hyperbolic2",
    "hyperbolic_polar",
    "hyperbolic_deformed",
    "saddle",
    "clifford_torus",
    "constant_k_surface",
    "g_lambda",
    "pseudosphere",
];

#[derive(Clone, Debug)]
pub enum ExampleObject {
    Metric(MetricField),
    Immersion(SurfacePatch, MetricField),
    Connection(SurfaceConnectionData),
}

#[derive(Clone, Debug)]
pub struct ExampleCase {
    pub name: String,
    pub parameters: Params,
    pub object: ExampleObject,
}

/// Builds a gallery example. Parameters: `lambda`, `zmax` for `g_lambda`;
/// `t` for `hyperbolic_deformed`; `k` for `constant_k_surface`.
pub fn build_example(name: &str, parameters: &Params) -> Result<ExampleCase> {
    let object = match name {
        "euclidean3" | "sphere3" | "hyperbolic3" => {
            reject_unknown(parameters, &[])?;
            ExampleObject::Metric(match name {
                "euclidean3" => euclidean3(),
                "sphere3" => sphere3(),
                _ => hyperbolic3(),
            })
        }
        "g_lambda" => {
            reject_unknown(parameters, &["lambda", "zmax"])?;
            let l = param(parameters, "lambda", 1.0);
            ExampleObject::Metric(g_lambda(l, param(parameters, "zmax", g_lambda_default_z(l)))?)
        }
        "hyperbolic_deformed" => {
            reject_unknown(parameters, &["t"])?;
            ExampleObject::Connection(hyperbolic_deformed(param(parameters, "t", 2.0))?)
        }
        "clifford_torus" => {
            reject_unknown(parameters, &[])?;
            ExampleObject::Immersion(clifford_torus(), sphere3())
        }
        "saddle" => {
            reject_unknown(parameters, &[])?;
            ExampleObject::Immersion(saddle(), euclidean3())
        }
        "constant_k_surface" => {
            reject_unknown(parameters, &["k"])?;
            ExampleObject::Immersion(constant_k_surface(param(parameters, "k", -1.0))?, euclidean3())
        }
        _ => return Err(Error::Config(format!("unknown example '{name}' (known: {})", EXAMPLE_NAMES.join(", ")))),
    };
    Ok(ExampleCase { name: name.to_string(), parameters: parameters.clone(), object })
}

/// A connection by name, for the trace commands.
pub fn connection_by_name(name: &str, parameters: &Params) -> Result<SurfaceConnectionData> {
    Ok(match name {
        "flat2" => SurfaceConnectionData::levi_civita(flat2()),
        "sphere2" => SurfaceConnectionData::levi_civita(sphere2()),
        "sphere_polar" => SurfaceConnectionData::levi_civita(sphere_polar()),
        "hyperbolic2" => SurfaceConnectionData::levi_civita(hyperbolic2()),
        "hyperbolic_polar" => SurfaceConnectionData::levi_civita(hyperbolic_polar()),
        "hyperbolic_deformed" => {
            reject_unknown(parameters, &["t"])?;
            return hyperbolic_deformed(param(parameters, "t", 2.0));
        }
        "saddle" => SurfaceConnectionData::immersion(saddle(), euclidean3()),
        "clifford_torus" => SurfaceConnectionData::immersion(clifford_torus(), sphere3()),
        "pseudosphere" => SurfaceConnectionData::immersion(pseudosphere(1.0), euclidean3()),
        "constant_k_surface" => {
            reject_unknown(parameters, &["k"])?;
            return Ok(SurfaceConnectionData::immersion(constant_k_surface(param(parameters, "k", -1.0))?, euclidean3()));
        }
        "g_lambda" => {
            reject_unknown(parameters, &["lambda"])?;
            let l = param(parameters, "lambda", 1.0);
            let (p, m) = g_lambda_slice(l, g_lambda_default_z(l))?;
            return Ok(SurfaceConnectionData::immersion(p, m));
        }
        _ => return Err(Error::Config(format!("unknown connection '{name}' (known: {})", CONNECTION_NAMES.join(", ")))),
    }
    .named(name))
}

// -------------------------------------------------------- verification

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldReport {
    pub name: String,
    pub max_abs_err: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl FieldReport {
    pub fn new(name: impl Into<String>, max_abs_err: f64, tolerance: f64) -> Self {
        FieldReport { name: name.into(), max_abs_err, tolerance, pass: max_abs_err < tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub example: String,
    pub parameters: Params,
    pub fields: Vec<FieldReport>,
}

impl VerificationReport {
    pub fn pass(&self) -> bool {
        self.fields.iter().all(|f| f.pass)
    }
}

/// Scales every tolerance of a verification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceProfile {
    pub scale: f64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        ToleranceProfile { scale: 1.0 }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Index-ordered max over a parallel map; errors become `NaN`, which fail.
fn par_max<T: Sync>(items: &[T], f: impl Fn(&T) -> Result<f64> + Sync + Send) -> f64 {
    let vals: Vec<f64> = items.par_iter().map(|x| f(x).unwrap_or(f64::NAN)).collect();
    vals.into_iter().fold(0.0, |a, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) })
}

/// Max deviation of the six `g_λ` entries from their closed forms on an
/// `nx × ny × nz` grid of `|x|, |y| ≤ 1`, `|z| ≤ z_half`.
pub fn g_lambda_entry_errors(lambda: f64, z_half: f64, n: [usize; 3]) -> Result<[f64; 6]> {
    let metric = g_lambda(lambda, (z_half + 0.01).max(g_lambda_default_z(lambda)).min(0.49 / lambda.max(1e-9)))?.finite_difference_only();
    let mut pts = Vec::new();
    for &x in &linspace(-1.0, 1.0, n[0]) {
        for &y in &linspace(-1.0, 1.0, n[1]) {
            for &z in &linspace(-z_half, z_half, n[2]) {
                pts.push([x, y, z]);
            }
        }
    }
    let errs: Vec<[f64; 6]> = pts
        .par_iter()
        .map(|p| {
            let r = g_lambda_reference(lambda, p[1]);
            match g_lambda_entries(&metric, p) {
                Ok(e) => std::array::from_fn(|i| (e[i] - r[i]).abs()),
                Err(_) => [f64::NAN; 6],
            }
        })
        .collect();
    let mut out = [0.0f64; 6];
    for e in errs {
        for i in 0..6 {
            out[i] = if e[i].is_nan() || out[i].is_nan() { f64::NAN } else { out[i].max(e[i]) };
        }
    }
    Ok(out)
}

pub const G_LAMBDA_ENTRY_NAMES: [&str; 6] = ["K(e1,e2)", "K(e1,e3)", "K(e2,e3)", "R(e1,e2,e1,e3)", "R(e2,e1,e2,e3)", "R(e3,e1,e3,e2)"];

fn grid2(domain_lo: [f64; 2], domain_hi: [f64; 2], n: usize) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for &u in &linspace(domain_lo[0], domain_hi[0], n) {
        for &v in &linspace(domain_lo[1], domain_hi[1], n) {
            out.push([u, v]);
        }
    }
    out
}

/// Max torsion norm and dual Codazzi residual of `∇̃` over a sample grid.
pub fn space_form_errors(data: &SurfaceConnectionData, lo: [f64; 2], hi: [f64; 2], n: usize) -> (f64, f64) {
    let pts = grid2(lo, hi, n);
    let t = par_max(&pts, |q| data.torsion_norm(q));
    let c = par_max(&pts, |q| data.dual_codazzi_residual(q, &Vec2::x(), &Vec2::y()));
    (t, c)
}

/// Gallery surfaces placed in each constant-curvature ambient, with the
/// parameter box used for sampling.
pub fn space_form_surfaces() -> Vec<(String, SurfaceConnectionData, [f64; 2], [f64; 2])> {
    vec![
        ("sphere in euclidean3".into(), SurfaceConnectionData::immersion(round_sphere(1.0), euclidean3()), [0.5, -2.0], [2.6, 2.0]),
        ("pseudosphere in euclidean3".into(), SurfaceConnectionData::immersion(pseudosphere(1.0), euclidean3()), [0.4, -2.0], [2.5, 2.0]),
        ("saddle in euclidean3".into(), SurfaceConnectionData::immersion(saddle(), euclidean3()), [-0.8, -0.8], [0.8, 0.8]),
        ("clifford_torus in sphere3".into(), SurfaceConnectionData::immersion(clifford_torus(), sphere3()), [-3.0, -3.0], [3.0, 3.0]),
        ("saddle in sphere3".into(), SurfaceConnectionData::immersion(saddle_graph(1.0, 0.5), sphere3()), [-0.4, -0.4], [0.4, 0.4]),
        ("saddle in hyperbolic3".into(), SurfaceConnectionData::immersion(saddle_graph(1.0, 0.3), hyperbolic3()), [-0.25, -0.25], [0.25, 0.25]),
    ]
}

/// Runs the numerical pipeline on an example and compares with its
/// closed-form reference fields.
pub fn verify_example(name: &str, parameters: &Params, profile: ToleranceProfile) -> Result<VerificationReport> {
    let case = build_example(name, parameters)?;
    let tol = |t: f64| t * profile.scale;
    let mut fields = Vec::new();
    match name {
        "g_lambda" => {
            let l = param(parameters, "lambda", 1.0);
            // the printed entries hold on the slice z = 0; zmax widens the grid
            let z_half = parameters.get("zmax").copied().unwrap_or(0.0);
            let nz = if z_half > 0.0 { 3 } else { 1 };
            let errs = g_lambda_entry_errors(l, z_half, [11, 11, nz])?;
            for (n, e) in G_LAMBDA_ENTRY_NAMES.iter().zip(errs) {
                fields.push(FieldReport::new(*n, e, tol(1e-3)));
            }
        }
        "hyperbolic_deformed" => {
            let t = param(parameters, "t", 2.0);
            let data = hyperbolic_deformed(t)?;
            let rs = linspace(0.1, 3.0, 100);
            let pts: Vec<[f64; 2]> = rs.iter().map(|&r| [r, 0.3]).collect();
            fields.push(FieldReport::new("torsion norm = t", par_max(&pts, |q| Ok((data.torsion_norm(q)? - t).abs())), tol(1e-8)));
            fields.push(FieldReport::new(
                "K via -d(omega) = t*coth(r) - 1",
                par_max(&pts, |q| Ok((data.ktilde_via_frame(q)? - deformed_curvature(t, q[0])).abs())),
                tol(1e-5),
            ));
            fields.push(FieldReport::new(
                "K via -d(omega) = t*tanh(r) - 1 (printed)",
                par_max(&pts, |q| Ok((data.ktilde_via_frame(q)? - deformed_curvature_printed(t, q[0])).abs())),
                tol(1e-5),
            ));
        }
        "clifford_torus" => {
            let (p, m) = (clifford_torus(), sphere3());
            let pts = grid2([-3.0, -3.0], [3.0, 3.0], 7);
            let fd = |q: &[f64; 2]| p.fundamental_forms(&m, q);
            fields.push(FieldReport::new("K_I = 0", par_max(&pts, |q| Ok(fd(q)?.k_i.abs())), tol(1e-8)));
            fields.push(FieldReport::new("det B = -1", par_max(&pts, |q| Ok((fd(q)?.shape.determinant() + 1.0).abs())), tol(1e-8)));
            fields.push(FieldReport::new("K_e = -1", par_max(&pts, |q| Ok((fd(q)?.k_e + 1.0).abs())), tol(1e-8)));
            fields.push(FieldReport::new("III = I", par_max(&pts, |q| {
                let d = fd(q)?;
                Ok((d.third - d.first).abs().max())
            }), tol(1e-8)));
            fields.push(FieldReport::new("gauss residual", par_max(&pts, |q| crate::immersion::gauss_residual(&p, &m, q)), tol(1e-8)));
            fields.push(FieldReport::new(
                "codazzi residual",
                par_max(&pts, |q| crate::immersion::codazzi_residual(&p, &m, q, &Vec2::x(), &Vec2::y())),
                tol(1e-6),
            ));
        }
        "euclidean3" | "sphere3" | "hyperbolic3" => {
            let (metric, k) = match &case.object {
                ExampleObject::Metric(m) => (m.clone(), match name {
                    "euclidean3" => 0.0,
                    "sphere3" => 1.0,
                    _ => -1.0,
                }),
                _ => unreachable!(),
            };
            let pts: Vec<[f64; 3]> = grid2([-0.4, -0.4], [0.4, 0.4], 5).into_iter().flat_map(|q| [[q[0], q[1], -0.2], [q[0], q[1], 0.3]]).collect();
            fields.push(FieldReport::new("sectional range = (K, K)", par_max(&pts, |p| {
                let (a, b) = ambient::sectional_range(&metric, &(*p).into())?;
                Ok((a - k).abs().max((b - k).abs()))
            }), tol(1e-6)));
            for (label, data, lo, hi) in space_form_surfaces() {
                if !label.ends_with(name) {
                    continue;
                }
                let (t, c) = space_form_errors(&data, lo, hi, 5);
                fields.push(FieldReport::new(format!("torsion ({label})"), t, tol(1e-6)));
                fields.push(FieldReport::new(format!("dual codazzi ({label})"), c, tol(1e-6)));
            }
        }
        "saddle" => {
            let data = SurfaceConnectionData::immersion(saddle(), euclidean3());
            let d = saddle().fundamental_forms(&euclidean3(), &[0.0, 0.0])?;
            fields.push(FieldReport::new("det B = -1 at origin", (d.shape.determinant() + 1.0).abs(), tol(1e-6)));
            fields.push(FieldReport::new("K_I = -1 at origin", (d.k_i + 1.0).abs(), tol(1e-6)));
            fields.push(FieldReport::new("K~ = 1 at origin", (data.ktilde(&[0.0, 0.0])? - 1.0).abs(), tol(1e-6)));
            let f = crate::asymptotics::asymptotic_frame(&data, &[0.0, 0.0])?;
            fields.push(FieldReport::new("theta = pi/2 at origin", (f.theta - std::f64::consts::FRAC_PI_2).abs(), tol(1e-6)));
            fields.push(FieldReport::new("k = 1 at origin", (f.k - 1.0).abs(), tol(1e-6)));
        }
        "constant_k_surface" => {
            let k = param(parameters, "k", -1.0);
            let p = constant_k_surface(k)?;
            let (lo, hi) = (p.domain.lo, p.domain.hi);
            let pad = |i: usize| 0.1 * (hi[i] - lo[i]);
            let pts = grid2([lo[0] + pad(0), lo[1] + pad(1)], [hi[0] - pad(0), hi[1] - pad(1)], 6);
            let m = euclidean3();
            fields.push(FieldReport::new("K_I = K", par_max(&pts, |q| Ok((p.fundamental_forms(&m, q)?.k_i - k).abs())), tol(1e-6)));
            fields.push(FieldReport::new("gauss residual", par_max(&pts, |q| crate::immersion::gauss_residual(&p, &m, q)), tol(1e-6)));
        }
        _ => unreachable!("build_example validated the name"),
    }
    Ok(VerificationReport { example: name.to_string(), parameters: parameters.clone(), fields })
}

// ------------------------------------------------- virtual third form

/// Residuals of the virtual third form construction, each a max over the
/// sample points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirtualReport {
    /// `|‖τ̃‖_III − ‖τ‖_σ / b|`
    pub torsion_identity: f64,
    /// `|K̃ − (−K_σ / b)|`, with `K̃` from the connection form of `∇̃`.
    pub curvature_identity: f64,
    /// `|det H + b|`
    pub determinant: f64,
    /// `‖d^∇H(∂_u, ∂_v) − τ ν_σ(∂_u, ∂_v)‖_σ`
    pub system: f64,
    /// `sup ‖τ‖_σ`
    pub tau_sup: f64,
}

/// `(d^∇H)(∂_u, ∂_v)` for the Levi-Civita connection of `σ`.
pub fn exterior_derivative(sigma: &SurfaceMetric, h: &(dyn Fn(&[f64; 2]) -> Mat2 + Sync), q: &[f64; 2]) -> Result<Vec2> {
    let gam = sigma.christoffel(q)?;
    let dh = jet::gradient(&|p: &[f64; 2]| h(p), q, sigma.h);
    let hq = h(q);
    let mut out = dh[0].column(1) - dh[1].column(0);
    let hv = hq.column(1).into_owned();
    let hu = hq.column(0).into_owned();
    for k in 0..2 {
        for c in 0..2 {
            out[k] += gam[k][0][c] * hv[c] - gam[k][1][c] * hu[c];
        }
    }
    Ok(out)
}

/// Builds `III = σ(H·, H·)` and `∇̃ = H⁻¹ ∇ H` from a candidate solution
/// `(H, b, τ)` of `det H = −b`, `d^∇H = τ ⊗ ν_σ`, and checks the identities
/// `K̃ = −K_σ/b`, `‖τ̃‖_III = ‖τ‖_σ/b` at the sample points.
pub fn virtual_third_form(
    sigma: SurfaceMetric,
    h: impl Fn(&[f64; 2]) -> Mat2 + Send + Sync + Clone + 'static,
    b: impl Fn(&[f64; 2]) -> f64 + Send + Sync,
    tau: impl Fn(&[f64; 2]) -> Vec2 + Send + Sync,
    samples: &[[f64; 2]],
) -> Result<(SurfaceConnectionData, VirtualReport)> {
    for q in samples {
        let det = h(q).determinant();
        if !(det < 0.0) {
            return Err(Error::WrongSignDeterminant { point: q.to_vec(), det });
        }
    }
    let data = SurfaceConnectionData::conjugate(sigma.clone(), h.clone()).named("virtual_third_form");
    let mut rep = VirtualReport { torsion_identity: 0.0, curvature_identity: 0.0, determinant: 0.0, system: 0.0, tau_sup: 0.0 };
    let rows: Vec<Result<[f64; 5]>> = samples
        .par_iter()
        .map(|q| {
            let s = sigma.metric(q)?;
            let bq = b(q);
            let tq = tau(q);
            let tnorm = connection::norm(&s, &tq);
            let tt = data.torsion_from_coefficients(q)?;
            let m3 = data.metric3(q)?;
            let e1 = (connection::norm(&m3, &tt) - tnorm / bq).abs();
            let kt = data.ktilde_via_frame(q)?;
            let e2 = (kt + sigma.curvature(q)? / bq).abs();
            let e3 = (h(q).determinant() + bq).abs();
            let d = exterior_derivative(&sigma, &h, q)? - tq * s.determinant().sqrt();
            let e4 = connection::norm(&s, &d);
            Ok([e1, e2, e3, e4, tnorm])
        })
        .collect();
    for r in rows {
        let r = r?;
        rep.torsion_identity = rep.torsion_identity.max(r[0]);
        rep.curvature_identity = rep.curvature_identity.max(r[1]);
        rep.determinant = rep.determinant.max(r[2]);
        rep.system = rep.system.max(r[3]);
        rep.tau_sup = rep.tau_sup.max(r[4]);
    }
    Ok((data, rep))
}

/// `b_M τ₀² < 4 ε₀ b_m²`.
pub fn monge_ampere_hypothesis(b_min: f64, b_max: f64, tau0: f64, eps0: f64) -> bool {
    b_max * tau0 * tau0 < 4.0 * eps0 * b_min * b_min
}

/// A smooth `σ`-self-adjoint field on a conformal metric with
/// `det H = −1`: a rotated `diag(a, −1/a)` with `a`, rotation angle given.
pub fn unimodular_hyperbolic_field(
    a: impl Fn(&[f64; 2]) -> f64 + Send + Sync + Clone + 'static,
    angle: impl Fn(&[f64; 2]) -> f64 + Send + Sync + Clone + 'static,
) -> impl Fn(&[f64; 2]) -> Mat2 + Send + Sync + Clone + 'static {
    move |q| {
        let (c, s) = (angle(q).cos(), angle(q).sin());
        let r = Mat2::new(c, -s, s, c);
        let av = a(q);
        r * Mat2::new(av, 0.0, 0.0, -1.0 / av) * r.transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_lambda_zero_is_hyperbolic() {
        let m = g_lambda(0.0, 0.2).unwrap();
        for p in [[0.0, 0.0, 0.0], [0.3, -1.2, 0.1], [1.0, 1.5, -0.15]] {
            let (a, b) = ambient::sectional_range(&m, &p.into()).unwrap();
            assert!((a + 1.0).abs() < 1e-5 && (b + 1.0).abs() < 1e-5, "{a} {b}");
        }
    }

    #[test]
    fn g_lambda_analytic_matches_fd() {
        let m = g_lambda(1.0, 0.2).unwrap();
        let fd = m.finite_difference_only();
        let p = [0.2, 0.7, 0.05];
        let a = m.riemann(&p).unwrap();
        let b = fd.riemann(&p).unwrap();
        let d = (0..81).map(|n| (a[n / 27][(n / 9) % 3][(n / 3) % 3][n % 3] - b[n / 27][(n / 9) % 3][(n / 3) % 3][n % 3]).abs()).fold(0.0, f64::max);
        assert!(d < 1e-6, "{d}");
    }

    #[test]
    fn g_lambda_slice_entries() {
        let m = g_lambda(1.0, 0.2).unwrap();
        for y in [-1.0, 0.0, 0.4, 1.0] {
            let e = g_lambda_entries(&m, &[0.3, y, 0.0]).unwrap();
            let r = g_lambda_reference(1.0, y);
            for i in 0..6 {
                assert!((e[i] - r[i]).abs() < 1e-8, "entry {i} at y={y}: {} vs {}", e[i], r[i]);
            }
        }
        let (lo, hi) = ambient::sectional_range(&m, &[0.0, 1.0, 0.0].into()).unwrap();
        assert!((lo + 2.0 * 1f64.tanh()).abs() < 1e-6 && (hi - 2.0 * 1f64.tanh()).abs() < 1e-6);
    }

    #[test]
    fn g_lambda_box_check() {
        assert!(g_lambda(3.0, 0.1).is_ok());
        assert!(matches!(g_lambda(3.0, 0.2), Err(Error::ParameterOutOfRange(_))));
        assert!(matches!(g_lambda(-1.0, 0.1), Err(Error::ParameterOutOfRange(_))));
    }

    #[test]
    fn space_form_metrics() {
        for (m, k) in [(sphere3(), 1.0), (hyperbolic3(), -1.0)] {
            let (a, b) = ambient::sectional_range(&m, &[0.1, -0.2, 0.3].into()).unwrap();
            assert!((a - k).abs() < 1e-9 && (b - k).abs() < 1e-9, "{a} {b}");
        }
    }

    #[test]
    fn clifford_torus_is_flat_with_det_minus_one() {
        let d = clifford_torus().fundamental_forms(&sphere3(), &[0.4, 1.3]).unwrap();
        assert!(d.k_i.abs() < 1e-8, "{}", d.k_i);
        assert!((d.shape.determinant() + 1.0).abs() < 1e-8);
        assert!((d.k_ambient - 1.0).abs() < 1e-9);
        assert!((d.first - Mat2::identity() * 0.5).abs().max() < 1e-12);
    }

    #[test]
    fn analytic_partials_match_differences() {
        for p in [clifford_torus(), pseudosphere(1.3), round_sphere(2.0)] {
            let q = [0.7, 0.4];
            let a = p.tangents(&q);
            let b = p.finite_difference_only().tangents(&q);
            let c = p.second_partials(&q);
            let d = p.finite_difference_only().second_partials(&q);
            for i in 0..2 {
                assert!((a[i] - b[i]).norm() < 1e-9, "{}", p.name);
            }
            for i in 0..3 {
                assert!((c[i] - d[i]).norm() < 1e-6, "{} {i}", p.name);
            }
        }
    }

    #[test]
    fn constant_k_values() {
        let m = euclidean3();
        for k in [-1.0, -4.0, 0.25] {
            let p = constant_k_surface(k).unwrap();
            let d = p.fundamental_forms(&m, &[1.0, 0.3]).unwrap();
            assert!((d.k_i - k).abs() < 1e-6, "{k}: {}", d.k_i);
        }
    }

    #[test]
    fn deformed_connection_fields() {
        let c = hyperbolic_deformed(2.0).unwrap();
        let q = [1.0, 0.0];
        assert!((c.torsion_norm(&q).unwrap() - 2.0).abs() < 1e-12);
        let k = c.ktilde_via_frame(&q).unwrap();
        assert!((k - deformed_curvature(2.0, 1.0)).abs() < 1e-6, "{k}");
        assert!((deformed_curvature_printed(2.0, 1.0) - 0.523188).abs() < 1e-6);
    }

    #[test]
    fn virtual_form_identity_case() {
        let h = |_: &[f64; 2]| Mat2::new(1.0, 0.0, 0.0, -1.0);
        let sigma = hyperbolic2();
        let pts = [[0.1, 0.2], [-0.3, 0.1]];
        // H = diag(1, -1) is not parallel on the disk, so τ is read off d^∇H
        let s2 = sigma.clone();
        let tau = move |q: &[f64; 2]| exterior_derivative(&s2, &h, q).unwrap() / s2.raw(q).determinant().sqrt();
        let (_, rep) = virtual_third_form(sigma, h, |_| 1.0, tau, &pts).unwrap();
        assert!(rep.determinant < 1e-12 && rep.system < 1e-9);
        assert!(rep.curvature_identity < 1e-6, "{rep:?}");
        assert!(rep.torsion_identity < 1e-8, "{rep:?}");
    }

    #[test]
    fn virtual_form_rejects_positive_det() {
        let r = virtual_third_form(hyperbolic2(), |_| Mat2::identity(), |_| 1.0, |_| Vec2::zeros(), &[[0.0, 0.0]]);
        assert!(matches!(r, Err(Error::WrongSignDeterminant { .. })));
    }
}
