//! Curves for an `III`-compatible connection `∇̃` with torsion: geodesics,
//! parallel transport, geodesic curvature, Jacobi-type fields, Gauss–Bonnet
//! and the normal-deformation rate of `κ`.

use crate::connection::{self, contract, inner, norm, SurfaceConnectionData};
use crate::error::{Error, Result};
use crate::immersion::{Mat2, Vec2};
use gauss_quad::legendre::GaussLegendre;
use nalgebra::SVector;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

pub type State<const N: usize> = SVector<f64, N>;

/// One classical fourth-order Runge–Kutta step.
pub fn rk4_step<const N: usize>(f: &impl Fn(&State<N>) -> Result<State<N>>, y: &State<N>, h: f64) -> Result<State<N>> {
    let k1 = f(y)?;
    let k2 = f(&(y + k1 * (0.5 * h)))?;
    let k3 = f(&(y + k2 * (0.5 * h)))?;
    let k4 = f(&(y + k3 * h))?;
    Ok(y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

/// Signed `III`-angle from `a` to `b`, positive in the direction of `J`.
pub fn signed_angle(m: &Mat2, a: &Vec2, b: &Vec2) -> f64 {
    let j = connection::rotation(m);
    inner(m, &(j * a), b).atan2(inner(m, a, b))
}

fn wrap(a: f64) -> f64 {
    let t = (a + PI).rem_euclid(2.0 * PI) - PI;
    if t <= -PI {
        t + 2.0 * PI
    } else {
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub s: f64,
    pub q: [f64; 2],
    pub velocity: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveTrace {
    pub samples: Vec<CurveSample>,
    pub step: f64,
    pub length: f64,
    pub closed: bool,
    pub left_patch: Option<f64>,
}

impl CurveTrace {
    pub fn require_complete(self) -> Result<Self> {
        match self.left_patch {
            Some(s) => Err(Error::LeftPatch { s }),
            None => Ok(self),
        }
    }

    pub fn start(&self) -> [f64; 2] {
        self.samples[0].q
    }

    pub fn end(&self) -> [f64; 2] {
        self.samples.last().expect("trace has a sample").q
    }

    /// Position and velocity at the midpoint of interval `i`, by cubic
    /// Hermite interpolation.
    fn midpoint(&self, i: usize) -> ([f64; 2], Vec2) {
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        let h = b.s - a.s;
        let (pa, pb) = (Vec2::from(a.q), Vec2::from(b.q));
        let p = (pa + pb) * 0.5 + (a.velocity - b.velocity) * (h / 8.0);
        let v = (pb - pa) * (1.5 / h) - (a.velocity + b.velocity) * 0.25;
        ([p[0], p[1]], v)
    }

    /// Largest deviation of `‖c'‖_III` from one.
    pub fn speed_drift(&self, data: &SurfaceConnectionData) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for s in &self.samples {
            worst = worst.max((norm(&data.metric3(&s.q)?, &s.velocity) - 1.0).abs());
        }
        Ok(worst)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["s", "u", "v", "du", "dv"])?;
        for s in &self.samples {
            out.write_record([s.s, s.q[0], s.q[1], s.velocity[0], s.velocity[1]].map(crate::report::fmt_f64))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Solves `∇̃_{c'} c' = 0` from `q` with `III`-unit initial velocity `v`.
pub fn integrate_geodesic(data: &SurfaceConnectionData, q: &[f64; 2], v: &Vec2, length: f64, step: f64) -> Result<CurveTrace> {
    if !(step > 0.0) || !(length >= 0.0) {
        return Err(Error::ParameterOutOfRange(format!("need step > 0 and length >= 0, got {step}, {length}")));
    }
    data.domain().check(q, data.margin())?;
    let speed = norm(&data.metric3(q)?, v);
    if (speed - 1.0).abs() > 1e-9 {
        return Err(Error::ParameterOutOfRange(format!("initial velocity has III-norm {speed}, expected 1")));
    }
    let rhs = |y: &State<4>| -> Result<State<4>> {
        let p = [y[0], y[1]];
        if !data.contains(&p) {
            return Err(Error::LeftPatch { s: 0.0 });
        }
        let w = Vec2::new(y[2], y[3]);
        let a = -contract(&data.coefficients(&p)?, &w, &w);
        Ok(State::from([w[0], w[1], a[0], a[1]]))
    };
    let mut y = State::from([q[0], q[1], v[0], v[1]]);
    let mut samples = vec![CurveSample { s: 0.0, q: *q, velocity: *v }];
    let n = (length / step).ceil() as usize;
    let mut left = None;
    let mut s = 0.0;
    for i in 0..n {
        let h = (length - i as f64 * step).min(step);
        match rk4_step(&rhs, &y, h) {
            Ok(next) if data.contains(&[next[0], next[1]]) => y = next,
            Ok(_) | Err(Error::LeftPatch { .. }) | Err(Error::PointOutsideChart { .. }) => {
                left = Some(s);
                break;
            }
            Err(e) => return Err(e),
        }
        s += h;
        samples.push(CurveSample { s, q: [y[0], y[1]], velocity: Vec2::new(y[2], y[3]) });
    }
    let (a, b) = (samples[0].q, samples.last().unwrap().q);
    let closed = length > 0.0 && ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt() < 1e-6;
    Ok(CurveTrace { length: s, samples, step, closed, left_patch: left })
}

/// Transports `w` along the whole trace.
pub fn parallel_transport(data: &SurfaceConnectionData, trace: &CurveTrace, w: &Vec2) -> Result<Vec2> {
    Ok(*transport_samples(data, trace, w)?.last().expect("trace has a sample"))
}

/// The transported vector at every sample of the trace.
pub fn transport_samples(data: &SurfaceConnectionData, trace: &CurveTrace, w: &Vec2) -> Result<Vec<Vec2>> {
    let mut out = Vec::with_capacity(trace.samples.len());
    let mut cur = *w;
    out.push(cur);
    for i in 0..trace.samples.len() - 1 {
        let (a, b) = (&trace.samples[i], &trace.samples[i + 1]);
        let h = b.s - a.s;
        let (pm, vm) = trace.midpoint(i);
        let ga = data.coefficients(&a.q)?;
        let gm = data.coefficients(&pm)?;
        let gb = data.coefficients(&b.q)?;
        let k1 = -contract(&ga, &a.velocity, &cur);
        let k2 = -contract(&gm, &vm, &(cur + k1 * (0.5 * h)));
        let k3 = -contract(&gm, &vm, &(cur + k2 * (0.5 * h)));
        let k4 = -contract(&gb, &b.velocity, &(cur + k3 * h));
        cur += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        out.push(cur);
    }
    Ok(out)
}

/// `κ(s) = III(∇̃_{c'} c', J c') / ‖c'‖³` at the sample nearest to `s`.
pub fn geodesic_curvature(data: &SurfaceConnectionData, trace: &CurveTrace, s: f64) -> Result<f64> {
    let n = trace.samples.len();
    let i = trace
        .samples
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1.s - s).abs().total_cmp(&(b.1.s - s).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    if i == 0 || i + 1 >= n {
        return Err(Error::EndpointSample);
    }
    let (a, c, b) = (&trace.samples[i - 1], &trace.samples[i], &trace.samples[i + 1]);
    // second-order derivative on a possibly uneven grid
    let (h1, h2) = (c.s - a.s, b.s - c.s);
    let dv = (b.velocity - c.velocity) * (h1 / (h2 * (h1 + h2))) + (c.velocity - a.velocity) * (h2 / (h1 * (h1 + h2)));
    let acc = dv + contract(&data.coefficients(&c.q)?, &c.velocity, &c.velocity);
    let m = data.metric3(&c.q)?;
    let sp = norm(&m, &c.velocity);
    Ok(inner(&m, &acc, &(connection::rotation(&m) * c.velocity)) / sp.powi(3))
}

/// A boundary piece in chart coordinates, parametrized on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Segment {
    Line { from: [f64; 2], to: [f64; 2] },
    /// Chart circle arc from angle `start` to `end` (radians).
    Arc { center: [f64; 2], radius: f64, start: f64, end: f64 },
}

impl Segment {
    pub fn point(&self, t: f64) -> [f64; 2] {
        match self {
            Segment::Line { from, to } => [from[0] + t * (to[0] - from[0]), from[1] + t * (to[1] - from[1])],
            Segment::Arc { center, radius, start, end } => {
                let a = start + t * (end - start);
                [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
            }
        }
    }

    pub fn velocity(&self, t: f64) -> Vec2 {
        match self {
            Segment::Line { from, to } => Vec2::new(to[0] - from[0], to[1] - from[1]),
            Segment::Arc { radius, start, end, .. } => {
                let a = start + t * (end - start);
                Vec2::new(-a.sin(), a.cos()) * (radius * (end - start))
            }
        }
    }

    pub fn acceleration(&self, t: f64) -> Vec2 {
        match self {
            Segment::Line { .. } => Vec2::zeros(),
            Segment::Arc { radius, start, end, .. } => {
                let a = start + t * (end - start);
                Vec2::new(-a.cos(), -a.sin()) * (radius * (end - start).powi(2))
            }
        }
    }

    /// `κ ‖c'‖` at parameter `t`, so that `∫ κ ds = ∫ (this) dt`.
    pub fn curvature_density(&self, data: &SurfaceConnectionData, t: f64) -> Result<f64> {
        let q = self.point(t);
        let v = self.velocity(t);
        let acc = self.acceleration(t) + contract(&data.coefficients(&q)?, &v, &v);
        let m = data.metric3(&q)?;
        Ok(inner(&m, &acc, &(connection::rotation(&m) * v)) / inner(&m, &v, &v))
    }

    /// Samples the segment as a trace with `n` intervals, velocities
    /// normalised to `III`-unit length and `s` the `III`-arclength.
    pub fn trace(&self, data: &SurfaceConnectionData, n: usize) -> Result<CurveTrace> {
        let n = n.max(2);
        let gl = GaussLegendre::new(4.try_into().expect("nonzero"));
        let mut samples = Vec::with_capacity(n + 1);
        let mut s = 0.0;
        for i in 0..=n {
            let t = i as f64 / n as f64;
            if i > 0 {
                let t0 = (i - 1) as f64 / n as f64;
                let mut err = None;
                s += gl.integrate(t0, t, |x| {
                    let q = self.point(x);
                    match data.metric3(&q) {
                        Ok(m) => norm(&m, &self.velocity(x)),
                        Err(e) => {
                            err = Some(e);
                            0.0
                        }
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
            }
            let q = self.point(t);
            let v = self.velocity(t);
            let m = data.metric3(&q)?;
            samples.push(CurveSample { s, q, velocity: v / norm(&m, &v) });
        }
        Ok(CurveTrace { step: s / n as f64, length: s, closed: false, left_patch: None, samples })
    }
}

/// A star-shaped region: closed boundary, counterclockwise in the chart,
/// and a centre from which every boundary point is visible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub boundary: Vec<Segment>,
    pub center: [f64; 2],
    /// Gauss–Legendre nodes per panel and per radial line.
    #[serde(default = "default_order")]
    pub order: usize,
    /// Equal panels per segment along the boundary.
    #[serde(default = "default_panels")]
    pub panels: usize,
}

fn default_order() -> usize {
    24
}

fn default_panels() -> usize {
    16
}

/// Composite rule over `panels` equal pieces of `[0, 1]`.
fn composite(gl: &GaussLegendre, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let n = panels.max(1);
    (0..n).map(|i| gl.integrate(i as f64 / n as f64, (i + 1) as f64 / n as f64, &mut f)).sum()
}

impl RegionSpec {
    pub fn from_json(text: &str) -> Result<RegionSpec> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn disk(center: [f64; 2], radius: f64) -> RegionSpec {
        RegionSpec {
            boundary: vec![Segment::Arc { center, radius, start: 0.0, end: 2.0 * PI }],
            center,
            order: default_order(),
            panels: default_panels(),
        }
    }

    /// Largest endpoint gap between consecutive segments.
    pub fn gap(&self) -> f64 {
        let n = self.boundary.len();
        (0..n)
            .map(|i| {
                let a = self.boundary[i].point(1.0);
                let b = self.boundary[(i + 1) % n].point(0.0);
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
            })
            .fold(0.0, f64::max)
    }

    fn check(&self) -> Result<()> {
        if self.boundary.is_empty() {
            return Err(Error::OpenBoundary { gap: f64::INFINITY });
        }
        let gap = self.gap();
        if gap > 1e-9 {
            return Err(Error::OpenBoundary { gap });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussBonnetReport {
    pub curvature_integral: f64,
    pub boundary_curvature: f64,
    pub exterior_angles: f64,
    pub residual: f64,
}

fn collect<T>(err: &mut Option<Error>, r: Result<T>, fallback: T) -> T {
    match r {
        Ok(v) => v,
        Err(e) => {
            err.get_or_insert(e);
            fallback
        }
    }
}

/// `∫_D K̃ dv` by polar quadrature from the region centre.
pub fn curvature_integral(data: &SurfaceConnectionData, region: &RegionSpec) -> Result<f64> {
    region.check()?;
    let gl = GaussLegendre::new(region.order.max(2).try_into().expect("nonzero"));
    let c = region.center;
    let mut err = None;
    let mut total = 0.0;
    for seg in &region.boundary {
        total += composite(&gl, region.panels, |t| {
            let b = seg.point(t);
            let db = seg.velocity(t);
            let d = [b[0] - c[0], b[1] - c[1]];
            let jac = d[0] * db[1] - d[1] * db[0];
            gl.integrate(0.0, 1.0, |rho| {
                let q = [c[0] + rho * d[0], c[1] + rho * d[1]];
                let k = collect(&mut err, data.ktilde(&q), 0.0);
                let m = collect(&mut err, data.metric3(&q), Mat2::identity());
                k * m.determinant().sqrt() * rho * jac
            })
        });
    }
    match err {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

pub fn gauss_bonnet(data: &SurfaceConnectionData, region: &RegionSpec) -> Result<GaussBonnetReport> {
    let ki = curvature_integral(data, region)?;
    let gl = GaussLegendre::new(region.order.max(2).try_into().expect("nonzero"));
    let mut err = None;
    let mut bc = 0.0;
    let mut ext = 0.0;
    let n = region.boundary.len();
    for (i, seg) in region.boundary.iter().enumerate() {
        bc += composite(&gl, region.panels, |t| collect(&mut err, seg.curvature_density(data, t), 0.0));
        let next = &region.boundary[(i + 1) % n];
        let q = seg.point(1.0);
        let m = data.metric3(&q)?;
        ext += signed_angle(&m, &seg.velocity(1.0), &next.velocity(0.0));
    }
    if let Some(e) = err {
        return Err(e);
    }
    Ok(GaussBonnetReport {
        curvature_integral: ki,
        boundary_curvature: bc,
        exterior_angles: ext,
        residual: (ki + bc + ext - 2.0 * PI).abs(),
    })
}

/// `|∫_D K̃ dv + ∫_{∂D} κ ds + Σ exterior angles − 2π|`.
pub fn gauss_bonnet_residual(data: &SurfaceConnectionData, region: &RegionSpec) -> Result<f64> {
    Ok(gauss_bonnet(data, region)?.residual)
}

/// Rotation angle of a vector transported once around the boundary, in
/// `(−π, π]`, with `steps` RK4 steps per segment.
pub fn holonomy(data: &SurfaceConnectionData, region: &RegionSpec, steps: usize) -> Result<f64> {
    region.check()?;
    let q0 = region.boundary[0].point(0.0);
    let m0 = data.metric3(&q0)?;
    let w0 = Vec2::new(1.0, 0.0) / m0[(0, 0)].sqrt();
    let mut w = w0;
    for seg in &region.boundary {
        let rhs = |t: f64, w: &Vec2| -> Result<Vec2> {
            let q = seg.point(t);
            Ok(-contract(&data.coefficients(&q)?, &seg.velocity(t), w))
        };
        let h = 1.0 / steps as f64;
        for i in 0..steps {
            let t = i as f64 * h;
            let k1 = rhs(t, &w)?;
            let k2 = rhs(t + 0.5 * h, &(w + k1 * (0.5 * h)))?;
            let k3 = rhs(t + 0.5 * h, &(w + k2 * (0.5 * h)))?;
            let k4 = rhs(t + h, &(w + k3 * h))?;
            w += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
    }
    Ok(signed_angle(&m0, &w0, &w))
}

/// `|holonomy − (∫_D K̃ dv mod 2π)|`, wrapped to `[0, π]`.
pub fn holonomy_defect(data: &SurfaceConnectionData, region: &RegionSpec, steps: usize) -> Result<f64> {
    let h = holonomy(data, region, steps)?;
    let k = curvature_integral(data, region)?;
    Ok(wrap(h - k).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub dx: f64,
    pub dy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacobiTrace {
    pub samples: Vec<JacobiSample>,
    pub ktilde: Vec<f64>,
    pub tau_x: Vec<f64>,
    pub tau_y: Vec<f64>,
}

/// Inputs of the Jacobi system at a parameter value.
pub trait JacobiInputs {
    /// `(K̃, τ_x, τ_y)` at `t`.
    fn at(&self, t: f64) -> Result<(f64, f64, f64)>;
}

impl<F: Fn(f64) -> (f64, f64, f64)> JacobiInputs for F {
    fn at(&self, t: f64) -> Result<(f64, f64, f64)> {
        Ok(self(t))
    }
}

/// Integrates `x' = yτ_x`, `y'' = −K̃y + (yτ_y)'` for `t ∈ [0, length]`.
///
/// Written as a first-order system in `(x, y, w)` with `w = y' − yτ_y`:
/// `x' = yτ_x`, `y' = w + yτ_y`, `w' = −K̃y`.
pub fn jacobi_generic(inputs: &impl JacobiInputs, init: [f64; 4], length: f64, step: f64) -> Result<JacobiTrace> {
    if !(step > 0.0) || !(length >= 0.0) {
        return Err(Error::ParameterOutOfRange(format!("need step > 0 and length >= 0, got {step}, {length}")));
    }
    let [x0, y0, _dx0, dy0] = init;
    let (k0, tx0, ty0) = inputs.at(0.0)?;
    let mut st = State::from([x0, y0, dy0 - y0 * ty0]);
    let n = (length / step).round().max(0.0) as usize;
    let h = if n > 0 { length / n as f64 } else { 0.0 };
    let sample = |t: f64, s: &State<3>, tx: f64, ty: f64| JacobiSample { t, x: s[0], y: s[1], dx: s[1] * tx, dy: s[2] + s[1] * ty };
    let mut out = JacobiTrace { samples: vec![sample(0.0, &st, tx0, ty0)], ktilde: vec![k0], tau_x: vec![tx0], tau_y: vec![ty0] };
    for i in 0..n {
        let t = i as f64 * h;
        let f = |tt: f64, s: &State<3>| -> Result<State<3>> {
            let (k, tx, ty) = inputs.at(tt)?;
            Ok(State::from([s[1] * tx, s[2] + s[1] * ty, -k * s[1]]))
        };
        let k1 = f(t, &st)?;
        let k2 = f(t + 0.5 * h, &(st + k1 * (0.5 * h)))?;
        let k3 = f(t + 0.5 * h, &(st + k2 * (0.5 * h)))?;
        let k4 = f(t + h, &(st + k3 * h))?;
        st += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let (k, tx, ty) = inputs.at(t + h)?;
        out.samples.push(sample(t + h, &st, tx, ty));
        out.ktilde.push(k);
        out.tau_x.push(tx);
        out.tau_y.push(ty);
    }
    Ok(out)
}

struct AlongTrace<'a> {
    data: &'a SurfaceConnectionData,
    trace: &'a CurveTrace,
}

impl JacobiInputs for AlongTrace<'_> {
    fn at(&self, t: f64) -> Result<(f64, f64, f64)> {
        let s = &self.trace.samples;
        let h = self.trace.step;
        let x = t / h;
        let i = x.floor() as usize;
        let frac = x - i as f64;
        let (q, v) = if frac.abs() < 1e-9 || i + 1 >= s.len() {
            let k = (x.round() as usize).min(s.len() - 1);
            (s[k].q, s[k].velocity)
        } else if (frac - 0.5).abs() < 1e-9 {
            self.trace.midpoint(i)
        } else {
            return Err(Error::ParameterOutOfRange("Jacobi step must match the base trace step".into()));
        };
        let m = self.data.metric3(&q)?;
        let tau = self.data.torsion(&q)?;
        let jv = connection::rotation(&m) * v;
        Ok((self.data.ktilde(&q)?, inner(&m, &tau, &v), inner(&m, &tau, &jv)))
    }
}

/// Jacobi-type field along a base geodesic trace, with `K̃`, `τ_x`, `τ_y`
/// read off the connection (`step` equals the trace step).
pub fn jacobi_field(data: &SurfaceConnectionData, base: &CurveTrace, init: [f64; 4]) -> Result<JacobiTrace> {
    let inputs = AlongTrace { data, trace: base };
    let len = base.samples.last().map(|s| s.s).unwrap_or(0.0);
    jacobi_generic(&inputs, init, len, base.step)
}

impl JacobiTrace {
    /// Largest `|x' − yτ_x|`, with `x'` by central differences.
    pub fn x_residual(&self) -> f64 {
        let s = &self.samples;
        (1..s.len().saturating_sub(1))
            .map(|i| ((s[i + 1].x - s[i - 1].x) / (s[i + 1].t - s[i - 1].t) - s[i].y * self.tau_x[i]).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `t` such that `y'(0)t/2 ≤ y ≤ 2y'(0)t` on `(0, t]`.
    pub fn sandwich_time(&self) -> f64 {
        let dy0 = self.samples[0].dy;
        let mut last = 0.0;
        for s in self.samples.iter().skip(1) {
            let ok = dy0 * s.t / 2.0 <= s.y + 1e-14 && s.y <= 2.0 * dy0 * s.t + 1e-14;
            if !ok {
                break;
            }
            last = s.t;
        }
        last
    }

    /// Largest `|x(t)| − τ₀ y'(0) t²` over the samples with `t ≤ t_max`.
    pub fn x_bound_excess(&self, tau0: f64, t_max: f64) -> f64 {
        let dy0 = self.samples[0].dy;
        self.samples.iter().filter(|s| s.t <= t_max).map(|s| s.x.abs() - tau0 * dy0 * s.t * s.t).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "x", "y", "dx", "dy"])?;
        for s in &self.samples {
            out.write_record([s.t, s.x, s.y, s.dx, s.dy].map(crate::report::fmt_f64))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Endpoint of the `∇̃`-geodesic from `q` with initial velocity `v`
/// after unit time.
fn exp_map(data: &SurfaceConnectionData, q: &[f64; 2], v: &Vec2, steps: usize) -> Result<[f64; 2]> {
    let rhs = |y: &State<4>| -> Result<State<4>> {
        let p = [y[0], y[1]];
        if !data.contains(&p) {
            return Err(Error::LeftPatch { s: 0.0 });
        }
        let w = Vec2::new(y[2], y[3]);
        let a = -contract(&data.coefficients(&p)?, &w, &w);
        Ok(State::from([w[0], w[1], a[0], a[1]]))
    };
    let mut y = State::from([q[0], q[1], v[0], v[1]]);
    for _ in 0..steps {
        y = rk4_step(&rhs, &y, 1.0 / steps as f64)?;
    }
    Ok([y[0], y[1]])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformationRate {
    /// `l(K̃ + κ(κ + τ_X)) + X.X.l − X.(lτ_Y)`
    pub formula: f64,
    /// Rate of `κ` under the actual deformation `exp(ε l J c')`.
    pub measured: f64,
    pub residual: f64,
}

/// Compares the first-order variation of `κ` under the normal deformation
/// by `l J c'` with finite differences of the deformed curves, at path
/// parameter `t`. `l` is a function of the path parameter.
pub fn deformation_rate_check(data: &SurfaceConnectionData, path: &Segment, l: &dyn Fn(f64) -> f64, t: f64) -> Result<DeformationRate> {
    let ht = 1e-3;
    let speed = |x: f64| -> Result<f64> { Ok(norm(&data.metric3(&path.point(x))?, &path.velocity(x))) };
    let q = path.point(t);
    let m = data.metric3(&q)?;
    let j = connection::rotation(&m);
    let v = path.velocity(t);
    let sp = speed(t)?;
    let x = v / sp;
    let y = j * x;
    let kappa = path.curvature_density(data, t)? / sp;
    let tau = data.torsion(&q)?;
    let (tx, _) = (inner(&m, &tau, &x), inner(&m, &tau, &y));
    // X.f = f_t / |c'|
    let d = |f: &dyn Fn(f64) -> Result<f64>, x: f64| -> Result<f64> { Ok((f(x + ht)? - f(x - ht)?) / (2.0 * ht * speed(x)?)) };
    let lf = |x: f64| -> Result<f64> { Ok(l(x)) };
    let dl = |x: f64| d(&lf, x);
    let xxl = d(&dl, t)?;
    let lty = |x: f64| -> Result<f64> {
        let p = path.point(x);
        let m = data.metric3(&p)?;
        let yy = connection::rotation(&m) * path.velocity(x);
        Ok(l(x) * inner(&m, &data.torsion(&p)?, &yy) / norm(&m, &yy))
    };
    let x_lty = d(&lty, t)?;
    let formula = l(t) * (data.ktilde(&q)? + kappa * (kappa + tx)) + xxl - x_lty;

    let kappa_eps = |eps: f64| -> Result<f64> {
        let pt = |x: f64| -> Result<Vec2> {
            let p = path.point(x);
            let m = data.metric3(&p)?;
            let v = path.velocity(x);
            let n = connection::rotation(&m) * v / norm(&m, &v);
            Ok(Vec2::from(exp_map(data, &p, &(n * (eps * l(x))), 8)?))
        };
        let hs = 2e-3;
        let (a, c, b) = (pt(t - hs)?, pt(t)?, pt(t + hs)?);
        let (a2, b2) = (pt(t - 2.0 * hs)?, pt(t + 2.0 * hs)?);
        let vel = (a2 - b2 + (b - a) * 8.0) / (12.0 * hs);
        let acc = (-a2 - b2 + (a + b) * 16.0 - c * 30.0) / (12.0 * hs * hs);
        let cq = [c[0], c[1]];
        let m = data.metric3(&cq)?;
        let acc = acc + contract(&data.coefficients(&cq)?, &vel, &vel);
        let s = norm(&m, &vel);
        Ok(inner(&m, &acc, &(connection::rotation(&m) * vel)) / s.powi(3))
    };
    let rate = |eps: f64| -> Result<f64> { Ok((kappa_eps(eps)? - kappa_eps(-eps)?) / (2.0 * eps)) };
    let e = 2e-3;
    let measured = (4.0 * rate(e / 2.0)? - rate(e)?) / 3.0;
    Ok(DeformationRate { formula, measured, residual: (formula - measured).abs() })
}
