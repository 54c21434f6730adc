//! Asymptotic frame `(U, V, θ, k)` of a hyperbolic immersion, the rate
//! identities for `∇̃_V U` and `∇̃_U V`, asymptotic curves and the
//! asymptotic coordinate net.
//!
//! `U`, `V` are the `III`-unit null directions of `II`, with
//! `B̃U = kJU`, `B̃V = −kJV`, `B̃ = B⁻¹`, `k = |det B̃|^{1/2}`. The sign of
//! `U` is fixed by continuity (or, with no reference, by a positive first
//! chart component) and `V` is signed so that `θ = ∠(U, V) ∈ (0, π)`.

use crate::connection::{self, contract, inner, norm, SurfaceConnectionData};
use crate::curves::{rk4_step, State};
use crate::error::{Error, Result};
use crate::immersion::{Mat2, Vec2};
use crate::jet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticFrame {
    pub q: [f64; 2],
    pub u: Vec2,
    pub v: Vec2,
    pub theta: f64,
    pub k: f64,
    /// `κ = −ln k`
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    U,
    V,
}

impl std::str::FromStr for Which {
    type Err = Error;
    fn from_str(s: &str) -> Result<Which> {
        match s {
            "U" | "u" => Ok(Which::U),
            "V" | "v" => Ok(Which::V),
            _ => Err(Error::Config(format!("expected U or V, got '{s}'"))),
        }
    }
}

/// `III`-unit null directions of `II`, `U` first (`B̃U = +kJU`), and `k`.
fn null_pair(data: &SurfaceConnectionData, q: &[f64; 2]) -> Result<(Vec2, Vec2, f64, Mat2)> {
    if data.is_abstract() {
        return Err(Error::ModeUnsupported);
    }
    let b = data.shape(q)?;
    let det = b.determinant();
    if det >= 0.0 {
        return Err(Error::NonHyperbolicPoint { point: q.to_vec(), det: 1.0 / det });
    }
    let i = data.first_form(q)?;
    let ii = i * b;
    let ii = (ii + ii.transpose()) * 0.5;
    let eig = ii.symmetric_eigen();
    let (pos, neg) = if eig.eigenvalues[0] > eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
    let (lp, ln) = (eig.eigenvalues[pos], -eig.eigenvalues[neg]);
    let ep = eig.eigenvectors.column(pos).into_owned();
    let en = eig.eigenvectors.column(neg).into_owned();
    let x1 = ep * ln.sqrt() + en * lp.sqrt();
    let x2 = ep * ln.sqrt() - en * lp.sqrt();
    let m = data.metric3(q)?;
    let j = connection::rotation(&m);
    let bt = b.try_inverse().ok_or(Error::DegenerateShapeOperator { point: q.to_vec(), det: 0.0 })?;
    let x1 = x1 / norm(&m, &x1);
    let x2 = x2 / norm(&m, &x2);
    let k = (1.0 / det.abs()).sqrt();
    let (u, v) = if inner(&m, &(bt * x1), &(j * x1)) > 0.0 { (x1, x2) } else { (x2, x1) };
    Ok((u, v, k, m))
}

fn orient(u: Vec2, v: Vec2, k: f64, m: &Mat2, q: &[f64; 2], reference: Option<&Vec2>) -> AsymptoticFrame {
    let keep = match reference {
        Some(r) => inner(m, &u, r) >= 0.0,
        None => u[0] > 0.0 || (u[0] == 0.0 && u[1] >= 0.0),
    };
    let u = if keep { u } else { -u };
    let j = connection::rotation(m);
    let v = if inner(m, &v, &(j * u)) > 0.0 { v } else { -v };
    let c = inner(m, &u, &v).clamp(-1.0, 1.0);
    AsymptoticFrame { q: *q, u, v, theta: c.acos(), k, kappa: -k.ln() }
}

/// Asymptotic frame at `q`, oriented by the positive-first-component rule.
pub fn asymptotic_frame(data: &SurfaceConnectionData, q: &[f64; 2]) -> Result<AsymptoticFrame> {
    let (u, v, k, m) = null_pair(data, q)?;
    Ok(orient(u, v, k, &m, q, None))
}

/// Asymptotic frame at `q` with `U` aligned to `reference`.
pub fn asymptotic_frame_near(data: &SurfaceConnectionData, q: &[f64; 2], reference: &Vec2) -> Result<AsymptoticFrame> {
    let (u, v, k, m) = null_pair(data, q)?;
    Ok(orient(u, v, k, &m, q, Some(reference)))
}

impl AsymptoticFrame {
    pub fn field(&self, which: Which) -> Vec2 {
        match which {
            Which::U => self.u,
            Which::V => self.v,
        }
    }

    /// `max(‖B̃U − kJU‖, ‖B̃V + kJV‖)` in `III`.
    pub fn residual(&self, data: &SurfaceConnectionData) -> Result<f64> {
        let b = data.shape(&self.q)?;
        let bt = b.try_inverse().ok_or(Error::DegenerateShapeOperator { point: self.q.to_vec(), det: 0.0 })?;
        let m = data.metric3(&self.q)?;
        let j = connection::rotation(&m);
        let ru = bt * self.u - j * self.u * self.k;
        let rv = bt * self.v + j * self.v * self.k;
        Ok(norm(&m, &ru).max(norm(&m, &rv)))
    }

    /// `|H| = |cot θ| / k` where `H = tr B / 2`.
    pub fn mean_curvature_from_angle(&self) -> f64 {
        (self.theta.cos() / self.theta.sin()).abs() / self.k
    }
}

/// Covariant derivative of the frame field `which` along `dir` at `q`,
/// with `dir` in coordinates.
fn frame_derivative(data: &SurfaceConnectionData, base: &AsymptoticFrame, which: Which, dir: &Vec2, gam: &jet::Christoffel<2>) -> Result<Vec2> {
    let h = data.step();
    let q = base.q;
    let f = |s: &[f64; 1]| {
        let p = [q[0] + s[0] * dir[0], q[1] + s[0] * dir[1]];
        asymptotic_frame_near(data, &p, &base.u).map(|fr| fr.field(which)).unwrap_or_else(|_| Vec2::from_element(f64::NAN))
    };
    let d = jet::partial(&f, &[0.0], 0, h);
    if !d[0].is_finite() || !d[1].is_finite() {
        return Err(Error::PointOutsideChart { point: q.to_vec(), margin: h });
    }
    Ok(d + contract(gam, dir, &base.field(which)))
}

fn kappa_derivative(data: &SurfaceConnectionData, q: &[f64; 2], dir: &Vec2) -> Result<f64> {
    let h = data.step();
    let f = |s: &[f64; 1]| {
        let p = [q[0] + s[0] * dir[0], q[1] + s[0] * dir[1]];
        data.shape_raw(&p).map(|b| 0.5 * b.determinant().abs().ln()).unwrap_or(f64::NAN)
    };
    let d = jet::partial(&f, &[0.0], 0, h);
    if !d.is_finite() {
        return Err(Error::PointOutsideChart { point: q.to_vec(), margin: h });
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateCheck {
    /// `‖∇̃_V U − (sin θ/2)(U.κ − III(τ, JU)) JU‖_III`
    pub vu_residual: f64,
    /// `‖∇̃_U V + (sin θ/2)(V.κ − III(τ, JV)) JV‖_III`
    pub uv_residual: f64,
    /// Residuals against the printed forms, `−(sin θ/2)(U.κ + III(τ, JU)) JU`
    /// and `(sin θ/2)(V.κ + III(τ, JV)) JV`.
    pub printed_vu_residual: f64,
    pub printed_uv_residual: f64,
    pub nabla_v_u: f64,
    pub nabla_u_v: f64,
    pub sin_theta: f64,
}

/// Both sides of the rate identities for `∇̃_V U` and `∇̃_U V`, with
/// `κ = −ln k`.
///
/// Expanding `d^∇̃ B̃ (U, V) = 0` gives
/// `∇̃_V U = (sin θ/2)(U.κ − III(τ, JU)) JU` and
/// `∇̃_U V = −(sin θ/2)(V.κ − III(τ, JV)) JV`; the printed forms agree with
/// these once `κ` is read as `ln k`. Both residuals are returned.
pub fn covariant_rate_check(data: &SurfaceConnectionData, q: &[f64; 2]) -> Result<RateCheck> {
    let fr = asymptotic_frame(data, q)?;
    let gam = data.coefficients(q)?;
    let m = data.metric3(q)?;
    let j = connection::rotation(&m);
    let tau = data.torsion(q)?;
    let s = fr.theta.sin();
    let (u, v) = (fr.u, fr.v);
    let nvu = frame_derivative(data, &fr, Which::U, &v, &gam)?;
    let nuv = frame_derivative(data, &fr, Which::V, &u, &gam)?;
    let ju = j * u;
    let jv = j * v;
    let (uk, vk) = (kappa_derivative(data, q, &u)?, kappa_derivative(data, q, &v)?);
    let (tu, tv) = (inner(&m, &tau, &ju), inner(&m, &tau, &jv));
    let rhs_vu = ju * (0.5 * s * (uk - tu));
    let rhs_uv = jv * (-0.5 * s * (vk - tv));
    let printed_vu = ju * (-0.5 * s * (uk + tu));
    let printed_uv = jv * (0.5 * s * (vk + tv));
    Ok(RateCheck {
        vu_residual: norm(&m, &(nvu - rhs_vu)),
        uv_residual: norm(&m, &(nuv - rhs_uv)),
        printed_vu_residual: norm(&m, &(nvu - printed_vu)),
        printed_uv_residual: norm(&m, &(nuv - printed_uv)),
        nabla_v_u: norm(&m, &nvu),
        nabla_u_v: norm(&m, &nuv),
        sin_theta: s,
    })
}

/// Measured `τ₁ = sup max(‖∇̃_U V‖, ‖∇̃_V U‖) / sin θ` over the samples.
pub fn measure_tau1(data: &SurfaceConnectionData, samples: &[[f64; 2]]) -> Result<f64> {
    let vals: Vec<Result<f64>> = samples
        .par_iter()
        .map(|q| covariant_rate_check(data, q).map(|r| r.nabla_u_v.max(r.nabla_v_u) / r.sin_theta))
        .collect();
    let mut best: f64 = 0.0;
    for v in vals {
        best = best.max(v?);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticSample {
    pub s: f64,
    pub q: [f64; 2],
    pub theta: f64,
    pub frame: AsymptoticFrame,
    pub delta_running: f64,
    pub sigma_running: f64,
    pub defect_running: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticTrace {
    pub which: Which,
    pub step: f64,
    pub samples: Vec<AsymptoticSample>,
    /// `π + inf θ − sup θ`
    pub delta: f64,
    /// `∫ sin θ ds`, trapezoid rule on the samples.
    pub sigma: f64,
    /// Max angle between `c'` and the transport of `c'(0)`.
    pub quasi_defect: f64,
    /// Arclength at which the trace stopped at the patch edge.
    pub left_patch: Option<f64>,
}

impl AsymptoticTrace {
    pub fn require_complete(self) -> Result<Self> {
        match self.left_patch {
            Some(s) => Err(Error::LeftPatch { s }),
            None => Ok(self),
        }
    }

    pub fn end(&self) -> [f64; 2] {
        self.samples.last().map(|s| s.q).unwrap_or([f64::NAN; 2])
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["s", "u", "v", "theta", "delta_running", "sigma_running", "defect_running"])?;
        for s in &self.samples {
            out.write_record([s.s, s.q[0], s.q[1], s.theta, s.delta_running, s.sigma_running, s.defect_running].map(crate::report::fmt_f64))?;
        }
        out.flush()?;
        Ok(())
    }
}

fn signed_angle(m: &Mat2, a: &Vec2, b: &Vec2) -> f64 {
    let j = connection::rotation(m);
    inner(m, &(j * a), b).atan2(inner(m, a, b))
}

/// Integrates the unit field `which` from `q` for `III`-length `length`,
/// transporting the initial velocity alongside to measure the
/// quasi-geodesic defect.
pub fn trace_asymptotic(data: &SurfaceConnectionData, q: &[f64; 2], which: Which, length: f64, step: f64) -> Result<AsymptoticTrace> {
    if data.is_abstract() {
        return Err(Error::ModeUnsupported);
    }
    if !(step > 0.0) || !(length >= 0.0) {
        return Err(Error::ParameterOutOfRange(format!("need step > 0 and length >= 0, got {step}, {length}")));
    }
    data.domain().check(q, data.margin())?;
    let f0 = asymptotic_frame(data, q)?;
    let w0 = f0.field(which);
    let mut reference = f0.u;
    let mut state: State<4> = State::from([q[0], q[1], w0[0], w0[1]]);
    let mut frame = f0;
    let (mut th_min, mut th_max) = (f0.theta, f0.theta);
    let mut sigma = 0.0;
    let mut defect: f64 = 0.0;
    let mut samples = vec![AsymptoticSample {
        s: 0.0,
        q: *q,
        theta: f0.theta,
        frame: f0,
        delta_running: std::f64::consts::PI,
        sigma_running: 0.0,
        defect_running: 0.0,
    }];
    let n = (length / step).ceil() as usize;
    let mut left = None;
    for i in 0..n {
        let h = (length - i as f64 * step).min(step);
        let rhs = |y: &State<4>| -> Result<State<4>> {
            let p = [y[0], y[1]];
            if !data.contains(&p) {
                return Err(Error::LeftPatch { s: 0.0 });
            }
            let fr = asymptotic_frame_near(data, &p, &reference)?;
            let c = fr.field(which);
            let w = Vec2::new(y[2], y[3]);
            let dw = -contract(&data.coefficients(&p)?, &c, &w);
            Ok(State::from([c[0], c[1], dw[0], dw[1]]))
        };
        let next = match rk4_step(&rhs, &state, h) {
            Ok(y) => y,
            Err(Error::LeftPatch { .. }) | Err(Error::PointOutsideChart { .. }) => {
                left = Some(i as f64 * step);
                break;
            }
            Err(e) => return Err(e),
        };
        let p = [next[0], next[1]];
        if !data.contains(&p) {
            left = Some(i as f64 * step);
            break;
        }
        let fr = asymptotic_frame_near(data, &p, &frame.u)?;
        let c = fr.field(which);
        reference = fr.u;
        let m = data.metric3(&p)?;
        let w = Vec2::new(next[2], next[3]);
        defect = defect.max(signed_angle(&m, &w, &c).abs());
        sigma += 0.5 * h * (frame.theta.sin() + fr.theta.sin());
        th_min = th_min.min(fr.theta);
        th_max = th_max.max(fr.theta);
        samples.push(AsymptoticSample {
            s: samples.last().unwrap().s + h,
            q: p,
            theta: fr.theta,
            frame: fr,
            delta_running: std::f64::consts::PI + th_min - th_max,
            sigma_running: sigma,
            defect_running: defect,
        });
        state = next;
        frame = fr;
    }
    Ok(AsymptoticTrace {
        which,
        step,
        delta: std::f64::consts::PI + th_min - th_max,
        sigma,
        quasi_defect: defect,
        samples,
        left_patch: left,
    })
}

/// Trapezoid rule for `∫ sin θ ds` on the trace samples.
pub fn sigma_quadrature(trace: &AsymptoticTrace) -> f64 {
    trace.samples.windows(2).map(|w| 0.5 * (w[1].s - w[0].s) * (w[0].theta.sin() + w[1].theta.sin())).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetReport {
    pub lengths: [f64; 2],
    pub steps: [usize; 2],
    /// `α` on the edges `(i, j−½)`: `alpha[j−1][i]`, `i = 0..=n_u`.
    pub alpha: Vec<Vec<f64>>,
    /// `β` on the edges `(i−½, j)`: `beta[j][i−1]`, `j = 0..=n_v`.
    pub beta: Vec<Vec<f64>>,
    /// Measured `sup ‖τ‖` over the net points.
    pub tau0: f64,
    /// Measured `τ₁` over the net points.
    pub tau1: f64,
    /// `τ₀ + 2τ₁`
    pub constant: f64,
    /// `sup |∂_u α| / (αβ)`, i.e. `sup |U.α| / α`.
    pub sup_u_alpha: f64,
    /// `sup |∂_v β| / (αβ)`, i.e. `sup |V.β| / β`.
    pub sup_v_beta: f64,
    /// `L(g_v)` per row.
    pub lengths_g: Vec<f64>,
    /// `max (dL/dv − C e^{CL} L)`, non-positive when the growth bound holds.
    pub growth_excess: f64,
    pub pass: bool,
}

/// Flows along the asymptotic field `which` for signed length `t`.
fn flow(data: &SurfaceConnectionData, p: &[f64; 2], reference: &Vec2, which: Which, t: f64, substeps: usize) -> Result<([f64; 2], Vec2)> {
    let mut y: State<2> = State::from(*p);
    let mut r = *reference;
    let h = t / substeps as f64;
    for _ in 0..substeps {
        let f = |z: &State<2>| -> Result<State<2>> {
            let q = [z[0], z[1]];
            if !data.contains(&q) {
                return Err(Error::LeftPatch { s: 0.0 });
            }
            let fr = asymptotic_frame_near(data, &q, &r)?;
            let c = fr.field(which);
            Ok(State::from([c[0], c[1]]))
        };
        y = rk4_step(&f, &y, h)?;
        r = asymptotic_frame_near(data, &[y[0], y[1]], &r)?.u;
    }
    Ok(([y[0], y[1]], r))
}

/// Builds the asymptotic net `g_v(u)` from `q` and checks the expansion
/// bounds `|U.α| ≤ Cα`, `|V.β| ≤ Cβ` and
/// `dL(g_v)/dv ≤ C e^{C L(g_v)} L(g_v)` with `C = τ₀ + 2τ₁` measured on
/// the net.
pub fn net_expansion_check(data: &SurfaceConnectionData, q: &[f64; 2], lengths: (f64, f64), steps: (usize, usize), tol: f64) -> Result<NetReport> {
    let (lu, lv) = lengths;
    let nu = if lu > 0.0 { steps.0.max(1) } else { 0 };
    let nv = if lv > 0.0 { steps.1.max(1) } else { 0 };
    let du = if nu > 0 { lu / nu as f64 } else { 0.0 };
    let dv = if nv > 0 { lv / nv as f64 } else { 0.0 };
    let f0 = asymptotic_frame(data, q)?;
    let sub = 4;
    let mut pts = vec![vec![[0.0; 2]; nu + 1]; nv + 1];
    let mut refs = vec![vec![Vec2::zeros(); nu + 1]; nv + 1];
    pts[0][0] = *q;
    refs[0][0] = f0.u;
    let lift = |e: Error, s: f64| match e {
        Error::LeftPatch { .. } | Error::PointOutsideChart { .. } => Error::LeftPatch { s },
        other => other,
    };
    for i in 1..=nu {
        let (p, r) = flow(data, &pts[0][i - 1], &refs[0][i - 1], Which::U, du, sub).map_err(|e| lift(e, i as f64 * du))?;
        pts[0][i] = p;
        refs[0][i] = r;
    }
    for j in 1..=nv {
        let (p, r) = flow(data, &pts[j - 1][0], &refs[j - 1][0], Which::V, dv, sub).map_err(|e| lift(e, j as f64 * dv))?;
        pts[j][0] = p;
        refs[j][0] = r;
    }
    let mut alpha = vec![vec![1.0; nu + 1]; nv];
    let mut beta = vec![vec![1.0; nu]; nv + 1];
    for j in 1..=nv {
        for i in 1..=nu {
            // flowU(A, a) = flowV(C, b), Newton in (a, b)
            let (a_pt, a_ref) = (pts[j][i - 1], refs[j][i - 1]);
            let (c_pt, c_ref) = (pts[j - 1][i], refs[j - 1][i]);
            let (mut a, mut b) = (du * beta[j - 1][i - 1], dv * alpha[j - 1][i - 1]);
            for _ in 0..30 {
                let (pa, ra) = flow(data, &a_pt, &a_ref, Which::U, a, sub).map_err(|e| lift(e, j as f64 * dv))?;
                let (pc, _) = flow(data, &c_pt, &c_ref, Which::V, b, sub).map_err(|e| lift(e, j as f64 * dv))?;
                let fa = asymptotic_frame_near(data, &pa, &ra)?;
                let fc = asymptotic_frame_near(data, &pc, &ra)?;
                let jac = Mat2::from_columns(&[fa.u, -fc.v]);
                let r = Vec2::new(pa[0] - pc[0], pa[1] - pc[1]);
                let d = jac.try_inverse().ok_or(Error::NonHyperbolicPoint { point: pa.to_vec(), det: 0.0 })? * r;
                a -= d[0];
                b -= d[1];
                if d.norm() < 1e-13 * (1.0 + a.abs() + b.abs()) {
                    break;
                }
            }
            let (p, r) = flow(data, &a_pt, &a_ref, Which::U, a, sub).map_err(|e| lift(e, j as f64 * dv))?;
            pts[j][i] = p;
            refs[j][i] = r;
            beta[j][i - 1] = a / du;
            alpha[j - 1][i] = b / dv;
        }
    }
    let flat: Vec<[f64; 2]> = pts.iter().flatten().copied().collect();
    let taus: Vec<Result<f64>> = flat.par_iter().map(|p| data.torsion_norm(p)).collect();
    let mut tau0: f64 = 0.0;
    for t in taus {
        tau0 = tau0.max(t?);
    }
    let tau1 = measure_tau1(data, &flat)?;
    let c = tau0 + 2.0 * tau1;
    let (mut sup_u, mut sup_v): (f64, f64) = (0.0, 0.0);
    for j in 1..=nv {
        for i in 1..=nu {
            let al = 0.5 * (alpha[j - 1][i] + alpha[j - 1][i - 1]);
            let be = 0.5 * (beta[j][i - 1] + beta[j - 1][i - 1]);
            sup_u = sup_u.max(((alpha[j - 1][i] - alpha[j - 1][i - 1]) / du).abs() / (al * be));
            sup_v = sup_v.max(((beta[j][i - 1] - beta[j - 1][i - 1]) / dv).abs() / (al * be));
        }
    }
    let lengths_g: Vec<f64> = beta.iter().map(|row| row.iter().sum::<f64>() * du).collect();
    let mut growth_excess = f64::NEG_INFINITY;
    for j in 1..=nv {
        let l = 0.5 * (lengths_g[j] + lengths_g[j - 1]);
        let d = (lengths_g[j] - lengths_g[j - 1]) / dv;
        growth_excess = growth_excess.max(d - c * (c * l).exp() * l);
    }
    if nv == 0 || nu == 0 {
        growth_excess = 0.0;
    }
    let pass = sup_u <= c + tol && sup_v <= c + tol && growth_excess <= tol;
    Ok(NetReport {
        lengths: [lu, lv],
        steps: [nu, nv],
        alpha,
        beta,
        tau0,
        tau1,
        constant: c,
        sup_u_alpha: sup_u,
        sup_v_beta: sup_v,
        lengths_g,
        growth_excess,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    fn saddle() -> SurfaceConnectionData {
        SurfaceConnectionData::immersion(gallery::saddle(), gallery::euclidean3())
    }

    #[test]
    fn saddle_frame_at_origin() {
        let f = asymptotic_frame(&saddle(), &[0.0, 0.0]).unwrap();
        assert!((f.theta - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
        assert!((f.k - 1.0).abs() < 1e-9);
        // one of U, V on each axis
        assert!(f.u[0].abs() < 1e-9 || f.u[1].abs() < 1e-9);
        assert!(f.residual(&saddle()).unwrap() < 1e-9);
    }

    #[test]
    fn sphere_is_not_hyperbolic() {
        let c = SurfaceConnectionData::immersion(gallery::round_sphere(1.0), gallery::euclidean3());
        assert!(matches!(asymptotic_frame(&c, &[1.0, 0.0]), Err(Error::NonHyperbolicPoint { .. })));
    }

    #[test]
    fn frame_identities_off_origin() {
        let c = saddle();
        let q = [0.3, -0.2];
        let f = asymptotic_frame(&c, &q).unwrap();
        assert!(f.residual(&c).unwrap() < 1e-9);
        let i = c.first_form(&q).unwrap();
        assert!((norm(&i, &f.u) - f.k).abs() < 1e-9);
        assert!((norm(&i, &f.v) - f.k).abs() < 1e-9);
        let h = 0.5 * c.shape(&q).unwrap().trace();
        assert!((h.abs() - f.mean_curvature_from_angle()).abs() < 1e-9);
    }

    #[test]
    fn rates_on_saddle() {
        for q in [[0.0, 0.0], [0.2, 0.1], [-0.3, 0.25]] {
            let r = covariant_rate_check(&saddle(), &q).unwrap();
            assert!(r.vu_residual < 1e-6 && r.uv_residual < 1e-6, "{q:?} {r:?}");
        }
    }

    #[test]
    fn rates_with_torsion() {
        let (patch, ambient) = gallery::g_lambda_slice(0.5, 0.2).unwrap();
        let c = SurfaceConnectionData::immersion(patch, ambient);
        assert!(c.torsion_norm(&[0.1, 0.3]).unwrap() > 0.1);
        for q in [[0.1, 0.3], [-0.4, 0.6]] {
            let r = covariant_rate_check(&c, &q).unwrap();
            assert!(r.vu_residual < 1e-3 && r.uv_residual < 1e-3, "{q:?} {r:?}");
        }
    }

    #[test]
    fn trace_along_u_axis() {
        let t = trace_asymptotic(&saddle(), &[0.0, 0.0], Which::U, 0.2, 0.01).unwrap().require_complete().unwrap();
        let end = t.end();
        assert!(end[0].abs() < 1e-9 || end[1].abs() < 1e-9, "{end:?}");
        assert!((t.delta - std::f64::consts::PI).abs() < 0.05);
        assert!((t.sigma - sigma_quadrature(&t)).abs() < 1e-12);
    }

    #[test]
    fn abstract_mode_rejected() {
        let c = SurfaceConnectionData::levi_civita(gallery::flat2());
        assert_eq!(trace_asymptotic(&c, &[0.0, 0.0], Which::U, 0.1, 0.01).unwrap_err(), Error::ModeUnsupported);
    }
}
