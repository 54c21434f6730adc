//! Scalar ODE constructions: the oscillating solution of
//! `y'' = (yu)' − (ε + u²/4) y` started at `(y, y') = (1, u(0) + 4)`,
//! the piecewise supersolution glued from such segments, and the 2×2
//! spiral spectrum.

use crate::curves::{rk4_step, State};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpiralSpectrum {
    /// Mean matrix `[[T, Λ], [−K, 0]]`.
    pub matrix: [[f64; 2]; 2],
    pub alpha: f64,
    /// Imaginary part when oscillatory, else half the gap between the
    /// real roots.
    pub beta: f64,
    pub oscillatory: bool,
}

/// Eigenvalues `α ± iβ` of `[[T, Λ], [−K, 0]]`, roots of `X² − TX + ΛK`.
pub fn spiral_eigenvalues(t: f64, lambda: f64, k: f64) -> SpiralSpectrum {
    let disc = lambda * k - t * t / 4.0;
    SpiralSpectrum {
        matrix: [[t, lambda], [-k, 0.0]],
        alpha: t / 2.0,
        beta: disc.abs().sqrt(),
        oscillatory: disc > 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdoSample {
    pub s: f64,
    pub y: f64,
    pub z: f64,
    /// `y' = yu + z`
    pub dy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdoHeader {
    pub epsilon: f64,
    pub s0: f64,
    pub s1: f64,
    #[serde(rename = "M0")]
    pub m0: f64,
    pub y_max: f64,
    /// `(|α₊| + |α₋|) e^{s₀}` with `|α±|` at the bound of the printed estimate.
    pub m0_bound: f64,
    pub lipschitz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdoSolution {
    pub epsilon: f64,
    pub step: f64,
    pub s0: f64,
    pub s1: f64,
    /// Samples on `[0, s₁]`; `s₀` and `s₁` are sample points.
    pub samples: Vec<EdoSample>,
    /// `max(|y|, |y'|)` on `[0, s₀]`.
    pub m0: f64,
    /// `max |y'|` on `[0, s₁]`.
    pub lipschitz: f64,
    /// `max y` on `[0, s₀]`, located at the zero of `y'`.
    pub y_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stop {
    ReturnToOne,
    Zero,
}

/// Integrates `y' = yu + z`, `z' = −(ε + u²/4) y` from `(y0, z0)` until
/// `y` first returns to one (after leaving it) and then first reaches
/// zero. Crossing times are refined by bisection on the last step.
fn integrate(u: &dyn Fn(f64) -> f64, eps: f64, y0: f64, dy0: f64, step: f64, limit: f64) -> Result<(Vec<EdoSample>, Option<usize>, usize)> {
    let bound = 1.0 / eps;
    let check = |s: f64| -> Result<f64> {
        let v = u(s);
        if !(v.abs() <= bound * (1.0 + 1e-12)) {
            return Err(Error::BoundViolated { value: v.abs(), bound });
        }
        Ok(v)
    };
    // state (s, y, z) so the step is autonomous
    let f = |x: &State<3>| -> Result<State<3>> {
        let uu = check(x[0])?;
        Ok(State::from([1.0, x[1] * uu + x[2], -(eps + uu * uu / 4.0) * x[1]]))
    };
    let sample = |x: &State<3>| -> Result<EdoSample> {
        let uu = check(x[0])?;
        Ok(EdoSample { s: x[0], y: x[1], z: x[2], dy: x[1] * uu + x[2] })
    };
    let mut x = State::from([0.0, y0, dy0 - y0 * check(0.0)?]);
    let mut out = vec![sample(&x)?];
    let mut i0 = None;
    let mut stop = Stop::ReturnToOne;
    let mut left_one = false;
    loop {
        if x[0] > limit {
            return Err(Error::NoCrossing { limit });
        }
        let next = rk4_step(&f, &x, step)?;
        let target = if stop == Stop::ReturnToOne { 1.0 } else { 0.0 };
        let crossed = match stop {
            Stop::ReturnToOne => left_one && next[1] <= 1.0,
            Stop::Zero => next[1] <= 0.0,
        };
        if stop == Stop::ReturnToOne && next[1] > 1.0 {
            left_one = true;
        }
        if stop == Stop::ReturnToOne && !left_one && next[1] < 1.0 {
            // started downwards: y never exceeds one, s₀ = 0
            i0 = Some(0);
            stop = Stop::Zero;
            continue;
        }
        if crossed {
            let (mut lo, mut hi) = (0.0, step);
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                if rk4_step(&f, &x, mid)?[1] > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let mut at = rk4_step(&f, &x, 0.5 * (lo + hi))?;
            at[1] = target;
            out.push(sample(&at)?);
            x = at;
            match stop {
                Stop::ReturnToOne => {
                    i0 = Some(out.len() - 1);
                    stop = Stop::Zero;
                }
                Stop::Zero => {
                    let last = out.len() - 1;
                    return Ok((out, i0, last));
                }
            }
            continue;
        }
        x = next;
        out.push(sample(&x)?);
    }
}

/// Solves the oscillating ODE from `(y, y')(0) = (1, u(0) + 4)`.
pub fn solve_prop_edo(u: &dyn Fn(f64) -> f64, eps: f64, step: f64) -> Result<EdoSolution> {
    if !(eps > 0.0) || !(step > 0.0) {
        return Err(Error::ParameterOutOfRange(format!("need ε > 0 and step > 0, got {eps}, {step}")));
    }
    let limit = PI / eps.sqrt() * 1.1 + 10.0 * step;
    let (samples, i0, i1) = integrate(u, eps, 1.0, u(0.0) + 4.0, step, limit)?;
    let i0 = i0.unwrap_or(0);
    let m0 = samples[..=i0].iter().map(|p| p.y.abs().max(p.dy.abs())).fold(0.0, f64::max);
    let lipschitz = samples.iter().map(|p| p.dy.abs()).fold(0.0, f64::max);
    // refine max y on [0, s₀] at the sign change of y'
    let f = |x: &State<3>| -> Result<State<3>> {
        let uu = u(x[0]);
        Ok(State::from([1.0, x[1] * uu + x[2], -(eps + uu * uu / 4.0) * x[1]]))
    };
    let dy = |x: &State<3>| x[1] * u(x[0]) + x[2];
    let mut y_max = samples[..=i0].iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    for w in samples[..=i0].windows(2) {
        if w[0].dy > 0.0 && w[1].dy <= 0.0 {
            let x0 = State::from([w[0].s, w[0].y, w[0].z]);
            let (mut lo, mut hi) = (0.0, w[1].s - w[0].s);
            while hi - lo > 1e-13 {
                let mid = 0.5 * (lo + hi);
                if dy(&rk4_step(&f, &x0, mid)?) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            y_max = y_max.max(rk4_step(&f, &x0, 0.5 * (lo + hi))?[1]);
        }
    }
    Ok(EdoSolution { epsilon: eps, step, s0: samples[i0].s, s1: samples[i1].s, samples, m0, lipschitz, y_max })
}

impl EdoSolution {
    /// `S₁ = π / √ε`.
    pub fn s1_bound(&self) -> f64 {
        PI / self.epsilon.sqrt()
    }

    /// `|α±|² ≤ 1/4 + (1/(4ε))(2/ε + 4)²`, times two for the sum, times
    /// `e^{s₀}`.
    pub fn m0_bound(&self) -> f64 {
        let e = self.epsilon;
        2.0 * (0.25 + (2.0 / e + 4.0).powi(2) / (4.0 * e)).sqrt() * self.s0.exp()
    }

    /// Whether `z` decreases strictly between consecutive samples with `y > 0`.
    pub fn z_decreasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[0].y <= 0.0 || w[1].z < w[0].z)
    }

    /// Spiral spectrum of the mean matrix `[[F, 1], [−(ε + F̃²/4), 0]]` at
    /// `s`, with `F`, `F̃²` the running means of `u`, `u²` (trapezoid rule on
    /// the samples).
    pub fn mean_spectrum(&self, u: &dyn Fn(f64) -> f64, s: f64) -> SpiralSpectrum {
        let mut f = 0.0;
        let mut f2 = 0.0;
        for w in self.samples.windows(2) {
            if w[0].s >= s {
                break;
            }
            let b = w[1].s.min(s);
            let h = b - w[0].s;
            let (ua, ub) = (u(w[0].s), u(b));
            f += 0.5 * h * (ua + ub);
            f2 += 0.5 * h * (ua * ua + ub * ub);
        }
        spiral_eigenvalues(f / s, 1.0, self.epsilon + f2 / s / 4.0)
    }

    pub fn header(&self) -> EdoHeader {
        EdoHeader { epsilon: self.epsilon, s0: self.s0, s1: self.s1, m0: self.m0, y_max: self.y_max, m0_bound: self.m0_bound(), lipschitz: self.lipschitz }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["s", "y", "z"])?;
        for p in &self.samples {
            out.write_record([p.s, p.y, p.z].map(crate::report::fmt_f64))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Consecutive zeros of `y` for the same system started at `(1, u(0)+4)`,
/// continued past `s₁`; used to measure the oscillation period.
pub fn zero_crossings(u: &dyn Fn(f64) -> f64, eps: f64, step: f64, count: usize) -> Result<Vec<f64>> {
    let f = |x: &State<3>| -> Result<State<3>> {
        let uu = u(x[0]);
        Ok(State::from([1.0, x[1] * uu + x[2], -(eps + uu * uu / 4.0) * x[1]]))
    };
    let mut x = State::from([0.0, 1.0, 4.0]);
    let mut out = Vec::new();
    let limit = (count as f64 + 2.0) * PI / eps.sqrt() * 4.0;
    while out.len() < count {
        if x[0] > limit {
            return Err(Error::NoCrossing { limit });
        }
        let next = rk4_step(&f, &x, step)?;
        if (next[1] > 0.0) != (x[1] > 0.0) {
            let pos = x[1] > 0.0;
            let (mut lo, mut hi) = (0.0, step);
            while hi - lo > 1e-13 {
                let mid = 0.5 * (lo + hi);
                if (rk4_step(&f, &x, mid)?[1] > 0.0) == pos {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(x[0] + 0.5 * (lo + hi));
        }
        x = next;
    }
    Ok(out)
}

/// One glued piece on `[x_start, x_end]`, samples in absolute `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub x_start: f64,
    pub x_end: f64,
    /// `(x, y, y')`, increasing in `x`.
    pub samples: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edo7Solution {
    pub epsilon: f64,
    pub n1: f64,
    /// `2S₁ = 2π/√ε`, the support margin.
    pub m1_support: f64,
    /// `max(2S₁, M̄₀)`: bounds `y` and its Lipschitz constant.
    pub m1: f64,
    /// Junction points `x₋₁ < x₀ < … < x_{N+1}`.
    pub junctions: Vec<f64>,
    pub pieces: Vec<Piece>,
}

/// Cubic B-spline test function centred at `center`, support width `width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
}

impl Bump {
    /// `(φ, φ', φ'')`
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let w = self.width / 4.0;
        let t = (x - self.center) / w;
        let a = t.abs();
        let sg = t.signum();
        let (b, db, ddb) = if a >= 2.0 {
            (0.0, 0.0, 0.0)
        } else if a >= 1.0 {
            let r = 2.0 - a;
            (r * r * r / 6.0, -sg * r * r / 2.0, r)
        } else {
            (2.0 / 3.0 - a * a + a * a * a / 2.0, sg * (-2.0 * a + 1.5 * a * a), -2.0 + 3.0 * a)
        };
        (b, db / w, ddb / (w * w))
    }

    pub fn knots(&self) -> [f64; 5] {
        let w = self.width / 4.0;
        [-2.0, -1.0, 0.0, 1.0, 2.0].map(|k| self.center + k * w)
    }

    /// A deterministic family of `n` bumps over `[lo, hi]` with widths in
    /// `[min_width, max_width]` (golden-ratio sequences).
    pub fn family(n: usize, lo: f64, hi: f64, min_width: f64, max_width: f64) -> Vec<Bump> {
        let g1 = 0.618_033_988_749_894_9;
        let g2 = 0.754_877_666_246_692_7;
        (0..n)
            .map(|i| {
                let a = (0.5 + g1 * i as f64).fract();
                let b = (0.5 + g2 * i as f64).fract();
                Bump { center: lo + a * (hi - lo), width: min_width + b * (max_width - min_width) }
            })
            .collect()
    }
}

fn piece_from(x0: f64, samples: &[EdoSample], forward: bool) -> Piece {
    let mut pts: Vec<[f64; 3]> = samples
        .iter()
        .map(|p| if forward { [x0 + p.s, p.y, p.dy] } else { [x0 - p.s, p.y, -p.dy] })
        .collect();
    if !forward {
        pts.reverse();
    }
    Piece { x_start: pts[0][0], x_end: pts[pts.len() - 1][0], samples: pts }
}

/// Glues oscillating segments into a compactly supported, piecewise smooth
/// `y ≥ 1` on `[−N₁, N₁]` satisfying `y'' ≥ (yu)' − (ε + u²/4) y` weakly.
///
/// The left terminal piece starts at `x₀ = −N₁` with slope
/// `min(0, u(x₀) + 4)` so that the slope jump at `x₀` is non-negative.
/// A priori envelope `√(1 + (2/ε + 4)²/ε) · exp(π/√ε)` on `|(y, z)|` over
/// one oscillation, independent of `u`.
pub fn prior_m0(eps: f64) -> f64 {
    (1.0 + (2.0 / eps + 4.0).powi(2) / eps).sqrt() * (PI / eps.sqrt()).exp()
}

pub fn construct_edo7(u: &dyn Fn(f64) -> f64, eps: f64, n1: f64, step: f64) -> Result<Edo7Solution> {
    if !(n1 > 0.0) {
        return Err(Error::ParameterOutOfRange(format!("N1 must be positive, got {n1}")));
    }
    if !(eps > 0.0) || !(step > 0.0) {
        return Err(Error::ParameterOutOfRange(format!("need ε > 0 and step > 0, got {eps}, {step}")));
    }
    let limit = PI / eps.sqrt() * 1.1 + 10.0 * step;
    let mut pieces = Vec::new();
    let mut x = -n1;
    // left terminal piece, integrated backwards: v(s) = y(x₀ − s)
    let back = |s: f64| -u(x - s);
    let slope = (u(x) + 4.0).min(0.0);
    let (ls, _, l1) = integrate(&back, eps, 1.0, -slope, step, limit)?;
    let left = piece_from(x, &ls[..=l1], false);
    let mut junctions = vec![left.x_start, x];
    pieces.push(left);
    loop {
        let x0 = x;
        let shifted = |s: f64| u(x0 + s);
        let sol = solve_prop_edo(&shifted, eps, step)?;
        let i0 = sol.samples.iter().position(|p| p.s == sol.s0).unwrap_or(0);
        if x0 > n1 {
            // terminal piece down to zero
            let p = piece_from(x0, &sol.samples, true);
            junctions.push(p.x_end);
            pieces.push(p);
            break;
        }
        if sol.s0 <= 0.0 {
            return Err(Error::ParameterOutOfRange("segment did not rise above one".into()));
        }
        let p = piece_from(x0, &sol.samples[..=i0], true);
        x = p.x_end;
        junctions.push(x);
        pieces.push(p);
    }
    Ok(Edo7Solution { epsilon: eps, n1, m1_support: 2.0 * PI / eps.sqrt(), m1: (2.0 * PI / eps.sqrt()).max(prior_m0(eps)), junctions, pieces })
}

impl Edo7Solution {
    pub fn support(&self) -> (f64, f64) {
        (self.junctions[0], *self.junctions.last().expect("junctions"))
    }

    /// `(y, y')` at `x`, by cubic Hermite interpolation inside the piece
    /// containing `x` (right piece at a junction); zero outside the support.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return (0.0, 0.0);
        }
        let piece = self.pieces.iter().find(|p| x >= p.x_start && x < p.x_end).unwrap_or_else(|| self.pieces.last().expect("pieces"));
        hermite(&piece.samples, x)
    }

    pub fn max_value(&self) -> f64 {
        self.pieces.iter().flat_map(|p| p.samples.iter().map(|s| s[1])).fold(0.0, f64::max)
    }

    pub fn lipschitz(&self) -> f64 {
        self.pieces.iter().flat_map(|p| p.samples.iter().map(|s| s[2].abs())).fold(0.0, f64::max)
    }

    /// Smallest sampled `y` on `[−N₁, N₁]`.
    pub fn floor_on_core(&self) -> f64 {
        self.pieces
            .iter()
            .flat_map(|p| p.samples.iter())
            .filter(|s| s[0] >= -self.n1 && s[0] <= self.n1)
            .map(|s| s[1])
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest `y'(x⁺) − y'(x⁻)` over the junctions (outside the support
    /// the slope is zero).
    pub fn min_slope_jump(&self) -> f64 {
        let mut worst = f64::INFINITY;
        let n = self.pieces.len();
        for k in 0..=n {
            let left = if k == 0 { 0.0 } else { self.pieces[k - 1].samples.last().unwrap()[2] };
            let right = if k == n { 0.0 } else { self.pieces[k].samples[0][2] };
            worst = worst.min(right - left);
        }
        worst
    }

    /// `∫ y (φ'' + u φ' + (ε + u²/4) φ)`, which is non-negative for every
    /// non-negative test function exactly when the inequality holds weakly.
    pub fn weak_residual(&self, u: &dyn Fn(f64) -> f64, bump: &Bump) -> f64 {
        let knots = bump.knots();
        let (a, b) = (knots[0], knots[4]);
        let mut cuts: Vec<f64> = knots.to_vec();
        for p in &self.pieces {
            for s in &p.samples {
                if s[0] > a && s[0] < b {
                    cuts.push(s[0]);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        // 4-point Gauss–Legendre on each cut interval
        let nodes = [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
        let weights = [0.347_854_845_137_453_9, 0.652_145_154_862_546_1, 0.652_145_154_862_546_1, 0.347_854_845_137_453_9];
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (l, r) = (w[0], w[1]);
            let (m, h) = (0.5 * (l + r), 0.5 * (r - l));
            for (t, wt) in nodes.iter().zip(weights) {
                let x = m + h * t;
                let (y, _) = self.eval(x);
                let (phi, dphi, ddphi) = bump.eval(x);
                let uu = u(x);
                total += wt * h * y * (ddphi + uu * dphi + (self.epsilon + uu * uu / 4.0) * phi);
            }
        }
        total
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x", "y", "dy"])?;
        for p in &self.pieces {
            for s in &p.samples {
                out.write_record(s.map(crate::report::fmt_f64))?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

fn hermite(samples: &[[f64; 3]], x: f64) -> (f64, f64) {
    let i = samples.partition_point(|s| s[0] <= x).clamp(1, samples.len() - 1) - 1;
    let (a, b) = (samples[i], samples[i + 1]);
    let h = b[0] - a[0];
    if h <= 0.0 {
        return (a[1], a[2]);
    }
    let t = (x - a[0]) / h;
    let (t2, t3) = (t * t, t * t * t);
    let y = (2.0 * t3 - 3.0 * t2 + 1.0) * a[1] + (t3 - 2.0 * t2 + t) * h * a[2] + (-2.0 * t3 + 3.0 * t2) * b[1] + (t3 - t2) * h * b[2];
    let dy = ((6.0 * t2 - 6.0 * t) * a[1] + (-6.0 * t2 + 6.0 * t) * b[1]) / h + (3.0 * t2 - 4.0 * t + 1.0) * a[2] + (3.0 * t2 - 2.0 * t) * b[2];
    (y, dy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_u_zero() {
        let s = solve_prop_edo(&|_| 0.0, 1.0, 1e-3).unwrap();
        assert!((s.s0 - 2.0 * 4f64.atan()).abs() < 1e-6, "{}", s.s0);
        assert!((s.s1 - (PI - 0.25f64.atan())).abs() < 1e-6, "{}", s.s1);
        assert!((s.y_max - 17f64.sqrt()).abs() < 1e-9, "{}", s.y_max);
        assert!(s.z_decreasing());
        assert!(s.m0 <= s.m0_bound());
    }

    #[test]
    fn bound_violation() {
        assert!(matches!(solve_prop_edo(&|_| 3.0, 1.0, 1e-2), Err(Error::BoundViolated { .. })));
    }

    #[test]
    fn spiral_examples() {
        let a = spiral_eigenvalues(0.0, 1.0, 1.0);
        assert!(a.oscillatory && a.alpha == 0.0 && a.beta == 1.0);
        let b = spiral_eigenvalues(2.0, 1.0, 2.0);
        assert!(b.oscillatory && b.alpha == 1.0 && b.beta == 1.0);
        let c = spiral_eigenvalues(2.0, 1.0, 1.0);
        assert!(!c.oscillatory && c.alpha == 1.0 && c.beta == 0.0);
    }

    #[test]
    fn hermite_reproduces_cubic() {
        let f = |x: f64| x * x * x - 2.0 * x;
        let df = |x: f64| 3.0 * x * x - 2.0;
        let s: Vec<[f64; 3]> = [0.0, 0.5, 1.5].iter().map(|&x| [x, f(x), df(x)]).collect();
        let (y, dy) = hermite(&s, 0.9);
        assert!((y - f(0.9)).abs() < 1e-12 && (dy - df(0.9)).abs() < 1e-12);
    }

    #[test]
    fn bump_integrates_to_width_over_four() {
        let b = Bump { center: 0.3, width: 2.0 };
        let n = 4000;
        let h = 2.0 / n as f64;
        let area: f64 = (0..n).map(|i| b.eval(-0.7 + (i as f64 + 0.5) * h).0 * h).sum();
        assert!((area - 0.5).abs() < 1e-6);
    }

    #[test]
    fn edo7_u_zero() {
        let y = construct_edo7(&|_| 0.0, 1.0, 1.0, 1e-3).unwrap();
        let (lo, hi) = y.support();
        assert!(lo >= -1.0 - y.m1_support && hi <= 1.0 + y.m1_support);
        assert!(y.floor_on_core() >= 1.0 - 1e-12);
        assert!(y.lipschitz() <= y.m1);
        assert!(y.min_slope_jump() >= -1e-9);
        for b in Bump::family(20, lo - 1.0, hi + 1.0, 4e-3, 3.0) {
            assert!(y.weak_residual(&|_| 0.0, &b) >= -1e-6);
        }
    }
}
