//! Finite-difference jets and the Levi-Civita formulas shared by the 3D
//! ambient metrics and the 2D surface metrics.
//!
//! Derivatives are central differences with one Richardson step:
//! `D = (4 D(h/2) - D(h)) / 3`, fourth order in `h`.

use nalgebra::SMatrix;
use std::ops::{Add, Mul, Sub};

/// Values that can be combined linearly (scalars, vectors, matrices).
pub trait Linear: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}
impl<T> Linear for T where T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> {}

fn shifted<const N: usize>(p: &[f64; N], moves: &[(usize, f64)]) -> [f64; N] {
    let mut q = *p;
    for &(i, d) in moves {
        q[i] += d;
    }
    q
}

fn central1<T: Linear, const N: usize>(f: &impl Fn(&[f64; N]) -> T, p: &[f64; N], i: usize, h: f64) -> T {
    (f(&shifted(p, &[(i, h)])) - f(&shifted(p, &[(i, -h)]))) * (0.5 / h)
}

/// First partial derivative along axis `i`.
pub fn partial<T: Linear, const N: usize>(f: &impl Fn(&[f64; N]) -> T, p: &[f64; N], i: usize, h: f64) -> T {
    let coarse = central1(f, p, i, h);
    let fine = central1(f, p, i, 0.5 * h);
    fine * (4.0 / 3.0) - coarse * (1.0 / 3.0)
}

/// All first partials.
pub fn gradient<T: Linear, const N: usize>(f: &impl Fn(&[f64; N]) -> T, p: &[f64; N], h: f64) -> [T; N] {
    std::array::from_fn(|i| partial(f, p, i, h))
}

fn central2<T: Linear, const N: usize>(f: &impl Fn(&[f64; N]) -> T, p: &[f64; N], i: usize, j: usize, h: f64) -> T {
    if i == j {
        let c = f(p);
        (f(&shifted(p, &[(i, h)])) + f(&shifted(p, &[(i, -h)])) - c - c) * (1.0 / (h * h))
    } else {
        let pp = f(&shifted(p, &[(i, h), (j, h)]));
        let pm = f(&shifted(p, &[(i, h), (j, -h)]));
        let mp = f(&shifted(p, &[(i, -h), (j, h)]));
        let mm = f(&shifted(p, &[(i, -h), (j, -h)]));
        (pp - pm - mp + mm) * (0.25 / (h * h))
    }
}

/// Second partial `∂_i ∂_j f`.
pub fn second_partial<T: Linear, const N: usize>(
    f: &impl Fn(&[f64; N]) -> T,
    p: &[f64; N],
    i: usize,
    j: usize,
    h: f64,
) -> T {
    let coarse = central2(f, p, i, j, h);
    let fine = central2(f, p, i, j, 0.5 * h);
    fine * (4.0 / 3.0) - coarse * (1.0 / 3.0)
}

/// Full Hessian of `f`, symmetric by construction.
pub fn hessian<T: Linear, const N: usize>(f: &impl Fn(&[f64; N]) -> T, p: &[f64; N], h: f64) -> [[T; N]; N] {
    let mut out = [[f(p); N]; N];
    for i in 0..N {
        for j in i..N {
            let d = second_partial(f, p, i, j, h);
            out[i][j] = d;
            out[j][i] = d;
        }
    }
    out
}

pub type Mat<const N: usize> = SMatrix<f64, N, N>;

/// Metric value with its first and second partials at one point.
#[derive(Debug, Clone, Copy)]
pub struct MetricJet<const N: usize> {
    pub g: Mat<N>,
    pub dg: [Mat<N>; N],
    pub ddg: [[Mat<N>; N]; N],
}

/// `gamma[k][i][j] = Γ^k_ij`.
pub type Christoffel<const N: usize> = [[[f64; N]; N]; N];

/// `r[i][j][k][l] = g(R(e_i, e_j) e_k, e_l)` with
/// `R(X, Y) = ∇_X ∇_Y - ∇_Y ∇_X - ∇_[X,Y]`.
pub type Riemann<const N: usize> = [[[[f64; N]; N]; N]; N];

pub const DET_FLOOR: f64 = 1e-12;

/// Christoffel symbols from `g` and its first partials.
pub fn christoffel_from<const N: usize>(g: &Mat<N>, dg: &[Mat<N>; N]) -> Option<Christoffel<N>> {
    let gi = g.try_inverse()?;
    let mut first = [[[0.0; N]; N]; N];
    for a in 0..N {
        for i in 0..N {
            for j in 0..N {
                first[a][i][j] = 0.5 * (dg[i][(j, a)] + dg[j][(i, a)] - dg[a][(i, j)]);
            }
        }
    }
    let mut gam = [[[0.0; N]; N]; N];
    for k in 0..N {
        for i in 0..N {
            for j in 0..N {
                gam[k][i][j] = (0..N).map(|a| gi[(k, a)] * first[a][i][j]).sum();
            }
        }
    }
    Some(gam)
}

/// Covariant Riemann tensor from a full metric jet.
pub fn riemann_from<const N: usize>(jet: &MetricJet<N>) -> Option<(Christoffel<N>, Riemann<N>)> {
    let gi = jet.g.try_inverse()?;
    let gam = christoffel_from(&jet.g, &jet.dg)?;
    // dgam[m][l][i][j] = ∂_m Γ^l_ij
    let mut dgam = [[[[0.0; N]; N]; N]; N];
    for m in 0..N {
        for a in 0..N {
            for i in 0..N {
                for j in 0..N {
                    let dfirst = 0.5 * (jet.ddg[m][i][(j, a)] + jet.ddg[m][j][(i, a)] - jet.ddg[m][a][(i, j)]);
                    let corr: f64 = (0..N).map(|b| jet.dg[m][(a, b)] * gam[b][i][j]).sum();
                    let v = dfirst - corr;
                    for l in 0..N {
                        dgam[m][l][i][j] += gi[(l, a)] * v;
                    }
                }
            }
        }
    }
    let mut r = [[[[0.0; N]; N]; N]; N];
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                // R(e_i, e_j) e_k = R^l e_l
                let mut up = [0.0; N];
                for (l, slot) in up.iter_mut().enumerate() {
                    let mut s = dgam[i][l][j][k] - dgam[j][l][i][k];
                    for m in 0..N {
                        s += gam[m][j][k] * gam[l][i][m] - gam[m][i][k] * gam[l][j][m];
                    }
                    *slot = s;
                }
                for l in 0..N {
                    r[i][j][k][l] = (0..N).map(|m| jet.g[(l, m)] * up[m]).sum();
                }
            }
        }
    }
    Some((gam, r))
}

/// Largest violation of the algebraic Riemann symmetries, including the
/// first Bianchi identity.
pub fn symmetry_residual<const N: usize>(r: &Riemann<N>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                for l in 0..N {
                    let v = r[i][j][k][l];
                    worst = worst
                        .max((v + r[j][i][k][l]).abs())
                        .max((v + r[i][j][l][k]).abs())
                        .max((v - r[k][l][i][j]).abs())
                        .max((v + r[j][k][i][l] + r[k][i][j][l]).abs());
                }
            }
        }
    }
    worst
}

/// `g(R(x, y) z, w)` for coordinate vectors.
pub fn riemann_apply<const N: usize>(r: &Riemann<N>, x: &[f64; N], y: &[f64; N], z: &[f64; N], w: &[f64; N]) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        for j in 0..N {
            let xy = x[i] * y[j];
            if xy == 0.0 {
                continue;
            }
            for k in 0..N {
                for l in 0..N {
                    s += xy * z[k] * w[l] * r[i][j][k][l];
                }
            }
        }
    }
    s
}

/// Finite-difference metric jet built from point values only.
pub fn fd_jet<const N: usize>(f: &impl Fn(&[f64; N]) -> Mat<N>, p: &[f64; N], h: f64) -> MetricJet<N> {
    MetricJet { g: f(p), dg: gradient(f, p, h), ddg: hessian(f, p, h) }
}

/// Jet from analytic first partials; second partials by differencing them.
pub fn jet_from_first<const N: usize>(
    f: &impl Fn(&[f64; N]) -> Mat<N>,
    d1: &impl Fn(&[f64; N]) -> [Mat<N>; N],
    p: &[f64; N],
    h: f64,
) -> MetricJet<N> {
    let dg = d1(p);
    let mut ddg = [[Mat::<N>::zeros(); N]; N];
    for m in 0..N {
        for i in 0..N {
            ddg[m][i] = partial(&|q: &[f64; N]| d1(q)[i], p, m, h);
        }
    }
    // symmetrise ∂_m ∂_i, which differencing leaves only approximately equal
    for m in 0..N {
        for i in (m + 1)..N {
            let avg = (ddg[m][i] + ddg[i][m]) * 0.5;
            ddg[m][i] = avg;
            ddg[i][m] = avg;
        }
    }
    MetricJet { g: f(p), dg, ddg }
}
