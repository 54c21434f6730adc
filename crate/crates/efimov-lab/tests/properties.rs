//! Invariants as property tests. Every runner is seeded, so failures
//! reproduce exactly.

use efimov_lab::ambient::{self, Vec3};
use efimov_lab::asymptotics::asymptotic_frame;
use efimov_lab::connection::{check_hypothesis, inner, norm, torsion_bound_bruteforce, torsion_bound_tau0, SurfaceConnectionData};
use efimov_lab::curves::{self, jacobi_generic, RegionSpec, Segment};
use efimov_lab::expr::Expr;
use efimov_lab::gallery;
use efimov_lab::immersion::Vec2;
use efimov_lab::jet::symmetry_residual;
use efimov_lab::odelab::{solve_prop_edo, spiral_eigenvalues, Bump};
use efimov_lab::report::fmt_f64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

fn runner(seed: u8, cases: u32) -> TestRunner {
    TestRunner::new_with_rng(Config { cases, failure_persistence: None, ..Config::default() }, TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]))
}

fn saddle() -> SurfaceConnectionData {
    SurfaceConnectionData::immersion(gallery::saddle(), gallery::euclidean3())
}

fn slice() -> SurfaceConnectionData {
    let (p, m) = gallery::g_lambda_slice(0.7, 0.2).unwrap();
    SurfaceConnectionData::immersion(p, m)
}

#[test]
fn verdict_is_scale_invariant() {
    let strat = (-3.0..-0.1f64, 0.01..4.0f64, 0.0..4.0f64, 0.1..10.0f64);
    runner(1, 256)
        .run(&strat, |(k1, d2, d3, c)| {
            let (k2, k3) = (k1 + d2, k1 + d2 + d3);
            let a = check_hypothesis(k1, k2, k3).unwrap();
            let b = check_hypothesis(c * k1, c * k2, c * k3).unwrap();
            prop_assert_eq!(a.lhs, (k3 - k2) * (k3 - k2));
            prop_assert_eq!(a.regime, b.regime);
            if (a.lhs - a.rhs).abs() > 1e-9 * a.rhs.abs().max(1.0) {
                prop_assert_eq!(a.excluded, b.excluded);
            }
            prop_assert!((a.margin - (a.rhs - a.lhs)).abs() <= 1e-12 * a.rhs.abs().max(1.0));
            Ok(())
        })
        .unwrap();
}

#[test]
fn torsion_bound_matches_grid_and_is_symmetric() {
    let strat = (-4.0..-0.1f64, 0.01..5.0f64, 0.01..5.0f64);
    runner(2, 128)
        .run(&strat, |(k1, a, b)| {
            let (q1, q2) = (k1 + a, k1 + b);
            let closed = torsion_bound_tau0(q1.min(q2), q1.max(q2), k1).unwrap();
            let brute = torsion_bound_bruteforce(q1, q2, k1, 4000).unwrap();
            let swapped = torsion_bound_bruteforce(q2, q1, k1, 4000).unwrap();
            prop_assert!((closed - brute).abs() < 1e-9, "{} vs {}", closed, brute);
            prop_assert!((brute - swapped).abs() < 1e-9);
            Ok(())
        })
        .unwrap();
}

#[test]
fn sectional_curvature_lies_in_range() {
    let m = gallery::g_lambda(1.0, 0.2).unwrap();
    let strat = (prop::array::uniform3(-0.9..0.9f64), prop::array::uniform3(-1.0..1.0f64), prop::array::uniform3(-1.0..1.0f64));
    runner(3, 128)
        .run(&strat, |(p, x, y)| {
            let p = [p[0], p[1], p[2] * 0.15];
            let (x, y) = (Vec3::from(x), Vec3::from(y));
            prop_assume!(x.cross(&y).norm() > 0.05);
            let s = m.curvature_sample(&p).unwrap();
            let k = ambient::riemann_sectional(&m, &p.into(), &x, &y).unwrap();
            prop_assert!(k >= s.k_min - 1e-9 && k <= s.k_max + 1e-9, "{} not in [{}, {}]", k, s.k_min, s.k_max);
            prop_assert!(symmetry_residual(&s.riemann) < 1e-6);
            Ok(())
        })
        .unwrap();
}

#[test]
fn dual_connection_is_compatible_with_third_form() {
    for (seed, data, half) in [(4, saddle(), 0.8), (5, slice(), 1.5)] {
        runner(seed, 48)
            .run(&(-half..half, -half..half), |(u, v)| {
                let r = data.compatibility_residual(&[u, v]).unwrap();
                prop_assert!(r < 1e-6, "{} at ({}, {})", r, u, v);
                Ok(())
            })
            .unwrap();
    }
}

#[test]
fn torsion_tensor_matches_torsion_vector() {
    let data = slice();
    let strat = (-1.5..1.5f64, -1.5..1.5f64, prop::array::uniform2(-1.0..1.0f64), prop::array::uniform2(-1.0..1.0f64));
    runner(6, 48)
        .run(&strat, |(u, v, x, y)| {
            let q = [u, v];
            let (x, y) = (Vec2::from(x), Vec2::from(y));
            let t = data.dual_connection_at(&q, &x, &y).unwrap() - data.dual_connection_at(&q, &y, &x).unwrap();
            let m = data.metric3(&q).unwrap();
            let expect = data.torsion(&q).unwrap() * ((x[0] * y[1] - x[1] * y[0]) * m.determinant().sqrt());
            prop_assert!((t - expect).norm() < 1e-7 * (1.0 + expect.norm()), "{:?} vs {:?}", t, expect);
            Ok(())
        })
        .unwrap();
}

#[test]
fn geodesics_keep_speed_and_reverse() {
    let data = SurfaceConnectionData::levi_civita(gallery::hyperbolic2());
    runner(7, 24)
        .run(&(-0.3..0.3f64, -0.3..0.3f64, 0.0..std::f64::consts::TAU), |(u, v, a)| {
            let q = [u, v];
            let m = data.metric3(&q).unwrap();
            let d = Vec2::new(a.cos(), a.sin());
            let d = d / norm(&m, &d);
            let fwd = curves::integrate_geodesic(&data, &q, &d, 0.4, 1e-3).unwrap().require_complete().unwrap();
            prop_assert!(fwd.speed_drift(&data).unwrap() < 1e-9);
            let end = fwd.samples.last().unwrap();
            let back = curves::integrate_geodesic(&data, &end.q, &(-end.velocity), 0.4, 1e-3).unwrap();
            let b = back.end();
            prop_assert!((b[0] - u).abs() < 1e-9 && (b[1] - v).abs() < 1e-9);
            Ok(())
        })
        .unwrap();
}

#[test]
fn transport_preserves_inner_products_with_torsion() {
    let data = gallery::hyperbolic_deformed(1.5).unwrap();
    let strat = (0.5..2.0f64, -1.0..1.0f64, prop::array::uniform2(-1.0..1.0f64), prop::array::uniform2(-1.0..1.0f64));
    runner(8, 24)
        .run(&strat, |(r, th, a, b)| {
            let q = [r, th];
            let m0 = data.metric3(&q).unwrap();
            let d = Vec2::new(1.0, 0.3);
            let d = d / norm(&m0, &d);
            let tr = curves::integrate_geodesic(&data, &q, &d, 0.5, 1e-3).unwrap().require_complete().unwrap();
            let (a, b) = (Vec2::from(a), Vec2::from(b));
            let a1 = curves::parallel_transport(&data, &tr, &a).unwrap();
            let b1 = curves::parallel_transport(&data, &tr, &b).unwrap();
            let m1 = data.metric3(&tr.end()).unwrap();
            prop_assert!((inner(&m0, &a, &b) - inner(&m1, &a1, &b1)).abs() < 1e-9);
            Ok(())
        })
        .unwrap();
}

#[test]
fn asymptotic_frame_is_unit_and_null() {
    let data = saddle();
    runner(9, 64)
        .run(&(-0.9..0.9f64, -0.9..0.9f64), |(u, v)| {
            let f = asymptotic_frame(&data, &[u, v]).unwrap();
            let m = data.metric3(&[u, v]).unwrap();
            prop_assert!((norm(&m, &f.u) - 1.0).abs() < 1e-12 && (norm(&m, &f.v) - 1.0).abs() < 1e-12);
            prop_assert!(f.theta > 0.0 && f.theta < std::f64::consts::PI);
            prop_assert!(f.residual(&data).unwrap() < 1e-10);
            Ok(())
        })
        .unwrap();
}

#[test]
fn edo_first_return_and_zero_are_bounded() {
    runner(10, 48)
        .run(&(0.25..4.0f64, -1.0..1.0f64, -1.0..1.0f64), |(eps, a, b)| {
            // |u| ≤ 0.6/ε + 0.3/ε < 1/ε
            let (a, b) = (0.6 * a / eps, 0.3 * b / eps);
            let u = move |s: f64| a + b * s.sin();
            let sol = solve_prop_edo(&u, eps, 1e-3).unwrap();
            prop_assert!(0.0 < sol.s0 && sol.s0 <= sol.s1 && sol.s1 <= sol.s1_bound() + 1e-9);
            prop_assert!(sol.z_decreasing());
            prop_assert!(sol.m0 >= 1.0 && sol.m0 <= sol.m0_bound());
            Ok(())
        })
        .unwrap();
}

#[test]
fn spiral_spectrum_matches_characteristic_polynomial() {
    runner(11, 256)
        .run(&(-3.0..3.0f64, 0.1..3.0f64, -3.0..3.0f64), |(t, l, k)| {
            let s = spiral_eigenvalues(t, l, k);
            // eigenvalues of [[t, l], [-k, 0]] solve μ² − tμ + lk = 0
            if s.oscillatory {
                prop_assert!((s.alpha * s.alpha + s.beta * s.beta - l * k).abs() < 1e-12 * (1.0 + l * k.abs()));
            } else {
                let (r1, r2) = (s.alpha + s.beta, s.alpha - s.beta);
                prop_assert!((r1 * r2 - l * k).abs() < 1e-9 * (1.0 + (l * k).abs()));
            }
            prop_assert!((2.0 * s.alpha - t).abs() < 1e-15);
            Ok(())
        })
        .unwrap();
}

#[test]
fn jacobi_constant_curvature() {
    runner(12, 24)
        .run(&(0.2..3.0f64), |c| {
            let j = jacobi_generic(&move |_t: f64| (c, 0.0, 0.0), [0.0, 0.0, 0.0, 1.0], 1.0, 1e-3).unwrap();
            let w = c.sqrt();
            let err = j.samples.iter().map(|s| (s.y - (w * s.t).sin() / w).abs()).fold(0.0, f64::max);
            prop_assert!(err < 1e-10, "{}", err);
            Ok(())
        })
        .unwrap();
}

#[test]
fn bumps_are_nonnegative_with_quarter_width_mass() {
    runner(13, 64)
        .run(&(-5.0..5.0f64, 0.01..3.0f64), |(c, w)| {
            let b = Bump { center: c, width: w };
            let n = 4000;
            let mut mass = 0.0;
            for i in 0..n {
                let x = c - w / 2.0 + w * (i as f64 + 0.5) / n as f64;
                let (phi, _, _) = b.eval(x);
                prop_assert!(phi >= 0.0);
                mass += phi * w / n as f64;
            }
            // a unit cubic B-spline rescaled to support [c − w/2, c + w/2]
            prop_assert!((mass - w / 4.0).abs() < 1e-6 * w, "{}", mass);
            prop_assert_eq!(b.eval(c + w).0, 0.0);
            Ok(())
        })
        .unwrap();
}

#[test]
fn csv_numbers_round_trip() {
    runner(14, 1024)
        .run(&any::<f64>(), |x| {
            prop_assume!(x.is_finite());
            prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
            Ok(())
        })
        .unwrap();
}

#[test]
fn expressions_follow_arithmetic_precedence() {
    runner(15, 256)
        .run(&(-5.0..5.0f64, -5.0..5.0f64, 0.5..3.0f64), |(a, b, c)| {
            let e = Expr::parse("u - v / w^2 * 3 + sin(u) * -v", &["u", "v", "w"]).unwrap();
            let got = e.eval(&[a, b, c]).unwrap();
            let want = a - b / c.powi(2) * 3.0 + a.sin() * -b;
            prop_assert!((got - want).abs() < 1e-12 * (1.0 + want.abs()));
            Ok(())
        })
        .unwrap();
}

#[test]
fn region_specs_round_trip_through_json() {
    runner(16, 64)
        .run(&(prop::array::uniform2(-1.0..1.0f64), 0.1..1.0f64), |(c, r)| {
            let region = RegionSpec {
                boundary: vec![
                    Segment::Arc { center: c, radius: r, start: 0.0, end: std::f64::consts::PI },
                    Segment::Line { from: [c[0] - r, c[1] + r * std::f64::consts::PI.sin()], to: [c[0] + r, c[1]] },
                ],
                center: c,
                order: 12,
                panels: 4,
            };
            let back = RegionSpec::from_json(&serde_json::to_string(&region).unwrap()).unwrap();
            prop_assert_eq!(back, region);
            Ok(())
        })
        .unwrap();
}
