//! Closed-form oracles on polar charts, derived by hand rather than
//! through the library's own curvature routines.

use efimov_lab::connection::SurfaceConnectionData;
use efimov_lab::curves::{curvature_integral, gauss_bonnet, RegionSpec, Segment};
use efimov_lab::gallery;

/// `[a, b] × [0, φ]` in `(r, θ)`, counter-clockwise.
fn polar_rect(a: f64, b: f64, phi: f64) -> RegionSpec {
    let c = [[a, 0.0], [b, 0.0], [b, phi], [a, phi]];
    RegionSpec {
        boundary: (0..4).map(|i| Segment::Line { from: c[i], to: c[(i + 1) % 4] }).collect(),
        center: [(a + b) / 2.0, phi / 2.0],
        order: 24,
        panels: 16,
    }
}

const CASES: [(f64, f64, f64); 3] = [(0.3, 1.1, 1.0), (0.5, 2.0, 2.5), (1.2, 1.4, 0.2)];

#[test]
fn sphere_band_curvature_is_its_area() {
    let data = SurfaceConnectionData::levi_civita(gallery::sphere_polar());
    for (a, b, phi) in CASES {
        let got = curvature_integral(&data, &polar_rect(a, b, phi)).unwrap();
        let want = phi * (a.cos() - b.cos());
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }
}

#[test]
fn hyperbolic_band_curvature_is_minus_its_area() {
    let data = SurfaceConnectionData::levi_civita(gallery::hyperbolic_polar());
    for (a, b, phi) in CASES {
        let got = curvature_integral(&data, &polar_rect(a, b, phi)).unwrap();
        let want = -phi * (b.cosh() - a.cosh());
        assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "{got} vs {want}");
    }
}

#[test]
fn deformed_band_curvature() {
    // ∫∫ (t coth r − 1) sinh r dr dθ
    for t in [0.0, 0.5, 2.0] {
        let data = gallery::hyperbolic_deformed(t).unwrap();
        for (a, b, phi) in CASES {
            let got = curvature_integral(&data, &polar_rect(a, b, phi)).unwrap();
            let want = phi * (t * (b.sinh() - a.sinh()) - (b.cosh() - a.cosh()));
            assert!((got - want).abs() < 1e-8 * want.abs().max(1.0), "t = {t}: {got} vs {want}");
        }
    }
}

#[test]
fn band_gauss_bonnet_closes() {
    // four right angles: exterior angle sum 2π
    let data = SurfaceConnectionData::levi_civita(gallery::sphere_polar());
    let r = gauss_bonnet(&data, &polar_rect(0.5, 2.0, 2.5)).unwrap();
    assert!((r.exterior_angles - 2.0 * std::f64::consts::PI).abs() < 1e-10);
    assert!(r.residual.abs() < 1e-9, "{r:?}");
}

#[test]
fn latitude_geodesic_curvature() {
    // the circle r = r₀ traversed over θ ∈ [0, φ] has κ = cot r₀ and
    // length φ sin r₀, so the density is φ cos r₀ up to orientation
    let data = SurfaceConnectionData::levi_civita(gallery::sphere_polar());
    for r0 in [0.2, 0.9, 1.5, 2.6] {
        let seg = Segment::Line { from: [r0, 0.0], to: [r0, 1.7] };
        for t in [0.0, 0.4, 1.0] {
            let got = seg.curvature_density(&data, t).unwrap();
            assert!((got.abs() - 1.7 * r0.cos().abs()).abs() < 1e-9, "r₀ = {r0}: {got}");
        }
    }
}

#[test]
fn clifford_torus_third_form_equals_first() {
    let data = SurfaceConnectionData::immersion(gallery::clifford_torus(), gallery::sphere3());
    for q in [[0.1, 0.2], [1.0, -0.7], [2.5, 3.0]] {
        let i = data.first_form(&q).unwrap();
        let iii = data.metric3(&q).unwrap();
        assert!((i - iii).norm() < 1e-9, "{i} {iii}");
        assert!(data.ktilde(&q).unwrap().abs() < 1e-6);
    }
}
