//! Geodesics, parallel transport, holonomy and Gauss–Bonnet with torsion.

use efimov_lab::connection::norm;
use efimov_lab::curves::{self, RegionSpec};
use efimov_lab::gallery;
use efimov_lab::immersion::Vec2;
use efimov_lab::connection::SurfaceConnectionData;

fn main() -> efimov_lab::Result<()> {
    let sphere = SurfaceConnectionData::levi_civita(gallery::sphere_polar());
    let q = [std::f64::consts::FRAC_PI_2, 0.0];
    let tr = curves::integrate_geodesic(&sphere, &q, &Vec2::new(1.0, 0.0), 1.2, 1e-3)?;
    println!("sphere meridian: end = {:?}, speed drift = {:.1e}", tr.end(), tr.speed_drift(&sphere)?);

    let w = Vec2::new(0.0, 1.0);
    let w1 = curves::parallel_transport(&sphere, &tr, &w)?;
    let m0 = sphere.metric3(&tr.start())?;
    let m1 = sphere.metric3(&tr.end())?;
    println!("transported norm {:.12} -> {:.12}", norm(&m0, &w), norm(&m1, &w1));

    let cap = RegionSpec::disk([0.8, 0.0], 0.5);
    for (label, data, region) in [
        ("spherical cap", sphere.clone(), cap),
        ("hyperbolic disk", SurfaceConnectionData::levi_civita(gallery::hyperbolic2()), RegionSpec::disk([0.0, 0.0], 0.5)),
        ("disk under nabla_t, t = 2", gallery::hyperbolic_deformed(2.0)?, RegionSpec::disk([1.0, 0.5], 0.3)),
    ] {
        let gb = curves::gauss_bonnet(&data, &region)?;
        let hol = curves::holonomy_defect(&data, &region, 400)?;
        println!(
            "{label:28} int K~ = {:+.6}, int kappa = {:+.6}, angles = {:.3}, residual = {:.1e}, holonomy defect = {:.1e}",
            gb.curvature_integral, gb.boundary_curvature, gb.exterior_angles, gb.residual, hol
        );
    }

    let json = r#"{"boundary": [
        {"kind": "line", "from": [0.0, 0.0], "to": [0.5, 0.0]},
        {"kind": "line", "from": [0.5, 0.0], "to": [0.0, 0.5]},
        {"kind": "line", "from": [0.0, 0.5], "to": [0.0, 0.0]}],
        "center": [0.15, 0.15]}"#;
    let tri = RegionSpec::from_json(json)?;
    let hyp = SurfaceConnectionData::levi_civita(gallery::hyperbolic2());
    let gb = curves::gauss_bonnet(&hyp, &tri)?;
    println!("hyperbolic triangle: exterior angles {:.6}, residual {:.1e}", gb.exterior_angles, gb.residual);
    Ok(())
}
