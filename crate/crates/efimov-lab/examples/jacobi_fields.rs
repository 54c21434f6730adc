//! Jacobi-type fields: the sine solution, the sandwich estimate, the
//! lateral bound under constant torsion, and the deformation-rate formula.

use efimov_lab::connection::SurfaceConnectionData;
use efimov_lab::curves::{self, jacobi_generic, Segment};
use efimov_lab::gallery;

fn main() -> efimov_lab::Result<()> {
    let j = jacobi_generic(&|_t: f64| (1.0, 0.0, 0.0), [0.0, 0.0, 0.0, 1.0], 3.0, 1e-4)?;
    let err = j.samples.iter().map(|s| (s.y - s.t.sin()).abs()).fold(0.0, f64::max);
    println!("K~ = 1, tau = 0: sup |y - sin t| = {err:.1e}");
    println!("sandwich y'(0)t/2 <= y <= 2y'(0)t holds up to t = {:.4}", j.sandwich_time());

    let tau0 = 0.3;
    let j = jacobi_generic(&|_t: f64| (1.0, tau0, 0.0), [0.0, 0.0, 0.0, 1.0], 1.8, 1e-4)?;
    println!("constant tau_x = {tau0}: excess of |x| over tau0 y'(0) t^2 = {:.2e}", j.x_bound_excess(tau0, 1.8));

    let hyp = SurfaceConnectionData::levi_civita(gallery::hyperbolic2());
    let base = curves::integrate_geodesic(&hyp, &[0.0, 0.0], &efimov_lab::immersion::Vec2::new(0.5, 0.0), 1.0, 1e-3)?;
    let jf = curves::jacobi_field(&hyp, &base, [0.0, 0.0, 0.0, 1.0])?;
    let last = jf.samples.last().expect("samples");
    println!("hyperbolic plane, K~ = -1: y(1) = {:.8}, sinh(1) = {:.8}", last.y, 1.0f64.sinh());

    let circle = Segment::Arc { center: [0.0, 0.0], radius: 0.4, start: 0.0, end: 1.0 };
    let d = curves::deformation_rate_check(&hyp, &circle, &|t| 1.0 + 0.3 * t, 0.5)?;
    println!("deformation rate: formula {:.8}, measured {:.8}, residual {:.1e}", d.formula, d.measured, d.residual);
    Ok(())
}
