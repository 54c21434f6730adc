//! The dual connection B⁻¹∇B: torsion and curvature on an immersed patch,
//! and its degeneration to the Levi-Civita connection of III in space forms.

use efimov_lab::connection::SurfaceConnectionData;
use efimov_lab::gallery;
use efimov_lab::immersion::Vec2;

fn main() -> efimov_lab::Result<()> {
    let (patch, ambient) = gallery::g_lambda_slice(1.0, 0.2)?;
    let data = SurfaceConnectionData::immersion(patch, ambient);
    println!("g_lambda(1) slice z = 0");
    for q in [[0.0, 0.0], [0.3, 0.5], [-0.6, 1.0]] {
        let tau = data.torsion(&q)?;
        println!(
            "  q = {q:?}: tau = ({:+.6}, {:+.6}), |tau|_III = {:.6}, K~ = {:+.6} (frame route {:+.6})",
            tau[0],
            tau[1],
            data.torsion_norm(&q)?,
            data.ktilde(&q)?,
            data.ktilde_via_frame(&q)?
        );
    }

    println!("\nspace forms: torsion and dual Codazzi residual over a 9x9 grid");
    for (name, d, lo, hi) in gallery::space_form_surfaces() {
        let (t, c) = gallery::space_form_errors(&d, lo, hi, 9);
        println!("  {name:40} torsion {t:.1e}  codazzi {c:.1e}");
    }

    let q = [0.2, 0.1];
    let x = Vec2::new(1.0, 0.5);
    let y = Vec2::new(-0.3, 1.0);
    println!("\nnabla~_x y on the slice at {q:?}: {:?}", data.dual_connection_at(&q, &x, &y)?.as_slice());
    Ok(())
}
