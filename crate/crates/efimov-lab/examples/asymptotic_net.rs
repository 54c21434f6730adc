//! Asymptotic directions, the covariant rate identities, an asymptotic
//! trace, and the net expansion bounds on the saddle.

use efimov_lab::asymptotics::{asymptotic_frame, covariant_rate_check, net_expansion_check, trace_asymptotic, Which};
use efimov_lab::connection::SurfaceConnectionData;
use efimov_lab::gallery;

fn main() -> efimov_lab::Result<()> {
    let saddle = SurfaceConnectionData::immersion(gallery::saddle(), gallery::euclidean3());
    let q = [0.2, -0.1];
    let f = asymptotic_frame(&saddle, &q)?;
    println!("frame at {q:?}: U = {:?}, V = {:?}, theta = {:.6}, k = {:.6}", f.u.as_slice(), f.v.as_slice(), f.theta, f.k);
    println!("  frame residual {:.1e}", f.residual(&saddle)?);

    let r = covariant_rate_check(&saddle, &q)?;
    println!("rate identities: residuals {:.1e} / {:.1e} (printed-sign forms {:.1e} / {:.1e})", r.vu_residual, r.uv_residual, r.printed_vu_residual, r.printed_uv_residual);

    let (slice, m) = gallery::g_lambda_slice(0.5, 0.2)?;
    let torsion = SurfaceConnectionData::immersion(slice, m);
    let r = covariant_rate_check(&torsion, &[0.1, 0.3])?;
    println!("with torsion (g_lambda(0.5) slice): residuals {:.1e} / {:.1e}", r.vu_residual, r.uv_residual);

    let tr = trace_asymptotic(&saddle, &[0.1, 0.0], Which::U, 0.6, 1e-3)?;
    println!("\nU-curve of length 0.6: delta = {:.6}, sigma = {:.6}, quasi-geodesic defect = {:.2e}, end = {:?}", tr.delta, tr.sigma, tr.quasi_defect, tr.end());

    let net = net_expansion_check(&saddle, &[0.0, 0.0], (0.4, 0.4), (8, 8), 1e-3)?;
    println!(
        "net: sup|U.alpha|/alpha = {:.4}, sup|V.beta|/beta = {:.4}, tau0 + 2 tau1 = {:.4}, pass = {}",
        net.sup_u_alpha, net.sup_v_beta, net.constant, net.pass
    );
    Ok(())
}
