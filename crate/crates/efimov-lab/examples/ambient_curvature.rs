//! Sectional curvature ranges of the gallery metrics, and the six
//! curvature entries of g_λ against their closed forms.

use efimov_lab::ambient::sectional_range;
use efimov_lab::gallery::{self, G_LAMBDA_ENTRY_NAMES};

fn main() -> efimov_lab::Result<()> {
    let p = [0.2, -0.3, 0.1];
    for (name, m) in [("euclidean3", gallery::euclidean3()), ("sphere3", gallery::sphere3()), ("hyperbolic3", gallery::hyperbolic3())] {
        let (lo, hi) = sectional_range(&m, &p.into())?;
        println!("{name:12} K_m = {lo:+.8}  K_M = {hi:+.8}");
    }

    for lambda in [0.5, 1.0, 3.0] {
        let m = gallery::g_lambda(lambda, gallery::g_lambda_default_z(lambda))?;
        let (lo, hi) = sectional_range(&m, &[0.0, 0.5, 0.0].into())?;
        println!("\ng_lambda({lambda}) at (0, 0.5, 0): K_m = {lo:+.6}, K_M = {hi:+.6}");
        let errs = gallery::g_lambda_entry_errors(lambda, 0.0, [11, 11, 1])?;
        for (n, e) in G_LAMBDA_ENTRY_NAMES.iter().zip(errs) {
            println!("  {n:16} max error on z = 0: {e:.2e}");
        }
    }
    Ok(())
}
