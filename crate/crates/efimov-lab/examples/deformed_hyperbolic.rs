//! The deformed hyperbolic connection ∇_t: torsion norm, curvature, and the
//! τ²/|K̃| landscape.

use efimov_lab::gallery::{deformed_curvature, deformed_curvature_printed, hyperbolic_deformed};

fn main() -> efimov_lab::Result<()> {
    for t in [0.0, 1.0, 2.0] {
        let d = hyperbolic_deformed(t)?;
        println!("t = {t}");
        for r in [0.1, 0.5, 1.0, 2.0, 3.0] {
            let q = [r, 0.3];
            let k = d.ktilde(&q)?;
            println!(
                "  r = {r:3}: |tau| = {:.10}, K~ = {:+.8}, t coth r - 1 = {:+.8}, t tanh r - 1 = {:+.8}",
                d.torsion_norm(&q)?,
                k,
                deformed_curvature(t, r),
                deformed_curvature_printed(t, r)
            );
        }
    }

    println!("\ntau^2 / |K~| as r grows (K~ -> t - 1)");
    for t in [0.25, 0.5, 0.75, 1.5, 2.0, 3.0] {
        let ratios: Vec<String> = [1.0, 3.0, 6.0].iter().map(|&r| format!("{:.4}", t * t / deformed_curvature(t, r).abs())).collect();
        println!("  t = {t:4}: {}", ratios.join("  "));
    }
    Ok(())
}
