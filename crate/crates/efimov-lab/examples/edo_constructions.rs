//! The oscillating scalar ODE, its mean-matrix spectrum, and the glued
//! compactly supported supersolution.

use efimov_lab::odelab::{construct_edo7, solve_prop_edo, spiral_eigenvalues, zero_crossings, Bump};

fn main() -> efimov_lab::Result<()> {
    let zero = |_s: f64| 0.0;
    let sol = solve_prop_edo(&zero, 1.0, 1e-4)?;
    println!("u = 0, eps = 1: s0 = {:.9} (2 atan 4 = {:.9})", sol.s0, 2.0 * 4.0f64.atan());
    println!("                s1 = {:.9} (pi - atan 1/4 = {:.9})", sol.s1, std::f64::consts::PI - 0.25f64.atan());
    println!("                max y = {:.9} (sqrt 17 = {:.9})", sol.y_max, 17f64.sqrt());

    let wave = |s: f64| 0.8 * (1.3 * s).sin();
    for eps in [0.25, 0.5, 1.0] {
        let s = solve_prop_edo(&wave, eps, 1e-3)?;
        println!("u = 0.8 sin(1.3 s), eps = {eps}: s1 = {:.5} <= pi/sqrt(eps) = {:.5}, M0 = {:.4}", s.s1, s.s1_bound(), s.m0);
        let sp = s.mean_spectrum(&wave, s.s0);
        println!("  mean matrix at s0: alpha = {:+.5}, beta = {:.5}, oscillatory = {}", sp.alpha, sp.beta, sp.oscillatory);
    }
    println!("first zeros for eps = 1: {:?}", zero_crossings(&wave, 1.0, 1e-3, 3)?);

    let sp = spiral_eigenvalues(0.5, 1.0, 2.0);
    println!("spiral [[0.5, 1], [-2, 0]]: alpha = {}, beta = {:.6}", sp.alpha, sp.beta);

    let y = construct_edo7(&wave, 0.5, 3.0, 1e-3)?;
    let (lo, hi) = y.support();
    let bumps = Bump::family(50, lo - 1.0, hi + 1.0, 4e-3, (hi - lo) / 2.0);
    let worst = bumps.iter().map(|b| y.weak_residual(&wave, b)).fold(f64::INFINITY, f64::min);
    println!("\nglued solution: support [{lo:.4}, {hi:.4}], floor on core {:.6}, Lipschitz {:.4}", y.floor_on_core(), y.lipschitz());
    println!("  {} junctions, smallest slope jump {:.4}, worst weak residual {worst:.2e}", y.junctions.len(), y.min_slope_jump());
    Ok(())
}
