//! Building a connection from a solution of the hyperbolic Monge–Ampère
//! system det H = −b, d^∇H = τ ⊗ ν_σ, and checking K̃ = −K/b and
//! ‖τ̃‖ = ‖τ‖_σ/b.

use efimov_lab::gallery::{exterior_derivative, monge_ampere_hypothesis, unimodular_hyperbolic_field, virtual_third_form};
use efimov_lab::connection::SurfaceMetric;
use efimov_lab::ambient::ChartBox;
use efimov_lab::immersion::{Mat2, Vec2};

fn main() -> efimov_lab::Result<()> {
    // conformal metric e^{2φ}(du² + dv²)
    let phi = |q: &[f64; 2]| 0.2 * q[0] - 0.1 * q[1] * q[1];
    let sigma = SurfaceMetric::new("conformal", ChartBox::new([-1.0, -1.0], [1.0, 1.0]), move |q| Mat2::identity() * (2.0 * phi(q)).exp());
    let h = unimodular_hyperbolic_field(|q: &[f64; 2]| 1.2 + 0.3 * q[0] * q[1], |q: &[f64; 2]| 0.4 * q[0] + 0.2 * q[1]);

    // τ is whatever d^∇H measures, so the system holds by construction
    let (s2, h2) = (sigma.clone(), h.clone());
    let tau = move |q: &[f64; 2]| -> Vec2 {
        let d = exterior_derivative(&s2, &h2, q).unwrap_or_else(|_| Vec2::zeros());
        d / s2.metric(q).map(|m| m.determinant().sqrt()).unwrap_or(1.0)
    };
    let samples: Vec<[f64; 2]> = (0..20).map(|i| {
        let a = i as f64 * 0.618_033_988_75 % 1.0;
        let b = i as f64 * 0.754_877_666_2 % 1.0;
        [1.2 * a - 0.6, 1.2 * b - 0.6]
    }).collect();
    let (_data, rep) = virtual_third_form(sigma, h, |_| 1.0, tau, &samples)?;
    println!("K~ + K/b:            {:.2e}", rep.curvature_identity);
    println!("|tau~| - |tau|/b:    {:.2e}", rep.torsion_identity);
    println!("det H + b:           {:.2e}", rep.determinant);
    println!("system residual:     {:.2e}", rep.system);
    println!("sup |tau|_sigma:     {:.4}", rep.tau_sup);
    println!("b_M tau0^2 < 4 eps0 b_m^2 with eps0 = 1: {}", monge_ampere_hypothesis(1.0, 1.0, rep.tau_sup, 1.0));
    Ok(())
}
