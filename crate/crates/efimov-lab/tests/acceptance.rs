//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero when
//! any criterion fails.

use efimov_lab::ambient::ChartBox;
use efimov_lab::connection::{check_hypothesis, torsion_bound_bruteforce, torsion_bound_tau0, SurfaceConnectionData, SurfaceMetric};
use efimov_lab::curves::{self, jacobi_generic, RegionSpec};
use efimov_lab::gallery::{self, exterior_derivative, unimodular_hyperbolic_field, virtual_third_form};
use efimov_lab::immersion::{gauss_residual, Mat2, Vec2};
use efimov_lab::odelab::{construct_edo7, solve_prop_edo, Bump};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn c1_g_lambda_entries() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for lambda in [0.5, 1.0, 3.0] {
        match gallery::g_lambda_entry_errors(lambda, 0.1, [11, 11, 3]) {
            Ok(e) => {
                let m = e.iter().cloned().fold(0.0, f64::max);
                worst = if m.is_nan() { f64::NAN } else { worst.max(m) };
                parts.push(format!("lambda={lambda}: {m:.3e}"));
            }
            Err(e) => return outcome(false, format!("lambda={lambda}: {e}")),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    // the z = 0 slice, where the closed forms are exact
    let slice = [0.5, 1.0, 3.0]
        .iter()
        .map(|&l| gallery::g_lambda_entry_errors(l, 0.0, [11, 11, 1]).map(|e| e.iter().cloned().fold(0.0, f64::max)).unwrap_or(f64::NAN))
        .fold(0.0, f64::max);
    outcome(
        worst < 1e-3 && secs < 30.0,
        format!("max err {worst:.3e} (tol 1e-3; {}), {secs:.1}s; on z = 0 alone {slice:.2e}", parts.join(", ")),
    )
}

fn c2_hypothesis_boundary() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for lambda in [1.0f64, 2.0, 3.0, 5.0] {
        let l2 = lambda * lambda;
        match check_hypothesis(-1.0, l2 - 1.0 - 2.0 * lambda, l2 - 1.0 + 2.0 * lambda) {
            Ok(v) => {
                let good = v.lhs == 16.0 * l2 && v.rhs == 16.0 * l2 - 32.0 * lambda && !v.excluded;
                ok &= good;
                notes.push(format!("lambda={lambda}: lhs {} rhs {} excluded {}", v.lhs, v.rhs, v.excluded));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("lambda={lambda}: {e}"));
            }
        }
    }
    match check_hypothesis(-1.0, 0.0, 0.0) {
        Ok(v) => {
            ok &= v.excluded;
            notes.push(format!("Efimov excluded {}", v.excluded));
        }
        Err(e) => {
            ok = false;
            notes.push(e.to_string());
        }
    }
    outcome(ok, notes.join("; "))
}

fn c3_torsion_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a30);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let k1: f64 = rng.gen_range(-4.0..-0.1);
        let q1: f64 = k1 + rng.gen_range(0.01..5.0);
        let q2: f64 = k1 + rng.gen_range(0.01..5.0);
        let closed = torsion_bound_tau0(q1.min(q2), q1.max(q2), k1);
        let brute = torsion_bound_bruteforce(q1, q2, k1, 10_000);
        match (closed, brute) {
            (Ok(a), Ok(b)) => worst = worst.max((a - b).abs()),
            _ => return outcome(false, format!("rejected admissible triple ({q1}, {q2}, {k1})")),
        }
    }
    outcome(worst <= 1e-6, format!("max |closed - brute| = {worst:.2e} over 100 triples (tol 1e-6)"))
}

fn c4_deformed_connection() -> Outcome {
    let rs = linspace(0.1, 3.0, 100);
    let mut torsion = 0.0f64;
    let mut printed = 0.0f64;
    let mut derived = 0.0f64;
    for t in [0.0, 1.0, 2.0] {
        let d = match gallery::hyperbolic_deformed(t) {
            Ok(d) => d,
            Err(e) => return outcome(false, e.to_string()),
        };
        for (i, &r) in rs.iter().enumerate() {
            let q = [r, -1.0 + 2.0 * i as f64 / 99.0];
            let tn = d.torsion_norm(&q).unwrap_or(f64::NAN);
            let k = d.ktilde(&q).unwrap_or(f64::NAN);
            torsion = torsion.max((tn - t).abs());
            printed = printed.max((k - gallery::deformed_curvature_printed(t, r)).abs());
            derived = derived.max((k - gallery::deformed_curvature(t, r)).abs());
        }
    }
    outcome(
        torsion <= 1e-8 && printed <= 1e-5,
        format!("torsion err {torsion:.2e} (tol 1e-8); vs t tanh r - 1: {printed:.3e} (tol 1e-5); vs t coth r - 1: {derived:.2e}"),
    )
}

fn c5_space_forms() -> Outcome {
    let mut worst_t = 0.0f64;
    let mut worst_c = 0.0f64;
    for (_, d, lo, hi) in gallery::space_form_surfaces() {
        let (t, c) = gallery::space_form_errors(&d, lo, hi, 11);
        worst_t = if t.is_nan() { f64::NAN } else { worst_t.max(t) };
        worst_c = if c.is_nan() { f64::NAN } else { worst_c.max(c) };
    }
    outcome(worst_t < 1e-6 && worst_c < 1e-6, format!("torsion {worst_t:.2e}, dual Codazzi {worst_c:.2e} (tol 1e-6)"))
}

fn c6_jacobi() -> Outcome {
    let sine = jacobi_generic(&|_t: f64| (1.0, 0.0, 0.0), [0.0, 0.0, 0.0, 1.0], 3.0, 1e-4);
    let sandwich = jacobi_generic(&|_t: f64| (1.0, 0.0, 0.0), [0.0, 0.0, 0.0, 1.0], 1.8, 1e-4);
    let tau0 = 0.4;
    let lateral = jacobi_generic(&|_t: f64| (1.0, tau0, 0.0), [0.0, 0.0, 0.0, 1.0], 1.8, 1e-4);
    let (sine, sandwich, lateral) = match (sine, sandwich, lateral) {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        _ => return outcome(false, "integration failed".into()),
    };
    let err = sine.samples.iter().map(|s| (s.y - s.t.sin()).abs()).fold(0.0, f64::max);
    let sandwich_ok = sandwich.samples.iter().filter(|s| s.t > 0.0).all(|s| s.t / 2.0 <= s.y && s.y <= 2.0 * s.t);
    let excess = lateral.x_bound_excess(tau0, 1.8);
    outcome(
        err <= 1e-8 && sandwich_ok && excess <= 0.0,
        format!("sine sup err {err:.2e} (tol 1e-8); sandwich on t <= 1.8: {sandwich_ok}; |x| - tau0 t^2 excess {excess:.2e}"),
    )
}

fn c7_gauss_bonnet() -> Outcome {
    let cases: Vec<(&str, efimov_lab::Result<SurfaceConnectionData>, RegionSpec, f64)> = vec![
        ("spherical cap", Ok(SurfaceConnectionData::levi_civita(gallery::sphere_polar())), RegionSpec::disk([0.8, 0.3], 0.5), 1e-4),
        ("hyperbolic disk", Ok(SurfaceConnectionData::levi_civita(gallery::hyperbolic2())), RegionSpec::disk([0.1, -0.1], 0.45), 1e-4),
        ("nabla_t disk (t = 2)", gallery::hyperbolic_deformed(2.0), RegionSpec::disk([1.2, 0.4], 0.5), 1e-3),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, data, region, tol) in cases {
        let data = match data {
            Ok(d) => d,
            Err(e) => return outcome(false, e.to_string()),
        };
        let res = curves::gauss_bonnet_residual(&data, &region).unwrap_or(f64::NAN);
        let hol = curves::holonomy_defect(&data, &region, 400).unwrap_or(f64::NAN);
        ok &= res < tol && hol <= 1e-3;
        notes.push(format!("{name}: residual {res:.1e} (tol {tol:e}), holonomy {hol:.1e}"));
    }
    outcome(ok, notes.join("; "))
}

fn c8_edo() -> Outcome {
    let zero = |_s: f64| 0.0;
    let sol = match solve_prop_edo(&zero, 1.0, 1e-4) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let e0 = (sol.s0 - 2.0 * 4.0f64.atan()).abs();
    let e1 = (sol.s1 - (PI - 0.25f64.atan())).abs();
    let ey = (sol.y_max - 17f64.sqrt()).abs();
    let mut ok = e0 <= 1e-6 && e1 <= 1e-6 && ey <= 1e-6;
    for eps in [0.25, 1.0, 4.0] {
        match solve_prop_edo(&zero, eps, 1e-4) {
            Ok(s) => ok &= s.s1 <= PI / eps.sqrt(),
            Err(_) => ok = false,
        }
    }
    let wave = |s: f64| 0.8 * (1.3 * s).sin();
    let mut worst_weak = f64::INFINITY;
    let mut contracts = true;
    type Profile<'a> = (&'a dyn Fn(f64) -> f64, f64, f64);
    let profiles: [Profile; 2] = [(&zero, 1.0, 1.0), (&wave, 0.5, 3.0)];
    for (u, eps, n1) in profiles {
        let y = match construct_edo7(u, eps, n1, 1e-3) {
            Ok(y) => y,
            Err(e) => return outcome(false, e.to_string()),
        };
        let (lo, hi) = y.support();
        let bumps = Bump::family(50, lo - 1.0, hi + 1.0, 4e-3, (hi - lo) / 2.0);
        worst_weak = worst_weak.min(bumps.iter().map(|b| y.weak_residual(u, b)).fold(f64::INFINITY, f64::min));
        contracts &= lo >= -n1 - y.m1_support && hi <= n1 + y.m1_support;
        contracts &= y.floor_on_core() >= 1.0 - 1e-9;
        contracts &= y.lipschitz() <= y.m1 && y.max_value() <= y.m1;
    }
    ok &= worst_weak >= -1e-6 && contracts;
    outcome(
        ok,
        format!("s0 err {e0:.1e}, s1 err {e1:.1e}, max y err {ey:.1e} (tol 1e-6); edo7 worst weak residual {worst_weak:.1e} (tol -1e-6), contracts {contracts}"),
    )
}

fn c9_clifford() -> Outcome {
    let torus = gallery::clifford_torus();
    let s3 = gallery::sphere3();
    let mut ki = 0.0f64;
    let mut ke = 0.0f64;
    let mut gr = 0.0f64;
    let mut third = 0.0f64;
    for &u in &linspace(-PI, PI, 21) {
        for &v in &linspace(-PI, PI, 21) {
            let q = [u, v];
            match (torus.fundamental_forms(&s3, &q), gauss_residual(&torus, &s3, &q)) {
                (Ok(f), Ok(g)) => {
                    ki = ki.max(f.k_i.abs());
                    ke = ke.max((f.k_e + 1.0).abs());
                    gr = gr.max(g);
                    third = third.max((f.third - f.first).abs().max());
                }
                _ => return outcome(false, format!("evaluation failed at {q:?}")),
            }
        }
    }
    outcome(
        ki < 1e-8 && ke < 1e-8 && gr < 1e-8,
        format!("|K_I| {ki:.2e}, |det B + 1| {ke:.2e}, Gauss residual {gr:.2e} (tol 1e-8); |III - I| {third:.1e}"),
    )
}

fn c10_virtual_third_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3e5a);
    let mut worst = [0.0f64; 4];
    for _ in 0..20 {
        let p: [f64; 8] = std::array::from_fn(|_| rng.gen_range(-0.3..0.3));
        let c = rng.gen_range(0.7..1.5);
        let sigma = SurfaceMetric::new("conformal", ChartBox::new([-1.0, -1.0], [1.0, 1.0]), move |q| {
            Mat2::identity() * (2.0 * (p[0] * q[0] + p[1] * q[1] + p[2] * q[0] * q[1])).exp()
        });
        let unit = unimodular_hyperbolic_field(move |q: &[f64; 2]| (p[3] * q[0] + p[4] * q[1]).exp(), move |q: &[f64; 2]| p[5] + p[6] * q[0] + p[7] * q[1] * q[1]);
        let h = move |q: &[f64; 2]| unit(q) * c;
        let (s2, h2) = (sigma.clone(), h.clone());
        let tau = move |q: &[f64; 2]| {
            let d = exterior_derivative(&s2, &h2, q).unwrap_or_else(|_| Vec2::repeat(f64::NAN));
            d / s2.metric(q).map(|m| m.determinant().sqrt()).unwrap_or(f64::NAN)
        };
        let samples: Vec<[f64; 2]> = (0..5).map(|_| [rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)]).collect();
        match virtual_third_form(sigma, h, move |_| c * c, tau, &samples) {
            Ok((_, r)) => {
                for (w, x) in worst.iter_mut().zip([r.curvature_identity, r.torsion_identity, r.determinant, r.system]) {
                    *w = if x.is_nan() { f64::NAN } else { w.max(x) };
                }
            }
            Err(e) => return outcome(false, e.to_string()),
        }
    }
    outcome(
        worst[0] <= 1e-8 && worst[1] <= 1e-8,
        format!("K~ + K/b {:.2e}, |tau~| - |tau|/b {:.2e} (tol 1e-8); det H + b {:.1e}, d^nabla H residual {:.1e}", worst[0], worst[1], worst[2], worst[3]),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("g_lambda Riemann entries", c1_g_lambda_entries),
        ("hypothesis boundary regression", c2_hypothesis_boundary),
        ("torsion bound oracle", c3_torsion_bound),
        ("deformed hyperbolic connection", c4_deformed_connection),
        ("constant-curvature degeneration", c5_space_forms),
        ("Jacobi suite", c6_jacobi),
        ("Gauss-Bonnet with torsion", c7_gauss_bonnet),
        ("scalar ODE constructions", c8_edo),
        ("Clifford torus", c9_clifford),
        ("virtual third form", c10_virtual_third_form),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("{} {:>2}. {name}: {} [{:.1}s]", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail, t.elapsed().as_secs_f64());
    }
    println!("{} of {} criteria pass, total {:.1}s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
