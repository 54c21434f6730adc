//! Non-existence verdicts for a few pinchings, and the torsion bound τ₀
//! against a brute-force maximisation.

use efimov_lab::connection::{check_hypothesis, torsion_bound_bruteforce, torsion_bound_tau0, BoundSet};

fn main() -> efimov_lab::Result<()> {
    println!("{:>28} {:>8} {:>10} {:>10} {:>9}", "(K1, K2, K3)", "regime", "lhs", "rhs", "excluded");
    let mut triples = vec![(-1.0, 0.0, 0.0), (-1.0, -0.5, -0.25), (-2.0, -1.0, 0.5)];
    for lambda in [1.0, 2.0, 3.0, 5.0] {
        let l: f64 = lambda;
        triples.push((-1.0, l * l - 1.0 - 2.0 * l, l * l - 1.0 + 2.0 * l));
    }
    for (k1, k2, k3) in triples {
        let v = check_hypothesis(k1, k2, k3)?;
        println!("{:>28} {:>8} {:>10.4} {:>10.4} {:>9}", format!("({k1}, {k2}, {k3})"), v.regime.to_string(), v.lhs, v.rhs, v.excluded);
    }

    println!("\ntorsion bound, closed form vs grid maximum");
    for (q1, q2, k1) in [(-0.5, 0.0, -1.0), (-0.9, -0.2, -1.0), (-1.5, 0.5, -2.0)] {
        let closed = torsion_bound_tau0(q1, q2, k1)?;
        let brute = torsion_bound_bruteforce(q1, q2, k1, 10_000)?;
        println!("q1 = {q1:5}, q2 = {q2:5}, K1 = {k1:5}: tau0 = {closed:.9}, grid = {brute:.9}");
    }

    let b = BoundSet::new(-1.0, -0.6, -0.3, 0.0)?;
    println!("\nbounds for (-1, -0.6, -0.3): K4 = {:.6}, K5 = {:.6}, tau0 = {:.6}", b.k4, b.k5, b.tau0);
    Ok(())
}
