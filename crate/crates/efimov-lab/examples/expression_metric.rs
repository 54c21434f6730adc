//! A metric defined by an expression file, checked against the built-in
//! hyperbolic space.

use efimov_lab::ambient::sectional_range;
use efimov_lab::ambient::MetricField;
use efimov_lab::expr::CoefficientFile;

const HALF_SPACE: &str = "
# upper half space
g11 = 1 / w^2
g22 = 1 / w^2
g33 = 1 / w^2
range w = 0.5, 3
step = 1e-3
";

fn main() -> efimov_lab::Result<()> {
    let file = CoefficientFile::parse(HALF_SPACE, &["u", "v", "w"])?;
    let m = MetricField::from_coefficients("half_space", &file)?;
    for p in [[0.0, 0.0, 1.0], [0.4, -0.2, 2.0]] {
        let (lo, hi) = sectional_range(&m, &p.into())?;
        println!("at {p:?}: K_m = {lo:+.8}, K_M = {hi:+.8}");
    }

    let bad = CoefficientFile::parse("g11 = 1 / u\ng22 = 1\ng33 = 1\n", &["u", "v", "w"])?;
    let m = MetricField::from_coefficients("bad", &bad)?;
    match m.probe(&[0.0, 0.0, 0.0]) {
        Err(e) => println!("as expected: {e}"),
        Ok(()) => println!("no error at the origin"),
    }
    Ok(())
}
