//! Fundamental forms, Gauss and Codazzi residuals for gallery surfaces.

use efimov_lab::gallery;
use efimov_lab::immersion::{codazzi_residual, gauss_residual, Vec2};

fn main() -> efimov_lab::Result<()> {
    let cases = [
        ("saddle in euclidean3", gallery::saddle(), gallery::euclidean3(), [0.3, -0.2]),
        ("clifford torus in sphere3", gallery::clifford_torus(), gallery::sphere3(), [0.4, 1.1]),
        ("pseudosphere in euclidean3", gallery::pseudosphere(1.0), gallery::euclidean3(), [1.0, 0.5]),
    ];
    for (label, patch, ambient, q) in cases {
        let f = patch.fundamental_forms(&ambient, &q)?;
        let gauss = gauss_residual(&patch, &ambient, &q)?;
        let codazzi = codazzi_residual(&patch, &ambient, &q, &Vec2::x(), &Vec2::y())?;
        println!("{label}");
        println!("  I   = {:?}", f.first.as_slice());
        println!("  II  = {:?}", f.second.as_slice());
        println!("  III = {:?}", f.third.as_slice());
        println!("  K_I = {:+.10}, det B = {:+.10}, K_M(T) = {:+.10}", f.k_i, f.k_e, f.k_ambient);
        println!("  Gauss residual {gauss:.1e}, Codazzi residual {codazzi:.1e}");
    }
    Ok(())
}
