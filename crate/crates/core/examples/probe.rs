use hardedge::specfun::MeijerGSpec;
use hardedge::Complex64;
fn main() {
    // G^{2,0}_{0,3} with b = (0, 40, 0)
    let spec = MeijerGSpec::new(2, 0, vec![], vec![0.0, 40.0, 0.0]).unwrap();
    for &mag in &[100.0f64, 180.0, 250.0, 360.0] {
        for &arg in &[0.0, 1.2, std::f64::consts::FRAC_PI_2] {
            let z = Complex64::from_polar(mag, arg);
            match spec.eval_scaled(z, 20) {
                Ok((v, ls, err, _)) => {
                    println!("|z|={mag} arg={arg:.2}: val {v:.6e} logscale {ls:.2} relerr {err:.1e} -> log10|G| {:.2}", (ls + v.norm().ln()) / std::f64::consts::LN_10);
                }
                Err(e) => println!("|z|={mag} arg={arg:.2}: ERR {e}"),
            }
        }
    }
}
