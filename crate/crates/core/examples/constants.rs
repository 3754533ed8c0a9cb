//! Print the problem constants for a few (n, p) pairs.
//!
//! cargo run --example constants

use mems_extremal::constants::{critical_exponents, hn, k0, subsolution_coeffs, ProblemParams};

fn main() -> mems_extremal::Result<()> {
    println!("{:>3} {:>7} {:>14} {:>12} {:>12} {:>12}", "n", "p", "K0", "H_n", "p_c", "p_c+");
    for (n, p) in [(3, 2.0), (5, 2.0), (13, 100.0), (13, 250.0), (32, 1000.0)] {
        let params = ProblemParams::new(n, p)?;
        let crit = critical_exponents(n)?;
        let show = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6}"));
        println!(
            "{n:>3} {p:>7} {:>14.8} {:>12.4} {:>12} {:>12}",
            k0(&params),
            hn(n),
            show(crit.p_c.value()),
            show(crit.p_c_plus.value())
        );
    }

    // a1^(p+1) for the quadratic sub-solution tends to e^2 as p grows
    for p in [1e2, 1e3, 1e4] {
        let (a1, _) = subsolution_coeffs(2.0, p)?;
        println!("p = {p:>6}: a1^(p+1) = {:.6}  (e^2 = {:.6})", a1.powf(p + 1.0), 2f64.exp());
    }
    Ok(())
}
