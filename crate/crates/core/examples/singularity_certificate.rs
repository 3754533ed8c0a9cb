//! Evaluate the sub-solution / stability certificate for the tabulated
//! dimensions and for the quadratic candidate in n = 32.
//!
//! cargo run --release --example singularity_certificate

use mems_extremal::certificate::{certify, empirical_p0, run_table1, SubsolutionSpec, DEFAULT_GRID, P0_CANDIDATES};
use mems_extremal::constants::ProblemParams;

fn main() -> mems_extremal::Result<()> {
    println!("{:>3} {:>6} {:>6} {:>10} {:>12} {:>12}  verdict", "n", "l'", "beta", "sup H", "sub margin", "stab margin");
    for r in run_table1(250.0, DEFAULT_GRID)? {
        println!(
            "{:>3} {:>6} {:>6} {:>10.5} {:>12.5} {:>12.3}  {}",
            r.n,
            r.lambda_prime,
            r.beta,
            r.sup_h,
            r.subsolution_margin,
            r.stability_margin,
            r.verdict.as_str()
        );
    }
    println!("smallest p certifying every row: {:?}", empirical_p0(&P0_CANDIDATES, DEFAULT_GRID)?);

    let e2 = 2f64.exp();
    for p in [1e3, 1e5] {
        let spec = SubsolutionSpec::new(2.0, ProblemParams::new(32, p)?)?;
        let r = certify(&spec, e2, e2 + 0.01, DEFAULT_GRID)?;
        println!(
            "m = 2, n = 32, p = {p}: sup H = {:.6}, margins ({:.3e}, {:.3}) -> {}",
            r.sup_h,
            r.subsolution_margin,
            r.stability_margin,
            r.verdict.as_str()
        );
    }
    Ok(())
}
