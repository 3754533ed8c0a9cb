//! mu1 along the minimal branch of n = 3, p = 2: it decreases with lambda
//! and vanishes at the fold.
//!
//! cargo run --release --example stability_eigenvalue

use mems_extremal::branch::{minimal_solution, SolverConfig};
use mems_extremal::constants::{k0, ProblemParams};
use mems_extremal::stability::mu1;

fn main() -> mems_extremal::Result<()> {
    let params = ProblemParams::new(3, 2.0)?;
    let config = SolverConfig::default();
    let k = k0(&params);
    for fraction in [0.0, 10.0, 20.0, 30.0, 40.0, 43.0, 43.6] {
        let lambda = fraction * k;
        let sol = minimal_solution(&params, lambda, &config)?;
        let eig = mu1(&sol.u, &params, lambda)?;
        println!(
            "lambda = {fraction:>5} K0  max u = {:.5}  mu1 = {:>12.6}  ({} iterations, residual {:.1e})",
            sol.u.max(),
            eig.mu1,
            eig.iterations,
            eig.residual
        );
    }
    Ok(())
}
