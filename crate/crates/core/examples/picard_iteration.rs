//! The monotone scheme: converges below the pull-in value, trips the
//! obstacle guard above it. Newton then polishes the converged iterate.
//!
//! cargo run --example picard_iteration

use mems_extremal::branch::{monotone_iterate, newton_refine, SolverConfig};
use mems_extremal::constants::{k0, ProblemParams};

fn main() -> mems_extremal::Result<()> {
    let params = ProblemParams::new(3, 2.0)?;
    let config = SolverConfig::default();
    for factor in [0.5, 10.0, 40.0] {
        let lambda = factor * k0(&params);
        let s = monotone_iterate(&params, lambda, &config)?;
        let refined = newton_refine(&s.u, &params, lambda, &config)?;
        println!(
            "lambda = {factor:>5} K0: {} monotone steps, max u = {:.8}, Newton steps {} (residual {:.1e})",
            s.iterations,
            refined.u.max(),
            refined.iterations,
            refined.residual
        );
    }
    match monotone_iterate(&params, 1e4, &config) {
        Ok(_) => println!("lambda = 1e4 unexpectedly converged"),
        Err(e) => println!("lambda = 1e4: {e}"),
    }
    Ok(())
}
