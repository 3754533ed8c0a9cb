//! Trace lambda(a) for a subcritical and a supercritical case and write the
//! branch to CSV.
//!
//! cargo run --release --example bifurcation_diagram [out.csv]

use std::io::Write;

use mems_extremal::branch::{check_pointwise_bounds, continue_branch, estimate_lambda_star, SolverConfig};
use mems_extremal::constants::ProblemParams;
use mems_extremal::report::{to_csv_string, Cell};

fn main() -> mems_extremal::Result<()> {
    let grid: Vec<f64> = (1..=99).map(|i| i as f64 / 100.0).collect();
    let config = SolverConfig::default();
    let mut rows = Vec::new();
    for (n, p) in [(3, 2.0), (13, 100.0)] {
        let params = ProblemParams::new(n, p)?;
        let diagram = continue_branch(&params, &grid, &config)?;
        let est = estimate_lambda_star(&diagram);
        println!(
            "n = {n}, p = {p}: lambda* >= {:.6} K0, fold at {:?}, resolution limit at {:?}",
            est.lambda_star_lower_k0, est.fold, est.resolution_limit
        );
        let last = diagram.minimal_segment().last().unwrap();
        let bounds = check_pointwise_bounds(&last.u, &params, est.lambda_star_lower)?;
        if let Some(b) = bounds.upper_profile {
            println!("  u <= 1 - r^(4/(p+1)) at a = {:.3}: margin {:.2e}", last.a, b.margin);
        }
        for pt in &diagram.points {
            rows.push(vec![
                Cell::from(n),
                p.into(),
                pt.a.into(),
                pt.lambda_over_k0(&params).into(),
                pt.mu1.into(),
                pt.fold_flag.into(),
            ]);
        }
    }
    let csv = to_csv_string(&["n", "p", "a", "lambda_over_K0", "mu1", "fold_flag"], &rows);
    match std::env::args().nth(1) {
        Some(path) => std::fs::File::create(path)?.write_all(csv.as_bytes())?,
        None => println!("({} rows; pass a path to save the CSV)", rows.len()),
    }
    Ok(())
}
