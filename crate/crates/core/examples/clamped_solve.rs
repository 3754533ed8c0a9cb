//! Solve the clamped radial biharmonic problem with a constant load and
//! compare with the exact profile (1 - r^2)^2 under mesh refinement.
//!
//! cargo run --example clamped_solve

use mems_extremal::clamped::solve_clamped;
use mems_extremal::constants::BoundaryPair;
use mems_extremal::mesh::{Mesh, RadialField};

fn main() -> mems_extremal::Result<()> {
    for n in [3usize, 5, 13] {
        let load = 8.0 * n as f64 * (n as f64 + 2.0);
        let mut previous: Option<f64> = None;
        for cells in [64, 128, 256, 512] {
            let mesh = Mesh::new(cells, n)?;
            let f = RadialField::from_fn(mesh, |_| load)?;
            let u = solve_clamped(&f, BoundaryPair::HOMOGENEOUS)?;
            let exact = RadialField::from_fn(mesh, |r| (1.0 - r * r).powi(2))?;
            let err = u.max_abs_diff(&exact);
            match previous {
                Some(e) => println!("n = {n:2}  N = {cells:4}  error = {err:.3e}  ratio = {:.2}", e / err),
                None => println!("n = {n:2}  N = {cells:4}  error = {err:.3e}"),
            }
            previous = Some(err);
        }
    }

    // non-homogeneous boundary data
    let mesh = Mesh::new(256, 5)?;
    let bc = BoundaryPair::new(0.2, -0.1);
    let u = solve_clamped(&RadialField::zeros(mesh), bc)?;
    println!("admissible {:?}: u(0) = {:.6}, u(1) = {:.6}", bc, u.values()[0], u.values()[256]);
    Ok(())
}
