//! Discrete Hardy-Rellich gaps on the radial subspace: nonnegative at the
//! sharp constant, and unbounded below for a slightly larger one.
//!
//! cargo run --release --example hardy_rellich

use mems_extremal::mesh::Mesh;
use mems_extremal::stability::{hardy_constant, hardy_rellich_gap, weighted_hardy_gap};

fn main() -> mems_extremal::Result<()> {
    for n in [13usize, 31] {
        let c = hardy_constant(n);
        println!("n = {n}, H_n = {c}");
        for cells in [128, 256, 512] {
            let mesh = Mesh::new(cells, n)?;
            println!(
                "  N = {cells:3}: gap(H_n) = {:>12.3}  gap(1.05 H_n) = {:>16.3}  weighted = {:>10.3}",
                hardy_rellich_gap(n, c, &mesh)?,
                hardy_rellich_gap(n, 1.05 * c, &mesh)?,
                weighted_hardy_gap(n, &mesh)?
            );
        }
    }
    Ok(())
}
