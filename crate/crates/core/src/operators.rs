//! Radial finite-difference operators and weighted quadrature.
//!
//! The radial Laplacian `w'' + (n−1)/r · w'` uses centered differences in the
//! interior, the regularity limit `2n(w₁ − w₀)/h²` at the center (from
//! `w'(0) = 0`, so `(n−1)w'/r → (n−1)w''`) and a one-sided second-order
//! stencil at `r = 1`.

use crate::constants::BoundaryPair;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, RadialField};

/// Boundary-value consistency tolerance of [`biharmonic_apply`].
pub const TOL_BC: f64 = 1e-8;

#[inline]
pub(crate) fn center_coeffs(mesh: &Mesh) -> (f64, f64) {
    let c = 2.0 * mesh.dim() as f64 / (mesh.h() * mesh.h());
    (-c, c)
}

/// Coefficients `(lower, diag, upper)` of the interior stencil at node `i`.
#[inline]
pub(crate) fn interior_coeffs(mesh: &Mesh, i: usize) -> (f64, f64, f64) {
    let h = mesh.h();
    let h2 = h * h;
    let drift = (mesh.dim() as f64 - 1.0) / (mesh.r(i) * 2.0 * h);
    (1.0 / h2 - drift, -2.0 / h2, 1.0 / h2 + drift)
}

// Radial Laplacian at nodes 0..N-1 (shared by both closures at r = 1).
fn laplacian_inner(w: &[f64], mesh: &Mesh, out: &mut [f64]) {
    let n = mesh.n_cells();
    let (c0, c1) = center_coeffs(mesh);
    out[0] = c0 * w[0] + c1 * w[1];
    for i in 1..n {
        let (lo, d, up) = interior_coeffs(mesh, i);
        out[i] = lo * w[i - 1] + d * w[i] + up * w[i + 1];
    }
}

fn laplacian_one_sided(w: &[f64], mesh: &Mesh) -> f64 {
    let n = mesh.n_cells();
    let h = mesh.h();
    let d2 = (2.0 * w[n] - 5.0 * w[n - 1] + 4.0 * w[n - 2] - w[n - 3]) / (h * h);
    let d1 = (3.0 * w[n] - 4.0 * w[n - 1] + w[n - 2]) / (2.0 * h);
    d2 + (mesh.dim() as f64 - 1.0) * d1
}

/// Discrete radial Laplacian of `w` at every node.
pub fn laplacian_apply(w: &RadialField) -> RadialField {
    let mesh = *w.mesh();
    let mut out = vec![0.0; mesh.n_nodes()];
    laplacian_inner(w.values(), &mesh, &mut out);
    out[mesh.n_cells()] = laplacian_one_sided(w.values(), &mesh);
    RadialField::new(mesh, out).expect("Laplacian of a finite field is finite")
}

/// Laplacian with the boundary node closed by the ghost value
/// `w_{N+1} = w_{N−1} + 2hγ` that encodes `w'(1) = γ`.
pub fn laplacian_clamped(w: &[f64], mesh: &Mesh, gamma: f64) -> Vec<f64> {
    let n = mesh.n_cells();
    let h = mesh.h();
    let mut out = vec![0.0; mesh.n_nodes()];
    laplacian_inner(w, mesh, &mut out);
    out[n] = 2.0 * (w[n - 1] - w[n]) / (h * h) + 2.0 * gamma / h + (mesh.dim() as f64 - 1.0) * gamma;
    out
}

/// Discrete `Δ²w` through the coupled form `v = Δw` (ghost-closed with
/// `w'(1) = γ`), then `Δv`; the boundary node uses a one-sided stencil.
///
/// The center-node stencil is exact only on quadratics, so near `r = 0` the
/// result is consistent only for fields whose Laplacian is locally quadratic.
/// The ghost closure is first-order in `v_N`, which makes the value at node
/// `N − 1` inconsistent for fields with `w''' (1) ≠ 0`; the clamped solve is
/// still second-order overall.
pub fn biharmonic_apply(w: &RadialField, bc: BoundaryPair) -> Result<RadialField> {
    let mesh = *w.mesh();
    let wn = w.values()[mesh.n_cells()];
    if (wn - bc.alpha).abs() > TOL_BC {
        return Err(Error::BoundaryMismatch { expected: bc.alpha, found: wn });
    }
    let v = laplacian_clamped(w.values(), &mesh, bc.gamma);
    let mut out = vec![0.0; mesh.n_nodes()];
    laplacian_inner(&v, &mesh, &mut out);
    out[mesh.n_cells()] = laplacian_one_sided(&v, &mesh);
    RadialField::new(mesh, out)
}

/// `∫₀¹ g(r) r^s r^{n−1} dr` by the composite cell-midpoint rule, with `g`
/// interpolated linearly to midpoints. The sphere area factor is omitted.
pub fn quadrature(g: &RadialField, s: f64) -> Result<f64> {
    let mesh = *g.mesh();
    let v = g.values();
    quadrature_midpoints(&mesh, s, |i| 0.5 * (v[i] + v[i + 1]))
}

/// Midpoint rule with caller-supplied cell values `g(i)` for cell
/// `[r_i, r_{i+1}]`; used when the integrand must not be evaluated at nodes.
pub fn quadrature_midpoints(mesh: &Mesh, s: f64, g: impl Fn(usize) -> f64) -> Result<f64> {
    let e = s + mesh.dim() as f64 - 1.0;
    if !(e > -1.0) {
        return Err(Error::InvalidParameter(format!(
            "weight r^{e} is not integrable at r = 0"
        )));
    }
    let h = mesh.h();
    Ok((0..mesh.n_cells()).map(|i| g(i) * mesh.midpoint(i).powf(e)).sum::<f64>() * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{biharmonic_extension, k1};
    use approx::assert_relative_eq;

    fn mesh(n_cells: usize, dim: usize) -> Mesh {
        Mesh::new(n_cells, dim).unwrap()
    }

    #[test]
    fn laplacian_exact_on_quadratics() {
        for dim in [1, 3, 5, 13] {
            let m = mesh(32, dim);
            let l = laplacian_apply(&RadialField::from_fn(m, |r| r * r).unwrap());
            for v in l.values() {
                assert_relative_eq!(*v, 2.0 * dim as f64, max_relative = 1e-10);
            }
            let c = laplacian_apply(&RadialField::from_fn(m, |_| 3.5).unwrap());
            assert!(c.values().iter().all(|v| v.abs() < 1e-9));
        }
    }

    #[test]
    fn laplacian_quartic_second_order() {
        let dim = 5;
        let err = |n_cells| {
            let m = mesh(n_cells, dim);
            let l = laplacian_apply(&RadialField::from_fn(m, |r| r.powi(4)).unwrap());
            (1..n_cells)
                .map(|i| (l.values()[i] - 4.0 * (dim as f64 + 2.0) * m.r(i).powi(2)).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(64), err(128));
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() <= 0.2, "order {order}");
    }

    #[test]
    fn biharmonic_of_bump() {
        for dim in [3, 5, 13] {
            let m = mesh(256, dim);
            let w = RadialField::from_fn(m, |r| (1.0 - r * r).powi(2)).unwrap();
            let b = biharmonic_apply(&w, BoundaryPair::HOMOGENEOUS).unwrap();
            let target = 8.0 * dim as f64 * (dim as f64 + 2.0);
            for i in 26..255 {
                assert_relative_eq!(b.values()[i], target, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn biharmonic_power_rule() {
        let dim = 13;
        let a = 4.0 / 3.0;
        let err = |n_cells| {
            let m = mesh(n_cells, dim);
            let w = RadialField::from_fn(m, |r| r.powf(a) - 1.0).unwrap();
            // w'(1) = a
            let b = biharmonic_apply(&w, BoundaryPair::new(0.0, a)).unwrap();
            (0..=n_cells)
                .filter(|&i| (0.2..=0.8).contains(&m.r(i)))
                .map(|i| {
                    let r = m.r(i);
                    let exact = k1(a, dim) * r.powf(a - 4.0);
                    ((b.values()[i] - exact) / exact).abs()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(80), err(160));
        assert!(e2 < 1e-3, "{e2}");
        assert!((e1 / e2 - 4.0).abs() < 1.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn biharmonic_annihilates_extension() {
        let m = mesh(64, 7);
        let bc = BoundaryPair::new(0.3, -0.8);
        let phi = biharmonic_extension(bc);
        let w = RadialField::from_fn(m, |r| phi.eval(r)).unwrap();
        let b = biharmonic_apply(&w, bc).unwrap();
        assert!(b.values().iter().all(|v| v.abs() < 1e-6), "{:?}", b.max());
    }

    #[test]
    fn biharmonic_flags_boundary_mismatch() {
        let m = mesh(32, 3);
        let w = RadialField::from_fn(m, |_| 0.1).unwrap();
        assert!(matches!(
            biharmonic_apply(&w, BoundaryPair::HOMOGENEOUS),
            Err(Error::BoundaryMismatch { .. })
        ));
    }

    #[test]
    fn quadrature_examples() {
        let m = mesh(256, 3);
        let one = RadialField::from_fn(m, |_| 1.0).unwrap();
        assert_relative_eq!(quadrature(&one, 0.0).unwrap(), 1.0 / 3.0, max_relative = 1e-5);

        let m13 = mesh(256, 13);
        let one13 = RadialField::from_fn(m13, |_| 1.0).unwrap();
        assert_relative_eq!(quadrature(&one13, -4.0).unwrap(), 1.0 / 9.0, max_relative = 1e-3);

        let m5 = mesh(256, 5);
        let sq = RadialField::from_fn(m5, |r| r * r).unwrap();
        assert_relative_eq!(quadrature(&sq, 0.0).unwrap(), 1.0 / 7.0, max_relative = 1e-4);

        assert!(quadrature(&one, -3.0).is_err());
    }
}
