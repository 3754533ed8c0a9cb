//! Banded solver for the clamped radial biharmonic problem
//! `Δ²u = f`, `u(1) = α`, `u'(1) = γ`, written as the coupled pair
//! `Δu = v`, `Δv = f`.
//!
//! Unknowns are interleaved (`x[2i] = u_i`, `x[2i+1] = v_i`) so that the
//! assembled matrix has three sub- and three super-diagonals.

use crate::banded::{BandLu, BandMatrix};
use crate::constants::BoundaryPair;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, RadialField};
use crate::operators::{center_coeffs, interior_coeffs};

pub(crate) const KL: usize = 3;
pub(crate) const KU: usize = 3;

#[inline]
pub(crate) fn u_idx(i: usize) -> usize {
    2 * i
}

#[inline]
pub(crate) fn v_idx(i: usize) -> usize {
    2 * i + 1
}

/// Row `2i` (`i < N`) holds `(Δv)_i = f_i`, row `2i+1` holds
/// `(Δu)_i − v_i = 0`; row `2N` is `u_N = α` and row `2N+1` closes
/// `v_N` with the ghost value that encodes `u'(1) = γ`.
pub(crate) fn assemble(mesh: &Mesh) -> BandMatrix {
    let n = mesh.n_cells();
    let h = mesh.h();
    let mut a = BandMatrix::zeros(2 * n + 2, KL, KU);
    let (c0, c1) = center_coeffs(mesh);
    a.set(0, v_idx(0), c0);
    a.set(0, v_idx(1), c1);
    a.set(1, u_idx(0), c0);
    a.set(1, u_idx(1), c1);
    a.set(1, v_idx(0), -1.0);
    for i in 1..n {
        let (lo, d, up) = interior_coeffs(mesh, i);
        let (rv, ru) = (u_idx(i), v_idx(i));
        a.set(rv, v_idx(i - 1), lo);
        a.set(rv, v_idx(i), d);
        a.set(rv, v_idx(i + 1), up);
        a.set(ru, u_idx(i - 1), lo);
        a.set(ru, u_idx(i), d);
        a.set(ru, u_idx(i + 1), up);
        a.set(ru, v_idx(i), -1.0);
    }
    a.set(u_idx(n), u_idx(n), 1.0);
    let last = v_idx(n);
    a.set(last, v_idx(n), 1.0);
    a.set(last, u_idx(n - 1), -2.0 / (h * h));
    a.set(last, u_idx(n), 2.0 / (h * h));
    a
}

/// Right-hand side for source values `f` (nodes `0..N−1` are used).
pub(crate) fn rhs(mesh: &Mesh, f: &[f64], bc: BoundaryPair) -> Vec<f64> {
    let n = mesh.n_cells();
    let h = mesh.h();
    let mut b = vec![0.0; 2 * n + 2];
    for i in 0..n {
        b[u_idx(i)] = f[i];
    }
    b[u_idx(n)] = bc.alpha;
    b[v_idx(n)] = 2.0 * bc.gamma / h + (mesh.dim() as f64 - 1.0) * bc.gamma;
    b
}

pub(crate) fn split(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let u = x.iter().step_by(2).copied().collect();
    let v = x.iter().skip(1).step_by(2).copied().collect();
    (u, v)
}

/// Assembled and factorized clamped system for one mesh. Immutable after
/// construction; solves take `&self` and may run concurrently.
#[derive(Debug, Clone)]
pub struct ClampedBiharmonicSystem {
    mesh: Mesh,
    matrix: BandMatrix,
    lu: BandLu,
}

impl ClampedBiharmonicSystem {
    pub fn new(mesh: Mesh) -> Result<Self> {
        let matrix = assemble(&mesh);
        let lu = matrix.clone().lu()?;
        Ok(Self { mesh, matrix, lu })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn matrix(&self) -> &BandMatrix {
        &self.matrix
    }

    /// Solves and returns `(u, v = Δu)` together with the relative residual
    /// `‖Ax − b‖∞ / (‖A‖∞‖x‖∞ + ‖b‖∞)` of the assembled system.
    pub fn solve_coupled(&self, f: &[f64], bc: BoundaryPair) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        if f.len() != self.mesh.n_nodes() {
            return Err(Error::InvalidParameter(format!(
                "source has {} values, mesh has {} nodes",
                f.len(),
                self.mesh.n_nodes()
            )));
        }
        if let Some(i) = f.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite source at node {i}")));
        }
        let b = rhs(&self.mesh, f, bc);
        let x = self.lu.solve(&b);
        let ax = self.matrix.matvec(&x);
        let res = ax.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        let xn = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let bn = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let scale = self.matrix.norm_inf() * xn + bn;
        let rel = if scale > 0.0 { res / scale } else { 0.0 };
        let (u, v) = split(&x);
        Ok((u, v, rel))
    }

    pub fn solve(&self, f: &RadialField, bc: BoundaryPair) -> Result<RadialField> {
        if f.mesh() != &self.mesh {
            return Err(Error::InvalidParameter("source lives on a different mesh".into()));
        }
        let (u, _, _) = self.solve_coupled(f.values(), bc)?;
        RadialField::new(self.mesh, u)
    }
}

/// One-shot clamped solve on the mesh of `f`.
pub fn solve_clamped(f: &RadialField, bc: BoundaryPair) -> Result<RadialField> {
    ClampedBiharmonicSystem::new(*f.mesh())?.solve(f, bc)
}
