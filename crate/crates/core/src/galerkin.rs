//! Conforming Hermite-cubic Galerkin forms on the radial mesh.
//!
//! Each node carries a value and a slope. The clamped radial space imposes
//! `φ'(0) = 0` (regularity) and `φ(1) = φ'(1) = 0`; those three degrees of
//! freedom are removed, leaving `2N − 1` unknowns with half-bandwidth 3.
//! All forms carry the radial weight `r^{n−1}`.

use crate::banded::SymBandMatrix;
use crate::mesh::Mesh;

/// Gauss-Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(k >= 1);
    let mut x = vec![0.0; k];
    let mut w = vec![0.0; k];
    let kf = k as f64;
    for i in 0..k.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (kf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=k {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let pk = if k == 1 { z } else { p1 };
            let pkm1 = if k == 1 { 1.0 } else { p0 };
            dp = kf * (z * pk - pkm1) / (z * z - 1.0);
            let dz = pk / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[k - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[k - 1 - i] = w[i];
    }
    (x, w)
}

// Hermite cubic shape functions on an element of length h at local t ∈ [0,1]:
// (value, d/dr, d²/dr²) for the four local dofs (u₀, u₀', u₁, u₁').
fn shape(t: f64, h: f64) -> ([f64; 4], [f64; 4], [f64; 4]) {
    let (t2, t3) = (t * t, t * t * t);
    let v = [
        1.0 - 3.0 * t2 + 2.0 * t3,
        h * (t - 2.0 * t2 + t3),
        3.0 * t2 - 2.0 * t3,
        h * (t3 - t2),
    ];
    let d = [
        (-6.0 * t + 6.0 * t2) / h,
        1.0 - 4.0 * t + 3.0 * t2,
        (6.0 * t - 6.0 * t2) / h,
        3.0 * t2 - 2.0 * t,
    ];
    let dd = [
        (-6.0 + 12.0 * t) / (h * h),
        (-4.0 + 6.0 * t) / h,
        (6.0 - 12.0 * t) / (h * h),
        (6.0 * t - 2.0) / h,
    ];
    (v, d, dd)
}

#[derive(Debug, Clone)]
struct QuadPoint {
    element: usize,
    t: f64,
    r: f64,
    // w · r^{n−1} · h/2
    weight: f64,
    value: [f64; 4],
    lap: [f64; 4],
}

/// Stiffness `∫ Δφ Δψ r^{n−1}` and mass `∫ φψ r^{n−1}` on the clamped
/// Hermite space, plus the quadrature data needed for potentials.
#[derive(Debug, Clone)]
pub struct HermiteForms {
    mesh: Mesh,
    bilap: SymBandMatrix,
    mass: SymBandMatrix,
    points: Vec<QuadPoint>,
}

/// Half-bandwidth of the reduced Hermite matrices.
pub const HALF_BANDWIDTH: usize = 3;

impl HermiteForms {
    pub fn new(mesh: Mesh) -> Self {
        let n_cells = mesh.n_cells();
        let h = mesh.h();
        let dim = mesh.dim() as f64;
        let k = 6.max(mesh.dim() / 2 + 4);
        let (gx, gw) = gauss_legendre(k);
        let mut points = Vec::with_capacity(n_cells * k);
        for e in 0..n_cells {
            for (x, w) in gx.iter().zip(&gw) {
                let t = 0.5 * (x + 1.0);
                let r = (e as f64 + t) * h;
                let (value, d, dd) = shape(t, h);
                let mut lap = [0.0; 4];
                for a in 0..4 {
                    lap[a] = dd[a] + (dim - 1.0) / r * d[a];
                }
                let weight = 0.5 * w * h * r.powf(dim - 1.0);
                points.push(QuadPoint { element: e, t, r, weight, value, lap });
            }
        }
        let n_dof = Self::dof_count(&mesh);
        let mut bilap = SymBandMatrix::zeros(n_dof, HALF_BANDWIDTH);
        let mut mass = SymBandMatrix::zeros(n_dof, HALF_BANDWIDTH);
        for q in &points {
            let dofs = Self::local_dofs(&mesh, q.element);
            for a in 0..4 {
                let Some(ga) = dofs[a] else { continue };
                for b in 0..4 {
                    let Some(gb) = dofs[b] else { continue };
                    if gb > ga {
                        continue;
                    }
                    bilap.add(ga, gb, q.weight * q.lap[a] * q.lap[b]);
                    mass.add(ga, gb, q.weight * q.value[a] * q.value[b]);
                }
            }
        }
        Self { mesh, bilap, mass, points }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn dof_count(mesh: &Mesh) -> usize {
        2 * mesh.n_cells() - 1
    }

    pub fn n_dof(&self) -> usize {
        Self::dof_count(&self.mesh)
    }

    // Full dof g (2i = value, 2i+1 = slope at node i) to reduced index.
    fn reduce(mesh: &Mesh, g: usize) -> Option<usize> {
        let n = mesh.n_cells();
        match g {
            1 => None,
            g if g >= 2 * n => None,
            0 => Some(0),
            g => Some(g - 1),
        }
    }

    fn local_dofs(mesh: &Mesh, e: usize) -> [Option<usize>; 4] {
        [0, 1, 2, 3].map(|a| Self::reduce(mesh, 2 * e + a))
    }

    pub fn bilaplacian(&self) -> &SymBandMatrix {
        &self.bilap
    }

    pub fn mass(&self) -> &SymBandMatrix {
        &self.mass
    }

    /// `∫ V φψ r^{n−1}` where `potential(element, t, r)` is evaluated at the
    /// Gauss points only (never at `r = 0`).
    pub fn potential(&self, potential: impl Fn(usize, f64, f64) -> f64) -> SymBandMatrix {
        let mut out = SymBandMatrix::zeros(self.n_dof(), HALF_BANDWIDTH);
        for q in &self.points {
            let v = potential(q.element, q.t, q.r) * q.weight;
            let dofs = Self::local_dofs(&self.mesh, q.element);
            for a in 0..4 {
                let Some(ga) = dofs[a] else { continue };
                for b in 0..4 {
                    let Some(gb) = dofs[b] else { continue };
                    if gb <= ga {
                        out.add(ga, gb, v * q.value[a] * q.value[b]);
                    }
                }
            }
        }
        out
    }

    /// Nodal values `φ(r_i)` of a reduced coefficient vector.
    pub fn nodal_values(&self, x: &[f64]) -> Vec<f64> {
        let n = self.mesh.n_cells();
        (0..=n)
            .map(|i| Self::reduce(&self.mesh, 2 * i).map_or(0.0, |g| x[g]))
            .collect()
    }

    /// Reduced coefficients of the Hermite interpolant of `(f, f')`.
    pub fn interpolate(&self, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut x = vec![0.0; self.n_dof()];
        for i in 0..=self.mesh.n_cells() {
            let r = self.mesh.r(i);
            if let Some(g) = Self::reduce(&self.mesh, 2 * i) {
                x[g] = f(r);
            }
            if let Some(g) = Self::reduce(&self.mesh, 2 * i + 1) {
                x[g] = df(r);
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for k in [1, 2, 5, 6, 12, 19] {
            let (x, w) = gauss_legendre(k);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-13);
            let deg = 2 * k - 1;
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((q - exact).abs() < 1e-13, "k = {k}");
        }
    }

    #[test]
    fn forms_on_interpolated_bump() {
        // φ = (1 − r²)², n = 5: ∫ (Δφ)² r⁴ dr with Δφ = −4n + 4(n+2) r².
        let mesh = Mesh::new(32, 5).unwrap();
        let forms = HermiteForms::new(mesh);
        let x = forms.interpolate(|r| (1.0 - r * r).powi(2), |r| -4.0 * r * (1.0 - r * r));
        let bx = forms.bilaplacian().matvec(&x);
        let e: f64 = x.iter().zip(&bx).map(|(a, b)| a * b).sum();
        // ∫₀¹ (−20 + 28 r²)² r⁴ dr = 400/5 − 2·560/7 + 784/9
        let exact = 80.0 - 160.0 + 784.0 / 9.0;
        assert_relative_eq!(e, exact, max_relative = 5e-3);
        let mx = forms.mass().matvec(&x);
        let m: f64 = x.iter().zip(&mx).map(|(a, b)| a * b).sum();
        // ∫ (1 − r²)⁴ r⁴ dr = B(5/2, 5)/2 = 128/15015
        assert_relative_eq!(m, 128.0 / 15015.0, max_relative = 1e-5);
    }

    #[test]
    fn potential_matches_mass_for_unit_weight() {
        let forms = HermiteForms::new(Mesh::new(16, 7).unwrap());
        let p = forms.potential(|_, _, _| 1.0);
        for i in 0..forms.n_dof() {
            for j in i.saturating_sub(3)..=i {
                assert_relative_eq!(p.get(i, j), forms.mass().get(i, j), max_relative = 1e-14);
            }
        }
    }
}
