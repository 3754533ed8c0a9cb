//! Stability eigenvalue `μ₁` and discrete Hardy-Rellich gap checks on the
//! radial clamped subspace.
//!
//! Every check reduces to the smallest eigenvalue of a symmetric pencil
//! `(K, M)` with `M` positive definite, assembled by [`HermiteForms`].

use log::debug;
use serde::Serialize;

use crate::banded::SymBandMatrix;
use crate::constants::{hn, ProblemParams};
use crate::error::{Error, Result};
use crate::galerkin::HermiteForms;
use crate::mesh::{Mesh, RadialField};
use crate::operators::quadrature;

/// Tuning of the generalized eigensolver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Required normwise backward error `‖Kφ − μMφ‖ / ((‖K‖ + |μ|‖M‖)‖φ‖)`.
    pub tol: f64,
    pub max_iter: usize,
    /// First trial shift; moved downward until `K − σM` is positive definite.
    pub shift: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 200, shift: -1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub mu1: f64,
    /// Nodal values, normalized so that `∫ φ² r^{n−1} dr = 1` under
    /// [`quadrature`] and positive where `|φ|` is largest.
    pub eigenfunction: RadialField,
    /// Hermite coefficients of the eigenvector (value/slope pairs, clamped
    /// degrees of freedom removed), normalized in the mass inner product.
    pub coefficients: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenSummary {
    pub mu1: f64,
    pub iterations: usize,
    pub residual: f64,
    pub mesh_cells: usize,
}

impl EigenResult {
    pub fn summary(&self) -> EigenSummary {
        EigenSummary {
            mu1: self.mu1,
            iterations: self.iterations,
            residual: self.residual,
            mesh_cells: self.eigenfunction.mesh().n_cells(),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn norm_inf_sym(a: &SymBandMatrix) -> f64 {
    let n = a.n();
    let k = a.half_bandwidth();
    (0..n)
        .map(|i| {
            (i.saturating_sub(k)..(i + k + 1).min(n))
                .map(|j| a.get(i, j).abs())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

pub fn rayleigh_quotient(k: &SymBandMatrix, m: &SymBandMatrix, x: &[f64]) -> f64 {
    dot(x, &k.matvec(x)) / dot(x, &m.matvec(x))
}

/// Smallest eigenpair of `Kx = μMx`.
///
/// The pencil is Jacobi-scaled by the mass diagonal, the eigenvalue is
/// bracketed by bisection on positive definiteness of `K − σM` (banded
/// Cholesky), and the eigenvector is then obtained by shifted inverse
/// iteration from just below the bracket.
///
/// `guess` is any trial vector; its Rayleigh quotient is the initial upper
/// bound.
pub fn smallest_eigenpair(
    k: &SymBandMatrix,
    m: &SymBandMatrix,
    guess: &[f64],
    opts: &EigenOptions,
) -> Result<(f64, Vec<f64>, usize, f64)> {
    let n = k.n();
    let d: Vec<f64> = m.diagonal().iter().map(|v| 1.0 / v.sqrt()).collect();
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotPositiveDefinite { row: 0 });
    }
    let ks = k.scale_sym(&d);
    let ms = m.scale_sym(&d);
    let pd = |s: f64| ks.axpy(-s, &ms).is_positive_definite();

    let y0: Vec<f64> = guess.iter().zip(&d).map(|(g, d)| g / d).collect();
    let mut hi = rayleigh_quotient(&ks, &ms, &y0);
    let mut lo = opts.shift.min(hi - 1.0);
    let mut tries = 0;
    while !pd(lo) {
        lo = if lo < 0.0 { 4.0 * lo } else { -1.0 };
        tries += 1;
        if tries > 200 || !lo.is_finite() {
            return Err(Error::EigenNonConvergence { iterations: tries, residual: f64::INFINITY });
        }
    }
    if !hi.is_finite() || hi <= lo {
        hi = lo.abs().max(1.0) * 1e20;
    }
    for _ in 0..200 {
        if hi - lo <= 1e-9 * hi.abs().max(lo.abs()).max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if pd(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // back off slightly so the shifted matrix is safely definite
    let sigma = lo - 1e-9 * lo.abs().max(1.0);
    let chol = ks.axpy(-sigma, &ms).cholesky()?;
    debug!("eigen bracket [{lo}, {hi}], shift {sigma}");

    let knorm = norm_inf_sym(&ks);
    let mnorm = norm_inf_sym(&ms);
    let mut y = y0;
    if norm2(&y) == 0.0 {
        y = vec![1.0; n];
    }
    let mut mu = f64::NAN;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    for it in 1..=opts.max_iter {
        iterations = it;
        let mut z = ms.matvec(&y);
        chol.solve_in_place(&mut z);
        let scale = dot(&z, &ms.matvec(&z)).sqrt();
        y = z.iter().map(|v| v / scale).collect();
        let ky = ks.matvec(&y);
        let my = ms.matvec(&y);
        let new_mu = dot(&y, &ky) / dot(&y, &my);
        let r: Vec<f64> = ky.iter().zip(&my).map(|(a, b)| a - new_mu * b).collect();
        residual = norm2(&r) / ((knorm + new_mu.abs() * mnorm) * norm2(&y));
        let settled = (new_mu - mu).abs() <= 1e-15 * new_mu.abs().max(1.0);
        mu = new_mu;
        if residual < 1e-3 * opts.tol || (settled && residual < opts.tol) {
            break;
        }
    }
    if !(residual < opts.tol) {
        return Err(Error::EigenNonConvergence { iterations, residual });
    }
    let x: Vec<f64> = y.iter().zip(&d).map(|(y, d)| y * d).collect();
    Ok((mu, x, iterations, residual))
}

fn solve_pencil(forms: &HermiteForms, k: &SymBandMatrix, opts: &EigenOptions) -> Result<EigenResult> {
    let guess = forms.interpolate(|r| (1.0 - r * r).powi(2), |r| -4.0 * r * (1.0 - r * r));
    let (mu1, mut x, iterations, residual) = smallest_eigenpair(k, forms.mass(), &guess, opts)?;
    let mut nodal = forms.nodal_values(&x);
    let peak = nodal.iter().copied().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
    if peak < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
        nodal.iter_mut().for_each(|v| *v = -*v);
    }
    let mesh = *forms.mesh();
    let sq = RadialField::new(mesh, nodal.iter().map(|v| v * v).collect())?;
    let norm = quadrature(&sq, 0.0)?.sqrt();
    let eigenfunction = RadialField::new(mesh, nodal.iter().map(|v| v / norm).collect())?;
    Ok(EigenResult { mu1, eigenfunction, coefficients: x, iterations, residual })
}

/// Assembled stability pencil for a given solution; kept so callers can
/// evaluate Rayleigh quotients of arbitrary trial functions.
#[derive(Debug, Clone)]
pub struct StabilityPencil {
    forms: HermiteForms,
    operator: SymBandMatrix,
}

impl StabilityPencil {
    /// `∫(Δφ)² − pλ∫φ²/(1−u)^{p+1}` with `u` interpolated linearly between
    /// nodes.
    pub fn new(u: &RadialField, params: &ProblemParams, lambda: f64) -> Result<Self> {
        let mesh = *u.mesh();
        if mesh.dim() != params.n() {
            return Err(Error::InvalidParameter(format!(
                "mesh dimension {} differs from n = {}",
                mesh.dim(),
                params.n()
            )));
        }
        if !(u.max() < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "stability needs a regular solution, max u = {}",
                u.max()
            )));
        }
        if !(lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
        }
        let forms = HermiteForms::new(mesh);
        let uv = u.values();
        let p = params.p();
        let w = forms.potential(|e, t, _| {
            let ui = uv[e] + t * (uv[e + 1] - uv[e]);
            p * lambda * (1.0 - ui).powf(-(p + 1.0))
        });
        let operator = forms.bilaplacian().axpy(-1.0, &w);
        Ok(Self { forms, operator })
    }

    pub fn forms(&self) -> &HermiteForms {
        &self.forms
    }

    /// The stiffness side `K` of `Kφ = μMφ`; `M` is `forms().mass()`.
    pub fn operator(&self) -> &SymBandMatrix {
        &self.operator
    }

    pub fn rayleigh_quotient(&self, coefficients: &[f64]) -> f64 {
        rayleigh_quotient(&self.operator, self.forms.mass(), coefficients)
    }

    pub fn smallest(&self, opts: &EigenOptions) -> Result<EigenResult> {
        solve_pencil(&self.forms, &self.operator, opts)
    }
}

/// Stability eigenvalue `μ₁(u)` at parameter `λ`.
pub fn mu1(u: &RadialField, params: &ProblemParams, lambda: f64) -> Result<EigenResult> {
    StabilityPencil::new(u, params, lambda)?.smallest(&EigenOptions::default())
}

fn check_hardy_mesh(n: usize, mesh: &Mesh) -> Result<()> {
    if n < 5 {
        return Err(Error::InvalidParameter(format!("Hardy-Rellich checks need n >= 5, got {n}")));
    }
    if mesh.dim() != n {
        return Err(Error::InvalidParameter(format!(
            "mesh dimension {} differs from n = {n}",
            mesh.dim()
        )));
    }
    Ok(())
}

/// Smallest eigenvalue of `∫(Δφ)² − c∫φ²/r⁴` relative to `∫φ²`.
pub fn hardy_rellich_gap(n: usize, coefficient: f64, mesh: &Mesh) -> Result<f64> {
    check_hardy_mesh(n, mesh)?;
    let forms = HermiteForms::new(*mesh);
    let p = forms.potential(|_, _, r| r.powi(-4));
    let k = forms.bilaplacian().axpy(-coefficient, &p);
    Ok(solve_pencil(&forms, &k, &EigenOptions::default())?.mu1)
}

/// The improved two-term weight, multiplied by `r⁴`:
/// `A/((1 − 0.9 r^{n/2−1})(1 − r^{n/2−2})) + B/(1 − r^{n/2−2})` with
/// `A = (n−2)²(n−4)²/16`, `B = (n−1)(n−4)²/4`. Its limit at `r = 0` is `Hₙ`.
pub fn weighted_potential_r4(n: usize, r: f64) -> f64 {
    let nf = n as f64;
    let a = (nf - 2.0).powi(2) * (nf - 4.0).powi(2) / 16.0;
    let b = (nf - 1.0) * (nf - 4.0).powi(2) / 4.0;
    let s = 1.0 - r.powf(nf / 2.0 - 2.0);
    a / ((1.0 - 0.9 * r.powf(nf / 2.0 - 1.0)) * s) + b / s
}

/// Smallest eigenvalue of `∫(Δφ)²` minus the improved two-term weighted
/// Hardy-Rellich potential.
pub fn weighted_hardy_gap(n: usize, mesh: &Mesh) -> Result<f64> {
    check_hardy_mesh(n, mesh)?;
    let forms = HermiteForms::new(*mesh);
    let p = forms.potential(|_, _, r| weighted_potential_r4(n, r) / r.powi(4));
    let k = forms.bilaplacian().axpy(-1.0, &p);
    Ok(solve_pencil(&forms, &k, &EigenOptions::default())?.mu1)
}

/// The best radial Hardy-Rellich constant, re-exported for convenience.
pub fn hardy_constant(n: usize) -> f64 {
    hn(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn clamped_plate_eigenvalue_n3() {
        let m = Mesh::new(64, 3).unwrap();
        let params = ProblemParams::new(3, 2.0).unwrap();
        let r = mu1(&RadialField::zeros(m), &params, 0.0).unwrap();
        assert!((r.mu1 - 237.721).abs() < 0.05, "{}", r.mu1);
        assert!(r.residual < 1e-8);
        let norm = quadrature(
            &RadialField::new(m, r.eigenfunction.values().iter().map(|v| v * v).collect()).unwrap(),
            0.0,
        )
        .unwrap();
        assert_relative_eq!(norm, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn rayleigh_quotient_matches() {
        let m = Mesh::new(64, 5).unwrap();
        let params = ProblemParams::new(5, 3.0).unwrap();
        let u = RadialField::from_fn(m, |r| 0.3 * (1.0 - r * r).powi(2)).unwrap();
        let pencil = StabilityPencil::new(&u, &params, 20.0).unwrap();
        let r = pencil.smallest(&EigenOptions::default()).unwrap();
        assert_relative_eq!(pencil.rayleigh_quotient(&r.coefficients), r.mu1, max_relative = 1e-8);
    }

    #[test]
    fn larger_lambda_lowers_mu1() {
        let m = Mesh::new(64, 3).unwrap();
        let params = ProblemParams::new(3, 2.0).unwrap();
        let u = RadialField::from_fn(m, |r| 0.2 * (1.0 - r * r).powi(2)).unwrap();
        let a = mu1(&u, &params, 5.0).unwrap().mu1;
        let b = mu1(&u, &params, 10.0).unwrap().mu1;
        assert!(b < a);
    }

    #[test]
    fn zero_coefficient_gap_is_plate_eigenvalue() {
        let m = Mesh::new(64, 13).unwrap();
        let params = ProblemParams::new(13, 2.0).unwrap();
        let g = hardy_rellich_gap(13, 0.0, &m).unwrap();
        let e = mu1(&RadialField::zeros(m), &params, 0.0).unwrap().mu1;
        assert_relative_eq!(g, e, max_relative = 1e-10);
    }

    #[test]
    fn weighted_potential_limit() {
        for n in [5, 13, 31] {
            assert_relative_eq!(weighted_potential_r4(n, 0.0), hn(n), max_relative = 1e-14);
        }
    }

    #[test]
    fn rejects_low_dimension() {
        let m = Mesh::new(32, 4).unwrap();
        assert!(hardy_rellich_gap(4, 0.0, &m).is_err());
        let m = Mesh::new(32, 13).unwrap();
        assert!(hardy_rellich_gap(5, 0.0, &m).is_err());
    }
}
