//! Sub-solution certificates for a singular extremal solution.
//!
//! The candidate is `ω_m(r) = 1 − a₁ r^{4/(p+1)} + a₂ r^m`. With
//! `x = r^{m−4/(p+1)}` one has
//!
//! ```text
//! Δ²ω_m ≤ λ′K₀ / (1 − ω_m)^p   on (0, 1)   ⟺   λ′ ≥ sup_{[0,1]} H(x),
//! H(x) = (a₁ − a₂x)^p · (a₁ + a₂(K₁/K₀)x),
//! ```
//!
//! and `ω_m` is stable at parameter `βK₀` when the improved Hardy-Rellich
//! potential dominates `pβK₀/(1 − ω_m)^{p+1}`. If both hold and `β > λ′`,
//! the extremal solution is singular; if `β ≥ λ′`, `λ* ≤ λ′K₀`.
//!
//! `λ′` and `β` are always in units of `K₀`.

use log::debug;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{hn, k0, k1, subsolution_coeffs, BoundaryPair, ProblemParams};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, RadialField};
use crate::operators::biharmonic_apply;
use crate::stability::weighted_potential_r4;

/// Grid size used by the supremum cross-check and the default pointwise checks.
pub const DEFAULT_GRID: usize = 10_000;

/// Distance from `r = 1` at which the pointwise stability check stops; the
/// weights diverge there.
pub const EDGE_CUTOFF: f64 = 1e-4;

/// `ω_m` together with its cached constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubsolutionSpec {
    pub m: f64,
    pub params: ProblemParams,
    pub a1: f64,
    pub a2: f64,
    pub k0_val: f64,
    pub k1_val: f64,
    pub hn_val: f64,
}

impl SubsolutionSpec {
    pub fn new(m: f64, params: ProblemParams) -> Result<Self> {
        let (a1, a2) = subsolution_coeffs(m, params.p())?;
        let k0_val = k0(&params);
        if !(k0_val > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "K0 = {k0_val} is not positive for n = {}, p = {}",
                params.n(),
                params.p()
            )));
        }
        Ok(Self { m, params, a1, a2, k0_val, k1_val: k1(m, params.n()), hn_val: hn(params.n()) })
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha()
    }

    /// `m = 2` switches the stability check to the plain Hardy-Rellich route.
    pub fn is_quadratic(&self) -> bool {
        (self.m - 2.0).abs() < 1e-12
    }

    /// `a₁ − a₂ r^{m−α}`, so that `1 − ω_m = r^α · base(r)`.
    pub fn base(&self, r: f64) -> f64 {
        self.a1 - self.a2 * r.powf(self.m - self.alpha())
    }
}

pub fn omega_eval(spec: &SubsolutionSpec, r: f64) -> f64 {
    1.0 - spec.a1 * r.powf(spec.alpha()) + spec.a2 * r.powf(spec.m)
}

pub fn h_function(spec: &SubsolutionSpec, x: f64) -> Result<f64> {
    let base = spec.a1 - spec.a2 * x;
    if !(base > 0.0) {
        return Err(Error::InvalidParameter(format!("a1 - a2 x = {base} is not positive at x = {x}")));
    }
    let p = spec.params.p();
    let tail = spec.a1 + spec.a2 * (spec.k1_val / spec.k0_val) * x;
    Ok((p * base.ln()).exp() * tail)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupH {
    pub x_star: f64,
    pub sup_value: f64,
    /// Unclamped interior critical point, when `K₁ ≠ 0`.
    pub critical_point: Option<f64>,
    /// Independent maximum from a uniform scan refined by golden section.
    pub grid_value: f64,
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-15 {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

/// `sup_{[0,1]} H` from the closed-form critical point, cross-checked
/// against a 10⁴-interval scan (relative disagreement above 1e−9 fails).
pub fn sup_h(spec: &SubsolutionSpec) -> Result<SupH> {
    let p = spec.params.p();
    let critical_point = (spec.k1_val != 0.0).then(|| {
        spec.a1 * (spec.k1_val - p * spec.k0_val) / (spec.a2 * spec.k1_val * (p + 1.0))
    });
    let mut best = (0.0, h_function(spec, 0.0)?);
    let h1 = h_function(spec, 1.0)?;
    if h1 > best.1 {
        best = (1.0, h1);
    }
    if let Some(xc) = critical_point.filter(|x| *x > 0.0 && *x < 1.0) {
        let hc = h_function(spec, xc)?;
        if hc > best.1 {
            best = (xc, hc);
        }
    }

    let n = DEFAULT_GRID;
    let h = |x: f64| h_function(spec, x).unwrap_or(f64::NEG_INFINITY);
    let (j, _) = (0..=n)
        .map(|j| (j, h(j as f64 / n as f64)))
        .fold((0, f64::NEG_INFINITY), |acc, (j, v)| if v > acc.1 { (j, v) } else { acc });
    let lo = j.saturating_sub(1) as f64 / n as f64;
    let hi = (j + 1).min(n) as f64 / n as f64;
    let grid_value = golden_max(h, lo, hi).max(h(j as f64 / n as f64));

    if (grid_value - best.1).abs() > 1e-9 * best.1.abs() {
        return Err(Error::GridMismatch { closed_form: best.1, grid: grid_value });
    }
    Ok(SupH { x_star: best.0, sup_value: best.1, critical_point, grid_value })
}

/// `λ′ − sup H`; nonnegative exactly when `ω_m` is a sub-solution at
/// parameter `λ′K₀`.
pub fn subsolution_margin(spec: &SubsolutionSpec, lambda_prime: f64) -> Result<f64> {
    Ok(lambda_prime - sup_h(spec)?.sup_value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityMargin {
    /// Minimum of the `r⁴`-normalized pointwise gap (including the limit).
    pub margin: f64,
    /// Where the minimum occurs (`0` for the analytic limit).
    pub worst_r: f64,
    /// Analytic `r → 0` value of the normalized gap.
    pub limit_at_zero: f64,
}

/// Pointwise comparison of the stability potential `pβK₀/(1 − ω_m)^{p+1}`
/// with a Hardy-Rellich weight, normalized by `r⁴`.
///
/// For `m ≠ 2` the weight is the improved two-term potential, checked on
/// `grid_size` uniform points of `(0, 1 − 10⁻⁴]` plus the `r → 0` limit
/// `Hₙ − pβK₀/a₁^{p+1}`. For `m = 2`, `a₁ − a₂r^{2−α} ≥ 1` reduces the
/// check to `Hₙ − pβK₀`.
pub fn stability_margin(spec: &SubsolutionSpec, beta: f64, grid_size: usize) -> Result<StabilityMargin> {
    let n = spec.params.n();
    if n < 5 {
        return Err(Error::InvalidParameter(format!("stability certificate needs n >= 5, got {n}")));
    }
    if grid_size < 1000 {
        return Err(Error::InvalidParameter(format!("grid_size must be >= 1000, got {grid_size}")));
    }
    let p = spec.params.p();
    let coupling = p * beta * spec.k0_val;
    if spec.is_quadratic() {
        let m = spec.hn_val - coupling;
        return Ok(StabilityMargin { margin: m, worst_r: 0.0, limit_at_zero: m });
    }
    let limit = spec.hn_val - coupling * (-(p + 1.0) * spec.a1.ln()).exp();
    let top = 1.0 - EDGE_CUTOFF;
    let (worst_r, worst) = (1..=grid_size)
        .map(|j| {
            let r = top * j as f64 / grid_size as f64;
            let g = weighted_potential_r4(n, r) - coupling * (-(p + 1.0) * spec.base(r).ln()).exp();
            (r, g)
        })
        .fold((0.0, limit), |acc, (r, g)| if g < acc.1 { (r, g) } else { acc });
    Ok(StabilityMargin { margin: worst, worst_r, limit_at_zero: limit })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    SingularCertified,
    LambdaStarBounded,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::SingularCertified => "singular_certified",
            Verdict::LambdaStarBounded => "lambda_star_bounded",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Nodewise comparison of the finite-difference `Δ²ω_m` with
/// `λ′K₀(1 − ω_m)^{−p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscreteCheck {
    pub mesh_cells: usize,
    /// `min (1 − Δ²ω/rhs)` over the checked nodes.
    pub min_relative_gap: f64,
    pub worst_r: f64,
    pub pass: bool,
}

/// Tolerance of [`DiscreteCheck`].
pub const DISCRETE_TOL: f64 = 1e-4;
const DISCRETE_CELLS: usize = 512;
const DISCRETE_R_MIN: f64 = 0.05;

/// Samples `Δ²ω_m` with the radial finite-difference operator on meshes of
/// `N` and `2N` cells and Richardson-extrapolates the shared nodes. Nodes
/// in `[0.05, 1 − 2h]` are compared: the center stencil and the ghost
/// closure at `r = 1` are only consistent for smoother fields.
pub fn discrete_subsolution_check(spec: &SubsolutionSpec, lambda_prime: f64) -> Result<DiscreteCheck> {
    let dim = spec.params.n();
    let apply = |cells: usize| -> Result<Vec<f64>> {
        let mesh = Mesh::new(cells, dim)?;
        let mut w = RadialField::from_fn(mesh, |r| omega_eval(spec, r))?.into_values();
        // ω(1) = 0 holds only up to rounding
        w[cells] = 0.0;
        let w = RadialField::new(mesh, w)?;
        Ok(biharmonic_apply(&w, BoundaryPair::HOMOGENEOUS)?.into_values())
    };
    let coarse = apply(DISCRETE_CELLS)?;
    let fine = apply(2 * DISCRETE_CELLS)?;
    let mesh = Mesh::new(DISCRETE_CELLS, dim)?;
    let p = spec.params.p();
    let mut worst = (f64::INFINITY, 0.0);
    for i in 0..=DISCRETE_CELLS - 2 {
        let r = mesh.r(i);
        if r < DISCRETE_R_MIN {
            continue;
        }
        let lhs = (4.0 * fine[2 * i] - coarse[i]) / 3.0;
        let one_minus = r.powf(spec.alpha()) * spec.base(r);
        let rhs = lambda_prime * spec.k0_val * (-p * one_minus.ln()).exp();
        let gap = if rhs.is_infinite() { 1.0 } else { 1.0 - lhs / rhs };
        if gap < worst.0 {
            worst = (gap, r);
        }
    }
    Ok(DiscreteCheck {
        mesh_cells: DISCRETE_CELLS,
        min_relative_gap: worst.0,
        worst_r: worst.1,
        pass: worst.0 >= -DISCRETE_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub n: usize,
    pub m: f64,
    pub p: f64,
    pub k0: f64,
    pub lambda_prime: f64,
    pub beta: f64,
    pub lambda_prime_abs: f64,
    pub beta_abs: f64,
    pub sup_h: f64,
    pub x_star: f64,
    /// `λ′ − sup H`.
    pub subsolution_margin: f64,
    pub stability_margin: f64,
    pub stability_worst_r: f64,
    pub limit_at_zero: f64,
    pub grid_size: usize,
    /// `β = λ′ = Hₙ/(pK₀)` within 1e−12.
    pub equality_case: bool,
    pub verdict: Verdict,
    /// `λ′` when the certificate bounds `λ*` from above (in `K₀` units).
    pub lambda_star_upper_k0: Option<f64>,
    pub discrete_check: DiscreteCheck,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Decision rule. Both margins must be nonnegative; then `β > λ′` (or the
/// equality case) certifies a singular extremal solution and `β ≥ λ′`
/// bounds `λ* ≤ λ′K₀`.
pub fn decide(subsolution_margin: f64, stability_margin: f64, beta: f64, lambda_prime: f64, equality_case: bool) -> Verdict {
    if !(subsolution_margin >= 0.0 && stability_margin >= 0.0) {
        return Verdict::Inconclusive;
    }
    if beta > lambda_prime || equality_case {
        Verdict::SingularCertified
    } else if beta >= lambda_prime {
        Verdict::LambdaStarBounded
    } else {
        Verdict::Inconclusive
    }
}

pub fn certify(spec: &SubsolutionSpec, lambda_prime: f64, beta: f64, grid_size: usize) -> Result<CertificateReport> {
    let sup = sup_h(spec)?;
    let sub = lambda_prime - sup.sup_value;
    let stab = stability_margin(spec, beta, grid_size)?;
    let p = spec.params.p();
    let threshold = spec.hn_val / (p * spec.k0_val);
    let equality_case = close(beta, lambda_prime) && close(lambda_prime, threshold);
    let verdict = decide(sub, stab.margin, beta, lambda_prime, equality_case);
    let discrete_check = discrete_subsolution_check(spec, lambda_prime)?;
    if sub >= 0.0 && !discrete_check.pass {
        debug!(
            "sub-solution margin {sub} but discrete gap {} at r = {}",
            discrete_check.min_relative_gap, discrete_check.worst_r
        );
    }
    Ok(CertificateReport {
        n: spec.params.n(),
        m: spec.m,
        p,
        k0: spec.k0_val,
        lambda_prime,
        beta,
        lambda_prime_abs: lambda_prime * spec.k0_val,
        beta_abs: beta * spec.k0_val,
        sup_h: sup.sup_value,
        x_star: sup.x_star,
        subsolution_margin: sub,
        stability_margin: stab.margin,
        stability_worst_r: stab.worst_r,
        limit_at_zero: stab.limit_at_zero,
        grid_size,
        equality_case,
        verdict,
        lambda_star_upper_k0: (verdict != Verdict::Inconclusive).then_some(lambda_prime),
        discrete_check,
    })
}

/// Exponent of `ω_m` used for every table row.
pub const TABLE_M: f64 = 3.5;

/// `(n, λ′, β)` for dimensions 13 through 31.
#[allow(clippy::approx_constant)]
pub fn table1_rows() -> Vec<(usize, f64, f64)> {
    (13..=31)
        .map(|n| {
            let (l, b) = match n {
                13 => (2.03, 2.15),
                14 => (2.34, 2.96),
                15 => (2.76, 3.12),
                16 => (3.13, 3.14),
                17 => (3.15, 3.18),
                18 => (3.19, 3.22),
                19..=30 => (4.0, 10.0),
                _ => (3.15, 4.0),
            };
            (n, l, b)
        })
        .collect()
}

/// Certifies every row at exponent `p`; rows run in parallel and come back
/// ordered by `n`. Failing rows are reported, not dropped.
pub fn run_table1(p: f64, grid_size: usize) -> Result<Vec<CertificateReport>> {
    if p < 100.0 {
        debug!("table rows at p = {p} < 100 are expected to fail");
    }
    table1_rows()
        .par_iter()
        .map(|&(n, l, b)| {
            let spec = SubsolutionSpec::new(TABLE_M, ProblemParams::new(n, p)?)?;
            certify(&spec, l, b, grid_size)
        })
        .collect()
}

/// Smallest `p` in `candidates` at which every table row is certified.
pub fn empirical_p0(candidates: &[f64], grid_size: usize) -> Result<Option<f64>> {
    for &p in candidates {
        let rows = run_table1(p, grid_size)?;
        if rows.iter().all(|r| r.verdict == Verdict::SingularCertified) {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

/// Default sweep for [`empirical_p0`].
pub const P0_CANDIDATES: [f64; 7] = [2.0, 5.0, 10.0, 25.0, 50.0, 100.0, 250.0];
