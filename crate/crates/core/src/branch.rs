//! Minimal solutions and the solution branch.
//!
//! * [`monotone_iterate`]: the monotone scheme `u⁰ = 0`,
//!   `Δ²u^k = λ(1 − u^{k−1})^{−p}`, which converges to the minimal solution
//!   for `λ < λ*` and blows up otherwise.
//! * [`newton_refine`]: Newton on the coupled discrete system at fixed `λ`.
//! * [`continue_branch`]: amplitude continuation `a = u(0)` with `λ` as an
//!   unknown, which passes through the fold where `λ(a)` attains its maximum.

use log::{debug, info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::banded::BandMatrix;
use crate::clamped::{assemble, rhs, split, u_idx, ClampedBiharmonicSystem};
use crate::constants::{c0, k0, BoundaryPair, ProblemParams};
use crate::error::{Error, PicardFailure, Result};
use crate::mesh::{Mesh, RadialField};
use crate::operators::{laplacian_clamped, quadrature, quadrature_midpoints};
use crate::stability::mu1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Newton stops when `‖F‖∞ / max(1, ‖λ(1−u)^{−p}‖∞) < newton_tol`.
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Monotone iteration stops when `‖u^k − u^{k−1}‖∞ < picard_tol`.
    pub picard_tol: f64,
    pub max_picard: usize,
    /// Iterates with `max u > 1 − guard` are treated as touching the obstacle.
    pub guard: f64,
    pub mesh_cells: usize,
    /// Whether [`continue_branch`] fills in `μ₁` for every point.
    pub compute_mu1: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            max_newton: 30,
            picard_tol: 1e-9,
            max_picard: 5000,
            guard: 1e-6,
            mesh_cells: 256,
            compute_mu1: true,
        }
    }
}

impl SolverConfig {
    pub fn with_mesh(mut self, mesh_cells: usize) -> Self {
        self.mesh_cells = mesh_cells;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.newton_tol > 0.0 && self.picard_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.guard > 0.0 && self.guard < 0.1) {
            return bad("guard must lie in (0, 0.1)");
        }
        if self.max_newton == 0 || self.max_picard == 0 {
            return bad("iteration limits must be positive");
        }
        Mesh::new(self.mesh_cells, 1).map(|_| ())
    }

    fn mesh(&self, params: &ProblemParams) -> Result<Mesh> {
        self.validate()?;
        Mesh::new(self.mesh_cells, params.n())
    }
}

/// Converged monotone iteration.
#[derive(Debug, Clone)]
pub struct PicardSolution {
    pub u: RadialField,
    pub iterations: usize,
    /// Smallest nodewise increment `u^k_i − u^{k−1}_i` seen over the run.
    pub min_increment: f64,
}

/// Runs the monotone scheme from `u⁰ = 0` with homogeneous clamped data.
///
/// Monotonicity of the iterates is asserted at every step (tolerance 1e−9);
/// a violation is reported as [`Error::MonotonicityViolated`].
pub fn monotone_iterate(params: &ProblemParams, lambda: f64, config: &SolverConfig) -> Result<PicardSolution> {
    let mesh = config.mesh(params)?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    let mut u = RadialField::zeros(mesh);
    if lambda == 0.0 {
        return Ok(PicardSolution { u, iterations: 0, min_increment: 0.0 });
    }
    let system = ClampedBiharmonicSystem::new(mesh)?;
    let p = params.p();
    let mut min_increment = f64::INFINITY;
    for k in 1..=config.max_picard {
        let f: Vec<f64> = u.values().iter().map(|&ui| lambda * (1.0 - ui).powf(-p)).collect();
        let (next, _, _) = system.solve_coupled(&f, BoundaryPair::HOMOGENEOUS)?;
        let mut step = 0.0f64;
        for (i, (new, old)) in next.iter().zip(u.values()).enumerate() {
            let d = new - old;
            if d < -1e-9 {
                return Err(Error::MonotonicityViolated { node: i, drop: -d });
            }
            min_increment = min_increment.min(d);
            step = step.max(d.abs());
        }
        let top = next.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(top <= 1.0 - config.guard) {
            debug!("monotone iteration hit the guard at step {k} (max u = {top})");
            return Err(Error::NoConvergence { reason: PicardFailure::GuardTripped, iterations: k });
        }
        u = RadialField::new(mesh, next)?;
        if step < config.picard_tol {
            return Ok(PicardSolution { u, iterations: k, min_increment });
        }
    }
    Err(Error::NoConvergence { reason: PicardFailure::Stalled, iterations: config.max_picard })
}

fn source(u: &[f64], p: f64) -> Vec<f64> {
    u.iter().map(|&ui| (1.0 - ui).powf(-p)).collect()
}

struct Discrete {
    mesh: Mesh,
    p: f64,
    base: BandMatrix,
}

impl Discrete {
    fn new(mesh: Mesh, p: f64) -> Self {
        Self { mesh, p, base: assemble(&mesh) }
    }

    fn n(&self) -> usize {
        self.mesh.n_cells()
    }

    /// Residual `A x − b(λ, u)` and the scale `max(1, ‖λ f(u)‖∞)`.
    fn residual(&self, x: &[f64], lambda: f64) -> (Vec<f64>, f64) {
        let (u, _) = split(x);
        let f: Vec<f64> = source(&u, self.p).iter().map(|v| lambda * v).collect();
        let b = rhs(&self.mesh, &f, BoundaryPair::HOMOGENEOUS);
        let ax = self.base.matvec(x);
        let r: Vec<f64> = ax.iter().zip(&b).map(|(a, b)| a - b).collect();
        let scale = f[..self.n()].iter().map(|v| v.abs()).fold(1.0, f64::max);
        (r, scale)
    }

    fn jacobian(&self, x: &[f64], lambda: f64) -> BandMatrix {
        let mut j = self.base.clone();
        let p = self.p;
        for i in 0..self.n() {
            let ui = x[u_idx(i)];
            j.add(u_idx(i), u_idx(i), -p * lambda * (1.0 - ui).powf(-(p + 1.0)));
        }
        j
    }

    fn max_u(x: &[f64]) -> f64 {
        x.iter().step_by(2).copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn interleave(u: &[f64], v: &[f64]) -> Vec<f64> {
    u.iter().zip(v).flat_map(|(a, b)| [*a, *b]).collect()
}

/// Newton result at fixed `λ`.
#[derive(Debug, Clone)]
pub struct NewtonSolution {
    pub u: RadialField,
    pub iterations: usize,
    pub residual: f64,
}

/// Newton on the coupled discrete system at fixed `λ`, started from `u0`.
pub fn newton_refine(
    u0: &RadialField,
    params: &ProblemParams,
    lambda: f64,
    config: &SolverConfig,
) -> Result<NewtonSolution> {
    let mesh = *u0.mesh();
    if mesh.dim() != params.n() {
        return Err(Error::InvalidParameter("mesh dimension differs from n".into()));
    }
    if !(u0.max() < 1.0 - config.guard) {
        return Err(Error::InvalidParameter(format!("initial max u = {} is past the guard", u0.max())));
    }
    let disc = Discrete::new(mesh, params.p());
    // Lift v from the source rather than differencing u0: Δ_h applied to a
    // rounded u0 would put an O(ε/h⁴) residual into the Δv = f rows.
    let f: Vec<f64> = source(u0.values(), params.p()).iter().map(|v| lambda * v).collect();
    let (_, v0, _) = ClampedBiharmonicSystem::new(mesh)?.solve_coupled(&f, BoundaryPair::HOMOGENEOUS)?;
    let mut x = interleave(u0.values(), &v0);
    let mut growth = 0;
    let mut last = f64::INFINITY;
    for it in 0..=config.max_newton {
        let (r, scale) = disc.residual(&x, lambda);
        let res = norm_inf(&r) / scale;
        if res < config.newton_tol {
            let (u, _) = split(&x);
            return Ok(NewtonSolution { u: RadialField::new(mesh, u)?, iterations: it, residual: res });
        }
        if it == config.max_newton {
            break;
        }
        growth = if res > last { growth + 1 } else { 0 };
        if growth >= 3 {
            return Err(Error::NewtonDiverged(format!("residual grew for 3 steps (now {res:e})")));
        }
        last = res;
        let lu = disc.jacobian(&x, lambda).lu()?;
        let mut dx: Vec<f64> = r.iter().map(|v| -v).collect();
        lu.solve_in_place(&mut dx);
        x.iter_mut().zip(&dx).for_each(|(a, d)| *a += d);
        if !(Discrete::max_u(&x) < 1.0 - config.guard) {
            return Err(Error::NewtonDiverged("iterate reached the guard".into()));
        }
    }
    Err(Error::NewtonDiverged(format!("no convergence in {} steps", config.max_newton)))
}

/// Minimal solution at `λ`: monotone iteration followed by Newton polish.
pub fn minimal_solution(params: &ProblemParams, lambda: f64, config: &SolverConfig) -> Result<NewtonSolution> {
    let seed = monotone_iterate(params, lambda, config)?;
    newton_refine(&seed.u, params, lambda, config)
}

#[derive(Debug, Clone)]
struct State {
    x: Vec<f64>,
    lambda: f64,
}

// Bordered Newton for {F(x, λ) = 0, u₀ = a}.
fn newton_amplitude(disc: &Discrete, a: f64, mut s: State, config: &SolverConfig) -> Result<(State, usize, f64)> {
    let mut last = f64::INFINITY;
    let mut growth = 0;
    for it in 0..=config.max_newton {
        let (r, scale) = disc.residual(&s.x, s.lambda);
        let res = norm_inf(&r) / scale;
        let gap = (s.x[u_idx(0)] - a).abs();
        if res < config.newton_tol && gap < config.newton_tol {
            return Ok((s, it, res));
        }
        if it == config.max_newton {
            break;
        }
        growth = if res > last { growth + 1 } else { 0 };
        if growth >= 3 || !res.is_finite() {
            return Err(Error::NewtonDiverged(format!("residual {res:e} at a = {a}")));
        }
        last = res;
        let lu = disc.jacobian(&s.x, s.lambda).lu()?;
        let mut y: Vec<f64> = r.iter().map(|v| -v).collect();
        lu.solve_in_place(&mut y);
        let (u, _) = split(&s.x);
        let mut z = vec![0.0; s.x.len()];
        for (i, f) in source(&u, disc.p).iter().enumerate().take(disc.n()) {
            z[u_idx(i)] = -f;
        }
        lu.solve_in_place(&mut z);
        let z0 = z[u_idx(0)];
        if z0 == 0.0 || !z0.is_finite() {
            return Err(Error::NewtonDiverged(format!("degenerate border at a = {a}")));
        }
        let dl = (y[u_idx(0)] + s.x[u_idx(0)] - a) / z0;
        let dx: Vec<f64> = y.iter().zip(&z).map(|(y, z)| y - z * dl).collect();
        // damp steps that would cross the obstacle
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = s.x.iter().zip(&dx).map(|(x, d)| x + t * d).collect();
            if Discrete::max_u(&trial) < 1.0 - config.guard {
                s.x = trial;
                s.lambda += t * dl;
                break;
            }
            t *= 0.5;
            if t < 1e-4 {
                return Err(Error::NewtonDiverged(format!("step crosses the guard at a = {a}")));
            }
        }
    }
    Err(Error::NewtonDiverged(format!("no convergence in {} steps at a = {a}", config.max_newton)))
}

fn predict(history: &[(f64, State)], a: f64) -> State {
    match history {
        [] => unreachable!("prediction needs a seed"),
        [.., (a1, s1)] if history.len() == 1 => State { x: s1.x.clone(), lambda: s1.lambda * a / a1 },
        [.., (a0, s0), (a1, s1)] => {
            let t = (a - a1) / (a1 - a0);
            State {
                x: s1.x.iter().zip(&s0.x).map(|(x1, x0)| x1 + t * (x1 - x0)).collect(),
                lambda: s1.lambda + t * (s1.lambda - s0.lambda),
            }
        }
        _ => unreachable!(),
    }
}

// Solve at amplitude `a`, bisecting the step from the last history entry
// when the predictor is too far off.
fn advance(disc: &Discrete, history: &[(f64, State)], a: f64, config: &SolverConfig, depth: usize) -> Result<State> {
    match newton_amplitude(disc, a, predict(history, a), config) {
        Ok((s, _, _)) => Ok(s),
        Err(e) if depth >= 5 => Err(e),
        Err(_) => {
            let a_last = history.last().expect("history").0;
            let mid = 0.5 * (a_last + a);
            let s_mid = advance(disc, history, mid, config, depth + 1)?;
            let mut local: Vec<(f64, State)> = history.iter().rev().take(1).rev().cloned().collect();
            local.push((mid, s_mid));
            advance(disc, &local, a, config, depth + 1)
        }
    }
}

/// One point of the solution branch.
#[derive(Debug, Clone)]
pub struct BranchPoint {
    /// Amplitude `u(0)`.
    pub a: f64,
    pub lambda: f64,
    pub u: RadialField,
    pub mu1: Option<f64>,
    /// `∫ (Δu)² r^{n−1} dr`.
    pub energy_bilap: f64,
    /// `∫ (1 − u)^{−(p+1)} r^{n−1} dr`.
    pub energy_pot: f64,
    pub fold_flag: bool,
}

impl BranchPoint {
    pub fn u_max(&self) -> f64 {
        self.u.max()
    }

    pub fn lambda_over_k0(&self, params: &ProblemParams) -> f64 {
        self.lambda / k0(params)
    }
}

#[derive(Debug, Clone)]
pub struct BranchDiagram {
    pub params: ProblemParams,
    pub mesh_cells: usize,
    /// Sorted strictly by `a`.
    pub points: Vec<BranchPoint>,
    pub lambda_star_lower: f64,
    /// Refined amplitude of the first turning point: a maximum of `λ(a)`
    /// where the minimal branch loses stability.
    pub fold_location: Option<f64>,
    /// Amplitude of a maximum of `λ(a)` at which `μ₁` stays well away from
    /// zero. Past it the mesh no longer resolves the boundary layer at the
    /// center and the discrete branch collapses; it is not a fold.
    pub resolution_limit: Option<f64>,
    pub requested: usize,
    pub retained: usize,
    // index of the last point of the minimal branch
    minimal_end: usize,
}

impl BranchDiagram {
    /// Points up to and including the first maximum of `λ(a)` (the fold, or
    /// the resolution limit): the minimal branch.
    pub fn minimal_segment(&self) -> &[BranchPoint] {
        &self.points[..=self.minimal_end]
    }

    pub fn fold_point(&self) -> Option<&BranchPoint> {
        self.points.iter().find(|p| p.fold_flag)
    }

    /// Running maxima of the two energies over the minimal segment.
    pub fn energy_max(&self) -> (f64, f64) {
        self.minimal_segment()
            .iter()
            .fold((0.0f64, 0.0f64), |(b, p), pt| (b.max(pt.energy_bilap), p.max(pt.energy_pot)))
    }
}

/// `(∫ (Δu)² r^{n−1}, ∫ (1−u)^{−(p+1)} r^{n−1})`. The Laplacian is closed
/// at `r = 1` with `u'(1) = 0`; the potential is sampled at cell midpoints
/// so it is never evaluated where `u` may touch 1.
pub fn energy_diagnostics(u: &RadialField, params: &ProblemParams) -> Result<(f64, f64)> {
    let mesh = *u.mesh();
    let v = laplacian_clamped(u.values(), &mesh, 0.0);
    let v2 = RadialField::new(mesh, v.iter().map(|x| x * x).collect())?;
    let e_bilap = quadrature(&v2, 0.0)?;
    let uv = u.values();
    let p = params.p();
    let e_pot = quadrature_midpoints(&mesh, 0.0, |i| (1.0 - 0.5 * (uv[i] + uv[i + 1])).powf(-(p + 1.0)))?;
    Ok((e_bilap, e_pot))
}

fn build_point(a: f64, s: &State, mesh: Mesh, params: &ProblemParams) -> Result<BranchPoint> {
    let (u, _) = split(&s.x);
    let u = RadialField::new(mesh, u)?;
    if let Some(i) = u.values().windows(2).position(|w| w[1] > w[0] + 1e-9) {
        debug!("a = {a}: profile not radially nonincreasing at node {i}");
    }
    let (energy_bilap, energy_pot) = energy_diagnostics(&u, params)?;
    Ok(BranchPoint { a, lambda: s.lambda, u, mu1: None, energy_bilap, energy_pot, fold_flag: false })
}

/// A maximum of `λ(a)` counts as a fold only if `|μ₁|` there is below this
/// fraction of `μ₁` at `λ = 0`.
pub const FOLD_MU1_FRACTION: f64 = 0.05;

/// Traces the branch over the increasing amplitudes `a_grid ⊂ (0, 1 − guard)`.
///
/// Amplitudes where Newton fails are skipped; the call fails if fewer than
/// 80% of them are retained. The first local maximum of `λ(a)` is refined
/// by a parabola through its neighbours and a solve at the vertex; that
/// point carries `fold_flag` if the branch loses stability there (see
/// [`FOLD_MU1_FRACTION`]), and is recorded as the resolution limit
/// otherwise.
pub fn continue_branch(params: &ProblemParams, a_grid: &[f64], config: &SolverConfig) -> Result<BranchDiagram> {
    let mesh = config.mesh(params)?;
    if a_grid.is_empty() {
        return Err(Error::InvalidParameter("empty amplitude grid".into()));
    }
    if a_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("amplitude grid must be strictly increasing".into()));
    }
    if !(a_grid[0] > 0.0 && *a_grid.last().unwrap() < 1.0 - config.guard) {
        return Err(Error::InvalidParameter("amplitudes must lie in (0, 1 - guard)".into()));
    }
    let disc = Discrete::new(mesh, params.p());

    // linear seed: u ≈ a·w/w(0) with Δ²w = 1
    let system = ClampedBiharmonicSystem::new(mesh)?;
    let (w, wv, _) = system.solve_coupled(&vec![1.0; mesh.n_nodes()], BoundaryPair::HOMOGENEOUS)?;
    let w0 = w[0];
    let a0 = a_grid[0];
    let seed_x: Vec<f64> = interleave(&w, &wv).iter().map(|v| v * a0 / w0).collect();
    let seed = State { x: seed_x, lambda: a0 / w0 };

    let mut history: Vec<(f64, State)> = Vec::new();
    let mut solved: Vec<(f64, State)> = Vec::new();
    for &a in a_grid {
        let attempt = if history.is_empty() {
            newton_amplitude(&disc, a, seed.clone(), config).map(|r| r.0)
        } else {
            advance(&disc, &history, a, config, 0)
        };
        match attempt {
            Ok(s) => {
                debug!("a = {a}: lambda = {}", s.lambda);
                history.push((a, s.clone()));
                if history.len() > 2 {
                    history.remove(0);
                }
                solved.push((a, s));
            }
            Err(e) => warn!("skipping a = {a}: {e}"),
        }
    }
    let requested = a_grid.len();
    let retained = solved.len();
    if (retained as f64) < 0.8 * requested as f64 {
        return Err(Error::ContinuationFailed { retained, requested });
    }

    let mut points: Vec<BranchPoint> =
        solved.iter().map(|(a, s)| build_point(*a, s, mesh, params)).collect::<Result<_>>()?;

    let mut fold_location = None;
    let mut resolution_limit = None;
    let mut minimal_end = points.len() - 1;
    if let Some(i) = (1..points.len().saturating_sub(1))
        .find(|&i| points[i].lambda > points[i - 1].lambda && points[i].lambda >= points[i + 1].lambda)
    {
        let (x0, x1, x2) = (points[i - 1].a, points[i].a, points[i + 1].a);
        let (y0, y1, y2) = (points[i - 1].lambda, points[i].lambda, points[i + 1].lambda);
        let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
        let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
        let vertex = if den != 0.0 { x1 - 0.5 * num / den } else { x1 };
        let mut refined = None;
        if vertex > x0 && vertex < x2 && (vertex - x1).abs() > 1e-12 {
            let hist = vec![solved[i - 1].clone(), solved[i].clone()];
            match advance(&disc, &hist, vertex, config, 0) {
                Ok(s) => refined = Some(build_point(vertex, &s, mesh, params)?),
                Err(e) => warn!("fold refinement at a = {vertex} failed: {e}"),
            }
        }
        let (top, location) = match refined {
            Some(pt) if pt.lambda >= points[i].lambda => {
                let at = if vertex < x1 { i } else { i + 1 };
                points.insert(at, pt);
                (at, vertex)
            }
            _ => (i, x1),
        };
        minimal_end = top;
        // A turning point of the minimal branch is where it loses stability.
        let reference = mu1(&RadialField::zeros(mesh), params, 0.0)?.mu1;
        let at_top = mu1(&points[top].u, params, points[top].lambda)?.mu1;
        if at_top.abs() <= FOLD_MU1_FRACTION * reference {
            points[top].fold_flag = true;
            fold_location = Some(location);
        } else {
            info!("maximum of lambda at a = {location} with mu1 = {at_top} (mu1(0) = {reference}): resolution limit");
            resolution_limit = Some(location);
        }
    }

    if config.compute_mu1 {
        let values: Vec<Option<f64>> = points
            .par_iter()
            .map(|pt| match mu1(&pt.u, params, pt.lambda) {
                Ok(r) => Some(r.mu1),
                Err(e) => {
                    warn!("mu1 failed at a = {}: {e}", pt.a);
                    None
                }
            })
            .collect();
        for (pt, m) in points.iter_mut().zip(values) {
            pt.mu1 = m;
        }
    }

    let lambda_star_lower = points.iter().map(|p| p.lambda).fold(f64::NEG_INFINITY, f64::max);
    info!(
        "branch n = {}, p = {}: {} of {} points, lambda* >= {}",
        params.n(),
        params.p(),
        retained,
        requested,
        lambda_star_lower
    );
    Ok(BranchDiagram {
        params: *params,
        mesh_cells: mesh.n_cells(),
        points,
        lambda_star_lower,
        fold_location,
        resolution_limit,
        requested,
        retained,
        minimal_end,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaStarEstimate {
    pub lambda_star_lower: f64,
    pub lambda_star_lower_k0: f64,
    pub k0: f64,
    pub fold: Option<f64>,
    pub resolution_limit: Option<f64>,
    /// The numerical lower bound exceeds `K₀`, as it must.
    pub exceeds_k0: bool,
}

pub fn estimate_lambda_star(diagram: &BranchDiagram) -> LambdaStarEstimate {
    let k = k0(&diagram.params);
    let l = diagram.points.iter().map(|p| p.lambda).fold(f64::NEG_INFINITY, f64::max);
    LambdaStarEstimate {
        lambda_star_lower: l,
        lambda_star_lower_k0: l / k,
        k0: k,
        fold: diagram.fold_location,
        resolution_limit: diagram.resolution_limit,
        exceeds_k0: l > k,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    /// Minimum nodewise margin; negative means the bound is violated.
    pub margin: f64,
    pub worst_r: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    pub c0: f64,
    /// `1 − u ≤ C₀ r^{4/(p+1)}` (lower profile bound, `n ≥ 5`).
    pub lower_profile: Option<BoundCheck>,
    /// `u ≤ 1 − r^{4/(p+1)}` (upper profile bound, `n ≥ 13`).
    pub upper_profile: Option<BoundCheck>,
}

/// Tolerance of the pointwise profile checks.
pub const BOUNDS_TOL: f64 = -1e-6;

fn min_margin(mesh: &Mesh, f: impl Fn(usize) -> f64) -> BoundCheck {
    let (i, m) = (0..mesh.n_nodes())
        .map(|i| (i, f(i)))
        .fold((0, f64::INFINITY), |acc, (i, m)| if m < acc.1 { (i, m) } else { acc });
    BoundCheck { margin: m, worst_r: mesh.r(i), pass: m >= BOUNDS_TOL }
}

/// Nodewise margins of the two profile bounds satisfied by the extremal
/// solution, with `C₀ = (λ*/K₀)^{1/(p+1)}` from `lambda_star_est`.
pub fn check_pointwise_bounds(
    u: &RadialField,
    params: &ProblemParams,
    lambda_star_est: f64,
) -> Result<BoundsReport> {
    let mesh = *u.mesh();
    let alpha = params.alpha();
    let c = c0(lambda_star_est, params)?;
    let uv = u.values();
    let n = params.n();
    let lower_profile =
        (n >= 5).then(|| min_margin(&mesh, |i| c * mesh.r(i).powf(alpha) - (1.0 - uv[i])));
    let upper_profile =
        (n >= 13).then(|| min_margin(&mesh, |i| (1.0 - mesh.r(i).powf(alpha)) - uv[i]));
    Ok(BoundsReport { c0: c, lower_profile, upper_profile })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n_cells: usize) -> SolverConfig {
        SolverConfig { mesh_cells: n_cells, compute_mu1: false, ..SolverConfig::default() }
    }

    #[test]
    fn zero_lambda_is_trivial() {
        let params = ProblemParams::new(3, 2.0).unwrap();
        let s = monotone_iterate(&params, 0.0, &cfg(64)).unwrap();
        assert_eq!(s.iterations, 0);
        assert_eq!(s.u.max(), 0.0);
        let n = newton_refine(&s.u, &params, 0.0, &cfg(64)).unwrap();
        assert_eq!(n.iterations, 0);
        assert_eq!(n.u.max(), 0.0);
    }

    #[test]
    fn picard_then_newton() {
        let params = ProblemParams::new(3, 2.0).unwrap();
        let lambda = 0.5 * k0(&params);
        let s = monotone_iterate(&params, lambda, &cfg(128)).unwrap();
        assert!(s.min_increment >= -1e-9);
        assert!(s.u.max() < 1.0);
        let n = newton_refine(&s.u, &params, lambda, &cfg(128)).unwrap();
        assert!(n.iterations <= 5 && n.residual < 1e-10);
        let again = newton_refine(&n.u, &params, lambda, &cfg(128)).unwrap();
        assert_eq!(again.iterations, 0);
    }

    #[test]
    fn guard_trips_above_pull_in() {
        let params = ProblemParams::new(3, 2.0).unwrap();
        let err = monotone_iterate(&params, 1e4, &cfg(64)).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { reason: PicardFailure::GuardTripped, .. }));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig { guard: 0.2, ..SolverConfig::default() }.validate().is_err());
        assert!(SolverConfig { newton_tol: 0.0, ..SolverConfig::default() }.validate().is_err());
        assert!(SolverConfig::default().validate().is_ok());
    }

    #[test]
    fn energies_of_simple_profiles() {
        let params = ProblemParams::new(13, 2.0).unwrap();
        let mesh = Mesh::new(512, 13).unwrap();
        let (b, p) = energy_diagnostics(&RadialField::zeros(mesh), &params).unwrap();
        assert_eq!(b, 0.0);
        assert!((p - 1.0 / 13.0).abs() < 1e-4);
        let alpha = params.alpha();
        let ubar = RadialField::from_fn(mesh, |r| 1.0 - r.powf(alpha)).unwrap();
        let (_, p) = energy_diagnostics(&ubar, &params).unwrap();
        assert!((p - 1.0 / 9.0).abs() < 1e-3, "{p}");
    }

    #[test]
    fn singular_profile_bounds_are_tight() {
        let params = ProblemParams::new(13, 2.0).unwrap();
        let mesh = Mesh::new(128, 13).unwrap();
        let alpha = params.alpha();
        let ubar = RadialField::from_fn(mesh, |r| 1.0 - r.powf(alpha)).unwrap();
        let rep = check_pointwise_bounds(&ubar, &params, k0(&params)).unwrap();
        assert_eq!(rep.c0, 1.0);
        assert!(rep.lower_profile.unwrap().margin.abs() < 1e-15);
        assert!(rep.upper_profile.unwrap().margin.abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_grid() {
        let params = ProblemParams::new(3, 2.0).unwrap();
        assert!(continue_branch(&params, &[0.2, 0.1], &cfg(64)).is_err());
        assert!(continue_branch(&params, &[0.0, 0.1], &cfg(64)).is_err());
        assert!(continue_branch(&params, &[], &cfg(64)).is_err());
    }
}
