//! Discrete solutions of `Δu = ∇W(u)` with pinned (Dirichlet) boundary
//! values, by descent on the discrete energy
//!
//! ```text
//! E(u) = h^n [ Σ_interior W(u_j) + Σ_edges |u_b - u_a|² / (2h²) ]
//! ```
//!
//! whose gradient with respect to an interior value is
//! `h^n (∇W(u_j) - Δ_h u_j)`, so its critical points are exactly the
//! solutions of the `(2n+1)`-point discrete equation. Two step rules are
//! provided: the explicit gradient flow `u <- u + τ (Δu - ∇W(u))`, and a
//! Polak–Ribière conjugate-gradient acceleration of the same flow with a
//! secant trial step and Armijo backtracking. Updates are simultaneous
//! (Jacobi): every sweep reads only the previous iterate.

use std::path::PathBuf;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{load_field, Field, Grid, ResidualNorms};
use crate::potential::PotentialSpec;

/// Relative residual reduction requested when no tolerance is given.
pub const DEFAULT_RELATIVE_TOLERANCE: f64 = 1e-8;
/// Default tolerances never go below this absolute residual.
pub const TOLERANCE_FLOOR: f64 = 1e-10;

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub enum StepRule {
    FixedStep(f64),
    BacktrackingLineSearch,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// Keep the interior of the boundary-data field.
    OracleEmbedding,
    Constant(Vec<f64>),
    FileLoad(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub max_iterations: usize,
    /// Target max-norm of the residual. `None` means
    /// `max(1e-8 * initial residual, 1e-10)`.
    pub tolerance: Option<f64>,
    pub step_rule: StepRule,
    pub initial_guess: InitialGuess,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            max_iterations: 20_000,
            tolerance: None,
            step_rule: StepRule::BacktrackingLineSearch,
            initial_guess: InitialGuess::OracleEmbedding,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if let Some(t) = self.tolerance {
            if !(t > 0.0) {
                return Err(Error::InvalidSolveConfig(format!(
                    "tolerance must be positive, got {t}"
                )));
            }
        }
        if let StepRule::FixedStep(tau) = self.step_rule {
            let bound = grid.spacing().powi(2) / (2.0 * grid.n() as f64);
            if !(tau > 0.0 && tau < bound) {
                return Err(Error::InvalidSolveConfig(format!(
                    "fixed step {tau} must lie in (0, h^2/(2n) = {bound})"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub field: Field,
    pub converged: bool,
    pub iterations: usize,
    pub tolerance: f64,
    pub initial_residual: ResidualNorms,
    pub final_residual: ResidualNorms,
    pub energy_initial: f64,
    pub energy_final: f64,
    /// Energy change of every accepted step; all are `<= 0`.
    pub energy_deltas: Vec<f64>,
}

/// Replaces the interior of `boundary` according to `guess`, keeping its
/// boundary nodes.
pub fn seed(boundary: &Field, guess: &InitialGuess) -> Result<Field> {
    let grid = *boundary.grid();
    let m = boundary.m();
    let mut values = boundary.values().to_vec();
    match guess {
        InitialGuess::OracleEmbedding => {}
        InitialGuess::Constant(p) => {
            if p.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: p.len(),
                });
            }
            for flat in grid.interior_nodes(1) {
                values[flat * m..(flat + 1) * m].copy_from_slice(p);
            }
        }
        InitialGuess::FileLoad(path) => {
            let loaded = load_field(path, Some(boundary.potential().clone()))?;
            if loaded.grid() != &grid {
                return Err(Error::Incompatible(format!(
                    "initial guess {} is on a different grid",
                    path.display()
                )));
            }
            for flat in grid.interior_nodes(1) {
                values[flat * m..(flat + 1) * m].copy_from_slice(loaded.at(flat));
            }
        }
    }
    Field::new(grid, boundary.potential().clone(), values)
}

/// Discrete energy `E(u)` (see the module docs).
pub fn energy_total(field: &Field) -> f64 {
    let grid = field.grid();
    let values = field.values();
    let m = field.m();
    let potential = field.potential();
    let zeros = vec![0.0; values.len()];
    let interior = interior_mask(grid);
    let parts: Vec<f64> = slabs(grid)
        .into_par_iter()
        .map(|slab| {
            let mut acc = 0.0;
            for flat in slab.clone() {
                if interior[flat] {
                    acc += potential.value(&values[flat * m..(flat + 1) * m]);
                }
            }
            acc + edge_sum(grid, &interior, values, &zeros, 0.0, slab, m, true)
        })
        .collect();
    parts.iter().sum::<f64>() * grid.cell_volume()
}

/// Node ranges of the first-axis slabs, in storage order.
fn slabs(grid: &Grid) -> Vec<std::ops::Range<usize>> {
    let np = grid.points_per_axis();
    let size = grid.node_count() / np;
    (0..np).map(|i| i * size..(i + 1) * size).collect()
}

fn interior_mask(grid: &Grid) -> Vec<bool> {
    (0..grid.node_count())
        .map(|f| grid.is_interior(grid.multi(f), 1))
        .collect()
}

/// Edge part of `E(u + αd) - E(u)` (or of `E(u)` when `absolute`) for the
/// edges leaving nodes of `slab` in the positive axis directions, divided
/// by `h^n`.
#[allow(clippy::too_many_arguments)]
fn edge_sum(
    grid: &Grid,
    interior: &[bool],
    u: &[f64],
    d: &[f64],
    alpha: f64,
    slab: std::ops::Range<usize>,
    m: usize,
    absolute: bool,
) -> f64 {
    let n = grid.n();
    let strides = grid.strides();
    let np = grid.points_per_axis();
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let mut acc = 0.0;
    for flat in slab {
        let idx = grid.multi(flat);
        for a in 0..n {
            if idx[a] + 1 == np {
                continue;
            }
            let other = flat + strides[a];
            if !interior[flat] && !interior[other] {
                continue;
            }
            for c in 0..m {
                let s = u[other * m + c] - u[flat * m + c];
                if absolute {
                    acc += 0.5 * s * s * inv_h2;
                } else {
                    let t = alpha * (d[other * m + c] - d[flat * m + c]);
                    acc += 0.5 * t * (2.0 * s + t) * inv_h2;
                }
            }
        }
    }
    acc
}

struct Workspace<'a> {
    grid: Grid,
    potential: &'a PotentialSpec,
    m: usize,
    interior: Vec<bool>,
    slabs: Vec<std::ops::Range<usize>>,
}

impl Workspace<'_> {
    /// `Δu - ∇W(u)` at interior nodes (zero elsewhere); returns the max
    /// node-wise Euclidean norm.
    fn residual(&self, u: &[f64], out: &mut [f64]) -> f64 {
        let m = self.m;
        let chunk = self.grid.node_count() / self.grid.points_per_axis() * m;
        let maxima: Vec<f64> = out
            .par_chunks_mut(chunk)
            .enumerate()
            .map(|(s, block)| {
                let mut lap = vec![0.0; m];
                let mut gw = vec![0.0; m];
                let mut worst: f64 = 0.0;
                for (k, flat) in self.slabs[s].clone().enumerate() {
                    let dst = &mut block[k * m..(k + 1) * m];
                    if !self.interior[flat] {
                        dst.iter_mut().for_each(|v| *v = 0.0);
                        continue;
                    }
                    crate::field::laplacian_kernel(&self.grid, m, u, flat, &mut lap);
                    self.potential
                        .gradient_into(&u[flat * m..(flat + 1) * m], &mut gw);
                    let mut r2 = 0.0;
                    for c in 0..m {
                        dst[c] = lap[c] - gw[c];
                        r2 += dst[c] * dst[c];
                    }
                    worst = worst.max(r2.sqrt());
                }
                worst
            })
            .collect();
        maxima.into_iter().fold(0.0, f64::max)
    }

    /// `(E(u + αd) - E(u)) / h^n`, with `d` zero on the boundary.
    fn energy_change(&self, u: &[f64], d: &[f64], alpha: f64) -> f64 {
        let m = self.m;
        let parts: Vec<f64> = self
            .slabs
            .par_iter()
            .map(|slab| {
                let mut step = vec![0.0; m];
                let mut acc = 0.0;
                for flat in slab.clone() {
                    if !self.interior[flat] {
                        continue;
                    }
                    for c in 0..m {
                        step[c] = alpha * d[flat * m + c];
                    }
                    acc += self
                        .potential
                        .increment(&u[flat * m..(flat + 1) * m], &step);
                }
                acc + edge_sum(
                    &self.grid,
                    &self.interior,
                    u,
                    d,
                    alpha,
                    slab.clone(),
                    m,
                    false,
                )
            })
            .collect();
        parts.iter().sum()
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn axpy(out: &mut [f64], x: &[f64], alpha: f64, d: &[f64]) {
    out.par_iter_mut()
        .zip(x.par_iter().zip(d.par_iter()))
        .for_each(|(o, (a, b))| *o = a + alpha * b);
}

/// Descends the discrete energy from `field`, never touching its boundary
/// nodes. Non-convergence within `max_iterations` is reported through
/// [`SolveOutcome::converged`]; an energy increase under a fixed step is an
/// error.
pub fn minimize_energy(field: Field, config: &SolveConfig) -> Result<SolveOutcome> {
    let grid = *field.grid();
    config.validate(&grid)?;
    let potential = field.potential().clone();
    let m = potential.m();
    let ws = Workspace {
        grid,
        potential: &potential,
        m,
        interior: interior_mask(&grid),
        slabs: slabs(&grid),
    };
    let cell = grid.cell_volume();
    let energy_initial = energy_total(&field);
    let initial_residual = field.residual_norm();
    let tolerance = config.tolerance.unwrap_or_else(|| {
        (DEFAULT_RELATIVE_TOLERANCE * initial_residual.max_norm).max(TOLERANCE_FLOOR)
    });

    let mut u = field.into_values();
    let len = u.len();
    let mut r = vec![0.0; len];
    let mut trial = vec![0.0; len];
    let mut r_trial = vec![0.0; len];
    let mut deltas = Vec::new();
    let mut rmax = ws.residual(&u, &mut r);
    let mut converged = rmax <= tolerance;
    let mut iterations = 0;

    match config.step_rule {
        StepRule::FixedStep(tau) => {
            while !converged && iterations < config.max_iterations {
                let change = ws.energy_change(&u, &r, tau);
                if change > 0.0 {
                    return Err(Error::Diverged {
                        iteration: iterations,
                        increase: change * cell,
                    });
                }
                axpy(&mut trial, &u, tau, &r);
                std::mem::swap(&mut u, &mut trial);
                deltas.push(change * cell);
                iterations += 1;
                rmax = ws.residual(&u, &mut r);
                converged = rmax <= tolerance;
            }
        }
        StepRule::BacktrackingLineSearch => {
            let mut d = r.clone();
            let flow_step = grid.spacing().powi(2) / (2.0 * grid.n() as f64);
            let mut memory: Option<(f64, f64)> = None; // (alpha, slope) of the last step
            while !converged && iterations < config.max_iterations {
                let mut slope = -dot(&r, &d);
                if slope >= 0.0 {
                    d.copy_from_slice(&r);
                    slope = -dot(&r, &r);
                }
                let accepted = loop {
                    let guess = match memory {
                        Some((a, s)) => a * s / slope,
                        None => flow_step,
                    };
                    let guess = if guess.is_finite() && guess > 0.0 {
                        guess
                    } else {
                        flow_step
                    };
                    if let Some(step) =
                        line_search(&ws, &u, &d, slope, guess, &mut trial, &mut r_trial)
                    {
                        break Some(step);
                    }
                    if d == r {
                        break None;
                    }
                    // conjugate direction failed: restart on the gradient flow
                    d.copy_from_slice(&r);
                    slope = -dot(&r, &r);
                    memory = None;
                };
                let Some((alpha, change, have_residual)) = accepted else {
                    break;
                };
                axpy(&mut trial, &u, alpha, &d);
                std::mem::swap(&mut u, &mut trial);
                if !have_residual {
                    ws.residual(&u, &mut r_trial);
                }
                let rr = dot(&r, &r);
                let beta = ((dot(&r_trial, &r_trial) - dot(&r_trial, &r)) / rr).max(0.0);
                std::mem::swap(&mut r, &mut r_trial);
                d.par_iter_mut()
                    .zip(r.par_iter())
                    .for_each(|(di, ri)| *di = ri + beta * *di);
                deltas.push(change * cell);
                memory = Some((alpha, slope));
                iterations += 1;
                rmax = r
                    .chunks(m)
                    .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
                    .fold(0.0, f64::max);
                converged = rmax <= tolerance;
            }
        }
    }

    let field = Field::new(grid, potential, u)?;
    let final_residual = field.residual_norm();
    let energy_final = energy_total(&field);
    Ok(SolveOutcome {
        converged: final_residual.max_norm <= tolerance,
        field,
        iterations,
        tolerance,
        initial_residual,
        final_residual,
        energy_initial,
        energy_final,
        energy_deltas: deltas,
    })
}

/// Secant trial step with Armijo backtracking along `d`. Returns the
/// accepted step, its energy change `/ h^n`, and whether `r_trial` holds the
/// residual at the accepted point.
fn line_search(
    ws: &Workspace<'_>,
    u: &[f64],
    d: &[f64],
    slope: f64,
    guess: f64,
    trial: &mut [f64],
    r_trial: &mut [f64],
) -> Option<(f64, f64, bool)> {
    axpy(trial, u, guess, d);
    ws.residual(trial, r_trial);
    let slope_at_guess = -dot(r_trial, d);
    let curvature = (slope_at_guess - slope) / guess;
    let secant = if curvature > 0.0 {
        -slope / curvature
    } else {
        2.0 * guess
    };
    let armijo = |alpha: f64, change: f64| change <= ARMIJO * alpha * slope && change <= 0.0;

    let change = ws.energy_change(u, d, secant);
    if armijo(secant, change) {
        return Some((secant, change, secant == guess));
    }
    let change = ws.energy_change(u, d, guess);
    if armijo(guess, change) {
        return Some((guess, change, true));
    }
    let mut alpha = guess.min(secant);
    for _ in 0..MAX_BACKTRACKS {
        alpha *= 0.5;
        let change = ws.energy_change(u, d, alpha);
        if armijo(alpha, change) {
            return Some((alpha, change, false));
        }
    }
    None
}
