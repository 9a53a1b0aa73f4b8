//! Vector fields sampled on uniform Cartesian grids over `[-L, L]^n`, with
//! central-difference derivatives at interior nodes.

mod io;

pub use io::{load_field, read_field, save_field, write_field, FIELD_MAGIC};

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;

/// Node multi-index. Unused trailing axes (n = 2) hold 0.
pub type Node = [usize; 3];

/// Uniform isotropic grid on the box `[-L, L]^n` with an odd number of
/// points per axis, so the origin is always a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    half_width: f64,
    points: usize,
    h: f64,
}

impl Grid {
    pub fn new(n: usize, half_width: f64, points_per_axis: usize) -> Result<Self> {
        if !(2..=3).contains(&n) {
            return Err(Error::InvalidGrid(format!("n must be 2 or 3, got {n}")));
        }
        if points_per_axis < 5 || points_per_axis.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be odd and >= 5, got {points_per_axis}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        Ok(Grid {
            n,
            half_width,
            points: points_per_axis,
            h: 2.0 * half_width / (points_per_axis - 1) as f64,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// `h^n`, the volume of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.n as i32)
    }

    pub fn node_count(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    /// Flat-index stride of each axis (row-major, last axis fastest).
    pub fn strides(&self) -> [usize; 3] {
        let np = self.points;
        match self.n {
            2 => [np, 1, 0],
            _ => [np * np, np, 1],
        }
    }

    pub fn flat(&self, idx: Node) -> usize {
        let s = self.strides();
        (0..self.n).map(|a| idx[a] * s[a]).sum()
    }

    pub fn multi(&self, mut flat: usize) -> Node {
        let mut idx = [0; 3];
        for a in (0..self.n).rev() {
            idx[a] = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    /// Coordinate of grid line `i`; exactly antisymmetric about the centre
    /// line, which sits at exactly 0.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        let last = (self.points - 1) as f64;
        self.half_width * (2.0 * i as f64 - last) / last
    }

    pub fn position(&self, idx: Node) -> [f64; 3] {
        let mut x = [0.0; 3];
        for a in 0..self.n {
            x[a] = self.coord(idx[a]);
        }
        x
    }

    pub fn origin(&self) -> Node {
        let c = (self.points - 1) / 2;
        let mut idx = [0; 3];
        idx[..self.n].iter_mut().for_each(|v| *v = c);
        idx
    }

    /// True when `idx` is at least `margin` nodes away from every face.
    pub fn is_interior(&self, idx: Node, margin: usize) -> bool {
        (0..self.n).all(|a| idx[a] >= margin && idx[a] + margin < self.points)
    }

    pub(crate) fn require_interior(&self, idx: Node, margin: usize) -> Result<()> {
        if idx[..self.n].iter().any(|&i| i >= self.points) || !self.is_interior(idx, margin) {
            return Err(Error::NotInterior { node: idx, margin });
        }
        Ok(())
    }

    /// Smallest admissible analysis radius, `2h`.
    pub fn min_radius(&self) -> f64 {
        2.0 * self.h
    }

    /// Largest admissible analysis radius, `L - 2h`.
    pub fn max_radius(&self) -> f64 {
        self.half_width - 2.0 * self.h
    }

    pub fn check_radius(&self, radius: f64) -> Result<()> {
        let (min, max) = (self.min_radius(), self.max_radius());
        // Radii computed as k*h can land an ulp outside the nominal bounds.
        let slack = 1e-12 * self.half_width;
        if !(radius >= min - slack && radius <= max + slack) {
            return Err(Error::RadiusOutOfRange { radius, min, max });
        }
        Ok(())
    }

    /// Flat indices of all nodes with margin `margin`, in storage order.
    pub fn interior_nodes(&self, margin: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.node_count()).filter(move |&f| self.is_interior(self.multi(f), margin))
    }
}

/// Jacobian of `u` at a node: entry `(a, i)` is `du_a / dx_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub m: usize,
    pub n: usize,
    pub data: Vec<f64>,
}

impl Jacobian {
    pub fn get(&self, a: usize, i: usize) -> f64 {
        self.data[a * self.n + i]
    }

    /// `|grad u|^2 = sum_{a,i} (du_a/dx_i)^2`.
    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualNorms {
    pub max_norm: f64,
    pub l2_norm: f64,
}

/// `u: grid -> R^m`, stored row-major over the node multi-index with the
/// component index innermost.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    potential: PotentialSpec,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, potential: PotentialSpec, values: Vec<f64>) -> Result<Self> {
        let expected = grid.node_count() * potential.m();
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "non-finite value at node {:?}",
                grid.multi(pos / potential.m())
            )));
        }
        Ok(Field {
            grid,
            potential,
            values,
        })
    }

    /// Builds a field by evaluating `f(x, out)` at every node.
    pub fn from_fn(
        grid: Grid,
        potential: PotentialSpec,
        mut f: impl FnMut(&[f64; 3], &mut [f64]),
    ) -> Result<Self> {
        let m = potential.m();
        let mut values = vec![0.0; grid.node_count() * m];
        for (flat, chunk) in values.chunks_mut(m).enumerate() {
            f(&grid.position(grid.multi(flat)), chunk);
        }
        Field::new(grid, potential, values)
    }

    pub fn constant(grid: Grid, potential: PotentialSpec, p: &[f64]) -> Result<Self> {
        if p.len() != potential.m() {
            return Err(Error::DimensionMismatch {
                expected: potential.m(),
                got: p.len(),
            });
        }
        let values = p
            .iter()
            .copied()
            .cycle()
            .take(grid.node_count() * p.len())
            .collect();
        Field::new(grid, potential, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn m(&self) -> usize {
        self.potential.m()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, flat: usize) -> &[f64] {
        let m = self.m();
        &self.values[flat * m..(flat + 1) * m]
    }

    pub fn value(&self, idx: Node) -> &[f64] {
        self.at(self.grid.flat(idx))
    }

    pub fn gradient(&self, idx: Node) -> Result<Jacobian> {
        self.grid.require_interior(idx, 1)?;
        let (m, n) = (self.m(), self.grid.n());
        let mut data = vec![0.0; m * n];
        self.gradient_flat(self.grid.flat(idx), &mut data);
        Ok(Jacobian { m, n, data })
    }

    /// Second-order central differences at interior node `flat` into an
    /// `m x n` row-major buffer. No bounds check beyond slice indexing.
    #[inline]
    pub fn gradient_flat(&self, flat: usize, out: &mut [f64]) {
        let (m, n) = (self.m(), self.grid.n());
        let strides = self.grid.strides();
        let inv = 0.5 / self.grid.spacing();
        for (i, &s) in strides.iter().enumerate().take(n) {
            let fwd = self.at(flat + s);
            let bwd = self.at(flat - s);
            for a in 0..m {
                out[a * n + i] = (fwd[a] - bwd[a]) * inv;
            }
        }
    }

    pub fn laplacian(&self, idx: Node) -> Result<Vec<f64>> {
        self.grid.require_interior(idx, 1)?;
        let mut out = vec![0.0; self.m()];
        self.laplacian_flat(self.grid.flat(idx), &mut out);
        Ok(out)
    }

    /// Standard `(2n+1)`-point Laplacian at interior node `flat`.
    #[inline]
    pub fn laplacian_flat(&self, flat: usize, out: &mut [f64]) {
        laplacian_kernel(&self.grid, self.m(), &self.values, flat, out);
    }

    pub fn energy_density(&self, idx: Node) -> Result<f64> {
        let j = self.gradient(idx)?;
        Ok(0.5 * j.norm_sq() + self.potential.value(self.value(idx)))
    }

    /// Max and `h`-weighted `L^2` norms of `Δu - ∇W(u)` over interior nodes.
    pub fn residual_norm(&self) -> ResidualNorms {
        residual_norms(&self.grid, &self.potential, &self.values)
    }
}

#[inline]
pub(crate) fn laplacian_kernel(
    grid: &Grid,
    m: usize,
    values: &[f64],
    flat: usize,
    out: &mut [f64],
) {
    let strides = grid.strides();
    let inv = 1.0 / (grid.spacing() * grid.spacing());
    let centre = &values[flat * m..(flat + 1) * m];
    out.iter_mut().for_each(|o| *o = 0.0);
    for &s in strides.iter().take(grid.n()) {
        let fwd = &values[(flat + s) * m..(flat + s + 1) * m];
        let bwd = &values[(flat - s) * m..(flat - s + 1) * m];
        for a in 0..m {
            out[a] += fwd[a] - 2.0 * centre[a] + bwd[a];
        }
    }
    out.iter_mut().for_each(|o| *o *= inv);
}

pub(crate) fn residual_norms(
    grid: &Grid,
    potential: &PotentialSpec,
    values: &[f64],
) -> ResidualNorms {
    let m = potential.m();
    let mut lap = vec![0.0; m];
    let mut gw = vec![0.0; m];
    let mut max_norm: f64 = 0.0;
    let mut sum_sq = 0.0;
    for flat in grid.interior_nodes(1) {
        laplacian_kernel(grid, m, values, flat, &mut lap);
        potential.gradient_into(&values[flat * m..(flat + 1) * m], &mut gw);
        let r2: f64 = lap.iter().zip(&gw).map(|(l, g)| (l - g) * (l - g)).sum();
        max_norm = max_norm.max(r2.sqrt());
        sum_sq += r2;
    }
    ResidualNorms {
        max_norm,
        l2_norm: (sum_sq * grid.cell_volume()).sqrt(),
    }
}
