//! Quadrature over balls `B_R` and spheres `∂B_R` centred at the origin of
//! a [`Grid`].
//!
//! Ball integrals weight each node by the fraction of its cell
//! `x + [-h/2, h/2]^n` lying inside `B_R`. Cells straddling the sphere are
//! estimated with `4^n` subsamples at the midpoints of a `4 x ... x 4`
//! subdivision. Every node weight is nondecreasing in `R` and the sum runs
//! in a fixed order, so integrals of nonnegative densities are
//! nondecreasing in `R` even in floating point.
//!
//! Sphere integrals use equally spaced angles (n = 2) or a
//! latitude–longitude grid with exact band areas (n = 3), with angular
//! spacing at most `h / R`, and multilinear interpolation of node values.

use std::f64::consts::PI;

use crate::error::Result;
use crate::field::{Field, Grid};
use crate::tensor::tensor_from_jacobian;

/// Scalar densities evaluated at grid nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Density {
    One,
    /// `|∇u|²/2 + W(u)`
    Energy,
    /// `W(u)`
    Potential,
    /// `(n-2)/2 |∇u|² + n W(u)`
    FDensity,
    /// `|∇u|²/2`
    HalfGradSq,
    /// `tr T(u)`, summed from the tensor diagonal.
    TraceStress,
}

/// Densities integrated over spheres.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceDensity {
    Scalar(Density),
    /// `νᵀ T(u) ν` with `ν = x / R`.
    NormalStress,
}

/// Rank-1 lattice generators for the `4^n` subsamples: point `k` sits at
/// `((k z_d mod 4^n) + 1/2) / 4^n - 1/2` along axis `d`, so every axis sees
/// `4^n` distinct offsets. Each generator is the lexicographically first
/// one maximising the minimal periodic point distance.
const LATTICE_2: [u32; 2] = [1, 3];
const LATTICE_3: [u32; 3] = [1, 5, 19];

/// Fraction of the cell centred at `x` (spacing `h`) inside `B_R`.
pub fn cell_coverage(x: &[f64; 3], n: usize, h: f64, radius: f64) -> f64 {
    let half = 0.5 * h;
    let (mut near, mut far) = (0.0, 0.0);
    for &c in &x[..n] {
        let a = c.abs();
        let lo = (a - half).max(0.0);
        let hi = a + half;
        near += lo * lo;
        far += hi * hi;
    }
    let r2 = radius * radius;
    if far <= r2 {
        return 1.0;
    }
    if near >= r2 {
        return 0.0;
    }
    let mut inside = 0u32;
    let total = 4u32.pow(n as u32);
    let z: &[u32] = if n == 2 { &LATTICE_2 } else { &LATTICE_3 };
    let scale = f64::from(total);
    for k in 0..total {
        let mut d2 = 0.0;
        for (&c, &zd) in x[..n].iter().zip(z) {
            let off = (f64::from(k * zd % total) + 0.5) / scale - 0.5;
            let p = c + off * h;
            d2 += p * p;
        }
        if d2 <= r2 {
            inside += 1;
        }
    }
    f64::from(inside) / f64::from(total)
}

/// `(flat index, coverage)` for every node whose cell meets `B_R`, in
/// storage order.
pub(crate) fn ball_weights(grid: &Grid, radius: f64) -> Vec<(usize, f64)> {
    let n = grid.n();
    let h = grid.spacing();
    let centre = (grid.points_per_axis() - 1) / 2;
    let reach = ((radius / h).ceil() as usize + 1).min(centre - 1);
    let (lo, hi) = (centre - reach, centre + reach);
    let mut out = Vec::new();
    let mut idx = [0usize; 3];
    let mut push = |idx: [usize; 3]| {
        let x = grid.position(idx);
        let c = cell_coverage(&x, n, h, radius);
        if c > 0.0 {
            out.push((grid.flat(idx), c));
        }
    };
    for i in lo..=hi {
        idx[0] = i;
        for j in lo..=hi {
            idx[1] = j;
            if n == 2 {
                push(idx);
            } else {
                for k in lo..=hi {
                    idx[2] = k;
                    push(idx);
                }
            }
        }
    }
    out
}

/// Value of `density` at interior node `flat`. `jac` is an `m * n` scratch
/// buffer.
pub(crate) fn node_density(field: &Field, density: Density, flat: usize, jac: &mut [f64]) -> f64 {
    if density == Density::One {
        return 1.0;
    }
    let n = field.grid().n();
    field.gradient_flat(flat, jac);
    let w = field.potential().value(field.at(flat));
    let grad_sq: f64 = jac.iter().map(|v| v * v).sum();
    let nf = n as f64;
    match density {
        Density::One => 1.0,
        Density::Energy => 0.5 * grad_sq + w,
        Density::Potential => w,
        Density::FDensity => 0.5 * (nf - 2.0) * grad_sq + nf * w,
        Density::HalfGradSq => 0.5 * grad_sq,
        Density::TraceStress => {
            let (t, _, _) = tensor_from_jacobian(jac, field.m(), n, w);
            (0..n).map(|i| t[i][i]).sum()
        }
    }
}

pub fn ball_integral(field: &Field, density: Density, radius: f64) -> Result<f64> {
    Ok(ball_integrals(field, &[density], radius)?[0])
}

/// Several ball integrals sharing one set of coverage weights.
pub fn ball_integrals(field: &Field, densities: &[Density], radius: f64) -> Result<Vec<f64>> {
    let grid = field.grid();
    grid.check_radius(radius)?;
    let mut jac = vec![0.0; field.m() * grid.n()];
    let mut sums = vec![0.0; densities.len()];
    for (flat, cov) in ball_weights(grid, radius) {
        for (s, &d) in sums.iter_mut().zip(densities) {
            *s += node_density(field, d, flat, &mut jac) * cov;
        }
    }
    let vol = grid.cell_volume();
    Ok(sums.into_iter().map(|s| s * vol).collect())
}

/// Quadrature node on a sphere: position, outward unit normal, weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    pub x: [f64; 3],
    pub normal: [f64; 3],
    pub weight: f64,
}

/// Quadrature nodes on `∂B_R` with angular spacing at most `h / R`.
pub fn sphere_points(n: usize, radius: f64, h: f64) -> Vec<SpherePoint> {
    let eps = 1e-12;
    let azimuths = ((2.0 * PI * radius / h) - eps).ceil().max(8.0) as usize;
    let dphi = 2.0 * PI / azimuths as f64;
    if n == 2 {
        return (0..azimuths)
            .map(|k| {
                let phi = (k as f64 + 0.5) * dphi;
                let normal = [phi.cos(), phi.sin(), 0.0];
                SpherePoint {
                    x: [radius * normal[0], radius * normal[1], 0.0],
                    normal,
                    weight: radius * dphi,
                }
            })
            .collect();
    }
    let bands = ((PI * radius / h) - eps).ceil().max(4.0) as usize;
    let dtheta = PI / bands as f64;
    let mut out = Vec::with_capacity(bands * azimuths);
    for b in 0..bands {
        let (t0, t1) = (b as f64 * dtheta, (b + 1) as f64 * dtheta);
        let theta = 0.5 * (t0 + t1);
        let band_area = radius * radius * (t0.cos() - t1.cos()) * dphi;
        for k in 0..azimuths {
            let phi = (k as f64 + 0.5) * dphi;
            let normal = [
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ];
            out.push(SpherePoint {
                x: [radius * normal[0], radius * normal[1], radius * normal[2]],
                normal,
                weight: band_area,
            });
        }
    }
    out
}

fn node_components(
    field: &Field,
    density: SurfaceDensity,
    flat: usize,
    jac: &mut [f64],
    out: &mut [f64],
) {
    match density {
        SurfaceDensity::Scalar(d) => out[0] = node_density(field, d, flat, jac),
        SurfaceDensity::NormalStress => {
            let n = field.grid().n();
            field.gradient_flat(flat, jac);
            let w = field.potential().value(field.at(flat));
            let (t, _, _) = tensor_from_jacobian(jac, field.m(), n, w);
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] = t[i][j];
                }
            }
        }
    }
}

pub fn sphere_integral(field: &Field, density: SurfaceDensity, radius: f64) -> Result<f64> {
    let grid = field.grid();
    grid.check_radius(radius)?;
    let n = grid.n();
    let h = grid.spacing();
    let half = grid.half_width();
    let ncomp = match density {
        SurfaceDensity::Scalar(_) => 1,
        SurfaceDensity::NormalStress => n * n,
    };
    let strides = grid.strides();
    let mut jac = vec![0.0; field.m() * n];
    let mut corner_vals = vec![0.0; ncomp];
    let mut interp = vec![0.0; ncomp];
    let mut total = 0.0;
    for sp in sphere_points(n, radius, h) {
        let mut base = 0usize;
        let mut frac = [0.0; 3];
        for a in 0..n {
            let s = (sp.x[a] + half) / h;
            let i = (s.floor() as usize).min(grid.points_per_axis() - 2);
            frac[a] = s - i as f64;
            base += i * strides[a];
        }
        interp.iter_mut().for_each(|v| *v = 0.0);
        for corner in 0..(1usize << n) {
            let mut wgt = 1.0;
            let mut flat = base;
            for (a, &fr) in frac.iter().enumerate().take(n) {
                if corner >> a & 1 == 1 {
                    wgt *= fr;
                    flat += strides[a];
                } else {
                    wgt *= 1.0 - fr;
                }
            }
            node_components(field, density, flat, &mut jac, &mut corner_vals);
            for (v, c) in interp.iter_mut().zip(&corner_vals) {
                *v += wgt * c;
            }
        }
        let value = match density {
            SurfaceDensity::Scalar(_) => interp[0],
            SurfaceDensity::NormalStress => {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += sp.normal[i] * interp[i * n + j] * sp.normal[j];
                    }
                }
                s
            }
        };
        total += value * sp.weight;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialSpec;

    fn unit_field(n: usize, half: f64, points: usize) -> Field {
        Field::constant(
            Grid::new(n, half, points).unwrap(),
            PotentialSpec::double_well(),
            &[0.0],
        )
        .unwrap()
    }

    #[test]
    fn coverage_limits() {
        assert_eq!(cell_coverage(&[0.0; 3], 2, 0.1, 1.0), 1.0);
        assert_eq!(cell_coverage(&[2.0, 0.0, 0.0], 2, 0.1, 1.0), 0.0);
        let c = cell_coverage(&[1.0, 0.0, 0.0], 2, 0.1, 1.0);
        assert!(c > 0.3 && c < 0.7);
    }

    #[test]
    fn coverage_nondecreasing_in_radius() {
        let x = [0.73, -0.41, 0.2];
        for n in [2, 3] {
            let mut prev = 0.0;
            for k in 0..200 {
                let c = cell_coverage(&x, n, 0.1, 0.5 + k as f64 * 0.003);
                assert!(c >= prev);
                prev = c;
            }
            assert_eq!(prev, 1.0);
        }
    }

    #[test]
    fn disc_area() {
        let f = unit_field(2, 1.2, 121);
        let got = ball_integral(&f, Density::One, 1.0).unwrap();
        assert!((got - PI).abs() / PI < 5e-3, "{got}");
    }

    #[test]
    fn ball_volume() {
        let f = unit_field(3, 1.3, 53);
        let got = ball_integral(&f, Density::One, 1.0).unwrap();
        let want = 4.0 * PI / 3.0;
        assert!((got - want).abs() / want < 1e-2, "{got}");
    }

    #[test]
    fn constant_potential_density() {
        let f = unit_field(2, 1.2, 121);
        let got = ball_integral(&f, Density::Potential, 0.8).unwrap();
        let want = 0.25 * PI * 0.64;
        assert!((got - want).abs() / want < 5e-3);
        let tr = ball_integral(&f, Density::TraceStress, 0.8).unwrap();
        assert!((tr + 2.0 * want).abs() / want < 1e-2);
    }

    #[test]
    fn circle_and_sphere_measure() {
        let f2 = unit_field(2, 1.2, 121);
        let c = sphere_integral(&f2, SurfaceDensity::Scalar(Density::One), 1.0).unwrap();
        assert!((c - 2.0 * PI).abs() / (2.0 * PI) < 1e-3);
        let f3 = unit_field(3, 1.3, 53);
        let s = sphere_integral(&f3, SurfaceDensity::Scalar(Density::One), 1.0).unwrap();
        assert!((s - 4.0 * PI).abs() / (4.0 * PI) < 5e-3);
    }

    #[test]
    fn normal_stress_of_zero_field() {
        let f = unit_field(2, 1.2, 121);
        let s = sphere_integral(&f, SurfaceDensity::NormalStress, 1.0).unwrap();
        assert!((s + 0.25 * 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn angular_spacing_bound() {
        for (n, r, h) in [(2, 1.0, 0.02), (3, 1.7, 0.05), (2, 0.1, 0.05)] {
            let pts = sphere_points(n, r, h);
            let az = if n == 2 {
                pts.len()
            } else {
                pts.len() / ((PI * r / h).ceil().max(4.0) as usize)
            };
            assert!(2.0 * PI / az as f64 <= h / r + 1e-12);
        }
    }

    #[test]
    fn radius_range_enforced() {
        let f = unit_field(2, 1.0, 21);
        assert!(ball_integral(&f, Density::One, 0.05).is_err());
        assert!(ball_integral(&f, Density::One, 0.95).is_err());
        assert!(sphere_integral(&f, SurfaceDensity::NormalStress, 1.0).is_err());
        assert!(ball_integral(&f, Density::One, 0.8).is_ok());
    }
}
