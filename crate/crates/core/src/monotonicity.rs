//! Radial ball-energy profiles, their rescalings, and monotonicity
//! verdicts.
//!
//! For a field `u` on a grid centred at 0 the profiles are
//!
//! ```text
//! f(R) = ∫_{B_R} (n-2)/2 |∇u|² + n W(u)
//! e(R) = ∫_{B_R} |∇u|²/2 + W(u)
//! w(R) = ∫_{B_R} W(u)
//! ```
//!
//! Monotonicity of `R^{-k} v(R)` is certified on a finite radius grid by
//! consecutive differences.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Field, Grid};
use crate::quadrature::ball_weights;
use crate::verdict::{Location, Property, Verdict};

pub use crate::quadrature::{ball_integral, sphere_integral, Density, SurfaceDensity};

pub const MIN_PROFILE_POINTS: usize = 8;
pub const DEFAULT_RADIUS_COUNT: usize = 32;
pub const REL_TOL: f64 = 1e-3;
pub const ABS_TOL: f64 = 1e-10;
/// `ModicaPointwise` tolerance is `MODICA_COEFF * h²`, floored at
/// [`MODICA_FLOOR`]. The heteroclinic attains equality with a discrete
/// defect of about `0.011 h²`.
pub const MODICA_COEFF: f64 = 0.05;
pub const MODICA_FLOOR: f64 = 1e-8;
pub const CONSISTENCY_TOL: f64 = 1e-10;

pub const CSV_HEADER: &str =
    "R,f,e,w,f_scaled_weak,f_scaled_strong,e_scaled_weak,e_scaled_strong,w_scaled";

#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub n: usize,
    pub radii: Vec<f64>,
    pub f_vals: Vec<f64>,
    pub e_vals: Vec<f64>,
    pub w_vals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    F,
    E,
    W,
}

/// `count` radii uniformly spaced in `[4h, L - 2h]`.
pub fn default_radii(grid: &Grid, count: usize) -> Vec<f64> {
    let lo = 4.0 * grid.spacing();
    let hi = grid.max_radius();
    let steps = (count.max(2) - 1) as f64;
    (0..count.max(2))
        .map(|k| lo + (hi - lo) * k as f64 / steps)
        .collect()
}

pub fn build_profile(field: &Field, radii: &[f64]) -> Result<RadialProfile> {
    let grid = field.grid();
    if radii.len() < MIN_PROFILE_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_PROFILE_POINTS,
            got: radii.len(),
        });
    }
    if radii.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidRadii(
            "radii must be strictly increasing".into(),
        ));
    }
    for &r in radii {
        grid.check_radius(r)?;
    }

    // per-node densities, computed once: (f, e, w)
    let n = grid.n();
    let nf = n as f64;
    let mut dens = vec![[0.0; 3]; grid.node_count()];
    let mut jac = vec![0.0; field.m() * n];
    for flat in grid.interior_nodes(1) {
        field.gradient_flat(flat, &mut jac);
        let gsq: f64 = jac.iter().map(|v| v * v).sum();
        let w = field.potential().value(field.at(flat));
        dens[flat] = [0.5 * (nf - 2.0) * gsq + nf * w, 0.5 * gsq + w, w];
    }

    let vol = grid.cell_volume();
    let sums: Vec<[f64; 3]> = radii
        .par_iter()
        .map(|&r| {
            // partial sums per grid line along the last axis, then over
            // lines; both orders are fixed, so sums stay monotone in R
            let np = grid.points_per_axis();
            let (mut total, mut line) = ([0.0; 3], [0.0; 3]);
            let mut current = usize::MAX;
            for (flat, cov) in ball_weights(grid, r) {
                if flat / np != current {
                    for c in 0..3 {
                        total[c] += line[c];
                    }
                    line = [0.0; 3];
                    current = flat / np;
                }
                for c in 0..3 {
                    line[c] += dens[flat][c] * cov;
                }
            }
            for c in 0..3 {
                total[c] += line[c];
            }
            total.map(|v| v * vol)
        })
        .collect();

    Ok(RadialProfile {
        n,
        radii: radii.to_vec(),
        f_vals: sums.iter().map(|s| s[0]).collect(),
        e_vals: sums.iter().map(|s| s[1]).collect(),
        w_vals: sums.iter().map(|s| s[2]).collect(),
    })
}

/// `(R, R^{-k} v(R))` for the chosen profile. `k` must be `n-2`, `n-1` or 1.
pub fn scaled_profile(profile: &RadialProfile, which: Which, k: i32) -> Result<Vec<(f64, f64)>> {
    let n = profile.n as i32;
    if k != n - 2 && k != n - 1 && k != 1 {
        return Err(Error::InvalidExponent {
            exponent: k,
            n: profile.n,
        });
    }
    let vals = match which {
        Which::F => &profile.f_vals,
        Which::E => &profile.e_vals,
        Which::W => &profile.w_vals,
    };
    Ok(profile
        .radii
        .iter()
        .zip(vals)
        .map(|(&r, &v)| (r, v / r.powi(k)))
        .collect())
}

/// `rel * max|v| + abs` with the module defaults.
pub fn default_tolerance(scaled: &[(f64, f64)]) -> f64 {
    REL_TOL * scaled.iter().map(|p| p.1.abs()).fold(0.0, f64::max) + ABS_TOL
}

/// Largest decrease `v_k - v_{k+1}` between consecutive radii, located at
/// `R_{k+1}` (the first such radius on ties).
pub fn monotonicity_verdict(
    property: Property,
    scaled: &[(f64, f64)],
    tol: Option<f64>,
) -> Result<Verdict> {
    if scaled.len() < MIN_PROFILE_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_PROFILE_POINTS,
            got: scaled.len(),
        });
    }
    let mut worst = f64::NEG_INFINITY;
    let mut at = scaled[1].0;
    for w in scaled.windows(2) {
        let drop = w[0].1 - w[1].1;
        if drop > worst {
            worst = drop;
            at = w[1].0;
        }
    }
    let tol = tol.unwrap_or_else(|| default_tolerance(scaled));
    Ok(Verdict::new(property, worst, Location::Radius(at), tol))
}

pub fn modica_tolerance(grid: &Grid) -> f64 {
    (MODICA_COEFF * grid.spacing().powi(2)).max(MODICA_FLOOR)
}

/// Largest `|∇u|²/2 - W(u)` over interior nodes.
pub fn modica_check(field: &Field) -> Verdict {
    let grid = field.grid();
    let mut jac = vec![0.0; field.m() * grid.n()];
    let mut worst = f64::NEG_INFINITY;
    let mut at = grid.origin();
    for flat in grid.interior_nodes(1) {
        field.gradient_flat(flat, &mut jac);
        let v =
            0.5 * jac.iter().map(|x| x * x).sum::<f64>() - field.potential().value(field.at(flat));
        if v > worst {
            worst = v;
            at = grid.multi(flat);
        }
    }
    Verdict::new(
        Property::ModicaPointwise,
        worst,
        Location::Node(at),
        modica_tolerance(grid),
    )
}

/// Worst `|f - ((n-2)(e-w) + n w)|` over the radii.
pub fn profile_consistency(profile: &RadialProfile) -> Verdict {
    let nf = profile.n as f64;
    let mut worst = f64::NEG_INFINITY;
    let mut at = profile.radii[0];
    for k in 0..profile.radii.len() {
        let (f, e, w) = (profile.f_vals[k], profile.e_vals[k], profile.w_vals[k]);
        let d = (f - ((nf - 2.0) * (e - w) + nf * w)).abs();
        if d > worst {
            worst = d;
            at = profile.radii[k];
        }
    }
    Verdict::new(
        Property::ProfileConsistency,
        worst,
        Location::Radius(at),
        CONSISTENCY_TOL,
    )
}

/// Checks run by [`full_audit`], in emission order.
pub fn audit_profile(field: &Field, profile: &RadialProfile) -> Result<Vec<Verdict>> {
    let n = profile.n as i32;
    let modica = modica_check(field);
    let mut out = vec![profile_consistency(profile), modica.clone()];
    let weak = scaled_profile(profile, Which::F, n - 2)?;
    out.push(monotonicity_verdict(Property::WeakTheorem, &weak, None)?);
    let weak_e = scaled_profile(profile, Which::E, n - 2)?;
    out.push(monotonicity_verdict(Property::WeakE, &weak_e, None)?);
    if modica.passed {
        let strong = scaled_profile(profile, Which::F, n - 1)?;
        out.push(monotonicity_verdict(
            Property::StrongTheorem,
            &strong,
            None,
        )?);
        let strong_e = scaled_profile(profile, Which::E, n - 1)?;
        out.push(monotonicity_verdict(
            Property::ModicaStrongE,
            &strong_e,
            None,
        )?);
    }
    if n == 2 && field.m() == 1 {
        let w = scaled_profile(profile, Which::W, 1)?;
        out.push(monotonicity_verdict(Property::SmyrnelisW, &w, None)?);
    }
    Ok(out)
}

/// Profile plus every applicable verdict. Strong-formula verdicts are
/// emitted only when the Modica bound holds; `Smyrnelis_w` only for scalar
/// fields in the plane.
pub fn full_audit(field: &Field, radii: &[f64]) -> Result<(RadialProfile, Vec<Verdict>)> {
    let profile = build_profile(field, radii)?;
    let verdicts = audit_profile(field, &profile)?;
    Ok((profile, verdicts))
}

pub fn write_profile_csv<W: Write>(profile: &RadialProfile, mut out: W) -> std::io::Result<()> {
    let n = profile.n as i32;
    writeln!(out, "{CSV_HEADER}")?;
    for k in 0..profile.radii.len() {
        let r = profile.radii[k];
        let (f, e, w) = (profile.f_vals[k], profile.e_vals[k], profile.w_vals[k]);
        let cols = [
            r,
            f,
            e,
            w,
            f / r.powi(n - 2),
            f / r.powi(n - 1),
            e / r.powi(n - 2),
            e / r.powi(n - 1),
            w / r,
        ];
        let line: Vec<String> = cols.iter().map(|v| crate::fmt_f64(*v)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}
