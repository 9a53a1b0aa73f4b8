//! Reference solutions: the double-well heteroclinic, constant equilibria and
//! the degree-one Ginzburg–Landau vortex obtained by shooting on its radial
//! profile equation `g'' + g'/r - g/r^2 = g (g^2 - 1)`.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::field::{Field, Grid};
use crate::potential::{PotentialKind, PotentialSpec};

/// Bisection on the initial slope stops once the bracket is this narrow.
pub const SLOPE_BRACKET_WIDTH: f64 = 1e-12;

/// The profile must come this close to 1 at `r_max`.
pub const FAR_FIELD_GAP: f64 = 1e-3;

/// `tanh(x / sqrt 2)`: solves `u'' = u^3 - u` and attains `u'^2 / 2 = W(u)`.
pub fn heteroclinic(x1: f64) -> f64 {
    (x1 / SQRT_2).tanh()
}

/// Analytic derivative of [`heteroclinic`].
pub fn heteroclinic_derivative(x1: f64) -> f64 {
    let t = heteroclinic(x1);
    (1.0 - t * t) / SQRT_2
}

/// Analytic second derivative of [`heteroclinic`].
pub fn heteroclinic_second_derivative(x1: f64) -> f64 {
    let t = heteroclinic(x1);
    -t * (1.0 - t * t)
}

/// Radial profile `g` of the vortex `u = g(r) (cos θ, sin θ)` sampled at
/// `radii[k] = k * step`.
#[derive(Debug, Clone, PartialEq)]
pub struct VortexProfile {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub slope_at_zero: f64,
    step: f64,
}

impl VortexProfile {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn r_max(&self) -> f64 {
        *self.radii.last().expect("profile is never empty")
    }

    /// Linear interpolation of `g`; `None` beyond the solved range.
    pub fn eval(&self, r: f64) -> Option<f64> {
        if !(0.0..=self.r_max()).contains(&r) {
            return None;
        }
        let pos = r / self.step;
        let k = (pos.floor() as usize).min(self.values.len() - 2);
        let t = pos - k as f64;
        Some(self.values[k] * (1.0 - t) + self.values[k + 1] * t)
    }

    /// Writes `r,g` rows with a header line.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "r,g")?;
        for (r, g) in self.radii.iter().zip(&self.values) {
            writeln!(out, "{},{}", crate::fmt_f64(*r), crate::fmt_f64(*g))?;
        }
        Ok(())
    }
}

/// How a trajectory with a given initial slope left the strip `0 < g < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shot {
    /// `g` reached 1 at this radius.
    Overshoot(f64),
    /// `g` dropped to 0 at this radius.
    Undershoot(f64),
    /// Reached `r_max` inside the strip.
    Inside,
}

#[inline]
fn vortex_rhs(r: f64, g: f64, dg: f64) -> f64 {
    -dg / r + g / (r * r) + g * (g * g - 1.0)
}

// One classical RK4 step for (g, g').
#[inline]
fn rk4(r: f64, g: f64, dg: f64, h: f64) -> (f64, f64) {
    let k1g = dg;
    let k1d = vortex_rhs(r, g, dg);
    let k2g = dg + 0.5 * h * k1d;
    let k2d = vortex_rhs(r + 0.5 * h, g + 0.5 * h * k1g, dg + 0.5 * h * k1d);
    let k3g = dg + 0.5 * h * k2d;
    let k3d = vortex_rhs(r + 0.5 * h, g + 0.5 * h * k2g, dg + 0.5 * h * k2d);
    let k4g = dg + h * k3d;
    let k4d = vortex_rhs(r + h, g + h * k3g, dg + h * k3d);
    (
        g + h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g),
        dg + h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d),
    )
}

/// Integrates from `r0 = step` with `g(r0) = a r0`, `g'(r0) = a`, stopping
/// when `g` leaves `(0, 1)`. Samples are pushed into `trace` when given.
fn integrate(slope: f64, r_max: f64, step: f64, mut trace: Option<&mut Vec<f64>>) -> Shot {
    let steps = (r_max / step).round() as usize;
    let (mut g, mut dg) = (slope * step, slope);
    if let Some(t) = trace.as_deref_mut() {
        t.clear();
        t.push(0.0);
        t.push(g);
    }
    for k in 1..steps {
        let r = k as f64 * step;
        (g, dg) = rk4(r, g, dg, step);
        let r_next = (k + 1) as f64 * step;
        if g >= 1.0 {
            return Shot::Overshoot(r_next);
        }
        if g <= 0.0 {
            return Shot::Undershoot(r_next);
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(g);
        }
    }
    Shot::Inside
}

/// Shoots a single trajectory with initial slope `slope`.
pub fn shoot(slope: f64, r_max: f64, step: f64) -> Shot {
    integrate(slope, r_max, step, None)
}

/// Finds the vortex profile on `[0, r_max]` by bisection on `g'(0)` over the
/// bracket `(0.01, 1)`: larger slopes push `g` through 1 before `r_max`,
/// smaller ones fall back towards 0. The stored profile is the trajectory of
/// the lower bracket end, which stays inside `(0, 1)`.
pub fn solve_vortex(r_max: f64, ode_step: f64) -> Result<VortexProfile> {
    if !(r_max >= 10.0) {
        return Err(Error::Shooting(format!(
            "r_max must be at least 10, got {r_max}"
        )));
    }
    if !(ode_step > 0.0 && ode_step <= 1e-3 * r_max) {
        return Err(Error::Shooting(format!(
            "ode step must lie in (0, {}], got {ode_step}",
            1e-3 * r_max
        )));
    }
    let overshoots = |a: f64| matches!(shoot(a, r_max, ode_step), Shot::Overshoot(_));
    let (mut lo, mut hi) = (0.01, 1.0);
    if overshoots(lo) || !overshoots(hi) {
        return Err(Error::Shooting(format!(
            "slope bracket ({lo}, {hi}) does not straddle the vortex for r_max={r_max}, step={ode_step}"
        )));
    }
    while hi - lo > SLOPE_BRACKET_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if overshoots(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut values = Vec::new();
    let steps = (r_max / ode_step).round() as usize;
    if integrate(lo, r_max, ode_step, Some(&mut values)) != Shot::Inside
        || values.len() != steps + 1
    {
        return Err(Error::Shooting(
            "lower bracket trajectory left (0, 1)".into(),
        ));
    }
    if let Some(k) = values.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Shooting(format!(
            "profile not increasing near r = {} (bracket too coarse for r_max)",
            k as f64 * ode_step
        )));
    }
    let last = *values.last().unwrap();
    if last < 1.0 - FAR_FIELD_GAP {
        return Err(Error::Shooting(format!(
            "g(r_max) = {last} is below 1 - {FAR_FIELD_GAP}"
        )));
    }
    let radii = (0..=steps).map(|k| k as f64 * ode_step).collect();
    Ok(VortexProfile {
        radii,
        values,
        slope_at_zero: lo,
        step: ode_step,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleKind {
    /// `u(x) = tanh(x_1 / sqrt 2)`, double well only.
    Heteroclinic,
    /// `u(x) = g(|x|) x / |x|`, Ginzburg–Landau with m = n = 2.
    Vortex(VortexProfile),
    Constant(Vec<f64>),
    /// `u_a(x) = x_1` in every component. Not a solution; used as a
    /// negative control.
    Linear,
}

impl OracleKind {
    pub fn name(&self) -> &'static str {
        match self {
            OracleKind::Heteroclinic => "heteroclinic",
            OracleKind::Vortex(_) => "vortex",
            OracleKind::Constant(_) => "constant",
            OracleKind::Linear => "linear",
        }
    }
}

/// Samples an oracle on every node of `grid`.
pub fn embed(kind: &OracleKind, grid: Grid, potential: &PotentialSpec) -> Result<Field> {
    let potential = potential.clone();
    match kind {
        OracleKind::Heteroclinic => {
            if potential.kind() != PotentialKind::DoubleWell {
                return Err(Error::Incompatible(
                    "heteroclinic requires the double-well potential".into(),
                ));
            }
            Field::from_fn(grid, potential, |x, out| out[0] = heteroclinic(x[0]))
        }
        OracleKind::Vortex(profile) => {
            if potential.kind() != PotentialKind::GinzburgLandau
                || potential.m() != 2
                || grid.n() != 2
            {
                return Err(Error::Incompatible(
                    "vortex requires ginzburg-landau with m = 2 on an n = 2 grid".into(),
                ));
            }
            let corner = grid.half_width() * SQRT_2;
            if profile.r_max() < corner {
                return Err(Error::Incompatible(format!(
                    "vortex profile reaches r = {} but the grid corner is at {corner}",
                    profile.r_max()
                )));
            }
            Field::from_fn(grid, potential, |x, out| {
                let r = x[0].hypot(x[1]);
                if r == 0.0 {
                    out[0] = 0.0;
                    out[1] = 0.0;
                } else {
                    let g = profile
                        .eval(r)
                        .expect("radius checked against profile range");
                    out[0] = g * x[0] / r;
                    out[1] = g * x[1] / r;
                }
            })
        }
        OracleKind::Constant(p) => Field::constant(grid, potential, p),
        OracleKind::Linear => Field::from_fn(grid, potential, |x, out| {
            out.iter_mut().for_each(|o| *o = x[0])
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heteroclinic_basics() {
        assert_eq!(heteroclinic(0.0), 0.0);
        assert!((heteroclinic(40.0) - 1.0).abs() < 1e-15);
        assert!((heteroclinic(-40.0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn heteroclinic_modica_equality_and_ode() {
        let w = PotentialSpec::double_well();
        for k in -400..=400 {
            let x = k as f64 * 0.02;
            let u = heteroclinic(x);
            let du = heteroclinic_derivative(x);
            assert!((0.5 * du * du - w.value(&[u])).abs() <= 1e-12);
            let ode = heteroclinic_second_derivative(x) - (u * u * u - u);
            assert!(ode.abs() <= 1e-10);
            // analytic derivative vs the direct formula for tanh'
            let direct = (1.0 / (x / SQRT_2).cosh().powi(2)) / SQRT_2;
            assert!((du - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn bracket_endpoints() {
        assert!(matches!(shoot(1.0, 10.0, 1e-3), Shot::Overshoot(r) if r < 10.0));
        assert!(matches!(shoot(0.01, 10.0, 1e-3), Shot::Undershoot(r) if r < 10.0));
    }

    #[test]
    fn vortex_profile_invariants() {
        let p = solve_vortex(12.0, 2e-3).unwrap();
        assert_eq!(p.values[0], 0.0);
        assert_eq!(p.radii[0], 0.0);
        assert!(p.slope_at_zero > 0.0 && p.slope_at_zero < 1.0);
        assert!(p.values.windows(2).all(|w| w[1] > w[0]));
        assert!(p.values.iter().all(|&g| (0.0..1.0).contains(&g)));
        assert!(*p.values.last().unwrap() >= 1.0 - FAR_FIELD_GAP);
        assert_eq!(p.eval(p.radii[17]), Some(p.values[17]));
        assert_eq!(p.eval(p.r_max() + 1.0), None);
    }

    #[test]
    fn vortex_slope_step_halving() {
        let coarse = solve_vortex(12.0, 4e-3).unwrap();
        let fine = solve_vortex(12.0, 2e-3).unwrap();
        assert!(
            (coarse.slope_at_zero - fine.slope_at_zero).abs() <= 1e-4,
            "{} vs {}",
            coarse.slope_at_zero,
            fine.slope_at_zero
        );
    }

    #[test]
    fn vortex_rejects_bad_parameters() {
        assert!(solve_vortex(5.0, 1e-3).is_err());
        assert!(solve_vortex(10.0, 0.1).is_err());
    }

    #[test]
    fn embed_compatibility() {
        let g = Grid::new(2, 2.0, 11).unwrap();
        let gl = PotentialSpec::ginzburg_landau(2).unwrap();
        assert!(embed(&OracleKind::Heteroclinic, g, &gl).is_err());
        assert!(embed(&OracleKind::Constant(vec![1.0]), g, &gl).is_err());
        let g3 = Grid::new(3, 2.0, 11).unwrap();
        let p = solve_vortex(10.0, 1e-2).unwrap();
        assert!(embed(&OracleKind::Vortex(p.clone()), g3, &gl).is_err());
        assert!(embed(&OracleKind::Vortex(p), g, &PotentialSpec::double_well()).is_err());
    }

    #[test]
    fn embedded_constant_minimum_has_zero_residual() {
        let g = Grid::new(2, 2.0, 21).unwrap();
        let f = embed(
            &OracleKind::Constant(vec![1.0]),
            g,
            &PotentialSpec::double_well(),
        )
        .unwrap();
        let r = f.residual_norm();
        assert_eq!((r.max_norm, r.l2_norm), (0.0, 0.0));
        let gl = PotentialSpec::ginzburg_landau(2).unwrap();
        let f = embed(&OracleKind::Constant(vec![0.6, 0.8]), g, &gl).unwrap();
        assert!(f.residual_norm().max_norm < 1e-15);
    }

    #[test]
    fn embedded_heteroclinic_independent_of_x2() {
        let g = Grid::new(2, 3.0, 31).unwrap();
        let f = embed(&OracleKind::Heteroclinic, g, &PotentialSpec::double_well()).unwrap();
        for i in 0..31 {
            let row: Vec<f64> = (0..31).map(|j| f.value([i, j, 0])[0]).collect();
            assert!(row.iter().all(|&v| v == row[0]));
        }
    }

    #[test]
    fn embedded_vortex_modulus_matches_profile() {
        let p = solve_vortex(10.0, 1e-3).unwrap();
        let g = Grid::new(2, 6.0, 121).unwrap();
        let gl = PotentialSpec::ginzburg_landau(2).unwrap();
        let f = embed(&OracleKind::Vortex(p.clone()), g, &gl).unwrap();
        assert_eq!(f.value(g.origin()), &[0.0, 0.0]);
        for flat in 0..g.node_count() {
            let x = g.position(g.multi(flat));
            let r = x[0].hypot(x[1]);
            let u = f.at(flat);
            let k = (r / p.step()).floor() as usize;
            // compare against the nearest stored radius, corrected by the local slope
            let stored =
                p.values[k] + (p.values[k + 1] - p.values[k]) * (r - p.radii[k]) / p.step();
            assert!((u[0].hypot(u[1]) - stored).abs() <= 1e-4);
        }
    }
}
