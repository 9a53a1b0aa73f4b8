//! Reference values computed independently of the library's quadrature.

use std::f64::consts::SQRT_2;

pub fn double_well_on_tanh(t: f64) -> f64 {
    let u = (t / SQRT_2).tanh();
    0.25 * (1.0 - u * u).powi(2)
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn adapt(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let (m, _) = simpson(f, a, fa, b, fb);
    let fm = f(m);
    let (_, left) = simpson(f, a, fa, m, fm);
    let (_, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adapt(f, a, fa, m, fm, left, 0.5 * tol, depth - 1)
        + adapt(f, m, fm, b, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb) = (f(a), f(b));
    let (_, whole) = simpson(f, a, fa, b, fb);
    adapt(f, a, fa, b, fb, whole, tol, 50)
}

/// `∫_{B_R} W(tanh(x_1/√2)) dx` in the plane, reduced to a line integral
/// over chords: `∫_{-R}^{R} W(t) 2√(R² - t²) dt`.
pub fn heteroclinic_disc_potential(radius: f64) -> f64 {
    let chord = |t: f64| double_well_on_tanh(t) * 2.0 * (radius * radius - t * t).max(0.0).sqrt();
    adaptive_simpson(&chord, -radius, radius, 1e-13)
}
