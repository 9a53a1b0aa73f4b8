//! Nonnegative potentials `W: R^m -> [0, inf)` with closed-form gradients.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::verdict::{Location, Property, Verdict};

/// Smallest sampled value of `W` still accepted as nonnegative.
pub const NONNEGATIVITY_FLOOR: f64 = -1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PotentialKind {
    /// `W(u) = (1 - u^2)^2 / 4`, scalar.
    DoubleWell,
    /// `W(u) = (1 - |u|^2)^2 / 4`, vector valued (m >= 2).
    GinzburgLandau,
    /// Sum of monomials in the components of `u`.
    CustomPolynomial,
}

impl PotentialKind {
    pub fn name(self) -> &'static str {
        match self {
            PotentialKind::DoubleWell => "double-well",
            PotentialKind::GinzburgLandau => "ginzburg-landau",
            PotentialKind::CustomPolynomial => "custom-polynomial",
        }
    }
}

impl fmt::Display for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PotentialKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "double-well" | "DoubleWell" => Ok(PotentialKind::DoubleWell),
            "ginzburg-landau" | "GinzburgLandau" => Ok(PotentialKind::GinzburgLandau),
            "custom-polynomial" | "CustomPolynomial" => Ok(PotentialKind::CustomPolynomial),
            other => Err(format!("unknown potential kind '{other}'")),
        }
    }
}

/// A potential together with its target dimension.
///
/// Custom polynomials list their coefficients in graded lexicographic order
/// of the exponent multi-indices: degree 0 first, then degree 1
/// (`u_1, u_2, ...`), then degree 2 (`u_1^2, u_1 u_2, ..., u_m^2`) and so on.
/// For `m = 1` this is simply `c_0 + c_1 u + c_2 u^2 + ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    kind: PotentialKind,
    m: usize,
    coefficients: Vec<f64>,
    monomials: Vec<Vec<u32>>,
}

impl PotentialSpec {
    pub fn double_well() -> Self {
        PotentialSpec {
            kind: PotentialKind::DoubleWell,
            m: 1,
            coefficients: Vec::new(),
            monomials: Vec::new(),
        }
    }

    pub fn ginzburg_landau(m: usize) -> Result<Self> {
        Self::new(PotentialKind::GinzburgLandau, m, Vec::new())
    }

    pub fn custom_polynomial(m: usize, coefficients: Vec<f64>) -> Result<Self> {
        Self::new(PotentialKind::CustomPolynomial, m, coefficients)
    }

    pub fn new(kind: PotentialKind, m: usize, coefficients: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidPotential("m must be positive".into()));
        }
        match kind {
            PotentialKind::DoubleWell if m != 1 => {
                return Err(Error::InvalidPotential(format!(
                    "double-well requires m = 1, got {m}"
                )))
            }
            PotentialKind::GinzburgLandau if m < 2 => {
                return Err(Error::InvalidPotential(format!(
                    "ginzburg-landau requires m >= 2, got {m}"
                )))
            }
            PotentialKind::CustomPolynomial if coefficients.is_empty() => {
                return Err(Error::InvalidPotential(
                    "custom-polynomial needs coefficients".into(),
                ))
            }
            _ => {}
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPotential("non-finite coefficient".into()));
        }
        let monomials = if kind == PotentialKind::CustomPolynomial {
            graded_lex_exponents(m, coefficients.len())
        } else {
            Vec::new()
        };
        Ok(PotentialSpec {
            kind,
            m,
            coefficients,
            monomials,
        })
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Known zeros of `W`, when the catalog knows them.
    pub fn known_minima(&self) -> Vec<Vec<f64>> {
        match self.kind {
            PotentialKind::DoubleWell => vec![vec![-1.0], vec![1.0]],
            PotentialKind::GinzburgLandau => {
                let mut e1 = vec![0.0; self.m];
                e1[0] = 1.0;
                vec![e1]
            }
            PotentialKind::CustomPolynomial => Vec::new(),
        }
    }

    /// Box `[lo, hi]^m` on which nonnegativity is sampled by default.
    pub fn validity_box(&self) -> Vec<(f64, f64)> {
        vec![(-2.0, 2.0); self.m]
    }

    fn check_dim(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: p.len(),
            });
        }
        Ok(())
    }

    pub fn eval_w(&self, p: &[f64]) -> Result<f64> {
        self.check_dim(p)?;
        Ok(self.value(p))
    }

    pub fn grad_w(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(p)?;
        let mut out = vec![0.0; self.m];
        self.gradient_into(p, &mut out);
        Ok(out)
    }

    /// `W(p)` without the dimension check. `p.len()` must equal `m`.
    #[inline]
    pub fn value(&self, p: &[f64]) -> f64 {
        match self.kind {
            PotentialKind::DoubleWell | PotentialKind::GinzburgLandau => {
                let s = 1.0 - norm_sq(p);
                0.25 * s * s
            }
            PotentialKind::CustomPolynomial => self
                .monomials
                .iter()
                .zip(&self.coefficients)
                .map(|(exps, c)| c * monomial(p, exps))
                .sum(),
        }
    }

    /// Writes `grad W(p)` into `out`.
    #[inline]
    pub fn gradient_into(&self, p: &[f64], out: &mut [f64]) {
        match self.kind {
            PotentialKind::DoubleWell | PotentialKind::GinzburgLandau => {
                let s = norm_sq(p) - 1.0;
                for (o, &x) in out.iter_mut().zip(p) {
                    *o = s * x;
                }
            }
            PotentialKind::CustomPolynomial => {
                out.iter_mut().for_each(|o| *o = 0.0);
                for (exps, c) in self.monomials.iter().zip(&self.coefficients) {
                    for a in 0..self.m {
                        if exps[a] == 0 {
                            continue;
                        }
                        let mut term = c * f64::from(exps[a]);
                        for (b, &e) in exps.iter().enumerate() {
                            let e = if b == a { e - 1 } else { e };
                            term *= p[b].powi(e as i32);
                        }
                        out[a] += term;
                    }
                }
            }
        }
    }

    /// `W(p + dp) - W(p)`, evaluated without cancellation for the catalog
    /// potentials so that tiny energy decrements stay resolvable.
    #[inline]
    pub fn increment(&self, p: &[f64], dp: &[f64]) -> f64 {
        match self.kind {
            PotentialKind::DoubleWell | PotentialKind::GinzburgLandau => {
                // a - b with a = 1 - |p+dp|^2, b = 1 - |p|^2
                let mut diff = 0.0;
                let mut base = 0.0;
                for (&x, &d) in p.iter().zip(dp) {
                    diff -= d * (2.0 * x + d);
                    base += x * x;
                }
                let b = 1.0 - base;
                0.25 * diff * (2.0 * b + diff)
            }
            PotentialKind::CustomPolynomial => {
                let moved: Vec<f64> = p.iter().zip(dp).map(|(x, d)| x + d).collect();
                self.value(&moved) - self.value(p)
            }
        }
    }

    /// Samples `W` on the tensor grid of `samples_per_axis` points per axis of
    /// `bounds` and passes iff the minimum is at least [`NONNEGATIVITY_FLOOR`].
    /// The reported location is the first minimizer in lexicographic order.
    pub fn check_nonnegativity(
        &self,
        bounds: &[(f64, f64)],
        samples_per_axis: usize,
    ) -> Result<Verdict> {
        if bounds.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: bounds.len(),
            });
        }
        if samples_per_axis < 2 {
            return Err(Error::TooFewPoints {
                needed: 2,
                got: samples_per_axis,
            });
        }
        let axis = |a: usize, k: usize| {
            let (lo, hi) = bounds[a];
            lo + (hi - lo) * k as f64 / (samples_per_axis - 1) as f64
        };
        let total = samples_per_axis.pow(self.m as u32);
        let mut p = vec![0.0; self.m];
        let mut best = f64::INFINITY;
        let mut best_p = p.clone();
        for flat in 0..total {
            let mut rem = flat;
            for a in (0..self.m).rev() {
                p[a] = axis(a, rem % samples_per_axis);
                rem /= samples_per_axis;
            }
            let w = self.value(&p);
            if w < best {
                best = w;
                best_p.copy_from_slice(&p);
            }
        }
        Ok(Verdict::new(
            Property::Nonnegativity,
            -best,
            Location::Point(best_p),
            -NONNEGATIVITY_FLOOR,
        ))
    }
}

#[inline]
fn norm_sq(p: &[f64]) -> f64 {
    p.iter().map(|x| x * x).sum()
}

#[inline]
fn monomial(p: &[f64], exps: &[u32]) -> f64 {
    p.iter()
        .zip(exps)
        .map(|(x, &e)| if e == 0 { 1.0 } else { x.powi(e as i32) })
        .product()
}

/// Exponent tuples of the first `count` monomials of `m` variables in
/// graded lexicographic order.
fn graded_lex_exponents(m: usize, count: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::with_capacity(count);
    let mut degree = 0u32;
    while out.len() < count {
        let mut level = Vec::new();
        compositions(degree, m, &mut Vec::new(), &mut level);
        for e in level {
            if out.len() == count {
                break;
            }
            out.push(e);
        }
        degree += 1;
    }
    out
}

// Exponent tuples summing to `remaining`, first exponent descending.
fn compositions(remaining: u32, slots: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if slots == 1 {
        let mut e = prefix.clone();
        e.push(remaining);
        out.push(e);
        return;
    }
    for first in (0..=remaining).rev() {
        prefix.push(first);
        compositions(remaining - first, slots - 1, prefix, out);
        prefix.pop();
    }
}
