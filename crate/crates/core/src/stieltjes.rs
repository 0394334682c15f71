//! Stieltjes transforms `Φ(z) = ∫ dμ(x)/(z − x)`: continued-fraction
//! convergents from recursion coefficients, closed forms for the limit
//! laws, and the inversion formulas for densities, atoms and the Hilbert
//! transform.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::coords::RecursionCoefficients;
use crate::error::{MomentError, Result};
use crate::measures::LimitMeasure;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperHalfPlanePoint {
    pub re: f64,
    pub im: f64,
}

impl UpperHalfPlanePoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(im > 0.0) || !re.is_finite() || !im.is_finite() {
            return Err(MomentError::InvalidParameter(format!(
                "z = {re}{im:+}i is not in the open upper half-plane"
            )));
        }
        Ok(UpperHalfPlanePoint { re, im })
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Imaginary offsets `y` for the boundary limit `y → 0+`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    eps: Vec<f64>,
    /// Largest accepted error estimate of the extrapolated density
    /// (relative above 1, absolute below).
    pub tolerance: f64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        EpsilonSchedule {
            eps: vec![1e-2, 5e-3, 2.5e-3],
            tolerance: 1e-3,
        }
    }
}

impl EpsilonSchedule {
    pub fn new(eps: Vec<f64>, tolerance: f64) -> Result<Self> {
        if eps.len() < 2 {
            return Err(MomentError::InvalidParameter(
                "epsilon schedule needs at least two offsets".into(),
            ));
        }
        if eps.iter().any(|&e| !(e > 0.0)) || eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(MomentError::InvalidParameter(
                "epsilon schedule must be positive and strictly decreasing".into(),
            ));
        }
        Ok(EpsilonSchedule { eps, tolerance })
    }

    pub fn offsets(&self) -> &[f64] {
        &self.eps
    }
}

/// Depth-`depth` convergent
/// `1/(z−α₁ − β₁/(z−α₂ − ⋯ − β_{N−1}/(z−α_N)))`, evaluated from the bottom up.
pub fn cf_convergent(rc: &RecursionCoefficients, depth: usize, z: UpperHalfPlanePoint) -> Result<Complex64> {
    cf_convergent_at(rc, depth, z.z())
}

/// [`cf_convergent`] at any `z` (no half-plane check).
pub fn cf_convergent_at(rc: &RecursionCoefficients, depth: usize, z: Complex64) -> Result<Complex64> {
    if depth == 0 {
        return Err(MomentError::InvalidParameter("depth must be at least 1".into()));
    }
    if rc.alpha.len() < depth {
        return Err(MomentError::Arity {
            what: "α coefficients",
            needed: depth,
            got: rc.alpha.len(),
        });
    }
    if rc.beta.len() < depth - 1 {
        return Err(MomentError::Arity {
            what: "β coefficients",
            needed: depth - 1,
            got: rc.beta.len(),
        });
    }
    let mut t = z - rc.alpha[depth - 1];
    for j in (0..depth - 1).rev() {
        t = z - rc.alpha[j] - rc.beta[j] / t;
    }
    Ok(1.0 / t)
}

/// Semicircle transform `(z − α − √(z−l₋)·√(z−l₊)) / (2β)`, evaluated as
/// `2 / (z − α + √(z−l₋)·√(z−l₊))` to avoid cancellation for large `|z|`.
///
/// The product of two principal roots is the branch that behaves like
/// `z − α` at infinity and has positive imaginary part on ℂ⁺. It extends
/// continuously to the real axis: real and negative left of `l₋`, purely
/// imaginary on `[l₋, l₊]`, real and positive right of `l₊`.
fn semicircle_transform(alpha: f64, beta: f64, z: Complex64) -> Complex64 {
    let r = 2.0 * beta.sqrt();
    let root = (z - (alpha - r)).sqrt() * (z - (alpha + r)).sqrt();
    2.0 / (z - alpha + root)
}

pub(crate) fn closed_form_transform_unchecked(measure: &LimitMeasure, z: Complex64) -> Complex64 {
    match *measure {
        LimitMeasure::Semicircle { alpha, beta } => semicircle_transform(alpha, beta, z),
        // Φ = 1/(z − α₁ − β₁·Φ_tail) with a semicircle tail
        _ => {
            let rc = measure.recursion(2);
            let tail = semicircle_transform(rc.alpha[1], rc.beta[1], z);
            1.0 / (z - rc.alpha[0] - rc.beta[0] * tail)
        }
    }
}

/// Closed-form transform of a limit law for `Im z ≥ 0` (the real axis by
/// continuous extension).
pub fn closed_form_transform(measure: &LimitMeasure, z: Complex64) -> Result<Complex64> {
    if !(z.im >= 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(MomentError::InvalidParameter(format!(
            "z = {z} is not in the closed upper half-plane"
        )));
    }
    measure.validate()?;
    Ok(closed_form_transform_unchecked(measure, z))
}

/// Density `−(1/π) lim_{y→0+} Im Φ(x+iy)`: linear Richardson extrapolation
/// on the last two offsets, checked against the estimate from the two before.
///
/// The extrapolated value still carries an `O(y²)` error, so with halved
/// offsets it is about a third of the spread between the two estimates;
/// that is what gets compared to the tolerance.
pub fn invert_density<F: Fn(Complex64) -> Complex64>(
    transform: F,
    x: f64,
    eps: &EpsilonSchedule,
) -> Result<f64> {
    let d: Vec<f64> = eps
        .eps
        .iter()
        .map(|&y| -transform(Complex64::new(x, y)).im / PI)
        .collect();
    let rich = |i: usize, j: usize| {
        let (yi, yj) = (eps.eps[i], eps.eps[j]);
        (yi * d[j] - yj * d[i]) / (yi - yj)
    };
    let n = d.len();
    let last = rich(n - 2, n - 1);
    let spread = if n >= 3 { (last - rich(n - 3, n - 2)).abs() } else { 0.0 };
    let ratio = if n >= 3 { eps.eps[n - 3] / eps.eps[n - 1] } else { 4.0 };
    let error = spread / (ratio - 1.0);
    if !last.is_finite() || error > eps.tolerance * last.abs().max(1.0) {
        return Err(MomentError::InversionFailure { x, spread });
    }
    Ok(last.max(0.0))
}

const ATOM_OFFSETS: (f64, f64) = (1e-6, 5e-7);

/// Point mass `−lim_{y→0+} y·Im Φ(x+iy)`, Richardson-extrapolated.
pub fn atom_mass<F: Fn(Complex64) -> Complex64>(transform: F, x: f64) -> f64 {
    let g = |y: f64| -y * transform(Complex64::new(x, y)).im;
    let (y1, y2) = ATOM_OFFSETS;
    let w = (y1 * g(y2) - y2 * g(y1)) / (y1 - y2);
    if w.is_finite() {
        w.max(0.0)
    } else {
        0.0
    }
}

/// Hilbert transform `H(t) = p.v.∫ dμ(s)/(t − s) = Re Φ(t + i0)`.
pub fn hilbert_transform(measure: &LimitMeasure, t: f64) -> f64 {
    closed_form_transform_unchecked(measure, Complex64::new(t, 0.0)).re
}
