//! The three universal limit laws: free binomial on `[a,b]`,
//! Marchenko–Pastur on `[0,∞)` and semicircle on `ℝ`.
//!
//! Each is the measure whose canonical coordinates alternate between two
//! constants, so all three have recursion coefficients that are constant
//! from index 2 on.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::coords::{CanonicalCoordinates, Interval, MomentVector, RecursionCoefficients, Space, Transformer};
use crate::error::{MomentError, Result};
use crate::stieltjes;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LimitMeasure {
    FreeBinomial { interval: Interval, p1: f64, p2: f64 },
    MarchenkoPastur { z1: f64, z2: f64 },
    Semicircle { alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

fn unit_open(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(MomentError::InvalidParameter(format!("{name} = {v} must lie in (0,1)")))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(MomentError::InvalidParameter(format!("{name} = {v} must be positive")))
    }
}

/// `C(n, k)` as a float (exact while it fits in 53 bits).
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}

pub(crate) fn catalan(i: usize) -> f64 {
    binomial(2 * i, i) / (i + 1) as f64
}

impl LimitMeasure {
    pub fn free_binomial(interval: Interval, p1: f64, p2: f64) -> Result<Self> {
        unit_open("p1", p1)?;
        unit_open("p2", p2)?;
        Ok(LimitMeasure::FreeBinomial { interval, p1, p2 })
    }

    pub fn marchenko_pastur(z1: f64, z2: f64) -> Result<Self> {
        positive("z1", z1)?;
        positive("z2", z2)?;
        Ok(LimitMeasure::MarchenkoPastur { z1, z2 })
    }

    pub fn semicircle(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(MomentError::InvalidParameter(format!("alpha = {alpha}")));
        }
        positive("beta", beta)?;
        Ok(LimitMeasure::Semicircle { alpha, beta })
    }

    /// Re-checks the parameter invariants (e.g. after deserialization).
    pub fn validate(&self) -> Result<()> {
        match *self {
            LimitMeasure::FreeBinomial { interval, p1, p2 } => {
                Interval::new(interval.a, interval.b)?;
                Self::free_binomial(interval, p1, p2).map(|_| ())
            }
            LimitMeasure::MarchenkoPastur { z1, z2 } => Self::marchenko_pastur(z1, z2).map(|_| ()),
            LimitMeasure::Semicircle { alpha, beta } => Self::semicircle(alpha, beta).map(|_| ()),
        }
    }

    pub fn space(&self) -> Space {
        match *self {
            LimitMeasure::FreeBinomial { interval, .. } => Space::Compact(interval),
            LimitMeasure::MarchenkoPastur { .. } => Space::HalfLine,
            LimitMeasure::Semicircle { .. } => Space::RealLine,
        }
    }

    /// Support `[l₋, l₊]` of the absolutely continuous part.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            LimitMeasure::FreeBinomial { interval, p1, p2 } => {
                let (q1, q2) = (1.0 - p1, 1.0 - p2);
                let (u, v) = ((p1 * q2).sqrt(), (p2 * q1).sqrt());
                let l = interval.len();
                (interval.a + l * (u - v) * (u - v), interval.a + l * (u + v) * (u + v))
            }
            LimitMeasure::MarchenkoPastur { z1, z2 } => {
                let (u, v) = (z1.sqrt(), z2.sqrt());
                ((u - v) * (u - v), (u + v) * (u + v))
            }
            LimitMeasure::Semicircle { alpha, beta } => {
                let r = 2.0 * beta.sqrt();
                (alpha - r, alpha + r)
            }
        }
    }

    /// Density of the absolutely continuous part.
    pub fn density(&self, x: f64) -> f64 {
        let (lm, lp) = self.support();
        if !(x > lm && x < lp) {
            return 0.0;
        }
        let root = ((x - lm) * (lp - x)).sqrt();
        match *self {
            LimitMeasure::FreeBinomial { interval, p2, .. } => {
                root / (2.0 * PI * p2 * (x - interval.a) * (interval.b - x))
            }
            LimitMeasure::MarchenkoPastur { z2, .. } => root / (2.0 * PI * z2 * x),
            LimitMeasure::Semicircle { beta, .. } => root / (2.0 * PI * beta),
        }
    }

    /// Point masses with positive weight.
    pub fn atoms(&self) -> Vec<Atom> {
        let cands = match *self {
            LimitMeasure::FreeBinomial { interval, p1, p2 } => vec![
                Atom {
                    location: interval.a,
                    weight: 1.0 - p1 / p2,
                },
                Atom {
                    location: interval.b,
                    weight: (p1 + p2 - 1.0) / p2,
                },
            ],
            LimitMeasure::MarchenkoPastur { z1, z2 } => vec![Atom {
                location: 0.0,
                weight: 1.0 - z1 / z2,
            }],
            LimitMeasure::Semicircle { .. } => vec![],
        };
        cands.into_iter().filter(|a| a.weight > 0.0).collect()
    }

    /// Canonical coordinates `(y₁, y₂)` repeated along the sequence.
    pub fn canonical_pair(&self) -> (f64, f64) {
        match *self {
            LimitMeasure::FreeBinomial { p1, p2, .. } => (p1, p2),
            LimitMeasure::MarchenkoPastur { z1, z2 } => (z1, z2),
            LimitMeasure::Semicircle { alpha, beta } => (alpha, beta),
        }
    }

    /// First `r` α's and `r` β's of the three-term recurrence.
    pub fn recursion(&self, r: usize) -> RecursionCoefficients {
        let (a1, at, b1, bt) = match *self {
            LimitMeasure::FreeBinomial { interval, p1, p2 } => {
                let (q1, q2, l) = (1.0 - p1, 1.0 - p2, interval.len());
                (
                    interval.a + l * p1,
                    interval.a + l * (p1 * q2 + p2 * q1),
                    l * l * p1 * q1 * p2,
                    l * l * p1 * q1 * p2 * q2,
                )
            }
            LimitMeasure::MarchenkoPastur { z1, z2 } => (z1, z1 + z2, z1 * z2, z1 * z2),
            LimitMeasure::Semicircle { alpha, beta } => (alpha, alpha, beta, beta),
        };
        let alpha = (0..r).map(|i| if i == 0 { a1 } else { at }).collect();
        let beta = (0..r).map(|i| if i == 0 { b1 } else { bt }).collect();
        RecursionCoefficients { alpha, beta }
    }

    /// Stieltjes transform `∫ dμ(x)/(z − x)`, closed form.
    pub fn stieltjes(&self, z: Complex64) -> Complex64 {
        stieltjes::closed_form_transform_unchecked(self, z)
    }

    /// Moments `m₁..m_k`: closed form for the semicircle, the canonical
    /// coordinate pipeline otherwise.
    pub fn moments(&self, k: usize, transformer: &Transformer) -> Result<MomentVector> {
        if k == 0 {
            return Err(MomentError::InvalidParameter("k must be at least 1".into()));
        }
        match *self {
            LimitMeasure::Semicircle { alpha, beta } => Ok(MomentVector::new(
                Space::RealLine,
                semicircle_moments(alpha, beta, k),
            )),
            _ => {
                let (y1, y2) = self.canonical_pair();
                let c = CanonicalCoordinates::alternating(self.space(), y1, y2, k);
                transformer.canonical_to_moments(&c)
            }
        }
    }

    /// The external field `Q` for which this measure is the equilibrium measure.
    pub fn equilibrium_field(&self) -> Result<EquilibriumField> {
        if !self.atoms().is_empty() {
            return Err(MomentError::UnsupportedField(format!(
                "{self:?} has atoms"
            )));
        }
        Ok(match *self {
            LimitMeasure::FreeBinomial { interval, p1, p2 } => EquilibriumField {
                quadratic: 0.0,
                linear: 0.0,
                log_left: (-(p1 / p2 - 1.0), interval.a),
                log_right: (-((1.0 - p1 - p2) / p2), interval.b),
            },
            LimitMeasure::MarchenkoPastur { z1, z2 } => EquilibriumField {
                quadratic: 0.0,
                linear: 1.0 / z2,
                log_left: (-((z1 - z2) / z2), 0.0),
                log_right: (0.0, 0.0),
            },
            LimitMeasure::Semicircle { alpha, beta } => EquilibriumField {
                quadratic: 1.0 / (2.0 * beta),
                linear: -alpha / beta,
                log_left: (0.0, 0.0),
                log_right: (0.0, 0.0),
            },
        })
    }
}

/// `Σ_i C(j,2i) β^i α^{j−2i} Cat_i`.
pub fn semicircle_moments(alpha: f64, beta: f64, k: usize) -> Vec<f64> {
    (1..=k)
        .map(|j| {
            (0..=j / 2)
                .map(|i| {
                    binomial(j, 2 * i) * beta.powi(i as i32) * alpha.powi((j - 2 * i) as i32) * catalan(i)
                })
                .sum()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MpVariant {
    /// Binomial index `i`, exponent `j−1−i`.
    AsPrinted,
    /// Binomial index `2i`, exponent `j−1−2i`.
    Corrected,
}

/// Marchenko–Pastur moments from the two candidate closed forms
/// `Σ_{i ≤ ⌊(j−1)/2⌋} C(j−1, ·) z₁^{i+1} z₂^i (z₁+z₂)^{·} Cat_i`.
///
/// Only `Corrected` agrees with the recursion pipeline; `AsPrinted` is kept
/// to document the discrepancy (8 instead of 5 at `j = 3`, `z₁ = z₂ = 1`).
pub fn mp_moments_closed_form(z1: f64, z2: f64, k: usize, variant: MpVariant) -> Vec<f64> {
    (1..=k)
        .map(|j| {
            (0..=(j - 1) / 2)
                .map(|i| {
                    let (b, e) = match variant {
                        MpVariant::AsPrinted => (binomial(j - 1, i), j - 1 - i),
                        MpVariant::Corrected => (binomial(j - 1, 2 * i), j - 1 - 2 * i),
                    };
                    b * z1.powi(i as i32 + 1) * z2.powi(i as i32) * (z1 + z2).powi(e as i32) * catalan(i)
                })
                .sum()
        })
        .collect()
}

/// `Q(t) = q₂t² + q₁t + c_L·log(t − t_L) + c_R·log(t_R − t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumField {
    pub quadratic: f64,
    pub linear: f64,
    /// (coefficient, anchor)
    pub log_left: (f64, f64),
    pub log_right: (f64, f64),
}

impl EquilibriumField {
    pub fn value(&self, t: f64) -> f64 {
        let mut q = self.quadratic * t * t + self.linear * t;
        if self.log_left.0 != 0.0 {
            q += self.log_left.0 * (t - self.log_left.1).ln();
        }
        if self.log_right.0 != 0.0 {
            q += self.log_right.0 * (self.log_right.1 - t).ln();
        }
        q
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let mut q = 2.0 * self.quadratic * t + self.linear;
        if self.log_left.0 != 0.0 {
            q += self.log_left.0 / (t - self.log_left.1);
        }
        if self.log_right.0 != 0.0 {
            q -= self.log_right.0 / (self.log_right.1 - t);
        }
        q
    }
}

/// Logarithmic potential `U(t) = ∫ log|t − s| dμ(s)` of an atom-free limit measure.
///
/// With `s = c + r·cos φ` the weight `w(φ) = ρ(s)·r·sin φ` is smooth and
/// even for all three families (the square-root edges cancel), so it has a
/// rapidly converging cosine series `w = w₀ + Σ w_k cos kφ`. Against the
/// expansions
///
/// ```text
/// log|cos ψ − cos φ| = −log 2 − 2 Σ cos kψ cos kφ / k                (|x| ≤ 1)
/// log|x − cos φ|     = η − log 2 − 2 Σ (±1)^k e^{−kη} cos kφ / k     (x = ±cosh η)
/// ```
/// the integral reduces to a sum over the coefficients, with no singular
/// quadrature at `s = t`.
#[derive(Debug, Clone)]
pub struct LogPotential {
    center: f64,
    radius: f64,
    coeffs: Vec<f64>,
}

impl LogPotential {
    pub fn new(measure: &LimitMeasure, nodes: usize) -> Self {
        let (lm, lp) = measure.support();
        let center = 0.5 * (lm + lp);
        let radius = 0.5 * (lp - lm);
        let phis: Vec<f64> = (0..nodes).map(|j| PI * (j as f64 + 0.5) / nodes as f64).collect();
        let w: Vec<f64> = phis
            .iter()
            .map(|&p| measure.density(center + radius * p.cos()) * radius * p.sin())
            .collect();
        let coeffs = (0..nodes)
            .map(|k| {
                let s: f64 = phis.iter().zip(&w).map(|(p, w)| w * (k as f64 * p).cos()).sum();
                if k == 0 {
                    s / nodes as f64
                } else {
                    2.0 * s / nodes as f64
                }
            })
            .collect();
        LogPotential {
            center,
            radius,
            coeffs,
        }
    }

    /// Total mass `π·w₀` seen by the expansion.
    pub fn mass(&self) -> f64 {
        PI * self.coeffs[0]
    }

    pub fn eval(&self, t: f64) -> f64 {
        let x = (t - self.center) / self.radius;
        let w0 = self.coeffs[0];
        let base = self.radius.ln() - 2f64.ln();
        if x.abs() <= 1.0 {
            let psi = x.acos();
            let s: f64 = self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, w)| w * (k as f64 * psi).cos() / k as f64)
                .sum();
            PI * (w0 * base - s)
        } else {
            let eta = x.abs().acosh();
            let sign = x.signum();
            let decay = (-eta).exp();
            let mut pow = 1.0;
            let mut s = 0.0;
            for (k, w) in self.coeffs.iter().enumerate().skip(1) {
                pow *= sign * decay;
                s += w * pow / k as f64;
            }
            PI * (w0 * (base + eta) - s)
        }
    }
}

pub const EQUILIBRIUM_NODES: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    /// `Q(t) − 2U(t)` on the interior support grid.
    pub support_grid_values: Vec<f64>,
    pub constancy_spread: f64,
    /// `max(0, ℓ − (Q − 2U))` over the exterior grid.
    pub exterior_violation: f64,
    /// ℓ, the mean of `support_grid_values`.
    pub constant_level: f64,
    /// `max |Q′(t) − 2H(t)|` on the interior grid.
    pub hilbert_residual: f64,
}

/// Checks `Q − 2∫log|t−s|dμ(s) = ℓ` on the support and `≥ ℓ` off it.
pub fn verify_equilibrium(measure: &LimitMeasure, grid_size: usize) -> Result<EquilibriumReport> {
    measure.validate()?;
    if grid_size == 0 {
        return Err(MomentError::InvalidParameter("grid_size must be positive".into()));
    }
    let field = measure.equilibrium_field()?;
    let u = LogPotential::new(measure, EQUILIBRIUM_NODES);
    let eff = |t: f64| field.value(t) - 2.0 * u.eval(t);
    let (lm, lp) = measure.support();
    let len = lp - lm;
    let interior: Vec<f64> = (0..grid_size)
        .map(|i| lm + len * (i as f64 + 0.5) / grid_size as f64)
        .collect();
    let values: Vec<f64> = interior.iter().map(|&t| eff(t)).collect();
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let level = values.iter().sum::<f64>() / values.len() as f64;
    let hilbert_residual = interior
        .iter()
        .map(|&t| (field.derivative(t) - 2.0 * stieltjes::hilbert_transform(measure, t)).abs())
        .fold(0.0, f64::max);

    // exterior: the gaps to the ends of [a,b] / [0,∞), or one support length out
    let (left_end, right_end) = match *measure {
        LimitMeasure::FreeBinomial { interval, .. } => (interval.a, interval.b),
        LimitMeasure::MarchenkoPastur { .. } => (0.0, lp + len),
        LimitMeasure::Semicircle { .. } => (lm - len, lp + len),
    };
    let mut exterior = Vec::new();
    for i in 0..grid_size {
        let f = (i as f64 + 0.5) / grid_size as f64;
        if lm > left_end {
            exterior.push(lm - (lm - left_end) * f);
        }
        if right_end > lp {
            exterior.push(lp + (right_end - lp) * f);
        }
    }
    let exterior_violation = exterior
        .iter()
        .map(|&t| (level - eff(t)).max(0.0))
        .fold(0.0, f64::max);

    Ok(EquilibriumReport {
        support_grid_values: values,
        constancy_spread: hi - lo,
        exterior_violation,
        constant_level: level,
        hilbert_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalingMode {
    /// Free binomial on `[0, m]` with `pᵢ = zᵢ/m` → Marchenko–Pastur.
    ToMP,
    /// Free binomial on `[−m, m]` with `p₁ = (α+m)/(2m)`, `p₂ = β/m²` → semicircle.
    ToSC,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub m: f64,
    pub approximant: LimitMeasure,
    /// sup |ρ_m − ρ| on `[l₋+δ, l₊−δ]`, `δ` = 5% of the target's support.
    pub sup_density_error: f64,
    /// |m_j(μ_m) − m_j(target)|, j = 1..k.
    pub moment_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub mode: ScalingMode,
    pub target: LimitMeasure,
    pub rows: Vec<ScalingRow>,
    /// Density error at the last `m` below the one at the first.
    pub decreasing: bool,
}

pub const SCALING_DELTA: f64 = 0.05;
const SCALING_GRID: usize = 401;

/// The free binomial approximant to `target` at scale `m`.
pub fn scaling_approximant(mode: ScalingMode, target: &LimitMeasure, m: f64) -> Result<LimitMeasure> {
    match (mode, *target) {
        (ScalingMode::ToMP, LimitMeasure::MarchenkoPastur { z1, z2 }) => {
            LimitMeasure::free_binomial(Interval::new(0.0, m)?, z1 / m, z2 / m)
        }
        (ScalingMode::ToSC, LimitMeasure::Semicircle { alpha, beta }) => LimitMeasure::free_binomial(
            Interval::new(-m, m)?,
            (alpha + m) / (2.0 * m),
            beta / (m * m),
        ),
        _ => Err(MomentError::InvalidParameter(format!(
            "scaling mode {mode:?} does not target {target:?}"
        ))),
    }
}

/// Free binomial laws converging to Marchenko–Pastur or the semicircle.
pub fn scaling_limit_check(
    mode: ScalingMode,
    target: &LimitMeasure,
    m_values: &[f64],
    k: usize,
    transformer: &Transformer,
) -> Result<ScalingReport> {
    target.validate()?;
    if m_values.is_empty() || m_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MomentError::InvalidParameter(
            "m_values must be non-empty and strictly increasing".into(),
        ));
    }
    let (lm, lp) = target.support();
    let delta = SCALING_DELTA * (lp - lm);
    let grid: Vec<f64> = (0..SCALING_GRID)
        .map(|i| lm + delta + (lp - lm - 2.0 * delta) * i as f64 / (SCALING_GRID - 1) as f64)
        .collect();
    let target_moments = target.moments(k, transformer)?.values;
    let rows = m_values
        .iter()
        .map(|&m| {
            let approx = scaling_approximant(mode, target, m)?;
            let sup = grid
                .iter()
                .map(|&x| (approx.density(x) - target.density(x)).abs())
                .fold(0.0, f64::max);
            let mom = approx.moments(k, transformer)?.values;
            Ok(ScalingRow {
                m,
                approximant: approx,
                sup_density_error: sup,
                moment_errors: mom.iter().zip(&target_moments).map(|(a, b)| (a - b).abs()).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let decreasing = rows.last().expect("non-empty").sup_density_error
        < rows.first().expect("non-empty").sup_density_error
        || rows.len() == 1;
    Ok(ScalingReport {
        mode,
        target: *target,
        rows,
        decreasing,
    })
}

/// `(p₁*, p₂*) ↦ free binomial`, `(z₁*, z₂*) ↦ Marchenko–Pastur`, `(α*, β*) ↦ semicircle`.
pub fn limit_measure_from_minimizers(space: Space, y1: f64, y2: f64) -> Result<LimitMeasure> {
    match space {
        Space::Compact(iv) => LimitMeasure::free_binomial(iv, y1, y2),
        Space::HalfLine => LimitMeasure::marchenko_pastur(y1, y2),
        Space::RealLine => LimitMeasure::semicircle(y1, y2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arcsine() -> LimitMeasure {
        LimitMeasure::free_binomial(Interval::UNIT, 0.5, 0.5).unwrap()
    }

    #[test]
    fn density_examples() {
        let d = arcsine().density(0.25);
        assert!((d - 1.0 / (PI * (0.25f64 * 0.75).sqrt())).abs() < 1e-14);
        assert!((d - 0.7351).abs() < 1e-4);
        let sc = LimitMeasure::semicircle(0.0, 1.0).unwrap();
        assert!((sc.density(0.0) - 1.0 / PI).abs() < 1e-15);
        assert_eq!(LimitMeasure::marchenko_pastur(1.0, 1.0).unwrap().density(5.0), 0.0);
    }

    #[test]
    fn atoms_and_support_examples() {
        let fb = LimitMeasure::free_binomial(Interval::UNIT, 0.2, 0.4).unwrap();
        assert_eq!(fb.atoms(), vec![Atom { location: 0.0, weight: 0.5 }]);
        assert!(LimitMeasure::marchenko_pastur(2.0, 1.0).unwrap().atoms().is_empty());
        assert!(LimitMeasure::semicircle(0.0, 1.0).unwrap().atoms().is_empty());
        let (l, u) = arcsine().support();
        assert!(l.abs() < 1e-16 && (u - 1.0).abs() < 1e-16);
        assert_eq!(LimitMeasure::marchenko_pastur(1.0, 1.0).unwrap().support(), (0.0, 4.0));
        assert_eq!(LimitMeasure::semicircle(1.0, 1.0).unwrap().support(), (-1.0, 3.0));
    }

    #[test]
    fn moment_examples() {
        let t = Transformer::default();
        let sc = LimitMeasure::semicircle(0.0, 1.0).unwrap().moments(6, &t).unwrap();
        assert_eq!(sc.values, vec![0.0, 1.0, 0.0, 2.0, 0.0, 5.0]);
        let mp = LimitMeasure::marchenko_pastur(1.0, 1.0).unwrap().moments(4, &t).unwrap();
        for (a, b) in mp.values.iter().zip([1.0, 2.0, 5.0, 14.0]) {
            assert!((a - b).abs() < 1e-12 * b);
        }
        let mp = LimitMeasure::marchenko_pastur(2.0, 1.0).unwrap().moments(3, &t).unwrap();
        for (a, b) in mp.values.iter().zip([2.0, 6.0, 22.0]) {
            assert!((a - b).abs() < 1e-12 * b);
        }
    }

    #[test]
    fn mp_closed_form_variants() {
        assert_eq!(mp_moments_closed_form(1.0, 1.0, 3, MpVariant::AsPrinted)[2], 8.0);
        assert_eq!(mp_moments_closed_form(1.0, 1.0, 3, MpVariant::Corrected)[2], 5.0);
        for v in [MpVariant::AsPrinted, MpVariant::Corrected] {
            assert_eq!(mp_moments_closed_form(2.5, 0.7, 1, v), vec![2.5]);
        }
    }

    #[test]
    fn equilibrium_field_examples() {
        let q = arcsine().equilibrium_field().unwrap();
        assert_eq!(q.value(0.3), 0.0);
        let q = LimitMeasure::semicircle(0.0, 1.0).unwrap().equilibrium_field().unwrap();
        assert_eq!(q.value(3.0), 4.5);
        let q = LimitMeasure::marchenko_pastur(1.0, 1.0).unwrap().equilibrium_field().unwrap();
        assert_eq!(q.value(2.5), 2.5);
        let fb = LimitMeasure::free_binomial(Interval::UNIT, 0.2, 0.4).unwrap();
        assert!(matches!(fb.equilibrium_field(), Err(MomentError::UnsupportedField(_))));
    }

    #[test]
    fn arcsine_log_potential_is_capacity() {
        let u = LogPotential::new(&arcsine(), 256);
        assert!((u.mass() - 1.0).abs() < 1e-14);
        for t in [0.01, 0.3, 0.5, 0.99] {
            assert!((u.eval(t) + 4f64.ln()).abs() < 1e-13, "{t}");
        }
        // outside: log potential of arcsine on [0,1] at t > 1 is log((√t + √(t−1))²/4)
        let t = 2.0f64;
        let exact = ((t.sqrt() + (t - 1.0).sqrt()).powi(2) / 4.0).ln();
        assert!((u.eval(t) - exact).abs() < 1e-13);
    }

    #[test]
    fn equilibrium_examples() {
        let r = verify_equilibrium(&arcsine(), 64).unwrap();
        assert!(r.constancy_spread < 1e-5);
        assert!((r.constant_level - 2.0 * 4f64.ln()).abs() < 1e-10);
        let r = verify_equilibrium(&LimitMeasure::semicircle(0.0, 1.0).unwrap(), 64).unwrap();
        assert!(r.constancy_spread < 1e-5);
        assert!(r.exterior_violation <= 1e-6);
        let fb = LimitMeasure::free_binomial(Interval::UNIT, 0.5, 0.4).unwrap();
        let r = verify_equilibrium(&fb, 64).unwrap();
        assert!(r.constancy_spread < 1e-4, "{}", r.constancy_spread);
        assert!(r.exterior_violation <= 1e-6);
    }

    #[test]
    fn scaling_approximants() {
        let t = Transformer::default();
        let mp = LimitMeasure::marchenko_pastur(1.0, 1.0).unwrap();
        let r = scaling_limit_check(ScalingMode::ToMP, &mp, &[1e2, 1e4], 6, &t).unwrap();
        assert!(r.decreasing);
        assert!(r.rows[1].sup_density_error < 1e-2);
        let sc = LimitMeasure::semicircle(0.0, 1.0).unwrap();
        assert!(scaling_limit_check(ScalingMode::ToMP, &sc, &[1e2], 4, &t).is_err());
        let r = scaling_limit_check(ScalingMode::ToSC, &sc, &[1e6], 4, &t).unwrap();
        assert!(r.rows[0].moment_errors.iter().all(|&e| e < 1e-3));
    }

    #[test]
    fn minimizer_mapping() {
        assert_eq!(
            limit_measure_from_minimizers(Space::Compact(Interval::UNIT), 0.5, 0.5).unwrap(),
            arcsine()
        );
        assert_eq!(
            limit_measure_from_minimizers(Space::HalfLine, 1.0, 1.0).unwrap(),
            LimitMeasure::MarchenkoPastur { z1: 1.0, z2: 1.0 }
        );
        assert_eq!(
            limit_measure_from_minimizers(Space::RealLine, 0.0, 1.0).unwrap(),
            LimitMeasure::Semicircle { alpha: 0.0, beta: 1.0 }
        );
    }
}
