//! External fields `V` acting on a single canonical coordinate.
//!
//! A potential is a polynomial plus optional logarithmic terms at the
//! finite ends of the coordinate's domain:
//!
//! ```text
//! V(t) = Σ c_i t^i + log_left·log(t) + log_right·log(1 − t)
//! ```
//!
//! `log_left` needs a finite left end (compact `p` and positive coordinates),
//! `log_right` only exists for compact `p ∈ (0,1)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{MomentError, Result};

/// Where a single canonical coordinate lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordDomain {
    /// `p ∈ (0,1)`
    Unit,
    /// `z > 0` or `β > 0`
    Positive,
    /// `α ∈ ℝ`
    Real,
}

impl CoordDomain {
    pub fn contains(self, t: f64) -> bool {
        match self {
            CoordDomain::Unit => t > 0.0 && t < 1.0,
            CoordDomain::Positive => t > 0.0 && t.is_finite(),
            CoordDomain::Real => t.is_finite(),
        }
    }

    pub fn bounds(self) -> (f64, f64) {
        match self {
            CoordDomain::Unit => (0.0, 1.0),
            CoordDomain::Positive => (0.0, f64::INFINITY),
            CoordDomain::Real => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Smooth bijection from ℝ onto the domain, used for scanning.
    pub(crate) fn from_scan(self, s: f64) -> f64 {
        match self {
            CoordDomain::Unit => 1.0 / (1.0 + (-s).exp()),
            CoordDomain::Positive => s.exp(),
            CoordDomain::Real => s.sinh(),
        }
    }

    pub(crate) fn to_scan(self, t: f64) -> f64 {
        match self {
            CoordDomain::Unit => (t / (1.0 - t)).ln(),
            CoordDomain::Positive => t.ln(),
            CoordDomain::Real => t.asinh(),
        }
    }

    /// `log` of the Jacobian weight attached to this coordinate:
    /// `log(p(1−p))`, `log z`, or nothing for `α`.
    pub fn log_weight(self, t: f64) -> f64 {
        match self {
            CoordDomain::Unit => (t * (1.0 - t)).ln(),
            CoordDomain::Positive => t.ln(),
            CoordDomain::Real => 0.0,
        }
    }

    pub fn log_weight_d1(self, t: f64) -> f64 {
        match self {
            CoordDomain::Unit => 1.0 / t - 1.0 / (1.0 - t),
            CoordDomain::Positive => 1.0 / t,
            CoordDomain::Real => 0.0,
        }
    }

    pub fn log_weight_d2(self, t: f64) -> f64 {
        match self {
            CoordDomain::Unit => -1.0 / (t * t) - 1.0 / ((1.0 - t) * (1.0 - t)),
            CoordDomain::Positive => -1.0 / (t * t),
            CoordDomain::Real => 0.0,
        }
    }
}

/// How a potential is used; fixes which growth condition applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldRole {
    /// `V` on a compact canonical moment `p ∈ (0,1)`.
    Compact,
    /// `V` on a half-line canonical moment `z > 0`; needs `V/log z ≥ 2+ε`.
    HalfLine,
    /// `V₁` on a real-line `α`; needs `V₁/log|α| ≥ 1+ε`.
    Alpha,
    /// `V₂` on a real-line `β`; needs `V₂/log β ≥ 3+ε`.
    Beta,
}

impl FieldRole {
    pub fn domain(self) -> CoordDomain {
        match self {
            FieldRole::Compact => CoordDomain::Unit,
            FieldRole::HalfLine | FieldRole::Beta => CoordDomain::Positive,
            FieldRole::Alpha => CoordDomain::Real,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PotentialSpec {
    #[serde(default)]
    pub poly: Vec<f64>,
    #[serde(default)]
    pub log_left: f64,
    #[serde(default)]
    pub log_right: f64,
}

impl PotentialSpec {
    pub fn zero() -> Self {
        PotentialSpec::default()
    }

    pub fn polynomial(poly: Vec<f64>) -> Self {
        PotentialSpec {
            poly,
            ..Default::default()
        }
    }

    pub fn with_logs(mut self, log_left: f64, log_right: f64) -> Self {
        self.log_left = log_left;
        self.log_right = log_right;
        self
    }

    /// Polynomial degree after dropping trailing zero coefficients (`None` for V ≡ 0 poly part).
    fn degree(&self) -> Option<usize> {
        self.poly.iter().rposition(|&c| c != 0.0)
    }

    fn poly_eval(&self, t: f64) -> (f64, f64, f64) {
        // Horner for p, p', p'' together.
        let (mut p, mut d1, mut d2) = (0.0, 0.0, 0.0);
        for &c in self.poly.iter().rev() {
            d2 = d2 * t + 2.0 * d1;
            d1 = d1 * t + p;
            p = p * t + c;
        }
        (p, d1, d2)
    }

    pub fn value(&self, t: f64) -> f64 {
        let mut v = self.poly_eval(t).0;
        if self.log_left != 0.0 {
            v += self.log_left * t.ln();
        }
        if self.log_right != 0.0 {
            v += self.log_right * (1.0 - t).ln();
        }
        v
    }

    pub fn d1(&self, t: f64) -> f64 {
        let mut v = self.poly_eval(t).1;
        if self.log_left != 0.0 {
            v += self.log_left / t;
        }
        if self.log_right != 0.0 {
            v -= self.log_right / (1.0 - t);
        }
        v
    }

    pub fn d2(&self, t: f64) -> f64 {
        let mut v = self.poly_eval(t).2;
        if self.log_left != 0.0 {
            v -= self.log_left / (t * t);
        }
        if self.log_right != 0.0 {
            v -= self.log_right / ((1.0 - t) * (1.0 - t));
        }
        v
    }

    /// Symbolic growth / admissibility check for the given role.
    pub fn check(&self, role: FieldRole) -> Result<()> {
        if self.poly.iter().any(|c| !c.is_finite())
            || !self.log_left.is_finite()
            || !self.log_right.is_finite()
        {
            return Err(MomentError::InvalidParameter(
                "potential coefficients must be finite".into(),
            ));
        }
        let lead = self.degree().map(|d| (d, self.poly[d]));
        let grows = |needed: f64| match lead {
            Some((d, c)) if d >= 1 => c > 0.0,
            _ => self.log_left > needed,
        };
        match role {
            FieldRole::Compact => Ok(()),
            FieldRole::HalfLine | FieldRole::Beta => {
                if self.log_right != 0.0 {
                    return Err(MomentError::InvalidParameter(
                        "logR is only meaningful on a compact interval".into(),
                    ));
                }
                let needed = if role == FieldRole::HalfLine { 2.0 } else { 3.0 };
                if grows(needed) {
                    Ok(())
                } else {
                    Err(MomentError::NonNormalizable(format!(
                        "V(t)/log t must eventually exceed {needed}: need a polynomial part with \
                         positive leading coefficient or logL > {needed}"
                    )))
                }
            }
            FieldRole::Alpha => {
                if self.log_left != 0.0 || self.log_right != 0.0 {
                    return Err(MomentError::InvalidParameter(
                        "logarithmic terms need a finite domain end; α ranges over ℝ".into(),
                    ));
                }
                match lead {
                    Some((d, c)) if d >= 2 && d % 2 == 0 && c > 0.0 => Ok(()),
                    _ => Err(MomentError::NonNormalizable(
                        "V₁ on ℝ must be a polynomial of even degree ≥ 2 with positive leading \
                         coefficient"
                            .into(),
                    )),
                }
            }
        }
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coeffs: Vec<String> = self.poly.iter().map(|c| c.to_string()).collect();
        if coeffs.is_empty() {
            write!(f, "0")?;
        } else {
            write!(f, "{}", coeffs.join(","))?;
        }
        if self.log_left != 0.0 {
            write!(f, ";logL={}", self.log_left)?;
        }
        if self.log_right != 0.0 {
            write!(f, ";logR={}", self.log_right)?;
        }
        Ok(())
    }
}

/// Parses `"c0,c1,...[;logL=x][;logR=y]"`.
impl FromStr for PotentialSpec {
    type Err = MomentError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| MomentError::InvalidParameter(msg);
        let mut spec = PotentialSpec::zero();
        for (i, part) in s.split(';').map(str::trim).enumerate() {
            if let Some((key, val)) = part.split_once('=') {
                let v: f64 = val
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("bad number in potential term {part:?}")))?;
                match key.trim() {
                    "logL" => spec.log_left = v,
                    "logR" => spec.log_right = v,
                    other => return Err(bad(format!("unknown potential term {other:?}"))),
                }
            } else if i == 0 {
                if part.is_empty() {
                    continue;
                }
                spec.poly = part
                    .split(',')
                    .map(|c| {
                        c.trim()
                            .parse::<f64>()
                            .map_err(|_| bad(format!("bad polynomial coefficient {c:?}")))
                    })
                    .collect::<Result<_>>()?;
            } else {
                return Err(bad(format!("unexpected potential term {part:?}")));
            }
        }
        Ok(spec)
    }
}
