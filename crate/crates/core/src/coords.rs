//! Coordinate systems on the moment spaces of `[a,b]`, `[0,∞)` and `ℝ`.
//!
//! Three representations of (the interior of) a moment space are used:
//!
//! * ordinary moments `m₁..m_n` ([`MomentVector`]),
//! * canonical coordinates ([`CanonicalCoordinates`]): `p_j ∈ (0,1)` on a
//!   compact interval, `z_j > 0` on the half-line, and the interleaved
//!   recursion coefficients `(α₁, β₁, α₂, …)` on the real line,
//! * recursion coefficients of the monic orthogonal polynomials
//!   ([`RecursionCoefficients`]).
//!
//! Moments are computed from recursion coefficients as `⟨e₁, Jᵏ e₁⟩` for the
//! symmetric Jacobi matrix `J` (diagonal `α`, off-diagonal `√β`). The inverse
//! direction runs the Chebyshev algorithm on the moment functional, so that a
//! degenerate Hankel matrix shows up as a non-positive `β` at a definite index.
//!
//! Transforms refuse orders above a cap (30 by default); the Hankel
//! conditioning makes larger orders meaningless in double precision.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dual::{Dual, Scalar};
use crate::error::{MomentError, Result};

/// Default cap on the order of transforms.
pub const DEFAULT_ORDER_CAP: usize = 30;

/// Canonical coordinates closer than this to the edge of their domain are
/// classified as boundary points.
pub const INTERIOR_MARGIN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub const UNIT: Interval = Interval { a: 0.0, b: 1.0 };

    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(MomentError::InvalidParameter(format!(
                "interval [{a}, {b}] needs finite a < b"
            )));
        }
        Ok(Interval { a, b })
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }
}

/// The support `E` of the measures whose moments are considered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Compact(Interval),
    HalfLine,
    RealLine,
}

impl Space {
    pub fn name(&self) -> &'static str {
        match self {
            Space::Compact(_) => "compact interval",
            Space::HalfLine => "half-line",
            Space::RealLine => "real line",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    pub space: Space,
    /// `m₁..m_n`; `m₀ = 1` is implicit.
    pub values: Vec<f64>,
}

impl MomentVector {
    pub fn new(space: Space, values: Vec<f64>) -> Self {
        MomentVector { space, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Independent coordinates of a moment space.
///
/// On the real line `values` holds `(α₁, β₁, α₂, β₂, …)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalCoordinates {
    pub space: Space,
    pub values: Vec<f64>,
}

impl CanonicalCoordinates {
    pub fn new(space: Space, values: Vec<f64>) -> Self {
        CanonicalCoordinates { space, values }
    }

    pub fn compact(interval: Interval, p: Vec<f64>) -> Self {
        Self::new(Space::Compact(interval), p)
    }

    pub fn half_line(z: Vec<f64>) -> Self {
        Self::new(Space::HalfLine, z)
    }

    /// Interleaves `alpha` and `beta`; `beta` must have as many entries as
    /// `alpha` or one fewer.
    pub fn real_line(alpha: &[f64], beta: &[f64]) -> Result<Self> {
        if !(beta.len() == alpha.len() || beta.len() + 1 == alpha.len()) {
            return Err(MomentError::InvalidParameter(format!(
                "{} alphas and {} betas cannot be interleaved",
                alpha.len(),
                beta.len()
            )));
        }
        let mut v = Vec::with_capacity(alpha.len() + beta.len());
        for (j, &a) in alpha.iter().enumerate() {
            v.push(a);
            if let Some(&b) = beta.get(j) {
                v.push(b);
            }
        }
        Ok(Self::new(Space::RealLine, v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The constant-pattern vector `(y₁, y₂, y₁, y₂, …)` of length `n`.
    pub fn alternating(space: Space, y1: f64, y2: f64, n: usize) -> Self {
        let values = (0..n).map(|i| if i % 2 == 0 { y1 } else { y2 }).collect();
        Self::new(space, values)
    }
}

/// Three-term recurrence `P_{j+1} = (x − α_{j+1})P_j − β_j P_{j−1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecursionCoefficients {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl RecursionCoefficients {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if let Some(j) = beta.iter().position(|&b| !(b > 0.0)) {
            return Err(MomentError::Domain {
                index: 2 * (j + 1),
                value: beta[j],
            });
        }
        Ok(RecursionCoefficients { alpha, beta })
    }

    /// Number of moments these coefficients determine: `m_k` needs
    /// `α₁..α_⌈k/2⌉` and `β₁..β_⌊k/2⌋`.
    pub fn determined_moments(&self) -> usize {
        let na = self.alpha.len();
        let nb = self.beta.len();
        (2 * na).min(2 * nb + 1)
    }
}

/// Position of a vector relative to the moment space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Membership {
    Interior,
    /// The coordinate with this (1-based) index sits on the edge of its domain.
    Boundary { index: usize },
    /// The coordinate with this index lies outside its domain.
    Outside { index: usize },
}

/// Transform settings; the free functions in this module use [`Transformer::default`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transformer {
    pub cap: usize,
}

impl Default for Transformer {
    fn default() -> Self {
        Transformer {
            cap: DEFAULT_ORDER_CAP,
        }
    }
}

fn check_cap(order: usize, cap: usize) -> Result<()> {
    if order > cap {
        Err(MomentError::OrderCap { order, cap })
    } else {
        Ok(())
    }
}

fn validate_coordinates(c: &CanonicalCoordinates) -> Result<()> {
    if c.values.is_empty() {
        return Err(MomentError::Arity {
            what: "coordinates",
            needed: 1,
            got: 0,
        });
    }
    for (i, &v) in c.values.iter().enumerate() {
        let ok = match c.space {
            Space::Compact(_) => v > 0.0 && v < 1.0,
            Space::HalfLine => v > 0.0 && v.is_finite(),
            Space::RealLine => {
                if i % 2 == 0 {
                    v.is_finite()
                } else {
                    v > 0.0 && v.is_finite()
                }
            }
        };
        if !ok {
            return Err(MomentError::Domain {
                index: i + 1,
                value: v,
            });
        }
    }
    Ok(())
}

/// Recursion coefficients from canonical coordinates, without validation.
///
/// `n` coordinates give `α₁..α_⌈n/2⌉` and `β₁..β_⌊n/2⌋`.
fn recursion_generic<S: Scalar>(space: &Space, y: &[S]) -> (Vec<S>, Vec<S>) {
    let n = y.len();
    let na = n.div_ceil(2);
    let nb = n / 2;
    let mut alpha = Vec::with_capacity(na);
    let mut beta = Vec::with_capacity(nb);
    match space {
        Space::Compact(iv) => {
            let a = S::cst(iv.a);
            let len = S::cst(iv.len());
            let one = S::cst(1.0);
            // p_{-1} = p_0 = 0
            let p = |k: isize| -> S {
                if k <= 0 {
                    S::cst(0.0)
                } else {
                    y[(k - 1) as usize]
                }
            };
            let q = |k: isize| -> S { one - p(k) };
            for j in 1..=na as isize {
                alpha.push(a + len * (q(2 * j - 3) * p(2 * j - 2) + q(2 * j - 2) * p(2 * j - 1)));
            }
            for j in 1..=nb as isize {
                beta.push(
                    len * len * q(2 * j - 2) * p(2 * j - 1) * q(2 * j - 1) * p(2 * j),
                );
            }
        }
        Space::HalfLine => {
            // z_0 = 0
            let z = |k: usize| -> S {
                if k == 0 {
                    S::cst(0.0)
                } else {
                    y[k - 1]
                }
            };
            for j in 1..=na {
                alpha.push(z(2 * j - 2) + z(2 * j - 1));
            }
            for j in 1..=nb {
                beta.push(z(2 * j - 1) * z(2 * j));
            }
        }
        Space::RealLine => {
            for (i, &v) in y.iter().enumerate() {
                if i % 2 == 0 {
                    alpha.push(v);
                } else {
                    beta.push(v);
                }
            }
        }
    }
    (alpha, beta)
}

/// `m_i = ⟨e₁, Jⁱ e₁⟩`, `i = 1..=k`, with `J` of size `⌊k/2⌋+1`. Entries of `J`
/// beyond the supplied coefficients cannot influence `m₁..m_k` and are zero.
fn jacobi_moments<S: Scalar>(alpha: &[S], beta: &[S], k: usize) -> Vec<S> {
    let size = k / 2 + 1;
    let zero = S::cst(0.0);
    let diag: Vec<S> = (0..size).map(|i| alpha.get(i).copied().unwrap_or(zero)).collect();
    let off: Vec<S> = (0..size.saturating_sub(1))
        .map(|i| beta.get(i).map(|&b| b.sqrt()).unwrap_or(zero))
        .collect();
    let mut v = vec![zero; size];
    v[0] = S::cst(1.0);
    let mut w = vec![zero; size];
    let mut out = Vec::with_capacity(k);
    for step in 1..=k {
        // only the first `step + 1` entries of Jᵗ e₁ can be non-zero
        let active = (step + 1).min(size);
        for i in 0..active {
            let mut acc = diag[i] * v[i];
            if i > 0 {
                acc = acc + off[i - 1] * v[i - 1];
            }
            if i + 1 < size {
                acc = acc + off[i] * v[i + 1];
            }
            w[i] = acc;
        }
        std::mem::swap(&mut v, &mut w);
        out.push(v[0]);
    }
    out
}

impl Transformer {
    pub fn canonical_to_recursion(&self, c: &CanonicalCoordinates) -> Result<RecursionCoefficients> {
        validate_coordinates(c)?;
        check_cap(c.len(), self.cap)?;
        let (alpha, beta) = recursion_generic(&c.space, &c.values);
        Ok(RecursionCoefficients { alpha, beta })
    }

    pub fn recursion_to_moments(&self, rc: &RecursionCoefficients, k: usize) -> Result<Vec<f64>> {
        check_cap(k, self.cap)?;
        let need_a = k.div_ceil(2);
        let need_b = k / 2;
        if rc.alpha.len() < need_a {
            return Err(MomentError::Arity {
                what: "alpha coefficients",
                needed: need_a,
                got: rc.alpha.len(),
            });
        }
        if rc.beta.len() < need_b {
            return Err(MomentError::Arity {
                what: "beta coefficients",
                needed: need_b,
                got: rc.beta.len(),
            });
        }
        if let Some(j) = rc.beta[..need_b].iter().position(|&b| !(b > 0.0)) {
            return Err(MomentError::Domain {
                index: 2 * (j + 1),
                value: rc.beta[j],
            });
        }
        Ok(jacobi_moments(&rc.alpha, &rc.beta, k))
    }

    pub fn moments_to_recursion(&self, m: &MomentVector) -> Result<RecursionCoefficients> {
        check_cap(m.len(), self.cap)?;
        if m.is_empty() {
            return Err(MomentError::Arity {
                what: "moments",
                needed: 1,
                got: 0,
            });
        }
        if let Some(i) = m.values.iter().position(|v| !v.is_finite()) {
            return Err(MomentError::NotAMeasure {
                space: m.space.name(),
                index: i + 1,
                value: m.values[i],
            });
        }
        let (alpha, beta) = chebyshev_recursion(&m.values);
        if let Some(j) = beta.iter().position(|&b| !(b > 0.0)) {
            let index = 2 * (j + 1);
            return Err(if beta[j] == 0.0 {
                MomentError::Boundary { index }
            } else {
                MomentError::NotAMeasure {
                    space: m.space.name(),
                    index,
                    value: beta[j],
                }
            });
        }
        Ok(RecursionCoefficients { alpha, beta })
    }

    pub fn recursion_to_canonical(
        &self,
        space: Space,
        rc: &RecursionCoefficients,
    ) -> Result<CanonicalCoordinates> {
        let n = rc.alpha.len() + rc.beta.len();
        check_cap(n, self.cap)?;
        if !(rc.beta.len() == rc.alpha.len() || rc.beta.len() + 1 == rc.alpha.len()) {
            return Err(MomentError::InvalidParameter(format!(
                "{} alphas and {} betas do not form a coordinate vector",
                rc.alpha.len(),
                rc.beta.len()
            )));
        }
        let raw = raw_canonical(&space, &rc.alpha, &rc.beta);
        for (i, &v) in raw.iter().enumerate() {
            match classify_coordinate(&space, i, v, 0.0) {
                CoordClass::Interior => {}
                CoordClass::Boundary => return Err(MomentError::Boundary { index: i + 1 }),
                CoordClass::Outside => {
                    return Err(MomentError::NotAMeasure {
                        space: space.name(),
                        index: i + 1,
                        value: v,
                    })
                }
            }
        }
        Ok(CanonicalCoordinates::new(space, raw))
    }

    /// The map `φ_n^E` from canonical coordinates to moments.
    pub fn canonical_to_moments(&self, c: &CanonicalCoordinates) -> Result<MomentVector> {
        let rc = self.canonical_to_recursion(c)?;
        let values = jacobi_moments(&rc.alpha, &rc.beta, c.len());
        Ok(MomentVector::new(c.space, values))
    }

    /// Inverse of [`Transformer::canonical_to_moments`].
    pub fn moments_to_canonical(&self, m: &MomentVector) -> Result<CanonicalCoordinates> {
        let rc = self.moments_to_recursion(m)?;
        self.recursion_to_canonical(m.space, &rc)
    }

    /// `Dφ_k^E` at `c`: entry `(i, r) = ∂m_{i+1}/∂y_{r+1}`, obtained by
    /// propagating dual numbers through the recursion and Jacobi pipeline.
    pub fn jacobian_matrix(&self, c: &CanonicalCoordinates, k: usize) -> Result<DMatrix<f64>> {
        validate_coordinates(c)?;
        check_cap(k, self.cap)?;
        if c.len() < k {
            return Err(MomentError::Arity {
                what: "coordinates",
                needed: k,
                got: c.len(),
            });
        }
        let mut jac = DMatrix::zeros(k, k);
        for r in 0..k {
            let y: Vec<Dual> = c.values[..k]
                .iter()
                .enumerate()
                .map(|(i, &v)| Dual::new(v, if i == r { 1.0 } else { 0.0 }))
                .collect();
            let (alpha, beta) = recursion_generic(&c.space, &y);
            let m = jacobi_moments(&alpha, &beta, k);
            for (i, mi) in m.iter().enumerate() {
                jac[(i, r)] = mi.d;
            }
        }
        Ok(jac)
    }

    /// Closed-form `det Dφ_n^E` with `n = c.len()`.
    pub fn jacobian_det(&self, c: &CanonicalCoordinates) -> Result<f64> {
        validate_coordinates(c)?;
        check_cap(c.len(), self.cap)?;
        Ok(jacobian_det_unchecked(c))
    }
}

fn jacobian_det_unchecked(c: &CanonicalCoordinates) -> f64 {
    let n = c.len();
    match c.space {
        Space::Compact(iv) => {
            let tri = (n * (n + 1) / 2) as i32;
            let mut det = iv.len().powi(tri);
            for (i, &p) in c.values.iter().enumerate() {
                det *= (p * (1.0 - p)).powi((n - i - 1) as i32);
            }
            det
        }
        Space::HalfLine => c
            .values
            .iter()
            .enumerate()
            .map(|(i, &z)| z.powi((n - i - 1) as i32))
            .product(),
        Space::RealLine => {
            // β_j sits at coordinate 2j; its exponent is n − 2j for either parity of n
            c.values
                .iter()
                .enumerate()
                .skip(1)
                .step_by(2)
                .map(|(i, &b)| b.powi((n - i - 1) as i32))
                .product()
        }
    }
}

/// Chebyshev algorithm (Gram–Schmidt on the moment functional).
///
/// Returns `α₁..α_⌈n/2⌉`, `β₁..β_⌊n/2⌋`, stopping after the first
/// non-positive `β` (which is returned as the last entry).
pub(crate) fn chebyshev_recursion(m: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = m.len();
    // moments m_0..m_n
    let mut mom = Vec::with_capacity(n + 1);
    mom.push(1.0);
    mom.extend_from_slice(m);
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    if n == 0 {
        return (alpha, beta);
    }
    // sigma_prev2 = σ_{k-2,·}, sigma_prev = σ_{k-1,·}; index l directly
    let mut sigma_prev2 = vec![0.0; n + 1];
    let mut sigma_prev = mom.clone();
    alpha.push(mom[1] / mom[0]);
    let mut beta_prev = mom[0];
    let mut k = 1;
    while 2 * k <= n {
        let ak = alpha[k - 1];
        let bkm1 = if k == 1 { 0.0 } else { beta_prev };
        let mut sigma = vec![0.0; n + 1];
        for l in k..=(n - k) {
            sigma[l] = sigma_prev[l + 1] - ak * sigma_prev[l] - bkm1 * sigma_prev2[l];
        }
        let bk = sigma[k] / sigma_prev[k - 1];
        beta.push(bk);
        if !(bk > 0.0) {
            break;
        }
        if 2 * k < n {
            alpha.push(sigma[k + 1] / sigma[k] - sigma_prev[k] / sigma_prev[k - 1]);
        }
        beta_prev = bk;
        sigma_prev2 = std::mem::replace(&mut sigma_prev, sigma);
        k += 1;
    }
    (alpha, beta)
}

/// Solves the coordinate identities forward, stopping after the first
/// coordinate that is not strictly inside its domain.
fn raw_canonical(space: &Space, alpha: &[f64], beta: &[f64]) -> Vec<f64> {
    let n = alpha.len() + beta.len();
    let mut out = Vec::with_capacity(n);
    let strict = |i: usize, v: f64| classify_coordinate(space, i, v, 0.0) == CoordClass::Interior;
    match space {
        Space::Compact(iv) => {
            let len = iv.len();
            let get = |out: &Vec<f64>, k: isize| -> f64 {
                if k <= 0 {
                    0.0
                } else {
                    out[(k - 1) as usize]
                }
            };
            for idx in 1..=n {
                let j = idx.div_ceil(2) as isize;
                let v = if idx % 2 == 1 {
                    let u = (alpha[(j - 1) as usize] - iv.a) / len;
                    let p2 = get(&out, 2 * j - 2);
                    (u - (1.0 - get(&out, 2 * j - 3)) * p2) / (1.0 - p2)
                } else {
                    let p_odd = get(&out, 2 * j - 1);
                    beta[(j - 1) as usize]
                        / (len * len * (1.0 - get(&out, 2 * j - 2)) * p_odd * (1.0 - p_odd))
                };
                out.push(v);
                if !strict(idx - 1, v) {
                    break;
                }
            }
        }
        Space::HalfLine => {
            for idx in 1..=n {
                let j = idx.div_ceil(2);
                let v = if idx % 2 == 1 {
                    let prev = if idx >= 2 { out[idx - 2] } else { 0.0 };
                    alpha[j - 1] - prev
                } else {
                    beta[j - 1] / out[idx - 2]
                };
                out.push(v);
                if !strict(idx - 1, v) {
                    break;
                }
            }
        }
        Space::RealLine => {
            for idx in 1..=n {
                let j = idx.div_ceil(2);
                let v = if idx % 2 == 1 { alpha[j - 1] } else { beta[j - 1] };
                out.push(v);
                if !strict(idx - 1, v) {
                    break;
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CoordClass {
    Interior,
    Boundary,
    Outside,
}

fn classify_coordinate(space: &Space, i: usize, v: f64, margin: f64) -> CoordClass {
    if !v.is_finite() {
        return CoordClass::Outside;
    }
    let (lo, hi) = match space {
        Space::Compact(_) => (Some(0.0), Some(1.0)),
        Space::HalfLine => (Some(0.0), None),
        Space::RealLine => {
            if i % 2 == 0 {
                (None, None)
            } else {
                (Some(0.0), None)
            }
        }
    };
    let below = lo.map_or(false, |l| v < l - margin);
    let above = hi.map_or(false, |h| v > h + margin);
    if below || above {
        return CoordClass::Outside;
    }
    let near_lo = lo.map_or(false, |l| v <= l + margin);
    let near_hi = hi.map_or(false, |h| v >= h - margin);
    if near_lo || near_hi {
        CoordClass::Boundary
    } else {
        CoordClass::Interior
    }
}

/// Classifies `m` with the default [`INTERIOR_MARGIN`].
pub fn in_moment_space(m: &MomentVector) -> Membership {
    in_moment_space_with_margin(m, INTERIOR_MARGIN)
}

pub fn in_moment_space_with_margin(m: &MomentVector, margin: f64) -> Membership {
    if let Some(i) = m.values.iter().position(|v| !v.is_finite()) {
        return Membership::Outside { index: i + 1 };
    }
    if m.values.is_empty() {
        return Membership::Interior;
    }
    let (alpha, beta) = chebyshev_recursion(&m.values);
    let raw = raw_canonical(&m.space, &alpha, &beta);
    for (i, &v) in raw.iter().enumerate() {
        match classify_coordinate(&m.space, i, v, margin) {
            CoordClass::Interior => {}
            CoordClass::Boundary => return Membership::Boundary { index: i + 1 },
            CoordClass::Outside => return Membership::Outside { index: i + 1 },
        }
    }
    if raw.len() < m.len() {
        // the solve stopped early on a coordinate that is interior only thanks to the margin
        return Membership::Boundary { index: raw.len() };
    }
    Membership::Interior
}

/// Half-line moments through the double sequence
/// `g_{i,j} = g_{i,j−1} + z_{j−i+1} g_{i−1,j}` with `m_k = g_{k,k}`.
pub fn half_line_moments_g(z: &[f64]) -> Vec<f64> {
    let n = z.len();
    let mut g = vec![vec![0.0; n + 1]; n + 1];
    for j in 0..=n {
        g[0][j] = 1.0;
        for i in 1..=j {
            g[i][j] = g[i][j - 1] + z[j - i] * g[i - 1][j];
        }
    }
    (1..=n).map(|k| g[k][k]).collect()
}

pub fn canonical_to_recursion(c: &CanonicalCoordinates) -> Result<RecursionCoefficients> {
    Transformer::default().canonical_to_recursion(c)
}

pub fn recursion_to_moments(rc: &RecursionCoefficients, k: usize) -> Result<Vec<f64>> {
    Transformer::default().recursion_to_moments(rc, k)
}

pub fn moments_to_recursion(m: &MomentVector) -> Result<RecursionCoefficients> {
    Transformer::default().moments_to_recursion(m)
}

pub fn recursion_to_canonical(space: Space, rc: &RecursionCoefficients) -> Result<CanonicalCoordinates> {
    Transformer::default().recursion_to_canonical(space, rc)
}

pub fn canonical_to_moments(c: &CanonicalCoordinates) -> Result<MomentVector> {
    Transformer::default().canonical_to_moments(c)
}

pub fn moments_to_canonical(m: &MomentVector) -> Result<CanonicalCoordinates> {
    Transformer::default().moments_to_canonical(m)
}

pub fn jacobian_matrix(c: &CanonicalCoordinates, k: usize) -> Result<DMatrix<f64>> {
    Transformer::default().jacobian_matrix(c, k)
}

pub fn jacobian_det(c: &CanonicalCoordinates) -> Result<f64> {
    Transformer::default().jacobian_det(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
    }

    fn unit() -> Space {
        Space::Compact(Interval::UNIT)
    }

    #[test]
    fn canonical_to_recursion_examples() {
        let rc = canonical_to_recursion(&CanonicalCoordinates::compact(Interval::UNIT, vec![0.5; 4])).unwrap();
        assert!(close(&rc.alpha, &[0.5, 0.5], 1e-15));
        assert!(close(&rc.beta, &[0.125, 0.0625], 1e-15));

        let rc = canonical_to_recursion(&CanonicalCoordinates::half_line(vec![1.0; 4])).unwrap();
        assert_eq!(rc.alpha, vec![1.0, 2.0]);
        assert_eq!(rc.beta, vec![1.0, 1.0]);

        let c = CanonicalCoordinates::real_line(&[0.3, -1.0], &[2.0]).unwrap();
        let rc = canonical_to_recursion(&c).unwrap();
        assert_eq!(rc.alpha, vec![0.3, -1.0]);
        assert_eq!(rc.beta, vec![2.0]);
    }

    #[test]
    fn canonical_to_recursion_rejects_out_of_domain() {
        let err = canonical_to_recursion(&CanonicalCoordinates::compact(Interval::UNIT, vec![0.5, 1.0])).unwrap_err();
        assert_eq!(err, MomentError::Domain { index: 2, value: 1.0 });
        let err = canonical_to_recursion(&CanonicalCoordinates::half_line(vec![1.0, 2.0, -0.1])).unwrap_err();
        assert!(matches!(err, MomentError::Domain { index: 3, .. }));
        let err = canonical_to_recursion(&CanonicalCoordinates::new(Space::RealLine, vec![-5.0, 0.0])).unwrap_err();
        assert!(matches!(err, MomentError::Domain { index: 2, .. }));
    }

    #[test]
    fn recursion_to_moments_examples() {
        let rc = RecursionCoefficients::new(vec![0.0; 3], vec![1.0, 1.0]).unwrap();
        assert_eq!(recursion_to_moments(&rc, 4).unwrap(), vec![0.0, 1.0, 0.0, 2.0]);
        let rc = RecursionCoefficients::new(vec![0.5, 0.5], vec![0.125]).unwrap();
        assert!(close(&recursion_to_moments(&rc, 2).unwrap(), &[0.5, 0.375], 1e-15));
        let rc = RecursionCoefficients::new(vec![1.7], vec![]).unwrap();
        assert_eq!(recursion_to_moments(&rc, 1).unwrap(), vec![1.7]);
    }

    #[test]
    fn recursion_to_moments_arity() {
        let rc = RecursionCoefficients::new(vec![0.0], vec![1.0]).unwrap();
        let err = recursion_to_moments(&rc, 3).unwrap_err();
        assert!(matches!(err, MomentError::Arity { needed: 2, got: 1, .. }));
    }

    #[test]
    fn moments_to_recursion_examples() {
        let rc = moments_to_recursion(&MomentVector::new(Space::RealLine, vec![0.0, 1.0, 0.0, 2.0])).unwrap();
        assert!(close(&rc.alpha, &[0.0, 0.0], 1e-14));
        assert!(close(&rc.beta, &[1.0, 1.0], 1e-14));
        let rc = moments_to_recursion(&MomentVector::new(unit(), vec![0.5, 0.375])).unwrap();
        assert!(close(&rc.alpha, &[0.5], 1e-15));
        assert!(close(&rc.beta, &[0.125], 1e-15));
        let rc = moments_to_recursion(&MomentVector::new(Space::RealLine, vec![-3.0])).unwrap();
        assert_eq!(rc.alpha, vec![-3.0]);
        assert!(rc.beta.is_empty());
    }

    #[test]
    fn moments_to_recursion_degenerate_hankel() {
        let err = moments_to_recursion(&MomentVector::new(unit(), vec![0.5, 0.25])).unwrap_err();
        assert_eq!(err, MomentError::Boundary { index: 2 });
    }

    #[test]
    fn recursion_to_canonical_examples() {
        let rc = RecursionCoefficients::new(vec![1.0, 2.0], vec![1.0, 1.0]).unwrap();
        let c = recursion_to_canonical(Space::HalfLine, &rc).unwrap();
        assert!(close(&c.values, &[1.0; 4], 1e-15));

        let rc = RecursionCoefficients::new(vec![0.5], vec![]).unwrap();
        assert_eq!(recursion_to_canonical(unit(), &rc).unwrap().values, vec![0.5]);

        let rc = RecursionCoefficients::new(vec![0.5, 0.5], vec![0.125, 0.0625]).unwrap();
        let c = recursion_to_canonical(unit(), &rc).unwrap();
        assert!(close(&c.values, &[0.5; 4], 1e-14));
    }

    #[test]
    fn recursion_to_canonical_not_a_measure() {
        // α₁ outside [0,1] cannot be the mean of a measure on [0,1]
        let rc = RecursionCoefficients::new(vec![1.5], vec![]).unwrap();
        let err = recursion_to_canonical(unit(), &rc).unwrap_err();
        assert!(matches!(err, MomentError::NotAMeasure { index: 1, .. }));
        // half-line: z₃ = α₂ − z₂ = 0.5 − 1 < 0
        let rc = RecursionCoefficients::new(vec![1.0, 0.5], vec![1.0]).unwrap();
        let err = recursion_to_canonical(Space::HalfLine, &rc).unwrap_err();
        assert!(matches!(err, MomentError::NotAMeasure { index: 3, .. }));
    }

    #[test]
    fn canonical_to_moments_examples() {
        let m = canonical_to_moments(&CanonicalCoordinates::half_line(vec![1.0; 6])).unwrap();
        assert_eq!(&m.values[..3], &[1.0, 2.0, 5.0]);
        let m = canonical_to_moments(&CanonicalCoordinates::compact(Interval::UNIT, vec![0.5; 3])).unwrap();
        assert!(close(&m.values, &[0.5, 0.375, 0.3125], 1e-15));
        let m = canonical_to_moments(&CanonicalCoordinates::new(Space::RealLine, vec![0.0, 1.0, 0.0])).unwrap();
        assert_eq!(m.values, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn moments_to_canonical_examples() {
        let c = moments_to_canonical(&MomentVector::new(Space::HalfLine, vec![1.0, 2.0, 5.0])).unwrap();
        assert!(close(&c.values, &[1.0; 3], 1e-14));
        let c = moments_to_canonical(&MomentVector::new(unit(), vec![0.5, 0.375, 0.3125])).unwrap();
        assert!(close(&c.values, &[0.5; 3], 1e-14));
        let c = moments_to_canonical(&MomentVector::new(Space::RealLine, vec![0.0, 1.0, 0.0])).unwrap();
        assert!(close(&c.values, &[0.0, 1.0, 0.0], 1e-15));
    }

    #[test]
    fn jacobian_entries() {
        let c = CanonicalCoordinates::half_line(vec![1.0; 4]);
        let j = jacobian_matrix(&c, 4).unwrap();
        assert_eq!(j[(1, 0)], 3.0);
        assert_eq!(j[(2, 1)], 5.0);
        let c = CanonicalCoordinates::compact(Interval::UNIT, vec![0.3, 0.6]);
        let j = jacobian_matrix(&c, 2).unwrap();
        assert_eq!(j[(0, 0)], 1.0);
        assert_eq!(j[(0, 1)], 0.0);
    }

    #[test]
    fn jacobian_det_examples() {
        let det = jacobian_det(&CanonicalCoordinates::half_line(vec![2.0, 3.0, 4.0])).unwrap();
        assert_eq!(det, 12.0);
        let c = CanonicalCoordinates::real_line(&[0.1, -0.4], &[2.0, 0.7]).unwrap();
        assert_eq!(jacobian_det(&c).unwrap(), 4.0);
        let det = jacobian_det(&CanonicalCoordinates::compact(Interval::UNIT, vec![0.3])).unwrap();
        assert_eq!(det, 1.0);
    }

    #[test]
    fn compact_det_constant_pinned() {
        // det Dφ_n on [a,b] = (b−a)^{n(n+1)/2} ∏ (p_j q_j)^{n−j}, checked against the matrix
        let iv = Interval::new(-1.5, 2.5).unwrap();
        for n in 1..=6 {
            let p: Vec<f64> = (0..n).map(|i| 0.2 + 0.1 * i as f64).collect();
            let c = CanonicalCoordinates::compact(iv, p);
            let det = jacobian_matrix(&c, n).unwrap().determinant();
            let closed = jacobian_det(&c).unwrap();
            assert!((det - closed).abs() <= 1e-10 * closed.abs(), "n={n}: {det} vs {closed}");
        }
    }

    #[test]
    fn membership_examples() {
        assert_eq!(in_moment_space(&MomentVector::new(unit(), vec![0.5, 0.375])), Membership::Interior);
        assert_eq!(
            in_moment_space(&MomentVector::new(unit(), vec![0.5, 0.25])),
            Membership::Boundary { index: 2 }
        );
        assert_eq!(
            in_moment_space(&MomentVector::new(unit(), vec![0.5, 0.2])),
            Membership::Outside { index: 2 }
        );
        assert_eq!(
            in_moment_space(&MomentVector::new(Space::HalfLine, vec![-1.0])),
            Membership::Outside { index: 1 }
        );
        assert_eq!(
            in_moment_space(&MomentVector::new(Space::RealLine, vec![f64::NAN])),
            Membership::Outside { index: 1 }
        );
    }

    #[test]
    fn order_cap_enforced() {
        let c = CanonicalCoordinates::half_line(vec![1.0; 31]);
        assert!(matches!(canonical_to_moments(&c), Err(MomentError::OrderCap { order: 31, cap: 30 })));
        let wide = Transformer { cap: 40 };
        assert!(wide.canonical_to_moments(&c).is_ok());
    }

    #[test]
    fn g_recursion_catalan() {
        assert_eq!(half_line_moments_g(&[1.0; 5]), vec![1.0, 2.0, 5.0, 14.0, 42.0]);
        // m₃ = z₁³ + 2z₁²z₂ + z₁z₂² + z₁z₂z₃
        let z = [2.0, 3.0, 5.0];
        let m = half_line_moments_g(&z);
        assert_eq!(m[2], 8.0 + 2.0 * 4.0 * 3.0 + 2.0 * 9.0 + 30.0);
    }
}
