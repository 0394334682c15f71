//! Exact sampling of random moment vectors through independent canonical
//! coordinates.
//!
//! Under the distribution with external fields `V₁, V₂` the canonical
//! coordinates are independent, coordinate `j` having the one-dimensional
//! density
//!
//! ```text
//! f_j(t) ∝ exp(−n·V(t)) · weight(t)^{w_j}
//! ```
//!
//! with `V = V₁` on odd and `V₂` on even positions and
//!
//! | space      | coordinate | weight      | `w_j`               |
//! |------------|------------|-------------|---------------------|
//! | `[a,b]`    | `p_j`      | `p(1−p)`    | `n − j`             |
//! | `[0,∞)`    | `z_j`      | `z`         | `n − j`             |
//! | `ℝ`        | `α_i`      | –           | 0                   |
//! | `ℝ`        | `β_i`      | `β`         | `N − 2i`            |
//!
//! On the real line `n` is the size parameter in the exponent and the moment
//! order is `N = 2n−1` ([`OrderParity::Odd`], default) or `N = 2n`
//! ([`OrderParity::Even`]). This keeps `β`'s effective field at
//! `V₂ − 2 log β` for both parities.
//!
//! Draws are by inverse CDF on a tabulated 2048-node grid. Randomness is
//! ChaCha8 used as a counter-based generator: coordinate `j` reads stream `j`
//! of the seeded key, replicate `r` reads the 64-bit word at position `r`, so
//! any replicate can be regenerated independently and batches are identical
//! regardless of thread scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coords::{CanonicalCoordinates, MomentVector, Space, Transformer};
use crate::error::{MomentError, Result};
use crate::potential::{CoordDomain, FieldRole, PotentialSpec};
use crate::quadrature::{gk15, integrate, log_window};

pub const GRID_NODES: usize = 2048;
/// Tails are cut where the log-density is this many nats below its maximum.
pub const TRUNCATION_NATS: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderParity {
    #[default]
    Odd,
    Even,
}

/// The distribution of a random moment vector with external fields `V₁, V₂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentDistribution {
    pub space: Space,
    pub n: usize,
    pub v1: PotentialSpec,
    pub v2: PotentialSpec,
    #[serde(default)]
    pub parity: OrderParity,
}

impl MomentDistribution {
    pub fn new(space: Space, n: usize, v1: PotentialSpec, v2: PotentialSpec) -> Result<Self> {
        if n == 0 {
            return Err(MomentError::InvalidParameter("n must be at least 1".into()));
        }
        let d = MomentDistribution {
            space,
            n,
            v1,
            v2,
            parity: OrderParity::Odd,
        };
        d.v1.check(d.role(1))?;
        d.v2.check(d.role(2))?;
        Ok(d)
    }

    pub fn with_parity(mut self, parity: OrderParity) -> Self {
        self.parity = parity;
        self
    }

    /// Number of moments (= canonical coordinates) of a full draw.
    pub fn order(&self) -> usize {
        match (self.space, self.parity) {
            (Space::RealLine, OrderParity::Odd) => 2 * self.n - 1,
            (Space::RealLine, OrderParity::Even) => 2 * self.n,
            _ => self.n,
        }
    }

    fn role(&self, j: usize) -> FieldRole {
        match self.space {
            Space::Compact(_) => FieldRole::Compact,
            Space::HalfLine => FieldRole::HalfLine,
            Space::RealLine if j % 2 == 1 => FieldRole::Alpha,
            Space::RealLine => FieldRole::Beta,
        }
    }

    /// Marginal law of canonical coordinate `j` (1-based).
    pub fn coordinate_density(&self, j: usize) -> Result<CoordinateDensity> {
        let order = self.order();
        if j == 0 || j > order {
            return Err(MomentError::InvalidParameter(format!(
                "coordinate index {j} outside 1..={order}"
            )));
        }
        let role = self.role(j);
        let potential = if j % 2 == 1 { &self.v1 } else { &self.v2 };
        let weight = match self.space {
            Space::Compact(_) | Space::HalfLine => (self.n - j) as f64,
            Space::RealLine if j % 2 == 1 => 0.0,
            Space::RealLine => (order - j) as f64,
        };
        CoordinateDensity::new(role.domain(), potential.clone(), self.n, j, weight)
    }
}

/// Unnormalized marginal density `exp(−n·V(t) + w·log weight(t))` of one coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateDensity {
    pub domain: CoordDomain,
    pub potential: PotentialSpec,
    pub n: usize,
    pub j: usize,
    pub weight: f64,
}

impl CoordinateDensity {
    pub fn new(
        domain: CoordDomain,
        potential: PotentialSpec,
        n: usize,
        j: usize,
        weight: f64,
    ) -> Result<Self> {
        let nf = n as f64;
        // power of t (resp. 1−t) at the finite ends
        let left = weight - nf * potential.log_left;
        let right = weight - nf * potential.log_right;
        let bad_left = matches!(domain, CoordDomain::Unit | CoordDomain::Positive) && left <= -1.0;
        let bad_right = domain == CoordDomain::Unit && right <= -1.0;
        if bad_left || bad_right {
            return Err(MomentError::NonNormalizable(format!(
                "coordinate {j}: density behaves like t^{} at a finite end",
                if bad_left { left } else { right }
            )));
        }
        Ok(CoordinateDensity {
            domain,
            potential,
            n,
            j,
            weight,
        })
    }

    pub fn log_unnormalized(&self, t: f64) -> f64 {
        if !self.domain.contains(t) {
            return f64::NEG_INFINITY;
        }
        let mut v = -(self.n as f64) * self.potential.value(t);
        if self.weight != 0.0 {
            v += self.weight * self.domain.log_weight(t);
        }
        v
    }

    pub fn tabulate(&self) -> Result<Tabulation> {
        Tabulation::new(self)
    }
}

/// Free-function form of [`MomentDistribution::coordinate_density`].
pub fn coordinate_density(
    space: Space,
    j: usize,
    n: usize,
    v1: &PotentialSpec,
    v2: &PotentialSpec,
) -> Result<CoordinateDensity> {
    MomentDistribution::new(space, n, v1.clone(), v2.clone())?.coordinate_density(j)
}

/// Tabulated CDF with cubic Hermite interpolation between nodes.
#[derive(Debug, Clone)]
pub struct Tabulation {
    domain: CoordDomain,
    nodes: Vec<f64>,
    cdf: Vec<f64>,
    pdf: Vec<f64>,
    /// `log ∫ exp(log_unnormalized)` over the tabulated window.
    pub log_normalizer: f64,
    /// Estimated relative mass cut off by the window.
    pub truncation: f64,
}

impl Tabulation {
    pub fn new(d: &CoordinateDensity) -> Result<Self> {
        let logf = |t: f64| d.log_unnormalized(t);
        let dom = d.domain;
        let win = log_window(&logf, dom, dom.bounds(), TRUNCATION_NATS)?;
        // nodes equidistant in the scan variable; domain ends map to ±36/45
        let (dlo, dhi) = dom.bounds();
        let lim = match dom {
            CoordDomain::Unit => 36.0,
            _ => 45.0,
        };
        let s_lo = if win.lo <= dlo { -lim } else { dom.to_scan(win.lo) };
        let s_hi = if win.hi >= dhi { lim } else { dom.to_scan(win.hi) };
        let ds = (s_hi - s_lo) / (GRID_NODES - 1) as f64;
        let mut nodes: Vec<f64> = (0..GRID_NODES)
            .map(|i| dom.from_scan(s_lo + ds * i as f64))
            .collect();
        nodes[0] = win.lo;
        nodes[GRID_NODES - 1] = win.hi;
        nodes.dedup();
        if nodes.len() < 2 {
            return Err(MomentError::Numeric(format!(
                "coordinate {}: degenerate tabulation window",
                d.j
            )));
        }

        let shifted = |t: f64| (logf(t) - win.max).exp();
        let mass: Vec<f64> = nodes
            .par_windows(2)
            .map(|w| {
                let (v, e) = gk15(&shifted, w[0], w[1]);
                if e <= 1e-13 * v.abs() + 1e-300 {
                    v
                } else {
                    integrate(&shifted, w[0], w[1], 1, 1e-300, 1e-13).value
                }
            })
            .collect();
        let mut cdf = Vec::with_capacity(nodes.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for m in &mass {
            acc += m;
            cdf.push(acc);
        }
        if !(acc > 0.0) || !acc.is_finite() {
            return Err(MomentError::Numeric(format!(
                "coordinate {}: CDF tabulation produced total mass {acc}",
                d.j
            )));
        }
        for c in cdf.iter_mut() {
            *c /= acc;
        }
        let pdf = nodes.iter().map(|&t| shifted(t) / acc).collect();
        Ok(Tabulation {
            domain: dom,
            nodes,
            cdf,
            pdf,
            log_normalizer: win.max + acc.ln(),
            truncation: win.truncation / acc,
        })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.nodes[0], *self.nodes.last().expect("non-empty"))
    }

    fn cell(&self, i: usize) -> Hermite {
        let (t0, t1) = (self.nodes[i], self.nodes[i + 1]);
        let h = t1 - t0;
        let (f0, f1) = (self.cdf[i], self.cdf[i + 1]);
        let delta = f1 - f0;
        let (mut d0, mut d1) = (self.pdf[i] * h, self.pdf[i + 1] * h);
        let linear = !d0.is_finite() || !d1.is_finite() || delta <= 0.0;
        if linear {
            d0 = delta;
            d1 = delta;
        } else {
            // Fritsch–Carlson: keep the cubic monotone
            let (a, b) = (d0 / delta, d1 / delta);
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                d0 *= tau;
                d1 *= tau;
            }
        }
        Hermite {
            t0,
            h,
            f0,
            delta,
            d0,
            d1,
        }
    }

    fn locate(&self, t: f64) -> usize {
        self.nodes
            .partition_point(|&x| x <= t)
            .clamp(1, self.nodes.len() - 1)
            - 1
    }

    /// Interpolated CDF.
    pub fn cdf(&self, t: f64) -> f64 {
        let (lo, hi) = self.support();
        if t <= lo {
            return 0.0;
        }
        if t >= hi {
            return 1.0;
        }
        let c = self.cell(self.locate(t));
        c.eval((t - c.t0) / c.h)
    }

    /// Interpolated inverse CDF for `u ∈ (0,1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let i = self
            .cdf
            .partition_point(|&c| c <= u)
            .clamp(1, self.cdf.len() - 1)
            - 1;
        let c = self.cell(i);
        let (mut a, mut b) = (0.0, 1.0);
        for _ in 0..64 {
            let m = 0.5 * (a + b);
            if m == a || m == b {
                break;
            }
            if c.eval(m) < u {
                a = m;
            } else {
                b = m;
            }
        }
        let t = c.t0 + 0.5 * (a + b) * c.h;
        // draws stay strictly inside the open domain
        let (dlo, dhi) = self.domain.bounds();
        if t <= dlo {
            dlo.next_up()
        } else if t >= dhi {
            dhi.next_down()
        } else {
            t
        }
    }

    /// Draws for replicates `start..start+count` from `stream`.
    pub fn sample(&self, seed: u64, stream: u64, start: u64, count: usize) -> Vec<f64> {
        let mut rng = counter_rng(seed, stream, start);
        (0..count).map(|_| self.quantile(unit_uniform(rng.next_u64()))).collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct Hermite {
    t0: f64,
    h: f64,
    f0: f64,
    delta: f64,
    d0: f64,
    d1: f64,
}

impl Hermite {
    fn eval(&self, u: f64) -> f64 {
        let u2 = u * u;
        let u3 = u2 * u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h10 = u3 - 2.0 * u2 + u;
        let h11 = u3 - u2;
        self.f0 + self.delta * h01 + self.d0 * h10 + self.d1 * h11
    }
}

fn counter_rng(seed: u64, stream: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(2 * replicate as u128);
    rng
}

/// Uniform on (0,1) from the top 53 bits, never exactly 0 or 1.
fn unit_uniform(x: u64) -> f64 {
    ((x >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// `count` i.i.d. draws of one coordinate (stream = its index `j`).
pub fn sample_coordinate(d: &CoordinateDensity, seed: u64, count: usize) -> Result<Vec<f64>> {
    Ok(d.tabulate()?.sample(seed, d.j as u64, 0, count))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub seed: u64,
    pub vectors: Vec<MomentVector>,
    pub canonical: Vec<CanonicalCoordinates>,
}

/// Draws `count` vectors of the leading `k` canonical coordinates and their
/// first `k` moments. These are exactly the leading parts of the full draws
/// produced by [`sample_moment_vector`] with the same seed, but `k` may be
/// far below the order `n`.
pub fn sample_leading(
    dist: &MomentDistribution,
    k: usize,
    seed: u64,
    count: usize,
    transformer: &Transformer,
) -> Result<SampleBatch> {
    let order = dist.order();
    if k == 0 || k > order {
        return Err(MomentError::InvalidParameter(format!(
            "number of coordinates {k} outside 1..={order}"
        )));
    }
    if k > transformer.cap {
        return Err(MomentError::OrderCap {
            order: k,
            cap: transformer.cap,
        });
    }
    let tables: Vec<Tabulation> = (1..=k)
        .into_par_iter()
        .map(|j| dist.coordinate_density(j)?.tabulate())
        .collect::<Result<_>>()?;

    // chunked so each worker advances its generators sequentially
    const CHUNK: usize = 1024;
    let chunks: Vec<(Vec<CanonicalCoordinates>, Vec<MomentVector>)> = (0..count.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let len = CHUNK.min(count - start);
            let columns: Vec<Vec<f64>> = tables
                .iter()
                .enumerate()
                .map(|(i, t)| t.sample(seed, (i + 1) as u64, start as u64, len))
                .collect();
            let mut canon = Vec::with_capacity(len);
            let mut moms = Vec::with_capacity(len);
            for r in 0..len {
                let values: Vec<f64> = columns.iter().map(|col| col[r]).collect();
                let cc = CanonicalCoordinates::new(dist.space, values);
                moms.push(transformer.canonical_to_moments(&cc)?);
                canon.push(cc);
            }
            Ok((canon, moms))
        })
        .collect::<Result<_>>()?;
    let mut canonical = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    for (c, m) in chunks {
        canonical.extend(c);
        vectors.extend(m);
    }
    Ok(SampleBatch {
        seed,
        vectors,
        canonical,
    })
}

/// Full draws: all `order()` canonical coordinates mapped to moment vectors.
pub fn sample_moment_vector(
    dist: &MomentDistribution,
    seed: u64,
    count: usize,
    transformer: &Transformer,
) -> Result<SampleBatch> {
    let order = dist.order();
    if order > transformer.cap {
        return Err(MomentError::OrderCap {
            order,
            cap: transformer.cap,
        });
    }
    sample_leading(dist, order, seed, count, transformer)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalStats {
    pub mean: f64,
    pub variance: f64,
    /// `log ∫ exp(log_unnormalized)`.
    pub log_normalizer: f64,
}

/// Mean, variance and normalizer of a coordinate by direct quadrature.
pub fn exact_marginal_stats(d: &CoordinateDensity) -> Result<MarginalStats> {
    let logf = |t: f64| d.log_unnormalized(t);
    let w = log_window(&logf, d.domain, d.domain.bounds(), TRUNCATION_NATS)?;
    let f = |t: f64| (logf(t) - w.max).exp();
    let q = |g: &dyn Fn(f64) -> f64| integrate(|t| g(t) * f(t), w.lo, w.hi, 64, 0.0, 1e-12).value;
    let z = q(&|_| 1.0);
    if !(z > 0.0) || !z.is_finite() {
        return Err(MomentError::Numeric(format!("normalizer quadrature gave {z}")));
    }
    let mean = q(&|t| t) / z;
    let variance = q(&|t| (t - mean) * (t - mean)) / z;
    Ok(MarginalStats {
        mean,
        variance,
        log_normalizer: w.max + z.ln(),
    })
}
