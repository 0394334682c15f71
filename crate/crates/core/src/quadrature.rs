//! One-dimensional quadrature: adaptive Gauss–Kronrod, Gauss–Legendre rules,
//! and log-space integration of sharply peaked unnormalized densities.

use std::collections::BinaryHeap;

use crate::error::{MomentError, Result};
use crate::potential::CoordDomain;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod estimate and its error estimate on `[a,b]`
/// (the usual Kronrod-vs-Gauss difference, rescaled as in QUADPACK).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut fv = [0.0; 15];
    fv[7] = f(c);
    for i in 0..7 {
        let x = h * XGK[i];
        fv[i] = f(c - x);
        fv[14 - i] = f(c + x);
    }
    let wk = |i: usize| WGK[if i < 8 { i } else { 14 - i }];
    let mut k = 0.0;
    let mut g = fv[7] * WG[3];
    let mut resabs = 0.0;
    for (i, &v) in fv.iter().enumerate() {
        k += wk(i) * v;
        resabs += wk(i) * v.abs();
    }
    for i in (1..7).step_by(2) {
        g += WG[i / 2] * (fv[i] + fv[14 - i]);
    }
    let mean = 0.5 * k;
    let resasc: f64 = fv.iter().enumerate().map(|(i, &v)| wk(i) * (v - mean).abs()).sum();
    let (k, resabs, resasc) = (k * h, resabs * h.abs(), resasc * h.abs());
    let mut err = ((k - g * h) as f64).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (k, err)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.error.total_cmp(&o.error).is_eq()
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Globally adaptive Gauss–Kronrod: starting from `panels` equal panels,
/// repeatedly bisects the panel with the largest error estimate until the
/// total estimate meets `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    panels: usize,
    abs_tol: f64,
    rel_tol: f64,
) -> Integral {
    const MAX_PANELS: usize = 2000;
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut heap: BinaryHeap<Panel> = (0..panels)
        .map(|i| {
            let lo = a + h * i as f64;
            let hi = if i + 1 == panels { b } else { lo + h };
            let (value, error) = gk15(&f, lo, hi);
            Panel { lo, hi, value, error }
        })
        .collect();
    let mut value: f64 = heap.iter().map(|p| p.value).sum();
    let mut error: f64 = heap.iter().map(|p| p.error).sum();
    while error > abs_tol.max(rel_tol * value.abs()) && heap.len() < MAX_PANELS {
        let p = heap.pop().expect("non-empty");
        let mid = 0.5 * (p.lo + p.hi);
        if mid <= p.lo || mid >= p.hi {
            heap.push(p);
            break;
        }
        let (v1, e1) = gk15(&f, p.lo, mid);
        let (v2, e2) = gk15(&f, mid, p.hi);
        value += v1 + v2 - p.value;
        error += e1 + e2 - p.error;
        heap.push(Panel { lo: p.lo, hi: mid, value: v1, error: e1 });
        heap.push(Panel { lo: mid, hi: p.hi, value: v2, error: e2 });
    }
    // re-sum to shed the drift of the running updates
    Integral {
        value: heap.iter().map(|p| p.value).sum(),
        error: heap.iter().map(|p| p.error).sum(),
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// The region where an unnormalized log-density is within `drop` nats of its maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogWindow {
    pub lo: f64,
    pub hi: f64,
    pub mode: f64,
    pub max: f64,
    /// Relative mass estimate lost by cutting the tails at `lo`/`hi`.
    pub truncation: f64,
}

const SCAN_NODES: usize = 4097;

fn scan_limit(domain: CoordDomain) -> f64 {
    match domain {
        // logistic(±36) stays representably inside (0,1)
        CoordDomain::Unit => 36.0,
        CoordDomain::Positive | CoordDomain::Real => 45.0,
    }
}

fn finite_or_neg_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Locates the mode of `logf` on `domain ∩ [clip.0, clip.1]` and the window
/// where it stays within `drop` nats of the maximum.
///
/// The scan runs on a smooth reparametrisation of the domain (logit for
/// `(0,1)`, log for `(0,∞)`, asinh for ℝ), so peaks at any scale and
/// boundary singularities are both found.
pub fn log_window<F: Fn(f64) -> f64>(
    logf: &F,
    domain: CoordDomain,
    clip: (f64, f64),
    drop: f64,
) -> Result<LogWindow> {
    let (dlo, dhi) = domain.bounds();
    let lo_t = clip.0.max(dlo);
    let hi_t = clip.1.min(dhi);
    if lo_t.partial_cmp(&hi_t) != Some(std::cmp::Ordering::Less) {
        return Err(MomentError::InvalidParameter(format!(
            "empty integration range [{lo_t}, {hi_t}]"
        )));
    }
    let lim = scan_limit(domain);
    let s_of = |t: f64, default: f64| {
        if t.is_finite() && domain.contains(t) {
            domain.to_scan(t)
        } else {
            default
        }
    };
    let s_lo = s_of(lo_t, -lim).max(-lim);
    let s_hi = s_of(hi_t, lim).min(lim);
    let g = |s: f64| finite_or_neg_inf(logf(domain.from_scan(s)));

    let ds = (s_hi - s_lo) / (SCAN_NODES - 1) as f64;
    let ss: Vec<f64> = (0..SCAN_NODES).map(|i| s_lo + ds * i as f64).collect();
    let vals: Vec<f64> = ss.iter().map(|&s| g(s)).collect();
    let (imax, &vmax) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("scan non-empty");
    if vmax == f64::NEG_INFINITY {
        return Err(MomentError::Numeric(
            "log-density is -inf everywhere on the scan".into(),
        ));
    }
    if vmax == f64::INFINITY {
        return Err(MomentError::Numeric("log-density is +inf on the scan".into()));
    }

    // golden-section refinement between the neighbours of the best node
    let (mut a, mut b) = (ss[imax.saturating_sub(1)], ss[(imax + 1).min(SCAN_NODES - 1)]);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..100 {
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + phi * (b - a);
            gd = g(d);
        }
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
    }
    let (mut s_mode, mut max) = if gc >= gd { (c, gc) } else { (d, gd) };
    if vmax > max {
        s_mode = ss[imax];
        max = vmax;
    }
    let thresh = max - drop;

    let first = vals.iter().position(|&v| v >= thresh).expect("max exceeds threshold");
    let last = vals.iter().rposition(|&v| v >= thresh).expect("max exceeds threshold");

    // Bisection for the threshold crossing in scan coordinates.
    let cross = |inside: f64, outside: f64| {
        let (mut i, mut o) = (inside, outside);
        for _ in 0..200 {
            let m = 0.5 * (i + o);
            if m == i || m == o {
                break;
            }
            if g(m) >= thresh {
                i = m;
            } else {
                o = m;
            }
        }
        o
    };

    let mut truncation = 0.0;
    let lo = if first == 0 {
        if s_lo > -lim || dlo.is_finite() {
            lo_t
        } else {
            return Err(MomentError::NonNormalizable(
                "log-density does not decay towards -inf".into(),
            ));
        }
    } else {
        let t = domain.from_scan(cross(ss[first], ss[first - 1]));
        truncation += tail_estimate(logf, t, max, -1.0);
        t
    };
    let hi = if last == SCAN_NODES - 1 {
        if s_hi < lim || dhi.is_finite() {
            hi_t
        } else {
            return Err(MomentError::NonNormalizable(
                "log-density does not decay towards +inf".into(),
            ));
        }
    } else {
        let t = domain.from_scan(cross(ss[last], ss[last + 1]));
        truncation += tail_estimate(logf, t, max, 1.0);
        t
    };
    let mode = domain.from_scan(s_mode).clamp(lo, hi);
    Ok(LogWindow {
        lo,
        hi,
        mode,
        max,
        truncation,
    })
}

/// Tail mass beyond `t` (direction `dir`) relative to `e^max`, assuming the
/// log-density keeps decaying at least at its slope at `t`.
fn tail_estimate<F: Fn(f64) -> f64>(logf: &F, t: f64, max: f64, dir: f64) -> f64 {
    let h = 1e-6 * (1.0 + t.abs());
    let slope = dir * (logf(t + dir * h) - logf(t)) / h;
    let level = (logf(t) - max).exp();
    if slope < 0.0 {
        level / -slope
    } else {
        f64::INFINITY
    }
}

/// `log ∫ exp(logf)` over `domain ∩ [clip.0, clip.1]`, with the log-sum-exp
/// shift at the mode.
pub fn log_integral<F: Fn(f64) -> f64>(
    logf: &F,
    domain: CoordDomain,
    clip: (f64, f64),
) -> Result<f64> {
    let w = log_window(logf, domain, clip, 60.0)?;
    let res = integrate(|t| (logf(t) - w.max).exp(), w.lo, w.hi, 64, 0.0, 1e-13);
    if !(res.value > 0.0) || !res.value.is_finite() {
        return Err(MomentError::Numeric(format!(
            "log-space quadrature produced {}",
            res.value
        )));
    }
    Ok(w.max + res.value.ln())
}
