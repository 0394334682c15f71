use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use moment_space::asymptotics::{
    run_clt_experiment, run_ldp_check, run_lln_experiment, run_mdp_check, Criterion, MDP_TOLERANCE,
};
use moment_space::coords::{CanonicalCoordinates, MomentVector, RecursionCoefficients, Transformer, DEFAULT_ORDER_CAP};
use moment_space::measures::{scaling_limit_check, verify_equilibrium, LimitMeasure, ScalingMode};
use moment_space::sampling::sample_leading;
use moment_space::stieltjes::{cf_convergent, closed_form_transform, UpperHalfPlanePoint};

use crate::config::{parse_list, parse_points, Format, Representation, RunConfig, Suite};
use crate::output::{emit, join, json};
use crate::CliError;

const DISTRIBUTION: &[&str] = &["space", "a", "b", "n", "k", "v1", "v2", "parity", "seed", "count"];
const MEASURE: &[&str] = &["measure", "a", "b", "p1", "p2", "z1", "z2", "alpha", "beta"];

fn allowed(groups: &[&[&'static str]]) -> Vec<&'static str> {
    groups.iter().flat_map(|g| g.iter().copied()).collect()
}

fn format(cfg: &RunConfig) -> Format {
    cfg.format.unwrap_or(Format::Csv)
}

/// `"α₁,α₂;β₁"` → recursion coefficients.
fn parse_recursion(s: &str) -> Result<RecursionCoefficients, CliError> {
    let (a, b) = s.split_once(';').unwrap_or((s, ""));
    Ok(RecursionCoefficients::new(parse_list("in", a)?, parse_list("in", b)?)?)
}

pub fn transform(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.only("transform", &["space", "a", "b", "to", "from", "in"])?;
    let space = cfg.space()?;
    let to = cfg.to.ok_or_else(|| CliError::Usage("--to is required".into()))?;
    let from = cfg.from.unwrap_or(match to {
        Representation::Canonical => Representation::Moments,
        _ => Representation::Canonical,
    });
    if from == to {
        return Err(CliError::Usage(format!("--from and --to are both {from:?}")));
    }
    let input = cfg
        .input
        .as_deref()
        .ok_or_else(|| CliError::Usage("--in is required".into()))?;
    let tr = Transformer::default();
    let rc = match from {
        Representation::Canonical => tr.canonical_to_recursion(&CanonicalCoordinates::new(space, parse_list("in", input)?))?,
        Representation::Moments => tr.moments_to_recursion(&MomentVector::new(space, parse_list("in", input)?))?,
        Representation::Recursion => parse_recursion(input)?,
    };
    let values = match to {
        Representation::Moments => match from {
            Representation::Canonical => {
                tr.canonical_to_moments(&CanonicalCoordinates::new(space, parse_list("in", input)?))?.values
            }
            _ => tr.recursion_to_moments(&rc, rc.determined_moments())?,
        },
        Representation::Canonical => match from {
            Representation::Moments => tr.moments_to_canonical(&MomentVector::new(space, parse_list("in", input)?))?.values,
            _ => tr.recursion_to_canonical(space, &rc)?.values,
        },
        Representation::Recursion => Vec::new(),
    };
    let text = match (format(cfg), to) {
        (Format::Csv, Representation::Recursion) => format!("{};{}\n", join(&rc.alpha), join(&rc.beta)),
        (Format::Csv, _) => format!("{}\n", join(&values)),
        (Format::Json, Representation::Recursion) => json(&json!({ "alpha": rc.alpha, "beta": rc.beta }))?,
        (Format::Json, _) => json(&json!({ "space": space, "representation": to, "values": values }))?,
    };
    emit(cfg.output.as_deref(), &text)
}

pub fn sample(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.only("sample", DISTRIBUTION)?;
    let dist = cfg.distribution()?;
    let count = cfg.count.ok_or_else(|| CliError::Usage("--count is required".into()))?;
    let k = cfg.k.unwrap_or(dist.order().min(DEFAULT_ORDER_CAP));
    let seed = cfg.seed.unwrap_or(0);
    let batch = sample_leading(&dist, k, seed, count, &Transformer::default())?;
    let text = match format(cfg) {
        Format::Csv => {
            let mut s = String::from("rep");
            for j in 1..=k {
                s.push_str(&format!(",m{j}"));
            }
            s.push('\n');
            for (r, m) in batch.vectors.iter().enumerate() {
                s.push_str(&format!("{r},{}\n", join(&m.values)));
            }
            s
        }
        Format::Json => {
            let rows: Vec<_> = batch
                .vectors
                .iter()
                .enumerate()
                .map(|(r, m)| json!({ "rep": r, "moments": m.values }))
                .collect();
            json(&json!({ "seed": seed, "k": k, "rows": rows }))?
        }
    };
    emit(cfg.output.as_deref(), &text)
}

pub fn density(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.only("density", &allowed(&[MEASURE, &["lo", "hi", "points"]]))?;
    let mu = cfg.measure()?;
    let (lm, lp) = mu.support();
    let (lo, hi) = (cfg.lo.unwrap_or(lm), cfg.hi.unwrap_or(lp));
    let points = cfg.points.unwrap_or(201);
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(CliError::Usage(format!("bad grid [{lo}, {hi}]")));
    }
    let grid: Vec<(f64, f64)> = (0..points)
        .map(|i| {
            let x = if points == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (points - 1) as f64
            };
            (x, mu.density(x))
        })
        .collect();
    let atoms = mu.atoms();
    let text = match format(cfg) {
        Format::Csv => {
            let mut s = String::from("kind,x,value\n");
            for (x, d) in &grid {
                s.push_str(&format!("density,{}\n", join(&[*x, *d])));
            }
            for a in &atoms {
                s.push_str(&format!("atom,{}\n", join(&[a.location, a.weight])));
            }
            s
        }
        Format::Json => json(&json!({ "measure": mu, "density": grid, "atoms": atoms }))?,
    };
    emit(cfg.output.as_deref(), &text)
}

pub fn stieltjes(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.only("stieltjes", &allowed(&[MEASURE, &["z", "depth", "alpha_coeffs", "beta_coeffs"]]))?;
    let points = parse_points(cfg.z.as_deref().ok_or_else(|| CliError::Usage("--z is required".into()))?)?;
    let eval: Box<dyn Fn(f64, f64) -> Result<Complex64, CliError>> = match (&cfg.alpha_coeffs, cfg.measure) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage("give either --measure or --alpha-coeffs, not both".into()));
        }
        (Some(a), None) => {
            let rc = RecursionCoefficients::new(
                parse_list("alpha-coeffs", a)?,
                parse_list("beta-coeffs", cfg.beta_coeffs.as_deref().unwrap_or(""))?,
            )?;
            let depth = cfg.depth.unwrap_or(rc.alpha.len());
            Box::new(move |re, im| Ok(cf_convergent(&rc, depth, UpperHalfPlanePoint::new(re, im)?)?))
        }
        (None, _) => {
            if cfg.beta_coeffs.is_some() {
                return Err(CliError::Usage("--beta-coeffs needs --alpha-coeffs".into()));
            }
            let mu = cfg.measure()?;
            match cfg.depth {
                Some(depth) => {
                    let rc = mu.recursion(depth);
                    Box::new(move |re, im| Ok(cf_convergent(&rc, depth, UpperHalfPlanePoint::new(re, im)?)?))
                }
                None => Box::new(move |re, im| Ok(closed_form_transform(&mu, Complex64::new(re, im))?)),
            }
        }
    };
    let rows = points
        .iter()
        .map(|&(re, im)| Ok([re, im, eval(re, im)?.re, eval(re, im)?.im]))
        .collect::<Result<Vec<[f64; 4]>, CliError>>()?;
    let text = match format(cfg) {
        Format::Csv => {
            let mut s = String::from("re_z,im_z,re_phi,im_phi\n");
            for r in &rows {
                s.push_str(&join(r));
                s.push('\n');
            }
            s
        }
        Format::Json => json(&rows)?,
    };
    emit(cfg.output.as_deref(), &text)
}

#[derive(Debug, Serialize)]
struct Summary {
    suite: Suite,
    /// `null` when the run was too small to judge.
    passed: Option<bool>,
    criteria: Vec<Criterion>,
}

#[derive(Debug, Serialize)]
struct ReportEnvelope<'a, R: Serialize> {
    tool_version: &'static str,
    config: &'a RunConfig,
    results: R,
    summary: Summary,
    wall_clock_seconds: f64,
}

fn judged(criteria: &[Criterion]) -> Option<bool> {
    Some(criteria.iter().all(|c| c.passed))
}

/// `passed` iff `value ≤ threshold`.
fn at_most(name: &str, value: f64, threshold: f64) -> Criterion {
    Criterion {
        name: name.into(),
        value,
        threshold,
        passed: value <= threshold,
    }
}

pub fn verify(cfg: &RunConfig) -> Result<(), CliError> {
    let start = Instant::now();
    let suite = cfg.suite.ok_or_else(|| CliError::Usage("--suite is required".into()))?;
    if cfg.format == Some(Format::Csv) {
        return Err(CliError::Usage("verify reports are JSON only".into()));
    }
    let tr = Transformer::default();
    let seed = cfg.seed.unwrap_or(0);
    let (results, passed, criteria) = match suite {
        Suite::Lln | Suite::Clt => {
            cfg.only("verify", &allowed(&[DISTRIBUTION, &["suite"]]))?;
            let dist = cfg.distribution()?;
            let (count, k) = (cfg.count.unwrap_or(1000), cfg.k.unwrap_or(3));
            let report = if suite == Suite::Lln {
                run_lln_experiment(&dist, count, k, seed, &tr)?
            } else {
                run_clt_experiment(&dist, count, k, seed, &tr)?
            };
            let criteria = report.criteria.clone();
            (serde_json::to_value(&report), report.passed, criteria)
        }
        Suite::Mdp => {
            cfg.only("verify", &["suite", "space", "a", "b", "v1", "v2", "k", "count", "seed"])?;
            let (v1, v2) = cfg.potentials()?;
            let check = run_mdp_check(cfg.space()?, &v1, &v2, cfg.k.unwrap_or(3), cfg.count.unwrap_or(100), seed)?;
            let criteria = vec![Criterion::below(
                "max relative error of mdp rate vs CLT quadratic form",
                check.max_relative_error,
                MDP_TOLERANCE,
            )];
            (serde_json::to_value(&check), judged(&criteria), criteria)
        }
        Suite::Ldp => {
            cfg.only("verify", &["suite", "space", "a", "b", "v1", "v2", "n", "n_grid", "c"])?;
            let (v1, v2) = cfg.potentials()?;
            let c = cfg.c.ok_or_else(|| CliError::Usage("--c is required for the ldp suite".into()))?;
            let n_grid: Vec<usize> = match (&cfg.n_grid, cfg.n) {
                (Some(g), _) => g
                    .split(',')
                    .map(|t| t.trim().parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| CliError::Usage(format!("--n-grid: {g:?} is not a list of sizes")))?,
                (None, Some(n)) => vec![n],
                (None, None) => return Err(CliError::Usage("the ldp suite needs --n or --n-grid".into())),
            };
            let check = run_ldp_check(cfg.space()?, &v1, &v2, c, &n_grid)?;
            let mut criteria = vec![Criterion::below(
                "|exponent - target| at the largest n",
                check.error_at_largest_n,
                moment_space::asymptotics::LDP_TOLERANCE,
            )];
            if n_grid.len() > 1 {
                criteria.push(Criterion {
                    name: "error non-increasing along n_grid".into(),
                    value: if check.monotone { 1.0 } else { 0.0 },
                    threshold: 1.0,
                    passed: check.monotone,
                });
            }
            (serde_json::to_value(&check), judged(&criteria), criteria)
        }
        Suite::Equilibrium => {
            cfg.only("verify", &allowed(&[MEASURE, &["suite", "grid_size"]]))?;
            let report = verify_equilibrium(&cfg.measure()?, cfg.grid_size.unwrap_or(200))?;
            let criteria = vec![
                Criterion::below("constancy spread on the support", report.constancy_spread, 1e-4),
                at_most("exterior inequality violation", report.exterior_violation, 1e-6),
            ];
            (serde_json::to_value(&report), judged(&criteria), criteria)
        }
        Suite::Scaling => {
            cfg.only("verify", &allowed(&[MEASURE, &["suite", "mode", "m_values", "k"]]))?;
            let mode = cfg.scaling_mode()?;
            let target = match (cfg.measure, mode) {
                (Some(_), _) => cfg.measure()?,
                (None, ScalingMode::ToMP) => LimitMeasure::marchenko_pastur(1.0, 1.0)?,
                (None, ScalingMode::ToSC) => LimitMeasure::semicircle(0.0, 1.0)?,
            };
            let m_values = match &cfg.m_values {
                Some(s) => parse_list("m-values", s)?,
                None => vec![1e2, 1e4, 1e6],
            };
            let report = scaling_limit_check(mode, &target, &m_values, cfg.k.unwrap_or(4), &tr)?;
            let (first, last) = (&report.rows[0], report.rows.last().expect("non-empty"));
            let moment_error = last.moment_errors.iter().cloned().fold(0.0, f64::max);
            let mut criteria = vec![
                Criterion::below("sup density error at the largest m", last.sup_density_error, 1e-2),
                Criterion::below("max moment error at the largest m", moment_error, 1e-3),
            ];
            if report.rows.len() > 1 {
                criteria.insert(
                    0,
                    Criterion::below(
                        "density error ratio, largest m / smallest m",
                        last.sup_density_error / first.sup_density_error,
                        1.0,
                    ),
                );
            }
            (serde_json::to_value(&report), judged(&criteria), criteria)
        }
    };
    let results = results.map_err(|e| CliError::Io(format!("cannot serialize results: {e}")))?;
    let envelope = ReportEnvelope {
        tool_version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        results,
        summary: Summary {
            suite,
            passed,
            criteria,
        },
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    emit(cfg.output.as_deref(), &json(&envelope)?)?;
    match passed {
        Some(true) => Ok(()),
        // an unjudged run is not a pass
        _ => Err(CliError::Failed),
    }
}
