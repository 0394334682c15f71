//! Run configuration: command-line flags, optionally layered over a JSON
//! config file with the same field names.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use moment_space::coords::{Interval, Space};
use moment_space::measures::{LimitMeasure, ScalingMode};
use moment_space::potential::PotentialSpec;
use moment_space::sampling::{MomentDistribution, OrderParity};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceArg {
    Compact,
    Halfline,
    Realline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParityArg {
    Odd,
    Even,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureArg {
    /// free binomial on [a,b] (--a --b --p1 --p2)
    Fb,
    /// Marchenko–Pastur (--z1 --z2)
    Mp,
    /// semicircle (--alpha --beta)
    Sc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Moments,
    Canonical,
    Recursion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lln,
    Clt,
    Mdp,
    Ldp,
    Equilibrium,
    Scaling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    ToMp,
    ToSc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Every setting any command reads. All fields are optional so that flags
/// can override a config file field by field.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Moment space
    #[arg(long, value_enum, help_heading = "Distribution")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceArg>,
    /// Left end of the compact interval (default 0)
    #[arg(long, allow_negative_numbers = true, help_heading = "Distribution")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Right end of the compact interval (default 1)
    #[arg(long, allow_negative_numbers = true, help_heading = "Distribution")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Size parameter n (the moment order; 2n−1 or 2n on the real line)
    #[arg(long, help_heading = "Distribution")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Number of leading moments
    #[arg(long, help_heading = "Distribution")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Field on odd coordinates: "c0,c1,...[;logL=x][;logR=y]"
    #[arg(long, allow_hyphen_values = true, help_heading = "Distribution")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v1: Option<String>,
    /// Field on even coordinates, same syntax as --v1 (defaults to --v1 except on the real line)
    #[arg(long, allow_hyphen_values = true, help_heading = "Distribution")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v2: Option<String>,
    /// Real-line order parity: 2n−1 (odd) or 2n (even) moments
    #[arg(long, value_enum, help_heading = "Distribution")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parity: Option<ParityArg>,
    #[arg(long, help_heading = "Distribution")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Number of replicates (or random points for the mdp suite)
    #[arg(long, help_heading = "Distribution")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,

    /// Limit law
    #[arg(long, value_enum, help_heading = "Measure")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureArg>,
    #[arg(long, help_heading = "Measure")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p1: Option<f64>,
    #[arg(long, help_heading = "Measure")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p2: Option<f64>,
    #[arg(long, help_heading = "Measure")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z1: Option<f64>,
    #[arg(long, help_heading = "Measure")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z2: Option<f64>,
    #[arg(long, allow_negative_numbers = true, help_heading = "Measure")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[arg(long, help_heading = "Measure")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,

    /// Target representation
    #[arg(long, value_enum, help_heading = "Transform")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub to: Option<Representation>,
    /// Input representation (default: canonical, or moments with --to canonical)
    #[arg(long, value_enum, help_heading = "Transform")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub from: Option<Representation>,
    /// Input vector, comma separated
    #[arg(long = "in", allow_hyphen_values = true, help_heading = "Transform")]
    #[serde(rename = "in", skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,

    /// Grid start (default: left end of the support)
    #[arg(long, allow_negative_numbers = true, help_heading = "Density")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    /// Grid end (default: right end of the support)
    #[arg(long, allow_negative_numbers = true, help_heading = "Density")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    /// Grid points (default 201; 0 lists atoms only)
    #[arg(long, help_heading = "Density")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,

    /// Evaluation points "re,im;re,im;..."
    #[arg(long, allow_hyphen_values = true, help_heading = "Stieltjes")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<String>,
    /// Continued-fraction depth (default: closed form for a measure)
    #[arg(long, help_heading = "Stieltjes")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    /// Recursion coefficients α₁,α₂,... instead of a measure
    #[arg(long, allow_hyphen_values = true, help_heading = "Stieltjes")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_coeffs: Option<String>,
    /// Recursion coefficients β₁,β₂,...
    #[arg(long, allow_hyphen_values = true, help_heading = "Stieltjes")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_coeffs: Option<String>,

    #[arg(long, value_enum, help_heading = "Verify")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<Suite>,
    /// LDP threshold: the event {y₁ > c}
    #[arg(long, allow_negative_numbers = true, help_heading = "Verify")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// LDP sizes, comma separated (default: --n)
    #[arg(long, help_heading = "Verify")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<String>,
    /// Equilibrium grid size (default 200)
    #[arg(long, help_heading = "Verify")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
    /// Scaling limit direction
    #[arg(long, value_enum, help_heading = "Verify")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeArg>,
    /// Scales m, comma separated (default 100,10000,1000000)
    #[arg(long, help_heading = "Verify")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_values: Option<String>,

    /// Write here instead of stdout
    #[arg(long, help_heading = "Output")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, help_heading = "Output")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),*) => {
        RunConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("malformed config {}: {e}", path.display())))
    }

    /// `self` with every unset field taken from `base`.
    pub fn over(self, base: RunConfig) -> RunConfig {
        overlay!(
            base, self, space, a, b, n, k, v1, v2, parity, seed, count, measure, p1, p2, z1, z2, alpha, beta,
            to, from, input, lo, hi, points, z, depth, alpha_coeffs, beta_coeffs, suite, c, n_grid, grid_size,
            mode, m_values, output, format
        )
    }

    /// Names of the fields that are set.
    pub fn set_fields(&self) -> Vec<String> {
        match serde_json::to_value(self) {
            Ok(serde_json::Value::Object(map)) => map.keys().cloned().collect(),
            _ => Vec::new(),
        }
    }

    /// Rejects settings the command does not read.
    pub fn only(&self, command: &str, allowed: &[&str]) -> Result<(), CliError> {
        let stray: Vec<String> = self
            .set_fields()
            .into_iter()
            .filter(|f| !allowed.contains(&f.as_str()) && f != "output" && f != "format")
            .collect();
        if stray.is_empty() {
            Ok(())
        } else {
            Err(CliError::Usage(format!("{command} does not take: {}", stray.join(", "))))
        }
    }

    pub fn space(&self) -> Result<Space, CliError> {
        match self.space {
            None => Err(CliError::Usage("--space is required".into())),
            Some(SpaceArg::Compact) => {
                Ok(Space::Compact(Interval::new(self.a.unwrap_or(0.0), self.b.unwrap_or(1.0))?))
            }
            Some(SpaceArg::Halfline) => Ok(Space::HalfLine),
            Some(SpaceArg::Realline) => Ok(Space::RealLine),
        }
    }

    pub fn potentials(&self) -> Result<(PotentialSpec, PotentialSpec), CliError> {
        let parse = |flag: &str, s: &Option<String>| -> Result<PotentialSpec, CliError> {
            s.as_deref()
                .unwrap_or("0")
                .parse()
                .map_err(|e| CliError::Usage(format!("--{flag}: {e}")))
        };
        let v1 = parse("v1", &self.v1)?;
        // one field for both parities unless told otherwise; on the real line
        // V₂ lives on a different domain, so it has its own default
        let v2 = match (&self.v2, self.space) {
            (None, Some(SpaceArg::Compact | SpaceArg::Halfline)) => v1.clone(),
            _ => parse("v2", &self.v2)?,
        };
        Ok((v1, v2))
    }

    pub fn distribution(&self) -> Result<MomentDistribution, CliError> {
        let n = self.n.ok_or_else(|| CliError::Usage("--n is required".into()))?;
        let (v1, v2) = self.potentials()?;
        let parity = match self.parity {
            Some(ParityArg::Even) => OrderParity::Even,
            _ => OrderParity::Odd,
        };
        Ok(MomentDistribution::new(self.space()?, n, v1, v2)?.with_parity(parity))
    }

    pub fn measure(&self) -> Result<LimitMeasure, CliError> {
        let need = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| CliError::Usage(format!("--{flag} is required for this measure")))
        };
        Ok(match self.measure {
            None => return Err(CliError::Usage("--measure is required".into())),
            Some(MeasureArg::Fb) => LimitMeasure::free_binomial(
                Interval::new(self.a.unwrap_or(0.0), self.b.unwrap_or(1.0))?,
                need(self.p1, "p1")?,
                need(self.p2, "p2")?,
            )?,
            Some(MeasureArg::Mp) => LimitMeasure::marchenko_pastur(need(self.z1, "z1")?, need(self.z2, "z2")?)?,
            Some(MeasureArg::Sc) => LimitMeasure::semicircle(need(self.alpha, "alpha")?, need(self.beta, "beta")?)?,
        })
    }

    pub fn scaling_mode(&self) -> Result<ScalingMode, CliError> {
        match self.mode {
            Some(ModeArg::ToMp) => Ok(ScalingMode::ToMP),
            Some(ModeArg::ToSc) => Ok(ScalingMode::ToSC),
            None => Err(CliError::Usage("--mode is required for the scaling suite".into())),
        }
    }
}

/// Comma-separated finite reals.
pub fn parse_list(flag: &str, s: &str) -> Result<Vec<f64>, CliError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| match t.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(CliError::Usage(format!("--{flag}: {t:?} is not a finite number"))),
        })
        .collect()
}

/// `"re,im;re,im"` → points.
pub fn parse_points(s: &str) -> Result<Vec<(f64, f64)>, CliError> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| match parse_list("z", p)?.as_slice() {
            [re, im] => Ok((*re, *im)),
            _ => Err(CliError::Usage(format!("--z: {p:?} is not \"re,im\""))),
        })
        .collect()
}
