//! Run configuration: JSON-backed settings for every subcommand, with
//! strict unknown-key rejection and an effective-config emission whose
//! re-run reproduces the same outputs byte for byte.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{GrowthPolicy, Interleaving};
use crate::expr::parse_expression;
use crate::geometry::{AnalyticCurve, Domain, Point2};
use crate::sampling::{BoundaryDensity, InteriorDensity};

/// Fourier coefficient arrays of a closed parametric boundary curve:
/// x(t) = sum x_cos[k] cos(kt) + sum x_sin[k] sin(kt), same for y.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierSpec {
    #[serde(default)]
    pub x_cos: Vec<f64>,
    #[serde(default)]
    pub x_sin: Vec<f64>,
    #[serde(default)]
    pub y_cos: Vec<f64>,
    #[serde(default)]
    pub y_sin: Vec<f64>,
}

/// Domain selection: a built-in name ("disk", "ellipse:a:b", "star3") or
/// explicit Fourier coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainSpec {
    Named(String),
    Fourier(FourierSpec),
}

impl Default for DomainSpec {
    fn default() -> Self {
        DomainSpec::Named("disk".into())
    }
}

impl DomainSpec {
    pub fn build(&self) -> Result<Domain> {
        let curve = match self {
            DomainSpec::Named(name) => build_named_curve(name)?,
            DomainSpec::Fourier(spec) => AnalyticCurve::new(
                spec.x_cos.clone(),
                spec.x_sin.clone(),
                spec.y_cos.clone(),
                spec.y_sin.clone(),
            )?,
        };
        Domain::new(curve)
    }

    pub fn label(&self) -> String {
        match self {
            DomainSpec::Named(name) => name.clone(),
            DomainSpec::Fourier(_) => "fourier".into(),
        }
    }
}

fn build_named_curve(name: &str) -> Result<AnalyticCurve> {
    if name == "disk" {
        return AnalyticCurve::circle(1.0, 0.0, 0.0);
    }
    if name == "star3" {
        return AnalyticCurve::star3();
    }
    if let Some(rest) = name.strip_prefix("ellipse:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 2 {
            return Err(Error::Config(format!(
                "ellipse domain needs two semi-axes as 'ellipse:a:b', got '{name}'"
            )));
        }
        let a: f64 = parts[0]
            .parse()
            .map_err(|_| Error::Config(format!("invalid ellipse semi-axis '{}'", parts[0])))?;
        let b: f64 = parts[1]
            .parse()
            .map_err(|_| Error::Config(format!("invalid ellipse semi-axis '{}'", parts[1])))?;
        if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
            return Err(Error::Config(format!(
                "ellipse semi-axes must be positive and finite, got a={a}, b={b}"
            )));
        }
        return AnalyticCurve::ellipse(a, b);
    }
    Err(Error::Config(format!(
        "unknown domain '{name}' (built-ins: disk, ellipse:a:b, star3)"
    )))
}

/// Reads a domain argument: a built-in name, or a path to a JSON file of
/// Fourier coefficient arrays.
pub fn parse_domain_arg(arg: &str) -> Result<DomainSpec> {
    if arg == "disk" || arg == "star3" || arg.starts_with("ellipse:") {
        return Ok(DomainSpec::Named(arg.to_string()));
    }
    let path = Path::new(arg);
    if path.exists() {
        let text = std::fs::read_to_string(path)?;
        let spec: FourierSpec = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("domain file '{arg}': {e}")))?;
        return Ok(DomainSpec::Fourier(spec));
    }
    Err(Error::Config(format!(
        "unknown domain '{arg}' (built-ins: disk, ellipse:a:b, star3; or a JSON coefficient file)"
    )))
}

/// Density selection: a built-in name ("uniform", "gaussian-bump") or an
/// expression with a certified upper bound. Interior expressions see x, y;
/// boundary expressions see t plus the curve point x, y.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DensitySpec {
    Named(String),
    Expression(ExprDensitySpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExprDensitySpec {
    pub expr: String,
    pub bound: f64,
}

impl Default for DensitySpec {
    fn default() -> Self {
        DensitySpec::Named("uniform".into())
    }
}

impl DensitySpec {
    pub fn build_interior(&self) -> Result<InteriorDensity> {
        match self {
            DensitySpec::Named(name) if name == "uniform" => Ok(InteriorDensity::uniform()),
            DensitySpec::Named(name) if name == "gaussian-bump" => {
                InteriorDensity::gaussian_bump(Point2::new(0.0, 0.0), 0.5)
            }
            DensitySpec::Named(name) => Err(Error::Config(format!(
                "unknown interior density '{name}' (built-ins: uniform, gaussian-bump)"
            ))),
            DensitySpec::Expression(spec) => {
                let ast = parse_expression(&spec.expr)?;
                // probe once so obvious domain errors surface as config
                // errors instead of silent rejection at sampling time
                ast.eval(0.0, 0.0, 0.0)
                    .map_err(|e| Error::Config(format!("interior density: {e}")))?;
                let f = {
                    let ast = ast.clone();
                    move |p: Point2| ast.eval(p.x, p.y, 0.0).unwrap_or(f64::NAN)
                };
                Ok(InteriorDensity::custom(
                    spec.expr.clone(),
                    Arc::new(f),
                    spec.bound,
                ))
            }
        }
    }

    pub fn build_boundary(&self, curve: &AnalyticCurve) -> Result<BoundaryDensity> {
        match self {
            DensitySpec::Named(name) if name == "uniform" => Ok(BoundaryDensity::uniform()),
            DensitySpec::Named(name) => Err(Error::Config(format!(
                "unknown boundary density '{name}' (built-in: uniform, or an expression over t)"
            ))),
            DensitySpec::Expression(spec) => {
                let ast = parse_expression(&spec.expr)?;
                ast.eval(1.0, 0.0, 0.0)
                    .map_err(|e| Error::Config(format!("boundary density: {e}")))?;
                let curve = curve.clone();
                let f = move |t: f64| {
                    let p = curve.eval(t);
                    ast.eval(p.x, p.y, t).unwrap_or(f64::NAN)
                };
                Ok(BoundaryDensity::custom(
                    spec.expr.clone(),
                    Arc::new(f),
                    spec.bound,
                ))
            }
        }
    }
}

/// Point-interleaving rule plus the probability knob used by "random".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthSpec {
    #[serde(default = "default_policy")]
    pub policy: String,
    #[serde(default = "default_p_interior")]
    pub p_interior: f64,
}

fn default_policy() -> String {
    "alternate".into()
}

fn default_p_interior() -> f64 {
    0.5
}

impl Default for GrowthSpec {
    fn default() -> Self {
        GrowthSpec {
            policy: default_policy(),
            p_interior: default_p_interior(),
        }
    }
}

impl GrowthSpec {
    pub fn interleaving(&self) -> Result<Interleaving> {
        match self.policy.as_str() {
            "alternate" => Ok(Interleaving::Alternate),
            "interior-first" => Ok(Interleaving::InteriorFirst),
            "boundary-first" => Ok(Interleaving::BoundaryFirst),
            "random" => {
                if !(0.0..=1.0).contains(&self.p_interior) {
                    return Err(Error::Config(format!(
                        "p_interior must lie in [0, 1], got {}",
                        self.p_interior
                    )));
                }
                Ok(Interleaving::Random {
                    p_interior: self.p_interior,
                })
            }
            other => Err(Error::Config(format!(
                "unknown growth policy '{other}' \
                 (alternate, random, interior-first, boundary-first)"
            ))),
        }
    }

    pub fn growth_policy(&self, n: usize, m: usize) -> Result<GrowthPolicy> {
        Ok(GrowthPolicy {
            target_n: n,
            target_m: m,
            interleaving: self.interleaving()?,
        })
    }
}

fn default_nu() -> u32 {
    2
}

fn default_n() -> usize {
    24
}

fn default_m() -> usize {
    16
}

fn default_seed() -> u64 {
    1
}

fn default_trials() -> u64 {
    100
}

fn default_interior_fraction() -> f64 {
    0.6
}

fn default_grid_resolution() -> usize {
    50
}

fn default_ladder() -> Vec<usize> {
    vec![20, 40, 80, 160]
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// Full settings of one run. Unknown keys are rejected; every knob lands
/// in the emitted effective config, so re-running from that file
/// reproduces the outputs byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default = "default_nu")]
    pub nu: u32,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default)]
    pub growth: GrowthSpec,
    #[serde(default)]
    pub interior_density: DensitySpec,
    #[serde(default)]
    pub boundary_density: DensitySpec,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// manufactured case for solve/convergence: quadratic, harmonic-exp, trig
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    /// source-term expression over x, y (overrides `case` for solve)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    /// boundary-datum expression over x, y, t (required with `f`)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    #[serde(default = "default_ladder")]
    pub ladder: Vec<usize>,
    #[serde(default = "default_interior_fraction")]
    pub interior_fraction: f64,
    #[serde(default = "default_grid_resolution")]
    pub grid_resolution: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config deserializes via defaults")
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config '{}': {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("config '{}': {e}", path.display())))
    }

    /// Range checks shared by every subcommand.
    pub fn validate(&self) -> Result<()> {
        if self.nu < 1 {
            return Err(Error::Config("nu must be at least 1".into()));
        }
        if self.n + self.m < 2 {
            return Err(Error::Config(format!(
                "need at least 2 collocation points, got n + m = {}",
                self.n + self.m
            )));
        }
        if self.trials < 1 {
            return Err(Error::Config("trial count must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.interior_fraction) {
            return Err(Error::Config(format!(
                "interior_fraction must lie in [0, 1], got {}",
                self.interior_fraction
            )));
        }
        if self.grid_resolution < 2 {
            return Err(Error::Config("grid_resolution must be at least 2".into()));
        }
        self.growth.interleaving()?;
        Ok(())
    }

    /// Serializes the fully resolved settings; reading this file back
    /// yields an identical config.
    pub fn to_effective_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("cannot serialize config: {e}")))
    }
}
