//! JSON run configuration. Every section is optional; missing fields take
//! the defaults below.
//!
//! ```json
//! {
//!   "domain":    { "a": -1.0, "b": 1.0, "n": 256 },
//!   "operator":  { "s": 0.5 },
//!   "model":     { "lambda_over_lambda1": 2.0, "K": 0.6, "c": 1.0,
//!                  "eps_over_eps_star": 0.5, "profile": "sine" },
//!   "tolerances": { "solve": 1e-10 },
//!   "sweep": {
//!     "x": { "param": "K", "linspace": [0.35, 1.0, 8] },
//!     "y": { "param": "eps_over_eps_star", "values": [0.1, 0.5, 0.9] }
//!   },
//!   "output":    { "dir": "out" },
//!   "workers":   4
//! }
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use fracsteady::{ProfileKind, Tolerances};
use serde::{Deserialize, Serialize};

/// Malformed configuration or arguments; maps to exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub operator: OperatorConfig,
    pub model: ModelConfig,
    pub tolerances: ToleranceConfig,
    pub sweep: Option<SweepConfig>,
    pub output: OutputConfig,
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self { a: -1.0, b: 1.0, n: 256 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorConfig {
    pub s: f64,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        Self { s: 0.5 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub lambda: Option<f64>,
    pub lambda_over_lambda1: Option<f64>,
    #[serde(rename = "K")]
    pub k: f64,
    pub c: f64,
    pub eps: Option<f64>,
    pub eps_over_eps_star: Option<f64>,
    pub profile: ProfileKind,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            lambda: None,
            lambda_over_lambda1: None,
            k: 0.6,
            c: 1.0,
            eps: None,
            eps_over_eps_star: None,
            profile: ProfileKind::Sine,
        }
    }
}

/// `λ` either absolute or relative to the principal eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Lambda {
    Absolute(f64),
    OverLambda1(f64),
}

/// `ε` either absolute or relative to the threshold `ε*`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Harvest {
    Absolute(f64),
    OverEpsStar(f64),
}

/// Model parameters before `λ₁` and `ε*` are known.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelSpec {
    pub lambda: Lambda,
    pub k: f64,
    pub c: f64,
    pub eps: Harvest,
}

impl ModelConfig {
    pub fn spec(&self) -> anyhow::Result<ModelSpec> {
        let lambda = match (self.lambda, self.lambda_over_lambda1) {
            (Some(_), Some(_)) => return Err(usage("model: give only one of lambda and lambda_over_lambda1")),
            (Some(l), None) => Lambda::Absolute(l),
            (None, Some(r)) => Lambda::OverLambda1(r),
            (None, None) => Lambda::OverLambda1(2.0),
        };
        let eps = match (self.eps, self.eps_over_eps_star) {
            (Some(_), Some(_)) => return Err(usage("model: give only one of eps and eps_over_eps_star")),
            (Some(e), None) => Harvest::Absolute(e),
            (None, Some(r)) => Harvest::OverEpsStar(r),
            (None, None) => Harvest::OverEpsStar(0.5),
        };
        Ok(ModelSpec {
            lambda,
            k: self.k,
            c: self.c,
            eps,
        })
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    pub symmetry: Option<f64>,
    pub linear_residual: Option<f64>,
    pub eigen_rayleigh: Option<f64>,
    pub eigen_residual: Option<f64>,
    pub eigen_max_iter: Option<usize>,
    pub residual_check: Option<f64>,
    pub solve: Option<f64>,
    pub monotone_max_iter: Option<usize>,
    pub newton_max_iter: Option<usize>,
    pub certificate: Option<f64>,
}

impl ToleranceConfig {
    pub fn resolve(&self) -> anyhow::Result<Tolerances> {
        let mut t = Tolerances::default();
        let reals = [
            (self.symmetry, &mut t.symmetry, "symmetry"),
            (self.linear_residual, &mut t.linear_residual, "linear_residual"),
            (self.eigen_rayleigh, &mut t.eigen_rayleigh, "eigen_rayleigh"),
            (self.eigen_residual, &mut t.eigen_residual, "eigen_residual"),
            (self.residual_check, &mut t.residual_check, "residual_check"),
            (self.solve, &mut t.solve, "solve"),
            (self.certificate, &mut t.certificate, "certificate"),
        ];
        for (value, slot, name) in reals {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(usage(format!("tolerances.{name} must be positive, got {v}")));
                }
                *slot = v;
            }
        }
        let caps = [
            (self.eigen_max_iter, &mut t.eigen_max_iter, "eigen_max_iter"),
            (self.monotone_max_iter, &mut t.monotone_max_iter, "monotone_max_iter"),
            (self.newton_max_iter, &mut t.newton_max_iter, "newton_max_iter"),
        ];
        for (value, slot, name) in caps {
            if let Some(v) = value {
                if v == 0 {
                    return Err(usage(format!("tolerances.{name} must be at least 1")));
                }
                *slot = v;
            }
        }
        Ok(t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
pub enum SweepParam {
    #[serde(rename = "lambda")]
    Lambda,
    #[serde(rename = "lambda_over_lambda1")]
    LambdaOverLambda1,
    #[serde(rename = "K")]
    K,
    #[serde(rename = "c")]
    C,
    #[serde(rename = "eps")]
    Eps,
    #[serde(rename = "eps_over_eps_star")]
    EpsOverEpsStar,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            Self::Lambda => "lambda",
            Self::LambdaOverLambda1 => "lambda_over_lambda1",
            Self::K => "K",
            Self::C => "c",
            Self::Eps => "eps",
            Self::EpsOverEpsStar => "eps_over_eps_star",
        }
    }

    /// Parameters that overwrite the same model quantity.
    fn slot(self) -> u8 {
        match self {
            Self::Lambda | Self::LambdaOverLambda1 => 0,
            Self::K => 1,
            Self::C => 2,
            Self::Eps | Self::EpsOverEpsStar => 3,
        }
    }

    pub fn apply(self, spec: &mut ModelSpec, value: f64) {
        match self {
            Self::Lambda => spec.lambda = Lambda::Absolute(value),
            Self::LambdaOverLambda1 => spec.lambda = Lambda::OverLambda1(value),
            Self::K => spec.k = value,
            Self::C => spec.c = value,
            Self::Eps => spec.eps = Harvest::Absolute(value),
            Self::EpsOverEpsStar => spec.eps = Harvest::OverEpsStar(value),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub param: SweepParam,
    #[serde(default)]
    pub linspace: Option<(f64, f64, usize)>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
}

impl AxisConfig {
    pub fn points(&self) -> anyhow::Result<Vec<f64>> {
        let name = self.param.name();
        let pts = match (&self.linspace, &self.values) {
            (Some(_), Some(_)) => return Err(usage(format!("sweep axis {name}: give linspace or values, not both"))),
            (None, None) => return Err(usage(format!("sweep axis {name}: missing linspace or values"))),
            (Some((lo, hi, count)), None) => match count {
                0 => Vec::new(),
                1 => vec![*lo],
                _ => (0..*count)
                    .map(|k| lo + (hi - lo) * k as f64 / (*count - 1) as f64)
                    .collect(),
            },
            (None, Some(v)) => v.clone(),
        };
        if pts.is_empty() {
            return Err(usage(format!("sweep axis {name} is empty")));
        }
        if let Some(bad) = pts.iter().find(|v| !v.is_finite()) {
            return Err(usage(format!("sweep axis {name} has non-finite value {bad}")));
        }
        Ok(pts)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub x: AxisConfig,
    pub y: AxisConfig,
}

impl SweepConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.x.param.slot() == self.y.param.slot() {
            return Err(usage(format!(
                "sweep axes {} and {} set the same parameter",
                self.x.param.name(),
                self.y.param.name()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("fracsteady-out"),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| usage(format!("invalid config: {e}")))?;
        if cfg.workers == Some(0) {
            return Err(usage("workers must be at least 1"));
        }
        cfg.model.spec()?;
        cfg.tolerances.resolve()?;
        if let Some(sweep) = &cfg.sweep {
            sweep.validate()?;
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_takes_defaults() {
        let cfg = RunConfig::parse("{}").unwrap();
        assert_eq!(cfg.domain.n, 256);
        assert_eq!(cfg.operator.s, 0.5);
        let spec = cfg.model.spec().unwrap();
        assert_eq!(spec.lambda, Lambda::OverLambda1(2.0));
        assert_eq!(spec.eps, Harvest::OverEpsStar(0.5));
        assert!(cfg.sweep.is_none());
    }

    #[test]
    fn full_config_parses() {
        let cfg = RunConfig::parse(
            r#"{
              "domain": {"a": 0, "b": 3, "n": 64},
              "operator": {"s": 0.3},
              "model": {"lambda": 4.0, "K": 1.5, "c": 0.5, "eps": 0.01, "profile": {"custom": [1, 2]}},
              "tolerances": {"solve": 1e-9, "monotone_max_iter": 10},
              "sweep": {"x": {"param": "K", "linspace": [0.5, 1.0, 3]}, "y": {"param": "eps", "values": [0.1]}},
              "output": {"dir": "x"},
              "workers": 2
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.model.profile, ProfileKind::Custom(vec![1.0, 2.0]));
        assert_eq!(cfg.tolerances.resolve().unwrap().monotone_max_iter, 10);
        let sweep = cfg.sweep.unwrap();
        assert_eq!(sweep.x.points().unwrap(), vec![0.5, 0.75, 1.0]);
        assert_eq!(sweep.y.param, SweepParam::Eps);
    }

    #[test]
    fn conflicting_and_unknown_keys_are_usage_errors() {
        let both = RunConfig::parse(r#"{"model": {"lambda": 1, "lambda_over_lambda1": 2}}"#);
        assert!(both.unwrap_err().is::<UsageError>());
        assert!(RunConfig::parse(r#"{"modle": {}}"#).unwrap_err().is::<UsageError>());
        assert!(RunConfig::parse(r#"{"workers": 0}"#).unwrap_err().is::<UsageError>());
        assert!(RunConfig::parse(r#"{"tolerances": {"solve": -1}}"#).is_err());
    }

    #[test]
    fn empty_axes_are_rejected() {
        let cfg = RunConfig::parse(
            r#"{"sweep": {"x": {"param": "K", "values": []}, "y": {"param": "c", "linspace": [0, 1, 0]}}}"#,
        )
        .unwrap();
        let sweep = cfg.sweep.unwrap();
        assert!(sweep.x.points().is_err());
        assert!(sweep.y.points().is_err());
    }

    #[test]
    fn axes_must_differ() {
        let cfg = RunConfig::parse(
            r#"{"sweep": {"x": {"param": "eps", "values": [1]}, "y": {"param": "eps_over_eps_star", "values": [1]}}}"#,
        );
        assert!(cfg.unwrap_err().is::<UsageError>());
    }
}
