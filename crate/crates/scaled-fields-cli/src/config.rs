//! JSON run configuration and its translation into library objects.
//!
//! Everything structural lives in the config file; flags only select the
//! command and override paths, cell counts, and the sampling seed. Errors
//! raised while building objects from a config are configuration errors
//! (exit 2); errors raised later while computing are numeric errors (exit 1).

use std::path::PathBuf;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Deserialize;

use scaled_fields::{
    ChartFamily, Error, FieldOnChart, GaugeLink, QuadRule, QuadratureSpec, TaggedCoordinate,
    ThetaField, UniverseTag, VectorFieldOnChart,
};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: usize,
    #[serde(default)]
    pub chart: Option<ChartConfig>,
    #[serde(default)]
    pub theta: Option<ThetaConfig>,
    #[serde(default)]
    pub field: Option<FieldConfig>,
    #[serde(default)]
    pub quadrature: Option<QuadConfig>,
    /// Chart coordinates of the reference universe point.
    #[serde(default)]
    pub reference: Option<Vec<f64>>,
    /// Per-cell CSV dump path for `integrate`.
    #[serde(default)]
    pub grid_dump: Option<PathBuf>,
    #[serde(default)]
    pub derivative: Option<DerivativeConfig>,
    #[serde(default)]
    pub du_check: Option<DuCheckConfig>,
    #[serde(default)]
    pub cosmo: Option<CosmoConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChartConfig {
    Identity,
    /// Row-major `dimension x dimension` matrix.
    Affine { matrix: Vec<f64>, offset: Vec<f64> },
    TanhWarp { scale: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum ThetaConfig {
    Constant {
        value: f64,
        #[serde(default)]
        offset: f64,
    },
    Linear {
        coeffs: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    GaussianBump {
        center: Vec<f64>,
        width: f64,
        height: f64,
        #[serde(default)]
        offset: f64,
    },
    Inflation {
        t0: f64,
        rate: f64,
        plateau: f64,
        #[serde(default)]
        offset: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldConfig {
    Const { value: f64 },
    Linear { coeffs: Vec<f64> },
    /// `exp(rate . u)`.
    Exp { rate: Vec<f64> },
    /// `exp(-|u - center|^2 / width^2)`.
    Gaussian { center: Vec<f64>, width: f64 },
    /// One-dimensional `sum c_k u^k`.
    Polynomial { coeffs: Vec<f64> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadConfig {
    pub bounds: Vec<(f64, f64)>,
    pub cells: CellsConfig,
    pub rule: RuleConfig,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_tolerance() -> f64 {
    1e-10
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum CellsConfig {
    Same(usize),
    PerAxis(Vec<usize>),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleConfig {
    Midpoint,
    Trapezoid,
    Simpson,
}

impl From<RuleConfig> for QuadRule {
    fn from(r: RuleConfig) -> Self {
        match r {
            RuleConfig::Midpoint => QuadRule::Midpoint,
            RuleConfig::Trapezoid => QuadRule::Trapezoid,
            RuleConfig::Simpson => QuadRule::Simpson,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LinkConfig {
    Identity,
    /// Constant phase coefficient per axis: `alpha_mu(u) = alpha[mu]`.
    U1 { alpha: Vec<f64> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivativeConfig {
    pub at: Vec<f64>,
    pub axis: usize,
    pub step: f64,
    #[serde(default)]
    pub link: Option<LinkConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DuCheckConfig {
    pub at: Vec<f64>,
    pub axis: usize,
    /// Largest step; successively halved.
    pub start: f64,
    pub halvings: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosmoConfig {
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
    #[serde(default)]
    pub spacing: SpacingConfig,
    /// Reference age: factors are relative to this time.
    pub t_present: f64,
    #[serde(default = "default_ds2")]
    pub ds2: f64,
}

fn default_ds2() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpacingConfig {
    #[default]
    Linear,
    Log,
}

/// Configuration-stage failure; rendered with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn bad(e: Error) -> ConfigError {
    ConfigError(e.to_string())
}

type FieldFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| ConfigError(format!("config parse: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let d = self.dimension;
        if d == 0 || d > scaled_fields::MAX_DIM {
            return Err(ConfigError(format!(
                "dimension {d} outside 1..={}",
                scaled_fields::MAX_DIM
            )));
        }
        if let Some(reference) = &self.reference {
            if reference.len() != d {
                return Err(ConfigError(format!(
                    "reference has {} coordinates, dimension is {d}",
                    reference.len()
                )));
            }
        }
        if let Some(q) = &self.quadrature {
            if q.bounds.len() != d {
                return Err(ConfigError(format!(
                    "quadrature has {} axes, dimension is {d}",
                    q.bounds.len()
                )));
            }
        }
        Ok(())
    }

    /// The universe point all structures of a run are tagged with.
    pub fn universe_tag(&self) -> Result<UniverseTag, ConfigError> {
        UniverseTag::at(&vec![0.0; self.dimension]).map_err(bad)
    }

    pub fn build_chart(&self) -> Result<ChartFamily, ConfigError> {
        let d = self.dimension;
        match &self.chart {
            None | Some(ChartConfig::Identity) => ChartFamily::identity(d).map_err(bad),
            Some(ChartConfig::Affine { matrix, offset }) => {
                if matrix.len() != d * d || offset.len() != d {
                    return Err(ConfigError(format!(
                        "affine chart needs a {d}x{d} matrix and offset of length {d}"
                    )));
                }
                ChartFamily::affine(matrix, offset).map_err(bad)
            }
            Some(ChartConfig::TanhWarp { scale }) => ChartFamily::tanh_warp(d, *scale).map_err(bad),
        }
    }

    pub fn build_theta(&self) -> Result<ThetaField, ConfigError> {
        let d = self.dimension;
        let config = self
            .theta
            .as_ref()
            .ok_or_else(|| ConfigError("this command needs a theta block".into()))?;
        let (theta, offset) = match config {
            ThetaConfig::Constant { value, offset } => {
                (ThetaField::constant(*value).map_err(bad)?, offset)
            }
            ThetaConfig::Linear { coeffs, offset } => {
                if coeffs.len() != d {
                    return Err(ConfigError(format!(
                        "linear theta has {} coefficients, dimension is {d}",
                        coeffs.len()
                    )));
                }
                (ThetaField::linear(coeffs).map_err(bad)?, offset)
            }
            ThetaConfig::GaussianBump {
                center,
                width,
                height,
                offset,
            } => {
                if center.len() != d {
                    return Err(ConfigError(format!(
                        "gaussian bump center has dimension {}, expected {d}",
                        center.len()
                    )));
                }
                (
                    ThetaField::gaussian_bump(center, *width, *height).map_err(bad)?,
                    offset,
                )
            }
            ThetaConfig::Inflation {
                t0,
                rate,
                plateau,
                offset,
            } => (
                ThetaField::inflation(*t0, *rate, *plateau).map_err(bad)?,
                offset,
            ),
        };
        theta.with_offset(*offset).map_err(bad)
    }

    fn build_field_fn(&self) -> Result<FieldFn, ConfigError> {
        let d = self.dimension;
        let check_len = |len: usize, what: &str| -> Result<(), ConfigError> {
            if len != d {
                return Err(ConfigError(format!(
                    "{what} has {len} coefficients, dimension is {d}"
                )));
            }
            Ok(())
        };
        match self.field.as_ref().unwrap_or(&FieldConfig::Const { value: 1.0 }) {
            FieldConfig::Const { value } => {
                let v = *value;
                Ok(Arc::new(move |_: &[f64]| v))
            }
            FieldConfig::Linear { coeffs } => {
                check_len(coeffs.len(), "linear field")?;
                let c = coeffs.clone();
                Ok(Arc::new(move |u: &[f64]| {
                    c.iter().zip(u).map(|(a, x)| a * x).sum()
                }))
            }
            FieldConfig::Exp { rate } => {
                check_len(rate.len(), "exp field")?;
                let c = rate.clone();
                Ok(Arc::new(move |u: &[f64]| {
                    c.iter().zip(u).map(|(a, x)| a * x).sum::<f64>().exp()
                }))
            }
            FieldConfig::Gaussian { center, width } => {
                check_len(center.len(), "gaussian field")?;
                if !width.is_finite() || *width <= 0.0 {
                    return Err(ConfigError(format!(
                        "gaussian field needs width > 0, got {width}"
                    )));
                }
                let c = center.clone();
                let w2 = width * width;
                Ok(Arc::new(move |u: &[f64]| {
                    let d2: f64 = c.iter().zip(u).map(|(a, x)| (x - a) * (x - a)).sum();
                    (-d2 / w2).exp()
                }))
            }
            FieldConfig::Polynomial { coeffs } => {
                if d != 1 {
                    return Err(ConfigError(format!(
                        "polynomial fields are one-dimensional, dimension is {d}"
                    )));
                }
                if coeffs.is_empty() {
                    return Err(ConfigError("polynomial field needs coefficients".into()));
                }
                let c = coeffs.clone();
                Ok(Arc::new(move |u: &[f64]| {
                    c.iter().rev().fold(0.0, |acc, k| acc * u[0] + k)
                }))
            }
        }
    }

    /// The configured scalar field (default: identically 1).
    pub fn build_field(&self, tag: &UniverseTag) -> Result<FieldOnChart, ConfigError> {
        let f = self.build_field_fn()?;
        Ok(FieldOnChart::new(tag.clone(), move |u| {
            Complex64::new(f(u), 0.0)
        }))
    }

    /// The configured field as a one-component section for derivatives.
    pub fn build_section(&self, tag: &UniverseTag) -> Result<VectorFieldOnChart, ConfigError> {
        let f = self.build_field_fn()?;
        VectorFieldOnChart::new(tag.clone(), 1, move |u| vec![Complex64::new(f(u), 0.0)])
            .map_err(bad)
    }

    pub fn build_quadrature(
        &self,
        cells_override: Option<usize>,
    ) -> Result<QuadratureSpec, ConfigError> {
        let q = self
            .quadrature
            .as_ref()
            .ok_or_else(|| ConfigError("this command needs a quadrature block".into()))?;
        let cells = match (&q.cells, cells_override) {
            (_, Some(n)) => vec![n; q.bounds.len()],
            (CellsConfig::Same(n), None) => vec![*n; q.bounds.len()],
            (CellsConfig::PerAxis(v), None) => v.clone(),
        };
        QuadratureSpec::new(&q.bounds, &cells, q.rule.into(), q.tolerance).map_err(bad)
    }

    pub fn build_reference(&self, tag: &UniverseTag) -> Result<TaggedCoordinate, ConfigError> {
        let reference = self
            .reference
            .as_ref()
            .ok_or_else(|| ConfigError("this command needs a reference coordinate".into()))?;
        TaggedCoordinate::new(tag.clone(), reference.clone()).map_err(bad)
    }

    pub fn build_derivative(&self) -> Result<(&DerivativeConfig, GaugeLink), ConfigError> {
        let d = self.dimension;
        let config = self
            .derivative
            .as_ref()
            .ok_or_else(|| ConfigError("this command needs a derivative block".into()))?;
        if config.at.len() != d {
            return Err(ConfigError(format!(
                "derivative point has dimension {}, expected {d}",
                config.at.len()
            )));
        }
        if config.axis >= d {
            return Err(ConfigError(format!(
                "derivative axis {} out of range for dimension {d}",
                config.axis
            )));
        }
        if !config.step.is_finite() || config.step <= 0.0 {
            return Err(ConfigError(format!(
                "derivative step must be positive, got {}",
                config.step
            )));
        }
        let link = match &config.link {
            None | Some(LinkConfig::Identity) => GaugeLink::identity(),
            Some(LinkConfig::U1 { alpha }) => {
                if alpha.len() != d {
                    return Err(ConfigError(format!(
                        "u1 link has {} coefficients, dimension is {d}",
                        alpha.len()
                    )));
                }
                let a = alpha.clone();
                GaugeLink::u1(move |_: &[f64], mu: usize| a[mu])
            }
        };
        Ok((config, link))
    }

    pub fn build_du_check(&self) -> Result<(&DuCheckConfig, Vec<f64>), ConfigError> {
        let d = self.dimension;
        let config = self
            .du_check
            .as_ref()
            .ok_or_else(|| ConfigError("this command needs a du_check block".into()))?;
        if config.at.len() != d {
            return Err(ConfigError(format!(
                "du_check point has dimension {}, expected {d}",
                config.at.len()
            )));
        }
        if config.axis >= d {
            return Err(ConfigError(format!(
                "du_check axis {} out of range for dimension {d}",
                config.axis
            )));
        }
        if !config.start.is_finite() || config.start <= 0.0 {
            return Err(ConfigError(format!(
                "du_check start step must be positive, got {}",
                config.start
            )));
        }
        if config.halvings < 2 {
            return Err(ConfigError("du_check needs at least 2 halvings".into()));
        }
        let steps: Vec<f64> = (0..config.halvings)
            .map(|k| config.start / 2f64.powi(k as i32))
            .collect();
        Ok((config, steps))
    }

    /// Cosmology time grid: the grid itself may contain invalid times; those
    /// surface later as numeric domain errors, not config errors.
    pub fn build_cosmo(&self) -> Result<(&CosmoConfig, Vec<f64>), ConfigError> {
        if self.dimension != 1 {
            return Err(ConfigError(format!(
                "cosmo runs on a one-dimensional time grid, dimension is {}",
                self.dimension
            )));
        }
        let config = self
            .cosmo
            .as_ref()
            .ok_or_else(|| ConfigError("this command needs a cosmo block".into()))?;
        if !config.t_start.is_finite() || !config.t_end.is_finite() || config.t_end <= config.t_start
        {
            return Err(ConfigError(format!(
                "cosmo needs t_start < t_end, got [{}, {}]",
                config.t_start, config.t_end
            )));
        }
        if config.steps == 0 {
            return Err(ConfigError("cosmo needs steps >= 1".into()));
        }
        if matches!(config.spacing, SpacingConfig::Log) && config.t_start <= 0.0 {
            return Err(ConfigError(format!(
                "log spacing needs t_start > 0, got {}",
                config.t_start
            )));
        }
        if !config.ds2.is_finite() || config.ds2 <= 0.0 {
            return Err(ConfigError(format!(
                "cosmo ds2 must be positive, got {}",
                config.ds2
            )));
        }
        let n = config.steps;
        let grid: Vec<f64> = (0..=n)
            .map(|k| match config.spacing {
                SpacingConfig::Linear => {
                    config.t_start + (config.t_end - config.t_start) * k as f64 / n as f64
                }
                SpacingConfig::Log => {
                    config.t_start * (config.t_end / config.t_start).powf(k as f64 / n as f64)
                }
            })
            .collect();
        Ok((config, grid))
    }
}
