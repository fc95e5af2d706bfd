//! Run configuration documents. Every spec is validated before any work starts.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::duality_czo::{build_multiplier_czo, CzoKind, MultiplierOperator};
use crate::error::{Error, Result};
use crate::grid::{ExponentFunction, Grid};
use crate::littlewood_paley::{build_family, KernelFamily, WindowKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExponentSpec {
    Constant { value: f64 },
    Sinusoid { mean: f64, amplitude: f64 },
    Smoothstep { low: f64, high: f64, width: f64 },
    /// Samples on the grid; their count fixes `J`.
    Samples { values: Vec<f64> },
}

impl ExponentSpec {
    pub fn build(&self, grid: Grid) -> Result<ExponentFunction> {
        match self {
            ExponentSpec::Constant { value } => ExponentFunction::constant(grid, *value),
            ExponentSpec::Sinusoid { mean, amplitude } => ExponentFunction::sinusoid(grid, *mean, *amplitude),
            ExponentSpec::Smoothstep { low, high, width } => ExponentFunction::smoothstep(grid, *low, *high, *width),
            ExponentSpec::Samples { values } => {
                if values.len() != grid.size() {
                    return Err(Error::Config(format!(
                        "exponent has {} samples, grid has {}",
                        values.len(),
                        grid.size()
                    )));
                }
                ExponentFunction::new(grid, values.clone())
            }
        }
        .map_err(|e| Error::Config(format!("exponent: {e}")))
    }

    /// Inline form used by `--exponent`: `1.2`, `sin:1.0:0.2`, `step:0.6:1.5:0.1`.
    pub fn parse_inline(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("not a number in exponent spec: {s:?}")))
        };
        match parts.as_slice() {
            [v] => Ok(ExponentSpec::Constant { value: num(v)? }),
            ["sin", m, a] => Ok(ExponentSpec::Sinusoid { mean: num(m)?, amplitude: num(a)? }),
            ["step", l, h, w] => Ok(ExponentSpec::Smoothstep { low: num(l)?, high: num(h)?, width: num(w)? }),
            _ => Err(Error::Config(format!("unrecognized exponent spec {text:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub window: WindowKind,
    pub j_min: u32,
    /// Defaults to the largest alias-free scale.
    #[serde(default)]
    pub j_max: Option<u32>,
    /// Defaults to the window's smallest alias-free shift.
    #[serde(default)]
    pub shift: Option<u32>,
}

impl KernelSpec {
    pub fn build(&self, grid: Grid) -> Result<KernelFamily> {
        let shift = self.shift.unwrap_or_else(|| self.window.min_alias_free_shift());
        let big_j = grid.log2_size();
        let j_max = self
            .j_max
            .unwrap_or_else(|| big_j.saturating_sub(shift).min(big_j.saturating_sub(1)));
        if j_max + shift > big_j {
            return Err(Error::Config(format!(
                "coefficients of scale {j_max} need intervals of scale {} > J = {big_j}",
                j_max + shift
            )));
        }
        build_family(grid, self.j_min, j_max, self.window, shift)
    }

    /// Inline form used by `--kernels`: `meyer`, `shannon:1:6`, `meyer:1:5:2`.
    pub fn parse_inline(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let window = match parts[0] {
            "meyer" | "meyer_smooth" => WindowKind::MeyerSmooth,
            "shannon" | "shannon_sharp" => WindowKind::ShannonSharp,
            other => return Err(Error::Config(format!("unknown window {other:?}"))),
        };
        let int = |s: &str| -> Result<u32> {
            s.parse::<u32>()
                .map_err(|_| Error::Config(format!("not an integer in kernel spec: {s:?}")))
        };
        let mut spec = KernelSpec { window, j_min: 1, j_max: None, shift: None };
        if let Some(s) = parts.get(1) {
            spec.j_min = int(s)?;
        }
        if let Some(s) = parts.get(2) {
            spec.j_max = Some(int(s)?);
        }
        if let Some(s) = parts.get(3) {
            spec.shift = Some(int(s)?);
        }
        if parts.len() > 4 {
            return Err(Error::Config(format!("too many fields in kernel spec {text:?}")));
        }
        Ok(spec)
    }
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec {
            window: WindowKind::MeyerSmooth,
            j_min: 1,
            j_max: None,
            shift: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub kind: CzoKind,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn default_gamma() -> f64 {
    1.0
}

impl Default for OperatorSpec {
    fn default() -> Self {
        OperatorSpec { kind: CzoKind::HilbertSmooth, gamma: 1.0 }
    }
}

impl OperatorSpec {
    pub fn build(&self, grid: Grid) -> Result<MultiplierOperator> {
        build_multiplier_czo(grid, &self.kind, self.gamma).map_err(|e| match e {
            Error::Precondition(m) => Error::Config(format!("operator: {m}")),
            other => other,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Structured,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative tolerance of the Luxemburg solver.
    #[serde(default = "default_rel_tol")]
    pub luxemburg_rel_tol: f64,
}

fn default_rel_tol() -> f64 {
    crate::luxemburg::DEFAULT_REL_TOL
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { luxemburg_rel_tol: default_rel_tol() }
    }
}

/// Everything a run needs. Absent fields take the built-in defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub grid: Option<u32>,
    #[serde(default)]
    pub exponent: Option<ExponentSpec>,
    #[serde(default)]
    pub kernels: Option<KernelSpec>,
    #[serde(default)]
    pub operator: Option<OperatorSpec>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid: None,
            exponent: None,
            kernels: None,
            operator: None,
            trials: None,
            seed: 0,
            tolerances: Tolerances::default(),
            out: None,
            format: OutputFormat::Structured,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))
    }

    pub fn grid_or(&self, default: u32) -> Result<Grid> {
        Grid::new(self.grid.unwrap_or(default)).map_err(|e| Error::Config(e.to_string()))
    }

    /// Validate every spec that is present against the configured grid.
    pub fn validate(&self) -> Result<()> {
        let tol = self.tolerances.luxemburg_rel_tol;
        if !(tol > 0.0 && tol <= 1e-2) {
            return Err(Error::Config(format!("luxemburg_rel_tol must lie in (0, 1e-2], got {tol}")));
        }
        if self.trials == Some(0) {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        let grid = match (self.grid, &self.exponent) {
            (Some(j), _) => Some(Grid::new(j).map_err(|e| Error::Config(e.to_string()))?),
            (None, Some(ExponentSpec::Samples { values })) => {
                let n = values.len();
                if !n.is_power_of_two() {
                    return Err(Error::Config(format!("{n} exponent samples is not a power of two")));
                }
                Some(Grid::new(n.trailing_zeros()).map_err(|e| Error::Config(e.to_string()))?)
            }
            _ => None,
        };
        if let Some(g) = grid {
            if let Some(e) = &self.exponent {
                e.build(g)?;
            }
            if let Some(k) = &self.kernels {
                k.build(g)?;
            }
            if let Some(o) = &self.operator {
                o.build(g)?;
            }
        } else {
            if let Some(e) = &self.exponent {
                e.build(Grid::new(8)?)?;
            }
            if let Some(o) = &self.operator {
                if !(o.gamma > 0.0 && o.gamma <= 1.0) {
                    return Err(Error::Config(format!("operator γ must lie in (0, 1], got {}", o.gamma)));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documents_and_rejects_unknown_fields() {
        let c = RunConfig::from_json(
            r#"{"grid": 7, "exponent": {"kind": "sinusoid", "mean": 0.9, "amplitude": 0.05},
                "kernels": {"window": "shannon_sharp", "j_min": 1}, "seed": 4}"#,
        )
        .unwrap();
        c.validate().unwrap();
        assert_eq!(c.kernels.as_ref().unwrap().build(Grid::new(7).unwrap()).unwrap().j_max(), 6);
        assert!(RunConfig::from_json(r#"{"grid": 7, "colour": 1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"exponent": {"kind": "constant", "value": 1, "x": 2}}"#).is_err());
        let bad = RunConfig::from_json(r#"{"grid": 7, "exponent": {"kind": "constant", "value": -1}}"#).unwrap();
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        let bad = RunConfig::from_json(r#"{"grid": 7, "kernels": {"window": "meyer_smooth", "j_min": 1, "j_max": 6}}"#).unwrap();
        assert!(bad.validate().is_err());
    }

    #[test]
    fn inline_specs() {
        assert_eq!(ExponentSpec::parse_inline("0.8").unwrap(), ExponentSpec::Constant { value: 0.8 });
        assert_eq!(
            ExponentSpec::parse_inline("sin:1:0.2").unwrap(),
            ExponentSpec::Sinusoid { mean: 1.0, amplitude: 0.2 }
        );
        assert!(ExponentSpec::parse_inline("cos:1").is_err());
        let k = KernelSpec::parse_inline("shannon:2:5").unwrap();
        assert_eq!((k.window, k.j_min, k.j_max, k.shift), (WindowKind::ShannonSharp, 2, Some(5), None));
        assert!(KernelSpec::parse_inline("haar").is_err());
    }
}
