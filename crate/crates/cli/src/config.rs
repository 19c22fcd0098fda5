//! JSON run configuration and its validation.

use std::fmt;
use std::path::Path;

use hodge_cgo::cgo::{CGOGeometry, Polarization, SolverSettings};
use hodge_cgo::media::presets;
use hodge_cgo::{ClampSettings, Grid, Medium, MediumPair, MediumSpec};
use serde::{Deserialize, Serialize};

/// A config problem, tagged with the dotted path of the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error in `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "presets::reference_medium")]
    pub medium: MediumSpec,
    /// Second medium for run-uniqueness; the first one is reused when absent.
    #[serde(default)]
    pub medium2: Option<MediumSpec>,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    /// Unique-continuation check attached to run-uniqueness.
    #[serde(default)]
    pub ucp: Option<UcpConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config deserializes")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub side: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: presets::REFERENCE_N, side: presets::REFERENCE_SIDE }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolarizationChoice {
    E,
    H,
    Both,
}

impl PolarizationChoice {
    pub fn modes(self) -> Vec<Polarization> {
        match self {
            PolarizationChoice::E => vec![Polarization::E],
            PolarizationChoice::H => vec![Polarization::H],
            PolarizationChoice::Both => vec![Polarization::E, Polarization::H],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    /// ρ in units of 2π/L.
    pub rho_index: [i64; 3],
    /// Rotation of (η₁, η₂) in the plane normal to ρ.
    pub angle: f64,
    pub s_list: Vec<f64>,
    pub lambda_list: Vec<f64>,
    pub polarization: PolarizationChoice,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            rho_index: [1, 1, 1],
            angle: 0.3,
            s_list: vec![8.0, 16.0, 32.0],
            lambda_list: vec![4.0, 8.0, 16.0],
            polarization: PolarizationChoice::Both,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Floor for |p_ζ|; defaults to 1e−8·(2π/L)².
    pub clamp_floor: Option<f64>,
    pub clamp_threshold: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 200, clamp_floor: None, clamp_threshold: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    pub seed: u64,
    /// Samples per λ in run-decay.
    pub n_samples: usize,
    /// Random trials in estimate-qnorm.
    pub trials: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { seed: 1, n_samples: 16, trials: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChecksConfig {
    /// Random forms in the algebra suite.
    pub n_random: usize,
    /// Frequency band of the random test fields.
    pub band: usize,
    /// Random (w, φ) pairs in the factorization suite.
    pub pairs: usize,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self { n_random: 1000, band: 4, pairs: 20 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UcpConfig {
    pub zeta_norms: Vec<f64>,
    pub angle: f64,
    pub trials: usize,
}

impl Default for UcpConfig {
    fn default() -> Self {
        Self { zeta_norms: vec![8.0, 16.0, 32.0], angle: 0.0, trials: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<String>,
    /// Write fields.bin (and fields.json on small grids).
    pub snapshots: bool,
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("must be positive and finite, got {v}")))
    }
}

fn increasing_list(field: &str, list: &[f64], min: f64) -> Result<(), ConfigError> {
    if list.is_empty() {
        return Err(ConfigError::new(field, "must not be empty"));
    }
    if let Some(v) = list.iter().find(|v| !(v.is_finite() && **v >= min)) {
        return Err(ConfigError::new(field, format!("entries must be finite and >= {min}, got {v}")));
    }
    if list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ConfigError::new(field, "must be strictly increasing"));
    }
    Ok(())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            // serde names unknown and missing fields in backticks
            let field = msg.split('`').nth(1).unwrap_or("<document>").to_string();
            ConfigError::new(field, msg)
        })
    }

    pub fn grid(&self) -> Result<Grid, ConfigError> {
        positive("grid.side", self.grid.side)?;
        Grid::new(self.grid.n, self.grid.side).map_err(|e| ConfigError::new("grid.n", e.to_string()))
    }

    pub fn sample_medium(&self) -> Result<Medium, ConfigError> {
        self.medium.sample(self.grid()?).map_err(|e| ConfigError::new("medium", e.to_string()))
    }

    pub fn medium_pair(&self) -> Result<MediumPair, ConfigError> {
        let m1 = self.sample_medium()?;
        let m2 = match &self.medium2 {
            Some(def) => def.sample(self.grid()?).map_err(|e| ConfigError::new("medium2", e.to_string()))?,
            None => m1.clone(),
        };
        MediumPair::new(&m1, &m2).map_err(|e| ConfigError::new("medium2", e.to_string()))
    }

    pub fn clamp(&self, g: &Grid) -> ClampSettings {
        let mut c = ClampSettings::default_for(g);
        if let Some(f) = self.solver.clamp_floor {
            c.floor = f;
        }
        c.threshold = self.solver.clamp_threshold;
        c
    }

    pub fn solver(&self, g: &Grid) -> SolverSettings {
        SolverSettings { tol: self.solver.tol, max_iter: self.solver.max_iter, clamp: self.clamp(g) }
    }

    /// Geometry at `s` with the configured ρ, frame angle and k of the first medium.
    pub fn geometry_at(&self, g: &Grid, s: f64, k: f64) -> Result<CGOGeometry, ConfigError> {
        let h = g.dual_spacing();
        let rho = self.geometry.rho_index.map(|m| h * m as f64);
        let (e1, e2) = hodge_cgo::cgo::frame(rho, self.geometry.angle);
        CGOGeometry::new(g, self.geometry.rho_index, e1, e2, s, k).map_err(|e| ConfigError::new("geometry", e.to_string()))
    }

    /// Checks every invariant that does not need a solve.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = self.grid()?;
        for (name, def) in [("medium", Some(&self.medium)), ("medium2", self.medium2.as_ref())] {
            if let Some(def) = def {
                positive(&format!("{name}.omega"), def.omega)?;
                positive(&format!("{name}.eps0"), def.eps0)?;
                positive(&format!("{name}.mu0"), def.mu0)?;
            }
        }
        self.sample_medium()?;
        if self.medium2.is_some() {
            self.medium_pair()?;
        }

        let geo = &self.geometry;
        if !geo.angle.is_finite() {
            return Err(ConfigError::new("geometry.angle", "must be finite"));
        }
        if geo.rho_index.iter().any(|m| m.unsigned_abs() as usize >= g.n / 2) {
            return Err(ConfigError::new("geometry.rho_index", format!("entries must lie in (-{}, {})", g.n / 2, g.n / 2)));
        }
        if geo.rho_index == [0, 0, 0] && geo.polarization != PolarizationChoice::E {
            return Err(ConfigError::new("geometry.rho_index", "H-mode polarization needs a nonzero rho"));
        }
        increasing_list("geometry.s_list", &geo.s_list, 1.0)?;
        increasing_list("geometry.lambda_list", &geo.lambda_list, 1.0)?;

        positive("solver.tol", self.solver.tol)?;
        if self.solver.max_iter == 0 {
            return Err(ConfigError::new("solver.max_iter", "must be at least 1"));
        }
        if let Some(f) = self.solver.clamp_floor {
            positive("solver.clamp_floor", f)?;
        }
        let t = self.solver.clamp_threshold;
        if !(t.is_finite() && t > 0.0 && t <= 1.0) {
            return Err(ConfigError::new("solver.clamp_threshold", format!("must lie in (0, 1], got {t}")));
        }

        if self.sampling.n_samples < 8 {
            return Err(ConfigError::new("sampling.n_samples", format!("must be at least 8, got {}", self.sampling.n_samples)));
        }
        if self.sampling.trials < 16 {
            return Err(ConfigError::new("sampling.trials", format!("must be at least 16, got {}", self.sampling.trials)));
        }

        if self.checks.n_random == 0 {
            return Err(ConfigError::new("checks.n_random", "must be at least 1"));
        }
        if self.checks.band == 0 || self.checks.band >= g.n / 2 {
            return Err(ConfigError::new("checks.band", format!("must lie in [1, {})", g.n / 2)));
        }
        if self.checks.pairs == 0 {
            return Err(ConfigError::new("checks.pairs", "must be at least 1"));
        }

        if let Some(ucp) = &self.ucp {
            increasing_list("ucp.zeta_norms", &ucp.zeta_norms, f64::MIN_POSITIVE)?;
            if !ucp.angle.is_finite() {
                return Err(ConfigError::new("ucp.angle", "must be finite"));
            }
            if ucp.trials == 0 {
                return Err(ConfigError::new("ucp.trials", "must be at least 1"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_reference_setup() {
        let c = RunConfig::parse("{}").unwrap();
        assert_eq!(c.grid.n, 32);
        assert_eq!(c.medium, presets::reference_medium());
        c.validate().unwrap();
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            (r#"{"grid": {"n": 12, "side": 1.0}}"#, "grid.n"),
            (r#"{"grid": {"n": 16, "side": -1.0}}"#, "grid.side"),
            (r#"{"geometry": {"s_list": [8, 4]}}"#, "geometry.s_list"),
            (r#"{"geometry": {"lambda_list": []}}"#, "geometry.lambda_list"),
            (r#"{"geometry": {"rho_index": [0, 0, 0]}}"#, "geometry.rho_index"),
            (r#"{"solver": {"tol": 0}}"#, "solver.tol"),
            (r#"{"solver": {"clamp_threshold": 2}}"#, "solver.clamp_threshold"),
            (r#"{"sampling": {"n_samples": 3}}"#, "sampling.n_samples"),
            (r#"{"sampling": {"trials": 3}}"#, "sampling.trials"),
            (r#"{"checks": {"band": 0}}"#, "checks.band"),
            (r#"{"medium": {"omega": -1, "eps0": 1, "mu0": 1}}"#, "medium.omega"),
            (r#"{"ucp": {"zeta_norms": [16, 8]}}"#, "ucp.zeta_norms"),
        ];
        for (text, field) in cases {
            let err = RunConfig::parse(text).and_then(|c| c.validate()).unwrap_err();
            assert_eq!(err.field, field, "{text}: {err}");
        }
        let err = RunConfig::parse(r#"{"grid": {"n": 16, "side": 1.0, "sdie": 2}}"#).unwrap_err();
        assert_eq!(err.field, "sdie");
        let err = RunConfig::parse(r#"{"geometry": {"rho_index": [1.5, 0, 0]}}"#).unwrap_err();
        assert!(err.message.contains("integer") || err.message.contains("i64"), "{err}");
    }
}
