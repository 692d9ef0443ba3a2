//! Run configuration: JSON document, dotted-path overrides, typed blocks.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use dressed_lattice::bloch::{BandMode, SolverOptions};
use dressed_lattice::constants::{UnitSystem, RB87_MASS};
use dressed_lattice::lattice::LatticeModel;
use dressed_lattice::momentum::MomentumMode;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub physical: Physical,
    /// Parsed by [`LatticeModel::from_value`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rf: Option<Rf>,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default)]
    pub momentum: Momentum,
    #[serde(default)]
    pub loss: Loss,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<Fit>,
    #[serde(default)]
    pub figure: Figure,
    #[serde(default)]
    pub output: Output,
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physical {
    pub field_mT: f64,
    pub wavelength_nm: f64,
}

impl Default for Physical {
    fn default() -> Self {
        Self {
            field_mT: 5.117,
            wavelength_nm: 790.76,
        }
    }
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rf {
    pub coupling_kHz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_MHz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_MHz: Option<Vec<f64>>,
    /// Couplings for `rabi-cal`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_sweep_kHz: Option<Vec<f64>>,
    /// Loading sweep rate for the adiabaticity check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_rate_kHz_per_ms: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMode {
    Spinor,
    SingleSurface,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Solver {
    pub n_max: usize,
    pub q_grid: usize,
    pub cell_grid: usize,
    pub mode: SolverMode,
    pub check_convergence: bool,
    /// Bands written by `bands`.
    pub bands: usize,
}

impl Default for Solver {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self {
            n_max: d.n_max,
            q_grid: d.q_grid,
            cell_grid: d.surface_grid,
            mode: SolverMode::Spinor,
            check_convergence: d.check_convergence,
            bands: 6,
        }
    }
}

impl Solver {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            n_max: self.n_max,
            q_grid: self.q_grid,
            surface_grid: self.cell_grid,
            mode: match self.mode {
                SolverMode::Spinor => BandMode::Spinor,
                SolverMode::SingleSurface => BandMode::SingleSurface,
            },
            check_convergence: self.check_convergence,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionMode {
    DephasedBand,
    Wannier,
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Momentum {
    pub mode: DistributionMode,
    pub tof_ms: f64,
    pub initial_size_um: f64,
    pub field_uncertainty_uT: f64,
    pub depth_uncertainty_Er: f64,
}

impl Default for Momentum {
    fn default() -> Self {
        Self {
            mode: DistributionMode::DephasedBand,
            tof_ms: 12.2,
            initial_size_um: 0.0,
            field_uncertainty_uT: 0.0,
            depth_uncertainty_Er: 0.0,
        }
    }
}

impl Momentum {
    pub fn distribution_mode(&self) -> MomentumMode {
        match self.mode {
            DistributionMode::DephasedBand => MomentumMode::DephasedBand,
            DistributionMode::Wannier => MomentumMode::Wannier,
        }
    }
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Loss {
    pub alpha: f64,
    pub prefactor: f64,
    pub attempt_constant: f64,
    /// Depths for `loss` and `figure 4`; empty means the lattice depth.
    pub depths_Er: Vec<f64>,
}

impl Default for Loss {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            prefactor: 1.0,
            attempt_constant: 1.0,
            depths_Er: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitKind {
    Decay,
    ExponentialDecay,
    ExponentialGrowth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fit {
    /// CSV with columns x, y[, σ].
    pub input: String,
    pub model: FitKind,
    /// Treat x as depth (E_R) and y as a rate (s⁻¹); subtract spin-flip loss.
    #[serde(default)]
    pub subtract_background: bool,
}

/// Generators for the synthetic overlays of `figure 3` and `figure 4`.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Figure {
    pub gap_law_A_per_s: f64,
    pub gap_law_B_us: f64,
    pub gap_points_kHz: Vec<f64>,
    pub depth_law_C_per_s: f64,
    pub depth_law_D_per_Er: f64,
    pub depth_points_Er: Vec<f64>,
    /// Relative 1σ scatter of the synthetic rates.
    pub noise_fraction: f64,
}

impl Default for Figure {
    fn default() -> Self {
        Self {
            gap_law_A_per_s: 2000.0,
            gap_law_B_us: 83.0,
            gap_points_kHz: vec![20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0],
            depth_law_C_per_s: 1.2,
            depth_law_D_per_Er: 0.27,
            depth_points_Er: vec![8.0, 10.0, 12.0, 14.0, 16.0],
            noise_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub dir: String,
}

impl Default for Output {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

impl RunConfig {
    /// Parse a document after applying `key=value` overrides.
    pub fn from_str_with_overrides(doc: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut value: Value =
            serde_json::from_str(doc).map_err(|e| CliError::config("$", format!("malformed JSON: {e}")))?;
        if !value.is_object() {
            return Err(CliError::config("$", "expected an object"));
        }
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self, CliError> {
        let cfg: Self = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            CliError::config(if path == "." { "$".into() } else { path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = |v: f64, path: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::config(path, format!("must be positive, got {v}")))
            }
        };
        positive(self.physical.field_mT, "physical.field_mT")?;
        positive(self.physical.wavelength_nm, "physical.wavelength_nm")?;
        positive(self.momentum.tof_ms, "momentum.tof_ms")?;
        if let Some(rf) = &self.rf {
            if !(rf.coupling_kHz >= 0.0) {
                return Err(CliError::config("rf.coupling_kHz", "must be non-negative"));
            }
        }
        for (v, p) in [
            (self.momentum.initial_size_um, "momentum.initial_size_um"),
            (self.momentum.field_uncertainty_uT, "momentum.field_uncertainty_uT"),
            (self.momentum.depth_uncertainty_Er, "momentum.depth_uncertainty_Er"),
            (self.loss.alpha, "loss.alpha"),
            (self.loss.prefactor, "loss.prefactor"),
            (self.loss.attempt_constant, "loss.attempt_constant"),
            (self.figure.noise_fraction, "figure.noise_fraction"),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(CliError::config(p, format!("must be non-negative, got {v}")));
            }
        }
        if self.solver.bands == 0 {
            return Err(CliError::config("solver.bands", "must be at least 1"));
        }
        Ok(())
    }

    pub fn units(&self) -> Result<UnitSystem, CliError> {
        UnitSystem::new(self.physical.wavelength_nm * 1e-9, RB87_MASS)
            .map_err(|e| CliError::config("physical.wavelength_nm", e.to_string()))
    }

    pub fn field_t(&self) -> f64 {
        self.physical.field_mT * 1e-3
    }

    pub fn lattice(&self) -> Result<LatticeModel, CliError> {
        let block = self
            .lattice
            .as_ref()
            .ok_or_else(|| CliError::config("lattice", "missing required key"))?;
        LatticeModel::from_value(block, "lattice").map_err(CliError::from)
    }

    pub fn rf(&self) -> Result<&Rf, CliError> {
        self.rf
            .as_ref()
            .ok_or_else(|| CliError::config("rf", "missing required key"))
    }

    pub fn rf_frequency_hz(&self) -> Result<f64, CliError> {
        self.rf()?
            .frequency_MHz
            .map(|f| f * 1e6)
            .ok_or_else(|| CliError::config("rf.frequency_MHz", "missing required key"))
    }

    pub fn rf_sweep_hz(&self) -> Result<Vec<f64>, CliError> {
        let list = self
            .rf()?
            .sweep_MHz
            .as_ref()
            .ok_or_else(|| CliError::config("rf.sweep_MHz", "missing required key"))?;
        if list.is_empty() {
            return Err(CliError::config("rf.sweep_MHz", "must not be empty"));
        }
        Ok(list.iter().map(|f| f * 1e6).collect())
    }

    pub fn fit(&self) -> Result<&Fit, CliError> {
        self.fit
            .as_ref()
            .ok_or_else(|| CliError::config("fit", "missing required key"))
    }

    /// Canonical JSON (object keys sorted).
    pub fn canonical_json(&self) -> String {
        let v = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string(&v).expect("config serializes")
    }
}

/// `a.b.c=value`; the value is JSON when it parses, a string otherwise.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::config("$", format!("override `{assignment}` is not of the form key=value")))?;
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::config(key, "empty path segment in override"));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    for (i, part) in parts.iter().enumerate() {
        let here = parts[..=i].join(".");
        let last = i + 1 == parts.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(part.to_string(), value);
                    return Ok(());
                }
                map.entry(part.to_string())
                    .or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| CliError::config(&here, "expected an array index"))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| CliError::config(&here, format!("index out of range (length {len})")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(CliError::config(&here, "cannot descend into a scalar")),
        };
    }
    Ok(())
}
