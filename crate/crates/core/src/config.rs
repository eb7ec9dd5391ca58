//! Scenario files: flat TOML, one key per parameter, units in the key name.
//!
//! ```toml
//! mode = "trace"
//! detuning_widths = [2.0, 5.0]
//! side = "below"
//! x_nm = 15.0
//! ```
//!
//! Anything left out falls back to the defaults for the chosen mode.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{DEFAULT_DT, DEFAULT_DX, DEFAULT_LEFT, DEFAULT_RIGHT};
use crate::transient::Side;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Poles,
    Snapshot,
    Trace,
    Timescales,
    Validate,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Poles => "poles",
            Mode::Snapshot => "snapshot",
            Mode::Trace => "trace",
            Mode::Timescales => "timescales",
            Mode::Validate => "validate",
        }
    }
}

/// Raw file contents. Every field optional so that partial files and CLI
/// overrides compose; `resolve` fills in the defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub mode: Option<Mode>,
    pub output_dir: Option<PathBuf>,
    pub pole_count: Option<usize>,
    pub seed_scan_mev: Option<[f64; 2]>,

    pub barrier_height_mev: Option<f64>,
    pub barrier_width_nm: Option<f64>,
    pub well_width_nm: Option<f64>,
    pub mass_ratio: Option<f64>,

    pub energy_mev: Option<f64>,
    pub detuning_widths: Option<Vec<f64>>,
    pub side: Option<Side>,
    pub pole_index: Option<usize>,

    pub times_ps: Option<Vec<f64>>,
    pub tau_snapshots: Option<usize>,
    pub x_min_nm: Option<f64>,
    pub x_max_nm: Option<f64>,
    pub x_step_nm: Option<f64>,

    pub x_nm: Option<f64>,
    pub t_min_fs: Option<f64>,
    pub t_max_fs: Option<f64>,
    pub t_step_fs: Option<f64>,

    pub tau_count: Option<usize>,

    pub grid_x_min_nm: Option<f64>,
    pub grid_x_max_nm: Option<f64>,
    pub grid_dx_nm: Option<f64>,
    pub grid_dt_fs: Option<f64>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub barrier_height_mev: f64,
    pub barrier_width_nm: f64,
    pub well_width_nm: f64,
    pub mass_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum IncidenceForm {
    Absolute { energy_mev: f64 },
    /// E = ε_n ∓ ΔE with ΔE = multiple·Γ_n, one run per multiple.
    Relative { detuning_widths: Vec<f64>, side: Side },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl SampleRange {
    fn new(min: f64, max: f64, step: f64, what: &str) -> Result<Self> {
        if !(step > 0.0 && max >= min && min.is_finite() && max.is_finite()) {
            return Err(Error::Config(format!("{what}: need min <= max and step > 0, got [{min}, {max}] step {step}")));
        }
        Ok(Self { min, max, step })
    }

    /// min + i·step up to max inclusive (within 1e-9 of a step).
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.min + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOverrides {
    pub x_min_nm: f64,
    pub x_max_nm: f64,
    pub dx_nm: f64,
    pub dt_fs: f64,
}

/// Fully resolved scenario; this is what the manifest records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub output_dir: PathBuf,
    pub pole_count: usize,
    pub seed_scan_mev: Option<[f64; 2]>,
    pub potential: PotentialSpec,
    pub incidence: IncidenceForm,
    pub pole_index: usize,
    /// Snapshot and validation times, fs.
    pub times_fs: Vec<f64>,
    /// Snapshots at the first n maxima τ_m and the minima between them.
    pub tau_snapshots: usize,
    pub x_range: SampleRange,
    pub trace_x_nm: f64,
    pub t_range: SampleRange,
    pub tau_count: usize,
    pub grid: GridOverrides,
}

pub const DEFAULT_ENERGY: f64 = 74.97;

impl ScenarioConfig {
    pub fn resolve(file: &ScenarioFile) -> Result<Self> {
        let mode = file.mode.ok_or_else(|| {
            Error::Config("no mode given (expected one of poles, snapshot, trace, timescales, validate)".into())
        })?;
        let potential = PotentialSpec {
            barrier_height_mev: file.barrier_height_mev.unwrap_or(230.0),
            barrier_width_nm: file.barrier_width_nm.unwrap_or(5.0),
            well_width_nm: file.well_width_nm.unwrap_or(5.0),
            mass_ratio: file.mass_ratio.unwrap_or(0.067),
        };
        let incidence = match (&file.energy_mev, &file.detuning_widths) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either energy_mev or detuning_widths, not both".into()));
            }
            (Some(e), None) => {
                if file.side.is_some() {
                    return Err(Error::Config("side only applies together with detuning_widths".into()));
                }
                IncidenceForm::Absolute { energy_mev: *e }
            }
            (None, Some(w)) => {
                if w.is_empty() || w.iter().any(|v| !(*v >= 0.0)) {
                    return Err(Error::Config("detuning_widths must be a non-empty list of non-negative values".into()));
                }
                IncidenceForm::Relative { detuning_widths: w.clone(), side: file.side.unwrap_or(Side::Below) }
            }
            (None, None) => match mode {
                Mode::Trace => IncidenceForm::Relative { detuning_widths: vec![2.0, 5.0], side: file.side.unwrap_or(Side::Below) },
                _ => IncidenceForm::Absolute { energy_mev: DEFAULT_ENERGY },
            },
        };
        let pole_count = file.pole_count.unwrap_or(10);
        if pole_count == 0 {
            return Err(Error::Config("pole_count must be at least 1".into()));
        }
        let pole_index = file.pole_index.unwrap_or(1);
        if pole_index == 0 || pole_index > pole_count {
            return Err(Error::Config(format!("pole_index {pole_index} outside 1..={pole_count}")));
        }
        if let Some([lo, hi]) = file.seed_scan_mev {
            if !(lo > 0.0 && hi > lo) {
                return Err(Error::Config(format!("seed_scan_mev needs 0 < min < max, got [{lo}, {hi}]")));
            }
        }
        let default_times: &[f64] = match mode {
            Mode::Validate => &[0.5, 1.0, 2.0],
            _ => &[2.0, 10.0],
        };
        let times_ps = file.times_ps.clone().unwrap_or_else(|| default_times.to_vec());
        if times_ps.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::Config("times_ps entries must be positive".into()));
        }
        let x_range = SampleRange::new(
            file.x_min_nm.unwrap_or(0.0),
            file.x_max_nm.unwrap_or(8000.0),
            file.x_step_nm.unwrap_or(1.0),
            "x range",
        )?;
        let t_range = SampleRange::new(
            file.t_min_fs.unwrap_or(1.0),
            file.t_max_fs.unwrap_or(3000.0),
            file.t_step_fs.unwrap_or(1.0),
            "t range",
        )?;
        if t_range.min <= 0.0 {
            return Err(Error::Config("t_min_fs must be positive".into()));
        }
        let grid = GridOverrides {
            x_min_nm: file.grid_x_min_nm.unwrap_or(DEFAULT_LEFT),
            x_max_nm: file.grid_x_max_nm.unwrap_or(DEFAULT_RIGHT),
            dx_nm: file.grid_dx_nm.unwrap_or(DEFAULT_DX),
            dt_fs: file.grid_dt_fs.unwrap_or(DEFAULT_DT),
        };
        Ok(Self {
            mode,
            output_dir: file.output_dir.clone().unwrap_or_else(|| PathBuf::from("out")),
            pole_count,
            seed_scan_mev: file.seed_scan_mev,
            potential,
            incidence,
            pole_index,
            times_fs: times_ps.iter().map(|t| t * 1e3).collect(),
            tau_snapshots: file.tau_snapshots.unwrap_or(0),
            x_range,
            trace_x_nm: file.x_nm.unwrap_or(15.0),
            t_range,
            tau_count: file.tau_count.unwrap_or(3),
            grid,
        })
    }
}
