//! Scenario execution: builds the structure and poles, dispatches on mode,
//! writes CSV/JSON outputs and a manifest describing the run.
//!
//! Output is byte-deterministic: fixed iteration order, `{:.16e}` floats,
//! LF line endings, no timestamps. Files are written to a temporary name
//! and renamed into place.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use crate::config::{IncidenceForm, Mode, ScenarioConfig};
use crate::error::{Error, Result};
use crate::oracle::{initialize_shutter_state, relative_l2_error, validity_horizon, CrankNicolson, GridSpec};
use crate::resonances::{
    gamow_state, locate_pole_seeds, pole_residual, refine_pole, PoleFamily, ResonantTerm, DEDUP_TOLERANCE,
};
use crate::transient::{buildup_cycle_count, time_scales, IncidenceSpec, Side, TimeScales, TransientSeries};
use crate::units::{build_double_barrier, PhysicalConstants, PotentialProfile, CONSTANTS};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_NAME: &str = "manifest.json";
/// Oracle comparison region extends this far past the structure, nm.
pub const VALIDATION_MARGIN: f64 = 300.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
struct PoleRecord {
    index: usize,
    re_k_per_nm: f64,
    im_k_per_nm: f64,
    energy_mev: f64,
    width_mev: f64,
    lifetime_fs: f64,
}

#[derive(Debug, Clone, Serialize)]
struct IncidenceRecord {
    label: String,
    energy_mev: f64,
    k_per_nm: f64,
    pole_index: usize,
    detuning_widths: Option<f64>,
    side: Option<Side>,
}

#[derive(Debug, Clone, Serialize)]
struct Manifest<'a> {
    code_version: &'static str,
    config: &'a ScenarioConfig,
    constants: PhysicalConstants,
    kinetic_scale_mev_nm2: f64,
    structure_length_nm: f64,
    poles: Vec<PoleRecord>,
    incidences: Vec<IncidenceRecord>,
    grids: Vec<GridSpec>,
    outputs: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
struct TimeScaleRecord {
    label: String,
    energy_mev: f64,
    pole_index: usize,
    scales: TimeScales,
    cycles_at_tau_m: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct ValidationRecord {
    label: String,
    t_fs: f64,
    relative_l2_error: f64,
    horizon_fs: f64,
    within_horizon: bool,
    norm_drift: f64,
}

struct Run<'a> {
    config: &'a ScenarioConfig,
    profile: PotentialProfile,
    family: PoleFamily,
    incidences: Vec<(String, IncidenceSpec)>,
    grids: Vec<GridSpec>,
    files: Vec<PathBuf>,
}

/// Runs one scenario, returning the files written (manifest last).
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunOutput> {
    let p = &config.potential;
    let profile = build_double_barrier(p.barrier_height_mev, p.barrier_width_nm, p.well_width_nm, p.mass_ratio)
        .map_err(|e| context("building the potential", e))?;
    let family = build_family(&profile, config).map_err(|e| context("locating resonance poles", e))?;
    let incidences = resolve_incidences(&family, config).map_err(|e| context("resolving the incidence", e))?;
    std::fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e))?;

    let mut run = Run { config, profile, family, incidences, grids: Vec::new(), files: Vec::new() };
    match config.mode {
        Mode::Poles => run.poles(),
        Mode::Snapshot => run.snapshots(),
        Mode::Trace => run.traces(),
        Mode::Timescales => run.timescales(),
        Mode::Validate => run.validate(),
    }?;
    let manifest = run.manifest()?;
    Ok(RunOutput { files: run.files, manifest })
}

fn context(op: &str, err: Error) -> Error {
    match err {
        Error::Numerical(m) => Error::Numerical(format!("{op}: {m}")),
        Error::InvalidParameter(m) => Error::InvalidParameter(format!("{op}: {m}")),
        Error::Domain(m) => Error::Domain(format!("{op}: {m}")),
        Error::Degenerate(m) => Error::Degenerate(format!("{op}: {m}")),
        other => other,
    }
}

fn build_family(profile: &PotentialProfile, config: &ScenarioConfig) -> Result<PoleFamily> {
    let family = match config.seed_scan_mev {
        None => PoleFamily::build(profile, config.pole_count)?,
        Some([lo, hi]) => {
            let mut poles = Vec::new();
            for seed in locate_pole_seeds(profile, lo, hi)? {
                let pole = refine_pole(profile, seed)?;
                if poles.iter().all(|q: &crate::resonances::ResonancePole| (q.k - pole.k).norm() >= DEDUP_TOLERANCE) {
                    poles.push(pole);
                }
            }
            poles.sort_by(|a, b| a.energy.total_cmp(&b.energy));
            poles.truncate(config.pole_count);
            let terms = poles
                .into_iter()
                .enumerate()
                .map(|(i, mut pole)| {
                    pole.index = i + 1;
                    Ok(ResonantTerm { state: gamow_state(profile, &pole)?, pole })
                })
                .collect::<Result<Vec<_>>>()?;
            PoleFamily::from_terms(terms)
        }
    };
    if family.is_empty() {
        return Err(Error::Numerical("no resonance poles found in the requested range".into()));
    }
    Ok(family)
}

fn resolve_incidences(family: &PoleFamily, config: &ScenarioConfig) -> Result<Vec<(String, IncidenceSpec)>> {
    let mu = config.potential.mass_ratio;
    match &config.incidence {
        IncidenceForm::Absolute { energy_mev } => {
            let label = format!("E{energy_mev:.4}meV");
            Ok(vec![(label, IncidenceSpec::absolute(*energy_mev, mu, config.pole_index)?)])
        }
        IncidenceForm::Relative { detuning_widths, side } => {
            let term = family.get(config.pole_index).ok_or_else(|| {
                Error::InvalidParameter(format!("pole {} not in the family of {}", config.pole_index, family.len()))
            })?;
            let side_name = match side {
                Side::Below => "below",
                Side::Above => "above",
            };
            detuning_widths
                .iter()
                .map(|&w| {
                    let spec = IncidenceSpec::relative(&term.pole, w * term.pole.width, *side, mu)?;
                    Ok((format!("{side_name}{w:.2}G"), spec))
                })
                .collect()
        }
    }
}

impl Run<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.config.output_dir.join(name)
    }

    fn emit(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.path(name);
        write_atomic(&path, contents.as_bytes())?;
        self.files.push(path);
        Ok(())
    }

    fn series(&self, incidence: IncidenceSpec) -> Result<TransientSeries> {
        TransientSeries::new(&self.profile, &self.family, incidence)
    }

    fn pole_for(&self, incidence: &IncidenceSpec) -> Result<crate::resonances::ResonancePole> {
        self.family
            .get(incidence.pole_index)
            .map(|t| t.pole)
            .ok_or_else(|| Error::InvalidParameter(format!("pole {} not in the family", incidence.pole_index)))
    }

    fn poles(&mut self) -> Result<()> {
        let mut rows = Vec::new();
        for (pos, term) in self.family.terms().iter().enumerate() {
            let p = &term.pole;
            rows.push(vec![
                p.index as f64,
                p.k.re,
                p.k.im,
                p.energy,
                p.width,
                p.lifetime(),
                self.family.isolation_ratio(pos).unwrap_or(f64::INFINITY),
                pole_residual(&self.profile, p.k)?,
                term.state.normalization_residual,
            ]);
        }
        let header = [
            "index",
            "re_k_per_nm",
            "im_k_per_nm",
            "energy_mev",
            "width_mev",
            "lifetime_fs",
            "isolation_ratio",
            "pole_residual",
            "normalization_residual",
        ];
        let text = csv(&header, &rows);
        self.emit("poles.csv", &text)
    }

    fn snapshot_times(&self, incidence: &IncidenceSpec) -> Result<Vec<f64>> {
        let mut times = self.config.times_fs.clone();
        if self.config.tau_snapshots > 0 {
            let scales = time_scales(&self.pole_for(incidence)?, incidence.energy, self.config.tau_snapshots);
            for (m, tau) in scales.tau_m.iter().enumerate() {
                times.push(*tau);
                // minimum following the m-th maximum
                let period = 2.0 * std::f64::consts::PI * CONSTANTS.hbar / scales.detuning;
                times.push((m + 1) as f64 * period);
            }
        }
        times.sort_by(f64::total_cmp);
        times.dedup();
        Ok(times)
    }

    fn snapshots(&mut self) -> Result<()> {
        let xs = self.config.x_range.points();
        for (label, inc) in self.incidences.clone() {
            let series = self.series(inc)?;
            for t in self.snapshot_times(&inc)? {
                let snap = series.snapshot(t, &xs).map_err(|e| context(&format!("snapshot at t = {t} fs"), e))?;
                let rows = rows_xy(&snap.x, &snap.psi, &snap.density);
                let text = csv(&["x_nm", "re_psi", "im_psi", "density"], &rows);
                self.emit(&format!("snapshot_{label}_t{t:.3}fs.csv"), &text)?;
            }
        }
        Ok(())
    }

    fn traces(&mut self) -> Result<()> {
        let ts = self.config.t_range.points();
        let x = self.config.trace_x_nm;
        for (label, inc) in self.incidences.clone() {
            let series = self.series(inc)?;
            let tr = series.trace(x, &ts).map_err(|e| context(&format!("trace at x = {x} nm"), e))?;
            let rows = rows_xy(&tr.t, &tr.psi, &tr.density);
            let text = csv(&["t_fs", "re_psi", "im_psi", "density"], &rows);
            self.emit(&format!("trace_{label}_x{x:.3}nm.csv"), &text)?;
        }
        Ok(())
    }

    fn timescales(&mut self) -> Result<()> {
        let mut records = Vec::new();
        for (label, inc) in &self.incidences {
            let pole = self.pole_for(inc)?;
            let scales = time_scales(&pole, inc.energy, self.config.tau_count);
            let cycles_at_tau_m =
                scales.tau_m.iter().filter_map(|&t| buildup_cycle_count(inc.energy, &pole, t)).collect();
            records.push(TimeScaleRecord {
                label: label.clone(),
                energy_mev: inc.energy,
                pole_index: pole.index,
                scales,
                cycles_at_tau_m,
            });
        }
        let text = json(&records)?;
        self.emit("timescales.json", &text)
    }

    fn validate(&mut self) -> Result<()> {
        let g = self.config.grid.clone();
        let mut times = self.config.times_fs.clone();
        times.sort_by(f64::total_cmp);
        let t_end = *times.last().expect("validation times are non-empty");
        let region = (0.0, self.profile.length() + VALIDATION_MARGIN);
        let mut records = Vec::new();
        for (label, inc) in self.incidences.clone() {
            let grid = GridSpec::snapped(g.x_min_nm, g.x_max_nm, g.dx_nm, g.dt_fs, t_end, inc.k);
            grid.validate(self.profile.length())?;
            log::info!(
                "oracle grid [{:.3}, {:.3}] nm, {} nodes, courant number {:.3}",
                grid.x_min,
                grid.x_max,
                grid.nodes(),
                grid.courant(inc.mass_ratio)
            );
            self.grids.push(grid);
            let horizon = validity_horizon(&grid, inc.energy, inc.mass_ratio, region)?;
            let series = self.series(inc)?;
            let cn = CrankNicolson::new(&grid, &self.profile).map_err(|e| context("oracle setup", e))?;
            let mut state = initialize_shutter_state(&grid, inc.k);
            let n0 = state.norm();
            let mut step = 0usize;
            for &t in &times {
                let target = (t / grid.dt).round() as usize;
                cn.advance(&mut state, target - step);
                step = target;
                if !state.psi.iter().all(|p| p.is_finite()) {
                    return Err(Error::Numerical(format!("oracle produced non-finite values by t = {t} fs")));
                }
                let err = relative_l2_error(&state, region, |x| series.psi(x, state.t))
                    .map_err(|e| context("oracle comparison", e))?;
                records.push(ValidationRecord {
                    label: label.clone(),
                    t_fs: state.t,
                    relative_l2_error: err,
                    horizon_fs: horizon,
                    within_horizon: state.t <= horizon,
                    norm_drift: (state.norm() - n0) / n0,
                });
                let mut rows = Vec::new();
                for (i, p) in state.psi.iter().enumerate() {
                    let x = grid.x(i);
                    if x < region.0 || x > region.1 {
                        continue;
                    }
                    rows.push(vec![x, p.re, p.im, series.normalized_density(x, *p)?]);
                }
                let text = csv(&["x_nm", "re_psi", "im_psi", "density"], &rows);
                self.emit(&format!("oracle_{label}_t{t:.3}fs.csv"), &text)?;
            }
        }
        let rows: Vec<Vec<f64>> = records
            .iter()
            .map(|r| vec![r.t_fs, r.relative_l2_error, r.horizon_fs, f64::from(u8::from(r.within_horizon)), r.norm_drift])
            .collect();
        let text = csv(&["t_fs", "relative_l2_error", "horizon_fs", "within_horizon", "norm_drift"], &rows);
        self.emit("validation.csv", &text)?;
        let text = json(&records)?;
        self.emit("validation.json", &text)
    }

    fn manifest(&self) -> Result<PathBuf> {
        let poles = self
            .family
            .terms()
            .iter()
            .map(|t| PoleRecord {
                index: t.pole.index,
                re_k_per_nm: t.pole.k.re,
                im_k_per_nm: t.pole.k.im,
                energy_mev: t.pole.energy,
                width_mev: t.pole.width,
                lifetime_fs: t.pole.lifetime(),
            })
            .collect();
        let incidences = self
            .incidences
            .iter()
            .map(|(label, inc)| IncidenceRecord {
                label: label.clone(),
                energy_mev: inc.energy,
                k_per_nm: inc.k,
                pole_index: inc.pole_index,
                detuning_widths: inc.offset.and_then(|(de, _)| self.pole_for(inc).ok().map(|p| de / p.width)),
                side: inc.offset.map(|(_, s)| s),
            })
            .collect();
        let outputs = self
            .files
            .iter()
            .map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default())
            .collect();
        let manifest = Manifest {
            code_version: CODE_VERSION,
            config: self.config,
            constants: CONSTANTS,
            kinetic_scale_mev_nm2: self.profile.kinetic_scale(),
            structure_length_nm: self.profile.length(),
            poles,
            incidences,
            grids: self.grids.clone(),
            outputs,
        };
        let path = self.path(MANIFEST_NAME);
        write_atomic(&path, json(&manifest)?.as_bytes())?;
        Ok(path)
    }
}

fn rows_xy(axis: &[f64], psi: &[Complex64], density: &[f64]) -> Vec<Vec<f64>> {
    axis.iter().zip(psi).zip(density).map(|((&a, p), &d)| vec![a, p.re, p.im, d]).collect()
}

/// Comma-separated, header first, `{:.16e}` values, LF endings.
pub fn csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v:.16e}");
        }
        out.push('\n');
    }
    out
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Numerical(format!("serialising output: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Write to a sibling temporary file, then rename over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
