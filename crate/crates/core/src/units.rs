//! Unit system and piecewise-constant potentials.
//!
//! Lengths are in nm, times in fs and energies in meV. Speeds are reported
//! in nm/ps because that is the natural scale of the wavefront.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants in the nm / fs / meV system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant in meV·fs.
    pub hbar: f64,
    /// ℏ²/2mₑ for the bare electron mass, in meV·nm².
    pub hbar2_over_2me: f64,
}

impl PhysicalConstants {
    pub const CODATA: PhysicalConstants = PhysicalConstants {
        hbar: 658.211_956_9,
        hbar2_over_2me: 38.0998,
    };

    /// ℏ²/2m for an effective mass ratio μ = m/mₑ, in meV·nm².
    pub fn hbar2_over_2m(&self, mass_ratio: f64) -> f64 {
        self.hbar2_over_2me / mass_ratio
    }

    /// ℏ/m in nm²/fs.
    pub fn hbar_over_m(&self, mass_ratio: f64) -> f64 {
        2.0 * self.hbar2_over_2m(mass_ratio) / self.hbar
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA
    }
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants::CODATA;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// nm
    pub width: f64,
    /// meV
    pub height: f64,
}

/// Piecewise-constant potential on [0, L], zero outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialProfile {
    segments: Vec<Segment>,
    mass_ratio: f64,
    length: f64,
}

impl PotentialProfile {
    pub fn new(segments: Vec<Segment>, mass_ratio: f64) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidParameter("profile needs at least one segment".into()));
        }
        if !(mass_ratio > 0.0 && mass_ratio.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass ratio must be positive, got {mass_ratio}")));
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.width > 0.0 && s.width.is_finite()) {
                return Err(Error::InvalidParameter(format!("segment {i}: width must be positive, got {}", s.width)));
            }
            if !(s.height >= 0.0 && s.height.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "segment {i}: height must be non-negative, got {}",
                    s.height
                )));
            }
        }
        let length = segments.iter().map(|s| s.width).sum();
        Ok(Self { segments, mass_ratio, length })
    }

    /// Zero potential over a region of the given length.
    pub fn free(length: f64, mass_ratio: f64) -> Result<Self> {
        Self::new(vec![Segment { width: length, height: 0.0 }], mass_ratio)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn mass_ratio(&self) -> f64 {
        self.mass_ratio
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn max_height(&self) -> f64 {
        self.segments.iter().map(|s| s.height).fold(0.0, f64::max)
    }

    /// False for a profile with no barriers at all.
    pub fn has_barriers(&self) -> bool {
        self.max_height() > 0.0
    }

    /// ℏ²/2m for this profile, meV·nm².
    pub fn kinetic_scale(&self) -> f64 {
        CONSTANTS.hbar2_over_2m(self.mass_ratio)
    }

    /// Left edge of every segment followed by L.
    pub fn interfaces(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        let mut x = 0.0;
        out.push(x);
        for s in &self.segments {
            x += s.width;
            out.push(x);
        }
        if let Some(last) = out.last_mut() {
            *last = self.length;
        }
        out
    }

    /// Potential at x; on an interface the value of the segment to the right.
    pub fn potential_at(&self, x: f64) -> f64 {
        if x < 0.0 || x >= self.length {
            return 0.0;
        }
        let mut left = 0.0;
        for s in &self.segments {
            if x < left + s.width {
                return s.height;
            }
            left += s.width;
        }
        0.0
    }

    /// Mirror image about x = L/2.
    pub fn reversed(&self) -> Self {
        let mut segments = self.segments.clone();
        segments.reverse();
        Self { segments, mass_ratio: self.mass_ratio, length: self.length }
    }
}

/// Barrier / well / barrier profile.
pub fn build_double_barrier(
    barrier_height: f64,
    barrier_width: f64,
    well_width: f64,
    mass_ratio: f64,
) -> Result<PotentialProfile> {
    if !(barrier_width > 0.0) || !(well_width > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "widths must be positive (barrier {barrier_width} nm, well {well_width} nm)"
        )));
    }
    if !(barrier_height >= 0.0) {
        return Err(Error::InvalidParameter(format!("barrier height must be non-negative, got {barrier_height}")));
    }
    if barrier_height == 0.0 {
        log::warn!("double barrier built with zero height: no barriers");
    }
    let b = Segment { width: barrier_width, height: barrier_height };
    let w = Segment { width: well_width, height: 0.0 };
    PotentialProfile::new(vec![b, w, b], mass_ratio)
}

/// The reference structure: 230 meV, 5 nm barriers, 5 nm well, GaAs-like mass.
pub fn canonical_double_barrier() -> PotentialProfile {
    build_double_barrier(230.0, 5.0, 5.0, 0.067).expect("canonical parameters are valid")
}

/// k = √(E / (ℏ²/2m)) in nm⁻¹.
pub fn wavenumber_from_energy(energy: f64, mass_ratio: f64) -> Result<f64> {
    if !(energy >= 0.0) {
        return Err(Error::Domain(format!("energy must be non-negative, got {energy} meV")));
    }
    Ok((energy / CONSTANTS.hbar2_over_2m(mass_ratio)).sqrt())
}

pub fn energy_from_wavenumber(k: f64, mass_ratio: f64) -> f64 {
    CONSTANTS.hbar2_over_2m(mass_ratio) * k * k
}

/// Classical speed √(2E/m) in nm/ps.
pub fn classical_speed(energy: f64, mass_ratio: f64) -> Result<f64> {
    let k = wavenumber_from_energy(energy, mass_ratio)?;
    Ok(CONSTANTS.hbar_over_m(mass_ratio) * k * 1e3)
}
