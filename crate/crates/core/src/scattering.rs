//! Stationary scattering by transfer matrices.
//!
//! Inside a segment of height V the solution is carried in the (ψ, ψ') basis
//! by [[cos κd, sin κd / κ], [-κ sin κd, cos κd]] with κ² = q² - V/(ℏ²/2m).
//! These entries are entire functions of κ², so the branch of κ never
//! matters. Each segment matrix is stored with its growing factor
//! exp(|Im κ| d) pulled out and accumulated in `log_scale`.
//!
//! Outside the structure ψ = A e^{iqx} + B e^{-iqx} on the left and
//! ψ = C e^{iq(x-L)} + D e^{-iq(x-L)} on the right; the transfer matrix maps
//! (A, B) to (C, D). With incidence from the left, r = -T21/T22 and the
//! transmitted wave is t e^{iqx} with t = e^{-iqL}/T22.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{wavenumber_from_energy, PotentialProfile};

type C = Complex64;

const I: C = C { re: 0.0, im: 1.0 };

/// cos z and sin z / z, both multiplied by exp(-|Im z|).
fn scaled_trig(z: C) -> (C, C) {
    let s = z.im.abs();
    let e_plus = (I * z - s).exp();
    let e_minus = (-I * z - s).exp();
    let cos = 0.5 * (e_plus + e_minus);
    let sinc = if z.norm() < 0.5 {
        let z2 = z * z;
        // Taylor series of sin z / z to z^16
        let mut term = C::new(1.0, 0.0);
        let mut sum = term;
        for n in 1..=8 {
            term = -term * z2 / ((2 * n) * (2 * n + 1)) as f64;
            sum += term;
        }
        sum * (-s).exp()
    } else {
        (e_plus - e_minus) / (2.0 * I * z)
    };
    (cos, sinc)
}

/// Scaled (ψ, ψ') propagator across a distance `d` at squared wavenumber `kappa2`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Propagator {
    pub m: [[C; 2]; 2],
    pub log_scale: f64,
}

impl Propagator {
    pub fn new(kappa2: C, d: f64) -> Self {
        let kappa = kappa2.sqrt();
        let z = kappa * d;
        let (cos, sinc) = scaled_trig(z);
        let s_over_k = sinc * d;
        Self { m: [[cos, s_over_k], [-kappa2 * s_over_k, cos]], log_scale: z.im.abs() }
    }

    pub fn apply(&self, v: (C, C)) -> (C, C) {
        let f = self.log_scale.exp();
        (f * (self.m[0][0] * v.0 + self.m[0][1] * v.1), f * (self.m[1][0] * v.0 + self.m[1][1] * v.1))
    }
}

fn mat_mul(a: &[[C; 2]; 2], b: &[[C; 2]; 2]) -> [[C; 2]; 2] {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

/// κ² inside every segment, left to right.
pub(crate) fn segment_kappa2(profile: &PotentialProfile, q: C) -> Vec<C> {
    let scale = profile.kinetic_scale();
    profile.segments().iter().map(|s| q * q - s.height / scale).collect()
}

/// Scaled (ψ, ψ') matrix over the whole structure.
pub(crate) fn wave_matrix(profile: &PotentialProfile, q: C) -> Propagator {
    let mut acc = [[C::new(1.0, 0.0), C::new(0.0, 0.0)], [C::new(0.0, 0.0), C::new(1.0, 0.0)]];
    let mut log_scale = 0.0;
    for (seg, kappa2) in profile.segments().iter().zip(segment_kappa2(profile, q)) {
        let p = Propagator::new(kappa2, seg.width);
        acc = mat_mul(&p.m, &acc);
        log_scale += p.log_scale;
    }
    Propagator { m: acc, log_scale }
}

/// Plane-wave transfer matrix, stored scaled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub k: C,
    /// Entries divided by exp(`log_scale`).
    pub scaled: [[C; 2]; 2],
    pub log_scale: f64,
}

impl TransferMatrix {
    pub fn entry(&self, row: usize, col: usize) -> C {
        self.scaled[row][col] * self.log_scale.exp()
    }

    pub fn determinant(&self) -> C {
        let m = &self.scaled;
        (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * (2.0 * self.log_scale).exp()
    }

    /// T22 itself; its zeros are the poles of t.
    pub fn denominator(&self) -> C {
        self.entry(1, 1)
    }
}

pub fn transfer_matrix(profile: &PotentialProfile, k: C) -> Result<TransferMatrix> {
    if k == C::new(0.0, 0.0) {
        return Err(Error::SingularInput("transfer matrix at k = 0".into()));
    }
    if !(k.re.is_finite() && k.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite wavenumber {k}")));
    }
    let w = wave_matrix(profile, k);
    let m = &w.m;
    let iq = I * k;
    let a = 0.5 * (m[0][0] + iq * m[0][1]);
    let b = 0.5 * (m[0][0] - iq * m[0][1]);
    let c = (m[1][0] + iq * m[1][1]) / (2.0 * iq);
    let d = (m[1][0] - iq * m[1][1]) / (2.0 * iq);
    Ok(TransferMatrix { k, scaled: [[a + c, b + d], [a - c, b - d]], log_scale: w.log_scale })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringAmplitudes {
    pub t: C,
    pub r: C,
    pub k: C,
}

impl ScatteringAmplitudes {
    pub fn transmission(&self) -> f64 {
        self.t.norm_sqr()
    }

    pub fn reflection(&self) -> f64 {
        self.r.norm_sqr()
    }
}

pub fn scattering_amplitudes(profile: &PotentialProfile, k: C) -> Result<ScatteringAmplitudes> {
    let tm = transfer_matrix(profile, k)?;
    let t22 = tm.scaled[1][1];
    let t = (-I * k * profile.length() - tm.log_scale).exp() / t22;
    let r = -tm.scaled[1][0] / t22;
    Ok(ScatteringAmplitudes { t, r, k })
}

/// |t|² at a real energy in meV.
pub fn transmission_probability(profile: &PotentialProfile, energy: f64) -> Result<f64> {
    let k = wavenumber_from_energy(energy, profile.mass_ratio())?;
    Ok(scattering_amplitudes(profile, C::new(k, 0.0))?.transmission())
}

/// (E, |t|²) on `n` evenly spaced energies.
pub fn transmission_scan(profile: &PotentialProfile, e_min: f64, e_max: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    if !(e_min > 0.0 && e_max > e_min) || n < 2 {
        return Err(Error::InvalidParameter(format!("bad scan range {e_min}..{e_max} with {n} points")));
    }
    (0..n)
        .map(|i| {
            let e = e_min + (e_max - e_min) * i as f64 / (n - 1) as f64;
            Ok((e, transmission_probability(profile, e)?))
        })
        .collect()
}

/// φ_k and dφ_k/dx at x for real k > 0.
///
/// Left of the structure φ = e^{ikx} + r e^{-ikx}, right of it φ = t e^{ikx}.
/// Inside, the solution is carried back from x = L, the stable direction for
/// the transmitted wave.
pub fn stationary_state(profile: &PotentialProfile, k: f64, x: f64) -> Result<(C, C)> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("stationary wave needs real k > 0, got {k}")));
    }
    let q = C::new(k, 0.0);
    let amp = scattering_amplitudes(profile, q)?;
    let l = profile.length();
    if x < 0.0 {
        let inc = (I * k * x).exp();
        let refl = amp.r * (-I * k * x).exp();
        return Ok((inc + refl, I * k * (inc - refl)));
    }
    if x > l {
        let v = amp.t * (I * k * x).exp();
        return Ok((v, I * k * v));
    }
    let edge = amp.t * (I * k * l).exp();
    let mut state = (edge, I * k * edge);
    let edges = profile.interfaces();
    let kappa2 = segment_kappa2(profile, q);
    for j in (0..profile.segments().len()).rev() {
        let (left, right) = (edges[j], edges[j + 1]);
        if x >= left {
            return Ok(Propagator::new(kappa2[j], x - right).apply(state));
        }
        state = Propagator::new(kappa2[j], left - right).apply(state);
    }
    Ok(state)
}

/// φ(x, k) for real k > 0.
pub fn stationary_wave(profile: &PotentialProfile, k: f64, x: f64) -> Result<C> {
    Ok(stationary_state(profile, k, x)?.0)
}
