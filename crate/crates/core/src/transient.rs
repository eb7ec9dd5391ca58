//! Time-dependent solutions after the shutter opens, and the closed forms
//! and time scales derived from them.
//!
//! Inside the structure
//!
//!   Ψⁱ = φ_k M(y_k) - φ_{-k} M(y_{-k}) - i Σ_n φ_n M(y_{k_n}),   y_q = y_q(0, t),
//!
//! and for x > L
//!
//!   Ψᵉ = e^{imx²/2ℏt} [T_k M(y_k) - T_{-k} M(y_{-k}) - i Σ_n T_n M(y_{k_n})],
//!
//! with y_q = y_q(x, t). The global factor e^{imx²/2ℏt} is the free-propagation
//! phase carried by every Moshinsky wave; it drops out of |Ψᵉ|² but is needed
//! for Ψᵉ to join Ψⁱ at x = L. Sums run over the fourth-quadrant poles and
//! their mirrors k_{-n} = -k_n*, u_{-n} = u_n*.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resonances::{expansion_coefficients, mirror_expansion_coefficients, PoleFamily, ResonancePole, ResonantTerm};
use crate::scattering::{scattering_amplitudes, stationary_wave};
use crate::special::{free_phase, Frame, MoshinskyArgument};
use crate::units::{wavenumber_from_energy, PotentialProfile, CONSTANTS};

type C = Complex64;

const I: C = C { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Below,
    Above,
}

/// Incidence energy, either absolute or as E = ε_n ± ΔE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncidenceSpec {
    /// meV
    pub energy: f64,
    /// nm⁻¹
    pub k: f64,
    pub mass_ratio: f64,
    /// Pole the detuning refers to (1-based).
    pub pole_index: usize,
    /// (ΔE in meV, side) when given relative to the pole.
    pub offset: Option<(f64, Side)>,
}

impl IncidenceSpec {
    pub fn absolute(energy: f64, mass_ratio: f64, pole_index: usize) -> Result<Self> {
        if !(energy > 0.0) {
            return Err(Error::Domain(format!("incidence energy must be positive, got {energy} meV")));
        }
        let k = wavenumber_from_energy(energy, mass_ratio)?;
        Ok(Self { energy, k, mass_ratio, pole_index, offset: None })
    }

    pub fn relative(pole: &ResonancePole, delta_e: f64, side: Side, mass_ratio: f64) -> Result<Self> {
        if !(delta_e >= 0.0) {
            return Err(Error::InvalidParameter(format!("ΔE must be non-negative, got {delta_e}")));
        }
        let energy = match side {
            Side::Below => pole.energy - delta_e,
            Side::Above => pole.energy + delta_e,
        };
        let mut spec = Self::absolute(energy, mass_ratio, pole.index)?;
        spec.offset = Some((delta_e, side));
        Ok(spec)
    }

    /// |E - ε_n|.
    pub fn detuning(&self, pole: &ResonancePole) -> f64 {
        (self.energy - pole.energy).abs()
    }
}

/// Truncated resonant-state series for one incidence energy.
#[derive(Debug, Clone)]
pub struct TransientSeries {
    profile: PotentialProfile,
    terms: Vec<ResonantTerm>,
    incidence: IncidenceSpec,
    t_k: C,
    /// (T_n, T_{-n}) for every term, in summation order.
    external_coefficients: Vec<(C, C)>,
}

impl TransientSeries {
    /// Poles are summed in order of increasing |ε_n - E|, each with its mirror.
    pub fn new(profile: &PotentialProfile, family: &PoleFamily, incidence: IncidenceSpec) -> Result<Self> {
        if family.is_empty() {
            return Err(Error::InvalidParameter("transient series needs at least one pole".into()));
        }
        let mut terms = family.terms().to_vec();
        terms.sort_by(|a, b| {
            let da = (a.pole.energy - incidence.energy).abs();
            let db = (b.pole.energy - incidence.energy).abs();
            da.total_cmp(&db)
        });
        let k = incidence.k;
        let l = profile.length();
        let external_coefficients = terms
            .iter()
            .map(|t| {
                (expansion_coefficients(&t.state, &t.pole, k, l).1, mirror_expansion_coefficients(&t.state, &t.pole, k, l).1)
            })
            .collect();
        let t_k = scattering_amplitudes(profile, C::new(k, 0.0))?.t;
        Ok(Self { profile: profile.clone(), terms, incidence, t_k, external_coefficients })
    }

    pub fn incidence(&self) -> &IncidenceSpec {
        &self.incidence
    }

    pub fn profile(&self) -> &PotentialProfile {
        &self.profile
    }

    /// Exact transmission amplitude t(k).
    pub fn transmission_amplitude(&self) -> C {
        self.t_k
    }

    /// φ(x, k).
    pub fn stationary(&self, x: f64) -> Result<C> {
        stationary_wave(&self.profile, self.incidence.k, x)
    }

    fn m(&self, x: f64, t: f64, q: C, frame: Frame) -> Result<C> {
        MoshinskyArgument::new(x, t, q, self.incidence.mass_ratio, frame)?.value()
    }

    /// Ψⁱ(x, t) for 0 ≤ x ≤ L.
    pub fn psi_internal(&self, x: f64, t: f64) -> Result<C> {
        let l = self.profile.length();
        if !(0.0..=l).contains(&x) {
            return Err(Error::Domain(format!("internal solution needs 0 <= x <= {l}, got {x}")));
        }
        let k = self.incidence.k;
        let phi = self.stationary(x)?;
        let kq = C::new(k, 0.0);
        let mut psi = phi * self.m(0.0, t, kq, Frame::Internal)? - phi.conj() * self.m(0.0, t, -kq, Frame::Internal)?;
        for term in &self.terms {
            let (phi_n, _) = expansion_coefficients(&term.state, &term.pole, k, x);
            let (phi_m, _) = mirror_expansion_coefficients(&term.state, &term.pole, k, x);
            let s = phi_n * self.m(0.0, t, term.pole.k, Frame::Internal)?
                + phi_m * self.m(0.0, t, term.pole.mirror_k(), Frame::Internal)?;
            psi -= I * s;
        }
        Ok(psi)
    }

    /// Ψᵉ(x, t) for x ≥ L.
    pub fn psi_external(&self, x: f64, t: f64) -> Result<C> {
        let l = self.profile.length();
        if !(x >= l) {
            return Err(Error::Domain(format!("external solution needs x >= {l}, got {x}")));
        }
        let kq = C::new(self.incidence.k, 0.0);
        let mut psi = self.t_k * self.m(x, t, kq, Frame::External)? - self.t_k.conj() * self.m(x, t, -kq, Frame::External)?;
        for (term, &(tn, tm)) in self.terms.iter().zip(&self.external_coefficients) {
            let s = tn * self.m(x, t, term.pole.k, Frame::External)? + tm * self.m(x, t, term.pole.mirror_k(), Frame::External)?;
            psi -= I * s;
        }
        Ok(free_phase(x, t, self.incidence.mass_ratio) * psi)
    }

    /// Ψⁱ inside [0, L], Ψᵉ beyond.
    pub fn psi(&self, x: f64, t: f64) -> Result<C> {
        if x > self.profile.length() {
            self.psi_external(x, t)
        } else {
            self.psi_internal(x, t)
        }
    }

    /// |Ψ/φ_k(x)|² inside, |Ψ/T_k|² outside.
    pub fn normalized_density(&self, x: f64, psi: C) -> Result<f64> {
        let norm = if x > self.profile.length() { self.t_k } else { self.stationary(x)? };
        Ok((psi / norm).norm_sqr())
    }

    pub fn snapshot(&self, t: f64, xs: &[f64]) -> Result<WaveSnapshot> {
        let mut psi = Vec::with_capacity(xs.len());
        let mut density = Vec::with_capacity(xs.len());
        for &x in xs {
            let p = self.psi(x, t)?;
            density.push(self.normalized_density(x, p)?);
            psi.push(p);
        }
        Ok(WaveSnapshot { t, x: xs.to_vec(), psi, density })
    }

    pub fn trace(&self, x: f64, ts: &[f64]) -> Result<TimeTrace> {
        let mut psi = Vec::with_capacity(ts.len());
        let mut density = Vec::with_capacity(ts.len());
        for &t in ts {
            let p = self.psi(x, t)?;
            density.push(self.normalized_density(x, p)?);
            psi.push(p);
        }
        Ok(TimeTrace { x, t: ts.to_vec(), psi, density })
    }
}

pub fn psi_internal(profile: &PotentialProfile, poles: &PoleFamily, incidence: IncidenceSpec, x: f64, t: f64) -> Result<C> {
    TransientSeries::new(profile, poles, incidence)?.psi_internal(x, t)
}

pub fn psi_external(profile: &PotentialProfile, poles: &PoleFamily, incidence: IncidenceSpec, x: f64, t: f64) -> Result<C> {
    TransientSeries::new(profile, poles, incidence)?.psi_external(x, t)
}

/// Single-resonance external solution with the amplitudes of the pole pair
/// expressed through T_k:
///
///   iT_n = T_k e^{i(k-k_n)L},   iT_{-n} = -T_k* e^{-i(k-k_n*)L}.
pub fn psi_external_one_level(
    profile: &PotentialProfile,
    pole: &ResonancePole,
    incidence: IncidenceSpec,
    x: f64,
    t: f64,
) -> Result<C> {
    let l = profile.length();
    if !(x >= l) {
        return Err(Error::Domain(format!("external solution needs x >= {l}, got {x}")));
    }
    let k = incidence.k;
    let mu = incidence.mass_ratio;
    let t_k = scattering_amplitudes(profile, C::new(k, 0.0))?.t;
    let m = |q: C| -> Result<C> { MoshinskyArgument::new(x, t, q, mu, Frame::External)?.value() };
    let kq = C::new(k, 0.0);
    let kn = pole.k;
    let i_tn = t_k * (I * (k - kn) * l).exp();
    let i_tm = -t_k.conj() * (-I * (k - kn.conj()) * l).exp();
    let psi = t_k * m(kq)? - t_k.conj() * m(-kq)? - i_tn * m(kn)? - i_tm * m(pole.mirror_k())?;
    Ok(free_phase(x, t, mu) * psi)
}

/// 1 + e^{-Γt/ℏ} - 2e^{-Γt/2ℏ} cos ωt (Γ in meV, ω in fs⁻¹, t in fs).
pub fn internal_buildup_ratio(width: f64, omega: f64, t: f64) -> f64 {
    let g = width * t / CONSTANTS.hbar;
    1.0 + (-g).exp() - 2.0 * (-0.5 * g).exp() * (omega * t).cos()
}

/// When the closed external form may be used: t ≥ factor · m x_f / ℏk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityWindow {
    pub factor: f64,
    /// Evaluate even before the threshold.
    pub force: bool,
}

impl Default for ValidityWindow {
    fn default() -> Self {
        Self { factor: 1.0, force: false }
    }
}

/// Earliest time at which the closed external form holds at x_f, fs.
pub fn validity_threshold(incidence: &IncidenceSpec, x_f: f64, factor: f64) -> f64 {
    factor * x_f / (CONSTANTS.hbar_over_m(incidence.mass_ratio) * incidence.k)
}

/// Long-time external density
///
///   1 + e^{-Γt/ℏ} e^{2b(x_f-L)} - 2 e^{b(x_f-L)} e^{-Γt/2ℏ} cos[(a-k)(x_f-L) - (ε-E)t/ℏ].
///
/// The phase is written with the signed detuning; for E > ε it reads
/// (a-k)(x_f-L) + ω t.
pub fn external_ratio_closed_form(
    pole: &ResonancePole,
    incidence: &IncidenceSpec,
    x_f: f64,
    length: f64,
    t: f64,
    window: ValidityWindow,
) -> Result<f64> {
    let threshold = validity_threshold(incidence, x_f, window.factor);
    if t < threshold && !window.force {
        return Err(Error::OutOfValidity { t, threshold });
    }
    let hbar = CONSTANTS.hbar;
    let d = x_f - length;
    let decay = (-0.5 * pole.width * t / hbar).exp() * (pole.b() * d).exp();
    let phase = (pole.a() - incidence.k) * d - (pole.energy - incidence.energy) * t / hbar;
    Ok(1.0 + decay * decay - 2.0 * decay * phase.cos())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeScales {
    /// |E - ε_n|, meV
    pub detuning: f64,
    /// ΔE/ℏ, fs⁻¹; absent at resonance incidence.
    pub omega: Option<f64>,
    /// (2m-1)πℏ/ΔE for m = 1..M, fs.
    pub tau_m: Vec<f64>,
    /// πℏ/ΔE, fs.
    pub tau_r: Option<f64>,
    /// ℏ/Γ, fs.
    pub tau_l: f64,
    /// 10 τ_l, fs.
    pub tau_b: f64,
    /// ΔE > πΓ, i.e. τ_r < τ_l.
    pub crossover: bool,
}

/// Time scales of the buildup for incidence at `energy` near `pole`.
pub fn time_scales(pole: &ResonancePole, energy: f64, count: usize) -> TimeScales {
    let hbar = CONSTANTS.hbar;
    let detuning = (energy - pole.energy).abs();
    let tau_l = hbar / pole.width;
    let at_resonance = detuning <= 1e-12 * pole.energy.abs();
    if at_resonance {
        return TimeScales { detuning, omega: None, tau_m: Vec::new(), tau_r: None, tau_l, tau_b: 10.0 * tau_l, crossover: false };
    }
    let tau_m = (1..=count).map(|m| (2 * m - 1) as f64 * PI * hbar / detuning).collect();
    TimeScales {
        detuning,
        omega: Some(detuning / hbar),
        tau_m,
        tau_r: Some(PI * hbar / detuning),
        tau_l,
        tau_b: 10.0 * tau_l,
        crossover: detuning > PI * pole.width,
    }
}

/// Completed buildup cycles t / (2πℏ/ΔE); absent at resonance incidence.
pub fn buildup_cycle_count(energy: f64, pole: &ResonancePole, t: f64) -> Option<f64> {
    let detuning = (energy - pole.energy).abs();
    if detuning <= 1e-12 * pole.energy.abs() {
        return None;
    }
    Some(t * detuning / (2.0 * PI * CONSTANTS.hbar))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveSnapshot {
    /// fs
    pub t: f64,
    /// nm
    pub x: Vec<f64>,
    pub psi: Vec<C>,
    /// |Ψ/T_k|² for x > L, |Ψ/φ_k(x)|² inside.
    pub density: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeTrace {
    /// nm
    pub x: f64,
    /// fs
    pub t: Vec<f64>,
    pub psi: Vec<C>,
    pub density: Vec<f64>,
}

/// Scanning down from the largest x, the first point where `density` exceeds
/// `threshold` times its mean over `plateau` (linear interpolation between samples).
pub fn front_position(x: &[f64], density: &[f64], plateau: (f64, f64), threshold: f64) -> Option<f64> {
    let inside: Vec<f64> = x.iter().zip(density).filter(|(xi, _)| (plateau.0..=plateau.1).contains(*xi)).map(|(_, d)| *d).collect();
    if inside.is_empty() {
        return None;
    }
    let level = threshold * inside.iter().sum::<f64>() / inside.len() as f64;
    let n = x.len().min(density.len());
    for i in (0..n).rev() {
        if density[i] > level {
            if i + 1 == n {
                return Some(x[i]);
            }
            let frac = (density[i] - level) / (density[i] - density[i + 1]);
            return Some(x[i] + frac * (x[i + 1] - x[i]));
        }
    }
    None
}

/// Interior local maxima of a sampled curve, refined by a parabola through
/// the three samples around each.
pub fn local_maxima(t: &[f64], v: &[f64]) -> Vec<(f64, f64)> {
    let n = t.len().min(v.len());
    let mut out = Vec::new();
    for i in 1..n.saturating_sub(1) {
        if v[i] > v[i - 1] && v[i] >= v[i + 1] {
            let curv = v[i - 1] - 2.0 * v[i] + v[i + 1];
            let shift = if curv < 0.0 { 0.5 * (v[i - 1] - v[i + 1]) / curv } else { 0.0 };
            let h = 0.5 * (t[i + 1] - t[i - 1]);
            out.push((t[i] + shift * h, v[i] - 0.25 * (v[i - 1] - v[i + 1]) * shift));
        }
    }
    out
}

/// Last sampled time at which `v` lies outside [1 - band, 1 + band].
pub fn settling_time(t: &[f64], v: &[f64], band: f64) -> Option<f64> {
    t.iter().zip(v).rev().find(|(_, &vi)| (vi - 1.0).abs() > band).map(|(&ti, _)| ti)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::canonical_double_barrier;

    fn setup(count: usize) -> (PotentialProfile, PoleFamily, IncidenceSpec) {
        let p = canonical_double_barrier();
        let f = PoleFamily::build(&p, count).unwrap();
        let inc = IncidenceSpec::absolute(74.97, 0.067, 1).unwrap();
        (p, f, inc)
    }

    #[test]
    fn buildup_ratio_limits() {
        assert!(internal_buildup_ratio(1.0, 0.01, 0.0).abs() < 1e-15);
        assert!((internal_buildup_ratio(1.0, 0.01, 1e6) - 1.0).abs() < 1e-12);
        let (g, de) = (1.028, 5.14);
        let hbar = CONSTANTS.hbar;
        let tau1 = PI * hbar / de;
        let want = (1.0 + (-g * tau1 / (2.0 * hbar)).exp()).powi(2);
        assert!((internal_buildup_ratio(g, de / hbar, tau1) - want).abs() < 1e-14);
    }

    #[test]
    fn closed_form_reduces_at_exit() {
        let (p, f, inc) = setup(1);
        let pole = f.terms()[0].pole;
        let omega = inc.detuning(&pole) / CONSTANTS.hbar;
        let w = ValidityWindow { factor: 1.0, force: true };
        for i in 0..200 {
            let t = 20.0 * i as f64;
            let a = external_ratio_closed_form(&pole, &inc, p.length(), p.length(), t, w).unwrap();
            assert!((a - internal_buildup_ratio(pole.width, omega, t)).abs() < 1e-13);
        }
    }

    #[test]
    fn closed_form_enforces_window() {
        let (p, f, inc) = setup(1);
        let pole = f.terms()[0].pole;
        let r = external_ratio_closed_form(&pole, &inc, 115.0, p.length(), 10.0, ValidityWindow::default());
        assert!(matches!(r, Err(Error::OutOfValidity { .. })));
    }

    #[test]
    fn time_scale_values() {
        let (_, f, _) = setup(1);
        let pole = f.terms()[0].pole;
        let s = time_scales(&pole, pole.energy - 5.0 * pole.width, 3);
        assert!((s.tau_r.unwrap() - 402.3).abs() < 0.5);
        assert!((s.tau_l - 640.35).abs() < 0.5);
        assert_eq!(s.tau_b, 10.0 * s.tau_l);
        assert!(s.crossover);
        assert_eq!(s.tau_m.len(), 3);
        assert!((s.tau_m[2] - 5.0 * s.tau_m[0]).abs() < 1e-9);
        let edge = time_scales(&pole, pole.energy + PI * pole.width, 1);
        assert!((edge.tau_r.unwrap() / edge.tau_l - 1.0).abs() < 1e-12);
        let res = time_scales(&pole, pole.energy, 3);
        assert!(res.tau_r.is_none() && res.omega.is_none() && !res.crossover);
    }

    #[test]
    fn cycle_counts() {
        let (_, f, _) = setup(1);
        let pole = f.terms()[0].pole;
        let e = pole.energy - 5.0 * pole.width;
        let period = 2.0 * PI * CONSTANTS.hbar / (5.0 * pole.width);
        assert!((buildup_cycle_count(e, &pole, period).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(buildup_cycle_count(e, &pole, 0.0), Some(0.0));
        assert!(buildup_cycle_count(pole.energy, &pole, 100.0).is_none());
    }

    #[test]
    fn long_time_limit_inside() {
        let (p, f, inc) = setup(10);
        let s = TransientSeries::new(&p, &f, inc).unwrap();
        let t = 30.0 * f.terms()[0].pole.lifetime();
        let psi = s.psi_internal(7.5, t).unwrap();
        let k = inc.k;
        let phase = (-I * inc.energy * t / CONSTANTS.hbar).exp();
        let phi = stationary_wave(&p, k, 7.5).unwrap() * phase;
        assert!((psi - phi).norm() / phi.norm() < 1e-3);
    }

    #[test]
    fn one_pole_is_close_inside() {
        let (p, f, inc) = setup(10);
        let full = TransientSeries::new(&p, &f, inc).unwrap().psi_internal(7.5, 2000.0).unwrap();
        let one = TransientSeries::new(&p, &f.truncated(1), inc).unwrap().psi_internal(7.5, 2000.0).unwrap();
        assert!((full - one).norm() / full.norm() < 1e-2);
    }

    #[test]
    fn external_oscillates_about_one() {
        let (p, f, inc) = setup(10);
        let s = TransientSeries::new(&p, &f, inc).unwrap();
        let xs: Vec<f64> = (0..400).map(|i| p.length() + 10.0 * i as f64).collect();
        let snap = s.snapshot(10_000.0, &xs).unwrap();
        let mean = snap.density.iter().sum::<f64>() / snap.density.len() as f64;
        assert!((mean - 1.0).abs() < 0.2, "{mean}");
        assert!(snap.density.iter().any(|&d| d > 1.0) && snap.density.iter().any(|&d| d < 1.0));
    }

    #[test]
    fn internal_and_external_meet() {
        let (p, f, inc) = setup(10);
        let s = TransientSeries::new(&p, &f, inc).unwrap();
        let l = p.length();
        let a = s.psi_internal(l, 1000.0).unwrap();
        let b = s.psi_external(l, 1000.0).unwrap();
        assert!((a - b).norm() / s.transmission_amplitude().norm() < 5e-3);
    }

    #[test]
    fn front_locator() {
        let x: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let d: Vec<f64> = x.iter().map(|&xi| if xi < 600.5 { 1.0 } else { 0.0 }).collect();
        let f = front_position(&x, &d, (0.0, 300.0), 0.1).unwrap();
        assert!((f - 600.9).abs() < 1e-9, "{f}");
    }

    #[test]
    fn maxima_of_parabola() {
        let t: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
        let v: Vec<f64> = t.iter().map(|&x| -(x - 3.33f64).powi(2)).collect();
        let m = local_maxima(&t, &v);
        assert_eq!(m.len(), 1);
        assert!((m[0].0 - 3.33).abs() < 1e-12);
    }

    #[test]
    fn rejects_wrong_region() {
        let (p, f, inc) = setup(1);
        let s = TransientSeries::new(&p, &f, inc).unwrap();
        assert!(s.psi_internal(20.0, 100.0).is_err());
        assert!(s.psi_external(3.0, 100.0).is_err());
        assert!(matches!(s.psi_external(20.0, 1e-4), Err(Error::SingularTime { .. })));
    }

    #[test]
    fn relative_incidence_round_trip() {
        let (_, f, _) = setup(1);
        let pole = f.terms()[0].pole;
        let below = IncidenceSpec::relative(&pole, 5.14, Side::Below, 0.067).unwrap();
        let above = IncidenceSpec::relative(&pole, 5.14, Side::Above, 0.067).unwrap();
        assert!((below.energy + 5.14 - pole.energy).abs() < 1e-12);
        assert!((above.energy - 5.14 - pole.energy).abs() < 1e-12);
        assert!((below.detuning(&pole) - 5.14).abs() < 1e-12);
    }
}
