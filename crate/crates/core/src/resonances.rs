//! Resonance poles of t(k) and their Gamow states.
//!
//! Poles are the zeros of T22 in the fourth quadrant. A Gamow state starts
//! from the purely outgoing data (u, u')(0) = (1, -ik_n) and is carried
//! through the segments; at a pole it leaves x = L as a pure e^{ik_n x}.
//! States are normalised so that
//!
//!   ∫₀ᴸ u² dx + i [u(0)² + u(L)²] / (2k_n) = 1,
//!
//! which makes the residue of t at k_n equal to i u(0) u(L) e^{-ik_n L}.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scattering::{segment_kappa2, transfer_matrix, transmission_probability, Propagator};
use crate::units::{energy_from_wavenumber, wavenumber_from_energy, PotentialProfile};

type C = Complex64;

const I: C = C { re: 0.0, im: 1.0 };

/// Newton step for T22 derivatives.
pub const DERIVATIVE_STEP: f64 = 1e-7;
/// Newton stops once |Δk| falls below this, nm⁻¹.
pub const POLE_TOLERANCE: f64 = 1e-12;
/// Two refined poles closer than this are the same pole, nm⁻¹.
pub const DEDUP_TOLERANCE: f64 = 1e-8;
const MAX_NEWTON_ITERATIONS: usize = 80;

/// k_n = a_n - i b_n with ε_n - iΓ_n/2 = (ℏ²/2m) k_n².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonancePole {
    /// 1-based, in order of increasing ε_n; 0 before a family assigns it.
    pub index: usize,
    pub k: C,
    /// meV
    pub energy: f64,
    /// meV
    pub width: f64,
}

impl ResonancePole {
    pub fn from_wavenumber(index: usize, k: C, mass_ratio: f64) -> Self {
        let scale = crate::units::CONSTANTS.hbar2_over_2m(mass_ratio);
        let e = scale * k * k;
        Self { index, k, energy: e.re, width: -2.0 * e.im }
    }

    pub fn a(&self) -> f64 {
        self.k.re
    }

    pub fn b(&self) -> f64 {
        -self.k.im
    }

    /// Third-quadrant partner -k_n*.
    pub fn mirror_k(&self) -> C {
        -self.k.conj()
    }

    /// ℏ/Γ in fs.
    pub fn lifetime(&self) -> f64 {
        crate::units::CONSTANTS.hbar / self.width
    }
}

/// |t|² peak on the real energy axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionPeak {
    pub energy: f64,
    pub height: f64,
    /// Full width at half maximum, meV.
    pub fwhm: f64,
}

fn scan_points(e_min: f64, e_max: f64) -> usize {
    (((e_max - e_min) / 0.005) as usize).clamp(4001, 400_001)
}

/// Local maxima of |t(E)|² inside (e_min, e_max).
pub fn transmission_peaks(profile: &PotentialProfile, e_min: f64, e_max: f64) -> Result<Vec<TransmissionPeak>> {
    if !(e_min > 0.0 && e_max > e_min) {
        return Err(Error::InvalidParameter(format!("bad energy range {e_min}..{e_max} meV")));
    }
    if !profile.has_barriers() {
        return Ok(Vec::new());
    }
    let n = scan_points(e_min, e_max);
    let de = (e_max - e_min) / (n - 1) as f64;
    let es: Vec<f64> = (0..n).map(|i| e_min + de * i as f64).collect();
    let ts = es.iter().map(|&e| transmission_probability(profile, e)).collect::<Result<Vec<_>>>()?;

    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        if !(ts[i] > ts[i - 1] && ts[i] >= ts[i + 1]) {
            continue;
        }
        // parabola through the three samples
        let (y0, y1, y2) = (ts[i - 1], ts[i], ts[i + 1]);
        let curv = y0 - 2.0 * y1 + y2;
        let shift = if curv < 0.0 { 0.5 * (y0 - y2) / curv } else { 0.0 };
        let energy = es[i] + shift * de;
        let height = y1 - 0.25 * (y0 - y2) * shift;
        let half = 0.5 * height;
        let crossing = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
            let mut prev = i;
            for j in range {
                if ts[j] > ts[prev] && ts[prev] > half {
                    return None;
                }
                if ts[j] <= half {
                    let frac = (ts[prev] - half) / (ts[prev] - ts[j]);
                    return Some(es[prev] + frac * (es[j] - es[prev]));
                }
                prev = j;
            }
            None
        };
        let left = crossing(&mut (0..i).rev());
        let right = crossing(&mut (i + 1..n));
        let fwhm = match (left, right) {
            (Some(l), Some(r)) => r - l,
            // Lorentzian curvature: |t|''(E0) = -8 T0 / Γ²
            _ if curv < 0.0 => (-8.0 * height * de * de / curv).sqrt(),
            _ => continue,
        };
        peaks.push(TransmissionPeak { energy, height, fwhm });
    }
    Ok(peaks)
}

/// Newton seeds from the real-axis |t|² peaks: k(E_peak) - i·(half-width in k).
pub fn locate_pole_seeds(profile: &PotentialProfile, e_min: f64, e_max: f64) -> Result<Vec<C>> {
    if !profile.has_barriers() {
        return Ok(Vec::new());
    }
    let cap = 4.0 * profile.max_height();
    if !(e_min > 0.0 && e_max <= cap && e_max > e_min) {
        return Err(Error::InvalidParameter(format!(
            "seed range {e_min}..{e_max} meV must lie inside (0, {cap}] meV"
        )));
    }
    let mu = profile.mass_ratio();
    transmission_peaks(profile, e_min, e_max)?
        .into_iter()
        .map(|p| {
            let k = wavenumber_from_energy(p.energy, mu)?;
            // dE/dk = 2(ℏ²/2m)k, so a width Γ in energy is Γ/(2(ℏ²/2m)k) in k
            let half_width = 0.5 * p.fwhm / (2.0 * profile.kinetic_scale() * k);
            Ok(C::new(k, -half_width))
        })
        .collect()
}

/// T22(q) · exp(S(q) - reference): T22 up to a fixed positive factor.
fn denominator(profile: &PotentialProfile, q: C, reference: f64) -> Result<C> {
    let tm = transfer_matrix(profile, q)?;
    Ok(tm.scaled[1][1] * (tm.log_scale - reference).exp())
}

fn newton(profile: &PotentialProfile, seed: C) -> Result<C> {
    let mut q = seed;
    for _ in 0..MAX_NEWTON_ITERATIONS {
        let reference = transfer_matrix(profile, q)?.log_scale;
        let f = denominator(profile, q, reference)?;
        let h = DERIVATIVE_STEP;
        let df = (denominator(profile, q + h, reference)? - denominator(profile, q - h, reference)?) / (2.0 * h);
        if df.norm() == 0.0 || !df.is_finite() {
            return Err(Error::Convergence { iterations: 0, last: q });
        }
        let step = f / df;
        q -= step;
        if !q.is_finite() || q.norm() > 1e3 {
            return Err(Error::Convergence { iterations: 0, last: q });
        }
        if step.norm() < POLE_TOLERANCE {
            return Ok(q);
        }
    }
    Err(Error::Convergence { iterations: MAX_NEWTON_ITERATIONS, last: q })
}

/// Newton on T22 from `seed` (fourth quadrant).
pub fn refine_pole(profile: &PotentialProfile, seed: C) -> Result<ResonancePole> {
    if !(seed.re > 0.0 && seed.im < 0.0) {
        return Err(Error::Domain(format!("seed {seed} is not in the fourth quadrant")));
    }
    let k = newton(profile, seed)?;
    if !(k.re > 0.0 && k.im < 0.0) {
        return Err(Error::Domain(format!("Newton converged to {k}, outside the fourth quadrant")));
    }
    Ok(ResonancePole::from_wavenumber(0, k, profile.mass_ratio()))
}

/// Same iteration without the quadrant guard, e.g. for mirror poles.
pub fn refine_root(profile: &PotentialProfile, seed: C) -> Result<C> {
    newton(profile, seed)
}

/// |1/t(k)| = |T22 e^{ikL}|.
pub fn pole_residual(profile: &PotentialProfile, k: C) -> Result<f64> {
    let tm = transfer_matrix(profile, k)?;
    Ok((tm.scaled[1][1] * (tm.log_scale + I * k * profile.length()).exp()).norm())
}

/// dT22/dk from a 32-point Cauchy integral on a circle of radius `radius`.
pub fn denominator_derivative(profile: &PotentialProfile, k: C, radius: f64) -> Result<C> {
    const N: usize = 32;
    let mut acc = C::new(0.0, 0.0);
    for j in 0..N {
        let w = C::from_polar(1.0, 2.0 * PI * j as f64 / N as f64);
        acc += transfer_matrix(profile, k + radius * w)?.denominator() / w;
    }
    Ok(acc / (N as f64 * radius))
}

fn sinc(z: C) -> C {
    if z.norm() < 0.5 {
        let z2 = z * z;
        let mut term = C::new(1.0, 0.0);
        let mut sum = term;
        for n in 1..=8 {
            term = -term * z2 / ((2 * n) * (2 * n + 1)) as f64;
            sum += term;
        }
        sum
    } else {
        z.sin() / z
    }
}

// (1 - sinc z) / z²
fn sinc_defect(z: C) -> C {
    if z.norm() < 1.0 {
        let z2 = z * z;
        let mut term = C::new(1.0 / 6.0, 0.0);
        let mut sum = term;
        for n in 2..=12 {
            term = -term * z2 / ((2 * n) * (2 * n + 1)) as f64;
            sum += term;
        }
        sum
    } else {
        (1.0 - z.sin() / z) / (z * z)
    }
}

/// ∫₀ᵈ u² ds for u(s) = u0 cos κs + u0' sin κs / κ.
fn segment_square_integral(u0: C, du0: C, kappa2: C, d: f64) -> C {
    let kappa = kappa2.sqrt();
    let z = 2.0 * kappa * d;
    let s1 = sinc(kappa * d);
    u0 * u0 * (0.5 * d) * (1.0 + sinc(z)) + u0 * du0 * d * d * s1 * s1 + du0 * du0 * 2.0 * d * d * d * sinc_defect(z)
}

/// Resonant eigenfunction at a pole, stored as (u, u') at each interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GamowState {
    pub k: C,
    edges: Vec<f64>,
    kappa2: Vec<C>,
    values: Vec<(C, C)>,
    /// |normalisation integral - 1| after scaling.
    pub normalization_residual: f64,
}

impl GamowState {
    pub fn u0(&self) -> C {
        self.values[0].0
    }

    pub fn u_l(&self) -> C {
        self.values[self.values.len() - 1].0
    }

    pub fn length(&self) -> f64 {
        self.edges[self.edges.len() - 1]
    }

    /// (u, u') at x; outside [0, L] the outgoing continuation.
    pub fn state(&self, x: f64) -> (C, C) {
        let l = self.length();
        if x < 0.0 {
            let v = self.u0() * (-I * self.k * x).exp();
            return (v, -I * self.k * v);
        }
        if x > l {
            let v = self.u_l() * (I * self.k * (x - l)).exp();
            return (v, I * self.k * v);
        }
        let j = self.edges[1..].iter().position(|&e| x <= e).unwrap_or(self.kappa2.len() - 1);
        Propagator::new(self.kappa2[j], x - self.edges[j]).apply(self.values[j])
    }

    pub fn value(&self, x: f64) -> C {
        self.state(x).0
    }

    /// u_{-n}(x) = u_n(x)*.
    pub fn mirror_value(&self, x: f64) -> C {
        self.value(x).conj()
    }

    /// Amplitudes of the incoming waves e^{+ikx} (left) and e^{-ik(x-L)}
    /// (right), relative to |u| at the same edge.
    pub fn incoming_amplitudes(&self) -> (f64, f64) {
        let (u0, du0) = self.values[0];
        let (ul, dul) = self.values[self.values.len() - 1];
        let ik = I * self.k;
        let left = 0.5 * (u0 + du0 / ik);
        let right = 0.5 * (ul - dul / ik);
        (left.norm() / u0.norm(), right.norm() / ul.norm())
    }

    /// Plane-wave coefficients (A_j, B_j) of u = A e^{iκ(x-x_j)} + B e^{-iκ(x-x_j)}
    /// per segment, with the principal κ_j.
    pub fn segment_coefficients(&self) -> Vec<(C, C)> {
        self.values
            .iter()
            .zip(&self.kappa2)
            .map(|(&(u, du), &k2)| {
                let kappa = k2.sqrt();
                if kappa.norm() == 0.0 {
                    return (u, C::new(0.0, 0.0));
                }
                (0.5 * (u + du / (I * kappa)), 0.5 * (u - du / (I * kappa)))
            })
            .collect()
    }

    fn normalization_integral(&self) -> C {
        let mut total = C::new(0.0, 0.0);
        for j in 0..self.kappa2.len() {
            let (u, du) = self.values[j];
            total += segment_square_integral(u, du, self.kappa2[j], self.edges[j + 1] - self.edges[j]);
        }
        total + I * (self.u0() * self.u0() + self.u_l() * self.u_l()) / (2.0 * self.k)
    }
}

/// Normalised Gamow state at a refined pole.
pub fn gamow_state(profile: &PotentialProfile, pole: &ResonancePole) -> Result<GamowState> {
    let k = pole.k;
    let edges = profile.interfaces();
    let kappa2 = segment_kappa2(profile, k);
    let mut values = Vec::with_capacity(edges.len());
    let mut v = (C::new(1.0, 0.0), -I * k);
    values.push(v);
    for (j, seg) in profile.segments().iter().enumerate() {
        v = Propagator::new(kappa2[j], seg.width).apply(v);
        values.push(v);
    }
    let mut state = GamowState { k, edges, kappa2, values, normalization_residual: f64::NAN };
    let norm2 = state.normalization_integral();
    if !(norm2.is_finite() && norm2.norm() > 1e-250) {
        return Err(Error::Degenerate(format!("normalisation integral {norm2} at k = {k}")));
    }
    let mut scale = 1.0 / norm2.sqrt();
    if (scale * state.values[0].0).re < 0.0 {
        scale = -scale;
    }
    for v in &mut state.values {
        v.0 *= scale;
        v.1 *= scale;
    }
    state.normalization_residual = (state.normalization_integral() - 1.0).norm();
    Ok(state)
}

/// (φ_n(x, k), T_n) = (2k u(0)u(x)/(k² - k_n²), φ_n(L, k) e^{-ik_n L}).
pub fn expansion_coefficients(state: &GamowState, pole: &ResonancePole, k: f64, x: f64) -> (C, C) {
    let kn = pole.k;
    let factor = 2.0 * k * state.u0() / (k * k - kn * kn);
    let phi = factor * state.value(x);
    let tn = factor * state.u_l() * (-I * kn * state.length()).exp();
    (phi, tn)
}

/// The same pair for the mirror pole -k_n* with u_{-n} = u_n*.
pub fn mirror_expansion_coefficients(state: &GamowState, pole: &ResonancePole, k: f64, x: f64) -> (C, C) {
    let kn = pole.mirror_k();
    let factor = 2.0 * k * state.u0().conj() / (k * k - kn * kn);
    let phi = factor * state.mirror_value(x);
    let tn = factor * state.u_l().conj() * (-I * kn * state.length()).exp();
    (phi, tn)
}

/// |i u(0)u(L) T22'(k_n) - 1|: the normalisation must make the residue of t exact.
pub fn residue_residual(profile: &PotentialProfile, state: &GamowState) -> Result<f64> {
    let radius = (0.25 * state.k.im.abs()).min(1e-2);
    let d = denominator_derivative(profile, state.k, radius)?;
    Ok((I * state.u0() * state.u_l() * d - 1.0).norm())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonantTerm {
    pub pole: ResonancePole,
    pub state: GamowState,
}

/// First N fourth-quadrant poles (by ε_n) with their states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleFamily {
    terms: Vec<ResonantTerm>,
}

// Im k seeds for the complex sweep.
const SEED_DEPTHS: [f64; 9] = [0.001, 0.02, 0.08, 0.15, 0.25, 0.35, 0.5, 0.7, 1.0];
const SEED_STEP: f64 = 0.04;
const SWEEP_CHUNK: f64 = 1.0;
const SWEEP_LIMIT: f64 = 60.0;

impl PoleFamily {
    /// Sweeps Newton seeds over the fourth quadrant, widening Re k in chunks
    /// until the lowest `count` poles are bracketed with margin.
    pub fn build(profile: &PotentialProfile, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidParameter("pole count must be at least 1".into()));
        }
        let mut found: Vec<C> = Vec::new();
        let mut a_lo = 0.05;
        loop {
            let a_hi = a_lo + SWEEP_CHUNK;
            let mut a = a_lo;
            while a < a_hi {
                for &b in &SEED_DEPTHS {
                    if let Ok(p) = refine_pole(profile, C::new(a, -b)) {
                        if found.iter().all(|k| (k - p.k).norm() >= DEDUP_TOLERANCE) {
                            found.push(p.k);
                        }
                    }
                }
                a += SEED_STEP;
            }
            a_lo = a;
            let bracketed = found.iter().filter(|k| k.re < a_lo - 0.25).count();
            if bracketed >= count {
                break;
            }
            if a_lo > SWEEP_LIMIT {
                return Err(Error::Numerical(format!(
                    "only {} poles found below Re k = {SWEEP_LIMIT} nm^-1, {count} requested",
                    found.len()
                )));
            }
        }
        let mu = profile.mass_ratio();
        let mut poles: Vec<ResonancePole> =
            found.into_iter().map(|k| ResonancePole::from_wavenumber(0, k, mu)).collect();
        poles.sort_by(|p, q| p.energy.total_cmp(&q.energy));
        poles.truncate(count);
        let terms = poles
            .into_iter()
            .enumerate()
            .map(|(i, mut pole)| {
                pole.index = i + 1;
                let state = gamow_state(profile, &pole)?;
                Ok(ResonantTerm { pole, state })
            })
            .collect::<Result<Vec<_>>>()?;
        log::debug!("pole family: {} poles, top ε = {:.3} meV", terms.len(), terms.last().map_or(0.0, |t| t.pole.energy));
        Ok(Self { terms })
    }

    pub fn from_terms(mut terms: Vec<ResonantTerm>) -> Self {
        terms.sort_by(|a, b| a.pole.energy.total_cmp(&b.pole.energy));
        Self { terms }
    }

    pub fn terms(&self) -> &[ResonantTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Pole with the given 1-based index.
    pub fn get(&self, index: usize) -> Option<&ResonantTerm> {
        self.terms.iter().find(|t| t.pole.index == index)
    }

    /// First `n` poles only.
    pub fn truncated(&self, n: usize) -> Self {
        Self { terms: self.terms.iter().take(n).cloned().collect() }
    }

    /// min |ε_{n±1} - ε_n| / Γ_n over the neighbours present in the family.
    pub fn isolation_ratio(&self, position: usize) -> Option<f64> {
        let e = self.terms.get(position)?.pole;
        let mut gaps = Vec::new();
        if position > 0 {
            gaps.push((e.energy - self.terms[position - 1].pole.energy).abs());
        }
        if let Some(next) = self.terms.get(position + 1) {
            gaps.push((next.pole.energy - e.energy).abs());
        }
        gaps.into_iter().reduce(f64::min).map(|g| g / e.width)
    }
}

/// Energy of a real wavenumber on this profile, meV.
pub fn energy_of(profile: &PotentialProfile, k: f64) -> f64 {
    energy_from_wavenumber(k, profile.mass_ratio())
}
