//! Faddeeva and Moshinsky functions.
//!
//! `faddeeva` follows the region split of Poppe and Wijers (ACM TOMS 680):
//! a Taylor series near the origin, Gautschi's truncated continued fraction
//! with a Laplace-type correction in the middle ring, and the plain Laplace
//! continued fraction outside the ellipse (x/6.3)² + (y/4.4)² = 1. The lower
//! half-plane is reached through w(z) = 2exp(-z²) - w(-z).

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::CONSTANTS;

/// Earliest time at which the transient solutions are sampled, fs.
pub const T_MIN: f64 = 1e-3;

/// Largest Re(y²) for which exp(y²) is still formed.
pub const EXP_LIMIT: f64 = 700.0;

const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

// Squared radius of the power-series ellipse in the scaled (x/6.3, y/4.4) plane.
const SERIES_RHO2: f64 = 0.085_264;

// Beyond this modulus the leading asymptotic terms are exact to f64.
const ASYMPTOTIC_MODULUS: f64 = 1e8;

/// w(z) = exp(-z²) erfc(-iz).
pub fn faddeeva(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("faddeeva: non-finite argument {z}")));
    }
    if z.im >= 0.0 {
        return Ok(faddeeva_upper(z.re, z.im));
    }
    let re_exponent = z.im * z.im - z.re * z.re;
    if re_exponent > EXP_LIMIT {
        return Err(Error::Overflow { re_y2: re_exponent });
    }
    Ok(2.0 * (-z * z).exp() - faddeeva_upper(-z.re, -z.im))
}

fn faddeeva_upper(x: f64, y: f64) -> Complex64 {
    debug_assert!(y >= 0.0);
    let z = Complex64::new(x, y);
    let modulus = z.norm();
    if modulus > ASYMPTOTIC_MODULUS {
        let inv = 1.0 / z;
        return Complex64::i() * inv / PI.sqrt() * (1.0 + 0.5 * inv * inv);
    }

    let xabs = x.abs();
    let yabs = y;
    let xs = xabs / 6.3;
    let ys = yabs / 4.4;
    let rho2 = xs * xs + ys * ys;
    let xquad = xabs * xabs - yabs * yabs;
    let yquad = 2.0 * xabs * yabs;

    let (u, v) = if rho2 < SERIES_RHO2 {
        // Taylor series of erf around 0, then w = exp(-z²)(1 - erf(-iz)).
        let rho = (1.0 - 0.85 * ys) * rho2.sqrt();
        let n = (6.0 + 72.0 * rho).round() as i32;
        let mut j = 2 * n + 1;
        let mut xsum = 1.0 / j as f64;
        let mut ysum = 0.0;
        for i in (1..=n).rev() {
            j -= 2;
            let fi = i as f64;
            let xaux = (xsum * xquad - ysum * yquad) / fi;
            ysum = (xsum * yquad + ysum * xquad) / fi;
            xsum = xaux + 1.0 / j as f64;
        }
        let u1 = 1.0 - TWO_OVER_SQRT_PI * (xsum * yabs + ysum * xabs);
        let v1 = TWO_OVER_SQRT_PI * (xsum * xabs - ysum * yabs);
        let d = (-xquad).exp();
        let u2 = d * yquad.cos();
        let v2 = -d * yquad.sin();
        (u1 * u2 - v1 * v2, u1 * v2 + v1 * u2)
    } else {
        let (h, kapn, nu) = if rho2 > 1.0 {
            let rho = rho2.sqrt();
            (0.0, 0, (3.0 + 1442.0 / (26.0 * rho + 77.0)) as i32)
        } else {
            let rho = (1.0 - ys) * (1.0 - rho2).sqrt();
            (1.88 * rho, (7.0 + 34.0 * rho).round() as i32, (16.0 + 26.0 * rho).round() as i32)
        };
        let h2 = 2.0 * h;
        let mut ql = if h > 0.0 { h2.powi(kapn) } else { 0.0 };
        let (mut rx, mut ry, mut sx, mut sy) = (0.0, 0.0, 0.0, 0.0);
        for n in (0..=nu).rev() {
            let np1 = (n + 1) as f64;
            let tx = yabs + h + np1 * rx;
            let ty = xabs - np1 * ry;
            let c = 0.5 / (tx * tx + ty * ty);
            rx = c * tx;
            ry = c * ty;
            if h > 0.0 && n <= kapn {
                let tx = ql + sx;
                sx = rx * tx - ry * sy;
                sy = ry * tx + rx * sy;
                ql /= h2;
            }
        }
        let (mut u, v) = if h == 0.0 {
            (TWO_OVER_SQRT_PI * rx, TWO_OVER_SQRT_PI * ry)
        } else {
            (TWO_OVER_SQRT_PI * sx, TWO_OVER_SQRT_PI * sy)
        };
        if yabs == 0.0 {
            u = (-xabs * xabs).exp();
        }
        (u, v)
    };
    if x < 0.0 {
        Complex64::new(u, -v)
    } else {
        Complex64::new(u, v)
    }
}

/// M(y) = ½ exp(y²) erfc(y) = ½ w(iy).
pub fn moshinsky_m(y: Complex64) -> Result<Complex64> {
    if !(y.re.is_finite() && y.im.is_finite()) {
        return Err(Error::Domain(format!("moshinsky: non-finite argument {y}")));
    }
    if y.re >= 0.0 {
        return Ok(0.5 * faddeeva_upper(-y.im, y.re));
    }
    // Reflection; exp(y²) is the only piece that can blow up.
    let y2 = y * y;
    if y2.re > EXP_LIMIT {
        return Err(Error::Overflow { re_y2: y2.re });
    }
    Ok(y2.exp() - 0.5 * faddeeva_upper(y.im, -y.re))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    /// Argument taken at x = 0 whatever x is passed.
    Internal,
    External,
}

/// y_q(x, t) = exp(-iπ/4) √(m/2ℏt) (x - ℏqt/m) together with its inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoshinskyArgument {
    pub y: Complex64,
    pub x: f64,
    pub t: f64,
    pub q: Complex64,
    pub mass_ratio: f64,
}

impl MoshinskyArgument {
    pub fn new(x: f64, t: f64, q: Complex64, mass_ratio: f64, frame: Frame) -> Result<Self> {
        if !(t >= T_MIN) {
            return Err(Error::SingularTime { t, t_min: T_MIN });
        }
        let x = match frame {
            Frame::Internal => 0.0,
            Frame::External => x,
        };
        let hbar_over_m = CONSTANTS.hbar_over_m(mass_ratio);
        let scale = (1.0 / (2.0 * hbar_over_m * t)).sqrt();
        let rot = Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2);
        let y = rot * scale * (x - hbar_over_m * q * t);
        Ok(Self { y, x, t, q, mass_ratio })
    }

    pub fn value(&self) -> Result<Complex64> {
        moshinsky_m(self.y)
    }
}

pub fn moshinsky_argument(x: f64, t: f64, q: Complex64, mass_ratio: f64, frame: Frame) -> Result<MoshinskyArgument> {
    MoshinskyArgument::new(x, t, q, mass_ratio, frame)
}

/// Free evolution of the cut-off wave Θ(-x)exp(iqx):
/// exp(imx²/2ℏt) M(y_q(x, t)).
pub fn shutter_wave(x: f64, q: Complex64, t: f64, mass_ratio: f64) -> Result<Complex64> {
    let arg = MoshinskyArgument::new(x, t, q, mass_ratio, Frame::External)?;
    Ok(free_phase(x, t, mass_ratio) * arg.value()?)
}

/// exp(imx²/2ℏt).
pub fn free_phase(x: f64, t: f64, mass_ratio: f64) -> Complex64 {
    let hbar_over_m = CONSTANTS.hbar_over_m(mass_ratio);
    Complex64::from_polar(1.0, x * x / (2.0 * hbar_over_m * t))
}

/// Rows of (x, y, w) on a rectangular grid, for accuracy maps.
pub fn faddeeva_grid(x_range: (f64, f64), y_range: (f64, f64), nx: usize, ny: usize) -> Vec<(f64, f64, Result<Complex64>)> {
    let step = |lo: f64, hi: f64, n: usize, i: usize| if n > 1 { lo + (hi - lo) * i as f64 / (n - 1) as f64 } else { lo };
    let mut out = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        let x = step(x_range.0, x_range.1, nx, i);
        for j in 0..ny {
            let y = step(y_range.0, y_range.1, ny, j);
            out.push((x, y, faddeeva(Complex64::new(x, y))));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn w_at_origin() {
        assert_eq!(faddeeva(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn w_on_imaginary_axis() {
        // e·erfc(1)
        let w = faddeeva(c(0.0, 1.0)).unwrap();
        assert!(rel(w, c(0.427_583_576_155_807, 0.0)) < 1e-14, "{w}");
    }

    #[test]
    fn w_asymptote() {
        // i/(√π z) · (1 + 1/(2z²) + 3/(4z⁴) + 15/(8z⁶))
        let z = c(0.0, 100.0);
        let u = 1.0 / (z * z);
        let series = Complex64::i() / (PI.sqrt() * z) * (1.0 + u * (0.5 + u * (0.75 + u * 1.875)));
        assert!(rel(faddeeva(z).unwrap(), series) < 1e-6);
        let lead = Complex64::i() / (PI.sqrt() * z);
        assert!(rel(faddeeva(z).unwrap(), lead) < 1e-4);
    }

    #[test]
    fn w_rejects_non_finite() {
        assert!(matches!(faddeeva(c(f64::NAN, 0.0)), Err(Error::Domain(_))));
        assert!(matches!(faddeeva(c(0.0, f64::INFINITY)), Err(Error::Domain(_))));
    }

    #[test]
    fn w_lower_half_overflow_is_reported() {
        assert!(matches!(faddeeva(c(0.0, -30.0)), Err(Error::Overflow { .. })));
    }

    #[test]
    fn w_huge_modulus() {
        let z = c(3e9, 4e9);
        let lead = Complex64::i() / (PI.sqrt() * z);
        assert!(rel(faddeeva(z).unwrap(), lead) < 1e-15);
    }

    #[test]
    fn m_at_origin() {
        assert_eq!(moshinsky_m(c(0.0, 0.0)).unwrap(), c(0.5, 0.0));
    }

    #[test]
    fn m_symmetry_example() {
        let y = c(0.3, -0.7);
        let lhs = moshinsky_m(y).unwrap() + moshinsky_m(-y).unwrap();
        assert!(rel(lhs, (y * y).exp()) < 1e-12);
    }

    #[test]
    fn m_decays_along_ray() {
        // M(y) ~ 1/(2√π y) · (1 - 1/(2y²) + 3/(4y⁴) - 15/(8y⁶))
        let series = |y: Complex64| {
            let u = 1.0 / (y * y);
            1.0 / (2.0 * PI.sqrt() * y) * (1.0 - u * (0.5 - u * (0.75 - u * 1.875)))
        };
        let mut last = f64::INFINITY;
        for r in [10.0, 20.0, 50.0, 200.0, 1000.0] {
            let y = Complex64::from_polar(r, PI / 8.0);
            let m = moshinsky_m(y).unwrap();
            assert!(m.norm() < last);
            last = m.norm();
            assert!(rel(m, series(y)) < 1e-6, "{r}: {}", rel(m, series(y)));
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn m_overflow_is_loud() {
        assert!(matches!(moshinsky_m(c(-30.0, 0.0)), Err(Error::Overflow { .. })));
    }

    #[test]
    fn argument_zero_on_classical_path() {
        let mu = 0.067;
        let k = 0.35;
        let t = 1000.0;
        let x = CONSTANTS.hbar_over_m(mu) * k * t;
        let a = MoshinskyArgument::new(x, t, c(k, 0.0), mu, Frame::External).unwrap();
        assert!(a.y.norm() < 1e-14);
    }

    #[test]
    fn internal_frame_ignores_x() {
        let q = c(0.37, -0.0012);
        let a = MoshinskyArgument::new(7.5, 300.0, q, 0.067, Frame::Internal).unwrap();
        let b = MoshinskyArgument::new(0.0, 300.0, q, 0.067, Frame::External).unwrap();
        assert_eq!(a.y, b.y);
    }

    #[test]
    fn argument_behind_front() {
        let k = crate::units::wavenumber_from_energy(74.97, 0.067).unwrap();
        let a = MoshinskyArgument::new(15.0, 2000.0, c(k, 0.0), 0.067, Frame::External).unwrap();
        assert!(a.y.re < 0.0);
    }

    #[test]
    fn argument_rejects_early_time() {
        let r = MoshinskyArgument::new(0.0, 1e-4, c(1.0, 0.0), 0.067, Frame::External);
        assert!(matches!(r, Err(Error::SingularTime { .. })));
    }

    #[test]
    fn derivative_identity() {
        // d/dy [exp(-y²) M(y)] = -exp(-y²)/√π, i.e. M' - 2yM = -1/√π
        let pts = [
            c(0.3, 0.1),
            c(-0.8, 0.4),
            c(1.7, -1.2),
            c(-2.2, -0.3),
            c(0.05, 2.5),
            c(3.1, 0.9),
            c(-0.4, -2.9),
            c(2.4, 2.4),
            c(-1.1, 1.9),
            c(0.9, -0.2),
            c(4.0, -3.0),
            c(-3.5, 0.2),
            c(0.0, -1.0),
            c(1.3, 3.3),
            c(-2.7, -2.6),
            c(0.6, 0.6),
            c(2.0, -4.2),
            c(-0.2, 4.4),
            c(3.9, 1.5),
            c(-4.1, -1.1),
        ];
        let m = |y: Complex64| moshinsky_m(y).unwrap();
        let h = 1e-5;
        for y in pts {
            let d = (m(y + h) - m(y - h)) / (2.0 * h) - 2.0 * y * m(y);
            assert!((d + 1.0 / PI.sqrt()).norm() < 1e-8 * (2.0 * y * m(y)).norm().max(1.0), "{y}: {d}");
            let g = |y: Complex64| (-y * y).exp() * m(y);
            let dg = (g(y + h) - g(y - h)) / (2.0 * h);
            let want = -(-y * y).exp() / PI.sqrt();
            assert!((dg - want).norm() < 1e-8 * want.norm().max(1.0), "{y}: {dg}");
        }
    }

    #[test]
    fn shutter_wave_long_time_limit() {
        // Deep behind the front the free wave is a plane wave.
        let mu = 0.067;
        let k = 0.35;
        let t = 5000.0;
        let x = 10.0;
        let psi = shutter_wave(x, c(k, 0.0), t, mu).unwrap();
        let energy = crate::units::energy_from_wavenumber(k, mu);
        let plane = Complex64::from_polar(1.0, k * x - energy * t / CONSTANTS.hbar);
        assert!((psi - plane).norm() < 2e-2);
    }

    #[test]
    fn grid_shape() {
        let g = faddeeva_grid((-1.0, 1.0), (0.0, 1.0), 3, 4);
        assert_eq!(g.len(), 12);
        assert_eq!((g[0].0, g[0].1), (-1.0, 0.0));
        assert_eq!((g[11].0, g[11].1), (1.0, 1.0));
    }

    proptest! {
        #[test]
        fn moshinsky_symmetry(r in 0.0f64..5.0, th in 0.0f64..(2.0 * PI)) {
            let y = Complex64::from_polar(r, th);
            let e = (y * y).exp();
            let s = moshinsky_m(y).unwrap() + moshinsky_m(-y).unwrap();
            // residual measured against the largest term in the identity
            let scale = e.norm().max(moshinsky_m(y).unwrap().norm()).max(moshinsky_m(-y).unwrap().norm());
            prop_assert!((s - e).norm() <= 1e-12 * scale);
        }

        #[test]
        fn w_conjugate_symmetry(x in -12.0f64..12.0, y in 0.0f64..12.0) {
            // w(-conj z) = conj w(z)
            let a = faddeeva(c(x, y)).unwrap();
            let b = faddeeva(c(-x, y)).unwrap();
            prop_assert!((a - b.conj()).norm() <= 1e-15 * a.norm());
        }
    }
}
