//! C ABI over `qshutter`.
//!
//! Objects cross the boundary as opaque handles created by `qs_*_new`-style
//! constructors and released with the matching `qs_*_free`. Every call
//! returns a [`QsStatus`]; results come back through out-pointers. On failure
//! the message is kept per thread and can be fetched with
//! [`qs_last_error_message`]. Panics never unwind into the caller.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use qshutter::resonances::PoleFamily;
use qshutter::scattering::transmission_probability;
use qshutter::special::{faddeeva, moshinsky_m};
use qshutter::transient::{time_scales, IncidenceSpec, TransientSeries};
use qshutter::units::{build_double_barrier, canonical_double_barrier, PotentialProfile};
use qshutter::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Overflow = 4,
    OutOfValidity = 5,
    Numerical = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QsComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for QsComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<QsComplex> for Complex64 {
    fn from(z: QsComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// One resonance pole. Energies and widths in meV, k in nm⁻¹.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QsPole {
    pub index: usize,
    pub k: QsComplex,
    pub energy: f64,
    pub width: f64,
    pub lifetime: f64,
}

/// Buildup time scales in fs. `omega` and `tau_r` are NaN at exact resonance.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QsTimeScales {
    pub detuning: f64,
    pub omega: f64,
    pub tau_r: f64,
    pub tau_l: f64,
    pub tau_b: f64,
    pub crossover: bool,
}

/// Opaque potential profile.
pub struct QsProfile(PotentialProfile);
/// Opaque set of poles with their resonant states.
pub struct QsPoleFamily(PoleFamily);
/// Opaque transient solution for one incidence energy.
pub struct QsSeries(TransientSeries);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> QsStatus {
    match err {
        Error::InvalidParameter(_) | Error::Config(_) | Error::SingularInput(_) => QsStatus::InvalidArgument,
        Error::Domain(_) | Error::SingularTime { .. } => QsStatus::Domain,
        Error::Overflow { .. } => QsStatus::Overflow,
        Error::OutOfValidity { .. } => QsStatus::OutOfValidity,
        _ => QsStatus::Numerical,
    }
}

fn guard<F>(f: F) -> QsStatus
where
    F: FnOnce() -> Result<(), Error>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QsStatus::Ok,
        Ok(Err(e)) => {
            let s = status_of(&e);
            set_error(e.to_string());
            s
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            QsStatus::Panic
        }
    }
}

struct NullPointer(&'static str);

impl From<NullPointer> for Error {
    fn from(n: NullPointer) -> Self {
        Error::InvalidParameter(format!("null pointer: {}", n.0))
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, NullPointer> {
    p.as_ref().ok_or(NullPointer(name))
}

fn check_null<T>(p: *const T, name: &'static str) -> Option<QsStatus> {
    if p.is_null() {
        set_error(format!("null pointer: {name}"));
        Some(QsStatus::NullPointer)
    } else {
        None
    }
}

macro_rules! require {
    ($($p:ident),+) => {
        $( if let Some(s) = check_null($p as *const _, stringify!($p)) { return s; } )+
    };
}

/// Copies the last error of this thread into `buf` (NUL-terminated, truncated
/// to `len`). Returns the full message length excluding the NUL, 0 if none.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn qs_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Barrier / well / barrier profile. Heights in meV, widths in nm.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle to free with [`qs_profile_free`].
#[no_mangle]
pub unsafe extern "C" fn qs_profile_double_barrier(
    barrier_height: f64,
    barrier_width: f64,
    well_width: f64,
    mass_ratio: f64,
    out: *mut *mut QsProfile,
) -> QsStatus {
    require!(out);
    guard(|| {
        let p = build_double_barrier(barrier_height, barrier_width, well_width, mass_ratio)?;
        *out = Box::into_raw(Box::new(QsProfile(p)));
        Ok(())
    })
}

/// The 230 meV / 5 nm / 5 nm / μ = 0.067 reference structure.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qs_profile_canonical(out: *mut *mut QsProfile) -> QsStatus {
    require!(out);
    guard(|| {
        *out = Box::into_raw(Box::new(QsProfile(canonical_double_barrier())));
        Ok(())
    })
}

/// # Safety
/// `profile` must be null or a handle from a `qs_profile_*` constructor, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn qs_profile_free(profile: *mut QsProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qs_profile_length(profile: *const QsProfile, out: *mut f64) -> QsStatus {
    require!(profile, out);
    guard(|| {
        *out = deref(profile, "profile")?.0.length();
        Ok(())
    })
}

/// |t(E)|² at energy E in meV.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qs_transmission(profile: *const QsProfile, energy: f64, out: *mut f64) -> QsStatus {
    require!(profile, out);
    guard(|| {
        *out = transmission_probability(&deref(profile, "profile")?.0, energy)?;
        Ok(())
    })
}

/// Lowest `count` poles of the profile.
///
/// # Safety
/// Pointers must be valid; free the result with [`qs_pole_family_free`].
#[no_mangle]
pub unsafe extern "C" fn qs_pole_family_build(
    profile: *const QsProfile,
    count: usize,
    out: *mut *mut QsPoleFamily,
) -> QsStatus {
    require!(profile, out);
    guard(|| {
        let f = PoleFamily::build(&deref(profile, "profile")?.0, count)?;
        *out = Box::into_raw(Box::new(QsPoleFamily(f)));
        Ok(())
    })
}

/// # Safety
/// `family` must be null or a handle from [`qs_pole_family_build`], freed at most once.
#[no_mangle]
pub unsafe extern "C" fn qs_pole_family_free(family: *mut QsPoleFamily) {
    if !family.is_null() {
        drop(Box::from_raw(family));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qs_pole_family_len(family: *const QsPoleFamily, out: *mut usize) -> QsStatus {
    require!(family, out);
    guard(|| {
        *out = deref(family, "family")?.0.len();
        Ok(())
    })
}

/// Pole at 0-based `position` (ordered by energy).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qs_pole_family_get(family: *const QsPoleFamily, position: usize, out: *mut QsPole) -> QsStatus {
    require!(family, out);
    guard(|| {
        let f = &deref(family, "family")?.0;
        let term = f
            .terms()
            .get(position)
            .ok_or_else(|| Error::InvalidParameter(format!("position {position} out of range 0..{}", f.len())))?;
        let p = term.pole;
        *out = QsPole { index: p.index, k: p.k.into(), energy: p.energy, width: p.width, lifetime: p.lifetime() };
        Ok(())
    })
}

/// Time scales for incidence at `energy` near pole `pole_index` (1-based).
/// The first `tau_m_len` maxima times are written to `tau_m` when non-null.
///
/// # Safety
/// `family` and `out` must be valid; `tau_m` null or `tau_m_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qs_time_scales(
    family: *const QsPoleFamily,
    pole_index: usize,
    energy: f64,
    tau_m: *mut f64,
    tau_m_len: usize,
    out: *mut QsTimeScales,
) -> QsStatus {
    require!(family, out);
    guard(|| {
        let f = &deref(family, "family")?.0;
        let pole = f.get(pole_index).ok_or_else(|| Error::InvalidParameter(format!("no pole with index {pole_index}")))?.pole;
        let s = time_scales(&pole, energy, tau_m_len);
        if !tau_m.is_null() {
            for i in 0..tau_m_len {
                *tau_m.add(i) = s.tau_m.get(i).copied().unwrap_or(f64::NAN);
            }
        }
        *out = QsTimeScales {
            detuning: s.detuning,
            omega: s.omega.unwrap_or(f64::NAN),
            tau_r: s.tau_r.unwrap_or(f64::NAN),
            tau_l: s.tau_l,
            tau_b: s.tau_b,
            crossover: s.crossover,
        };
        Ok(())
    })
}

/// Transient solution at incidence energy `energy` (meV); `pole_index` names
/// the reference pole for detuning-based quantities.
///
/// # Safety
/// Pointers must be valid; free the result with [`qs_series_free`].
#[no_mangle]
pub unsafe extern "C" fn qs_series_new(
    profile: *const QsProfile,
    family: *const QsPoleFamily,
    energy: f64,
    pole_index: usize,
    out: *mut *mut QsSeries,
) -> QsStatus {
    require!(profile, family, out);
    guard(|| {
        let p = &deref(profile, "profile")?.0;
        let f = &deref(family, "family")?.0;
        let inc = IncidenceSpec::absolute(energy, p.mass_ratio(), pole_index)?;
        *out = Box::into_raw(Box::new(QsSeries(TransientSeries::new(p, f, inc)?)));
        Ok(())
    })
}

/// # Safety
/// `series` must be null or a handle from [`qs_series_new`], freed at most once.
#[no_mangle]
pub unsafe extern "C" fn qs_series_free(series: *mut QsSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Ψ(x, t) for x ≥ 0 (nm, fs).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qs_series_psi(series: *const QsSeries, x: f64, t: f64, out: *mut QsComplex) -> QsStatus {
    require!(series, out);
    guard(|| {
        *out = deref(series, "series")?.0.psi(x, t)?.into();
        Ok(())
    })
}

/// |Ψ/φ_k|² inside the structure, |Ψ/T_k|² beyond it.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qs_series_density(series: *const QsSeries, x: f64, t: f64, out: *mut f64) -> QsStatus {
    require!(series, out);
    guard(|| {
        let s = &deref(series, "series")?.0;
        *out = s.normalized_density(x, s.psi(x, t)?)?;
        Ok(())
    })
}

/// Faddeeva function w(z) on the whole plane.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qs_faddeeva(z: QsComplex, out: *mut QsComplex) -> QsStatus {
    require!(out);
    guard(|| {
        *out = faddeeva(z.into())?.into();
        Ok(())
    })
}

/// Moshinsky function M(y) = ½ e^{y²} erfc(y).
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qs_moshinsky(y: QsComplex, out: *mut QsComplex) -> QsStatus {
    require!(out);
    guard(|| {
        *out = moshinsky_m(y.into())?.into();
        Ok(())
    })
}
