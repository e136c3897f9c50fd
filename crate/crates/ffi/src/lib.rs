//! C interface to the `leo-channel` model.
//!
//! A model is created with [`lc_model_new`] and released with
//! [`lc_model_free`]. Every other call returns an [`LcStatus`] and writes its
//! result through an out-pointer. After a failure,
//! [`lc_last_error_message`] returns a description of the error on the
//! calling thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use leo_channel::channel::{global_params, path_loss_proposition, scattering_function};
use leo_channel::distributions::{
    delay_cdf, delay_pdf, doppler_cdf, doppler_cdf_mixed, gain_cdf, gain_pdf, rayleigh_gain_cdf, JointGridSpec,
};
use leo_channel::propagation::{delay_range, gain_range, max_doppler};
use leo_channel::{CapModel, ChannelError, Mark, ShellConfig};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    NoVisibleSatellites = 3,
    Config = 4,
    Resolution = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Constellation shell parameters. Angles in degrees.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LcShell {
    pub earth_radius_m: f64,
    pub altitude_m: f64,
    pub sat_speed_mps: f64,
    pub carrier_hz: f64,
    pub inclination_deg: f64,
    pub n_sats: u32,
    pub n_per_orbit: u32,
    pub orbit_spacing_deg: f64,
}

impl From<LcShell> for ShellConfig {
    fn from(s: LcShell) -> Self {
        ShellConfig {
            earth_radius_m: s.earth_radius_m,
            altitude_m: s.altitude_m,
            sat_speed_mps: s.sat_speed_mps,
            carrier_hz: s.carrier_hz,
            inclination_rad: s.inclination_deg.to_radians(),
            n_sats: s.n_sats as usize,
            n_per_orbit: s.n_per_orbit as usize,
            orbit_spacing_rad: s.orbit_spacing_deg.to_radians(),
        }
    }
}

/// Global channel parameters.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LcSummary {
    pub path_loss_db: f64,
    pub mean_delay_s: f64,
    pub rms_delay_spread_s: f64,
    pub mean_doppler_hz: f64,
    pub rms_doppler_spread_hz: f64,
    pub channel_spread: f64,
    pub availability: f64,
    pub grid_mean_doppler_hz: f64,
}

/// Opaque model handle.
pub struct LcModel {
    inner: CapModel,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &ChannelError) -> LcStatus {
    match err {
        ChannelError::Domain(_) => LcStatus::Domain,
        ChannelError::NoVisibleSatellites { .. } => LcStatus::NoVisibleSatellites,
        ChannelError::Config(_) => LcStatus::Config,
        ChannelError::Resolution(_) => LcStatus::Resolution,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), (LcStatus, String)>>(f: F) -> LcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LcStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            LcStatus::Panic
        }
    }
}

fn channel_err(e: ChannelError) -> (LcStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (LcStatus, String) {
    (LcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn model_ref<'a>(model: *const LcModel) -> Result<&'a CapModel, (LcStatus, String)> {
    model.as_ref().map(|m| &m.inner).ok_or_else(|| null("model"))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), (LcStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Default shell: 3168 satellites at 550 km, 53 deg, 144 planes of 22.
#[no_mangle]
pub extern "C" fn lc_shell_default() -> LcShell {
    let s = ShellConfig::default();
    LcShell {
        earth_radius_m: s.earth_radius_m,
        altitude_m: s.altitude_m,
        sat_speed_mps: s.sat_speed_mps,
        carrier_hz: s.carrier_hz,
        inclination_deg: s.inclination_rad.to_degrees(),
        n_sats: s.n_sats as u32,
        n_per_orbit: s.n_per_orbit as u32,
        orbit_spacing_deg: s.orbit_spacing_rad.to_degrees(),
    }
}

/// Creates a model for a user at `latitude_deg` with elevation mask
/// `min_elevation_deg`. `shell` may be null for the default shell.
#[no_mangle]
pub unsafe extern "C" fn lc_model_new(
    shell: *const LcShell,
    latitude_deg: f64,
    min_elevation_deg: f64,
    out: *mut *mut LcModel,
) -> LcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let shell = shell.as_ref().map(|s| ShellConfig::from(*s)).unwrap_or_default();
        let inner = CapModel::from_degrees(shell, latitude_deg, min_elevation_deg).map_err(channel_err)?;
        out.write(Box::into_raw(Box::new(LcModel { inner })));
        Ok(())
    })
}

/// Releases a model. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn lc_model_free(model: *mut LcModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Copies the last error message of this thread into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length.
#[no_mangle]
pub unsafe extern "C" fn lc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

unsafe fn scalar(model: *const LcModel, out: *mut f64, f: impl FnOnce(&CapModel) -> f64) -> LcStatus {
    guard(|| {
        let m = model_ref(model)?;
        write(out, f(m))
    })
}

/// Probability that one satellite is visible.
#[no_mangle]
pub unsafe extern "C" fn lc_p_sat(model: *const LcModel, out: *mut f64) -> LcStatus {
    scalar(model, out, |m| m.p_sat())
}

/// Mean number of visible satellites.
#[no_mangle]
pub unsafe extern "C" fn lc_avg_visible(model: *const LcModel, out: *mut f64) -> LcStatus {
    scalar(model, out, |m| m.avg_visible())
}

/// Probability that at least one satellite is visible.
#[no_mangle]
pub unsafe extern "C" fn lc_availability(model: *const LcModel, out: *mut f64) -> LcStatus {
    scalar(model, out, |m| m.availability())
}

/// Largest Doppler shift over the visible cap (Hz).
#[no_mangle]
pub unsafe extern "C" fn lc_max_doppler(model: *const LcModel, out: *mut f64) -> LcStatus {
    scalar(model, out, |m| max_doppler(&m.shell, &m.user))
}

/// Distribution function of the gain.
#[no_mangle]
pub unsafe extern "C" fn lc_gain_cdf(model: *const LcModel, gain: f64, out: *mut f64) -> LcStatus {
    scalar(model, out, |m| gain_cdf(m, gain))
}

/// Density of the gain.
#[no_mangle]
pub unsafe extern "C" fn lc_gain_pdf(model: *const LcModel, gain: f64, out: *mut f64) -> LcStatus {
    scalar(model, out, |m| gain_pdf(m, gain))
}

/// Distribution function of the delay.
#[no_mangle]
pub unsafe extern "C" fn lc_delay_cdf(model: *const LcModel, delay_s: f64, out: *mut f64) -> LcStatus {
    scalar(model, out, |m| delay_cdf(m, delay_s))
}

/// Density of the delay.
#[no_mangle]
pub unsafe extern "C" fn lc_delay_pdf(model: *const LcModel, delay_s: f64, out: *mut f64) -> LcStatus {
    scalar(model, out, |m| delay_pdf(m, delay_s))
}

/// Doppler distribution with both marks equally likely.
#[no_mangle]
pub unsafe extern "C" fn lc_doppler_cdf_mixed(model: *const LcModel, doppler_hz: f64, out: *mut f64) -> LcStatus {
    scalar(model, out, |m| doppler_cdf_mixed(m, doppler_hz))
}

/// Gain distribution under unit-mean Rayleigh power fading.
#[no_mangle]
pub unsafe extern "C" fn lc_rayleigh_gain_cdf(model: *const LcModel, gain: f64, out: *mut f64) -> LcStatus {
    scalar(model, out, |m| rayleigh_gain_cdf(m, gain))
}

/// Doppler distribution of ascending (`mark > 0`) or descending satellites.
#[no_mangle]
pub unsafe extern "C" fn lc_doppler_cdf(model: *const LcModel, doppler_hz: f64, mark: i32, out: *mut f64) -> LcStatus {
    guard(|| {
        let m = model_ref(model)?;
        if mark == 0 {
            return Err((LcStatus::Domain, "mark must be +1 or -1".into()));
        }
        write(out, doppler_cdf(m, doppler_hz, Mark::from_sign(mark as f64)))
    })
}

/// Support `[min, max]` of the gain (1/m²) and of the delay (s).
#[no_mangle]
pub unsafe extern "C" fn lc_supports(
    model: *const LcModel,
    gain_min: *mut f64,
    gain_max: *mut f64,
    delay_min_s: *mut f64,
    delay_max_s: *mut f64,
) -> LcStatus {
    guard(|| {
        let m = model_ref(model)?;
        let (g0, g1) = gain_range(&m.shell, &m.user);
        let (t0, t1) = delay_range(&m.shell, &m.user);
        write(gain_min, g0)?;
        write(gain_max, g1)?;
        write(delay_min_s, t0)?;
        write(delay_max_s, t1)
    })
}

/// Average path gain `ρ²` (1/m²) and path loss (dB).
#[no_mangle]
pub unsafe extern "C" fn lc_path_loss(model: *const LcModel, rho2: *mut f64, path_loss_db: *mut f64) -> LcStatus {
    guard(|| {
        let m = model_ref(model)?;
        let (r, db) = path_loss_proposition(m);
        write(rho2, r)?;
        write(path_loss_db, db)
    })
}

/// Global channel parameters on a grid with steps `nu_step_hz`, `tau_step_s`.
#[no_mangle]
pub unsafe extern "C" fn lc_global_params(
    model: *const LcModel,
    nu_step_hz: f64,
    tau_step_s: f64,
    out: *mut LcSummary,
) -> LcStatus {
    guard(|| {
        let m = model_ref(model)?;
        let s = global_params(m, &JointGridSpec { nu_step_hz, tau_step_s }).map_err(channel_err)?;
        write(
            out,
            LcSummary {
                path_loss_db: s.path_loss_db,
                mean_delay_s: s.mean_delay_s,
                rms_delay_spread_s: s.rms_delay_spread_s,
                mean_doppler_hz: s.mean_doppler_hz,
                rms_doppler_spread_hz: s.rms_doppler_spread_hz,
                channel_spread: s.channel_spread,
                availability: s.availability,
                grid_mean_doppler_hz: s.grid_mean_doppler_hz,
            },
        )
    })
}

/// Scattering function `C(τ, ν)` written row-major by delay into `values`.
///
/// The grid dimensions are always stored in `n_tau` and `n_nu`. If
/// `values` is null or `capacity < n_tau * n_nu`, nothing else is written
/// and [`LcStatus::BufferTooSmall`] is returned. `tau_centers_s` (length
/// `n_tau`) and `nu_centers_hz` (length `n_nu`) may be null.
#[no_mangle]
pub unsafe extern "C" fn lc_scattering(
    model: *const LcModel,
    nu_step_hz: f64,
    tau_step_s: f64,
    values: *mut f64,
    capacity: usize,
    n_tau: *mut usize,
    n_nu: *mut usize,
    tau_centers_s: *mut f64,
    nu_centers_hz: *mut f64,
) -> LcStatus {
    guard(|| {
        let m = model_ref(model)?;
        let grid = scattering_function(m, &JointGridSpec { nu_step_hz, tau_step_s }).map_err(channel_err)?;
        write(n_tau, grid.n_tau())?;
        write(n_nu, grid.n_nu())?;
        if values.is_null() || capacity < grid.values.len() {
            return Err((
                LcStatus::BufferTooSmall,
                format!("scattering grid needs {} values, buffer holds {capacity}", grid.values.len()),
            ));
        }
        std::ptr::copy_nonoverlapping(grid.values.as_ptr(), values, grid.values.len());
        if !tau_centers_s.is_null() {
            let t = grid.tau_centers_s();
            std::ptr::copy_nonoverlapping(t.as_ptr(), tau_centers_s, t.len());
        }
        if !nu_centers_hz.is_null() {
            let v = grid.nu_centers_hz();
            std::ptr::copy_nonoverlapping(v.as_ptr(), nu_centers_hz, v.len());
        }
        Ok(())
    })
}
