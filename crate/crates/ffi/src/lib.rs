//! C ABI for `gfl-core`.
//!
//! Images and schedules are opaque heap handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! a [`GflStatus`]; on failure a human-readable message is available from
//! [`gfl_last_error_message`] on the same thread.
//!
//! Pixel buffers are planar `f64` (all of channel 0, then channel 1, ...),
//! row-major within a channel.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gfl_core::harness::{psnr, ssim};
use gfl_core::imagecore::{load_image, save_image};
use gfl_core::scheduler::{AllocationMode, Interpretation};
use gfl_core::spectral::{highpass_mask, FrequencyMask};
use gfl_core::{Error, GflParams, Image, ScheduleConfig, ScheduleState};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GflStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    FileNotFound = 4,
    UnsupportedFormat = 5,
    CorruptData = 6,
    Io = 7,
    InvalidImage = 8,
    DimensionMismatch = 9,
    BufferTooSmall = 10,
    NonFinite = 11,
    Panic = 99,
}

impl From<&Error> for GflStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::FileNotFound(_) => GflStatus::FileNotFound,
            Error::UnsupportedFormat(_) => GflStatus::UnsupportedFormat,
            Error::CorruptData(_) => GflStatus::CorruptData,
            Error::Io(_) => GflStatus::Io,
            Error::InvalidImage(_) | Error::ImageTooSmall(_) | Error::AsymmetricSpectrum(_) => {
                GflStatus::InvalidImage
            }
            Error::DimensionNotDivisible { .. }
            | Error::DimensionMismatch(_)
            | Error::OddDimensions { .. }
            | Error::DepthTooLarge { .. } => GflStatus::DimensionMismatch,
            Error::InvalidConfig(_) | Error::EpochOutOfOrder { .. } => GflStatus::InvalidConfig,
            Error::NonFiniteLoss { .. } => GflStatus::NonFinite,
            Error::InvalidArgument(_) => GflStatus::InvalidArgument,
        }
    }
}

/// Opaque image handle.
pub struct GflImage {
    inner: Image,
}

/// Opaque band-allocation scheduler handle.
pub struct GflSchedule {
    config: ScheduleConfig,
    state: ScheduleState,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GflScheduleMode {
    Static = 0,
    Dynamic = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GflStaticRule {
    /// Stage change when `epoch % stages == 0`.
    Literal = 0,
    /// Stage change every `max(1, epochs / stages)` epochs.
    StageInterval = 1,
}

/// Plain-data schedule description. `has_loss_threshold` selects whether
/// `loss_threshold` is used (dynamic mode only).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GflScheduleConfig {
    pub omega0: f64,
    pub omega_final: f64,
    pub epochs: usize,
    pub stages: usize,
    pub mode: GflScheduleMode,
    pub static_rule: GflStaticRule,
    pub has_loss_threshold: bool,
    pub loss_threshold: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GflLossBreakdown {
    pub ch_c: f64,
    pub pi_c: f64,
    pub theta_c: f64,
    pub total: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn fail(status: GflStatus, msg: impl Into<String>) -> GflStatus {
    set_last_error(msg.into());
    status
}

fn from_core(e: Error) -> GflStatus {
    let status = GflStatus::from(&e);
    fail(status, e.to_string())
}

/// Runs `f`, turning panics into `GflStatus::Panic` so they never unwind
/// across the C boundary.
fn guard(f: impl FnOnce() -> GflStatus) -> GflStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(GflStatus::Panic, "internal panic"),
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(GflStatus::NullPointer, concat!("`", stringify!($p), "` is null"));
        })+
    };
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a str, GflStatus> {
    CStr::from_ptr(path)
        .to_str()
        .map_err(|_| fail(GflStatus::InvalidArgument, "path is not valid UTF-8"))
}

/// Message describing the most recent failure on this thread, or null if
/// none. The pointer stays valid until the next failing call on the thread.
#[no_mangle]
pub extern "C" fn gfl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates an image from `height*width*channels` planar samples.
///
/// # Safety
/// `data` must point to that many readable `f64`s; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gfl_image_new(
    height: usize,
    width: usize,
    channels: usize,
    data: *const f64,
    out: *mut *mut GflImage,
) -> GflStatus {
    non_null!(data, out);
    guard(|| {
        let Some(n) = height
            .checked_mul(width)
            .and_then(|n| n.checked_mul(channels))
        else {
            return fail(GflStatus::InvalidArgument, "image size overflows");
        };
        let samples = std::slice::from_raw_parts(data, n).to_vec();
        match Image::new(height, width, channels, samples) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(GflImage { inner }));
                GflStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Loads an 8-bit PNG, PGM or PPM file.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gfl_image_load(path: *const c_char, out: *mut *mut GflImage) -> GflStatus {
    non_null!(path, out);
    guard(|| {
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match load_image(path) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(GflImage { inner }));
                GflStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Saves an image; the format follows the extension (`.pgm`/`.ppm`/`.pnm`
/// for netpbm, PNG otherwise).
///
/// # Safety
/// `image` must be a live handle and `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn gfl_image_save(image: *const GflImage, path: *const c_char) -> GflStatus {
    non_null!(image, path);
    guard(|| {
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match save_image(&(*image).inner, path) {
            Ok(()) => GflStatus::Ok,
            Err(e) => from_core(e),
        }
    })
}

/// Writes the image shape. Any of the output pointers may be null.
///
/// # Safety
/// `image` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn gfl_image_dims(
    image: *const GflImage,
    height: *mut usize,
    width: *mut usize,
    channels: *mut usize,
) -> GflStatus {
    non_null!(image);
    let (h, w, c) = (*image).inner.dims();
    for (p, v) in [(height, h), (width, w), (channels, c)] {
        if !p.is_null() {
            *p = v;
        }
    }
    GflStatus::Ok
}

/// Copies the planar samples into `out`, which holds `capacity` values.
///
/// # Safety
/// `image` must be a live handle and `out` must have room for `capacity`
/// `f64`s.
#[no_mangle]
pub unsafe extern "C" fn gfl_image_copy_data(
    image: *const GflImage,
    out: *mut f64,
    capacity: usize,
) -> GflStatus {
    non_null!(image, out);
    let img = &(*image).inner;
    if capacity < img.len() {
        return fail(
            GflStatus::BufferTooSmall,
            format!("need {} samples, buffer holds {capacity}", img.len()),
        );
    }
    let dst = std::slice::from_raw_parts_mut(out, img.len());
    for (d, s) in dst.iter_mut().zip(img.samples()) {
        *d = s;
    }
    GflStatus::Ok
}

/// Releases an image. Null is ignored.
///
/// # Safety
/// `image` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gfl_image_free(image: *mut GflImage) {
    if !image.is_null() {
        drop(Box::from_raw(image));
    }
}

fn loss_params(
    height: usize,
    width: usize,
    epsilon: f64,
    mask_omega: f64,
) -> Result<GflParams, Error> {
    let mask = if mask_omega < 0.0 {
        FrequencyMask::empty(height, width)
    } else {
        highpass_mask(height, width, mask_omega)?
    };
    GflParams::new(epsilon, mask)
}

/// Evaluates the guided frequency loss of `restored` against `target`.
/// A negative `mask_omega` disables the high-frequency term.
///
/// # Safety
/// Both images must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gfl_loss(
    restored: *const GflImage,
    target: *const GflImage,
    epsilon: f64,
    mask_omega: f64,
    out: *mut GflLossBreakdown,
) -> GflStatus {
    non_null!(restored, target, out);
    guard(|| {
        let (r, t) = (&(*restored).inner, &(*target).inner);
        let result = loss_params(r.height(), r.width(), epsilon, mask_omega)
            .and_then(|params| gfl_core::gfl(r, t, &params));
        match result {
            Ok(b) => {
                *out = GflLossBreakdown {
                    ch_c: b.ch_c,
                    pi_c: b.pi_c,
                    theta_c: b.theta_c,
                    total: b.total,
                };
                GflStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Gradient of the loss with respect to `restored`, written as planar
/// samples into `out` (`capacity` values).
///
/// # Safety
/// Both images must be live handles and `out` must have room for
/// `capacity` `f64`s.
#[no_mangle]
pub unsafe extern "C" fn gfl_loss_gradient(
    restored: *const GflImage,
    target: *const GflImage,
    epsilon: f64,
    mask_omega: f64,
    out: *mut f64,
    capacity: usize,
) -> GflStatus {
    non_null!(restored, target, out);
    guard(|| {
        let (r, t) = (&(*restored).inner, &(*target).inner);
        if capacity < r.len() {
            return fail(
                GflStatus::BufferTooSmall,
                format!("need {} samples, buffer holds {capacity}", r.len()),
            );
        }
        let result = loss_params(r.height(), r.width(), epsilon, mask_omega)
            .and_then(|params| gfl_core::gfl_gradient(r, t, &params));
        match result {
            Ok(g) => {
                let dst = std::slice::from_raw_parts_mut(out, g.len());
                for (d, s) in dst.iter_mut().zip(g.samples()) {
                    *d = s;
                }
                GflStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// PSNR in dB with peak 1 (capped at 120 for identical images).
///
/// # Safety
/// Both images must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gfl_psnr(
    a: *const GflImage,
    b: *const GflImage,
    out: *mut f64,
) -> GflStatus {
    non_null!(a, b, out);
    guard(|| match psnr(&(*a).inner, &(*b).inner) {
        Ok(v) => {
            *out = v;
            GflStatus::Ok
        }
        Err(e) => from_core(e),
    })
}

/// Mean SSIM over channels (11×11 Gaussian window).
///
/// # Safety
/// Both images must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gfl_ssim(
    a: *const GflImage,
    b: *const GflImage,
    out: *mut f64,
) -> GflStatus {
    non_null!(a, b, out);
    guard(|| match ssim(&(*a).inner, &(*b).inner) {
        Ok(v) => {
            *out = v;
            GflStatus::Ok
        }
        Err(e) => from_core(e),
    })
}

impl From<&GflScheduleConfig> for ScheduleConfig {
    fn from(c: &GflScheduleConfig) -> Self {
        ScheduleConfig {
            omega0: c.omega0,
            omega_final: c.omega_final,
            epochs: c.epochs,
            stages: c.stages,
            mode: match c.mode {
                GflScheduleMode::Static => AllocationMode::Static,
                GflScheduleMode::Dynamic => AllocationMode::Dynamic,
            },
            loss_threshold: c.has_loss_threshold.then_some(c.loss_threshold),
            interpretation: match c.static_rule {
                GflStaticRule::Literal => Interpretation::Literal,
                GflStaticRule::StageInterval => Interpretation::StageInterval,
            },
        }
    }
}

/// Creates a scheduler in its initial state (threshold `omega0`).
///
/// # Safety
/// `config` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gfl_schedule_new(
    config: *const GflScheduleConfig,
    out: *mut *mut GflSchedule,
) -> GflStatus {
    non_null!(config, out);
    guard(|| {
        let config = ScheduleConfig::from(&*config);
        match ScheduleState::new(&config) {
            Ok(state) => {
                *out = Box::into_raw(Box::new(GflSchedule { config, state }));
                GflStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Advances to `epoch` (1-based, strictly consecutive) and writes the
/// threshold used for that epoch. `has_last_loss` says whether
/// `last_epoch_loss` holds the previous epoch's mean loss.
///
/// # Safety
/// `schedule` must be a live handle and `omega_out` writable.
#[no_mangle]
pub unsafe extern "C" fn gfl_schedule_on_epoch(
    schedule: *mut GflSchedule,
    epoch: usize,
    has_last_loss: bool,
    last_epoch_loss: f64,
    omega_out: *mut f64,
) -> GflStatus {
    non_null!(schedule, omega_out);
    guard(|| {
        let s = &mut *schedule;
        let last = has_last_loss.then_some(last_epoch_loss);
        match s.state.on_epoch(&s.config, epoch, last) {
            Ok(omega) => {
                *omega_out = omega;
                GflStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Whether the schedule has reached its final threshold.
///
/// # Safety
/// `schedule` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gfl_schedule_is_frozen(
    schedule: *const GflSchedule,
    out: *mut bool,
) -> GflStatus {
    non_null!(schedule, out);
    *out = (*schedule).state.is_frozen();
    GflStatus::Ok
}

/// Releases a scheduler. Null is ignored.
///
/// # Safety
/// `schedule` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gfl_schedule_free(schedule: *mut GflSchedule) {
    if !schedule.is_null() {
        drop(Box::from_raw(schedule));
    }
}
