//! C ABI over `parity_constraints`.
//!
//! Objects are opaque heap handles released with their `*_free` function.
//! Every fallible call returns a [`PcStatus`]; on failure the message is kept
//! per thread and can be read with [`pc_last_error_message`]. Panics never
//! cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use parity_constraints::bounds::{homogeneous_optimum, BoundsReport, KRange};
use parity_constraints::error::Error;
use parity_constraints::evt;
use parity_constraints::instances::{
    encode_maxcut, sample_instance, DistributionKind, DistributionSpec, GraphSpec, IsingInstance,
};
use parity_constraints::parity::ParityLayout;
use parity_constraints::sdp::c1_sdp_bound;
use parity_constraints::solver::{logical_spectrum, Limits};
use parity_constraints::special;

/// Result codes. Capacity and configuration errors share their values with
/// the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcStatus {
    Ok = 0,
    InvalidArgument = 1,
    Capacity = 2,
    Config = 3,
    Parse = 4,
    Io = 5,
    NullPointer = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcDistribution {
    Normal = 0,
    Uniform = 1,
    Bimodal = 2,
}

/// Logical Ising instance.
pub struct PcInstance {
    inner: IsingInstance,
}

/// Homogeneous bound report.
pub struct PcBounds {
    inner: BoundsReport,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PcSpectrum {
    pub l0: f64,
    pub e: f64,
    pub gap: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PcBoundsSummary {
    pub n: usize,
    pub q: usize,
    pub l0: f64,
    pub e: f64,
    pub gap: f64,
    pub p0: f64,
    pub trivial: f64,
    pub c_hat: f64,
    pub k_max_used: usize,
    /// Nonzero when every defect count was included.
    pub certified: u8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PcGumbel {
    pub alpha: f64,
    pub beta: f64,
    pub m: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PcC1Sdp {
    pub primal: f64,
    pub dual: f64,
    pub a1_plus: f64,
    pub c1_sdp: f64,
    pub edges: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PcStatus {
    match e {
        Error::Capacity { .. } => PcStatus::Capacity,
        Error::InvalidInput(_) => PcStatus::InvalidArgument,
        Error::Config(_) => PcStatus::Config,
        Error::Parse(_) => PcStatus::Parse,
        Error::Io(_) => PcStatus::Io,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (PcStatus, String)>) -> PcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PcStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PcStatus::Internal
        }
    }
}

fn lib<T>(r: parity_constraints::Result<T>) -> Result<T, (PcStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (PcStatus, String) {
    (PcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (PcStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length without
/// the terminator, or 0 when there is no error.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn pc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Samples couplings with mean-to-spread ratio `ratio` on `K_n`, or on
/// `G(n, p_edge)` when `p_edge` lies in `[0, 1]`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_instance_sample(
    dist: PcDistribution,
    ratio: f64,
    n: usize,
    p_edge: f64,
    seed: u64,
    out: *mut *mut PcInstance,
) -> PcStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let kind = match dist {
            PcDistribution::Normal => DistributionKind::Normal,
            PcDistribution::Uniform => DistributionKind::Uniform,
            PcDistribution::Bimodal => DistributionKind::Bimodal,
        };
        let spec = lib(DistributionSpec::with_ratio(kind, ratio))?;
        let graph = if (0.0..=1.0).contains(&p_edge) {
            GraphSpec::ErdosRenyi {
                n,
                p_edge,
                seed: parity_constraints::rng::derive_seed(seed, 1),
            }
        } else {
            GraphSpec::Complete { n }
        };
        let inner = lib(sample_instance(&spec, &graph, parity_constraints::rng::derive_seed(seed, 0)))?;
        *out = Box::into_raw(Box::new(PcInstance { inner }));
        Ok(())
    })
}

/// MaxCut encoding of `G(n, p_edge)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_instance_maxcut_er(n: usize, p_edge: f64, seed: u64, out: *mut *mut PcInstance) -> PcStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let graph = lib(GraphSpec::ErdosRenyi { n, p_edge, seed }.realize())?;
        let inner = lib(encode_maxcut(&graph))?;
        *out = Box::into_raw(Box::new(PcInstance { inner }));
        Ok(())
    })
}

/// Parses an instance document (JSON, 1-based edges).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_instance_from_json(json: *const c_char, out: *mut *mut PcInstance) -> PcStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (PcStatus::Parse, e.to_string()))?;
        let inner = lib(IsingInstance::from_json(text))?;
        *out = Box::into_raw(Box::new(PcInstance { inner }));
        Ok(())
    })
}

/// Serializes an instance; release the string with [`pc_string_free`].
///
/// # Safety
/// `inst` must come from this library and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pc_instance_to_json(inst: *const PcInstance, out: *mut *mut c_char) -> PcStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let inst = inst.as_ref().ok_or_else(|| null("instance"))?;
        let text = lib(inst.inner.to_json())?;
        *out = CString::new(text)
            .map_err(|e| (PcStatus::Internal, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// Number of logical spins, or 0 for a null handle.
///
/// # Safety
/// `inst` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn pc_instance_n(inst: *const PcInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.inner.n())
}

/// # Safety
/// `inst` must come from this library or be null; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pc_instance_free(inst: *mut PcInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn pc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Ground energy, first excited energy and gap.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pc_spectrum(inst: *const PcInstance, out: *mut PcSpectrum) -> PcStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let inst = inst.as_ref().ok_or_else(|| null("instance"))?;
        let s = lib(logical_spectrum(&inst.inner, &Limits::default()))?;
        *out = PcSpectrum {
            l0: s.l0,
            e: s.e,
            gap: s.gap,
        };
        Ok(())
    })
}

/// Bound families for defect counts up to `k_max`; a negative `k_max`
/// requests the full range.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pc_bounds_compute(inst: *const PcInstance, k_max: i64, out: *mut *mut PcBounds) -> PcStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let inst = inst.as_ref().ok_or_else(|| null("instance"))?;
        let layout = lib(ParityLayout::new(inst.inner.n()))?;
        let (range, limits) = if k_max < 0 {
            (KRange::Full, Limits::default().with_high_order())
        } else if k_max >= 3 {
            (KRange::UpTo(k_max as usize), Limits::default().with_high_order())
        } else {
            (KRange::UpTo(k_max as usize), Limits::default())
        };
        let inner = lib(homogeneous_optimum(&inst.inner, &layout, range, &limits))?;
        *out = Box::into_raw(Box::new(PcBounds { inner }));
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pc_bounds_summary(b: *const PcBounds, out: *mut PcBoundsSummary) -> PcStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let r = &b.as_ref().ok_or_else(|| null("bounds"))?.inner;
        *out = PcBoundsSummary {
            n: r.n,
            q: r.q,
            l0: r.l0,
            e: r.e,
            gap: r.gap,
            p0: r.p0,
            trivial: r.trivial,
            c_hat: r.c_hat,
            k_max_used: r.k_max_used,
            certified: r.certified as u8,
        };
        Ok(())
    })
}

unsafe fn bounds_entry(b: *const PcBounds, pick: impl FnOnce(&BoundsReport) -> Option<f64>, out: *mut f64) -> PcStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let r = &b.as_ref().ok_or_else(|| null("bounds"))?.inner;
        *out = pick(r).ok_or((PcStatus::InvalidArgument, "index out of range".to_string()))?;
        Ok(())
    })
}

/// `a_k` for `1 <= k <= k_max_used`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pc_bounds_a(b: *const PcBounds, k: usize, out: *mut f64) -> PcStatus {
    bounds_entry(b, |r| k.checked_sub(1).and_then(|i| r.a.get(i).copied()), out)
}

/// Lower bound `c_-k` for `1 <= k <= k_max_used`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pc_bounds_lower(b: *const PcBounds, k: usize, out: *mut f64) -> PcStatus {
    bounds_entry(b, |r| k.checked_sub(1).and_then(|i| r.lower.get(i).copied()), out)
}

/// Upper bound `c_i` for `0 <= i <= k_max_used`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pc_bounds_upper(b: *const PcBounds, i: usize, out: *mut f64) -> PcStatus {
    bounds_entry(b, |r| r.upper.get(i).copied(), out)
}

/// # Safety
/// `b` must come from this library or be null; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pc_bounds_free(b: *mut PcBounds) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Standard normal quantile.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pc_probit(p: f64, out: *mut f64) -> PcStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = lib(special::probit(p))?;
        Ok(())
    })
}

/// Gumbel parameters for the minimum of `m` standard normals.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pc_gumbel_params(m: f64, out: *mut PcGumbel) -> PcStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let g = lib(evt::gumbel_params(m))?;
        *out = PcGumbel {
            alpha: g.alpha,
            beta: g.beta,
            m: g.m,
        };
        Ok(())
    })
}

/// Expected minimum of `m` independent `N(0, sigma^2)` variables.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pc_expected_min_independent(m: f64, sigma: f64, out: *mut f64) -> PcStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = lib(evt::expected_min_independent(m, sigma))?;
        Ok(())
    })
}

/// Leading-order growth of `l0 - a1` for the SK model.
#[no_mangle]
pub extern "C" fn pc_f1_scaling(n: usize, delta: f64) -> f64 {
    evt::f1_scaling(n, delta)
}

/// SDP lower bound on `c_-1` for MaxCut on `G(n, p_edge)`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pc_c1_sdp_maxcut_er(n: usize, p_edge: f64, seed: u64, out: *mut PcC1Sdp) -> PcStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let graph = lib(GraphSpec::ErdosRenyi { n, p_edge, seed }.realize())?;
        let r = lib(c1_sdp_bound(&graph))?;
        *out = PcC1Sdp {
            primal: r.sdp.primal_value,
            dual: r.sdp.dual_value,
            a1_plus: r.a1_plus,
            c1_sdp: r.c1_sdp,
            edges: r.edges,
        };
        Ok(())
    })
}
