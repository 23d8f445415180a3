//! C interface to the graphex library.
//!
//! Every fallible call returns a `GxStatus`; on failure the message is kept
//! per thread and read with `gx_last_error`. Objects are opaque handles that
//! the caller releases with the matching `*_free`. Random draws take a
//! `(seed, replicate)` pair and are reproducible across platforms.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use graphex::analysis::tv_value;
use graphex::census::Census;
use graphex::error::Error;
use graphex::generators::configuration_model;
use graphex::graphex::{limit_of_cm, Multigraphex};
use graphex::measures::{empirical_degree_measure, DiscreteMeasure};
use graphex::multigraph::Multigraph;
use graphex::rng::{stream, Rng};
use graphex::sampling::canonical_sample;

const EXPERIMENT: &str = "ffi";

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    OddHalfEdgeSum = 4,
    UnbalancedSides = 5,
    TooLarge = 6,
    RateExceedsOne = 7,
    NoEdges = 8,
    CollisionRetry = 9,
    ValidationFailure = 10,
    TruncationBudgetExceeded = 11,
    Io = 12,
    Panic = 13,
}

pub struct GxMultigraph(Multigraph);
pub struct GxMeasure(DiscreteMeasure);
pub struct GxGraphex(Multigraphex);
pub struct GxCensus(Census);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> GxStatus {
    match err {
        Error::OddHalfEdgeSum(_) => GxStatus::OddHalfEdgeSum,
        Error::UnbalancedSides { .. } => GxStatus::UnbalancedSides,
        Error::TooLargeForCanonicalization { .. } => GxStatus::TooLarge,
        Error::RateExceedsOne { .. } => GxStatus::RateExceedsOne,
        Error::NoEdges => GxStatus::NoEdges,
        Error::CollisionRetry(_) => GxStatus::CollisionRetry,
        Error::ValidationFailure { .. } => GxStatus::ValidationFailure,
        Error::TruncationBudgetExceeded { .. } => GxStatus::TruncationBudgetExceeded,
        Error::InvalidArgument(_) => GxStatus::InvalidArgument,
        Error::Parse(_) | Error::Json(_) | Error::Csv(_) => GxStatus::Parse,
        Error::Io(_) => GxStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard<F>(f: F) -> GxStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            GxStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer passed as {what}"));
            GxStatus::NullPointer
        }
        Ok(Err(Failure::Lib(err))) => {
            set_error(err.to_string());
            status_of(&err)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            GxStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn get_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    get_mut(p, what)
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(Error::Parse(format!("{what} is not valid UTF-8"))))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn rng(seed: u64, replicate: u64) -> Rng {
    stream(seed, EXPERIMENT, replicate)
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message for the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn gx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must come from a `gx_*` function returning `char *`, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn gx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---- multigraphs ----

/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gx_multigraph_from_json(
    json: *const c_char,
    out: *mut *mut GxMultigraph,
) -> GxStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let g = Multigraph::from_json(text(json, "json")?)?;
        *out = boxed(GxMultigraph(g));
        Ok(())
    })
}

/// Configuration model on `degrees[0..n]`.
///
/// # Safety
/// `degrees` must point to `n` readable values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn gx_multigraph_configuration_model(
    degrees: *const u32,
    n: usize,
    seed: u64,
    replicate: u64,
    out: *mut *mut GxMultigraph,
) -> GxStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let d = slice(degrees, n, "degrees")?;
        let g = configuration_model(d, &mut rng(seed, replicate))?;
        *out = boxed(GxMultigraph(g));
        Ok(())
    })
}

/// Canonical sample of `g` at size `t`.
///
/// # Safety
/// `g` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gx_multigraph_canonical_sample(
    g: *const GxMultigraph,
    t: f64,
    seed: u64,
    replicate: u64,
    out: *mut *mut GxMultigraph,
) -> GxStatus {
    guard(|| {
        let g = get(g, "g")?;
        let out = out_ptr(out, "out")?;
        let s = canonical_sample(&g.0, t, &mut rng(seed, replicate))?;
        *out = boxed(GxMultigraph(s));
        Ok(())
    })
}

/// # Safety
/// `g` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn gx_multigraph_vertex_count(g: *const GxMultigraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.n_vertices())
}

/// Non-loop edges counted with multiplicity.
///
/// # Safety
/// `g` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn gx_multigraph_edge_count(g: *const GxMultigraph) -> u64 {
    g.as_ref().map_or(0, |g| g.0.non_loop_edge_count())
}

/// # Safety
/// `g` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn gx_multigraph_loop_count(g: *const GxMultigraph) -> u64 {
    g.as_ref().map_or(0, |g| g.0.loop_count())
}

/// Writes the degree of every vertex into `buf`, which holds `len` values.
///
/// # Safety
/// `g` must be a live handle and `buf` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn gx_multigraph_degrees(
    g: *const GxMultigraph,
    buf: *mut u64,
    len: usize,
) -> GxStatus {
    guard(|| {
        let g = get(g, "g")?;
        let d = g.0.degrees();
        if len < d.len() {
            return Err(Error::InvalidArgument(format!(
                "buffer holds {len} values, need {}",
                d.len()
            ))
            .into());
        }
        if !d.is_empty() {
            if buf.is_null() {
                return Err(Failure::Null("buf"));
            }
            ptr::copy_nonoverlapping(d.as_ptr(), buf, d.len());
        }
        Ok(())
    })
}

/// Serializes `g`; free the result with `gx_string_free`.
///
/// # Safety
/// `g` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gx_multigraph_to_json(
    g: *const GxMultigraph,
    out: *mut *mut c_char,
) -> GxStatus {
    guard(|| {
        let g = get(g, "g")?;
        let out = out_ptr(out, "out")?;
        *out = c_string(g.0.to_json());
        Ok(())
    })
}

/// # Safety
/// `g` must be a handle from this library or NULL; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn gx_multigraph_free(g: *mut GxMultigraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

// ---- measures ----

/// Empirical degree measure of `degrees[0..n]`: mass `1/√ℓ` at each `d_i/√ℓ`.
///
/// # Safety
/// `degrees` must point to `n` readable values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn gx_measure_from_degrees(
    degrees: *const u32,
    n: usize,
    out: *mut *mut GxMeasure,
) -> GxStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let m = empirical_degree_measure(slice(degrees, n, "degrees")?)?;
        *out = boxed(GxMeasure(m));
        Ok(())
    })
}

/// Measure with atoms at `locations[i]` carrying `masses[i]`.
///
/// # Safety
/// Both arrays must hold `n` readable values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn gx_measure_from_atoms(
    locations: *const f64,
    masses: *const f64,
    n: usize,
    out: *mut *mut GxMeasure,
) -> GxStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let x = slice(locations, n, "locations")?;
        let w = slice(masses, n, "masses")?;
        let m = DiscreteMeasure::new(x.iter().copied().zip(w.iter().copied()))?;
        *out = boxed(GxMeasure(m));
        Ok(())
    })
}

/// # Safety
/// `m` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn gx_measure_total_mass(m: *const GxMeasure) -> f64 {
    m.as_ref().map_or(f64::NAN, |m| m.0.total_mass())
}

/// # Safety
/// `m` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn gx_measure_first_moment(m: *const GxMeasure) -> f64 {
    m.as_ref().map_or(f64::NAN, |m| m.0.first_moment())
}

/// Mass of `(x, ∞)`.
///
/// # Safety
/// `m` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn gx_measure_tail(m: *const GxMeasure, x: f64) -> f64 {
    m.as_ref().map_or(f64::NAN, |m| m.0.tail_intensity(x))
}

/// # Safety
/// `m` must be a handle from this library or NULL; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn gx_measure_free(m: *mut GxMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

// ---- multigraphexes ----

/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gx_graphex_from_json(
    json: *const c_char,
    out: *mut *mut GxGraphex,
) -> GxStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let w = Multigraphex::from_json(text(json, "json")?)?;
        *out = boxed(GxGraphex(w));
        Ok(())
    })
}

/// Limiting multigraphex of the configuration model on `degrees[0..n]`,
/// with vertices of degree above `tau·√ℓ` treated as hubs.
///
/// # Safety
/// `degrees` must point to `n` readable values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn gx_graphex_limit_of_cm(
    degrees: *const u32,
    n: usize,
    tau: f64,
    out: *mut *mut GxGraphex,
) -> GxStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let w = limit_of_cm(slice(degrees, n, "degrees")?, tau)?;
        *out = boxed(GxGraphex(w));
        Ok(())
    })
}

/// Checks the integrability conditions. `*passed` is set to 1 or 0; the
/// full report goes to `*report_json` when that is not NULL.
///
/// # Safety
/// `w` must be a live handle, `passed` writable, `report_json` writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn gx_graphex_validate(
    w: *const GxGraphex,
    resolution: usize,
    passed: *mut i32,
    report_json: *mut *mut c_char,
) -> GxStatus {
    guard(|| {
        let w = get(w, "w")?;
        let passed = out_ptr(passed, "passed")?;
        let report = w.0.validation_report(resolution);
        *passed = report.passed as i32;
        if let Some(out) = report_json.as_mut() {
            *out = c_string(serde_json::to_string(&report).map_err(Error::from)?);
        }
        Ok(())
    })
}

/// Draws the graph process of `w` at size `t`.
///
/// # Safety
/// `w` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gx_graphex_sample(
    w: *const GxGraphex,
    t: f64,
    seed: u64,
    replicate: u64,
    out: *mut *mut GxMultigraph,
) -> GxStatus {
    guard(|| {
        let w = get(w, "w")?;
        let out = out_ptr(out, "out")?;
        let g = w.0.sample_gp(t, &mut rng(seed, replicate))?;
        *out = boxed(GxMultigraph(g));
        Ok(())
    })
}

/// # Safety
/// `w` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gx_graphex_to_json(
    w: *const GxGraphex,
    out: *mut *mut c_char,
) -> GxStatus {
    guard(|| {
        let w = get(w, "w")?;
        let out = out_ptr(out, "out")?;
        *out = c_string(w.0.to_json()?);
        Ok(())
    })
}

/// # Safety
/// `w` must be a handle from this library or NULL; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn gx_graphex_free(w: *mut GxGraphex) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

// ---- censuses ----

/// Empty census; graphs with more than `vertex_limit` vertices after
/// dropping isolated ones are counted in a single oversize class.
#[no_mangle]
pub extern "C" fn gx_census_new(vertex_limit: usize) -> *mut GxCensus {
    boxed(GxCensus(Census::with_limit(vertex_limit)))
}

/// # Safety
/// `c` and `g` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn gx_census_add(c: *mut GxCensus, g: *const GxMultigraph) -> GxStatus {
    guard(|| {
        let c = get_mut(c, "c")?;
        let g = get(g, "g")?;
        c.0.add(&g.0);
        Ok(())
    })
}

/// # Safety
/// `c` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn gx_census_total(c: *const GxCensus) -> u64 {
    c.as_ref().map_or(0, |c| c.0.total())
}

/// # Safety
/// `c` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn gx_census_class_count(c: *const GxCensus) -> usize {
    c.as_ref().map_or(0, |c| c.0.n_classes())
}

/// Total variation distance between the empirical laws of two censuses.
///
/// # Safety
/// `a` and `b` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gx_census_tv(
    a: *const GxCensus,
    b: *const GxCensus,
    out: *mut f64,
) -> GxStatus {
    guard(|| {
        let a = get(a, "a")?;
        let b = get(b, "b")?;
        *out_ptr(out, "out")? = tv_value(&a.0, &b.0);
        Ok(())
    })
}

/// # Safety
/// `c` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gx_census_to_json(c: *const GxCensus, out: *mut *mut c_char) -> GxStatus {
    guard(|| {
        let c = get(c, "c")?;
        let out = out_ptr(out, "out")?;
        *out = c_string(c.0.to_json());
        Ok(())
    })
}

/// # Safety
/// `c` must be a handle from this library or NULL; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn gx_census_free(c: *mut GxCensus) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}
