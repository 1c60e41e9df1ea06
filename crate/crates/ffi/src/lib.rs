//! C ABI over `harmory-core`.
//!
//! Every fallible function returns a [`HarmoryStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and can
//! be read with [`harmory_last_error_message`]. Objects are opaque handles
//! released with their matching `_free` function; strings returned by the
//! library are released with [`harmory_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use harmory::harmory::{build_memory, export_ntriples, BuildParams, MemoryGraph};
use harmory::harte::{parse_chord, render_chord, Chord};
use harmory::segmentation::{segment, SegParams};
use harmory::similarity::{compare, Measure, MeasureParams};
use harmory::timeline::{load_chart, load_jams, Timeline};
use harmory::tps::{chord_distance, Key};
use harmory::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarmoryStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    NoChord = 4,
    InvalidInput = 5,
    Io = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarmoryMeasure {
    Dtw = 0,
    Tpsd = 1,
    Lharp = 2,
}

impl From<HarmoryMeasure> for Measure {
    fn from(m: HarmoryMeasure) -> Self {
        match m {
            HarmoryMeasure::Dtw => Measure::Dtw,
            HarmoryMeasure::Tpsd => Measure::Tpsd,
            HarmoryMeasure::Lharp => Measure::Lharp,
        }
    }
}

/// A parsed chord.
pub struct HarmoryChord(Chord);

/// A piece: timed chord events with keys.
pub struct HarmoryTimeline(Timeline);

/// A harmonic memory graph.
pub struct HarmoryMemory(MemoryGraph);

struct LastError {
    message: CString,
    position: i64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<LastError>> = const { RefCell::new(None) };
}

fn set_error(message: String, position: Option<usize>) {
    let message = CString::new(message.replace('\0', " ")).expect("nul bytes were replaced");
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = Some(LastError {
            message,
            position: position.map_or(-1, |p| p as i64),
        })
    });
}

fn fail(status: HarmoryStatus, message: impl Into<String>) -> HarmoryStatus {
    set_error(message.into(), None);
    status
}

fn fail_with(e: Error) -> HarmoryStatus {
    let (status, position) = match &e {
        Error::Harte(h) => (HarmoryStatus::ParseError, h.position()),
        Error::NoChord => (HarmoryStatus::NoChord, None),
        Error::Io(_) => (HarmoryStatus::Io, None),
        _ if e.is_input_error() => (HarmoryStatus::InvalidInput, None),
        _ => (HarmoryStatus::Internal, None),
    };
    set_error(e.to_string(), position);
    status
}

/// Runs `f`, turning a panic into [`HarmoryStatus::Internal`].
fn guard(f: impl FnOnce() -> HarmoryStatus) -> HarmoryStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(HarmoryStatus::Internal, "internal panic"))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, HarmoryStatus> {
    if p.is_null() {
        return Err(fail(HarmoryStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(HarmoryStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, HarmoryStatus> {
    p.as_ref()
        .ok_or_else(|| fail(HarmoryStatus::NullArgument, format!("{name} is null")))
}

fn out_arg<T>(p: *mut T, name: &str) -> Result<*mut T, HarmoryStatus> {
    if p.is_null() {
        Err(fail(HarmoryStatus::NullArgument, format!("{name} is null")))
    } else {
        Ok(p)
    }
}

fn new_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

macro_rules! core {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return fail_with(e.into()),
        }
    };
}

/// Message of the last failure on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn harmory_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |l| l.message.as_ptr()))
}

/// Character offset of the last chord syntax error on this thread, or -1.
#[no_mangle]
pub extern "C" fn harmory_last_error_position() -> i64 {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(-1, |l| l.position))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn harmory_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn harmory_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a Harte chord string.
///
/// # Safety
/// `text` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn harmory_chord_parse(text: *const c_char, out: *mut *mut HarmoryChord) -> HarmoryStatus {
    guard(|| {
        let text = tri!(str_arg(text, "text"));
        let out = tri!(out_arg(out, "out"));
        let chord = core!(parse_chord(text));
        *out = Box::into_raw(Box::new(HarmoryChord(chord)));
        HarmoryStatus::Ok
    })
}

/// # Safety
/// `chord` must come from [`harmory_chord_parse`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn harmory_chord_free(chord: *mut HarmoryChord) {
    if !chord.is_null() {
        drop(Box::from_raw(chord));
    }
}

/// Canonical Harte rendering; free the result with [`harmory_string_free`].
///
/// # Safety
/// `chord` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn harmory_chord_render(chord: *const HarmoryChord, out: *mut *mut c_char) -> HarmoryStatus {
    guard(|| {
        let chord = tri!(ref_arg(chord, "chord"));
        let out = tri!(out_arg(out, "out"));
        *out = new_string(render_chord(&chord.0));
        HarmoryStatus::Ok
    })
}

/// Sounding pitch classes as a 12-bit mask (bit `i` is pitch class `i`,
/// C = 0). Fails with `NoChord` for `N`.
///
/// # Safety
/// `chord` must be a live handle; `out_mask` must be writable.
#[no_mangle]
pub unsafe extern "C" fn harmory_chord_pitch_classes(chord: *const HarmoryChord, out_mask: *mut u16) -> HarmoryStatus {
    guard(|| {
        let chord = tri!(ref_arg(chord, "chord"));
        let out = tri!(out_arg(out_mask, "out_mask"));
        *out = core!(harmory::harte::pitch_class_set(&chord.0)).bits();
        HarmoryStatus::Ok
    })
}

/// Symmetric TPS distance between two chords in `key` (e.g. "C:maj").
///
/// # Safety
/// Handles must be live, `key` nul-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn harmory_tps_distance(
    a: *const HarmoryChord,
    b: *const HarmoryChord,
    key: *const c_char,
    out: *mut f64,
) -> HarmoryStatus {
    guard(|| {
        let a = tri!(ref_arg(a, "a"));
        let b = tri!(ref_arg(b, "b"));
        let key: Key = core!(tri!(str_arg(key, "key")).parse());
        let out = tri!(out_arg(out, "out"));
        *out = core!(chord_distance(&a.0, key, &b.0, key)).0;
        HarmoryStatus::Ok
    })
}

/// Reads a plain-text chord chart.
///
/// # Safety
/// `text` must be nul-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn harmory_timeline_from_chart(
    text: *const c_char,
    out: *mut *mut HarmoryTimeline,
) -> HarmoryStatus {
    guard(|| {
        let text = tri!(str_arg(text, "text"));
        let out = tri!(out_arg(out, "out"));
        *out = Box::into_raw(Box::new(HarmoryTimeline(core!(load_chart(text)))));
        HarmoryStatus::Ok
    })
}

/// Reads a JAMS document from `len` bytes.
///
/// # Safety
/// `data` must point to `len` readable bytes; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn harmory_timeline_from_jams(
    data: *const u8,
    len: usize,
    out: *mut *mut HarmoryTimeline,
) -> HarmoryStatus {
    guard(|| {
        if data.is_null() {
            return fail(HarmoryStatus::NullArgument, "data is null");
        }
        let out = tri!(out_arg(out, "out"));
        let bytes = std::slice::from_raw_parts(data, len);
        *out = Box::into_raw(Box::new(HarmoryTimeline(core!(load_jams(bytes)))));
        HarmoryStatus::Ok
    })
}

/// Loads a `.chart` or JAMS file; pieces without an id take the file stem.
///
/// # Safety
/// `path` must be nul-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn harmory_timeline_load(path: *const c_char, out: *mut *mut HarmoryTimeline) -> HarmoryStatus {
    guard(|| {
        let path = tri!(str_arg(path, "path"));
        let out = tri!(out_arg(out, "out"));
        let tl = core!(harmory::io::load_timeline(std::path::Path::new(path)));
        *out = Box::into_raw(Box::new(HarmoryTimeline(tl)));
        HarmoryStatus::Ok
    })
}

/// # Safety
/// `timeline` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn harmory_timeline_free(timeline: *mut HarmoryTimeline) {
    if !timeline.is_null() {
        drop(Box::from_raw(timeline));
    }
}

/// Number of chord events, `N` included. Returns 0 for null.
///
/// # Safety
/// `timeline` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn harmory_timeline_event_count(timeline: *const HarmoryTimeline) -> usize {
    timeline.as_ref().map_or(0, |t| t.0.events().len())
}

/// Similarity score in [0, 1] with default parameters.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn harmory_similarity(
    a: *const HarmoryTimeline,
    b: *const HarmoryTimeline,
    measure: HarmoryMeasure,
    out: *mut f64,
) -> HarmoryStatus {
    guard(|| {
        let a = tri!(ref_arg(a, "a"));
        let b = tri!(ref_arg(b, "b"));
        let out = tri!(out_arg(out, "out"));
        *out = core!(compare(&a.0, &b.0, measure.into(), &MeasureParams::default())).score;
        HarmoryStatus::Ok
    })
}

/// Full similarity report as JSON; free with [`harmory_string_free`].
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn harmory_similarity_report(
    a: *const HarmoryTimeline,
    b: *const HarmoryTimeline,
    measure: HarmoryMeasure,
    out: *mut *mut c_char,
) -> HarmoryStatus {
    guard(|| {
        let a = tri!(ref_arg(a, "a"));
        let b = tri!(ref_arg(b, "b"));
        let out = tri!(out_arg(out, "out"));
        *out = new_string(core!(compare(&a.0, &b.0, measure.into(), &MeasureParams::default())).to_json());
        HarmoryStatus::Ok
    })
}

/// Segment boundaries (sounded-event indices) with default parameters. The
/// array is freed with [`harmory_boundaries_free`]; an empty result is a
/// null pointer with length 0.
///
/// # Safety
/// `timeline` must be live; `out` and `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn harmory_segment_boundaries(
    timeline: *const HarmoryTimeline,
    out: *mut *mut usize,
    out_len: *mut usize,
) -> HarmoryStatus {
    guard(|| {
        let tl = tri!(ref_arg(timeline, "timeline"));
        let out = tri!(out_arg(out, "out"));
        let out_len = tri!(out_arg(out_len, "out_len"));
        let s = core!(segment(&tl.0, &SegParams::default()));
        let bounds = s.boundaries.into_boxed_slice();
        *out_len = bounds.len();
        *out = if bounds.is_empty() {
            ptr::null_mut()
        } else {
            Box::into_raw(bounds).cast()
        };
        HarmoryStatus::Ok
    })
}

/// # Safety
/// `ptr`/`len` must come from [`harmory_segment_boundaries`].
#[no_mangle]
pub unsafe extern "C" fn harmory_boundaries_free(ptr: *mut usize, len: usize) {
    if !ptr.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(ptr, len)));
    }
}

/// Builds a memory graph from `count` timelines with default segmentation
/// and the given thresholds. The timelines are not consumed.
///
/// # Safety
/// `timelines` must point to `count` live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn harmory_memory_build(
    timelines: *const *const HarmoryTimeline,
    count: usize,
    theta_sim: f64,
    theta_merge: f64,
    out: *mut *mut HarmoryMemory,
) -> HarmoryStatus {
    guard(|| {
        if timelines.is_null() && count > 0 {
            return fail(HarmoryStatus::NullArgument, "timelines is null");
        }
        let out = tri!(out_arg(out, "out"));
        let handles = if count == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(timelines, count)
        };
        let mut corpus = Vec::with_capacity(count);
        for (i, &h) in handles.iter().enumerate() {
            corpus.push(tri!(ref_arg(h, &format!("timelines[{i}]"))).0.clone());
        }
        let params = BuildParams {
            theta_sim,
            theta_merge,
            ..BuildParams::default()
        };
        *out = Box::into_raw(Box::new(HarmoryMemory(core!(build_memory(&corpus, &params)))));
        HarmoryStatus::Ok
    })
}

/// Sorted N-Triples; free with [`harmory_string_free`].
///
/// # Safety
/// `memory` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn harmory_memory_export_ntriples(
    memory: *const HarmoryMemory,
    out: *mut *mut c_char,
) -> HarmoryStatus {
    guard(|| {
        let m = tri!(ref_arg(memory, "memory"));
        let out = tri!(out_arg(out, "out"));
        *out = new_string(export_ntriples(&m.0));
        HarmoryStatus::Ok
    })
}

/// Number of patterns in the graph; 0 for null.
///
/// # Safety
/// `memory` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn harmory_memory_pattern_count(memory: *const HarmoryMemory) -> usize {
    memory.as_ref().map_or(0, |m| m.0.patterns.len())
}

/// # Safety
/// `memory` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn harmory_memory_free(memory: *mut HarmoryMemory) {
    if !memory.is_null() {
        drop(Box::from_raw(memory));
    }
}
