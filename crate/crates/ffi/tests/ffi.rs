use std::ffi::{CStr, CString};
use std::ptr;

use harmory_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = harmory_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

unsafe fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_string();
    harmory_string_free(p);
    s
}

unsafe fn chord(text: &str) -> *mut HarmoryChord {
    let mut out = ptr::null_mut();
    assert_eq!(harmory_chord_parse(cstr(text).as_ptr(), &mut out), HarmoryStatus::Ok);
    out
}

unsafe fn chart(text: &str) -> *mut HarmoryTimeline {
    let mut out = ptr::null_mut();
    assert_eq!(harmory_timeline_from_chart(cstr(text).as_ptr(), &mut out), HarmoryStatus::Ok);
    out
}

const POP: &str = "# key: C:maj\n0 2 C:maj\n2 2 G:maj\n4 2 A:min\n6 2 F:maj\n8 2 C:maj\n10 2 G:maj\n12 2 A:min\n14 2 F:maj\n";

#[test]
fn chord_round_trip_and_mask() {
    unsafe {
        let c = chord("C:maj7/3");
        let mut text = ptr::null_mut();
        assert_eq!(harmory_chord_render(c, &mut text), HarmoryStatus::Ok);
        assert_eq!(take_string(text), "C:maj7/3");
        let mut mask = 0u16;
        assert_eq!(harmory_chord_pitch_classes(c, &mut mask), HarmoryStatus::Ok);
        assert_eq!(mask, 1 << 0 | 1 << 4 | 1 << 7 | 1 << 11);
        harmory_chord_free(c);

        let n = chord("N");
        assert_eq!(harmory_chord_pitch_classes(n, &mut mask), HarmoryStatus::NoChord);
        harmory_chord_free(n);
    }
}

#[test]
fn parse_errors_carry_position() {
    unsafe {
        let mut out = ptr::null_mut();
        let status = harmory_chord_parse(cstr("C:maj(3").as_ptr(), &mut out);
        assert_eq!(status, HarmoryStatus::ParseError);
        assert!(out.is_null());
        assert!(harmory_last_error_position() >= 0);
        assert!(!last_error().is_empty());
    }
}

#[test]
fn null_and_utf8_arguments() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(harmory_chord_parse(ptr::null(), &mut out), HarmoryStatus::NullArgument);
        assert_eq!(last_error(), "text is null");
        let bad = [0xffu8, 0];
        assert_eq!(harmory_chord_parse(bad.as_ptr().cast(), &mut out), HarmoryStatus::InvalidUtf8);
        assert_eq!(
            harmory_chord_parse(cstr("C").as_ptr(), ptr::null_mut()),
            HarmoryStatus::NullArgument
        );
        harmory_chord_free(ptr::null_mut());
        harmory_string_free(ptr::null_mut());
    }
}

#[test]
fn tps_distances() {
    unsafe {
        let c = chord("C:maj");
        let g = chord("G:maj");
        let key = cstr("C:maj");
        let mut d = -1.0;
        assert_eq!(harmory_tps_distance(c, c, key.as_ptr(), &mut d), HarmoryStatus::Ok);
        assert_eq!(d, 0.0);
        assert_eq!(harmory_tps_distance(c, g, key.as_ptr(), &mut d), HarmoryStatus::Ok);
        assert_eq!(d, 5.0);
        assert_eq!(
            harmory_tps_distance(c, g, cstr("X:maj").as_ptr(), &mut d),
            HarmoryStatus::ParseError
        );
        harmory_chord_free(c);
        harmory_chord_free(g);
    }
}

#[test]
fn timelines_and_similarity() {
    unsafe {
        let a = chart(POP);
        assert_eq!(harmory_timeline_event_count(a), 8);
        assert_eq!(harmory_timeline_event_count(ptr::null()), 0);
        for m in [HarmoryMeasure::Dtw, HarmoryMeasure::Tpsd] {
            let mut s = 0.0;
            assert_eq!(harmory_similarity(a, a, m, &mut s), HarmoryStatus::Ok);
            assert_eq!(s, 1.0);
        }
        let mut json = ptr::null_mut();
        assert_eq!(
            harmory_similarity_report(a, a, HarmoryMeasure::Lharp, &mut json),
            HarmoryStatus::Ok
        );
        let report: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
        assert_eq!(report["measure"], "lharp");

        let mut bad = ptr::null_mut();
        assert_eq!(
            harmory_timeline_from_chart(cstr("0 x C\n").as_ptr(), &mut bad),
            HarmoryStatus::InvalidInput
        );
        assert!(bad.is_null());
        harmory_timeline_free(a);
    }
}

#[test]
fn jams_bytes_and_files() {
    let fixtures = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures/corpus/more/blues_g.jams.json");
    let bytes = std::fs::read(fixtures).unwrap();
    unsafe {
        let mut a = ptr::null_mut();
        assert_eq!(harmory_timeline_from_jams(bytes.as_ptr(), bytes.len(), &mut a), HarmoryStatus::Ok);
        let mut b = ptr::null_mut();
        assert_eq!(harmory_timeline_load(cstr(fixtures).as_ptr(), &mut b), HarmoryStatus::Ok);
        assert_eq!(harmory_timeline_event_count(a), harmory_timeline_event_count(b));
        let mut missing = ptr::null_mut();
        assert_eq!(
            harmory_timeline_load(cstr("/nonexistent/x.chart").as_ptr(), &mut missing),
            HarmoryStatus::InvalidInput
        );
        harmory_timeline_free(a);
        harmory_timeline_free(b);
    }
}

#[test]
fn segmentation_boundaries() {
    unsafe {
        let tl = chart("# key: C:maj\n0 2 C:maj\n2 2 C:maj\n4 2 C:maj\n6 2 C:maj\n8 2 F#:maj\n10 2 F#:maj\n12 2 F#:maj\n14 2 F#:maj\n");
        let mut ptr_out = ptr::null_mut();
        let mut len = 0;
        assert_eq!(harmory_segment_boundaries(tl, &mut ptr_out, &mut len), HarmoryStatus::Ok);
        assert_eq!(std::slice::from_raw_parts(ptr_out, len), &[4]);
        harmory_boundaries_free(ptr_out, len);
        harmory_timeline_free(tl);
    }
}

#[test]
fn memory_graph_export() {
    unsafe {
        let a = chart(&format!("# id: a\n{POP}"));
        let b = chart(&format!("# id: b\n{POP}"));
        let handles = [a as *const _, b as *const _];
        let mut g = ptr::null_mut();
        assert_eq!(
            harmory_memory_build(handles.as_ptr(), 2, 0.6, 0.9, &mut g),
            HarmoryStatus::Ok
        );
        assert!(harmory_memory_pattern_count(g) >= 1);
        let mut nt = ptr::null_mut();
        assert_eq!(harmory_memory_export_ntriples(g, &mut nt), HarmoryStatus::Ok);
        let text = take_string(nt);
        assert!(text.contains("<urn:harmory:piece/a>"));
        assert!(text.ends_with('\n'));
        harmory_memory_free(g);

        assert_eq!(
            harmory_memory_build(handles.as_ptr(), 2, 0.95, 0.9, &mut g),
            HarmoryStatus::InvalidInput
        );
        assert_eq!(
            harmory_memory_build(ptr::null(), 0, 0.6, 0.9, &mut g),
            HarmoryStatus::InvalidInput
        );
        harmory_timeline_free(a);
        harmory_timeline_free(b);
    }
}

#[test]
fn errors_are_thread_local() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_ne!(harmory_chord_parse(cstr("Q").as_ptr(), &mut out), HarmoryStatus::Ok);
    }
    std::thread::spawn(|| assert!(harmory_last_error_message().is_null()))
        .join()
        .unwrap();
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(harmory_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/harmory.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .split("extern \"C\" fn ")
        .skip(1)
        .map(|s| s.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 20);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct HarmoryTimeline HarmoryTimeline;"));
    assert!(header.contains("HARMORY_STATUS_PARSE_ERROR = 3"));
}

/// Compiles `tests/c/smoke.c` against the generated header and the static
/// library. Skipped when no C compiler is on PATH.
#[test]
fn c_program_links_and_runs() {
    use std::path::PathBuf;
    use std::process::Command;

    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    // target/<profile>/deps/<test binary>
    let profile_dir: PathBuf = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().into();
    let lib = profile_dir.join("libharmory_ffi.a");
    if !lib.exists() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("harmory_smoke");
    let status = Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let run = Command::new(&out).output().unwrap();
    assert!(run.status.success(), "smoke exited with {:?}", run.status);
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
