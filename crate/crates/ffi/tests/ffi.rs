use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use trisim_ffi::*;

fn last_error() -> String {
    let p = trisim_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn builtin(name: &str) -> *mut TrisimNetlist {
    let name = CString::new(name).unwrap();
    let mut n = ptr::null_mut();
    assert_eq!(
        unsafe { trisim_netlist_builtin(name.as_ptr(), 0.9, &mut n) },
        TrisimStatus::Ok
    );
    n
}

#[test]
fn arithmetic() {
    let (mut s, mut c) = (0u8, 0u8);
    for a in 0..3 {
        for b in 0..3 {
            for cin in 0..3 {
                assert_eq!(
                    unsafe { trisim_full_add(a, b, cin, &mut s, &mut c) },
                    TrisimStatus::Ok
                );
                assert_eq!(3 * c + s, a + b + cin);
                for design in [1, 2] {
                    let (mut s2, mut c2) = (9u8, 9u8);
                    let st = unsafe { trisim_adder_eval(design, a, b, cin, 0.9, &mut s2, &mut c2) };
                    assert_eq!(st, TrisimStatus::Ok);
                    assert_eq!((s2, c2), (s, c));
                }
            }
        }
    }
    assert_eq!(
        unsafe { trisim_full_add(0, 3, 0, &mut s, &mut c) },
        TrisimStatus::InvalidArgument
    );
    assert!(last_error().contains('3'));
    assert_eq!(
        unsafe { trisim_adder_eval(7, 0, 0, 0, 0.9, &mut s, &mut c) },
        TrisimStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { trisim_full_add(0, 0, 0, ptr::null_mut(), &mut c) },
        TrisimStatus::NullPointer
    );
    assert_eq!(
        unsafe { trisim_full_add(0, 0, 0, &mut s, &mut c) },
        TrisimStatus::Ok
    );
    assert!(trisim_last_error().is_null());
}

#[test]
fn device_calculators() {
    let mut v = 0.0;
    assert_eq!(
        unsafe { trisim_cnt_diameter(19, 0, &mut v) },
        TrisimStatus::Ok
    );
    assert!((v - 1.4877).abs() < 1e-4);
    assert_eq!(
        unsafe { trisim_threshold_voltage(10, 0, &mut v) },
        TrisimStatus::Ok
    );
    assert!((v - 0.549170).abs() < 1e-6);
    assert_eq!(
        unsafe { trisim_threshold_voltage(5, 5, &mut v) },
        TrisimStatus::Device
    );
    assert!(last_error().contains("metallic"));
    assert_eq!(
        unsafe { trisim_cnt_diameter(0, 0, &mut v) },
        TrisimStatus::Device
    );
}

#[test]
fn netlist_handles() {
    let n = builtin("design1");
    let mut count = 0usize;
    assert_eq!(
        unsafe { trisim_netlist_cnfet_count(n, &mut count) },
        TrisimStatus::Ok
    );
    assert!(count > 0);

    let mut text: *mut c_char = ptr::null_mut();
    assert_eq!(
        unsafe { trisim_netlist_serialize(n, &mut text) },
        TrisimStatus::Ok
    );
    let mut again = ptr::null_mut();
    assert_eq!(
        unsafe { trisim_netlist_parse(text, &mut again) },
        TrisimStatus::Ok
    );
    let mut count2 = 0usize;
    assert_eq!(
        unsafe { trisim_netlist_cnfet_count(again, &mut count2) },
        TrisimStatus::Ok
    );
    assert_eq!(count, count2);
    unsafe {
        trisim_string_free(text);
        trisim_netlist_free(again);
    }

    let names: Vec<CString> = ["a", "b", "cin"]
        .iter()
        .map(|s| CString::new(*s).unwrap())
        .collect();
    let ptrs: Vec<*const c_char> = names.iter().map(|s| s.as_ptr()).collect();
    let sum = CString::new("sum").unwrap();
    let (mut kind, mut level) = (TrisimLevel::Floating, -1.0);
    let st = unsafe {
        trisim_netlist_steady_state(
            n,
            ptrs.as_ptr(),
            [0.45, 0.45, 0.0].as_ptr(),
            3,
            0.9,
            sum.as_ptr(),
            &mut kind,
            &mut level,
        )
    };
    assert_eq!(st, TrisimStatus::Ok);
    assert_eq!((kind, level), (TrisimLevel::Volts, 0.9));

    let st = unsafe {
        trisim_netlist_steady_state(
            n,
            ptrs.as_ptr(),
            [0.45].as_ptr(),
            1,
            0.9,
            sum.as_ptr(),
            &mut kind,
            &mut level,
        )
    };
    assert_eq!(st, TrisimStatus::InvalidArgument);

    let (mut d1, mut d2) = (0.0, 0.0);
    let other = builtin("design2");
    assert_eq!(
        unsafe { trisim_netlist_delay(n, sum.as_ptr(), 0.9, 1e-15, &mut d1) },
        TrisimStatus::Ok
    );
    assert_eq!(
        unsafe { trisim_netlist_delay(other, sum.as_ptr(), 0.9, 1e-15, &mut d2) },
        TrisimStatus::Ok
    );
    assert!(d2 < d1);
    unsafe {
        trisim_netlist_free(n);
        trisim_netlist_free(other);
        trisim_netlist_free(ptr::null_mut());
        trisim_string_free(ptr::null_mut());
    }
}

#[test]
fn parse_errors() {
    let bad = CString::new("MN1 out in GND xfet 19 0 3\n").unwrap();
    let mut n = ptr::null_mut();
    assert_eq!(
        unsafe { trisim_netlist_parse(bad.as_ptr(), &mut n) },
        TrisimStatus::Parse
    );
    assert!(n.is_null());
    assert!(last_error().contains("line 1"));
    assert_eq!(
        unsafe { trisim_netlist_parse(ptr::null(), &mut n) },
        TrisimStatus::NullPointer
    );
    let unknown = CString::new("nand").unwrap();
    assert_eq!(
        unsafe { trisim_netlist_builtin(unknown.as_ptr(), 0.9, &mut n) },
        TrisimStatus::InvalidArgument
    );
    let invalid = [0xffu8 as c_char, 0];
    assert_eq!(
        unsafe { trisim_netlist_parse(invalid.as_ptr(), &mut n) },
        TrisimStatus::InvalidUtf8
    );
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(trisim_version()) }
        .to_str()
        .unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_exports() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/trisim.h")).unwrap();
    for symbol in [
        "trisim_last_error",
        "trisim_netlist_parse",
        "trisim_netlist_builtin",
        "trisim_netlist_free",
        "trisim_netlist_serialize",
        "trisim_netlist_steady_state",
        "trisim_netlist_delay",
        "trisim_full_add",
        "trisim_adder_eval",
        "trisim_threshold_voltage",
        "TRISIM_STATUS_NON_CONVERGENT",
        "typedef struct TrisimNetlist TrisimNetlist;",
    ] {
        assert!(header.contains(symbol), "{symbol} missing from trisim.h");
    }
}

#[test]
fn c_program_links_against_staticlib() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|p| p.parent()).unwrap();
    let lib = profile_dir.join("libtrisim_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!(
            "skipping: no C compiler or static library at {}",
            lib.display()
        );
        return;
    }
    let out = std::env::temp_dir().join(format!("trisim-smoke-{}", std::process::id()));
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "C smoke test failed to compile");
    let run = Command::new(&out).output().unwrap();
    let _ = std::fs::remove_file(&out);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&run.stdout), "ok\n");
}
