use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "parity_constraints.h"

int main(void) {
    PcInstance *inst = NULL;
    if (pc_instance_sample(PC_DISTRIBUTION_BIMODAL, 1e9, 6, -1.0, 7, &inst) != PC_STATUS_OK) return 1;
    PcBounds *b = NULL;
    if (pc_bounds_compute(inst, 1, &b) != PC_STATUS_OK) return 2;
    double c = 0.0;
    if (pc_bounds_lower(b, 1, &c) != PC_STATUS_OK) return 3;
    printf("%.1f\n", c);
    pc_bounds_free(b);
    pc_instance_free(inst);
    double x = 0.0;
    if (pc_probit(2.0, &x) != PC_STATUS_INVALID_ARGUMENT) return 4;
    char msg[128];
    if (pc_last_error_message(msg, sizeof msg) == 0) return 5;
    return 0;
}
"#;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok()
}

#[test]
fn header_is_generated() {
    let h = std::fs::read_to_string(crate_dir().join("include/parity_constraints.h")).unwrap();
    for name in ["pc_instance_sample", "pc_bounds_compute", "pc_last_error_message", "typedef struct PcInstance PcInstance", "PC_STATUS_CAPACITY = 2"] {
        assert!(h.contains(name), "{name}");
    }
}

fn static_lib() -> Option<PathBuf> {
    // tests/ -> target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let lib = profile_dir.join("libparity_constraints_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn c_program_compiles_and_runs() {
    if !have_cc() {
        eprintln!("no C compiler; skipped");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let include = crate_dir().join("include");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"])
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());

    let Some(lib) = static_lib() else {
        eprintln!("static library not built; link step skipped");
        return;
    };
    let exe = dir.path().join("main");
    let status = Command::new("cc")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(Path::new(&exe)).output().unwrap();
    assert!(out.status.success(), "{out:?}");
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "8.0");
}
