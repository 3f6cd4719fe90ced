use std::path::{Path, PathBuf};
use std::process::Command;

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/bathkit.h")
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(header()).unwrap();
    let src = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() > 10);
    for name in exports {
        assert!(h.contains(&format!("{name}(")), "{name} missing from header");
    }
    for ty in ["typedef struct BkSeries BkSeries;", "BK_STATUS_INVALID_INPUT = 2"] {
        assert!(h.contains(ty), "{ty}");
    }
}

/// Compiles and runs a small C program against the static library when a C
/// compiler and the archive are available.
#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libbathkit_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipped: no C compiler or {} missing", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("main.c");
    std::fs::write(
        &c,
        r#"#include <stdio.h>
#include <math.h>
#include "bathkit.h"
int main(void) {
    BkPadeParams *p = NULL;
    if (bk_pade_new(1, BK_STATISTICS_BOSE_EINSTEIN, 1.0, 1.0, &p) != BK_STATUS_OK) return 1;
    double xi, w;
    if (bk_pade_pole(p, 0, &xi, &w) != BK_STATUS_OK) return 2;
    bk_pade_free(p);
    if (fabs(xi - 2.0 * sqrt(15.0)) > 1e-12 || fabs(w - 2.5) > 1e-12) return 3;
    if (bk_pade_new(1, BK_STATISTICS_BOSE_EINSTEIN, -1.0, 1.0, &p) != BK_STATUS_INVALID_INPUT) return 4;
    printf("%s\n", bk_last_error());
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("main");
    let status = Command::new("cc")
        .arg(&c)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).contains("beta"));
}
