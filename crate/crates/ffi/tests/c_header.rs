//! Compiles and links a small C program against the generated header and
//! the static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "sphere_jacobi.h"

int main(void) {
    SjSurface *s = NULL;
    double lambda = 0.0;
    SjConeVerdict v;
    if (sj_surface_clifford(1, 1, &s) != SJ_STATUS_OK) return 10;
    if (sj_first_eigenvalue(s, SJ_BACKEND_ANALYTIC, 0, &lambda) != SJ_STATUS_OK) return 11;
    sj_surface_free(s);
    if (lambda != -4.0) return 12;
    if (sj_surface_equator(0, &s) != SJ_STATUS_INVALID_ARGUMENT) return 13;
    if (sj_last_error()[0] == '\0') return 14;
    if (sj_cone_verdict(6, &v) != SJ_STATUS_OK || !v.stable_possible) return 15;
    printf("%s %g\n", sj_version(), lambda);
    return 0;
}
"#;

fn compiler() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc).arg("--version").output().ok()?;
    Some(cc)
}

#[test]
fn c_program_links_and_runs() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler found, skipping");
        return;
    };
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libsphere_jacobi_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built, skipping link step", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.trim(), format!("{} -4", env!("CARGO_PKG_VERSION")));
}
