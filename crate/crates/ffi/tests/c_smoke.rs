//! Compiles and runs a real C program against the generated header and the
//! static library, proving the ABI works for a foreign toolchain and not
//! just for Rust callers.

use std::path::PathBuf;
use std::process::Command;

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "zenocode.h"

int main(void) {
    if (zc_abi_version() != 1) return 10;

    int32_t ok = -1;
    if (zc_hamming_bound(4, 3, &ok) != ZC_STATUS_OK || ok != 1) return 11;
    if (zc_hamming_bound(4, 4, &ok) != ZC_STATUS_OK || ok != 0) return 12;

    /* sigma_z on one qubit, row-major interleaved. */
    const double z[8] = {1, 0, 0, 0, 0, 0, -1, 0};
    ZcGeneratorSet *gens = NULL;
    if (zc_generator_set_from_entries(2, 1, z, &gens) != ZC_STATUS_OK) return 13;
    if (zc_generator_set_dim(gens) != 2 || zc_generator_set_len(gens) != 1) return 14;

    ZcCodeSpace *code = NULL;
    size_t iters = 0;
    double residual = 1.0;
    if (zc_find_code(gens, 1, 1e-10, 5000, 7, &code, &iters, &residual) != ZC_STATUS_OK) {
        char msg[256];
        zc_last_error_message(msg, sizeof msg);
        fprintf(stderr, "find_code failed: %s\n", msg);
        return 15;
    }
    if (residual > 1e-10) return 16;

    double w[4];
    if (zc_code_space_codeword(code, 0, w, 4) != ZC_STATUS_OK) return 17;
    double z_expect = w[0]*w[0] + w[1]*w[1] - w[2]*w[2] - w[3]*w[3];
    if (z_expect > 1e-9 || z_expect < -1e-9) return 18;

    /* Error path: null out pointer sets a readable message. */
    if (zc_hamming_bound(4, 3, NULL) != ZC_STATUS_NULL_POINTER) return 19;
    char msg[256];
    size_t n = zc_last_error_message(msg, sizeof msg);
    if (n < 2 || strlen(msg) == 0) return 20;

    zc_code_space_free(code);
    zc_generator_set_free(gens);
    printf("c-smoke residual %.3e iterations %zu\n", residual, iters);
    return 0;
}
"#;

#[test]
fn c_program_compiles_links_and_runs() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include_dir = crate_dir.join("include");
    assert!(include_dir.join("zenocode.h").is_file(), "header not generated");

    // The staticlib lands next to the test binary's deps directory.
    let mut lib_dir = PathBuf::from(std::env::current_exe().unwrap());
    lib_dir.pop(); // test binary name
    lib_dir.pop(); // deps/
    let staticlib = lib_dir.join("libzenocode_ffi.a");
    assert!(staticlib.is_file(), "missing {}", staticlib.display());

    let work = tempfile::tempdir().unwrap();
    let src = work.path().join("main.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let exe = work.path().join("smoke");

    let compile = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include_dir)
        .arg(&src)
        .arg(&staticlib)
        .arg("-lm")
        .arg("-lpthread")
        .arg("-ldl")
        .arg("-o")
        .arg(&exe)
        .output()
        .expect("cc not runnable");
    assert!(
        compile.status.success(),
        "compile failed:\n{}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = Command::new(&exe).output().expect("smoke binary not runnable");
    assert!(
        run.status.success(),
        "smoke run failed with {:?}:\n{}",
        run.status.code(),
        String::from_utf8_lossy(&run.stderr)
    );
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("c-smoke residual"), "unexpected output: {stdout}");
}
