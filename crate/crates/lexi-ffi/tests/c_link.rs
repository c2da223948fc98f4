//! Compiles and runs a real C client against the generated header and the
//! static library, proving the ABI end to end. Skips quietly when no C
//! compiler is installed.

use std::path::PathBuf;
use std::process::Command;

const CLIENT: &str = r#"
#include <stdio.h>
#include <string.h>
#include "lexi.h"

int main(void) {
    uint16_t values[512];
    for (int i = 0; i < 512; i++) {
        uint16_t e = (uint16_t)(0x7A + (i % 5));
        values[i] = (uint16_t)(((i % 2) << 15) | (e << 7) | (i % 97));
    }

    struct LexiBuffer packed = {0};
    if (lexi_compress_bf16(values, 512, &packed) != LEXI_OK) return 1;
    struct LexiBuffer raw = {0};
    if (lexi_decompress(packed.data, packed.len, &raw) != LEXI_OK) return 2;
    if (raw.len != 1024) return 3;
    for (int i = 0; i < 512; i++) {
        uint16_t v = (uint16_t)(raw.data[2 * i] | (raw.data[2 * i + 1] << 8));
        if (v != values[i]) return 4;
    }

    struct LexiProfile profile;
    if (lexi_profile(values, 512, &profile) != LEXI_OK) return 5;
    if (profile.total_values != 512 || profile.distinct_exponents != 5) return 6;

    packed.data[5] ^= 0xFF; /* corrupt the declared value count */
    struct LexiBuffer junk = {0};
    if (lexi_decompress(packed.data, packed.len, &junk) != LEXI_CORRUPT_DATA) return 7;
    if (strcmp(lexi_status_name(LEXI_CORRUPT_DATA), "corrupt data") != 0) return 8;
    lexi_buffer_free(&raw);
    lexi_buffer_free(&packed);
    if (raw.data != NULL || packed.data != NULL) return 9;

    uint8_t exps[100];
    for (int i = 0; i < 100; i++) exps[i] = (uint8_t)(0x7C + (i % 3));
    struct LexiCodebook *cb = NULL;
    if (lexi_codebook_build(exps, 100, &cb) != LEXI_OK) return 10;
    if (lexi_codebook_coded_count(cb) != 3) return 11;
    if (lexi_codebook_code_length(cb, 0x7C) < 1) return 12;
    if (lexi_codebook_code_length(cb, 0x00) != 0) return 13;
    struct LexiBuffer header = {0};
    if (lexi_codebook_header(cb, &header) != LEXI_OK) return 14;
    if (header.len != 1 + 2 * 3) return 15;
    lexi_buffer_free(&header);
    lexi_codebook_free(cb);
    return 0;
}
"#;

#[test]
fn c_client_round_trips_through_the_static_library() {
    let cc = ["cc", "gcc", "clang"]
        .iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .copied();
    let Some(cc) = cc else {
        eprintln!("no C compiler found; skipping ABI link test");
        return;
    };

    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include = manifest.join("include");
    assert!(include.join("lexi.h").is_file(), "cbindgen header missing");
    let profile = if cfg!(debug_assertions) { "debug" } else { "release" };
    let lib_dir = manifest.join("../../target").join(profile);
    assert!(
        lib_dir.join("liblexi_ffi.a").is_file(),
        "staticlib missing at {}",
        lib_dir.display()
    );

    let tmp = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(&tmp).unwrap();
    let src = tmp.join("client.c");
    let bin = tmp.join("client");
    std::fs::write(&src, CLIENT).unwrap();

    let compile = Command::new(cc)
        .arg(&src)
        .arg("-o")
        .arg(&bin)
        .arg("-I")
        .arg(&include)
        .arg("-L")
        .arg(&lib_dir)
        .args(["-llexi_ffi", "-lpthread", "-ldl", "-lm"])
        .args(["-Wall", "-Werror", "-std=c99"])
        .output()
        .unwrap();
    assert!(
        compile.status.success(),
        "cc failed: {}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = Command::new(&bin).output().unwrap();
    assert!(
        run.status.success(),
        "C client exited with {:?}",
        run.status.code()
    );
}
