use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").expect("cargo sets CARGO_MANIFEST_DIR"));
    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        include_guard: Some("QSHUTTER_H".into()),
        cpp_compat: true,
        documentation: true,
        usize_is_size_t: true,
        header: Some("/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */".into()),
        enumeration: cbindgen::EnumConfig { prefix_with_name: true, rename_variants: cbindgen::RenameRule::ScreamingSnakeCase, ..Default::default() },
        ..Default::default()
    };
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=build.rs");
    match cbindgen::generate_with_config(&crate_dir, config) {
        Ok(bindings) => {
            bindings.write_to_file(crate_dir.join("include").join("qshutter.h"));
        }
        Err(e) => println!("cargo:warning=header not regenerated: {e}"),
    }
}
