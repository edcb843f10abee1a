use std::env;
use std::path::Path;

fn main() {
    let crate_dir = env::var("CARGO_MANIFEST_DIR").unwrap();
    let header = Path::new(&crate_dir)
        .join("include")
        .join("sparse_resilience.h");
    std::fs::create_dir_all(header.parent().unwrap()).unwrap();

    cbindgen::generate(&crate_dir)
        .expect("unable to generate C bindings")
        .write_to_file(&header);

    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
