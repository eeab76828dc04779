use std::path::Path;
use std::process::Command;

/// The generated header compiles as C and as C++.
#[test]
fn header_compiles() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = root.join("include/nuclab.h");
    let text = std::fs::read_to_string(&header).expect("header is generated by the build script");
    for sym in ["nuclab_construction_new", "nuclab_last_error_message", "NUCLAB_STATUS_OK", "NuclabField"] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"nuclab.h\"\nint f(void) {\n  NuclabConstruction *c = 0;\n  NuclabEnergy e;\n\
         NuclabStatus s = nuclab_construction_new(\"{}\", &c);\n\
         if (s == NUCLAB_STATUS_OK) { s = nuclab_construction_energy(c, 1.0, &e); nuclab_construction_free(c); }\n\
         return (int)s;\n}\n",
    )
    .unwrap();
    for (cc, lang) in [("cc", "c"), ("c++", "c++")] {
        let Ok(out) = Command::new(cc)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang, "-I"])
            .arg(root.join("include"))
            .arg(&src)
            .output()
        else {
            eprintln!("{cc} not available, skipped");
            continue;
        };
        assert!(out.status.success(), "{cc}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
