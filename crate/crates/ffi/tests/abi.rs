use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use embedgeo_ffi::*;

fn last_name() -> String {
    unsafe { CStr::from_ptr(egeo_last_error_name()) }
        .to_str()
        .unwrap()
        .to_string()
}

fn from_rows(rows: &[f64], n: usize, dim: usize) -> *mut EgeoEmbeddings {
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { egeo_embeddings_from_rows(rows.as_ptr(), n, dim, &mut out) },
        EgeoStatus::Ok
    );
    out
}

fn cstr(p: &Path) -> CString {
    CString::new(p.to_str().unwrap()).unwrap()
}

#[test]
fn write_read_and_measure() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<f64> = (0..200).map(|i| ((i * 37) % 101) as f64 / 10.0).collect();
    let set = from_rows(&rows, 50, 4);
    for (name, fmt) in [("x.emb1", EgeoFormat::Auto), ("x.csv", EgeoFormat::Csv)] {
        let path = cstr(&dir.path().join(name));
        unsafe {
            assert_eq!(egeo_embeddings_write(set, path.as_ptr(), fmt, false), EgeoStatus::Ok);
            let mut back = ptr::null_mut();
            assert_eq!(
                egeo_embeddings_read(path.as_ptr(), EgeoFormat::Auto, &mut back),
                EgeoStatus::Ok
            );
            let (mut n, mut d) = (0, 0);
            egeo_embeddings_shape(back, &mut n, &mut d);
            assert_eq!((n, d), (50, 4));
            let mut w = f64::NAN;
            assert_eq!(egeo_exact_w1(set, back, EgeoMetric::L1, &mut w), EgeoStatus::Ok);
            assert_eq!(w, 0.0);
            egeo_embeddings_free(back);
        }
    }
    let mut id = 0.0;
    assert_eq!(
        unsafe { egeo_intrinsic_dim(set, 5, EgeoEstimator::Mle, &mut id) },
        EgeoStatus::Ok
    );
    assert!(id.is_finite() && id > 0.0);
    unsafe { egeo_embeddings_free(set) };
}

#[test]
fn decode_errors_carry_module_names() {
    let junk = b"XMB1 not really";
    let mut out = ptr::null_mut();
    let s = unsafe { egeo_embeddings_decode(junk.as_ptr(), junk.len(), EgeoFormat::Emb1, &mut out) };
    assert_eq!(s, EgeoStatus::Data);
    assert_eq!(last_name(), "BadMagic");
    assert!(out.is_null());

    let mut w = ptr::null_mut();
    let s = unsafe { egeo_weights_decode(junk.as_ptr(), junk.len(), &mut w) };
    assert_eq!(s, EgeoStatus::Data);

    let missing = CString::new("/nonexistent/x.emb1").unwrap();
    assert_eq!(
        unsafe { egeo_embeddings_read(missing.as_ptr(), EgeoFormat::Auto, &mut out) },
        EgeoStatus::Io
    );
    assert_eq!(last_name(), "Io");
}

#[test]
fn errors_clear_after_success() {
    let set = from_rows(&[0.0, 1.0, 2.0], 3, 1);
    let mut v = 0.0;
    assert_eq!(
        unsafe { egeo_intrinsic_dim(set, 10, EgeoEstimator::Mle, &mut v) },
        EgeoStatus::IntrinsicDim
    );
    assert!(!last_name().is_empty());
    assert_eq!(unsafe { egeo_l1_diameter(set, 0, 0, &mut v) }, EgeoStatus::Ok);
    assert_eq!(v, 2.0);
    assert_eq!(last_name(), "");
    unsafe { egeo_embeddings_free(set) };
}

#[test]
fn null_arguments_are_rejected() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(egeo_l1_diameter(ptr::null(), 0, 0, &mut v), EgeoStatus::NullPointer);
        assert_eq!(
            egeo_spectral_norm(ptr::null(), 2, 2, 0.0, 0, &mut v),
            EgeoStatus::NullPointer
        );
        assert_eq!(
            egeo_evaluate_bound(ptr::null(), &mut v, ptr::null_mut(), ptr::null_mut()),
            EgeoStatus::NullPointer
        );
        assert_eq!(
            egeo_embeddings_from_rows([1.0].as_ptr(), 0, 3, &mut ptr::null_mut()),
            EgeoStatus::InvalidArgument
        );
        egeo_embeddings_free(ptr::null_mut());
        egeo_weights_free(ptr::null_mut());
        egeo_string_free(ptr::null_mut());
    }
}

#[test]
fn sinkhorn_null_config_uses_defaults() {
    let a = from_rows(&[0.0, 0.0, 1.0, 1.0], 2, 2);
    let b = from_rows(&[0.5, 0.0, 1.5, 1.0], 2, 2);
    let mut with_null = EgeoTransportResult::default();
    let mut with_default = EgeoTransportResult::default();
    let cfg = egeo_sinkhorn_default_config();
    assert_eq!(cfg.max_iter, 200);
    unsafe {
        assert_eq!(egeo_sinkhorn_w1(a, b, ptr::null(), &mut with_null), EgeoStatus::Ok);
        assert_eq!(egeo_sinkhorn_w1(a, b, &cfg, &mut with_default), EgeoStatus::Ok);
    }
    assert_eq!(with_null, with_default);
    assert!((with_null.cost - 0.5).abs() < 1e-6, "{}", with_null.cost);

    let bad = EgeoSinkhornConfig { epsilon: -1.0, ..cfg };
    let s = unsafe { egeo_sinkhorn_w1(a, b, &bad, &mut with_null) };
    assert_eq!(s, EgeoStatus::Transport);
    unsafe {
        egeo_embeddings_free(a);
        egeo_embeddings_free(b);
    }
}

#[test]
fn weights_and_suffix_products() {
    let stack = embedgeo::dataio::WeightStack::new(vec![
        embedgeo::dataio::Matrix::from_diag(&[2.0, 1.0]),
        embedgeo::dataio::Matrix::from_diag(&[3.0, 0.5]),
    ])
    .unwrap();
    let bytes = embedgeo::dataio::write_weight_stack(&stack);
    let mut w = ptr::null_mut();
    assert_eq!(
        unsafe { egeo_weights_decode(bytes.as_ptr(), bytes.len(), &mut w) },
        EgeoStatus::Ok
    );
    let mut len = 0;
    unsafe { egeo_weights_len(w, &mut len) };
    assert_eq!(len, 2);
    let suffix: Vec<f64> = (0..=2)
        .map(|i| {
            let mut v = 0.0;
            assert_eq!(unsafe { egeo_suffix_lipschitz(w, i, &mut v) }, EgeoStatus::Ok);
            v
        })
        .collect();
    for (got, want) in suffix.iter().zip([6.0, 3.0, 1.0]) {
        assert!((got - want).abs() < 1e-9, "{suffix:?}");
    }
    let mut v = 0.0;
    assert_eq!(unsafe { egeo_suffix_lipschitz(w, 3, &mut v) }, EgeoStatus::Lipschitz);
    unsafe { egeo_weights_free(w) };
}

#[test]
fn bound_json_report_and_bad_config() {
    let cfg = CString::new(
        r#"{"layers":[{"d":4,"C":1,"Ddiam":2,"L_F":1,"L_Fstar":1,"bayes_gap":0}],
            "n":10000,"delta":0.05,"eps":0.1,"M_F":1,"M_Fstar":1,"L":1}"#,
    )
    .unwrap();
    let (mut gap, mut k, mut report): (f64, usize, *mut c_char) = (0.0, 7, ptr::null_mut());
    assert_eq!(
        unsafe { egeo_evaluate_bound(cfg.as_ptr(), &mut gap, &mut k, &mut report) },
        EgeoStatus::Ok
    );
    assert_eq!(k, 0);
    let json: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(report) }.to_str().unwrap()).unwrap();
    assert_eq!(json["min_gap_bound"].as_f64(), Some(gap));
    assert!((gap - 0.300366).abs() < 1e-5, "{gap}");
    unsafe { egeo_string_free(report) };

    let bad = CString::new(r#"{"layers": 3}"#).unwrap();
    let s = unsafe { egeo_evaluate_bound(bad.as_ptr(), &mut gap, &mut k, ptr::null_mut()) };
    assert_eq!(s, EgeoStatus::Bound);
    assert_eq!(last_name(), "BadConfig");

    let empty = CString::new(r#"{"layers":[],"n":10,"delta":0.1,"M_F":1,"M_Fstar":1}"#).unwrap();
    let s = unsafe { egeo_evaluate_bound(empty.as_ptr(), &mut gap, &mut k, ptr::null_mut()) };
    assert_eq!(s, EgeoStatus::Bound);
    assert_eq!(last_name(), "NoLayers");
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(egeo_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn target_dir() -> PathBuf {
    // tests/abi-<hash> lives in target/<profile>/deps
    std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf()
}

fn include_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include")
}

#[test]
fn header_is_valid_c_and_cxx() {
    let header = include_dir().join("embedgeo.h");
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let out = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(&header)
            .output()
            .expect("C compiler on PATH");
        assert!(
            out.status.success(),
            "{compiler}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn c_program_links_against_static_library() {
    let lib = target_dir().join("libembedgeo_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/c/smoke.c");
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(include_dir())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(
        run.status.success(),
        "exit {:?}: {stdout} {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stderr)
    );
    assert_eq!(stdout.trim(), format!("ok {}", env!("CARGO_PKG_VERSION")));
}
