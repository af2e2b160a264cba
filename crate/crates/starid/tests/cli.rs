use std::path::Path;
use std::process::{Command, Output};

fn starid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_starid"))
        .args(args)
        .env_remove("STARID_CATALOG")
        .output()
        .expect("spawn starid")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(starid(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn missing_catalog_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope");
    let o = starid(&["gen-images", "--catalog", missing.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn build_generate_identify() {
    let source = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/hip2.csv");
    let dir = tempfile::tempdir().unwrap();
    let cat = dir.path().join("cat");
    let images = dir.path().join("img");
    let (cat_s, img_s) = (cat.to_str().unwrap(), images.to_str().unwrap());

    let o = starid(&["build-catalog", "--source", source.to_str().unwrap(), "--mag-cutoff", "4", "--out", cat_s]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(cat.join("manifest.txt").exists());

    let o = starid(&["gen-images", "--catalog", cat_s, "--count", "2", "--seed", "5", "--out", img_s]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let image = images.join("image_00000.txt");
    for method in ["ang", "pyr", "com"] {
        let o = starid(&["identify", "--catalog", cat_s, "--method", method, "--image", image.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let out = stdout(&o);
        assert!(out.contains("outcome=identified"), "{out}");
        assert!(out.lines().any(|l| l.starts_with("map ")), "{out}");
        assert!(out.contains("correct=true"), "{out}");
    }
}

#[test]
fn bench_writes_csv_with_header() {
    let source = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/hip2.csv");
    let dir = tempfile::tempdir().unwrap();
    let cat = dir.path().join("cat");
    let out = dir.path().join("out");
    let cat_s = cat.to_str().unwrap();
    assert!(starid(&["build-catalog", "--source", source.to_str().unwrap(), "--mag-cutoff", "4", "--out", cat_s])
        .status
        .success());
    let o = starid(&[
        "bench",
        "--catalog",
        cat_s,
        "--experiment",
        "query",
        "--trials",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("query.csv")).unwrap();
    assert!(csv.starts_with("method,"));
    assert_eq!(csv.lines().count(), 1 + 5 * 6);
}
