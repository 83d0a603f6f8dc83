use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spectracc")).args(args).output().expect("spawn spectracc")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path) -> PathBuf {
    ok(&["synth", "--out", s(dir), "--scenes", "6", "--size", "24", "--seed", "7"]);
    dir.join("manifest.txt")
}

#[test]
fn synth_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    synth(a.path());
    synth(b.path());
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 7);
    for n in names {
        assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn fit_build_classify_recovers_relit_illuminant() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path());
    let ill = repo("data/cie/manifest.txt");
    let proj = dir.path().join("ill_pca.proj");
    let model = dir.path().join("ill_pca.cbcm");
    ok(&["fit", "--method", "ill-pca", "--dprime", "3", "--illuminants", s(&ill), "--out", s(&proj)]);
    ok(&[
        "build-model",
        "--projection",
        s(&proj),
        "--dataset",
        s(&manifest),
        "--illuminants",
        s(&ill),
        "--bins",
        "20",
        "--out",
        s(&model),
    ]);
    // scene_000 is a training scene
    let out = ok(&[
        "classify",
        "--model",
        s(&model),
        "--projection",
        s(&proj),
        "--illuminants",
        s(&ill),
        "--image",
        s(&dir.path().join("scene_000.scube")),
        "--relight",
        "A",
    ]);
    assert!(out.lines().any(|l| l == "estimate A"), "{out}");
    assert!(out.lines().any(|l| l == "angular_error 0"), "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("score ")).count(), 28);
}

#[test]
fn rgb_fit_rejects_other_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "fit",
        "--method",
        "rgb",
        "--dprime",
        "4",
        "--camera",
        s(&repo("data/cameras/canon_300d.csv")),
        "--illuminants",
        s(&repo("data/cie/manifest.txt")),
        "--out",
        s(&dir.path().join("x.proj")),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("d′ = 3"));
    assert!(!dir.path().join("x.proj").exists());
}

#[test]
fn grid_without_methods_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("grid.toml");
    fs::write(&cfg, "methods = []\n").unwrap();
    let out = run(&["grid", "--config", s(&cfg)]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error:") && err.contains("no methods selected"), "{err}");
}

#[test]
fn grid_writes_report_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let cfg = dir.path().join("grid.toml");
    fs::write(
        &cfg,
        format!(
            "methods = [\"ill-pca\", \"sgw\"]\nbins = [10]\ndims = [2]\nilluminants = \"{}\"\nmodel_downsample = 2\n",
            s(&repo("data/cie/manifest.txt"))
        ),
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    ok(&["grid", "--config", s(&cfg), "--out", s(&out_dir)]);
    let report = fs::read_to_string(out_dir.join("report.csv")).unwrap();
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines[0], "method,d_prime,B,variant,noise_db,mean,median,trimean,best25,worst25,n");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("ILL_PCA,2,10,-,clean,"), "{report}");
    assert!(lines[2].starts_with("SGW,-,-,-,clean,"));
    // 2 test scenes under 28 illuminants
    assert!(lines.iter().skip(1).all(|l| l.ends_with(",56")));
    let raw = fs::read_to_string(out_dir.join("report_raw.csv")).unwrap();
    assert_eq!(raw.lines().count(), 1 + 2 * 56);
}

#[test]
fn export_pca_coords_marks_projection_set() {
    let dir = tempfile::tempdir().unwrap();
    let ill = repo("data/cie/manifest.txt");
    let names = dir.path().join("set.txt");
    ok(&["select-projection-set", "--illuminants", s(&ill), "--k", "5", "--out", s(&names)]);
    let csv = dir.path().join("coords.csv");
    ok(&[
        "export-pca-coords",
        "--illuminants",
        s(&ill),
        "--projection-set",
        s(&names),
        "--components",
        "2",
        "--out",
        s(&csv),
    ]);
    let text = fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("name,pc1,pc2,projection_set"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 28);
    assert_eq!(rows.iter().filter(|r| r[3] == "1").count(), 5);
    assert!(rows.iter().all(|r| r[1].parse::<f64>().is_ok() && r[2].parse::<f64>().is_ok()));
}

#[test]
fn shipped_configs_validate() {
    for name in ["grid.toml", "rgb.toml"] {
        let cfg = spectracc::evaluation::GridConfig::from_file(repo("configs").join(name)).unwrap();
        cfg.parsed_methods().unwrap();
        cfg.noise_method().unwrap();
        assert!(cfg.illuminants.exists(), "{name}");
        assert!(cfg.cameras.iter().all(|c| c.exists()), "{name}");
    }
}
