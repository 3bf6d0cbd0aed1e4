use std::path::Path;
use std::process::{Command, Output};

fn scribe(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scribe"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("run scribe")
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

fn two_hand_corpus(dir: &Path) {
    for (hand, first) in [("a", "1"), ("b", "3")] {
        let o = scribe(dir, &["synth", "--hand", hand, "--pages", "2", "--first", first, "--seed", "3", "--out", "corpus"]);
        assert!(o.status.success(), "{}", text(&o));
    }
    std::fs::write(
        dir.join("run.toml"),
        r#"
images_dir = "corpus"
seed = 7
[[pages]]
first = 1
last = 2
hand = "A"
[[pages]]
first = 3
last = 4
hand = "B"
"#,
    )
    .unwrap();
}

#[test]
fn extract_then_cluster_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    two_hand_corpus(dir);
    let o = scribe(dir, &["extract", "--config", "run.toml", "--out", "one"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    let o = scribe(dir, &["extract", "--config", "run.toml", "--out", "two", "--workers", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    let a = std::fs::read(dir.join("one/dataset.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.join("two/dataset.csv")).unwrap());
    let header = String::from_utf8_lossy(&a).lines().next().unwrap().to_string();
    assert_eq!(header.split(',').count(), 100 + 5);

    for out in ["one", "two"] {
        let o = scribe(
            dir,
            &["cluster", "--config", "run.toml", "--dataset", &format!("{out}/dataset.csv"), "--out", out, "--centers", "2", "--centers", "3"],
        );
        assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    }
    for f in ["cluster_pca_c2.json", "cluster_pca_c3.json", "cluster_pca_c2_comp1_comp2.svg", "cluster_pca_c2_scores.csv"] {
        assert_eq!(
            std::fs::read(dir.join("one").join(f)).unwrap(),
            std::fs::read(dir.join("two").join(f)).unwrap(),
            "{f}"
        );
    }
    let report = std::fs::read_to_string(dir.join("one/cluster_pca_c2.json")).unwrap();
    assert!(report.contains(r#""verdict": "pass""#));
    assert!(report.contains(r#""fpc_threshold": 0.7"#));
    let c3 = std::fs::read_to_string(dir.join("one/cluster_pca_c3.json")).unwrap();
    assert!(c3.contains(r#""fpc_threshold": 0.6"#));
}

#[test]
fn six_feature_variant() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    two_hand_corpus(dir);
    let six = "orientation,height,width,corner_angle,aspect_ratio,blob_dog";
    let o = scribe(dir, &["extract", "--config", "run.toml", "--features", six]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    let csv = std::fs::read_to_string(dir.join("out/dataset.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(header.split(',').count(), 60 + 5);
    assert!(header.starts_with("f2_0,"));
    let o = scribe(dir, &["cluster", "--config", "run.toml", "--dataset", "out/dataset.csv", "--reducer", "kpca-rbf"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    assert!(dir.join("out/cluster_kpca_rbf_c2.json").exists());
}

#[test]
fn corrupt_page_is_skipped_with_warning_exit() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    two_hand_corpus(dir);
    let png = dir.join("corpus/page_002.png");
    let bytes = std::fs::read(&png).unwrap();
    std::fs::write(&png, &bytes[..bytes.len() / 3]).unwrap();
    let o = scribe(dir, &["extract", "--config", "run.toml"]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o));
    assert!(text(&o).contains("page_002.png"));
    let csv = std::fs::read_to_string(dir.join("out/dataset.csv")).unwrap();
    let pages: std::collections::BTreeSet<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(100).unwrap()).collect();
    assert_eq!(pages.into_iter().collect::<Vec<_>>(), vec!["1", "3", "4"]);
}

#[test]
fn hard_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let o = scribe(dir, &["extract"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o).contains("seed"));
    let o = scribe(dir, &["cluster", "--seed", "1", "--dataset", "missing.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o).contains("missing.csv"));
    let o = scribe(dir, &["cluster", "--seed", "1", "--reducer", "tsne", "--dataset", "x.csv"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn shift_and_scan_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let o = scribe(dir, &["synth", "--hand", "a", "--pages", "3", "--seed", "5", "--out", "corpus"]);
    assert!(o.status.success(), "{}", text(&o));
    std::fs::write(dir.join("run.toml"), "images_dir = \"corpus\"\nseed = 2\n").unwrap();
    let o = scribe(dir, &["extract", "--config", "run.toml"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));

    let o = scribe(dir, &["shift", "--config", "run.toml", "--left", "out/dataset.csv", "--right", "out/dataset.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    let iters = std::fs::read_to_string(dir.join("out/shift_pca_iterations.csv")).unwrap();
    assert_eq!(iters.lines().count(), 2 + 25);
    assert!(iters.starts_with("# fingerprint "));
    for f in ["shift_pca.json", "shift_pca_fpc.svg", "shift_pca_pct_different.svg"] {
        assert!(dir.join("out").join(f).exists(), "{f}");
    }

    let o = scribe(dir, &["shift", "--config", "run.toml", "--scan", "out/dataset.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    let first = std::fs::read(dir.join("out/scan_pca.json")).unwrap();
    let o = scribe(dir, &["scan", "--config", "run.toml", "--dataset", "out/dataset.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    assert_eq!(first, std::fs::read(dir.join("out/scan_pca.json")).unwrap());
    assert!(dir.join("out/scan_pca_trace.svg").exists());
}
