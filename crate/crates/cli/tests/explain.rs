mod common;

use std::path::{Path, PathBuf};

use common::{code, events, qgradcam, s, stderr};

/// A quickly trained 4-qubit shapes model and one exported sample image.
fn fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let data = dir.join("data");
    assert_eq!(code(&qgradcam(&["demo-data", "--kind", "shapes", "--count", "4", "--seed", "3", "--out", s(&data), "--pgm"])), 0);
    let run = dir.join("run");
    let o = qgradcam(&[
        "train", "--dataset", "synth-shapes", "--count", "40", "--train-per-class", "16", "--val-per-class", "2",
        "--test-per-class", "2", "--epochs", "2", "--qubits", "4", "--blocks", "2", "--out", s(&run),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    (run.join("model.qgcm"), data.join("sample-00001.class2.pgm"))
}

fn explain(ckpt: &Path, input: &Path, out: &Path, extra: &[&str]) -> std::process::Output {
    qgradcam(&[&["explain", "--checkpoint", s(ckpt), "--input", s(input), "--out", s(out)][..], extra].concat())
}

#[test]
fn writes_normalized_heatmap_and_overlay_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let (ckpt, input) = fixture(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let o = explain(&ckpt, &input, &a, &["--class", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let ev = events(&o).pop().unwrap();
    assert_eq!(ev["class"], 2);
    let pgm = a.join("sample-00001.class2.class2.heatmap.pgm");
    let png = a.join("sample-00001.class2.class2.overlay.png");
    assert!(pgm.is_file() && png.is_file());

    let heat = qgradcam::explain::read_grayscale(&pgm).unwrap();
    assert_eq!(heat.dim(), (16, 16));
    let max = heat.iter().cloned().fold(0.0, f64::max);
    assert!(max == 1.0 || heat.iter().all(|v| *v == 0.0), "max {max}");
    let overlay = image::open(&png).unwrap();
    assert_eq!((overlay.width(), overlay.height()), (16, 16));

    assert_eq!(code(&explain(&ckpt, &input, &b, &["--class", "2"])), 0);
    assert_eq!(std::fs::read(&pgm).unwrap(), std::fs::read(b.join("sample-00001.class2.class2.heatmap.pgm")).unwrap());
    assert_eq!(std::fs::read(&png).unwrap(), std::fs::read(b.join("sample-00001.class2.class2.overlay.png")).unwrap());
}

#[test]
fn predicted_class_and_analytic_path() {
    let dir = tempfile::tempdir().unwrap();
    let (ckpt, input) = fixture(dir.path());
    let o = explain(&ckpt, &input, dir.path(), &["--grad-path", "analytic"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let ev = events(&o).pop().unwrap();
    assert_eq!(ev["class"], ev["predicted"]);
}

#[test]
fn bad_class_input_or_checkpoint_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let (ckpt, input) = fixture(dir.path());
    for class in ["0", "3", "two"] {
        let o = explain(&ckpt, &input, dir.path(), &["--class", class]);
        assert_eq!(code(&o), 2, "class {class}");
        assert!(stderr(&o).contains("--class"));
    }
    let corrupt = dir.path().join("corrupt.qgcm");
    let mut bytes = std::fs::read(&ckpt).unwrap();
    bytes.truncate(bytes.len() / 2);
    std::fs::write(&corrupt, bytes).unwrap();
    assert_eq!(code(&explain(&corrupt, &input, dir.path(), &[])), 2);
    assert_eq!(code(&explain(&ckpt, &dir.path().join("missing.pgm"), dir.path(), &[])), 2);
    assert_eq!(code(&explain(&ckpt, &input, dir.path(), &["--grad-path", "fd"])), 2);
}
